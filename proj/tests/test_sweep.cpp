#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <sstream>
#include <string>

#include "gfnoma/aoi.hpp"
#include "gfnoma/sweep.hpp"
#include "gfnoma/textio.hpp"

using namespace gfnoma;

namespace {

ExperimentSpec parse_str(const std::string& text) {
  std::istringstream in(text);
  return parse_experiment_spec(in);
}

const std::string kFullSpec =
    "# demo experiment\n"
    "scenario = demo\n"
    "axis = p_db   # decibel sweep\n"
    "values = 0, 10, 30\n"
    "m = 5\n"
    "k = 2\n"
    "n = 8\n"
    "t = 6\n"
    "r = 1\n"
    "ptx = adaptive\n"
    "strategies = oma, noma-dii-analytic, noma-highsnr\n"
    "frames = 2500\n"
    "seed = 42\n";

}  // namespace

TEST_CASE("experiment parser reads the flat key-value format", "[sweep]") {
  const auto spec = parse_str(kFullSpec);
  CHECK(spec.scenario == "demo");
  CHECK(spec.axis == ExperimentSpec::Axis::PowerDb);
  CHECK(spec.values == std::vector<double>{0.0, 10.0, 30.0});
  CHECK(spec.num_users == 5);
  CHECK(spec.num_levels == 2);
  CHECK(spec.slots_per_frame == 8);
  CHECK(spec.slot_duration == 6.0);
  CHECK(spec.target_rate == 1.0);
  CHECK(spec.ptx.mode == PtxSetting::Mode::Adaptive);
  REQUIRE(spec.strategies.size() == 3);
  CHECK(spec.strategies[0] == SweepStrategy::Oma);
  CHECK(spec.strategies[1] == SweepStrategy::NomaDesignIIAnalytic);
  CHECK(spec.strategies[2] == SweepStrategy::NomaHighSnr);
  CHECK(spec.frames == 2500);
  CHECK(spec.seed == 42);

  CHECK(PtxSetting::parse("fixed:0.25").mode == PtxSetting::Mode::Fixed);
  CHECK(PtxSetting::parse("fixed:0.25").fixed_prob == 0.25);
  CHECK(PtxSetting::parse("noma").mode == PtxSetting::Mode::Adaptive);
}

TEST_CASE("strategy tokens round-trip", "[sweep]") {
  for (SweepStrategy s :
       {SweepStrategy::Oma, SweepStrategy::OmaSim, SweepStrategy::NomaDesignISim,
        SweepStrategy::NomaDesignIIAnalytic, SweepStrategy::NomaDesignIISim,
        SweepStrategy::NomaHighSnr})
    CHECK(parse_sweep_strategy(sweep_strategy_token(s)) == s);
  CHECK_THROWS_AS(parse_sweep_strategy("noma"), std::invalid_argument);
}

TEST_CASE("experiment parser rejects malformed input", "[sweep]") {
  const std::string base = "axis = m\nvalues = 2, 4\nstrategies = oma\n";
  CHECK_NOTHROW(parse_str(base));

  CHECK_THROWS_AS(parse_str(base + "frames\n"), std::invalid_argument);       // no '='
  CHECK_THROWS_AS(parse_str(base + "color = red\n"), std::invalid_argument);  // unknown key
  CHECK_THROWS_AS(parse_str("axis = q\n" + base), std::invalid_argument);
  CHECK_THROWS_AS(parse_str(base + "strategies = warp\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_str(base + "frames = soon\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_str(base + "values = 4, 2\n"), std::invalid_argument);  // not ascending
  CHECK_THROWS_AS(parse_str(base + "values = 2, 2\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_str(base + "values = 2.5, 3\n"), std::invalid_argument);  // m axis
  CHECK_THROWS_AS(parse_str(base + "values =\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_str(base + "strategies = oma, oma\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_str(base + "ptx = sometimes\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_str("values = 2, 4\nstrategies = oma\naxis = ptx\nvalues = 0.2, 1.5\n"),
                  std::invalid_argument);
  CHECK_THROWS_AS(parse_str("axis = m\nvalues = 2\n"), std::invalid_argument);  // no strategy

  // line numbers point at the offender
  try {
    parse_str("axis = m\nbad line here\n");
    FAIL("expected a parse error");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).rfind("spec line 2", 0) == 0);
  }
}

TEST_CASE("analytic sweep rows match the chain evaluated directly", "[sweep]") {
  const auto spec = parse_str(kFullSpec);
  const auto rows = run_sweep_rows(spec);
  REQUIRE(rows.size() == spec.values.size() * spec.strategies.size());

  std::size_t idx = 0;
  for (double p_db : spec.values) {
    for (SweepStrategy strategy : spec.strategies) {
      const auto& row = rows[idx++];
      CHECK(row.value == p_db);
      CHECK(row.strategy == strategy);
      CHECK(row.power_db == p_db);
      CHECK(row.status == "ok");
      CHECK_FALSE(row.simulated);

      SystemParams params;
      params.num_users = 5;
      params.num_levels = 2;
      params.slots_per_frame = 8;
      params.slot_duration = 6.0;
      params.power_budget = db_to_linear(p_db);
      TransitionModel model;
      switch (strategy) {
        case SweepStrategy::Oma:
          params.policy = AccessPolicy::oma_adaptive();
          model = build_transition_model(Strategy::Oma, params);
          break;
        case SweepStrategy::NomaHighSnr:
          params.policy = AccessPolicy::noma_adaptive();
          model = build_transition_model(Strategy::NomaHighSnr, params);
          break;
        default:
          params.policy = AccessPolicy::noma_adaptive();
          model = build_transition_model(Strategy::NomaExact, params,
                                         design_ii_levels(1.0, 2));
          break;
      }
      const double expected = average_aoi(model, 8, 6.0).average_aoi;
      CHECK(row.aoi == expected);  // same code path, same arithmetic: exact
      CHECK(row.ptx_token == params.policy.token());
    }
  }
}

TEST_CASE("degenerate sweep cells carry a telling status", "[sweep]") {
  ExperimentSpec spec;
  spec.scenario = "edge";
  spec.axis = ExperimentSpec::Axis::Users;
  spec.values = {1.0, 3.0};
  spec.ptx = PtxSetting::parse("fixed:0");
  spec.strategies = {SweepStrategy::Oma, SweepStrategy::OmaSim,
                     SweepStrategy::NomaDesignISim};
  spec.frames = 50;

  const auto rows = run_sweep_rows(spec);
  REQUIRE(rows.size() == 6);
  // nobody ever transmits: the analytic age diverges and the simulator never
  // sees a delivery
  CHECK(rows[0].status == "absorption-impossible");
  CHECK(rows[1].status == "no-delivery");
  // the worst-case ladder is undefined for a single user
  CHECK(rows[2].status == "invalid-params");
  CHECK(rows[5].status == "no-delivery");
}

TEST_CASE("sweeps are deterministic end to end", "[sweep]") {
  const std::string spec_text =
      "scenario = rerun\naxis = m\nvalues = 2, 4\nk = 2\nframes = 1500\nseed = 9\n"
      "strategies = noma-dii-sim, noma-dii-analytic, oma-sim\n";
  std::ostringstream first, second;
  {
    std::istringstream in(spec_text);
    run_sweep(in, first);
  }
  {
    std::istringstream in(spec_text);
    run_sweep(in, second);
  }
  CHECK(first.str() == second.str());
  CHECK(first.str().rfind(sweep_csv_header(), 0) == 0);
  // header plus one line per cell
  const std::string out = first.str();
  CHECK(std::count(out.begin(), out.end(), '\n') == 1 + 2 * 3);
}

TEST_CASE("csv cells are laid out as announced by the header", "[sweep]") {
  ExperimentSpec spec;
  spec.scenario = "gold";
  spec.axis = ExperimentSpec::Axis::Users;
  spec.values = {5.0};
  spec.num_levels = 2;
  spec.strategies = {SweepStrategy::NomaDesignIIAnalytic};
  const auto rows = run_sweep_rows(spec);
  REQUIRE(rows.size() == 1);
  REQUIRE(rows[0].status == "ok");

  std::ostringstream out;
  write_sweep_csv(rows, out);
  const std::string expected_header(sweep_csv_header());
  const std::string expected_row = "gold,m,5,noma-dii-analytic,5,2,8,6,1,0,noma,,," +
                                   format_double(rows[0].aoi) + ",,ok";
  CHECK(out.str() == expected_header + "\n" + expected_row + "\n");
}
