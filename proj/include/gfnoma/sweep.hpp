#pragma once

#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "gfnoma/aoi.hpp"
#include "gfnoma/kernel.hpp"
#include "gfnoma/sim.hpp"
#include "gfnoma/textio.hpp"

namespace gfnoma {

/// A curve to trace in a sweep: which ladder/chain/receiver combination
/// produces the row's age value.
enum class SweepStrategy {
  Oma,                 // analytic single-user baseline chain
  OmaSim,              // simulated single-user baseline
  NomaDesignISim,      // simulated SIC with the worst-case ladder
  NomaDesignIIAnalytic,  // analytic chain with the collision-free ladder
  NomaDesignIISim,     // simulated SIC with the collision-free ladder
  NomaHighSnr,         // analytic chain in the every-rung-feasible limit
};

inline const char* sweep_strategy_token(SweepStrategy s) {
  switch (s) {
    case SweepStrategy::Oma: return "oma";
    case SweepStrategy::OmaSim: return "oma-sim";
    case SweepStrategy::NomaDesignISim: return "noma-di-sim";
    case SweepStrategy::NomaDesignIIAnalytic: return "noma-dii-analytic";
    case SweepStrategy::NomaDesignIISim: return "noma-dii-sim";
    case SweepStrategy::NomaHighSnr: return "noma-highsnr";
  }
  return "?";
}

inline SweepStrategy parse_sweep_strategy(const std::string& token) {
  if (token == "oma") return SweepStrategy::Oma;
  if (token == "oma-sim") return SweepStrategy::OmaSim;
  if (token == "noma-di-sim") return SweepStrategy::NomaDesignISim;
  if (token == "noma-dii-analytic") return SweepStrategy::NomaDesignIIAnalytic;
  if (token == "noma-dii-sim") return SweepStrategy::NomaDesignIISim;
  if (token == "noma-highsnr") return SweepStrategy::NomaHighSnr;
  throw std::invalid_argument("unknown strategy '" + token + "'");
}

inline bool sweep_strategy_simulates(SweepStrategy s) {
  return s == SweepStrategy::OmaSim || s == SweepStrategy::NomaDesignISim ||
         s == SweepStrategy::NomaDesignIISim;
}

/// Attempt-probability setting for a sweep: each strategy's natural adaptive
/// policy, or one fixed probability for everybody.
struct PtxSetting {
  enum class Mode { Adaptive, Fixed } mode = Mode::Adaptive;
  double fixed_prob = 0.0;

  static PtxSetting parse(const std::string& token) {
    if (token == "adaptive") return {Mode::Adaptive, 0.0};
    const AccessPolicy p = AccessPolicy::parse(token);
    switch (p.kind) {
      case AccessPolicy::Kind::FixedProb: return {Mode::Fixed, p.fixed_prob};
      case AccessPolicy::Kind::NomaAdaptive:
      case AccessPolicy::Kind::OmaAdaptive:
        // explicit per-strategy adaptive tokens collapse to the same thing
        return {Mode::Adaptive, 0.0};
    }
    return {Mode::Adaptive, 0.0};
  }
};

/// One experiment description: a scenario name, the axis to sweep, the curve
/// strategies to trace, and the fixed parameters every point shares.
struct ExperimentSpec {
  enum class Axis { Users, PowerDb, TxProb };

  std::string scenario = "sweep";
  Axis axis = Axis::Users;
  std::vector<double> values;
  int num_users = 10;
  int num_levels = 2;
  int slots_per_frame = 8;
  double slot_duration = 6.0;
  double target_rate = 1.0;
  double power_db = 0.0;
  PtxSetting ptx;
  std::vector<SweepStrategy> strategies;
  std::int64_t frames = 100000;
  std::uint64_t seed = 1;

  void validate() const {
    if (values.empty()) throw std::invalid_argument("sweep needs at least one axis value");
    for (std::size_t i = 1; i < values.size(); ++i)
      if (!(values[i] > values[i - 1]))
        throw std::invalid_argument("axis values must be strictly increasing");
    if (axis == Axis::Users)
      for (double v : values)
        if (v < 1 || v != std::floor(v))
          throw std::invalid_argument("user-count axis values must be positive integers");
    if (axis == Axis::TxProb)
      for (double v : values)
        if (!(v >= 0.0 && v <= 1.0))
          throw std::invalid_argument("attempt-probability axis values must lie in [0, 1]");
    if (strategies.empty()) throw std::invalid_argument("sweep needs at least one strategy");
    std::set<SweepStrategy> seen(strategies.begin(), strategies.end());
    if (seen.size() != strategies.size())
      throw std::invalid_argument("duplicate strategy in sweep");
    if (frames < 1) throw std::invalid_argument("frames must be >= 1");
  }
};

inline const char* axis_token(ExperimentSpec::Axis a) {
  switch (a) {
    case ExperimentSpec::Axis::Users: return "m";
    case ExperimentSpec::Axis::PowerDb: return "p_db";
    case ExperimentSpec::Axis::TxProb: return "ptx";
  }
  return "?";
}

/// Parse the flat `key = value` experiment format. Lines starting with '#'
/// and blank lines are skipped. Keys: scenario, axis (m | p_db | ptx),
/// values (comma list), m, k, n, t, r, p_db, ptx (adaptive | fixed:<p> |
/// noma | oma), strategies (comma list), frames, seed.
inline ExperimentSpec parse_experiment_spec(std::istream& in) {
  ExperimentSpec spec;
  std::string line;
  int line_no = 0;
  auto fail = [&](const std::string& what) {
    throw std::invalid_argument("spec line " + std::to_string(line_no) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++line_no;
    const auto stripped = trim(std::string_view{line}.substr(0, line.find('#')));
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string_view::npos) fail("expected key = value");
    const std::string key{trim(stripped.substr(0, eq))};
    const std::string val{trim(stripped.substr(eq + 1))};
    if (key.empty() || val.empty()) fail("expected key = value");
    try {
      if (key == "scenario") {
        spec.scenario = val;
      } else if (key == "axis") {
        if (val == "m") spec.axis = ExperimentSpec::Axis::Users;
        else if (val == "p_db") spec.axis = ExperimentSpec::Axis::PowerDb;
        else if (val == "ptx") spec.axis = ExperimentSpec::Axis::TxProb;
        else fail("axis must be m, p_db, or ptx");
      } else if (key == "values") {
        spec.values.clear();
        for (const auto& item : split_list(val)) spec.values.push_back(parse_double(item));
      } else if (key == "m") {
        spec.num_users = static_cast<int>(parse_int(val));
      } else if (key == "k") {
        spec.num_levels = static_cast<int>(parse_int(val));
      } else if (key == "n") {
        spec.slots_per_frame = static_cast<int>(parse_int(val));
      } else if (key == "t") {
        spec.slot_duration = parse_double(val);
      } else if (key == "r") {
        spec.target_rate = parse_double(val);
      } else if (key == "p_db") {
        spec.power_db = parse_double(val);
      } else if (key == "ptx") {
        spec.ptx = PtxSetting::parse(val);
      } else if (key == "strategies") {
        spec.strategies.clear();
        for (const auto& item : split_list(val))
          spec.strategies.push_back(parse_sweep_strategy(item));
      } else if (key == "frames") {
        spec.frames = parse_int(val);
      } else if (key == "seed") {
        spec.seed = static_cast<std::uint64_t>(parse_int(val));
      } else {
        fail("unknown key '" + key + "'");
      }
    } catch (const std::invalid_argument& e) {
      if (std::string(e.what()).rfind("spec line", 0) == 0) throw;
      fail(e.what());
    }
  }
  spec.validate();
  return spec;
}

/// One output row of a sweep. Numeric fields are meaningful only when
/// `status == "ok"`; sim-only fields (stderr, frames, seed) stay unset on
/// analytic rows.
struct SweepRow {
  std::string scenario;
  std::string axis;
  double value = 0.0;
  SweepStrategy strategy = SweepStrategy::Oma;
  int num_users = 0;
  int num_levels = 0;
  int slots_per_frame = 0;
  double slot_duration = 0.0;
  double target_rate = 0.0;
  double power_db = 0.0;
  std::string ptx_token;
  bool simulated = false;
  std::int64_t frames = 0;
  std::uint64_t seed = 0;
  double aoi = 0.0;
  double stderr_aoi = 0.0;
  std::string status = "ok";
};

namespace detail {

inline AccessPolicy sweep_policy(const ExperimentSpec& spec, ExperimentSpec::Axis axis,
                                 double value, SweepStrategy strategy) {
  if (axis == ExperimentSpec::Axis::TxProb) return AccessPolicy::fixed(value);
  if (spec.ptx.mode == PtxSetting::Mode::Fixed)
    return AccessPolicy::fixed(spec.ptx.fixed_prob);
  const bool oma = strategy == SweepStrategy::Oma || strategy == SweepStrategy::OmaSim;
  return oma ? AccessPolicy::oma_adaptive() : AccessPolicy::noma_adaptive();
}

}  // namespace detail

/// Evaluate every (axis value, strategy) cell of the experiment. Degenerate
/// cells (diverging age, no simulated delivery, parameters a strategy cannot
/// accept) become rows with a telling status instead of aborting the sweep.
/// Deterministic: the same spec always yields the same rows.
inline std::vector<SweepRow> run_sweep_rows(const ExperimentSpec& spec) {
  spec.validate();
  std::vector<SweepRow> rows;
  rows.reserve(spec.values.size() * spec.strategies.size());
  for (double value : spec.values) {
    for (SweepStrategy strategy : spec.strategies) {
      SweepRow row;
      row.scenario = spec.scenario;
      row.axis = axis_token(spec.axis);
      row.value = value;
      row.strategy = strategy;
      row.num_users = spec.num_users;
      row.num_levels = spec.num_levels;
      row.slots_per_frame = spec.slots_per_frame;
      row.slot_duration = spec.slot_duration;
      row.target_rate = spec.target_rate;
      row.power_db = spec.power_db;
      row.simulated = sweep_strategy_simulates(strategy);
      if (spec.axis == ExperimentSpec::Axis::Users) row.num_users = static_cast<int>(value);
      if (spec.axis == ExperimentSpec::Axis::PowerDb) row.power_db = value;

      SystemParams params;
      params.num_users = row.num_users;
      params.num_levels = row.num_levels;
      params.slots_per_frame = row.slots_per_frame;
      params.slot_duration = row.slot_duration;
      params.target_rate = row.target_rate;
      params.power_budget = db_to_linear(row.power_db);
      params.policy = detail::sweep_policy(spec, spec.axis, value, strategy);
      row.ptx_token = params.policy.token();
      if (row.simulated) {
        row.frames = spec.frames;
        row.seed = spec.seed;
      }

      try {
        switch (strategy) {
          case SweepStrategy::Oma: {
            const auto model = build_transition_model(Strategy::Oma, params);
            row.aoi = average_aoi(model, params.slots_per_frame, params.slot_duration)
                          .average_aoi;
            break;
          }
          case SweepStrategy::NomaHighSnr: {
            const auto model = build_transition_model(Strategy::NomaHighSnr, params);
            row.aoi = average_aoi(model, params.slots_per_frame, params.slot_duration)
                          .average_aoi;
            break;
          }
          case SweepStrategy::NomaDesignIIAnalytic: {
            const auto ladder = design_ii_levels(params.target_rate, params.num_levels);
            const auto model = build_transition_model(Strategy::NomaExact, params, ladder);
            row.aoi = average_aoi(model, params.slots_per_frame, params.slot_duration)
                          .average_aoi;
            break;
          }
          case SweepStrategy::OmaSim: {
            const auto est = simulate_frames_oma(params, spec.frames, spec.seed);
            if (!est.has_estimate()) {
              row.status = "no-delivery";
            } else {
              row.aoi = est.mean_aoi;
              row.stderr_aoi = est.stderr_aoi;
            }
            break;
          }
          case SweepStrategy::NomaDesignISim:
          case SweepStrategy::NomaDesignIISim: {
            const auto ladder =
                strategy == SweepStrategy::NomaDesignISim
                    ? design_i_levels(params.target_rate, params.num_levels,
                                      params.num_users)
                    : design_ii_levels(params.target_rate, params.num_levels);
            const auto est =
                simulate_frames(params, ladder, TxScheme::NomaSic, spec.frames, spec.seed);
            if (!est.has_estimate()) {
              row.status = "no-delivery";
            } else {
              row.aoi = est.mean_aoi;
              row.stderr_aoi = est.stderr_aoi;
            }
            break;
          }
        }
      } catch (const AbsorptionImpossible&) {
        row.status = "absorption-impossible";
      } catch (const std::invalid_argument&) {
        row.status = "invalid-params";
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

inline const char* sweep_csv_header() {
  return "scenario,axis,value,strategy,m,k,n,t,r,p_db,ptx,frames,seed,aoi,stderr,status";
}

inline void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& out) {
  out << sweep_csv_header() << '\n';
  for (const auto& row : rows) {
    out << row.scenario << ',' << row.axis << ',' << format_double(row.value) << ','
        << sweep_strategy_token(row.strategy) << ',' << row.num_users << ','
        << row.num_levels << ',' << row.slots_per_frame << ','
        << format_double(row.slot_duration) << ',' << format_double(row.target_rate) << ','
        << format_double(row.power_db) << ',' << row.ptx_token << ',';
    if (row.simulated) out << row.frames;
    out << ',';
    if (row.simulated) out << row.seed;
    out << ',';
    if (row.status == "ok") {
      out << format_double(row.aoi) << ',';
      if (row.simulated) out << format_double(row.stderr_aoi);
      out << ',';
    } else {
      out << ",,";
    }
    out << row.status << '\n';
  }
}

/// Parse, evaluate, and write one experiment as CSV.
inline void run_sweep(std::istream& spec_in, std::ostream& csv_out) {
  const auto spec = parse_experiment_spec(spec_in);
  write_sweep_csv(run_sweep_rows(spec), csv_out);
}

}  // namespace gfnoma
