// Command-line front end: SNR ladders, transition matrices, closed-form age,
// Monte Carlo runs, sweeps, and the cross-validation battery.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "gfnoma/gfnoma.hpp"

namespace {

using nlohmann::json;

// ---------------------------------------------------------------------------
// shared option plumbing

struct CommonOpts {
  double rate = 1.0;
  int num_levels = 2;
  int num_users = 2;
  int slots_per_frame = 8;
  double slot_duration = 6.0;
  double power_db = 0.0;
  std::string ptx = "noma";
  int design = 2;
  std::string format;
  std::string out_path;
};

void add_system_flags(CLI::App* cmd, CommonOpts& o, bool need_frame) {
  cmd->add_option("--r", o.rate, "target rate R in bits/s/Hz")->required();
  cmd->add_option("--k", o.num_levels, "number of receive-SNR rungs K")->required();
  cmd->add_option("--m", o.num_users, "number of contending users M")->required();
  if (need_frame) {
    cmd->add_option("--n", o.slots_per_frame, "slots per frame N")->required();
    cmd->add_option("--t", o.slot_duration, "slot duration T in seconds")->required();
  }
  cmd->add_option("--p-db", o.power_db, "transmit power budget in dB (linear P = 10^(dB/10))")->capture_default_str();
  cmd->add_option("--ptx", o.ptx, "attempt policy: fixed:<p>, noma, or oma")->capture_default_str();
  cmd->add_option("--design", o.design, "ladder design: 1 (worst-case) or 2 (collision-free)")->capture_default_str()->check(CLI::IsMember({1, 2}));
}

gfnoma::SystemParams make_params(const CommonOpts& o) {
  gfnoma::SystemParams p;
  p.num_users = o.num_users;
  p.num_levels = o.num_levels;
  p.slots_per_frame = o.slots_per_frame;
  p.slot_duration = o.slot_duration;
  p.target_rate = o.rate;
  p.power_budget = gfnoma::db_to_linear(o.power_db);
  p.policy = gfnoma::AccessPolicy::parse(o.ptx);
  p.validate();
  return p;
}

gfnoma::LevelSet make_ladder(const CommonOpts& o) {
  return o.design == 1 ? gfnoma::design_i_levels(o.rate, o.num_levels, o.num_users)
                       : gfnoma::design_ii_levels(o.rate, o.num_levels);
}

// Writes to --out when given, stdout otherwise.
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw std::invalid_argument("cannot open output file '" + path + "'");
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

json params_to_json(const gfnoma::SystemParams& p) {
  return json{{"m", p.num_users},
              {"k", p.num_levels},
              {"n", p.slots_per_frame},
              {"t", p.slot_duration},
              {"r", p.target_rate},
              {"p", p.power_budget},
              {"ptx", p.policy.token()}};
}

// ---------------------------------------------------------------------------
// levels

int run_levels(const CommonOpts& o, bool both_designs, bool have_pdb) {
  const double theta = gfnoma::sic_threshold(o.rate);
  std::vector<std::pair<std::string, gfnoma::LevelSet>> ladders;
  if (both_designs || o.design == 1)
    ladders.emplace_back("design_i", gfnoma::design_i_levels(o.rate, o.num_levels, o.num_users));
  if (both_designs || o.design == 2)
    ladders.emplace_back("design_ii", gfnoma::design_ii_levels(o.rate, o.num_levels));

  Sink sink(o.out_path);
  auto& out = sink.stream();
  const double P = gfnoma::db_to_linear(o.power_db);

  if (o.format == "json") {
    json doc{{"r", o.rate}, {"k", o.num_levels}, {"threshold", theta}};
    for (const auto& [name, ladder] : ladders) {
      doc[name] = ladder.levels;
      if (have_pdb) doc[name + "_outage"] = gfnoma::feasibility_outage(ladder, P);
    }
    if (have_pdb) doc["p_db"] = o.power_db;
    out << doc.dump(2) << '\n';
    return 0;
  }
  // csv (default): one row per rung
  out << "rung";
  for (const auto& [name, ladder] : ladders) {
    out << ',' << name;
    if (have_pdb) out << ',' << name << "_outage";
  }
  out << '\n';
  for (int k = 0; k < o.num_levels; ++k) {
    out << (k + 1);
    for (const auto& [name, ladder] : ladders) {
      out << ',' << gfnoma::format_double(ladder[k]);
      if (have_pdb)
        out << ',' << gfnoma::format_double(gfnoma::feasibility_outage(ladder, P)[k]);
    }
    out << '\n';
  }
  return 0;
}

// ---------------------------------------------------------------------------
// transitions

gfnoma::Strategy parse_chain_strategy(const std::string& s) {
  if (s == "noma-exact") return gfnoma::Strategy::NomaExact;
  if (s == "noma-highsnr") return gfnoma::Strategy::NomaHighSnr;
  if (s == "oma") return gfnoma::Strategy::Oma;
  throw std::invalid_argument("unknown strategy '" + s +
                              "' (expected noma-exact, noma-highsnr, or oma)");
}

gfnoma::TransitionModel build_model(const CommonOpts& o, gfnoma::Strategy strategy) {
  const auto params = make_params(o);
  if (strategy == gfnoma::Strategy::NomaExact)
    return gfnoma::build_transition_model(strategy, params, make_ladder(o));
  return gfnoma::build_transition_model(strategy, params);
}

int run_transitions(const CommonOpts& o, const std::string& strategy_token,
                    std::int64_t empirical_slots, std::uint64_t seed) {
  Sink sink(o.out_path);
  auto& out = sink.stream();
  const int M = o.num_users;

  if (empirical_slots > 0) {
    const auto params = make_params(o);
    const auto emp = gfnoma::estimate_transitions(params, make_ladder(o),
                                                  gfnoma::TxScheme::NomaSic,
                                                  empirical_slots, seed);
    if (o.format == "json") {
      json rows = json::array();
      for (int j = 0; j < M; ++j)
        for (int col = j; col <= M; ++col)
          rows.push_back(json{{"from", j},
                              {"to", col == M ? json("absorb") : json(col)},
                              {"freq", emp.frequency(j, col)},
                              {"stderr", emp.freq_stderr(j, col)},
                              {"count", emp.count(j, col)}});
      out << json{{"params", params_to_json(params)},
                  {"slots_per_state", emp.slots_per_state},
                  {"seed", emp.seed},
                  {"entries", rows}}
                 .dump(2)
          << '\n';
      return 0;
    }
    out << "from,to,freq,stderr,count\n";
    for (int j = 0; j < M; ++j)
      for (int col = j; col <= M; ++col) {
        out << j << ',' << (col == M ? std::string("absorb") : std::to_string(col)) << ','
            << gfnoma::format_double(emp.frequency(j, col)) << ','
            << gfnoma::format_double(emp.freq_stderr(j, col)) << ',' << emp.count(j, col)
            << '\n';
      }
    return 0;
  }

  const auto model = build_model(o, parse_chain_strategy(strategy_token));
  if (o.format == "json") {
    json transient = json::array();
    for (int j = 0; j < M; ++j) {
      json row = json::array();
      for (int to = 0; to < M; ++to) row.push_back(model.entry(j, to));
      transient.push_back(row);
    }
    out << json{{"strategy", gfnoma::strategy_name(model.strategy)},
                {"transient", transient},
                {"absorption", model.absorption}}
               .dump(2)
        << '\n';
    return 0;
  }
  out << "from,to,prob\n";
  for (int j = 0; j < M; ++j) {
    for (int to = j; to < M; ++to)
      out << j << ',' << to << ',' << gfnoma::format_double(model.entry(j, to)) << '\n';
    out << j << ",absorb," << gfnoma::format_double(model.absorb(j)) << '\n';
  }
  return 0;
}

// ---------------------------------------------------------------------------
// aoi

int run_aoi(const CommonOpts& o, const std::string& strategy_token) {
  const auto model = build_model(o, parse_chain_strategy(strategy_token));
  const auto b = gfnoma::average_aoi(model, o.slots_per_frame, o.slot_duration);
  Sink sink(o.out_path);
  auto& out = sink.stream();
  if (o.format == "json") {
    out << json{{"strategy", gfnoma::strategy_name(model.strategy)},
                {"frame_success_prob", b.frame_success_prob},
                {"mean_service", b.mean_service},
                {"second_service", b.second_service},
                {"mean_interupdate", b.mean_interupdate},
                {"second_interupdate", b.second_interupdate},
                {"average_aoi", b.average_aoi}}
               .dump(2)
        << '\n';
    return 0;
  }
  out << "strategy,frame_success_prob,mean_service,second_service,mean_interupdate,"
         "second_interupdate,average_aoi\n";
  out << gfnoma::strategy_name(model.strategy) << ','
      << gfnoma::format_double(b.frame_success_prob) << ','
      << gfnoma::format_double(b.mean_service) << ','
      << gfnoma::format_double(b.second_service) << ','
      << gfnoma::format_double(b.mean_interupdate) << ','
      << gfnoma::format_double(b.second_interupdate) << ','
      << gfnoma::format_double(b.average_aoi) << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// simulate

int run_simulate(const CommonOpts& o, const std::string& scheme_token, std::int64_t frames,
                 std::uint64_t seed, std::int64_t empirical_slots) {
  const auto params = make_params(o);
  gfnoma::SimEstimate est;
  if (scheme_token == "oma") {
    est = gfnoma::simulate_frames_oma(params, frames, seed);
  } else if (scheme_token == "noma") {
    est = gfnoma::simulate_frames(params, make_ladder(o), gfnoma::TxScheme::NomaSic, frames,
                                  seed);
  } else {
    throw std::invalid_argument("unknown scheme '" + scheme_token +
                                "' (expected noma or oma)");
  }
  const std::string status = est.has_estimate() ? "ok" : "no-delivery";

  Sink sink(o.out_path);
  auto& out = sink.stream();
  if (o.format == "csv") {
    out << "scheme,m,k,n,t,r,p_db,ptx,frames,seed,deliveries,aoi,stderr,status\n";
    out << scheme_token << ',' << o.num_users << ',' << o.num_levels << ','
        << o.slots_per_frame << ',' << gfnoma::format_double(o.slot_duration) << ','
        << gfnoma::format_double(o.rate) << ',' << gfnoma::format_double(o.power_db) << ','
        << params.policy.token() << ',' << frames << ',' << seed << ',' << est.deliveries
        << ',';
    if (est.has_estimate())
      out << gfnoma::format_double(est.mean_aoi) << ','
          << gfnoma::format_double(est.stderr_aoi);
    else
      out << ',';
    out << ',' << status << '\n';
    return 0;
  }
  json doc{{"scheme", scheme_token},
           {"params", params_to_json(params)},
           {"p_db", o.power_db},
           {"frames", est.frames},
           {"seed", est.seed},
           {"deliveries", est.deliveries},
           {"status", status}};
  if (est.has_estimate()) {
    doc["mean_aoi"] = est.mean_aoi;
    doc["stderr_aoi"] = est.stderr_aoi;
  }
  if (empirical_slots > 0) {
    const auto emp = gfnoma::estimate_transitions(
        params, make_ladder(o),
        scheme_token == "oma" ? gfnoma::TxScheme::Oma : gfnoma::TxScheme::NomaSic,
        empirical_slots, seed);
    json freq = json::array();
    for (int j = 0; j < emp.num_users; ++j) {
      json row = json::array();
      for (int col = 0; col <= emp.num_users; ++col) row.push_back(emp.frequency(j, col));
      freq.push_back(row);
    }
    doc["empirical_transitions"] =
        json{{"slots_per_state", emp.slots_per_state}, {"frequencies", freq}};
  }
  out << doc.dump(2) << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// sweep

int run_sweep_cmd(const std::string& spec_path, const std::string& format,
                  const std::string& out_path) {
  std::ifstream in(spec_path);
  if (!in) throw std::invalid_argument("cannot open spec file '" + spec_path + "'");
  const auto spec = gfnoma::parse_experiment_spec(in);
  const auto rows = gfnoma::run_sweep_rows(spec);
  Sink sink(out_path);
  auto& out = sink.stream();
  if (format == "json") {
    json arr = json::array();
    for (const auto& r : rows) {
      json row{{"scenario", r.scenario},       {"axis", r.axis},
               {"value", r.value},             {"strategy", gfnoma::sweep_strategy_token(r.strategy)},
               {"m", r.num_users},             {"k", r.num_levels},
               {"n", r.slots_per_frame},       {"t", r.slot_duration},
               {"r", r.target_rate},           {"p_db", r.power_db},
               {"ptx", r.ptx_token},           {"status", r.status}};
      if (r.simulated) {
        row["frames"] = r.frames;
        row["seed"] = r.seed;
      }
      if (r.status == "ok") {
        row["aoi"] = r.aoi;
        if (r.simulated) row["stderr"] = r.stderr_aoi;
      }
      arr.push_back(row);
    }
    out << arr.dump(2) << '\n';
    return 0;
  }
  gfnoma::write_sweep_csv(rows, out);
  return 0;
}

// ---------------------------------------------------------------------------
// validate

int run_validate(const gfnoma::ValidationOptions& opt, const std::string& format,
                 const std::string& out_path) {
  const auto results = gfnoma::run_validation(opt);
  Sink sink(out_path);
  auto& out = sink.stream();
  bool all_pass = true;
  if (format == "json") {
    json arr = json::array();
    for (const auto& r : results) {
      all_pass = all_pass && r.pass;
      arr.push_back(json{{"name", r.name},
                         {"pass", r.pass},
                         {"worst", r.worst},
                         {"bound", r.bound},
                         {"detail", r.detail}});
    }
    out << arr.dump(2) << '\n';
  } else {
    for (const auto& r : results) {
      all_pass = all_pass && r.pass;
      out << (r.pass ? "[PASS] " : "[FAIL] ") << r.name << "  worst "
          << gfnoma::format_double(r.worst, 6) << " vs bound "
          << gfnoma::format_double(r.bound, 6);
      if (!r.detail.empty()) out << "  (" << r.detail << ")";
      out << '\n';
    }
    out << (all_pass ? "all checks passed\n" : "some checks FAILED\n");
  }
  return all_pass ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Age-of-information toolkit for grant-free random access with "
               "pre-configured receive-SNR ladders"};
  app.require_subcommand(1);

  CommonOpts o;
  bool have_pdb = false;

  // levels ------------------------------------------------------------------
  auto* levels = app.add_subcommand("levels", "print an SNR ladder (linear scale)");
  levels->add_option("--r", o.rate, "target rate R in bits/s/Hz")->required();
  levels->add_option("--k", o.num_levels, "number of rungs K")->required();
  auto* m_opt =
      levels->add_option("--m", o.num_users, "user count M (sizes the worst-case ladder)");
  auto* pdb_opt = levels->add_option("--p-db", o.power_db,
                                     "power budget in dB; adds per-rung outage columns");
  int design_arg = 0;  // 0 = both
  levels->add_option("--design", design_arg, "restrict to one ladder design")
      ->check(CLI::IsMember({1, 2}));
  levels->add_option("--format", o.format, "csv or json")->capture_default_str()->check(CLI::IsMember({"csv", "json"}));
  levels->add_option("--out", o.out_path, "write to file instead of stdout");

  // transitions ---------------------------------------------------------------
  auto* transitions =
      app.add_subcommand("transitions", "per-slot transition matrix of the tagged chain");
  std::string strategy_token = "noma-exact";
  std::int64_t empirical_slots = 0;
  std::uint64_t seed = 1;
  add_system_flags(transitions, o, false);
  transitions->add_option("--strategy", strategy_token,
                          "noma-exact, noma-highsnr, or oma")->capture_default_str();
  transitions->add_option("--empirical", empirical_slots,
                          "Monte Carlo slots per state; prints frequencies instead");
  transitions->add_option("--seed", seed, "seed for --empirical")->capture_default_str();
  transitions->add_option("--format", o.format, "csv or json")->capture_default_str()->check(CLI::IsMember({"csv", "json"}));
  transitions->add_option("--out", o.out_path, "write to file instead of stdout");

  // aoi -----------------------------------------------------------------------
  auto* aoi = app.add_subcommand("aoi", "closed-form average age of information");
  add_system_flags(aoi, o, true);
  aoi->add_option("--strategy", strategy_token, "noma-exact, noma-highsnr, or oma")->capture_default_str();
  aoi->add_option("--format", o.format, "csv or json")->capture_default_str()->check(CLI::IsMember({"csv", "json"}));
  aoi->add_option("--out", o.out_path, "write to file instead of stdout");

  // simulate ------------------------------------------------------------------
  auto* simulate = app.add_subcommand("simulate", "physical-layer Monte Carlo run");
  std::string scheme_token = "noma";
  std::int64_t frames = 100000;
  add_system_flags(simulate, o, true);
  simulate->add_option("--scheme", scheme_token, "noma (SIC receiver) or oma")->capture_default_str();
  simulate->add_option("--frames", frames, "number of frames")->capture_default_str();
  simulate->add_option("--seed", seed, "master seed")->capture_default_str();
  simulate->add_option("--empirical", empirical_slots,
                       "also estimate per-state transition frequencies (slots per state)");
  simulate->add_option("--format", o.format, "json or csv")->capture_default_str()->check(CLI::IsMember({"json", "csv"}));
  simulate->add_option("--out", o.out_path, "write to file instead of stdout");

  // sweep ---------------------------------------------------------------------
  auto* sweep = app.add_subcommand("sweep", "evaluate an experiment spec file");
  std::string spec_path;
  sweep->add_option("--spec", spec_path, "experiment spec file (key = value lines)")
      ->required();
  sweep->add_option("--format", o.format, "csv or json")->capture_default_str()->check(CLI::IsMember({"csv", "json"}));
  sweep->add_option("--out", o.out_path, "write to file instead of stdout");

  // validate ------------------------------------------------------------------
  auto* validate = app.add_subcommand("validate", "run the cross-validation battery");
  gfnoma::ValidationOptions vopt;
  bool no_mc = false;
  validate->add_option("--max-m", vopt.max_users, "largest enumerated population")->capture_default_str();
  validate->add_option("--max-k", vopt.max_levels, "largest enumerated ladder")->capture_default_str();
  validate->add_option("--frames", vopt.mc_frames, "Monte Carlo frames")->capture_default_str();
  validate->add_option("--slots", vopt.mc_slots, "Monte Carlo slots per state")->capture_default_str();
  validate->add_option("--seed", vopt.seed, "Monte Carlo seed")->capture_default_str();
  validate->add_flag("--no-mc", no_mc, "skip the Monte Carlo checks");
  validate->add_option("--format", o.format, "text or json")->capture_default_str()->check(CLI::IsMember({"text", "json"}));
  validate->add_option("--out", o.out_path, "write to file instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  have_pdb = pdb_opt->count() > 0;

  try {
    if (levels->parsed()) {
      if (design_arg != 0) o.design = design_arg;
      if (design_arg != 2 && m_opt->count() == 0)
        throw std::invalid_argument("the worst-case ladder needs --m (use --design 2 to skip it)");
      return run_levels(o, design_arg == 0, have_pdb);
    }
    if (transitions->parsed()) return run_transitions(o, strategy_token, empirical_slots, seed);
    if (aoi->parsed()) return run_aoi(o, strategy_token);
    if (simulate->parsed())
      return run_simulate(o, scheme_token, frames, seed, empirical_slots);
    if (sweep->parsed()) return run_sweep_cmd(spec_path, o.format, o.out_path);
    if (validate->parsed()) {
      vopt.include_mc = !no_mc;
      return run_validate(vopt, o.format, o.out_path);
    }
  } catch (const gfnoma::AbsorptionImpossible& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::out_of_range& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
