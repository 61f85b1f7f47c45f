#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "gfnoma/aoi.hpp"
#include "gfnoma/kernel.hpp"
#include "gfnoma/oracle.hpp"
#include "gfnoma/rng.hpp"
#include "gfnoma/sim.hpp"
#include "gfnoma/textio.hpp"

namespace gfnoma {

/// Outcome of one cross-validation check.
struct CheckResult {
  std::string name;
  bool pass = false;
  double worst = 0.0;     // worst deviation the check saw (units vary by check)
  double bound = 0.0;     // the deviation bound the check enforces
  std::string detail;     // where the worst deviation occurred
};

/// Knobs for the cross-validation run. The enumeration grid is hard-capped at
/// 12 users (the brute-force outcome space is (2K+1)^M); larger requests are
/// rejected up front.
struct ValidationOptions {
  int max_users = 5;
  int max_levels = 3;
  std::vector<double> tx_probs = {0.3, 0.8};
  std::vector<double> budgets_db = {0.0, 10.0, 30.0};
  double rate = 1.0;
  int conservation_samples = 200;
  std::int64_t mc_frames = 100000;
  std::int64_t mc_slots = 200000;
  std::uint64_t seed = 0x5eed2026ull;
  bool include_mc = true;
};

namespace detail {

struct WorstTracker {
  double worst = 0.0;
  std::string where;

  void update(double dev, const std::string& place) {
    if (dev > worst) {
      worst = dev;
      where = place;
    }
  }
};

/// Closed-form chain probabilities vs the brute-force enumeration, over a
/// grid of populations, ladder sizes, designs, attempt probabilities, and
/// budgets.
inline CheckResult check_kernel_vs_enumeration(const ValidationOptions& opt) {
  WorstTracker t;
  for (int remaining = 1; remaining <= opt.max_users; ++remaining) {
    for (int K = 1; K <= opt.max_levels; ++K) {
      const double w = 1.0 / K;
      std::vector<LevelSet> ladders;
      ladders.push_back(design_ii_levels(opt.rate, K));
      ladders.push_back(design_i_levels(opt.rate, K, std::max(remaining, 2)));
      for (const auto& ladder : ladders) {
        for (double q : opt.tx_probs) {
          for (double pdb : opt.budgets_db) {
            const double P = db_to_linear(pdb);
            const auto outage = feasibility_outage(ladder, P);
            const auto dist = enumerate_slot(remaining, q, w, ladder, P);
            const std::string place =
                "rem=" + std::to_string(remaining) + " K=" + std::to_string(K) +
                " design=" + (ladder.design == LevelSet::Design::DesignI ? "1" : "2") +
                " q=" + format_double(q) + " P=" + format_double(pdb) + "dB";
            const int cap = std::min(K, remaining);
            for (int i = 1; i <= cap; ++i)
              t.update(std::abs(slot_success_prob(remaining, i, q, w, outage) -
                                dist.any_success[static_cast<std::size_t>(i)]),
                       place + " any[" + std::to_string(i) + "]");
            for (int i = 0; i <= std::min(cap, remaining - 1); ++i)
              t.update(std::abs(transition_prob(remaining, i, q, w, outage) -
                                dist.advance[static_cast<std::size_t>(i)]),
                       place + " adv[" + std::to_string(i) + "]");
            t.update(std::abs(tagged_success_prob(remaining, q, w, outage) -
                              dist.tagged_success),
                     place + " tagged");
          }
        }
      }
    }
  }
  return {"kernel-vs-enumeration", t.worst <= 1e-12, t.worst, 1e-12, t.where};
}

/// Every transition row, over randomized parameters and all three chain
/// strategies, must sum to one together with its absorption mass.
inline CheckResult check_conservation(const ValidationOptions& opt) {
  WorstTracker t;
  auto eng = substream_engine(opt.seed, 0xC0);
  for (int s = 0; s < opt.conservation_samples; ++s) {
    SystemParams params;
    params.num_users = 1 + static_cast<int>(uniform01(eng) * 8);
    params.num_levels = 1 + static_cast<int>(uniform01(eng) * 5);
    params.slots_per_frame = 1;
    params.slot_duration = 1.0;
    params.target_rate = 0.2 + 2.3 * uniform01(eng);
    params.power_budget = std::pow(10.0, -0.5 + 3.5 * uniform01(eng));
    switch (s % 3) {
      case 0: params.policy = AccessPolicy::fixed(uniform01(eng)); break;
      case 1: params.policy = AccessPolicy::noma_adaptive(); break;
      default: params.policy = AccessPolicy::oma_adaptive(); break;
    }
    const Strategy strategy =
        s % 5 == 3 ? Strategy::NomaHighSnr : (s % 5 == 4 ? Strategy::Oma : Strategy::NomaExact);
    TransitionModel model;
    if (strategy == Strategy::NomaExact) {
      const auto ladder = (s % 2 == 0 || params.num_users < 2)
                              ? design_ii_levels(params.target_rate, params.num_levels)
                              : design_i_levels(params.target_rate, params.num_levels,
                                                params.num_users);
      model = build_transition_model(strategy, params, ladder);
    } else {
      model = build_transition_model(strategy, params);
    }
    for (int j = 0; j < model.num_users; ++j)
      t.update(std::abs(model.row_sum(j) - 1.0),
               "sample " + std::to_string(s) + " strategy " +
                   strategy_name(model.strategy) + " row " + std::to_string(j));
  }
  return {"conservation", t.worst <= 1e-12, t.worst, 1e-12, t.where};
}

/// The every-rung-feasible closed form must coincide with the exact kernel
/// when the infeasibility probabilities are literally zero.
inline CheckResult check_high_snr_consistency(const ValidationOptions& opt) {
  WorstTracker t;
  for (int remaining = 1; remaining <= 8; ++remaining) {
    for (int K = 1; K <= 5; ++K) {
      const double w = 1.0 / K;
      const std::vector<double> zero_outage(static_cast<std::size_t>(K), 0.0);
      for (double q : opt.tx_probs) {
        const std::string place =
            "rem=" + std::to_string(remaining) + " K=" + std::to_string(K) +
            " q=" + format_double(q);
        const int cap = std::min(K, remaining);
        for (int i = 1; i <= cap; ++i)
          t.update(std::abs(slot_success_prob(remaining, i, q, w, zero_outage) -
                            high_snr_slot_success_prob(remaining, i, q, w, K)),
                   place + " any[" + std::to_string(i) + "]");
        for (int i = 0; i <= std::min(cap, remaining - 1); ++i)
          t.update(std::abs(transition_prob(remaining, i, q, w, zero_outage) -
                            high_snr_transition_prob(remaining, i, q, w, K)),
                   place + " adv[" + std::to_string(i) + "]");
      }
    }
  }
  return {"high-snr-consistency", t.worst <= 1e-12, t.worst, 1e-12, t.where};
}

/// With one rung the every-rung-feasible chain must reproduce the single-user
/// baseline at unbounded budget, for every population and attempt setting.
inline CheckResult check_oma_identity(const ValidationOptions& opt) {
  WorstTracker t;
  for (int remaining = 1; remaining <= 20; ++remaining) {
    for (double q : opt.tx_probs) {
      for (int K = 1; K <= 4; ++K) {
        const auto oma = oma_slot_probs(remaining, q, opt.rate, 1e18);
        const double high =
            high_snr_slot_success_prob(remaining, 1, q, 1.0 / K, K);
        t.update(std::abs(oma.any_success - high),
                 "rem=" + std::to_string(remaining) + " K=" + std::to_string(K) +
                     " q=" + format_double(q));
      }
    }
  }
  return {"single-rung-identity", t.worst <= 1e-14, t.worst, 1e-14, t.where};
}

/// Closed-form average age vs the physical simulator, three standard errors.
inline CheckResult check_mc_aoi(const ValidationOptions& opt) {
  WorstTracker t;
  struct Config {
    const char* name;
    double pdb;
    bool oma;
  };
  const Config configs[] = {
      {"design-ii 0dB", 0.0, false},
      {"design-ii 30dB", 30.0, false},
      {"baseline 0dB", 0.0, true},
  };
  bool pass = true;
  for (const auto& cfg : configs) {
    SystemParams params;
    params.num_users = 5;
    params.num_levels = 2;
    params.slots_per_frame = 8;
    params.slot_duration = 6.0;
    params.target_rate = opt.rate;
    params.power_budget = db_to_linear(cfg.pdb);
    params.policy = cfg.oma ? AccessPolicy::oma_adaptive() : AccessPolicy::noma_adaptive();
    double analytic = 0.0;
    SimEstimate est;
    if (cfg.oma) {
      const auto model = build_transition_model(Strategy::Oma, params);
      analytic = average_aoi(model, params.slots_per_frame, params.slot_duration).average_aoi;
      est = simulate_frames_oma(params, opt.mc_frames, opt.seed);
    } else {
      const auto ladder = design_ii_levels(params.target_rate, params.num_levels);
      const auto model = build_transition_model(Strategy::NomaExact, params, ladder);
      analytic = average_aoi(model, params.slots_per_frame, params.slot_duration).average_aoi;
      est = simulate_frames(params, ladder, TxScheme::NomaSic, opt.mc_frames, opt.seed);
    }
    if (!est.has_estimate() || !(est.stderr_aoi > 0.0)) {
      pass = false;
      t.update(1e300, std::string(cfg.name) + " produced no estimate");
      continue;
    }
    const double sigmas = std::abs(est.mean_aoi - analytic) / est.stderr_aoi;
    t.update(sigmas, std::string(cfg.name) + " analytic=" + format_double(analytic) +
                         " sim=" + format_double(est.mean_aoi) +
                         " se=" + format_double(est.stderr_aoi));
  }
  pass = pass && t.worst <= 3.0;
  return {"mc-aoi-agreement", pass, t.worst, 3.0, t.where};
}

/// Closed-form transition rows vs empirical per-state frequencies, four
/// binomial standard errors per entry.
inline CheckResult check_mc_transitions(const ValidationOptions& opt) {
  WorstTracker t;
  SystemParams params;
  params.num_users = 5;
  params.num_levels = 2;
  params.slots_per_frame = 8;
  params.slot_duration = 6.0;
  params.target_rate = opt.rate;
  params.power_budget = 1.0;
  params.policy = AccessPolicy::fixed(0.4);
  const auto ladder = design_ii_levels(params.target_rate, params.num_levels);
  const auto model = build_transition_model(Strategy::NomaExact, params, ladder);
  const auto emp =
      estimate_transitions(params, ladder, TxScheme::NomaSic, opt.mc_slots, opt.seed);
  const int M = params.num_users;
  for (int j = 0; j < M; ++j) {
    for (int col = j; col <= M; ++col) {
      const double prob = col == M ? model.absorb(j) : model.entry(j, col);
      const double freq = emp.frequency(j, col);
      const double se = emp.freq_stderr(j, col);
      if (prob == 0.0 && freq == 0.0) continue;
      // guard against zero empirical variance on near-deterministic entries
      const double scale = std::max(se, 1.0 / static_cast<double>(opt.mc_slots));
      t.update(std::abs(freq - prob) / scale,
               "row " + std::to_string(j) + " col " + std::to_string(col) + " prob=" +
                   format_double(prob) + " freq=" + format_double(freq));
    }
  }
  return {"mc-transition-agreement", t.worst <= 4.0, t.worst, 4.0, t.where};
}

}  // namespace detail

/// Run the whole cross-validation battery: closed forms against brute-force
/// enumeration, probability conservation on randomized parameters, limit
/// consistency between the chains, and (optionally) Monte Carlo agreement for
/// both the age estimate and the transition frequencies.
inline std::vector<CheckResult> run_validation(const ValidationOptions& opt) {
  if (opt.max_users < 1 || opt.max_users > kMaxEnumeratedUsers)
    throw std::invalid_argument("enumeration grid supports 1 to 12 users");
  if (opt.max_levels < 1) throw std::invalid_argument("need at least one level");
  if (opt.tx_probs.empty() || opt.budgets_db.empty())
    throw std::invalid_argument("validation grid must not be empty");
  std::vector<CheckResult> results;
  results.push_back(detail::check_kernel_vs_enumeration(opt));
  results.push_back(detail::check_conservation(opt));
  results.push_back(detail::check_high_snr_consistency(opt));
  results.push_back(detail::check_oma_identity(opt));
  if (opt.include_mc) {
    results.push_back(detail::check_mc_aoi(opt));
    results.push_back(detail::check_mc_transitions(opt));
  }
  return results;
}

}  // namespace gfnoma
