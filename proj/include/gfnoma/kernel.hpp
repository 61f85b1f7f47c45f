#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "gfnoma/combinatorics.hpp"
#include "gfnoma/levels.hpp"
#include "gfnoma/params.hpp"

namespace gfnoma {

namespace detail {

inline void check_slot_args(int remaining, int i, double tx_prob, double level_prob,
                            std::size_t num_levels) {
  if (remaining < 1) throw std::invalid_argument("remaining users must be >= 1");
  if (num_levels < 1) throw std::invalid_argument("need at least one level");
  const int cap = std::min<int>(static_cast<int>(num_levels), remaining);
  if (i < 1 || i > cap)
    throw std::out_of_range("success count must lie in [1, min(levels, remaining)]");
  if (!(tx_prob >= 0.0 && tx_prob <= 1.0))
    throw std::invalid_argument("attempt probability must lie in [0, 1]");
  if (!(level_prob >= 0.0 && level_prob <= 1.0))
    throw std::invalid_argument("level choice probability must lie in [0, 1]");
}

}  // namespace detail

/// Probability that exactly `i` of the `remaining` contending users are
/// decoded in one slot. Decoding succeeds for the transmitters that (a) chose
/// feasible rungs and (b) chose i pairwise-distinct rungs while every other
/// transmitter's rung was infeasible. Closed form, with m transmitters:
///
///   sum_{m=i}^{remaining} C(remaining, m) q^m (1-q)^(remaining-m)
///       * m*(m-1)*...*(m-i+1) * w^m * e_i(1-pe) * (sum_k pe_k)^(m-i)
///
/// where q = tx_prob, w = level_prob, pe = per-rung infeasibility, and e_i is
/// the elementary symmetric polynomial picking the i decoded rungs.
inline double slot_success_prob(int remaining, int i, double tx_prob, double level_prob,
                                std::span<const double> outage) {
  detail::check_slot_args(remaining, i, tx_prob, level_prob, outage.size());
  std::vector<double> feasible(outage.size());
  double outage_sum = 0.0;
  for (std::size_t k = 0; k < outage.size(); ++k) {
    if (!(outage[k] >= 0.0 && outage[k] <= 1.0))
      throw std::invalid_argument("infeasibility probabilities must lie in [0, 1]");
    feasible[k] = 1.0 - outage[k];
    outage_sum += outage[k];
  }
  const double gamma_i = elementary_symmetric(feasible, i);
  double total = 0.0;
  for (int m = i; m <= remaining; ++m) {
    total += binomial(remaining, m) * std::pow(tx_prob, m) *
             std::pow(1.0 - tx_prob, remaining - m) * falling_factorial(m, i) *
             std::pow(level_prob, m) * gamma_i * std::pow(outage_sum, m - i);
  }
  return total;
}

/// Probability that the Markov state advances from j to j + i undelivered
/// users resolved, conditioned on the tagged user staying undelivered: the
/// tagged user is exchangeable with the other `remaining` contenders, so it
/// sits outside the i decoded ones with probability (remaining - i)/remaining.
/// For i == 0 this returns the complementary stay probability
/// 1 - sum_{i>=1} slot_success_prob(i).
inline double transition_prob(int remaining, int i, double tx_prob, double level_prob,
                              std::span<const double> outage) {
  if (remaining < 1) throw std::invalid_argument("remaining users must be >= 1");
  const int cap = std::min<int>(static_cast<int>(outage.size()), remaining);
  if (i == 0) {
    double stay = 1.0;
    for (int s = 1; s <= cap; ++s)
      stay -= slot_success_prob(remaining, s, tx_prob, level_prob, outage);
    return stay;
  }
  if (i < 0 || i > std::min(cap, remaining - 1))
    throw std::out_of_range("advance must lie in [0, min(levels, remaining - 1)]");
  const double frac = static_cast<double>(remaining - i) / remaining;
  return frac * slot_success_prob(remaining, i, tx_prob, level_prob, outage);
}

/// Probability that the tagged user itself is decoded in one slot:
/// sum_i (i / remaining) * slot_success_prob(i), again by exchangeability.
inline double tagged_success_prob(int remaining, double tx_prob, double level_prob,
                                  std::span<const double> outage) {
  if (remaining < 1) throw std::invalid_argument("remaining users must be >= 1");
  const int cap = std::min<int>(static_cast<int>(outage.size()), remaining);
  double p = 0.0;
  for (int s = 1; s <= cap; ++s)
    p += (static_cast<double>(s) / remaining) *
         slot_success_prob(remaining, s, tx_prob, level_prob, outage);
  return p;
}

/// High-budget limit of slot_success_prob: with every rung feasible
/// (outage -> 0) only the m == i term survives, giving
///   C(remaining, i) q^i (1-q)^(remaining-i) * i! * w^i * C(K, i)
/// = remaining!/(remaining-i)! q^i (1-q)^(remaining-i) w^i C(K, i).
inline double high_snr_slot_success_prob(int remaining, int i, double tx_prob,
                                         double level_prob, int num_levels) {
  detail::check_slot_args(remaining, i, tx_prob, level_prob,
                          static_cast<std::size_t>(num_levels));
  return falling_factorial(remaining, i) * std::pow(tx_prob, i) *
         std::pow(1.0 - tx_prob, remaining - i) * std::pow(level_prob, i) *
         binomial(num_levels, i);
}

/// High-budget limit of transition_prob. For i >= 1 the tagged-exclusion
/// factor folds into the falling factorial:
///   (remaining-1)!/(remaining-1-i)! q^i (1-q)^(remaining-i) w^i C(K, i).
inline double high_snr_transition_prob(int remaining, int i, double tx_prob,
                                       double level_prob, int num_levels) {
  if (remaining < 1) throw std::invalid_argument("remaining users must be >= 1");
  const int cap = std::min(num_levels, remaining);
  if (i == 0) {
    double stay = 1.0;
    for (int s = 1; s <= cap; ++s)
      stay -= high_snr_slot_success_prob(remaining, s, tx_prob, level_prob, num_levels);
    return stay;
  }
  if (i < 0 || i > std::min(cap, remaining - 1))
    throw std::out_of_range("advance must lie in [0, min(levels, remaining - 1)]");
  return falling_factorial(remaining - 1, i) * std::pow(tx_prob, i) *
         std::pow(1.0 - tx_prob, remaining - i) * std::pow(level_prob, i) *
         binomial(num_levels, i);
}

/// One-slot probabilities for the single-level baseline where a transmission
/// succeeds only if it is the sole one in the slot and the rate-R link over
/// the faded channel at full budget P holds: log2(1 + P|h|^2) >= R, i.e.
/// |h|^2 >= theta / P with probability exp(-theta / P).
struct OmaSlotProbs {
  double any_success = 0.0;  // some contender decoded
  double advance = 0.0;      // a contender other than the tagged user decoded
  double stay = 0.0;         // nobody decoded
};

inline OmaSlotProbs oma_slot_probs(int remaining, double tx_prob, double rate,
                                   double power_budget) {
  if (remaining < 1) throw std::invalid_argument("remaining users must be >= 1");
  if (!(tx_prob >= 0.0 && tx_prob <= 1.0))
    throw std::invalid_argument("attempt probability must lie in [0, 1]");
  if (!(power_budget > 0.0)) throw std::invalid_argument("power budget must be > 0");
  const double link_ok = std::exp(-sic_threshold(rate) / power_budget);
  OmaSlotProbs r;
  r.any_success = remaining * tx_prob * std::pow(1.0 - tx_prob, remaining - 1) * link_ok;
  r.advance = (static_cast<double>(remaining - 1) / remaining) * r.any_success;
  r.stay = 1.0 - r.any_success;
  return r;
}

/// Which analytic chain to build.
enum class Strategy { NomaExact, NomaHighSnr, Oma };

inline const char* strategy_name(Strategy s) {
  switch (s) {
    case Strategy::NomaExact: return "noma-exact";
    case Strategy::NomaHighSnr: return "noma-highsnr";
    case Strategy::Oma: return "oma";
  }
  return "?";
}

/// Absorbing Markov chain for the tagged user's delivery within a frame.
/// State j in [0, M) counts users already delivered (the tagged one still
/// pending); absorption means the tagged user's packet was decoded.
/// transient is row-major M x M; absorption[j] completes each row to 1.
struct TransitionModel {
  Strategy strategy = Strategy::NomaExact;
  int num_users = 0;
  std::vector<double> transient;
  std::vector<double> absorption;

  double entry(int from, int to) const {
    if (from < 0 || from >= num_users || to < 0 || to >= num_users)
      throw std::out_of_range("state index out of range");
    return transient[static_cast<std::size_t>(from) * num_users + to];
  }
  double absorb(int from) const {
    if (from < 0 || from >= num_users) throw std::out_of_range("state index out of range");
    return absorption[static_cast<std::size_t>(from)];
  }
  double row_sum(int from) const {
    double s = absorb(from);
    for (int to = 0; to < num_users; ++to) s += entry(from, to);
    return s;
  }
};

/// Assemble the per-slot transition model for the tagged user under the given
/// strategy. The analytic chains assume uniform rung choice, so a non-default
/// level_choice_prob is rejected here (the simulator has no such restriction).
inline TransitionModel build_transition_model(Strategy strategy, const SystemParams& params,
                                              const LevelSet& ladder) {
  params.validate();
  if (params.level_choice_prob != 0.0 &&
      std::abs(params.level_choice_prob * params.num_levels - 1.0) > 1e-12)
    throw std::invalid_argument("analytic chains need the uniform rung choice 1/K");
  if (strategy == Strategy::NomaExact && ladder.size() != params.num_levels)
    throw std::invalid_argument("ladder size must match num_levels");

  const int M = params.num_users;
  const int K = params.num_levels;
  const double w = 1.0 / K;
  std::vector<double> outage;
  if (strategy == Strategy::NomaExact)
    outage = feasibility_outage(ladder, params.power_budget);

  TransitionModel model;
  model.strategy = strategy;
  model.num_users = M;
  model.transient.assign(static_cast<std::size_t>(M) * M, 0.0);
  model.absorption.assign(static_cast<std::size_t>(M), 0.0);

  for (int j = 0; j < M; ++j) {
    const int remaining = M - j;
    const double q = params.policy.tx_prob(M, K, j);
    auto& row = model.transient;
    const std::size_t base = static_cast<std::size_t>(j) * M;
    switch (strategy) {
      case Strategy::NomaExact: {
        const int cap = std::min(K, remaining);
        row[base + j] = transition_prob(remaining, 0, q, w, outage);
        for (int i = 1; i <= std::min(cap, remaining - 1); ++i)
          row[base + j + i] = transition_prob(remaining, i, q, w, outage);
        model.absorption[static_cast<std::size_t>(j)] =
            tagged_success_prob(remaining, q, w, outage);
        break;
      }
      case Strategy::NomaHighSnr: {
        const int cap = std::min(K, remaining);
        row[base + j] = high_snr_transition_prob(remaining, 0, q, w, K);
        for (int i = 1; i <= std::min(cap, remaining - 1); ++i)
          row[base + j + i] = high_snr_transition_prob(remaining, i, q, w, K);
        double absorb = 0.0;
        for (int s = 1; s <= cap; ++s)
          absorb += (static_cast<double>(s) / remaining) *
                    high_snr_slot_success_prob(remaining, s, q, w, K);
        model.absorption[static_cast<std::size_t>(j)] = absorb;
        break;
      }
      case Strategy::Oma: {
        const auto probs =
            oma_slot_probs(remaining, q, params.target_rate, params.power_budget);
        row[base + j] = probs.stay;
        if (j + 1 < M) row[base + j + 1] = probs.advance;
        model.absorption[static_cast<std::size_t>(j)] = probs.any_success / remaining;
        break;
      }
    }
  }
  return model;
}

/// Overload for the strategies that never look at a ladder.
inline TransitionModel build_transition_model(Strategy strategy, const SystemParams& params) {
  if (strategy == Strategy::NomaExact)
    throw std::invalid_argument("the exact chain needs an explicit ladder");
  return build_transition_model(strategy, params, LevelSet{{1.0}, LevelSet::Design::Custom, 0.0, 0});
}

}  // namespace gfnoma
