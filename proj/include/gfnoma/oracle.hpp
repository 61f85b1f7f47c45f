#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "gfnoma/combinatorics.hpp"
#include "gfnoma/levels.hpp"
#include "gfnoma/sic.hpp"

namespace gfnoma {

/// Exact one-slot outcome distribution for `remaining` contending users,
/// produced by brute-force enumeration (see enumerate_slot_with_rule).
struct SlotDistribution {
  int remaining = 0;
  /// any_success[i]: probability that exactly i users are decoded.
  std::vector<double> any_success;
  /// advance[i]: probability that exactly i users are decoded and the tagged
  /// user (index 0) is not among them.
  std::vector<double> advance;
  /// Probability that the tagged user is decoded.
  double tagged_success = 0.0;
};

/// Hard ceiling on the enumerated population: the outcome space has
/// (2K + 1)^remaining states and grows out of reach quickly.
inline constexpr int kMaxEnumeratedUsers = 12;

/// Enumerate every per-user outcome of one slot and accumulate the exact
/// distribution of decode counts. Each user independently is either silent
/// (prob 1 - q), or attempts and lands on rung k feasibly
/// (prob q * w * (1 - pe_k)), or attempts rung k, finds it infeasible for its
/// channel draw, and stays silent (prob q * w * pe_k) - a 2K + 1 way split,
/// enumerated literally with no combinatorial shortcuts. The decode rule maps
/// the resulting transmission pattern to the set of decoded transmissions.
///
/// `rule` is called with the feasible transmissions (rung + receive power)
/// and must return the indices of the decoded ones.
template <typename Rule>
SlotDistribution enumerate_slot_with_rule(int remaining, double tx_prob, double level_prob,
                                          const LevelSet& ladder, double power_budget,
                                          Rule&& rule) {
  if (remaining < 1) throw std::invalid_argument("remaining users must be >= 1");
  if (remaining > kMaxEnumeratedUsers)
    throw std::invalid_argument("enumeration instance too large (more than 12 users)");
  if (!(tx_prob >= 0.0 && tx_prob <= 1.0))
    throw std::invalid_argument("attempt probability must lie in [0, 1]");
  const int K = ladder.size();
  if (!(level_prob >= 0.0) || level_prob * K > 1.0 + 1e-12)
    throw std::invalid_argument("level choice probability must satisfy K * w <= 1");
  const auto outage = feasibility_outage(ladder, power_budget);

  std::vector<KahanSum> any(static_cast<std::size_t>(remaining) + 1);
  std::vector<KahanSum> adv(static_cast<std::size_t>(remaining) + 1);
  KahanSum tagged;

  std::vector<Transmission> txs;
  std::vector<int> tx_users;
  txs.reserve(static_cast<std::size_t>(remaining));
  tx_users.reserve(static_cast<std::size_t>(remaining));

  // Depth-first odometer over the (2K + 1)^remaining outcome assignments.
  auto recurse = [&](auto&& self, int user, double weight) -> void {
    if (weight == 0.0) return;  // whole subtree has zero probability
    if (user == remaining) {
      const std::vector<int> decoded = rule(std::span<const Transmission>(txs));
      bool tagged_decoded = false;
      for (int d : decoded) {
        if (d < 0 || d >= static_cast<int>(txs.size()))
          throw std::logic_error("decode rule returned a bad transmission index");
        if (tx_users[static_cast<std::size_t>(d)] == 0) tagged_decoded = true;
      }
      const auto i = static_cast<std::size_t>(decoded.size());
      any[i].add(weight);
      if (tagged_decoded)
        tagged.add(weight);
      else
        adv[i].add(weight);
      return;
    }
    // silent: no attempt this slot
    self(self, user + 1, weight * (1.0 - tx_prob));
    for (int k = 0; k < K; ++k) {
      const double rung_weight = weight * tx_prob * level_prob;
      // attempt on rung k, channel good enough to invert
      txs.push_back({k, ladder[k]});
      tx_users.push_back(user);
      self(self, user + 1, rung_weight * (1.0 - outage[static_cast<std::size_t>(k)]));
      txs.pop_back();
      tx_users.pop_back();
      // attempt on rung k, budget exceeded: forced silence
      self(self, user + 1, rung_weight * outage[static_cast<std::size_t>(k)]);
    }
    // attempts that fall outside the rung mass K * w (only when w < 1/K)
    const double leftover = 1.0 - level_prob * K;
    if (leftover > 0.0) self(self, user + 1, weight * tx_prob * leftover);
  };
  recurse(recurse, 0, 1.0);

  SlotDistribution dist;
  dist.remaining = remaining;
  dist.any_success.resize(static_cast<std::size_t>(remaining) + 1);
  dist.advance.resize(static_cast<std::size_t>(remaining) + 1);
  for (std::size_t i = 0; i <= static_cast<std::size_t>(remaining); ++i) {
    dist.any_success[i] = any[i].value();
    dist.advance[i] = adv[i].value();
  }
  dist.tagged_success = tagged.value();
  return dist;
}

/// Decode rule used by the analytic chain: a slot decodes all transmissions
/// when every transmitter sits on its own rung, and none otherwise.
struct DistinctRungRule {
  int num_levels = 1;

  std::vector<int> operator()(std::span<const Transmission> txs) const {
    std::vector<int> per_rung(static_cast<std::size_t>(num_levels), 0);
    for (const auto& tx : txs) ++per_rung[static_cast<std::size_t>(tx.level)];
    for (int c : per_rung)
      if (c > 1) return {};
    std::vector<int> all(txs.size());
    for (std::size_t t = 0; t < txs.size(); ++t) all[t] = static_cast<int>(t);
    return all;
  }
};

/// Decode rule that runs the actual successive-interference-cancellation
/// receiver on each transmission pattern.
struct SicRule {
  int num_levels = 1;
  double threshold = 1.0;

  std::vector<int> operator()(std::span<const Transmission> txs) const {
    return decode_sic(txs, num_levels, threshold).decoded;
  }
};

/// Exact slot distribution under the all-rungs-distinct decode rule.
inline SlotDistribution enumerate_slot(int remaining, double tx_prob, double level_prob,
                                       const LevelSet& ladder, double power_budget) {
  return enumerate_slot_with_rule(remaining, tx_prob, level_prob, ladder, power_budget,
                                  DistinctRungRule{ladder.size()});
}

/// Exact slot distribution under the physical SIC receiver.
inline SlotDistribution enumerate_slot_physical(int remaining, double tx_prob,
                                                double level_prob, const LevelSet& ladder,
                                                double power_budget, double threshold) {
  return enumerate_slot_with_rule(remaining, tx_prob, level_prob, ladder, power_budget,
                                  SicRule{ladder.size(), threshold});
}

}  // namespace gfnoma
