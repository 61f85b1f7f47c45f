#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "gfnoma/levels.hpp"
#include "gfnoma/params.hpp"
#include "gfnoma/rng.hpp"
#include "gfnoma/sic.hpp"

namespace gfnoma {

/// Physical-layer flavor of a simulation run: the multi-level SIC receiver,
/// or the single-user baseline where a slot decodes only its sole transmitter
/// (at full budget, no inversion) when the faded link sustains the rate.
enum class TxScheme { NomaSic, Oma };

/// Result of a frame-level Monte Carlo run for the tagged user (user 0).
struct SimEstimate {
  int num_users = 0;
  std::int64_t frames = 0;
  std::int64_t deliveries = 0;  // tagged deliveries observed
  std::uint64_t seed = 0;
  double mean_aoi = std::numeric_limits<double>::quiet_NaN();
  double stderr_aoi = std::numeric_limits<double>::quiet_NaN();
  /// Per-state slot tallies: transition_counts is num_users x (num_users + 1)
  /// row-major, whose last column counts tagged deliveries from that state;
  /// state_slots[j] counts slots spent in state j.
  std::vector<std::int64_t> transition_counts;
  std::vector<std::int64_t> state_slots;
  /// Raw batch-means accumulators (age area and elapsed time per batch), for
  /// paired comparisons between runs that share a seed.
  std::vector<double> batch_area;
  std::vector<double> batch_time;

  /// True when enough deliveries (two or more) exist for a time-average age.
  bool has_estimate() const { return deliveries >= 2; }

  std::int64_t transitions(int from, int col) const {
    if (from < 0 || from >= num_users || col < 0 || col > num_users)
      throw std::out_of_range("transition index out of range");
    return transition_counts[static_cast<std::size_t>(from) * (num_users + 1) + col];
  }
};

namespace detail {

/// Draw the transmissions of one slot into txs/tx_users. Exactly one engine
/// step per branch point, so the draw pattern is reproducible by inspection:
/// attempt -> (rung select -> channel gain) for the SIC scheme, or
/// attempt -> channel gain for the baseline.
inline void draw_slot(std::mt19937_64& eng, TxScheme scheme, const SystemParams& params,
                      const LevelSet& ladder, const std::vector<char>& delivered,
                      int delivered_count, std::vector<Transmission>& txs,
                      std::vector<int>& tx_users) {
  const int M = params.num_users;
  const int K = params.num_levels;
  const double q = params.policy.tx_prob(M, K, delivered_count);
  const double w = params.level_prob();
  const double rung_mass = w * K;
  txs.clear();
  tx_users.clear();
  for (int u = 0; u < M; ++u) {
    if (delivered[static_cast<std::size_t>(u)]) continue;
    if (uniform01(eng) >= q) continue;
    if (scheme == TxScheme::NomaSic) {
      const double pick = uniform01(eng);
      const double gain = exp_unit(eng);
      if (pick >= rung_mass) continue;  // attempt fell outside the rung mass
      const int rung = std::min(static_cast<int>(pick / w), K - 1);
      // channel inversion to receive level P_rung is feasible iff the
      // required transmit power P_rung / gain fits the budget
      if (ladder[rung] <= params.power_budget * gain) {
        txs.push_back({rung, ladder[rung]});
        tx_users.push_back(u);
      }
    } else {
      const double gain = exp_unit(eng);
      txs.push_back({0, params.power_budget * gain});
      tx_users.push_back(u);
    }
  }
}

/// Decode one slot. Returns the decoded users via the out-parameters.
inline void decode_slot(TxScheme scheme, const std::vector<Transmission>& txs,
                        const std::vector<int>& tx_users, int num_levels, double threshold,
                        std::vector<int>& decoded_users) {
  decoded_users.clear();
  if (scheme == TxScheme::NomaSic) {
    const auto outcome = decode_sic(txs, num_levels, threshold);
    for (int d : outcome.decoded)
      decoded_users.push_back(tx_users[static_cast<std::size_t>(d)]);
  } else {
    if (txs.size() == 1 && txs[0].power >= threshold) decoded_users.push_back(tx_users[0]);
  }
}

inline void check_sim_args(const SystemParams& params, const LevelSet& ladder,
                           TxScheme scheme) {
  params.validate();
  if (scheme == TxScheme::NomaSic && ladder.size() != params.num_levels)
    throw std::invalid_argument("ladder size must match num_levels");
  if (params.level_prob() * params.num_levels > 1.0 + 1e-12)
    throw std::invalid_argument("level choice probability must satisfy K * w <= 1");
}

}  // namespace detail

/// Frame-level Monte Carlo estimate of the tagged user's average age of
/// information. Every frame starts with fresh packets for all users; the
/// frame's slots run until the tagged packet is delivered (the rest of the
/// frame cannot affect the tagged age process) or the frame ends undelivered.
/// The age estimate is the exact time average of the sawtooth between the
/// first and last observed delivery, and its standard error comes from batch
/// means over up to 20 frame-contiguous batches. Each frame draws from its
/// own seed substream, so the run is reproducible slot by slot.
inline SimEstimate simulate_frames(const SystemParams& params, const LevelSet& ladder,
                                   TxScheme scheme, std::int64_t num_frames,
                                   std::uint64_t seed) {
  detail::check_sim_args(params, ladder, scheme);
  if (num_frames < 1) throw std::invalid_argument("need at least one frame");
  const int M = params.num_users;
  const int N = params.slots_per_frame;
  const double T = params.slot_duration;
  const double theta = sic_threshold(params.target_rate);

  const int batches = static_cast<int>(std::min<std::int64_t>(20, num_frames));
  std::vector<double> batch_area(static_cast<std::size_t>(batches), 0.0);
  std::vector<double> batch_time(static_cast<std::size_t>(batches), 0.0);
  double total_area = 0.0, total_time = 0.0;
  bool have_prev = false;
  double prev_delivery = 0.0, prev_service = 0.0;

  SimEstimate est;
  est.num_users = M;
  est.frames = num_frames;
  est.seed = seed;
  est.transition_counts.assign(static_cast<std::size_t>(M) * (M + 1), 0);
  est.state_slots.assign(static_cast<std::size_t>(M), 0);

  std::vector<char> delivered(static_cast<std::size_t>(M));
  std::vector<Transmission> txs;
  std::vector<int> tx_users, decoded_users;

  for (std::int64_t f = 0; f < num_frames; ++f) {
    auto eng = substream_engine(seed, static_cast<std::uint64_t>(f));
    std::fill(delivered.begin(), delivered.end(), 0);
    int delivered_count = 0;
    for (int slot = 1; slot <= N; ++slot) {
      const int state = delivered_count;
      ++est.state_slots[static_cast<std::size_t>(state)];
      detail::draw_slot(eng, scheme, params, ladder, delivered, delivered_count, txs,
                        tx_users);
      detail::decode_slot(scheme, txs, tx_users, params.num_levels, theta, decoded_users);

      int others_new = 0;
      bool tagged_new = false;
      for (int u : decoded_users) {
        delivered[static_cast<std::size_t>(u)] = 1;
        ++delivered_count;
        if (u == 0)
          tagged_new = true;
        else
          ++others_new;
      }
      if (tagged_new) {
        ++est.transition_counts[static_cast<std::size_t>(state) * (M + 1) + M];
        ++est.deliveries;
        const double delivery_time = static_cast<double>(f) * N * T + slot * T;
        const double service = slot * T;
        if (have_prev) {
          const double dt = delivery_time - prev_delivery;
          const double area = prev_service * dt + 0.5 * dt * dt;
          const auto b = static_cast<std::size_t>(f * batches / num_frames);
          batch_area[b] += area;
          batch_time[b] += dt;
          total_area += area;
          total_time += dt;
        }
        prev_delivery = delivery_time;
        prev_service = service;
        have_prev = true;
        break;
      }
      ++est.transition_counts[static_cast<std::size_t>(state) * (M + 1) + state + others_new];
    }
  }

  est.batch_area = batch_area;
  est.batch_time = batch_time;
  if (total_time > 0.0) {
    est.mean_aoi = total_area / total_time;
    std::vector<double> ratios;
    for (int b = 0; b < batches; ++b)
      if (batch_time[static_cast<std::size_t>(b)] > 0.0)
        ratios.push_back(batch_area[static_cast<std::size_t>(b)] /
                         batch_time[static_cast<std::size_t>(b)]);
    if (ratios.size() >= 2) {
      double mean = 0.0;
      for (double r : ratios) mean += r;
      mean /= static_cast<double>(ratios.size());
      double var = 0.0;
      for (double r : ratios) var += (r - mean) * (r - mean);
      var /= static_cast<double>(ratios.size() - 1);
      est.stderr_aoi = std::sqrt(var / static_cast<double>(ratios.size()));
    }
  }
  return est;
}

/// Baseline run without a ladder: full-power single-user decoding.
inline SimEstimate simulate_frames_oma(const SystemParams& params, std::int64_t num_frames,
                                       std::uint64_t seed) {
  return simulate_frames(params, LevelSet{{1.0}, LevelSet::Design::Custom, 0.0, 0},
                         TxScheme::Oma, num_frames, seed);
}

/// Difference (a - b) between two age estimates, with a paired batch-means
/// standard error. Meant for runs that shared a seed: their per-frame
/// randomness is common, so batchwise differences cancel most of the noise
/// and the comparison is far tighter than the two individual error bars.
struct PairedDiff {
  double diff = std::numeric_limits<double>::quiet_NaN();
  double stderr_diff = std::numeric_limits<double>::quiet_NaN();
  int batches_used = 0;

  bool valid() const { return batches_used >= 2; }
};

inline PairedDiff paired_aoi_diff(const SimEstimate& a, const SimEstimate& b) {
  PairedDiff out;
  if (!a.has_estimate() || !b.has_estimate()) return out;
  out.diff = a.mean_aoi - b.mean_aoi;
  const std::size_t nb = std::min(a.batch_area.size(), b.batch_area.size());
  std::vector<double> d;
  for (std::size_t i = 0; i < nb; ++i)
    if (a.batch_time[i] > 0.0 && b.batch_time[i] > 0.0)
      d.push_back(a.batch_area[i] / a.batch_time[i] - b.batch_area[i] / b.batch_time[i]);
  if (d.size() < 2) return out;
  double mean = 0.0;
  for (double x : d) mean += x;
  mean /= static_cast<double>(d.size());
  double var = 0.0;
  for (double x : d) var += (x - mean) * (x - mean);
  var /= static_cast<double>(d.size() - 1);
  out.stderr_diff = std::sqrt(var / static_cast<double>(d.size()));
  out.batches_used = static_cast<int>(d.size());
  return out;
}

/// Empirical per-slot transition frequencies, gathered state by state.
struct EmpiricalTransitions {
  int num_users = 0;
  std::int64_t slots_per_state = 0;
  std::uint64_t seed = 0;
  std::vector<std::int64_t> counts;  // num_users x (num_users + 1), last col = tagged

  std::int64_t count(int from, int col) const {
    if (from < 0 || from >= num_users || col < 0 || col > num_users)
      throw std::out_of_range("transition index out of range");
    return counts[static_cast<std::size_t>(from) * (num_users + 1) + col];
  }
  double frequency(int from, int col) const {
    return static_cast<double>(count(from, col)) / static_cast<double>(slots_per_state);
  }
  /// Binomial standard error of the frequency estimate.
  double freq_stderr(int from, int col) const {
    const double f = frequency(from, col);
    return std::sqrt(f * (1.0 - f) / static_cast<double>(slots_per_state));
  }
};

/// Run `slots_per_state` independent slots from every chain state j (j users
/// already delivered, tagged user pending) and tally where each slot leads.
/// Gives a direct Monte Carlo estimate of the transition matrix, one state
/// substream each.
inline EmpiricalTransitions estimate_transitions(const SystemParams& params,
                                                 const LevelSet& ladder, TxScheme scheme,
                                                 std::int64_t slots_per_state,
                                                 std::uint64_t seed) {
  detail::check_sim_args(params, ladder, scheme);
  if (slots_per_state < 1) throw std::invalid_argument("need at least one slot per state");
  const int M = params.num_users;
  const double theta = sic_threshold(params.target_rate);

  EmpiricalTransitions emp;
  emp.num_users = M;
  emp.slots_per_state = slots_per_state;
  emp.seed = seed;
  emp.counts.assign(static_cast<std::size_t>(M) * (M + 1), 0);

  std::vector<char> delivered(static_cast<std::size_t>(M));
  std::vector<Transmission> txs;
  std::vector<int> tx_users, decoded_users;

  for (int j = 0; j < M; ++j) {
    auto eng = substream_engine(seed, static_cast<std::uint64_t>(j));
    // users M - j, ..., M - 1 are marked delivered; user 0 stays the tagged one
    std::fill(delivered.begin(), delivered.end(), 0);
    for (int u = M - j; u < M; ++u) delivered[static_cast<std::size_t>(u)] = 1;
    for (std::int64_t s = 0; s < slots_per_state; ++s) {
      detail::draw_slot(eng, scheme, params, ladder, delivered, j, txs, tx_users);
      detail::decode_slot(scheme, txs, tx_users, params.num_levels, theta, decoded_users);
      int others_new = 0;
      bool tagged_new = false;
      for (int u : decoded_users) {
        if (u == 0)
          tagged_new = true;
        else
          ++others_new;
      }
      const int col = tagged_new ? M : j + others_new;
      ++emp.counts[static_cast<std::size_t>(j) * (M + 1) + col];
    }
  }
  return emp;
}

}  // namespace gfnoma
