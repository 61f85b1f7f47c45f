#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace gfnoma {

/// Minimum receive SNR at which a rate-R transmission decodes:
/// theta = 2^R - 1, from R = log2(1 + theta). At moderate rates exp2 - 1
/// is exact (integral for integer rates); once 2^R sits close to 1 the
/// subtraction cancels, so small rates go through expm1 instead.
inline double sic_threshold(double rate) {
  if (!(rate > 0.0)) throw std::invalid_argument("target rate must be > 0");
  return rate >= 0.5 ? std::exp2(rate) - 1.0 : std::expm1(rate * std::numbers::ln2);
}

/// A ladder of pre-configured receive-SNR levels P_1 > P_2 > ... > P_K > 0
/// (linear scale). Users pick a rung and invert their channel so the signal
/// arrives at exactly the chosen level; the receiver decodes rungs top-down
/// with successive interference cancellation.
struct LevelSet {
  enum class Design { DesignI, DesignII, Custom };

  std::vector<double> levels;
  Design design = Design::Custom;
  double rate_used = 0.0;  // rate the ladder was built for (0 for custom)
  int users_used = 0;      // worst-case user count baked into Design I (0 otherwise)

  int size() const { return static_cast<int>(levels.size()); }
  double operator[](int k) const { return levels[static_cast<std::size_t>(k)]; }
};

/// Ladder sized for the worst case: rung k must survive even if all other
/// M - 1 users pile onto rung k + 1. Recursion (theta = 2^R - 1):
///   P_K = theta,   P_k = theta * (1 + (M - 1) * P_{k+1}).
/// Guarantees rung k decodes whenever it holds a single transmitter and no
/// rung above it collided, whatever the rungs below are doing.
inline LevelSet design_i_levels(double rate, int num_levels, int num_users) {
  if (num_levels < 1) throw std::invalid_argument("need at least one level");
  if (num_users < 2) throw std::invalid_argument("worst-case ladder needs at least two users");
  const double theta = sic_threshold(rate);
  std::vector<double> p(static_cast<std::size_t>(num_levels));
  p[static_cast<std::size_t>(num_levels) - 1] = theta;
  for (int k = num_levels - 2; k >= 0; --k)
    p[static_cast<std::size_t>(k)] =
        theta * (1.0 + (num_users - 1) * p[static_cast<std::size_t>(k) + 1]);
  return {std::move(p), LevelSet::Design::DesignI, rate, num_users};
}

/// Ladder sized for the collision-free case: rung k must survive exactly the
/// interference of all rungs below it. Cumulative recursion
///   P_K = theta,   P_k = theta * (1 + sum_{l > k} P_l),
/// whose closed form is P_k = theta * 2^(R * (K - k)). Independent of the
/// user count, so one ladder serves any population.
inline LevelSet design_ii_levels(double rate, int num_levels) {
  if (num_levels < 1) throw std::invalid_argument("need at least one level");
  const double theta = sic_threshold(rate);
  std::vector<double> p(static_cast<std::size_t>(num_levels));
  double below = 0.0;
  for (int k = num_levels - 1; k >= 0; --k) {
    p[static_cast<std::size_t>(k)] = theta * (1.0 + below);
    below += p[static_cast<std::size_t>(k)];
  }
  return {std::move(p), LevelSet::Design::DesignII, rate, 0};
}

/// Wrap an explicit ladder. Levels must be finite, positive, and strictly
/// descending from rung 1 to rung K.
inline LevelSet custom_levels(std::vector<double> levels) {
  if (levels.empty()) throw std::invalid_argument("need at least one level");
  for (std::size_t k = 0; k < levels.size(); ++k) {
    if (!(levels[k] > 0.0) || !std::isfinite(levels[k]))
      throw std::invalid_argument("levels must be positive and finite");
    if (k > 0 && !(levels[k - 1] > levels[k]))
      throw std::invalid_argument("levels must be strictly descending");
  }
  return {std::move(levels), LevelSet::Design::Custom, 0.0, 0};
}

/// Per-rung infeasibility probability: a user aiming at receive level P_k
/// needs transmit power P_k / |h|^2 with |h|^2 ~ Exp(1), so the budget P is
/// exceeded with probability Pr{|h|^2 < P_k / P} = 1 - exp(-P_k / P).
/// An infeasible user stays silent for the slot.
inline std::vector<double> feasibility_outage(const LevelSet& ladder, double power_budget) {
  if (!(power_budget > 0.0)) throw std::invalid_argument("power budget must be > 0");
  std::vector<double> pe(static_cast<std::size_t>(ladder.size()));
  for (int k = 0; k < ladder.size(); ++k)
    pe[static_cast<std::size_t>(k)] = -std::expm1(-ladder[k] / power_budget);
  return pe;
}

}  // namespace gfnoma
