#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace gfnoma {

/// Convert a power value from decibels to linear scale.
inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

/// Convert a linear power value to decibels.
inline double linear_to_db(double linear) {
  if (!(linear > 0.0)) throw std::invalid_argument("dB conversion needs a positive value");
  return 10.0 * std::log10(linear);
}

/// Per-slot channel-access policy: the probability that an undelivered user
/// attempts a transmission in a given slot.
///
/// Three variants are supported:
///  - fixed(p): every undelivered user attempts with constant probability p;
///  - noma_adaptive(): attempt with min{K/M, 1}, matched to a K-level ladder;
///  - oma_adaptive(): attempt with 1/(M - delivered), matched to single-user
///    decoding where exactly one transmitter per slot is the ideal.
struct AccessPolicy {
  enum class Kind { FixedProb, NomaAdaptive, OmaAdaptive };

  Kind kind = Kind::NomaAdaptive;
  double fixed_prob = 0.0;

  static AccessPolicy fixed(double p) {
    if (!(p >= 0.0 && p <= 1.0))
      throw std::invalid_argument("attempt probability must lie in [0, 1]");
    return {Kind::FixedProb, p};
  }
  static AccessPolicy noma_adaptive() { return {Kind::NomaAdaptive, 0.0}; }
  static AccessPolicy oma_adaptive() { return {Kind::OmaAdaptive, 0.0}; }

  /// Attempt probability for one undelivered user when `delivered` users have
  /// already had a packet delivered in the current frame.
  double tx_prob(int num_users, int num_levels, int delivered) const {
    if (num_users < 1) throw std::invalid_argument("need at least one user");
    if (delivered < 0 || delivered >= num_users)
      throw std::invalid_argument("delivered count out of range");
    switch (kind) {
      case Kind::FixedProb:
        return fixed_prob;
      case Kind::NomaAdaptive:
        if (num_levels < 1) throw std::invalid_argument("need at least one level");
        return std::min(static_cast<double>(num_levels) / num_users, 1.0);
      case Kind::OmaAdaptive:
        return 1.0 / (num_users - delivered);
    }
    return 0.0;  // unreachable
  }

  /// Short textual form, e.g. "fixed:0.25", "noma", "oma". Used in CSV output.
  std::string token() const {
    switch (kind) {
      case Kind::FixedProb: {
        char buf[48];
        std::snprintf(buf, sizeof buf, "fixed:%.12g", fixed_prob);
        return buf;
      }
      case Kind::NomaAdaptive: return "noma";
      case Kind::OmaAdaptive: return "oma";
    }
    return "?";
  }

  static AccessPolicy parse(const std::string& token) {
    if (token == "noma") return noma_adaptive();
    if (token == "oma") return oma_adaptive();
    if (token.rfind("fixed:", 0) == 0) {
      std::size_t pos = 0;
      double p = 0.0;
      const std::string body = token.substr(6);
      try {
        p = std::stod(body, &pos);
      } catch (const std::exception&) {
        throw std::invalid_argument("bad attempt probability in '" + token + "'");
      }
      if (pos != body.size())
        throw std::invalid_argument("trailing junk in '" + token + "'");
      return fixed(p);
    }
    throw std::invalid_argument("unknown access policy '" + token +
                                "' (expected fixed:<p>, noma, or oma)");
  }

  friend bool operator==(const AccessPolicy&, const AccessPolicy&) = default;
};

/// Scenario parameters shared by the analytic chain and the simulator.
///
/// num_users        M, contending users, each holding one packet per frame
/// num_levels       K, rungs of the receive-SNR ladder (SIC decoding stages)
/// slots_per_frame  N, slots in one frame; a frame is also the sampling period
/// slot_duration    T, seconds per slot
/// target_rate      R, bits/s/Hz each transmission must achieve
/// power_budget     P, linear-scale transmit power budget per user
/// policy           per-slot attempt policy
/// level_choice_prob  probability of picking each particular ladder rung;
///                    0 means the uniform default 1/K
struct SystemParams {
  int num_users = 1;
  int num_levels = 1;
  int slots_per_frame = 1;
  double slot_duration = 1.0;
  double target_rate = 1.0;
  double power_budget = 1.0;
  AccessPolicy policy = AccessPolicy::noma_adaptive();
  double level_choice_prob = 0.0;

  double level_prob() const {
    return level_choice_prob > 0.0 ? level_choice_prob : 1.0 / num_levels;
  }

  void validate() const {
    if (num_users < 1) throw std::invalid_argument("num_users must be >= 1");
    if (num_levels < 1) throw std::invalid_argument("num_levels must be >= 1");
    if (slots_per_frame < 1) throw std::invalid_argument("slots_per_frame must be >= 1");
    if (!(slot_duration > 0.0)) throw std::invalid_argument("slot_duration must be > 0");
    if (!(target_rate > 0.0)) throw std::invalid_argument("target_rate must be > 0");
    if (!(power_budget > 0.0)) throw std::invalid_argument("power_budget must be > 0");
    if (level_choice_prob < 0.0 || level_choice_prob > 1.0)
      throw std::invalid_argument("level_choice_prob must lie in [0, 1]");
    if (policy.kind == AccessPolicy::Kind::FixedProb &&
        (policy.fixed_prob < 0.0 || policy.fixed_prob > 1.0))
      throw std::invalid_argument("attempt probability must lie in [0, 1]");
  }
};

}  // namespace gfnoma
