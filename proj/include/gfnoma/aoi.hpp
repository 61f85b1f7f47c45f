#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "gfnoma/kernel.hpp"

namespace gfnoma {

/// Thrown when the delivery probability of a frame is (numerically) zero, so
/// inter-update times have no finite mean and the age diverges.
struct AbsorptionImpossible : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

/// Slot-by-slot absorption profile of one frame: q[l-1] is the probability
/// that the tagged packet is delivered exactly in slot l (1-based), and
/// `survival` the probability it is still undelivered after slot N. Computed
/// with iterated vector-matrix products, never a matrix power.
struct AbsorptionProfile {
  std::vector<double> q;
  double survival = 1.0;
};

inline AbsorptionProfile absorption_profile(const TransitionModel& model,
                                            int slots_per_frame) {
  if (slots_per_frame < 1) throw std::invalid_argument("slots_per_frame must be >= 1");
  const int M = model.num_users;
  if (M < 1 || model.transient.size() != static_cast<std::size_t>(M) * M ||
      model.absorption.size() != static_cast<std::size_t>(M))
    throw std::invalid_argument("malformed transition model");

  std::vector<double> state(static_cast<std::size_t>(M), 0.0);
  state[0] = 1.0;  // a frame starts with every user undelivered
  AbsorptionProfile out;
  out.q.resize(static_cast<std::size_t>(slots_per_frame), 0.0);
  std::vector<double> next(static_cast<std::size_t>(M));
  for (int l = 0; l < slots_per_frame; ++l) {
    double absorbed = 0.0;
    for (int j = 0; j < M; ++j) absorbed += state[static_cast<std::size_t>(j)] *
                                            model.absorption[static_cast<std::size_t>(j)];
    out.q[static_cast<std::size_t>(l)] = absorbed;
    std::fill(next.begin(), next.end(), 0.0);
    for (int j = 0; j < M; ++j) {
      const double mass = state[static_cast<std::size_t>(j)];
      if (mass == 0.0) continue;
      const std::size_t base = static_cast<std::size_t>(j) * M;
      for (int to = j; to < M; ++to)  // rows are upper triangular
        next[static_cast<std::size_t>(to)] += mass * model.transient[base + to];
    }
    state.swap(next);
  }
  double survive = 0.0;
  for (double s : state) survive += s;
  out.survival = survive;
  return out;
}

inline void require_absorbable(double success_prob) {
  if (success_prob <= 1e-300)
    throw AbsorptionImpossible(
        "delivery within a frame has zero probability; the age diverges");
}

}  // namespace detail

/// Probability that the tagged user's packet is delivered within one frame of
/// N slots: 1 minus the survival mass after N transient steps.
inline double frame_success_prob(const TransitionModel& model, int slots_per_frame) {
  return 1.0 - detail::absorption_profile(model, slots_per_frame).survival;
}

/// First and second moments of the service time S = T * (delivery slot),
/// conditioned on delivery happening within the frame.
struct ServiceMoments {
  double mean = 0.0;
  double second = 0.0;
};

inline ServiceMoments service_moments(const TransitionModel& model, int slots_per_frame,
                                      double slot_duration) {
  if (!(slot_duration > 0.0)) throw std::invalid_argument("slot_duration must be > 0");
  const auto profile = detail::absorption_profile(model, slots_per_frame);
  const double success = 1.0 - profile.survival;
  detail::require_absorbable(success);
  double m1 = 0.0, m2 = 0.0;
  for (int l = 1; l <= slots_per_frame; ++l) {
    const double ql = profile.q[static_cast<std::size_t>(l) - 1];
    m1 += l * ql;
    m2 += static_cast<double>(l) * l * ql;
  }
  const double t = slot_duration;
  return {t * m1 / success, t * t * m2 / success};
}

/// First and second moments of the inter-update time Y: the number of frames
/// until the next delivered frame is geometric with the frame success
/// probability, and within a delivering frame the update lands S after the
/// frame boundary. With W = N*T the frame length and Q the success
/// probability:
///   E{Y}   = W / Q
///   E{Y^2} = W^2 (2 - Q) / Q^2 + 2 E{S^2} - 2 E{S}^2
struct InterupdateMoments {
  double mean = 0.0;
  double second = 0.0;
};

inline InterupdateMoments interupdate_moments(const TransitionModel& model,
                                              int slots_per_frame, double slot_duration) {
  const auto profile = detail::absorption_profile(model, slots_per_frame);
  const double success = 1.0 - profile.survival;
  detail::require_absorbable(success);
  const auto sm = service_moments(model, slots_per_frame, slot_duration);
  const double frame_len = slots_per_frame * slot_duration;
  InterupdateMoments out;
  out.mean = frame_len / success;
  out.second = frame_len * frame_len * (1.0 + profile.survival) / (success * success) +
               2.0 * sm.second - 2.0 * sm.mean * sm.mean;
  return out;
}

/// Full decomposition of the average age of information for a tagged user
/// sampling once per frame.
struct AoiBreakdown {
  double frame_success_prob = 0.0;
  double mean_service = 0.0;
  double second_service = 0.0;
  double mean_interupdate = 0.0;
  double second_interupdate = 0.0;
  double cross_term = 0.0;  // E{S Y} for consecutive service/inter-update pairs
  double average_aoi = 0.0;
};

/// Average age of information of the tagged user:
///   age = E{S Y} / E{Y} + E{Y^2} / (2 E{Y})
/// with E{S Y} = E{S} E{Y} - E{S^2} + E{S}^2, since the service time of the
/// previous update and the following inter-update time share only the
/// previous frame's delivery slot.
inline AoiBreakdown average_aoi(const TransitionModel& model, int slots_per_frame,
                                double slot_duration) {
  const auto profile = detail::absorption_profile(model, slots_per_frame);
  const double success = 1.0 - profile.survival;
  detail::require_absorbable(success);
  const auto sm = service_moments(model, slots_per_frame, slot_duration);
  const auto ym = interupdate_moments(model, slots_per_frame, slot_duration);
  AoiBreakdown b;
  b.frame_success_prob = success;
  b.mean_service = sm.mean;
  b.second_service = sm.second;
  b.mean_interupdate = ym.mean;
  b.second_interupdate = ym.second;
  b.cross_term = sm.mean * ym.mean - sm.second + sm.mean * sm.mean;
  b.average_aoi = b.cross_term / ym.mean + ym.second / (2.0 * ym.mean);
  return b;
}

}  // namespace gfnoma
