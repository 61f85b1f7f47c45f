#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace gfnoma {

/// Relative slack applied to the SINR threshold comparison so that ladders
/// engineered to meet a threshold with equality (their defining property)
/// are not rejected by floating-point rounding.
inline constexpr double kSinrSlack = 1e-9;

/// One transmission arriving in a slot: the 0-based ladder rung the sender
/// picked, and the receive power it arrives with (equal to the rung's level
/// under channel inversion).
struct Transmission {
  int level = 0;
  double power = 0.0;
};

struct SicStage {
  int level = 0;        // 0-based rung processed by this stage
  int tx_count = 0;     // transmitters on the rung
  double sinr = 0.0;    // SINR of the rung's transmission (0 unless tx_count == 1)
  bool decoded = false;
};

struct SlotOutcome {
  std::vector<int> decoded;      // indices into the transmission span
  std::vector<SicStage> stages;  // per-rung decoding trace, top rung first
};

/// Successive interference cancellation over one slot. Rungs are processed
/// from the highest receive level down. A rung decodes only if exactly one
/// transmission sits on it and its SINR clears the threshold against unit
/// noise plus all signals not yet cancelled (everything at this rung's
/// processing time except previously decoded ones). Decoded signals are
/// removed; failed ones - collided or starved of SINR - stay as interference
/// for every later stage.
inline SlotOutcome decode_sic(std::span<const Transmission> transmissions, int num_levels,
                              double threshold) {
  if (num_levels < 1) throw std::invalid_argument("need at least one level");
  if (!(threshold > 0.0)) throw std::invalid_argument("threshold must be > 0");

  std::vector<int> count(static_cast<std::size_t>(num_levels), 0);
  std::vector<double> power_sum(static_cast<std::size_t>(num_levels), 0.0);
  for (const auto& tx : transmissions) {
    if (tx.level < 0 || tx.level >= num_levels)
      throw std::invalid_argument("transmission rung out of range");
    if (!(tx.power > 0.0)) throw std::invalid_argument("receive power must be > 0");
    ++count[static_cast<std::size_t>(tx.level)];
    power_sum[static_cast<std::size_t>(tx.level)] += tx.power;
  }

  double pending = 0.0;  // total power not yet decoded
  for (double p : power_sum) pending += p;

  SlotOutcome out;
  out.stages.reserve(static_cast<std::size_t>(num_levels));
  for (int k = 0; k < num_levels; ++k) {
    SicStage stage;
    stage.level = k;
    stage.tx_count = count[static_cast<std::size_t>(k)];
    if (stage.tx_count == 1) {
      const double signal = power_sum[static_cast<std::size_t>(k)];
      const double interference = pending - signal;
      stage.sinr = signal / (1.0 + interference);
      if (signal * (1.0 + kSinrSlack) >= threshold * (1.0 + interference)) {
        stage.decoded = true;
        pending -= signal;
      }
    }
    out.stages.push_back(stage);
  }

  for (std::size_t t = 0; t < transmissions.size(); ++t) {
    const auto& stage = out.stages[static_cast<std::size_t>(transmissions[t].level)];
    if (stage.decoded) out.decoded.push_back(static_cast<int>(t));
  }
  return out;
}

}  // namespace gfnoma
