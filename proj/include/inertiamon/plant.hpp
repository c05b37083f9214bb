#pragma once

#include <string>
#include <vector>

#include "inertiamon/error.hpp"

namespace inertiamon {

// Historical pump switching-off signature of one PSH plant. The MW step is
// what the swing equation needs as the event size.
struct PlantSignature {
  std::string plant_id;
  std::string region;
  double unit_capacity_mw = 0.0;
  double mw_step_mean_mw = 0.0;
  double mw_step_tolerance = 0.0;  // fraction, e.g. 0.07

  void validate() const {
    if (plant_id.empty()) throw Error(ErrorCode::kInvalidConfig, "plant_id is empty");
    if (!(mw_step_mean_mw > 0.0)) throw Error(ErrorCode::kInvalidConfig, plant_id + ": mw_step_mean_mw must be > 0");
    if (!(mw_step_tolerance >= 0.0 && mw_step_tolerance < 1.0)) {
      throw Error(ErrorCode::kInvalidConfig, plant_id + ": mw_step_tolerance must be in [0, 1)");
    }
    if (mw_step_mean_mw > unit_capacity_mw) {
      throw Error(ErrorCode::kInvalidConfig, plant_id + ": mw_step_mean_mw exceeds unit_capacity_mw");
    }
  }

  friend bool operator==(const PlantSignature&, const PlantSignature&) = default;
};

using PlantRegistry = std::vector<PlantSignature>;

inline const PlantSignature* find_plant(const PlantRegistry& registry, const std::string& plant_id) {
  for (const auto& p : registry) {
    if (p.plant_id == plant_id) return &p;
  }
  return nullptr;
}

}  // namespace inertiamon
