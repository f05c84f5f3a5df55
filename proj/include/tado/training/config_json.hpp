#pragma once

#include <string>
#include <type_traits>

#include "json.hpp"
#include "tado/errors.hpp"
#include "tado/training/trainer.hpp"

namespace tado::training {

/// Typed read of one config value; ContractError on a type mismatch.
template <class T>
T config_value(const nlohmann::json& v, const std::string& key) {
  if constexpr (std::is_same_v<T, bool>) {
    if (!v.is_boolean()) throw ContractError("config key '" + key + "' must be a boolean");
  } else if constexpr (std::is_integral_v<T>) {
    if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<long long>() < 0)) {
      throw ContractError("config key '" + key + "' must be a non-negative integer");
    }
  } else if constexpr (std::is_floating_point_v<T>) {
    if (!v.is_number()) throw ContractError("config key '" + key + "' must be a number");
  } else {
    if (!v.is_string()) throw ContractError("config key '" + key + "' must be a string");
  }
  return v.get<T>();
}

/// Flat object with every TrainConfig and ModelConfig field; enums as tags.
nlohmann::json to_json(const TrainConfig& config);

/// Overlays the keys of `j` onto `base`. ContractError on an unknown key,
/// a wrong value type or an unknown tag.
TrainConfig apply_json(TrainConfig base, const nlohmann::json& j);

}  // namespace tado::training
