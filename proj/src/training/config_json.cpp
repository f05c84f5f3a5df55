#include "tado/training/config_json.hpp"

#include <string>

#include "tado/errors.hpp"

namespace tado::training {

nlohmann::json to_json(const TrainConfig& c) {
  return {
      {"batch_size", c.batch_size},
      {"classes", c.model.classes},
      {"classifier_l2", c.classifier_l2},
      {"classifier_lr", c.classifier_lr},
      {"decode", decode_tag(c.model.decode)},
      {"dim", c.model.dim},
      {"dropout", c.dropout},
      {"epochs", c.epochs},
      {"exclude_target", c.exclude_target},
      {"hidden", c.model.hidden},
      {"item_len", c.model.item_len},
      {"regression_l2", c.regression_l2},
      {"regression_lr", c.regression_lr},
      {"seed", c.seed},
      {"selection", selection_tag(c.selection)},
      {"shared_projection", c.model.shared_projection},
      {"user_len", c.model.user_len},
      {"validation_fraction", c.validation_fraction},
      {"variant", variant_tag(c.model.variant)},
  };
}

TrainConfig apply_json(TrainConfig c, const nlohmann::json& j) {
  if (!j.is_object()) throw ContractError("config must be a JSON object");
  for (const auto& [key, v] : j.items()) {
    if (key == "batch_size") c.batch_size = config_value<std::size_t>(v, key);
    else if (key == "classes") c.model.classes = config_value<std::size_t>(v, key);
    else if (key == "classifier_l2") c.classifier_l2 = config_value<double>(v, key);
    else if (key == "classifier_lr") c.classifier_lr = config_value<double>(v, key);
    else if (key == "decode") c.model.decode = parse_decode(config_value<std::string>(v, key));
    else if (key == "dim") c.model.dim = config_value<std::size_t>(v, key);
    else if (key == "dropout") c.dropout = config_value<double>(v, key);
    else if (key == "epochs") c.epochs = config_value<std::size_t>(v, key);
    else if (key == "exclude_target") c.exclude_target = config_value<bool>(v, key);
    else if (key == "hidden") c.model.hidden = config_value<std::size_t>(v, key);
    else if (key == "item_len") c.model.item_len = config_value<std::size_t>(v, key);
    else if (key == "regression_l2") c.regression_l2 = config_value<double>(v, key);
    else if (key == "regression_lr") c.regression_lr = config_value<double>(v, key);
    else if (key == "seed") c.seed = config_value<std::uint64_t>(v, key);
    else if (key == "selection") c.selection = parse_selection(config_value<std::string>(v, key));
    else if (key == "shared_projection") c.model.shared_projection = config_value<bool>(v, key);
    else if (key == "user_len") c.model.user_len = config_value<std::size_t>(v, key);
    else if (key == "validation_fraction") c.validation_fraction = config_value<double>(v, key);
    else if (key == "variant") c.model.variant = parse_variant(config_value<std::string>(v, key));
    else throw ContractError("unknown config key '" + key + "'");
  }
  return c;
}

}  // namespace tado::training
