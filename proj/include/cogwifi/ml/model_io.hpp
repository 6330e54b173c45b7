#pragma once

#include <filesystem>
#include <string>
#include <variant>

#include "cogwifi/features.hpp"
#include "cogwifi/ml/forest.hpp"
#include "cogwifi/ml/mlp.hpp"
#include "cogwifi/ml/svr.hpp"

namespace cogwifi::ml {

inline constexpr int kModelFormatVersion = 1;

/// A trained model together with the dataset schema it consumes.
struct StoredModel {
    Schema schema = Schema::Handover;
    std::variant<ForestModel, MlpModel, SvrModel> model;

    std::string algo() const;
};

/// JSON document with format tag, version, schema, hyperparameters,
/// normalisation statistics and parameters. Doubles round-trip exactly.
std::string serialize(const StoredModel& m);
StoredModel deserialize(const std::string& text);

void save_model(const StoredModel& m, const std::filesystem::path& path);
StoredModel load_model(const std::filesystem::path& path);

} // namespace cogwifi::ml
