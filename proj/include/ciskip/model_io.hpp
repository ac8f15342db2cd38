#pragma once

#include <filesystem>
#include <string>

#include "ciskip/dataset.hpp"
#include "ciskip/tree.hpp"

namespace ciskip {

/// A tree bundled with the schema whose ranges its thresholds live in.
struct TreeModel {
  FeatureSchema schema;
  DecisionTree tree;
};

/// JSON document: schema digest, schema, depth, BFS node list (attribute
/// name + threshold), leaf labels.
std::string model_to_json(const TreeModel& model);
/// Parses and checks the stored digest against the stored schema.
TreeModel model_from_json(const std::string& text);

void save_model(const std::filesystem::path& path, const TreeModel& model);
TreeModel load_model(const std::filesystem::path& path);

/// Throws unless `data` carries the feature names the model was trained on.
void require_same_schema(const TreeModel& model, const FeatureSchema& data);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace ciskip
