#include "ciskip/model_io.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace ciskip {

using nlohmann::json;

std::string model_to_json(const TreeModel& model) {
  json nodes = json::array();
  for (const auto& node : model.tree.nodes())
    nodes.push_back({{"attribute", model.schema[node.attribute].name}, {"threshold", node.threshold}});
  json leaves = json::array();
  for (auto l : model.tree.leaf_labels()) leaves.push_back(to_string(l));
  json doc = {
      {"schema_digest", model.schema.digest()},
      {"schema", json::parse(schema_to_json(model.schema))},
      {"depth", model.tree.depth()},
      {"nodes", nodes},
      {"leaf_labels", leaves},
  };
  return doc.dump(2) + "\n";
}

TreeModel model_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(std::string("model file is not valid JSON: ") + e.what());
  }
  TreeModel model;
  model.schema = schema_from_json(doc.at("schema").dump());
  if (doc.at("schema_digest").get<std::string>() != model.schema.digest())
    throw Error("model file schema digest does not match its schema");
  std::vector<TreeNode> nodes;
  for (const auto& n : doc.at("nodes")) {
    const auto name = n.at("attribute").get<std::string>();
    auto k = model.schema.index_of(name);
    if (!k) throw Error("model node references unknown feature '" + name + "'");
    nodes.push_back({*k, n.at("threshold").get<double>()});
  }
  std::vector<Label> leaves;
  for (const auto& l : doc.at("leaf_labels")) {
    const auto s = l.get<std::string>();
    if (s == "Skip") leaves.push_back(Label::Skip);
    else if (s == "Build") leaves.push_back(Label::Build);
    else throw Error("unknown leaf label '" + s + "'");
  }
  model.tree = DecisionTree(doc.at("depth").get<int>(), std::move(nodes), std::move(leaves));
  return model;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << text;
}

void save_model(const std::filesystem::path& path, const TreeModel& model) {
  write_text(path, model_to_json(model));
}

TreeModel load_model(const std::filesystem::path& path) { return model_from_json(read_text(path)); }

void require_same_schema(const TreeModel& model, const FeatureSchema& data) {
  if (model.schema.digest() != data.digest())
    throw Error("schema digest mismatch: model " + model.schema.digest() + ", data " + data.digest());
}

}  // namespace ciskip
