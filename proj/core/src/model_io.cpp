#include <fstream>

#include <nlohmann/json.hpp>

#include "citcp/errors.hpp"
#include "citcp/sl_rankers.hpp"

namespace citcp {

namespace {

using nlohmann::json;

json tree_to_json(const RegressionTree& tree) {
  json nodes = json::array();
  for (const auto& n : tree.nodes) {
    nodes.push_back(json{{"f", n.feature},
                         {"t", n.threshold},
                         {"v", n.value},
                         {"l", n.left},
                         {"r", n.right}});
  }
  return nodes;
}

RegressionTree tree_from_json(const json& j) {
  RegressionTree tree;
  for (const auto& n : j) {
    TreeNode node;
    node.feature = n.at("f").get<int>();
    node.threshold = n.at("t").get<double>();
    node.value = n.at("v").get<double>();
    node.left = n.at("l").get<int>();
    node.right = n.at("r").get<int>();
    tree.nodes.push_back(node);
  }
  return tree;
}

}  // namespace

void save_model(const RankerModel& model, std::ostream& out) {
  json state;
  if (const auto* t = std::get_if<TreeEnsemble>(&model.state)) {
    json trees = json::array();
    for (const auto& tree : t->trees) trees.push_back(tree_to_json(tree));
    state = json{{"variant", "tree_ensemble"},
                 {"base_score", t->base_score},
                 {"shrinkage", t->shrinkage},
                 {"trees", std::move(trees)}};
  } else if (const auto* b = std::get_if<BoostedThresholds>(&model.state)) {
    json rankers = json::array();
    for (const auto& r : b->rankers) {
      rankers.push_back(json{{"feature", r.feature},
                             {"threshold", r.threshold},
                             {"greater", r.greater},
                             {"alpha", r.alpha}});
    }
    state = json{{"variant", "boosted_thresholds"}, {"rankers", std::move(rankers)}};
  } else if (const auto* n = std::get_if<NetworkParams>(&model.state)) {
    state = json{{"variant", "network"},
                 {"layer_sizes", n->net.layer_sizes()},
                 {"params", n->net.params()},
                 {"feat_mean", n->feat_mean},
                 {"feat_scale", n->feat_scale},
                 {"epochs_trained", n->epochs_trained}};
  } else {
    const auto& l = std::get<LinearWeights>(model.state);
    state = json{{"variant", "linear"},
                 {"w", l.w},
                 {"feat_mean", l.feat_mean},
                 {"feat_scale", l.feat_scale}};
  }

  json config = json::object();
  for (const auto& [k, v] : model.config_echo) config[k] = v;
  const json j{{"kind", model.kind},
               {"feature_width", model.feature_width},
               {"config", std::move(config)},
               {"state", std::move(state)}};
  out << j.dump(2) << '\n';
}

void save_model(const RankerModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError(path + ": cannot open file for writing");
  save_model(model, out);
  if (!out) throw DataError(path + ": write failed");
}

RankerModel load_model(std::istream& in, const std::string& source_name) {
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw DataError(source_name + ": model file is not valid JSON: " + e.what());
  }
  try {
    RankerModel model;
    model.kind = j.at("kind").get<std::string>();
    model.feature_width = j.at("feature_width").get<std::size_t>();
    for (const auto& [k, v] : j.at("config").items())
      model.config_echo.emplace_back(k, v.get<std::string>());

    const json& state = j.at("state");
    const std::string variant = state.at("variant").get<std::string>();
    if (variant == "tree_ensemble") {
      TreeEnsemble ens;
      ens.base_score = state.at("base_score").get<double>();
      ens.shrinkage = state.at("shrinkage").get<double>();
      for (const auto& t : state.at("trees")) ens.trees.push_back(tree_from_json(t));
      model.state = std::move(ens);
    } else if (variant == "boosted_thresholds") {
      BoostedThresholds b;
      for (const auto& r : state.at("rankers")) {
        ThresholdRanker weak;
        weak.feature = r.at("feature").get<int>();
        weak.threshold = r.at("threshold").get<double>();
        weak.greater = r.at("greater").get<bool>();
        weak.alpha = r.at("alpha").get<double>();
        b.rankers.push_back(weak);
      }
      model.state = std::move(b);
    } else if (variant == "network") {
      NetworkParams n;
      n.net = Mlp(state.at("layer_sizes").get<std::vector<int>>(), 0);
      n.net.params() = state.at("params").get<std::vector<double>>();
      n.feat_mean = state.at("feat_mean").get<std::vector<double>>();
      n.feat_scale = state.at("feat_scale").get<std::vector<double>>();
      n.epochs_trained = state.at("epochs_trained").get<std::int64_t>();
      model.state = std::move(n);
    } else if (variant == "linear") {
      LinearWeights l;
      l.w = state.at("w").get<std::vector<double>>();
      l.feat_mean = state.at("feat_mean").get<std::vector<double>>();
      l.feat_scale = state.at("feat_scale").get<std::vector<double>>();
      model.state = std::move(l);
    } else {
      throw DataError(source_name + ": unknown model variant '" + variant + "'");
    }
    return model;
  } catch (const json::exception& e) {
    throw DataError(source_name + ": model file is missing fields: " + e.what());
  }
}

RankerModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError(path + ": cannot open file");
  return load_model(in, path);
}

}  // namespace citcp
