#include "pdbps/instance_io.hpp"

#include <fstream>

namespace pdbps {

using nlohmann::json;

json instance_to_json(const LoopFreeCmdp& mdp) {
  json doc;
  doc["layers"] = mdp.layers();
  doc["num_actions"] = mdp.num_actions();
  doc["num_constraints"] = mdp.num_constraints();
  json kernel = json::object();
  for (int h = 0; h < mdp.horizon(); ++h) {
    for (int x : mdp.layers()[h]) {
      json per_action = json::object();
      const auto succ = mdp.successors(x);
      for (int a = 0; a < mdp.num_actions(); ++a) {
        json row = json::object();
        const auto probs = mdp.kernel_row(mdp.pair_index(x, a));
        for (int j = 0; j < static_cast<int>(succ.size()); ++j)
          if (probs[j] != 0.0) row[std::to_string(succ[j])] = probs[j];
        per_action[std::to_string(a)] = std::move(row);
      }
      kernel[std::to_string(x)] = std::move(per_action);
    }
  }
  doc["kernel"] = std::move(kernel);
  return doc;
}

LoopFreeCmdp instance_from_json(const json& doc) {
  for (const char* field : {"layers", "num_actions", "num_constraints", "kernel"})
    if (!doc.contains(field))
      throw ValidationError(std::string("instance: missing field '") + field + "'");

  const auto layers = doc.at("layers").get<std::vector<std::vector<int>>>();
  const int num_actions = doc.at("num_actions").get<int>();
  const int num_constraints = doc.at("num_constraints").get<int>();

  // Positions of states inside their successor layer, for the dense rows.
  int num_states = 0;
  for (const auto& layer : layers) num_states += static_cast<int>(layer.size());
  std::vector<int> layer_of(num_states, -1);
  std::vector<int> pos(num_states, -1);
  for (int h = 0; h < static_cast<int>(layers.size()); ++h)
    for (int p = 0; p < static_cast<int>(layers[h].size()); ++p) {
      const int x = layers[h][p];
      if (x < 0 || x >= num_states) throw ValidationError("instance: bad state id in layers");
      layer_of[x] = h;
      pos[x] = p;
    }

  std::vector<std::vector<double>> kernel;
  const auto& kdoc = doc.at("kernel");
  for (int h = 0; h + 1 < static_cast<int>(layers.size()); ++h) {
    for (int x : layers[h]) {
      const auto xs = kdoc.find(std::to_string(x));
      if (xs == kdoc.end())
        throw ValidationError("instance: kernel missing state " + std::to_string(x));
      for (int a = 0; a < num_actions; ++a) {
        const auto as = xs->find(std::to_string(a));
        if (as == xs->end())
          throw ValidationError("instance: kernel missing action " + std::to_string(a) +
                                " at state " + std::to_string(x));
        std::vector<double> row(layers[h + 1].size(), 0.0);
        for (const auto& [key, value] : as->items()) {
          const int xp = std::stoi(key);
          if (xp < 0 || xp >= num_states || layer_of[xp] != h + 1)
            throw ValidationError("instance: kernel successor " + key +
                                  " is not in layer " + std::to_string(h + 1));
          row[pos[xp]] = value.get<double>();
        }
        kernel.push_back(std::move(row));
      }
    }
  }
  return LoopFreeCmdp(layers, num_actions, std::move(kernel), num_constraints);
}

void save_instance(const LoopFreeCmdp& mdp, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw StructuralError("instance: cannot open " + path + " for writing");
  out << instance_to_json(mdp).dump(2) << '\n';
}

LoopFreeCmdp load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw StructuralError("instance: cannot open " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ValidationError("instance: malformed JSON in " + path + ": " + e.what());
  }
  return instance_from_json(doc);
}

}  // namespace pdbps
