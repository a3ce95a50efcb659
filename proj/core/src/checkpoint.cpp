#include "tpinn/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "tpinn/error.hpp"

namespace tpinn {

using nlohmann::json;

namespace {

json affine_json(const train::AffineMap& m) { return {{"shift", m.shift}, {"scale", m.scale}}; }

train::AffineMap affine_from(const json& j) { return {j.at("shift").get<double>(), j.at("scale").get<double>()}; }

}  // namespace

std::string checkpoint_to_json(const Checkpoint& ckpt) {
  const auto& m = ckpt.model;
  json j;
  j["dims"] = std::vector<std::size_t>(m.net.dims().begin(), m.net.dims().end());
  j["activation"] = std::string(activation_name(m.net.activation().kind));
  j["leaky_slope"] = m.net.activation().leaky_slope;
  j["elu_alpha"] = m.net.activation().elu_alpha;
  j["params"] = m.net.get_params();
  j["seed"] = ckpt.seed;
  j["c"] = m.c;
  j["map"] = std::string(train::map_name(m.map));
  j["normalization"] = {{"x", affine_json(m.norm.x)}, {"t", affine_json(m.norm.t)}, {"y", affine_json(m.norm.y)}};
  return j.dump(2) + "\n";
}

Checkpoint checkpoint_from_json(std::string_view text) {
  try {
    const json j = json::parse(text);
    const auto dims = j.at("dims").get<std::vector<std::size_t>>();
    Activation act{parse_activation(j.at("activation").get<std::string>())};
    if (j.contains("leaky_slope")) act.leaky_slope = j["leaky_slope"].get<double>();
    if (j.contains("elu_alpha")) act.elu_alpha = j["elu_alpha"].get<double>();
    Checkpoint ck;
    ck.model.net = Mlp::zeros(dims, act);
    ck.model.net.set_params(j.at("params").get<std::vector<double>>());
    ck.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("c")) ck.model.c = j["c"].get<double>();
    if (j.contains("map")) ck.model.map = train::parse_map(j["map"].get<std::string>());
    if (j.contains("normalization")) {
      const json& n = j["normalization"];
      ck.model.norm = {affine_from(n.at("x")), affine_from(n.at("t")), affine_from(n.at("y"))};
    }
    return ck;
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed checkpoint: ") + e.what());
  } catch (const Error& e) {
    throw FormatError(std::string("invalid checkpoint: ") + e.what());
  }
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << checkpoint_to_json(ckpt);
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return checkpoint_from_json(ss.str());
}

}  // namespace tpinn
