#include "dgm/checkpoint.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "dgm/errors.hpp"
#include "json.hpp"

namespace dgm {

using nlohmann::json;

namespace {

std::vector<double> read_array(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_array()) throw ConfigError(std::string("checkpoint: '") + key + "' must be an array");
  std::vector<double> out;
  out.reserve(j.at(key).size());
  for (const json& v : j.at(key)) {
    if (!v.is_number()) throw ConfigError(std::string("checkpoint: '") + key + "' holds a non-numeric entry");
    out.push_back(v.get<double>());
  }
  return out;
}

template <typename T>
T read_field(const json& j, const char* key) {
  if (!j.contains(key)) throw ConfigError(std::string("checkpoint: missing '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("checkpoint: '") + key + "' has the wrong type");
  }
}

}  // namespace

std::string checkpoint_to_json(const Checkpoint& ckpt) {
  const NetworkParams& p = ckpt.params;
  for (double v : p.flat())
    if (!std::isfinite(v)) throw NumericError("checkpoint: refusing to save non-finite parameters");
  json j;
  j["format_version"] = ckpt.version;
  j["problem"] = ckpt.problem;
  j["arch"] = {{"hidden_layers", p.arch.hidden_layers},
               {"units", p.arch.units},
               {"activation", to_string(p.arch.activation)},
               {"input_dim", p.arch.input_dim}};
  j["init_seed"] = p.seed;
  j["iteration"] = ckpt.iteration;
  j["rng_state"] = ckpt.rng_state;
  j["config_hash"] = ckpt.config_hash;
  j["theta1"] = p.theta1;
  j["theta2"] = p.theta2;
  return j.dump(1) + "\n";
}

Checkpoint parse_checkpoint(std::string_view text) {
  json j;
  try {
    j = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("checkpoint: malformed document: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("checkpoint: document must be an object");
  const int version = read_field<int>(j, "format_version");
  if (version != kCheckpointVersion)
    throw ConfigError("checkpoint: format version " + std::to_string(version) + " is not supported (expected " +
                      std::to_string(kCheckpointVersion) + ")");
  Checkpoint c;
  c.version = version;
  c.problem = read_field<std::string>(j, "problem");
  c.iteration = read_field<std::int64_t>(j, "iteration");
  c.rng_state = read_field<std::string>(j, "rng_state");
  c.config_hash = read_field<std::string>(j, "config_hash");
  if (!j.contains("arch") || !j.at("arch").is_object()) throw ConfigError("checkpoint: missing 'arch'");
  const json& a = j.at("arch");
  Architecture arch;
  arch.hidden_layers = read_field<std::size_t>(a, "hidden_layers");
  arch.units = read_field<std::size_t>(a, "units");
  arch.activation = parse_activation(read_field<std::string>(a, "activation"));
  arch.input_dim = read_field<std::size_t>(a, "input_dim");
  arch.validate();
  c.params = NetworkParams(arch);
  c.params.seed = read_field<std::uint64_t>(j, "init_seed");
  std::vector<double> t1 = read_array(j, "theta1");
  std::vector<double> t2 = read_array(j, "theta2");
  if (t1.size() != c.params.theta1.size() || t2.size() != c.params.theta2.size())
    throw ConfigError("checkpoint: theta lengths " + std::to_string(t1.size()) + "/" + std::to_string(t2.size()) +
                      " do not match the architecture (" + std::to_string(c.params.theta1.size()) + "/" +
                      std::to_string(c.params.theta2.size()) + ")");
  c.params.theta1 = std::move(t1);
  c.params.theta2 = std::move(t2);
  return c;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  const std::string text = checkpoint_to_json(ckpt);
  std::ofstream out(path);
  if (!out) throw IoError("cannot write checkpoint '" + path.string() + "'");
  out << text;
  if (!out) throw IoError("failed writing checkpoint '" + path.string() + "'");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read checkpoint '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_checkpoint(buf.str());
}

}  // namespace dgm
