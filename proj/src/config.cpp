#include "dgm/config.hpp"

#include <fstream>
#include <initializer_list>
#include <sstream>

#include "dgm/errors.hpp"
#include "json.hpp"

namespace dgm {

using nlohmann::json;

namespace {

// Reads one JSON object, tracking the dotted path for error messages and
// rejecting keys nobody asked for.
class Section {
 public:
  Section(const json& j, std::string path, std::initializer_list<std::string_view> keys) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + " must be an object");
    for (const auto& [key, value] : j_.items()) {
      bool known = false;
      for (std::string_view k : keys) known = known || key == k;
      if (!known) throw ConfigError("unknown key '" + qualified(key) + "'");
    }
  }

  bool has(const std::string& key) const { return j_.contains(key) && !j_.at(key).is_null(); }
  const json& at(const std::string& key) const { return j_.at(key); }
  std::string qualified(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  template <typename T>
  void read(const std::string& key, T& out) const {
    if (!has(key)) return;
    const json& v = j_.at(key);
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw ConfigError(qualified(key) + " must be a boolean");
      out = v.get<bool>();
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) throw ConfigError(qualified(key) + " must be an integer");
      if (std::is_unsigned_v<T> && v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0)
        throw ConfigError(qualified(key) + " must be non-negative");
      out = v.get<T>();
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) throw ConfigError(qualified(key) + " must be a number");
      out = v.get<T>();
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw ConfigError(qualified(key) + " must be a string");
      out = v.get<std::string>();
    } else {
      if (!v.is_array()) throw ConfigError(qualified(key) + " must be an array");
      out.clear();
      for (const json& e : v) {
        if (!e.is_number_unsigned()) throw ConfigError(qualified(key) + " must hold non-negative integers");
        out.push_back(e.get<typename T::value_type>());
      }
    }
  }

  void read(const std::string& key, std::optional<double>& out) const {
    if (!has(key)) return;
    double v = 0.0;
    read(key, v);
    out = v;
  }

 private:
  std::string where() const { return path_.empty() ? "configuration" : "'" + path_ + "'"; }
  const json& j_;
  std::string path_;
};

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::string_view to_string(SamplingMode mode) { return mode == SamplingMode::fixed ? "fixed" : "fresh"; }

SamplingMode parse_sampling(const std::string& name) {
  if (name == "fixed") return SamplingMode::fixed;
  if (name == "fresh") return SamplingMode::fresh;
  throw ConfigError("train.sampling must be 'fixed' or 'fresh', got '" + name + "'");
}

json to_json_document(const ExperimentConfig& c, bool with_output_dir) {
  const TrainConfig& t = c.train;
  json j;
  j["problem"] = c.problem;
  j["alpha"] = optional_json(c.alpha);
  j["nu"] = optional_json(c.nu);
  j["arch"] = {{"hidden_layers", c.hidden_layers}, {"units", c.units}, {"activation", to_string(c.activation)}};
  j["dataset"] = {{"total", c.dataset.total},
                  {"boundary_fraction", c.dataset.boundary_fraction},
                  {"seed", c.dataset.seed}};
  j["train"] = {{"max_iterations", t.max_iterations},
                {"optimizer", to_string(t.optimizer)},
                {"lr0", t.lr0},
                {"lr_decay", optional_json(t.lr_decay)},
                {"interior_batch", t.interior_batch},
                {"boundary_batch", t.boundary_batch},
                {"grad_norm_tolerance", t.grad_norm_tolerance},
                {"grad_norm_window", t.grad_norm_window},
                {"eval_every", t.eval_every},
                {"seed", t.seed},
                {"sampling", to_string(t.sampling)},
                {"weights",
                 {{"residual", t.weights.residual},
                  {"divergence", t.weights.divergence},
                  {"boundary", t.weights.boundary}}},
                {"adam", {{"beta1", t.adam.beta1}, {"beta2", t.adam.beta2}, {"eps", t.adam.eps}}}};
  j["eval"] = {{"resolution", t.eval_resolution}, {"slice", t.eval_slice}};
  j["matrix"] = {{"archs", c.matrix.archs},
                 {"dataset_totals", c.matrix.dataset_totals},
                 {"master_seed", c.matrix.master_seed},
                 {"jobs", c.matrix.jobs}};
  j["cavity"] = {{"widths", c.cavity.widths},
                 {"test_points", c.cavity.test_points},
                 {"divergence_grid", c.cavity.divergence_grid}};
  if (with_output_dir) j["output_dir"] = c.output_dir;
  j["deterministic"] = t.deterministic;
  return j;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (!is_known_problem(problem)) throw ConfigError("unknown problem '" + problem + "'");
  if (nu && !(*nu > 0.0)) throw ConfigError("nu must be positive");
  if (alpha && !(*alpha >= 0.0)) throw ConfigError("alpha must be non-negative");
  architecture().validate();
  if (dataset.total < 2) throw ConfigError("dataset.total must be at least 2");
  if (!(dataset.boundary_fraction > 0.0 && dataset.boundary_fraction < 1.0))
    throw ConfigError("dataset.boundary_fraction must lie in (0, 1)");
  train.validate();
  const std::size_t nb = boundary_count(dataset.total, dataset.boundary_fraction);
  const std::size_t ni = dataset.total - nb;
  if (ni == 0) throw ConfigError("dataset has no interior points");
  if (train.sampling == SamplingMode::fixed && (train.interior_batch > ni || train.boundary_batch > nb))
    throw ConfigError("batch sizes exceed the dataset (" + std::to_string(ni) + " interior, " + std::to_string(nb) +
                      " boundary points)");
  if (train.eval_resolution < 2) throw ConfigError("eval.resolution must be at least 2");
  if (!(train.eval_slice >= 0.0 && train.eval_slice <= 1.0)) throw ConfigError("eval.slice must lie in [0, 1]");
  if (matrix.archs.empty() || matrix.dataset_totals.empty()) throw ConfigError("matrix lists must not be empty");
  for (std::size_t k : matrix.archs)
    if (k == 0) throw ConfigError("matrix.archs entries must be positive");
  for (std::size_t n : matrix.dataset_totals)
    if (n < 2) throw ConfigError("matrix.dataset_totals entries must be at least 2");
  if (matrix.jobs == 0) throw ConfigError("matrix.jobs must be positive");
  if (cavity.widths.empty()) throw ConfigError("cavity.widths must not be empty");
  for (std::size_t w : cavity.widths)
    if (w == 0) throw ConfigError("cavity.widths entries must be positive");
  if (cavity.test_points == 0 || cavity.divergence_grid == 0)
    throw ConfigError("cavity.test_points and cavity.divergence_grid must be positive");
  if (output_dir.empty()) throw ConfigError("output_dir must not be empty");
}

StokesProblem ExperimentConfig::make_problem() const { return dgm::make_problem(problem, alpha, nu); }

Architecture ExperimentConfig::architecture() const {
  Architecture a;
  a.hidden_layers = hidden_layers;
  a.units = units;
  a.activation = activation;
  a.input_dim = dim();
  return a;
}

std::size_t ExperimentConfig::dim() const { return problem.ends_with("3d") ? 3 : 2; }

ExperimentConfig parse_config(std::string_view text) {
  json root;
  try {
    root = json::parse(text.begin(), text.end(), nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed configuration: ") + e.what());
  }
  ExperimentConfig c;
  TrainConfig& t = c.train;
  const Section top(root, "",
                    {"problem", "alpha", "nu", "arch", "dataset", "train", "eval", "matrix", "cavity", "output_dir",
                     "deterministic"});
  top.read("problem", c.problem);
  top.read("alpha", c.alpha);
  top.read("nu", c.nu);
  top.read("output_dir", c.output_dir);
  top.read("deterministic", t.deterministic);
  if (top.has("arch")) {
    const Section s(top.at("arch"), "arch", {"hidden_layers", "units", "activation"});
    s.read("hidden_layers", c.hidden_layers);
    s.read("units", c.units);
    std::string act(to_string(c.activation));
    s.read("activation", act);
    c.activation = parse_activation(act);
  }
  if (top.has("dataset")) {
    const Section s(top.at("dataset"), "dataset", {"total", "boundary_fraction", "seed"});
    s.read("total", c.dataset.total);
    s.read("boundary_fraction", c.dataset.boundary_fraction);
    s.read("seed", c.dataset.seed);
  }
  if (top.has("train")) {
    const Section s(top.at("train"), "train",
                    {"max_iterations", "optimizer", "lr0", "lr_decay", "interior_batch", "boundary_batch",
                     "grad_norm_tolerance", "grad_norm_window", "eval_every", "seed", "sampling", "weights", "adam"});
    s.read("max_iterations", t.max_iterations);
    std::string opt(to_string(t.optimizer));
    s.read("optimizer", opt);
    t.optimizer = parse_optimizer(opt);
    s.read("lr0", t.lr0);
    s.read("lr_decay", t.lr_decay);
    s.read("interior_batch", t.interior_batch);
    s.read("boundary_batch", t.boundary_batch);
    s.read("grad_norm_tolerance", t.grad_norm_tolerance);
    s.read("grad_norm_window", t.grad_norm_window);
    s.read("eval_every", t.eval_every);
    s.read("seed", t.seed);
    std::string sampling(to_string(t.sampling));
    s.read("sampling", sampling);
    t.sampling = parse_sampling(sampling);
    if (s.has("weights")) {
      const Section w(s.at("weights"), "train.weights", {"residual", "divergence", "boundary"});
      w.read("residual", t.weights.residual);
      w.read("divergence", t.weights.divergence);
      w.read("boundary", t.weights.boundary);
    }
    if (s.has("adam")) {
      const Section a(s.at("adam"), "train.adam", {"beta1", "beta2", "eps"});
      a.read("beta1", t.adam.beta1);
      a.read("beta2", t.adam.beta2);
      a.read("eps", t.adam.eps);
    }
  }
  if (top.has("eval")) {
    const Section s(top.at("eval"), "eval", {"resolution", "slice"});
    s.read("resolution", t.eval_resolution);
    s.read("slice", t.eval_slice);
  }
  if (top.has("matrix")) {
    const Section s(top.at("matrix"), "matrix", {"archs", "dataset_totals", "master_seed", "jobs"});
    s.read("archs", c.matrix.archs);
    s.read("dataset_totals", c.matrix.dataset_totals);
    s.read("master_seed", c.matrix.master_seed);
    s.read("jobs", c.matrix.jobs);
  }
  if (top.has("cavity")) {
    const Section s(top.at("cavity"), "cavity", {"widths", "test_points", "divergence_grid"});
    s.read("widths", c.cavity.widths);
    s.read("test_points", c.cavity.test_points);
    s.read("divergence_grid", c.cavity.divergence_grid);
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read configuration file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string config_to_json(const ExperimentConfig& config) { return to_json_document(config, true).dump(2) + "\n"; }

void save_config(const ExperimentConfig& config, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write configuration file '" + path.string() + "'");
  out << config_to_json(config);
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::string config_hash(const ExperimentConfig& config) {
  const std::string text = to_json_document(config, false).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << h;
  return os.str();
}

std::size_t dataset_family_size(std::size_t dim, std::size_t k) {
  if (k < 1 || k > 4) throw ConfigError("dataset family index must be 1..4, got " + std::to_string(k));
  if (dim != 2 && dim != 3) throw DimensionError("dataset families exist for d = 2 and 3 only");
  const std::size_t base = dim == 2 ? 1000 : 1200;
  return base << (k - 1);
}

}  // namespace dgm
