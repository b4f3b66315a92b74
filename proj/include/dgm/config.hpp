#pragma once

// Experiment configuration: one JSON document per run. Every key is optional;
// missing keys take the defaults below, unknown keys are rejected.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dgm/network.hpp"
#include "dgm/problem.hpp"
#include "dgm/trainer.hpp"

namespace dgm {

struct DatasetConfig {
  std::size_t total = 2000;
  double boundary_fraction = 0.2;
  std::uint64_t seed = 1;
};

/// Experiment-matrix settings: every listed ARCH-k is crossed with every dataset size.
struct MatrixConfig {
  std::vector<std::size_t> archs{1, 2, 3};
  std::vector<std::size_t> dataset_totals{1000, 2000, 4000, 8000};
  std::uint64_t master_seed = 7;
  std::size_t jobs = 1;
};

/// Lid-driven cavity study settings.
struct CavityConfig {
  std::vector<std::size_t> widths{4, 8, 12, 16};
  std::size_t test_points = 1600;   // velocity dump size, and lid samples for the mismatch metric
  std::size_t divergence_grid = 101;
};

struct ExperimentConfig {
  std::string problem = "stokes2d";
  std::optional<double> alpha;  // overrides the problem default
  std::optional<double> nu;
  std::size_t hidden_layers = 2;
  std::size_t units = 16;
  Activation activation = Activation::tanh;
  DatasetConfig dataset;
  TrainConfig train;
  MatrixConfig matrix;
  CavityConfig cavity;
  std::string output_dir = "runs/default";

  /// Throws ConfigError naming the offending field.
  void validate() const;
  StokesProblem make_problem() const;
  Architecture architecture() const;
  std::size_t dim() const;
};

/// Parses a JSON document. Throws ConfigError on malformed text, wrong types,
/// unknown keys or invalid values.
ExperimentConfig parse_config(std::string_view text);
/// Reads and parses a file. Throws IoError when it cannot be read.
ExperimentConfig load_config(const std::filesystem::path& path);

/// Fully resolved configuration (every field present), pretty-printed.
std::string config_to_json(const ExperimentConfig& config);
void save_config(const ExperimentConfig& config, const std::filesystem::path& path);

/// 64-bit FNV-1a over the resolved document without output_dir, as 16 hex digits.
std::string config_hash(const ExperimentConfig& config);

/// Dataset sizes of the DS-1..4 families: 1000/2000/4000/8000 in 2D, 1200/2400/4800/9600 in 3D.
std::size_t dataset_family_size(std::size_t dim, std::size_t k);

}  // namespace dgm
