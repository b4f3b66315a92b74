#pragma once

// Experiment drivers behind the command-line tool: single training runs, the
// architecture x dataset matrix, and the lid-driven cavity study. Each run
// writes its artifacts under the configured output directory.

#include <atomic>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dgm/config.hpp"
#include "dgm/metrics.hpp"
#include "dgm/trainer.hpp"

namespace dgm {

struct RunOptions {
  std::ostream* log = nullptr;                // progress and summary lines; null for silence
  const std::atomic<bool>* stop = nullptr;    // cooperative cancellation
  bool echo_records = false;                  // print every history record
};

/// Artifact names inside a run directory.
namespace artifacts {
inline constexpr const char* config = "config.json";
inline constexpr const char* history = "history.csv";
inline constexpr const char* checkpoint = "checkpoint.json";
inline constexpr const char* eval_grid = "eval_grid.csv";
inline constexpr const char* dataset = "dataset.csv";
}  // namespace artifacts

struct RunOutcome {
  std::filesystem::path directory;
  TrainHistory history;
  HistoryRecord final_record;
  std::string config_hash;
};

/// Trains one configuration and writes config.json, dataset.csv, history.csv,
/// checkpoint.json and eval_grid.csv. A diverged run still writes everything,
/// with the last finite parameters in the checkpoint.
RunOutcome run_train(const ExperimentConfig& config, const RunOptions& options = {});

struct MatrixRow {
  std::size_t arch = 0;           // ARCH-k
  std::size_t dataset_total = 0;  // points in the dataset
  bool ok = false;
  double err_l1 = 0.0;
  double err_l2 = 0.0;
  double objective = 0.0;
  TerminationReason reason = TerminationReason::max_iters;
  std::string message;  // failure description when !ok
};

/// The configuration a matrix cell runs: ARCH-k, the given dataset size, seeds
/// derived from the master seed and the cell index, and its own subdirectory.
ExperimentConfig matrix_cell_config(const ExperimentConfig& base, std::size_t arch, std::size_t dataset_total,
                                    std::size_t cell_index);

/// Runs every (arch, dataset) cell, row-major over archs, up to matrix.jobs at a
/// time. A failing cell is reported, never propagated. Writes matrix.csv and
/// matrix.txt next to the cell directories.
std::vector<MatrixRow> run_matrix(const ExperimentConfig& config, const RunOptions& options = {});

/// Fixed-width text table; failed cells show "-".
std::string format_matrix(const std::vector<MatrixRow>& rows);

struct CavityMetrics {
  double lid_mismatch = 0.0;         // mean |U - lid velocity|^2 on the open lid face
  double mean_sq_divergence = 0.0;   // mean (div U)^2 on a cell-centred interior grid
  double u_near_lid = 0.0;           // U1 at (0.5, .., 0.95)
  double u_near_bottom = 0.0;        // U1 at (0.5, .., 0.1)
  bool single_vortex() const { return u_near_lid > 0.0 && u_near_bottom < 0.0; }
};

/// Lid samples are midpoints of a regular partition of the lid face with
/// `lid_points` cells (rounded up to a square in 3D). The divergence grid has
/// `grid` nodes per axis; in 3D it is the x3 = 0.5 plane.
CavityMetrics cavity_metrics(const NetworkParams& params, const StokesProblem& problem, std::size_t lid_points,
                             std::size_t grid);

struct CavityRow {
  std::size_t width = 0;
  bool ok = false;
  LossBreakdown loss;
  CavityMetrics metrics;
  std::string message;
};

/// Trains the configured architecture once per width in cavity.widths, then
/// dumps velocity fields (a 2D grid of cavity.test_points nodes, or one mid-plane
/// slice per axis in 3D) and writes cavity.csv.
std::vector<CavityRow> run_cavity(const ExperimentConfig& config, const RunOptions& options = {});

/// Velocity/pressure grid for a saved checkpoint; exact columns when available.
EvalGrid run_eval(const std::filesystem::path& checkpoint, const StokesProblem& problem, const GridSpec& spec);

}  // namespace dgm
