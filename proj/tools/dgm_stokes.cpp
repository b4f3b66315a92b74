// Command-line front end: train, matrix, cavity, eval, verify, sample.
//
// Exit codes: 0 success, 2 usage/configuration error, 3 numeric failure
// (divergence or a failed oracle), 4 I/O failure.

#include <atomic>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "dgm/checkpoint.hpp"
#include "dgm/config.hpp"
#include "dgm/csv_io.hpp"
#include "dgm/errors.hpp"
#include "dgm/experiment.hpp"
#include "dgm/kernels.hpp"
#include "dgm/verifier.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitIo = 4;

std::atomic<bool> g_stop{false};

extern "C" void on_sigint(int) { g_stop.store(true); }

struct Overrides {
  std::string config_path;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::string optimizer;
  bool deterministic = false;
  std::optional<std::size_t> arch;
  std::optional<std::size_t> dataset_size;
  std::optional<std::int64_t> iterations;
  std::string problem;
  bool verbose = false;
};

void add_common(CLI::App* app, Overrides& o) {
  app->add_option("--config", o.config_path, "JSON configuration file (defaults apply to missing keys)");
  app->add_option("--out", o.out, "Output directory (overrides output_dir)");
  app->add_option("--seed", o.seed, "Seed for the dataset, the initialization and the matrix cells");
  app->add_option("--optimizer", o.optimizer, "sgd or adam")->check(CLI::IsMember({"sgd", "adam"}));
  app->add_flag("--deterministic", o.deterministic, "Write wall_ms as 0 so histories are byte-identical");
  app->add_option("--arch", o.arch, "ARCH-k: number of hidden layers of 16 units");
  app->add_option("--dataset-size", o.dataset_size, "Total collocation points (interior + boundary)");
  app->add_option("--iterations", o.iterations, "Maximum training iterations");
  app->add_option("--problem", o.problem,
                  "stokes2d, stokes3d, general_stokes2d, general_stokes3d, cavity2d or cavity3d");
  app->add_flag("-v,--verbose", o.verbose, "Print every history record");
}

dgm::ExperimentConfig resolve(const Overrides& o) {
  // A config path that does not exist is a usage mistake, not an I/O failure.
  if (!o.config_path.empty() && !std::filesystem::exists(o.config_path))
    throw dgm::ConfigError("configuration file '" + o.config_path + "' does not exist");
  dgm::ExperimentConfig c = o.config_path.empty() ? dgm::ExperimentConfig{} : dgm::load_config(o.config_path);
  if (!o.problem.empty()) c.problem = o.problem;
  if (!o.out.empty()) c.output_dir = o.out;
  if (o.seed) {
    c.dataset.seed = *o.seed;
    c.train.seed = *o.seed;
    c.matrix.master_seed = *o.seed;
  }
  if (!o.optimizer.empty()) c.train.optimizer = dgm::parse_optimizer(o.optimizer);
  if (o.deterministic) c.train.deterministic = true;
  if (o.arch) c.hidden_layers = *o.arch;
  if (o.dataset_size) c.dataset.total = *o.dataset_size;
  if (o.iterations) c.train.max_iterations = *o.iterations;
  c.validate();
  return c;
}

dgm::RunOptions run_options(const Overrides& o) {
  dgm::RunOptions r;
  r.log = &std::cout;
  r.stop = &g_stop;
  r.echo_records = o.verbose;
  return r;
}

std::string default_config_text() {
  dgm::ExperimentConfig c;
  return dgm::config_to_json(c);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deep Galerkin solver for the general Stokes equations"};
  app.require_subcommand(1);
  app.footer("Default configuration (see also configs/reference.json):\n" + default_config_text() +
             "\nExit codes: 0 success, 2 usage, 3 numeric failure, 4 I/O failure.");
  std::string kernels = "auto";
  app.add_option("--kernels", kernels, "Kernel set: auto, scalar or avx2")->check(CLI::IsMember({"auto", "scalar", "avx2"}));

  Overrides train_o, matrix_o, cavity_o, sample_o, eval_o;
  CLI::App* train_cmd = app.add_subcommand("train", "Train one configuration and write its artifacts");
  add_common(train_cmd, train_o);
  CLI::App* matrix_cmd = app.add_subcommand("matrix", "Run the architecture x dataset-size matrix");
  add_common(matrix_cmd, matrix_o);
  std::optional<std::size_t> jobs;
  matrix_cmd->add_option("--jobs", jobs, "Cells trained concurrently");
  CLI::App* cavity_cmd = app.add_subcommand("cavity", "Lid-driven cavity width study");
  add_common(cavity_cmd, cavity_o);
  CLI::App* sample_cmd = app.add_subcommand("sample", "Write the collocation dataset as CSV");
  add_common(sample_cmd, sample_o);

  CLI::App* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint on a uniform grid");
  add_common(eval_cmd, eval_o);
  std::string checkpoint_path;
  std::optional<std::size_t> resolution;
  std::optional<double> slice;
  eval_cmd->add_option("--checkpoint", checkpoint_path, "Checkpoint written by train")->required();
  eval_cmd->add_option("--resolution", resolution, "Grid nodes per axis");
  eval_cmd->add_option("--slice", slice, "Value of the fixed last coordinate in 3D");

  CLI::App* verify_cmd = app.add_subcommand("verify", "Run the derivative and consistency oracle suite");
  dgm::OracleSuiteOptions suite;
  verify_cmd->add_option("--draws", suite.derivative_draws, "Random derivative-check draws");
  verify_cmd->add_option("--configs", suite.unbiasedness_configs, "Unbiasedness configurations");
  verify_cmd->add_option("--points", suite.manufactured_points, "Manufactured-solution check points");
  verify_cmd->add_option("--seed", suite.seed, "Suite seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  std::signal(SIGINT, on_sigint);
  try {
    if (!dgm::kernels::select(kernels))
      throw dgm::ConfigError("kernel set '" + kernels + "' is not available on this machine");

    if (*train_cmd) {
      const dgm::ExperimentConfig c = resolve(train_o);
      const dgm::RunOutcome out = dgm::run_train(c, run_options(train_o));
      if (out.history.reason == dgm::TerminationReason::diverged) {
        std::cerr << "error: training diverged; last finite parameters saved in " << out.directory.string() << "\n";
        return kExitNumeric;
      }
      return kExitOk;
    }
    if (*matrix_cmd) {
      dgm::ExperimentConfig c = resolve(matrix_o);
      if (jobs) c.matrix.jobs = *jobs;
      if (matrix_o.arch) c.matrix.archs = {*matrix_o.arch};
      if (matrix_o.dataset_size) c.matrix.dataset_totals = {*matrix_o.dataset_size};
      c.validate();
      const auto rows = dgm::run_matrix(c, run_options(matrix_o));
      for (const auto& r : rows)
        if (!r.ok) return kExitNumeric;
      return kExitOk;
    }
    if (*cavity_cmd) {
      dgm::ExperimentConfig c = resolve(cavity_o);
      const auto rows = dgm::run_cavity(c, run_options(cavity_o));
      for (const auto& r : rows)
        if (!r.ok) return kExitNumeric;
      return kExitOk;
    }
    if (*sample_cmd) {
      const dgm::ExperimentConfig c = resolve(sample_o);
      const dgm::Dataset ds = dgm::sample_dataset(c.dim(), c.dataset.total, c.dataset.boundary_fraction, c.dataset.seed);
      std::filesystem::create_directories(c.output_dir);
      const auto path = std::filesystem::path(c.output_dir) / dgm::artifacts::dataset;
      dgm::write_text_file(path, dgm::dataset_csv(ds));
      std::cout << ds.interior.size() << " interior and " << ds.boundary.size() << " boundary points written to "
                << path.string() << "\n";
      return kExitOk;
    }
    if (*eval_cmd) {
      const dgm::Checkpoint ckpt = dgm::load_checkpoint(checkpoint_path);
      if (eval_o.problem.empty() && eval_o.config_path.empty()) eval_o.problem = ckpt.problem;
      const dgm::ExperimentConfig c = resolve(eval_o);
      const dgm::StokesProblem problem = c.make_problem();
      dgm::GridSpec spec;
      spec.dim = problem.dim;
      spec.resolution = resolution.value_or(c.train.eval_resolution);
      spec.slice = slice.value_or(c.train.eval_slice);
      spec.slice_axis = problem.dim - 1;
      const dgm::EvalGrid grid = dgm::run_eval(checkpoint_path, problem, spec);
      std::filesystem::create_directories(c.output_dir);
      const auto path = std::filesystem::path(c.output_dir) / dgm::artifacts::eval_grid;
      dgm::write_text_file(path, dgm::eval_grid_csv(grid));
      std::cout << grid.points.size() << " nodes written to " << path.string();
      if (grid.exact) std::printf("  errL1 %.3e  errL2 %.3e", grid.err_l1, grid.err_l2);
      std::cout << "\n";
      return kExitOk;
    }
    if (*verify_cmd) {
      bool all = true;
      for (const dgm::OracleCheck& chk : dgm::run_oracle_suite(suite)) {
        std::printf("%-4s %-26s worst %.3e  threshold %.1e  %s\n", chk.pass ? "PASS" : "FAIL", chk.name.c_str(),
                    chk.worst, chk.threshold, chk.detail.c_str());
        all = all && chk.pass;
      }
      return all ? kExitOk : kExitNumeric;
    }
  } catch (const dgm::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const dgm::NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const dgm::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitUsage;
}
