#include "dgm/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <ostream>
#include <thread>

#include "dgm/autodiff.hpp"
#include "dgm/checkpoint.hpp"
#include "dgm/csv_io.hpp"
#include "dgm/errors.hpp"
#include "dgm/random.hpp"

namespace dgm {

namespace fs = std::filesystem;

namespace {

std::string sci(double v) {
  if (std::isnan(v)) return "-";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
}

std::string record_line(const HistoryRecord& r) {
  return "iter " + std::to_string(r.iteration) + "  J " + sci(r.loss.total) + "  residual " + sci(r.loss.residual) +
         "  divergence " + sci(r.loss.divergence) + "  boundary " + sci(r.loss.boundary) + "  errL1 " +
         sci(r.err_l1) + "  errL2 " + sci(r.err_l2);
}

}  // namespace

RunOutcome run_train(const ExperimentConfig& config, const RunOptions& options) {
  config.validate();
  const StokesProblem problem = config.make_problem();
  const fs::path dir(config.output_dir);
  ensure_directory(dir);
  save_config(config, dir / artifacts::config);

  const Dataset dataset =
      sample_dataset(problem.dim, config.dataset.total, config.dataset.boundary_fraction, config.dataset.seed);
  write_text_file(dir / artifacts::dataset, dataset_csv(dataset));

  TrainHooks hooks;
  hooks.stop = options.stop;
  if (options.log && options.echo_records)
    hooks.on_record = [&](const HistoryRecord& r, const NetworkParams&) { *options.log << record_line(r) << '\n'; };

  RunOutcome out;
  out.directory = dir;
  out.config_hash = config_hash(config);
  out.history = train(problem, dataset, config.architecture(), config.train, hooks);
  if (!out.history.records.empty()) out.final_record = out.history.records.back();

  write_text_file(dir / artifacts::history, history_csv(out.history.records));
  Checkpoint ckpt;
  ckpt.problem = problem.name;
  ckpt.params = out.history.final_params;
  ckpt.iteration = out.history.iterations;
  ckpt.rng_state = out.history.sampler_state;
  ckpt.config_hash = out.config_hash;
  save_checkpoint(ckpt, dir / artifacts::checkpoint);

  GridSpec spec;
  spec.dim = problem.dim;
  spec.resolution = config.train.eval_resolution;
  spec.slice = config.train.eval_slice;
  spec.slice_axis = problem.dim - 1;
  write_text_file(dir / artifacts::eval_grid, eval_grid_csv(eval_grid(out.history.final_params, problem, spec)));

  if (options.log) {
    const HistoryRecord& r = out.final_record;
    *options.log << "final  iter " << r.iteration << "  errL1 " << sci(r.err_l1) << "  errL2 " << sci(r.err_l2)
                 << "  J " << sci(r.loss.total) << "  (" << to_string(out.history.reason) << ")\n";
  }
  return out;
}

ExperimentConfig matrix_cell_config(const ExperimentConfig& base, std::size_t arch, std::size_t dataset_total,
                                    std::size_t cell_index) {
  ExperimentConfig c = base;
  c.hidden_layers = arch;
  c.dataset.total = dataset_total;
  c.dataset.seed = mix_seed(base.matrix.master_seed, 2 * cell_index);
  c.train.seed = mix_seed(base.matrix.master_seed, 2 * cell_index + 1);
  c.output_dir = (fs::path(base.output_dir) / ("arch" + std::to_string(arch) + "_n" + std::to_string(dataset_total)))
                     .string();
  return c;
}

std::vector<MatrixRow> run_matrix(const ExperimentConfig& config, const RunOptions& options) {
  config.validate();
  ensure_directory(config.output_dir);
  save_config(config, fs::path(config.output_dir) / artifacts::config);

  struct Cell {
    std::size_t arch, total, index;
  };
  std::vector<Cell> cells;
  for (std::size_t k : config.matrix.archs)
    for (std::size_t n : config.matrix.dataset_totals) cells.push_back({k, n, cells.size()});

  std::vector<MatrixRow> rows(cells.size());
  std::mutex log_mutex;
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      const Cell& cell = cells[i];
      MatrixRow& row = rows[i];
      row.arch = cell.arch;
      row.dataset_total = cell.total;
      if (options.stop && options.stop->load()) {
        row.message = "cancelled";
        continue;
      }
      try {
        RunOptions quiet = options;
        quiet.log = nullptr;
        const RunOutcome out = run_train(matrix_cell_config(config, cell.arch, cell.total, cell.index), quiet);
        row.reason = out.history.reason;
        row.err_l1 = out.final_record.err_l1;
        row.err_l2 = out.final_record.err_l2;
        row.objective = out.final_record.loss.total;
        row.ok = out.history.reason != TerminationReason::diverged;
        if (!row.ok) row.message = "diverged";
      } catch (const std::exception& e) {
        row.message = e.what();
      }
      if (options.log) {
        std::lock_guard lock(log_mutex);
        *options.log << "ARCH-" << row.arch << "  n=" << row.dataset_total << "  "
                     << (row.ok ? "errL2 " + sci(row.err_l2) : "failed: " + row.message) << '\n';
      }
    }
  };
  const std::size_t jobs = std::min(config.matrix.jobs, cells.size());
  std::vector<std::thread> pool;
  for (std::size_t j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();

  std::string csv = "arch,dataset_total,status,errL1,errL2,J,reason\n";
  for (const MatrixRow& r : rows) {
    csv += std::to_string(r.arch) + "," + std::to_string(r.dataset_total) + "," + (r.ok ? "ok" : "failed") + ",";
    if (r.ok)
      csv += format_number(r.err_l1) + "," + format_number(r.err_l2) + "," + format_number(r.objective) + "," +
             std::string(to_string(r.reason));
    else
      csv += ",,,";
    csv += '\n';
  }
  write_text_file(fs::path(config.output_dir) / "matrix.csv", csv);
  write_text_file(fs::path(config.output_dir) / "matrix.txt", format_matrix(rows));
  if (options.log) *options.log << format_matrix(rows);
  return rows;
}

std::string format_matrix(const std::vector<MatrixRow>& rows) {
  std::string out;
  char line[160];
  std::snprintf(line, sizeof line, "%-8s %-8s %-11s %-11s %-11s\n", "arch", "points", "errL1", "errL2", "J");
  out += line;
  for (const MatrixRow& r : rows) {
    const std::string name = "ARCH-" + std::to_string(r.arch);
    if (r.ok)
      std::snprintf(line, sizeof line, "%-8s %-8zu %-11s %-11s %-11s\n", name.c_str(), r.dataset_total,
                    sci(r.err_l1).c_str(), sci(r.err_l2).c_str(), sci(r.objective).c_str());
    else
      std::snprintf(line, sizeof line, "%-8s %-8zu %-11s %-11s %-11s\n", name.c_str(), r.dataset_total, "-", "-", "-");
    out += line;
  }
  return out;
}

CavityMetrics cavity_metrics(const NetworkParams& params, const StokesProblem& problem, std::size_t lid_points,
                             std::size_t grid) {
  if (!problem.cavity) throw ConfigError("cavity metrics need a cavity problem, got '" + problem.name + "'");
  if (lid_points == 0 || grid == 0) throw ConfigError("cavity metrics need positive sample counts");
  const std::size_t d = problem.dim;
  const std::vector<double>& lid = problem.cavity->lid_velocity;
  CavityMetrics m;

  // Lid face x_d = 1, sampled at cell midpoints so no corner is ever touched.
  PointSet lid_pts(d);
  std::vector<double> x(d, 1.0);
  if (d == 2) {
    for (std::size_t i = 0; i < lid_points; ++i) {
      x[0] = (static_cast<double>(i) + 0.5) / static_cast<double>(lid_points);
      lid_pts.push_back(x);
    }
  } else {
    const auto side = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(lid_points))));
    for (std::size_t i = 0; i < side; ++i)
      for (std::size_t j = 0; j < side; ++j) {
        x[0] = (static_cast<double>(i) + 0.5) / static_cast<double>(side);
        x[1] = (static_cast<double>(j) + 0.5) / static_cast<double>(side);
        lid_pts.push_back(x);
      }
  }
  const FieldValues lid_vals = predict_batch(params, lid_pts);
  for (std::size_t i = 0; i < lid_pts.size(); ++i)
    for (std::size_t k = 0; k < d; ++k) {
      const double e = lid_vals.u[i * d + k] - lid[k];
      m.lid_mismatch += e * e;
    }
  m.lid_mismatch /= static_cast<double>(lid_pts.size());

  // Divergence on a cell-centred grid (the x_d = 0.5 plane in 3D).
  PointSet div_pts(d);
  std::vector<double> y(d, 0.5);
  for (std::size_t i = 0; i < grid; ++i)
    for (std::size_t j = 0; j < grid; ++j) {
      y[0] = (static_cast<double>(i) + 0.5) / static_cast<double>(grid);
      y[1] = (static_cast<double>(j) + 0.5) / static_cast<double>(grid);
      div_pts.push_back(y);
    }
  constexpr std::size_t chunk = 512;
  double sum = 0.0;
  for (std::size_t start = 0; start < div_pts.size(); start += chunk) {
    const std::size_t n = std::min(chunk, div_pts.size() - start);
    PointSet part(d);
    part.reserve(n);
    for (std::size_t i = 0; i < n; ++i) part.push_back(div_pts[start + i]);
    const ExtendedEval ev = forward_extended(params, Net::velocity, part, DerivOrder::first);
    for (std::size_t p = 0; p < n; ++p) {
      double div = 0.0;
      for (std::size_t k = 0; k < d; ++k) div += ev.jac(k, k, p);
      sum += div * div;
    }
  }
  m.mean_sq_divergence = sum / static_cast<double>(div_pts.size());

  std::vector<double> probe(d, 0.5);
  probe[d - 1] = 0.95;
  m.u_near_lid = predict(params, probe).u[0];
  probe[d - 1] = 0.1;
  m.u_near_bottom = predict(params, probe).u[0];
  return m;
}

std::vector<CavityRow> run_cavity(const ExperimentConfig& config, const RunOptions& options) {
  config.validate();
  const StokesProblem problem = config.make_problem();
  if (!problem.cavity) throw ConfigError("the cavity study needs a cavity problem, got '" + problem.name + "'");
  ensure_directory(config.output_dir);
  save_config(config, fs::path(config.output_dir) / artifacts::config);

  const auto side = std::max<std::size_t>(
      2, static_cast<std::size_t>(std::lround(std::sqrt(static_cast<double>(config.cavity.test_points)))));
  std::vector<CavityRow> rows;
  for (std::size_t width : config.cavity.widths) {
    CavityRow row;
    row.width = width;
    ExperimentConfig c = config;
    c.units = width;
    c.output_dir = (fs::path(config.output_dir) / ("width" + std::to_string(width))).string();
    try {
      RunOptions inner = options;
      inner.log = nullptr;
      const RunOutcome out = run_train(c, inner);
      const NetworkParams& params = out.history.final_params;
      row.loss = out.final_record.loss;
      row.metrics = cavity_metrics(params, problem, config.cavity.test_points, config.cavity.divergence_grid);
      row.ok = out.history.reason != TerminationReason::diverged;
      if (!row.ok) row.message = "diverged";
      if (problem.dim == 2) {
        write_text_file(fs::path(c.output_dir) / "velocity_field.csv",
                        eval_grid_csv(eval_grid(params, problem, GridSpec{2, side, 0.5, 2})));
      } else {
        static const char* names[] = {"slice_x.csv", "slice_y.csv", "slice_z.csv"};
        for (std::size_t axis = 0; axis < 3; ++axis)
          write_text_file(fs::path(c.output_dir) / names[axis],
                          eval_grid_csv(eval_grid(params, problem, GridSpec{3, side, 0.5, axis})));
      }
    } catch (const std::exception& e) {
      row.message = e.what();
    }
    if (options.log)
      *options.log << "width " << width << "  "
                   << (row.ok ? "J " + sci(row.loss.total) + "  lid " + sci(row.metrics.lid_mismatch) + "  div " +
                                    sci(row.metrics.mean_sq_divergence) + "  vortex " +
                                    (row.metrics.single_vortex() ? "yes" : "no")
                              : "failed: " + row.message)
                   << '\n';
    rows.push_back(row);
  }

  std::string csv = "width,status,J,residual,divergence,boundary,lid_mismatch,mean_sq_divergence,u_near_lid,u_near_bottom\n";
  for (const CavityRow& r : rows) {
    csv += std::to_string(r.width) + "," + (r.ok ? "ok" : "failed");
    for (double v : {r.loss.total, r.loss.residual, r.loss.divergence, r.loss.boundary, r.metrics.lid_mismatch,
                     r.metrics.mean_sq_divergence, r.metrics.u_near_lid, r.metrics.u_near_bottom})
      csv += "," + (r.ok ? format_number(v) : std::string());
    csv += '\n';
  }
  write_text_file(fs::path(config.output_dir) / "cavity.csv", csv);
  return rows;
}

EvalGrid run_eval(const fs::path& checkpoint, const StokesProblem& problem, const GridSpec& spec) {
  const Checkpoint ckpt = load_checkpoint(checkpoint);
  if (ckpt.params.arch.input_dim != problem.dim)
    throw DimensionError("checkpoint is " + std::to_string(ckpt.params.arch.input_dim) + "-dimensional but problem '" +
                         problem.name + "' is " + std::to_string(problem.dim) + "-dimensional");
  return eval_grid(ckpt.params, problem, spec);
}

}  // namespace dgm
