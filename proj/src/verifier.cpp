#include "dgm/verifier.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "dgm/autodiff.hpp"
#include "dgm/errors.hpp"
#include "dgm/random.hpp"

namespace dgm {

FdDerivatives fd_input_derivatives(const VectorFunction& fn, std::span<const double> x, double h1, double h2,
                                   Stencil stencil) {
  if (!(h1 > 0.0 && h2 > 0.0)) throw ConfigError("finite-difference steps must be positive");
  const std::size_t n = x.size();
  std::vector<double> xp(x.begin(), x.end());
  const std::vector<double> f0 = fn(x);
  const std::size_t m = f0.size();
  FdDerivatives out;
  out.outputs = m;
  out.inputs = n;
  out.jac.assign(m * n, 0.0);
  out.d2.assign(m * n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    xp[j] = x[j] + h1;
    const std::vector<double> fp = fn(xp);
    xp[j] = x[j] - h1;
    const std::vector<double> fm = fn(xp);
    xp[j] = x[j] + h2;
    const std::vector<double> gp = fn(xp);
    xp[j] = x[j] - h2;
    const std::vector<double> gm = fn(xp);
    std::vector<double> gpp, gmm;
    if (stencil == Stencil::five_point) {
      xp[j] = x[j] + 2.0 * h2;
      gpp = fn(xp);
      xp[j] = x[j] - 2.0 * h2;
      gmm = fn(xp);
    }
    xp[j] = x[j];
    for (std::size_t k = 0; k < m; ++k) {
      out.jac[k * n + j] = (fp[k] - fm[k]) / (2.0 * h1);
      out.d2[k * n + j] = stencil == Stencil::three_point
                              ? (gp[k] - 2.0 * f0[k] + gm[k]) / (h2 * h2)
                              : (-gpp[k] + 16.0 * gp[k] - 30.0 * f0[k] + 16.0 * gm[k] - gmm[k]) / (12.0 * h2 * h2);
    }
  }
  return out;
}

std::vector<double> fd_gradient(const ScalarFunction& loss, std::span<const double> theta, double h) {
  std::vector<double> t(theta.begin(), theta.end());
  std::vector<double> grad(t.size());
  for (std::size_t k = 0; k < t.size(); ++k) {
    const double step = h * std::max(1.0, std::abs(theta[k]));
    t[k] = theta[k] + step;
    const double fp = loss(t);
    t[k] = theta[k] - step;
    const double fm = loss(t);
    t[k] = theta[k];
    grad[k] = (fp - fm) / (2.0 * step);
  }
  return grad;
}

std::vector<double> fd_param_gradient(const std::function<double(const NetworkParams&)>& loss,
                                      const NetworkParams& params, double h) {
  NetworkParams work = params;
  return fd_gradient(
      [&](std::span<const double> flat) {
        work.assign_flat(flat);
        return loss(work);
      },
      params.flat(), h);
}

double relative_error(std::span<const double> a, std::span<const double> b, double floor) {
  if (a.size() != b.size()) throw DimensionError("relative_error: length mismatch");
  double diff = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  const double scale = std::sqrt(std::max(na, nb));
  return scale < floor ? std::sqrt(diff) : std::sqrt(diff) / scale;
}

FieldBundle fd_field_bundle(const ExactField& field, std::span<const double> x, std::size_t dim) {
  const VectorFunction velocity = [&](std::span<const double> y) { return field(y).u; };
  const VectorFunction pressure = [&](std::span<const double> y) { return std::vector<double>{field(y).p}; };
  const FdDerivatives du =
      fd_input_derivatives(velocity, x, kFirstDerivativeStep, kFivePointStep, Stencil::five_point);
  const FdDerivatives dp = fd_input_derivatives(pressure, x);
  FieldBundle b;
  b.dim = dim;
  b.u = field(x).u;
  b.u_jac = du.jac;
  b.u_d2 = du.d2;
  b.p_grad = dp.jac;
  return b;
}

LossBreakdown fd_objective(const ExactField& field, const StokesProblem& problem, const PointSet& interior,
                           const PointSet& boundary) {
  const std::size_t d = problem.dim;
  LossBreakdown out;
  for (std::size_t i = 0; i < interior.size(); ++i) {
    const FieldBundle b = fd_field_bundle(field, interior[i], d);
    const std::vector<double> r = apply_operator(problem, interior[i], b);
    double div = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      out.residual += r[k] * r[k];
      div += b.u_jac[k * d + k];
    }
    out.divergence += div * div;
  }
  for (std::size_t q = 0; q < boundary.size(); ++q) {
    const std::vector<double> u = field(boundary[q]).u;
    const std::vector<double> g = problem.g(boundary[q]);
    for (std::size_t k = 0; k < d; ++k) out.boundary += (u[k] - g[k]) * (u[k] - g[k]);
  }
  out.residual /= static_cast<double>(interior.size());
  out.divergence /= static_cast<double>(interior.size());
  out.boundary /= static_cast<double>(boundary.size());
  out.total = out.residual + out.divergence + out.boundary;
  return out;
}

ExactField network_field(const NetworkParams& params) {
  return [&params](std::span<const double> x) {
    Prediction pr = predict(params, x);
    return FlowPoint{std::move(pr.u), pr.p};
  };
}

UnbiasednessReport check_unbiasedness(const NetworkParams& params, const StokesProblem& problem,
                                      const Dataset& dataset, double tolerance) {
  UnbiasednessReport rep;
  const std::size_t ni = dataset.interior.size();
  const std::size_t nb = dataset.boundary.size();
  if (ni == 0 || nb == 0) return rep;
  const std::size_t pairs = std::lcm(ni, nb);
  std::vector<double> mean(params.size(), 0.0);
  for (std::size_t n = 0; n < pairs; ++n) {
    const ObjectiveGradient g = point_loss_gradient(params, problem, dataset.interior[n % ni], dataset.boundary[n % nb]);
    for (std::size_t k = 0; k < mean.size(); ++k) mean[k] += g.gradient[k];
  }
  for (double& v : mean) v /= static_cast<double>(pairs);
  const ObjectiveGradient full = objective_gradient(params, problem, dataset.interior, dataset.boundary);
  double scale = 0.0, worst = 0.0;
  for (std::size_t k = 0; k < mean.size(); ++k) {
    scale = std::max(scale, std::abs(full.gradient[k]));
    worst = std::max(worst, std::abs(mean[k] - full.gradient[k]));
  }
  rep.samples = pairs;
  rep.max_rel_error = scale > 0.0 ? worst / scale : worst;
  rep.pass = rep.max_rel_error <= tolerance;
  return rep;
}

namespace {

NetworkParams random_params(const Architecture& arch, std::uint64_t seed) {
  NetworkParams p = init_params(arch, seed);
  Rng rng(mix_seed(seed, 99));
  for (Net net : {Net::velocity, Net::pressure}) {
    auto th = p.theta(net);
    for (const LayerShape& s : p.layout(net).layers())
      for (std::size_t i = 0; i < s.out; ++i) th[s.bias_offset + i] = rng.uniform(-0.5, 0.5);
  }
  return p;
}

PointSet random_points(Rng& rng, std::size_t dim, std::size_t n, double lo, double hi) {
  PointSet pts(dim);
  std::vector<double> x(dim);
  for (std::size_t i = 0; i < n; ++i) {
    for (double& v : x) v = rng.uniform(lo, hi);
    pts.push_back(x);
  }
  return pts;
}

PointSet random_boundary(Rng& rng, std::size_t dim, std::size_t n) {
  PointSet pts(dim);
  std::vector<double> x(dim);
  for (std::size_t i = 0; i < n; ++i) {
    sample_boundary_point(rng, x);
    pts.push_back(x);
  }
  return pts;
}

OracleCheck make_check(std::string name, double worst, double threshold, std::string detail = {}) {
  return {std::move(name), worst <= threshold, worst, threshold, std::move(detail)};
}

}  // namespace

std::vector<OracleCheck> run_oracle_suite(const OracleSuiteOptions& opt) {
  std::vector<OracleCheck> out;

  // Extended-forward derivatives and parameter gradients against finite differences.
  double worst_jac = 0.0, worst_lap = 0.0, worst_grad = 0.0;
  for (std::size_t draw = 0; draw < opt.derivative_draws; ++draw) {
    const std::size_t k = 1 + draw % 3;
    const std::size_t d = 2 + (draw / 3) % 2;
    const std::uint64_t seed = mix_seed(opt.seed, 1000 + draw);
    const NetworkParams params = random_params(Architecture::arch(k, d), seed);
    Rng rng(mix_seed(seed, 7));
    std::vector<double> x(d);
    for (double& v : x) v = rng.uniform(0.05, 0.95);

    for (Net net : {Net::velocity, Net::pressure}) {
      const ExtendedEval ev = forward_extended(params, net, x);
      const VectorFunction fn = [&](std::span<const double> y) {
        Prediction pr = predict(params, y);
        return net == Net::velocity ? pr.u : std::vector<double>{pr.p};
      };
      const FdDerivatives fd = fd_input_derivatives(fn, x, kFirstDerivativeStep, kFivePointStep, Stencil::five_point);
      const std::size_t m = ev.outputs();
      std::vector<double> jac(m * d), lap(m), fd_lap(m, 0.0);
      for (std::size_t o = 0; o < m; ++o) {
        for (std::size_t j = 0; j < d; ++j) {
          jac[o * d + j] = ev.jac(o, j);
          fd_lap[o] += fd.d2[o * d + j];
        }
        lap[o] = ev.laplacian(o);
      }
      worst_jac = std::max(worst_jac, relative_error(jac, fd.jac));
      worst_lap = std::max(worst_lap, relative_error(lap, fd_lap));
    }

    const StokesProblem problem = make_problem(draw % 2 == 0 ? (d == 2 ? "stokes2d" : "stokes3d")
                                                             : (d == 2 ? "general_stokes2d" : "general_stokes3d"));
    const PointSet interior = random_points(rng, d, 4, 0.05, 0.95);
    const PointSet boundary = random_boundary(rng, d, 3);
    const ObjectiveGradient og = objective_gradient(params, problem, interior, boundary);
    const std::vector<double> fd = fd_param_gradient(
        [&](const NetworkParams& p) { return batch_objective(p, problem, interior, boundary).total; }, params);
    worst_grad = std::max(worst_grad, relative_error(og.gradient, fd));
  }
  const std::string draws = std::to_string(opt.derivative_draws) + " draws";
  out.push_back(make_check("jacobian_vs_fd", worst_jac, 1e-6, draws));
  out.push_back(make_check("laplacian_vs_fd", worst_lap, 1e-6, draws));
  out.push_back(make_check("objective_gradient_vs_fd", worst_grad, 1e-5, draws));

  // Mean of single-sample gradients against the full-batch gradient.
  double worst_unbiased = 0.0;
  const char* names[] = {"stokes2d", "general_stokes3d", "cavity2d", "general_stokes2d", "stokes3d", "cavity3d"};
  for (std::size_t c = 0; c < opt.unbiasedness_configs; ++c) {
    const std::uint64_t seed = mix_seed(opt.seed, 5000 + c);
    const StokesProblem problem = make_problem(names[c % 6]);
    const NetworkParams params = random_params(Architecture::arch(1 + c % 3, problem.dim), seed);
    const Dataset ds = sample_dataset(problem.dim, 40 + 10 * (c % 4), 0.2, seed);
    worst_unbiased = std::max(worst_unbiased, check_unbiasedness(params, problem, ds).max_rel_error);
  }
  out.push_back(make_check("unbiasedness", worst_unbiased, 1e-10,
                           std::to_string(opt.unbiasedness_configs) + " configurations"));

  // Closed-form forcing against finite differences of the manufactured solutions.
  double worst_forcing = 0.0, worst_div = 0.0, worst_objective = 0.0;
  Rng rng(mix_seed(opt.seed, 9000));
  for (std::size_t d : {2, 3}) {
    for (const auto& [alpha, nu] : {std::pair{0.0, 0.025}, std::pair{1.0, 1.0}}) {
      const StokesProblem problem = make_problem(d == 2 ? "stokes2d" : "stokes3d", alpha, nu);
      const ExactField& exact = *problem.exact;
      const PointSet pts = random_points(rng, d, opt.manufactured_points, 0.0, 1.0);
      for (std::size_t i = 0; i < pts.size(); ++i) {
        const FieldBundle b = fd_field_bundle(exact, pts[i], d);
        const std::vector<double> f = problem.f(pts[i]);
        double div = 0.0;
        for (std::size_t k = 0; k < d; ++k) {
          double lap = 0.0;
          for (std::size_t j = 0; j < d; ++j) lap += b.u_d2[k * d + j];
          const double f_fd = alpha * b.u[k] - nu * lap + b.p_grad[k];
          worst_forcing = std::max(worst_forcing, std::abs(f_fd - f[k]));
          div += b.u_jac[k * d + k];
        }
        worst_div = std::max(worst_div, std::abs(div));
      }
      const PointSet bnd = random_boundary(rng, d, 50);
      worst_objective = std::max(worst_objective, fd_objective(exact, problem, pts, bnd).total);
    }
  }
  out.push_back(make_check("forcing_vs_fd", worst_forcing, 1e-5));
  out.push_back(make_check("exact_divergence_fd", worst_div, 1e-6));
  out.push_back(make_check("exact_objective", worst_objective, 1e-8));
  return out;
}

}  // namespace dgm
