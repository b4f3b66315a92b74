#pragma once

// Dense inner loops of the extended forward/backward passes.
//
// Every block handled here is row-major with `cols` contiguous doubles per
// row. For a layer block the row is a neuron and the columns are
// (channel, point) pairs laid out channel-major:
//
//   [ value(p=0..B) | jac_0(p) .. jac_{d-1}(p) | d2_0(p) .. d2_{d-1}(p) ]
//
// so an affine map acts on all channels with one GEMM, and the bias only
// touches the first `bias_cols` (= B) columns.
//
// Two implementations exist: a scalar reference and an AVX2/FMA variant.
// They are selected at runtime and must agree to rounding.

#include <cstddef>
#include <string_view>

namespace dgm::kernels {

struct ActivationShape {
  std::size_t rows;    // neurons
  std::size_t points;  // B
  std::size_t inputs;  // d
  int order;           // 0: value, 1: +jac, 2: +pure second derivatives
  std::size_t cols() const { return points * (1 + static_cast<std::size_t>(order) * inputs); }
};

struct Table {
  std::string_view name;

  // y[i,:] = sum_k w[i,k] * x[k,:];  y[i, 0:bias_cols] += b[i]
  void (*affine_forward)(const double* w, const double* b, std::size_t n_out, std::size_t n_in,
                         const double* x, double* y, std::size_t cols, std::size_t bias_cols);

  // x_bar[k,:] = sum_i w[i,k] * y_bar[i,:]
  void (*affine_backward_input)(const double* w, std::size_t n_out, std::size_t n_in,
                                const double* y_bar, double* x_bar, std::size_t cols);

  // w_bar[i,k] += <y_bar[i,:], x[k,:]>;  b_bar[i] += sum(y_bar[i, 0:bias_cols])
  void (*affine_backward_params)(const double* y_bar, const double* x, std::size_t n_out,
                                 std::size_t n_in, std::size_t cols, std::size_t bias_cols,
                                 double* w_bar, double* b_bar);

  // Elementwise second-order chain rule. s0..s2 are sigma, sigma', sigma''
  // evaluated at the value channel of x (rows x points each).
  //   y_v = s0,  y_J = s1*J,  y_D = s2*J^2 + s1*D
  void (*activation_forward)(const ActivationShape& shape, const double* s0, const double* s1,
                             const double* s2, const double* x, double* y);

  // Reverse of activation_forward; s3 = sigma'''.
  //   z_bar = yv_bar*s1 + sum_j [ yJ_bar*s2*J + yD_bar*(s3*J^2 + s2*D) ]
  //   J_bar = yJ_bar*s1 + 2*yD_bar*s2*J
  //   D_bar = yD_bar*s1
  void (*activation_backward)(const ActivationShape& shape, const double* s1, const double* s2,
                              const double* s3, const double* x, const double* y_bar,
                              double* x_bar);
};

const Table& scalar_table();

/// AVX2/FMA table, or nullptr when not compiled in or not supported by the CPU.
const Table* avx2_table();

/// Table used by the engine. Chosen once from the CPU features; the
/// DGM_KERNELS environment variable ("scalar" | "avx2" | "auto") overrides.
const Table& active();

/// Force a backend by name. Returns false if it is unavailable.
bool select(std::string_view name);

}  // namespace dgm::kernels
