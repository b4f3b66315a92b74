#include "dgm/kernels.hpp"

namespace dgm::kernels {
namespace {

void affine_forward(const double* w, const double* b, std::size_t n_out, std::size_t n_in,
                    const double* x, double* y, std::size_t cols, std::size_t bias_cols) {
  for (std::size_t i = 0; i < n_out; ++i) {
    const double* wi = w + i * n_in;
    double* yi = y + i * cols;
    for (std::size_t c = 0; c < cols; ++c) {
      double acc = 0.0;
      for (std::size_t k = 0; k < n_in; ++k) acc += wi[k] * x[k * cols + c];
      yi[c] = acc;
    }
    for (std::size_t c = 0; c < bias_cols; ++c) yi[c] += b[i];
  }
}

void affine_backward_input(const double* w, std::size_t n_out, std::size_t n_in,
                           const double* y_bar, double* x_bar, std::size_t cols) {
  for (std::size_t k = 0; k < n_in; ++k) {
    double* xk = x_bar + k * cols;
    for (std::size_t c = 0; c < cols; ++c) {
      double acc = 0.0;
      for (std::size_t i = 0; i < n_out; ++i) acc += w[i * n_in + k] * y_bar[i * cols + c];
      xk[c] = acc;
    }
  }
}

void affine_backward_params(const double* y_bar, const double* x, std::size_t n_out,
                            std::size_t n_in, std::size_t cols, std::size_t bias_cols,
                            double* w_bar, double* b_bar) {
  for (std::size_t i = 0; i < n_out; ++i) {
    const double* yi = y_bar + i * cols;
    for (std::size_t k = 0; k < n_in; ++k) {
      const double* xk = x + k * cols;
      double acc = 0.0;
      for (std::size_t c = 0; c < cols; ++c) acc += yi[c] * xk[c];
      w_bar[i * n_in + k] += acc;
    }
    double acc = 0.0;
    for (std::size_t c = 0; c < bias_cols; ++c) acc += yi[c];
    b_bar[i] += acc;
  }
}

void activation_forward(const ActivationShape& s, const double* s0, const double* s1,
                        const double* s2, const double* x, double* y) {
  const std::size_t B = s.points;
  const std::size_t d = s.inputs;
  const std::size_t cols = s.cols();
  for (std::size_t i = 0; i < s.rows; ++i) {
    const double* xi = x + i * cols;
    double* yi = y + i * cols;
    const double* t0 = s0 + i * B;
    const double* t1 = s1 + i * B;
    const double* t2 = s2 + i * B;
    for (std::size_t p = 0; p < B; ++p) yi[p] = t0[p];
    if (s.order >= 1) {
      for (std::size_t j = 0; j < d; ++j) {
        const double* J = xi + (1 + j) * B;
        double* yJ = yi + (1 + j) * B;
        for (std::size_t p = 0; p < B; ++p) yJ[p] = t1[p] * J[p];
      }
    }
    if (s.order >= 2) {
      for (std::size_t j = 0; j < d; ++j) {
        const double* J = xi + (1 + j) * B;
        const double* D = xi + (1 + d + j) * B;
        double* yD = yi + (1 + d + j) * B;
        for (std::size_t p = 0; p < B; ++p) yD[p] = t2[p] * J[p] * J[p] + t1[p] * D[p];
      }
    }
  }
}

void activation_backward(const ActivationShape& s, const double* s1, const double* s2,
                         const double* s3, const double* x, const double* y_bar, double* x_bar) {
  const std::size_t B = s.points;
  const std::size_t d = s.inputs;
  const std::size_t cols = s.cols();
  for (std::size_t i = 0; i < s.rows; ++i) {
    const double* xi = x + i * cols;
    const double* gi = y_bar + i * cols;
    double* oi = x_bar + i * cols;
    const double* t1 = s1 + i * B;
    const double* t2 = s2 + i * B;
    const double* t3 = s3 + i * B;
    for (std::size_t p = 0; p < B; ++p) oi[p] = gi[p] * t1[p];
    if (s.order >= 1) {
      for (std::size_t j = 0; j < d; ++j) {
        const double* J = xi + (1 + j) * B;
        const double* gJ = gi + (1 + j) * B;
        double* oJ = oi + (1 + j) * B;
        for (std::size_t p = 0; p < B; ++p) {
          oi[p] += gJ[p] * t2[p] * J[p];
          oJ[p] = gJ[p] * t1[p];
        }
      }
    }
    if (s.order >= 2) {
      for (std::size_t j = 0; j < d; ++j) {
        const double* J = xi + (1 + j) * B;
        const double* D = xi + (1 + d + j) * B;
        const double* gD = gi + (1 + d + j) * B;
        double* oJ = oi + (1 + j) * B;
        double* oD = oi + (1 + d + j) * B;
        for (std::size_t p = 0; p < B; ++p) {
          oi[p] += gD[p] * (t3[p] * J[p] * J[p] + t2[p] * D[p]);
          oJ[p] += 2.0 * gD[p] * t2[p] * J[p];
          oD[p] = gD[p] * t1[p];
        }
      }
    }
  }
}

}  // namespace

const Table& scalar_table() {
  static const Table table{"scalar",           affine_forward,     affine_backward_input,
                           affine_backward_params, activation_forward, activation_backward};
  return table;
}

}  // namespace dgm::kernels
