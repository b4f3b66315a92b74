#include <immintrin.h>

#include <cmath>

#include "dgm/kernels.hpp"

namespace dgm::kernels {
namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sw = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sw));
}

void affine_forward(const double* w, const double* b, std::size_t n_out, std::size_t n_in,
                    const double* x, double* y, std::size_t cols, std::size_t bias_cols) {
  for (std::size_t i = 0; i < n_out; ++i) {
    const double* wi = w + i * n_in;
    double* yi = y + i * cols;
    std::size_t c = 0;
    for (; c + 16 <= cols; c += 16) {
      __m256d a0 = _mm256_setzero_pd(), a1 = _mm256_setzero_pd();
      __m256d a2 = _mm256_setzero_pd(), a3 = _mm256_setzero_pd();
      for (std::size_t k = 0; k < n_in; ++k) {
        const __m256d wk = _mm256_broadcast_sd(wi + k);
        const double* xk = x + k * cols + c;
        a0 = _mm256_fmadd_pd(wk, _mm256_loadu_pd(xk), a0);
        a1 = _mm256_fmadd_pd(wk, _mm256_loadu_pd(xk + 4), a1);
        a2 = _mm256_fmadd_pd(wk, _mm256_loadu_pd(xk + 8), a2);
        a3 = _mm256_fmadd_pd(wk, _mm256_loadu_pd(xk + 12), a3);
      }
      _mm256_storeu_pd(yi + c, a0);
      _mm256_storeu_pd(yi + c + 4, a1);
      _mm256_storeu_pd(yi + c + 8, a2);
      _mm256_storeu_pd(yi + c + 12, a3);
    }
    for (; c + 4 <= cols; c += 4) {
      __m256d a0 = _mm256_setzero_pd();
      for (std::size_t k = 0; k < n_in; ++k)
        a0 = _mm256_fmadd_pd(_mm256_broadcast_sd(wi + k), _mm256_loadu_pd(x + k * cols + c), a0);
      _mm256_storeu_pd(yi + c, a0);
    }
    for (; c < cols; ++c) {
      double acc = 0.0;
      for (std::size_t k = 0; k < n_in; ++k) acc = std::fma(wi[k], x[k * cols + c], acc);
      yi[c] = acc;
    }
    const __m256d bi = _mm256_set1_pd(b[i]);
    std::size_t p = 0;
    for (; p + 4 <= bias_cols; p += 4)
      _mm256_storeu_pd(yi + p, _mm256_add_pd(_mm256_loadu_pd(yi + p), bi));
    for (; p < bias_cols; ++p) yi[p] += b[i];
  }
}

void affine_backward_input(const double* w, std::size_t n_out, std::size_t n_in,
                           const double* y_bar, double* x_bar, std::size_t cols) {
  for (std::size_t k = 0; k < n_in; ++k) {
    double* xk = x_bar + k * cols;
    std::size_t c = 0;
    for (; c + 16 <= cols; c += 16) {
      __m256d a0 = _mm256_setzero_pd(), a1 = _mm256_setzero_pd();
      __m256d a2 = _mm256_setzero_pd(), a3 = _mm256_setzero_pd();
      for (std::size_t i = 0; i < n_out; ++i) {
        const __m256d wik = _mm256_broadcast_sd(w + i * n_in + k);
        const double* yi = y_bar + i * cols + c;
        a0 = _mm256_fmadd_pd(wik, _mm256_loadu_pd(yi), a0);
        a1 = _mm256_fmadd_pd(wik, _mm256_loadu_pd(yi + 4), a1);
        a2 = _mm256_fmadd_pd(wik, _mm256_loadu_pd(yi + 8), a2);
        a3 = _mm256_fmadd_pd(wik, _mm256_loadu_pd(yi + 12), a3);
      }
      _mm256_storeu_pd(xk + c, a0);
      _mm256_storeu_pd(xk + c + 4, a1);
      _mm256_storeu_pd(xk + c + 8, a2);
      _mm256_storeu_pd(xk + c + 12, a3);
    }
    for (; c + 4 <= cols; c += 4) {
      __m256d a0 = _mm256_setzero_pd();
      for (std::size_t i = 0; i < n_out; ++i)
        a0 = _mm256_fmadd_pd(_mm256_broadcast_sd(w + i * n_in + k),
                             _mm256_loadu_pd(y_bar + i * cols + c), a0);
      _mm256_storeu_pd(xk + c, a0);
    }
    for (; c < cols; ++c) {
      double acc = 0.0;
      for (std::size_t i = 0; i < n_out; ++i) acc = std::fma(w[i * n_in + k], y_bar[i * cols + c], acc);
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
      __m256d a0 = _mm256_setzero_pd(), a1 = _mm256_setzero_pd();
      std::size_t c = 0;
      for (; c + 8 <= cols; c += 8) {
        a0 = _mm256_fmadd_pd(_mm256_loadu_pd(yi + c), _mm256_loadu_pd(xk + c), a0);
        a1 = _mm256_fmadd_pd(_mm256_loadu_pd(yi + c + 4), _mm256_loadu_pd(xk + c + 4), a1);
      }
      for (; c + 4 <= cols; c += 4)
        a0 = _mm256_fmadd_pd(_mm256_loadu_pd(yi + c), _mm256_loadu_pd(xk + c), a0);
      double acc = hsum(_mm256_add_pd(a0, a1));
      for (; c < cols; ++c) acc = std::fma(yi[c], xk[c], acc);
      w_bar[i * n_in + k] += acc;
    }
    __m256d a0 = _mm256_setzero_pd();
    std::size_t p = 0;
    for (; p + 4 <= bias_cols; p += 4) a0 = _mm256_add_pd(a0, _mm256_loadu_pd(yi + p));
    double acc = hsum(a0);
    for (; p < bias_cols; ++p) acc += yi[p];
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
        std::size_t p = 0;
        for (; p + 4 <= B; p += 4)
          _mm256_storeu_pd(yJ + p, _mm256_mul_pd(_mm256_loadu_pd(t1 + p), _mm256_loadu_pd(J + p)));
        for (; p < B; ++p) yJ[p] = t1[p] * J[p];
      }
    }
    if (s.order >= 2) {
      for (std::size_t j = 0; j < d; ++j) {
        const double* J = xi + (1 + j) * B;
        const double* D = xi + (1 + d + j) * B;
        double* yD = yi + (1 + d + j) * B;
        std::size_t p = 0;
        for (; p + 4 <= B; p += 4) {
          const __m256d vj = _mm256_loadu_pd(J + p);
          const __m256d curv = _mm256_mul_pd(_mm256_mul_pd(_mm256_loadu_pd(t2 + p), vj), vj);
          _mm256_storeu_pd(yD + p, _mm256_fmadd_pd(_mm256_loadu_pd(t1 + p), _mm256_loadu_pd(D + p), curv));
        }
        for (; p < B; ++p) yD[p] = std::fma(t1[p], D[p], t2[p] * J[p] * J[p]);
      }
    }
  }
}

void activation_backward(const ActivationShape& s, const double* s1, const double* s2,
                         const double* s3, const double* x, const double* y_bar, double* x_bar) {
  const std::size_t B = s.points;
  const std::size_t d = s.inputs;
  const std::size_t cols = s.cols();
  const __m256d two = _mm256_set1_pd(2.0);
  for (std::size_t i = 0; i < s.rows; ++i) {
    const double* xi = x + i * cols;
    const double* gi = y_bar + i * cols;
    double* oi = x_bar + i * cols;
    const double* t1 = s1 + i * B;
    const double* t2 = s2 + i * B;
    const double* t3 = s3 + i * B;
    {
      std::size_t p = 0;
      for (; p + 4 <= B; p += 4)
        _mm256_storeu_pd(oi + p, _mm256_mul_pd(_mm256_loadu_pd(gi + p), _mm256_loadu_pd(t1 + p)));
      for (; p < B; ++p) oi[p] = gi[p] * t1[p];
    }
    if (s.order >= 1) {
      for (std::size_t j = 0; j < d; ++j) {
        const double* J = xi + (1 + j) * B;
        const double* gJ = gi + (1 + j) * B;
        double* oJ = oi + (1 + j) * B;
        std::size_t p = 0;
        for (; p + 4 <= B; p += 4) {
          const __m256d g = _mm256_loadu_pd(gJ + p);
          const __m256d gs2 = _mm256_mul_pd(g, _mm256_loadu_pd(t2 + p));
          _mm256_storeu_pd(oi + p, _mm256_fmadd_pd(gs2, _mm256_loadu_pd(J + p), _mm256_loadu_pd(oi + p)));
          _mm256_storeu_pd(oJ + p, _mm256_mul_pd(g, _mm256_loadu_pd(t1 + p)));
        }
        for (; p < B; ++p) {
          oi[p] = std::fma(gJ[p] * t2[p], J[p], oi[p]);
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
        std::size_t p = 0;
        for (; p + 4 <= B; p += 4) {
          const __m256d g = _mm256_loadu_pd(gD + p);
          const __m256d vj = _mm256_loadu_pd(J + p);
          const __m256d v2 = _mm256_loadu_pd(t2 + p);
          const __m256d inner = _mm256_fmadd_pd(_mm256_mul_pd(_mm256_loadu_pd(t3 + p), vj), vj,
                                                _mm256_mul_pd(v2, _mm256_loadu_pd(D + p)));
          _mm256_storeu_pd(oi + p, _mm256_fmadd_pd(g, inner, _mm256_loadu_pd(oi + p)));
          const __m256d cross = _mm256_mul_pd(_mm256_mul_pd(two, g), _mm256_mul_pd(v2, vj));
          _mm256_storeu_pd(oJ + p, _mm256_add_pd(_mm256_loadu_pd(oJ + p), cross));
          _mm256_storeu_pd(oD + p, _mm256_mul_pd(g, _mm256_loadu_pd(t1 + p)));
        }
        for (; p < B; ++p) {
          oi[p] = std::fma(gD[p], t3[p] * J[p] * J[p] + t2[p] * D[p], oi[p]);
          oJ[p] += 2.0 * gD[p] * (t2[p] * J[p]);
          oD[p] = gD[p] * t1[p];
        }
      }
    }
  }
}

}  // namespace

const Table& avx2_table_impl() {
  static const Table table{"avx2",           affine_forward,     affine_backward_input,
                           affine_backward_params, activation_forward, activation_backward};
  return table;
}

}  // namespace dgm::kernels
