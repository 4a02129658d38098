#include "fplab/numerics.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "fplab/error.hpp"

namespace fplab {

std::uint64_t SeededRng::uniform_index(std::uint64_t bound) {
  if (bound == 0) throw InvalidArgument("uniform_index: bound must be positive");
  // Rejection sampling removes modulo bias.
  const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound);
  std::uint64_t x = engine_();
  while (x >= limit) x = engine_();
  return x % bound;
}

double SeededRng::gaussian(double mean, double std) {
  if (has_spare_) {
    has_spare_ = false;
    return mean + std * spare_;
  }
  // Box-Muller; u1 in (0, 1] keeps the log finite.
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * kPi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return mean + std * radius * std::cos(angle);
}

std::vector<std::size_t> SeededRng::permutation(std::size_t n) {
  std::vector<std::size_t> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = i;
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform_index(i));
    std::swap(p[i - 1], p[j]);
  }
  return p;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::vector<double> gaussian_sample(SeededRng& rng, double mean, double std, std::size_t count) {
  if (!(std >= 0.0)) throw InvalidArgument("gaussian_sample: std must be >= 0, got " + std::to_string(std));
  std::vector<double> out(count);
  for (auto& x : out) x = rng.gaussian(mean, std);
  return out;
}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw InvalidArgument("Matrix: " + std::to_string(data_.size()) + " values for a " + std::to_string(rows_) +
                          "x" + std::to_string(cols_) + " matrix");
  }
}

void Matrix::fill(double v) {
  for (auto& x : data_) x = v;
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix transpose(const Matrix& m) {
  Matrix t(m.cols(), m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) t(c, r) = m(r, c);
  }
  return t;
}

void gemm_accumulate(const Matrix& a, const Matrix& b, Matrix& c) {
  if (a.cols() != b.rows() || c.rows() != a.rows() || c.cols() != b.cols()) {
    throw InvalidArgument("gemm_accumulate: shape mismatch");
  }
  const std::size_t n = b.cols();
  const std::size_t inner = a.cols();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double* __restrict crow = c.data() + i * n;
    const double* arow = a.data() + i * inner;
    for (std::size_t k = 0; k < inner; ++k) {
      const double aik = arow[k];
      if (aik == 0.0) continue;
      const double* __restrict brow = b.data() + k * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += aik * brow[j];
    }
  }
}

void gemm_tn_accumulate(const Matrix& a, const Matrix& b, Matrix& c) {
  if (a.rows() != b.rows() || c.rows() != a.cols() || c.cols() != b.cols()) {
    throw InvalidArgument("gemm_tn_accumulate: shape mismatch");
  }
  const std::size_t n = b.cols();
  const std::size_t m = a.cols();
  for (std::size_t k = 0; k < a.rows(); ++k) {
    const double* arow = a.data() + k * m;
    const double* __restrict brow = b.data() + k * n;
    for (std::size_t i = 0; i < m; ++i) {
      const double aki = arow[i];
      if (aki == 0.0) continue;
      double* __restrict crow = c.data() + i * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += aki * brow[j];
    }
  }
}

std::vector<double> matvec(const Matrix& m, std::span<const double> v) {
  if (v.size() != m.cols()) throw InvalidArgument("matvec: dimension mismatch");
  std::vector<double> out(m.rows(), 0.0);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    double acc = 0.0;
    const auto row = m.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) acc += row[c] * v[c];
    out[r] = acc;
  }
  return out;
}

std::vector<double> matvec_transposed(const Matrix& m, std::span<const double> v) {
  if (v.size() != m.rows()) throw InvalidArgument("matvec_transposed: dimension mismatch");
  std::vector<double> out(m.cols(), 0.0);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const double vr = v[r];
    const auto row = m.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) out[c] += vr * row[c];
  }
  return out;
}

double vector_l2_norm(std::span<const double> v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return std::sqrt(acc);
}

double power_iteration_spectral_norm(const Matrix& m, int iterations, std::uint64_t seed) {
  if (m.empty()) throw InvalidArgument("power_iteration_spectral_norm: empty matrix");
  if (iterations < 1) throw InvalidArgument("power_iteration_spectral_norm: iterations must be >= 1");

  SeededRng rng(seed);
  std::vector<double> v = gaussian_sample(rng, 0.0, 1.0, m.cols());
  for (int it = 0; it < iterations; ++it) {
    const double norm = vector_l2_norm(v);
    if (norm == 0.0) return 0.0;
    for (auto& x : v) x /= norm;
    v = matvec_transposed(m, matvec(m, v));
  }
  // Rayleigh quotient of m^T m at the final iterate: |m v|^2 / |v|^2.
  const double vnorm = vector_l2_norm(v);
  if (vnorm == 0.0) return 0.0;
  return vector_l2_norm(matvec(m, v)) / vnorm;
}

}  // namespace fplab
