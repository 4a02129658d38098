#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace fplab {

using Complex = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846264338327950288;

/// Seedable pseudo-random source. The bit stream comes from std::mt19937_64,
/// whose output sequence is fixed by the standard. Every derived quantity
/// (uniforms, Gaussians via Box-Muller, permutations) is computed here rather
/// than through std:: distributions, whose algorithms are implementation-defined,
/// so a seed reproduces the same values on every toolchain.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, bound). bound must be positive.
  std::uint64_t uniform_index(std::uint64_t bound);

  double gaussian(double mean, double std);

  // Fisher-Yates permutation of 0..n-1.
  std::vector<std::size_t> permutation(std::size_t n);

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Derives an independent stream seed from a base seed and a stream index (splitmix64 finalizer).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

/// count i.i.d. draws from N(mean, std^2). Throws InvalidArgument for std < 0.
std::vector<double> gaussian_sample(SeededRng& rng, double mean, double std, std::size_t count);

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }
  double* data() noexcept { return data_.data(); }
  const double* data() const noexcept { return data_.data(); }

  void fill(double v);

  static Matrix identity(std::size_t n);

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix transpose(const Matrix& m);

// c += a * b
void gemm_accumulate(const Matrix& a, const Matrix& b, Matrix& c);
// c += a^T * b
void gemm_tn_accumulate(const Matrix& a, const Matrix& b, Matrix& c);

std::vector<double> matvec(const Matrix& m, std::span<const double> v);
std::vector<double> matvec_transposed(const Matrix& m, std::span<const double> v);

double vector_l2_norm(std::span<const double> v);

inline constexpr std::uint64_t kPowerIterationSeed = 0x9e3779b97f4a7c15ULL;

/// Largest singular value of `m` by power iteration on m^T m, started from a
/// fixed-seed Gaussian vector; returns sqrt of the final Rayleigh quotient.
/// Throws InvalidArgument for an empty matrix or iterations < 1.
double power_iteration_spectral_norm(const Matrix& m, int iterations = 10,
                                     std::uint64_t seed = kPowerIterationSeed);

}  // namespace fplab
