#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "genet/error.hpp"

namespace genet {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// ---------------------------------------------------------------------------
// Random numbers
// ---------------------------------------------------------------------------

/// Deterministic generator used by every stochastic routine.
///
/// The standard library distributions are implementation-defined, so uniform
/// and normal variates are derived here directly from the 64-bit output of
/// mt19937_64. Identical seeds give identical streams on every platform.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed = 0) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform integer on [0, bound), unbiased by rejection.
  std::uint64_t uniform_index(std::uint64_t bound) {
    if (bound == 0) throw ValidationError("uniform_index: bound must be positive");
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t draw = engine_();
    while (draw >= limit) draw = engine_();
    return draw % bound;
  }

  /// Standard normal via Box-Muller; the second variate of each pair is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  /// Seed for an independent worker stream (splitmix64 of seed and index).
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

inline Vector standard_normal_vector(Index n, SeededRng& rng) {
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = rng.normal();
  return v;
}

// ---------------------------------------------------------------------------
// Dense linear algebra
// ---------------------------------------------------------------------------

inline bool all_finite(const Eigen::Ref<const Matrix>& m) {
  return m.array().isFinite().all();
}

/// Thin SVD truncated at a relative singular-value cutoff.
struct TruncatedSvd {
  Matrix u;       // rows x rank
  Vector sigma;   // rank
  Matrix v;       // cols x rank
  Index rank = 0;
  Index cols = 0;

  Index kernel_dim() const { return cols - rank; }
};

inline TruncatedSvd truncated_svd(const Eigen::Ref<const Matrix>& m, double rel_tol = 1e-10) {
  detail::require(all_finite(m), "svd: matrix has non-finite entries");
  TruncatedSvd out;
  out.cols = m.cols();
  if (m.rows() == 0 || m.cols() == 0) {
    out.u = Matrix(m.rows(), 0);
    out.sigma = Vector(0);
    out.v = Matrix(m.cols(), 0);
    return out;
  }
  Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) throw ConvergenceError("svd did not converge");
  const Vector& s = svd.singularValues();
  const double cutoff = (s.size() > 0 ? s(0) : 0.0) * rel_tol;
  Index rank = 0;
  while (rank < s.size() && s(rank) > cutoff && s(rank) > 0.0) ++rank;
  out.rank = rank;
  out.u = svd.matrixU().leftCols(rank);
  out.sigma = s.head(rank);
  out.v = svd.matrixV().leftCols(rank);
  return out;
}

/// Moore-Penrose pseudoinverse; singular values below rel_tol * sigma_max count as zero.
inline Matrix pseudoinverse(const Eigen::Ref<const Matrix>& m, double rel_tol = 1e-10) {
  const TruncatedSvd svd = truncated_svd(m, rel_tol);
  if (svd.rank == 0) return Matrix::Zero(m.cols(), m.rows());
  return svd.v * svd.sigma.cwiseInverse().asDiagonal() * svd.u.transpose();
}

inline Vector symmetric_eigenvalues(const Eigen::Ref<const Matrix>& m) {
  detail::require(m.rows() == m.cols(), "eigenvalues: matrix must be square");
  detail::require(all_finite(m), "eigenvalues: matrix has non-finite entries");
  if (m.rows() == 0) return Vector(0);
  const Matrix sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw ConvergenceError("eigensolver did not converge");
  return solver.eigenvalues();
}

/// Smallest eigenvalue of (M + M^T) / 2.
inline double min_eigenvalue_sym(const Eigen::Ref<const Matrix>& m) {
  const Vector ev = symmetric_eigenvalues(m);
  detail::require(ev.size() > 0, "min_eigenvalue_sym: empty matrix");
  return ev(0);
}

inline double max_eigenvalue_sym(const Eigen::Ref<const Matrix>& m) {
  const Vector ev = symmetric_eigenvalues(m);
  detail::require(ev.size() > 0, "max_eigenvalue_sym: empty matrix");
  return ev(ev.size() - 1);
}

/// Symmetric PSD square root R with R * R^T = M; negative eigenvalues clipped to 0.
inline Matrix psd_sqrt(const Eigen::Ref<const Matrix>& m) {
  detail::require(m.rows() == m.cols(), "psd_sqrt: matrix must be square");
  if (m.rows() == 0) return Matrix(0, 0);
  const Matrix sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
  if (solver.info() != Eigen::Success) throw ConvergenceError("eigensolver did not converge");
  const Vector root = solver.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return solver.eigenvectors() * root.asDiagonal() * solver.eigenvectors().transpose();
}

// ---------------------------------------------------------------------------
// Covariance construction
// ---------------------------------------------------------------------------

enum class CovarianceKind { identity, toeplitz, laplacian_inverse, custom };

inline const char* to_string(CovarianceKind kind) {
  switch (kind) {
    case CovarianceKind::identity: return "identity";
    case CovarianceKind::toeplitz: return "toeplitz";
    case CovarianceKind::laplacian_inverse: return "laplacian_inverse";
    case CovarianceKind::custom: return "custom";
  }
  return "unknown";
}

struct CovarianceMatrix {
  Matrix values;
  CovarianceKind kind = CovarianceKind::custom;
  double parameter = 0.0;  // rho for toeplitz, c for laplacian_inverse

  Index dim() const { return values.rows(); }
};

namespace detail {

inline constexpr double kEigenClip = 1e-10;

// Symmetrize and clip tiny negative eigenvalues produced by round-off.
inline Matrix clip_psd(const Matrix& m) {
  Matrix sym = 0.5 * (m + m.transpose());
  if (sym.rows() == 0) return sym;
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
  const Vector& ev = solver.eigenvalues();
  if (ev(0) >= 0.0) return sym;
  require(ev(0) >= -kEigenClip * std::max(1.0, ev(ev.size() - 1)),
          "covariance: matrix is not positive semidefinite");
  const Vector clipped = ev.cwiseMax(0.0);
  sym = solver.eigenvectors() * clipped.asDiagonal() * solver.eigenvectors().transpose();
  return 0.5 * (sym + sym.transpose());
}

}  // namespace detail

inline CovarianceMatrix identity_covariance(Index p) {
  detail::require(p >= 1, "identity covariance: p must be positive");
  return {Matrix::Identity(p, p), CovarianceKind::identity, 0.0};
}

/// Sigma_ij = rho^|i-j|.
inline CovarianceMatrix toeplitz_covariance(Index p, double rho) {
  detail::require(p >= 1, "toeplitz covariance: p must be positive");
  detail::require(std::abs(rho) < 1.0, "toeplitz covariance: |rho| must be < 1");
  Matrix s(p, p);
  for (Index i = 0; i < p; ++i)
    for (Index j = 0; j < p; ++j)
      s(i, j) = (i == j) ? 1.0 : std::pow(rho, static_cast<double>(std::abs(i - j)));
  return {s, CovarianceKind::toeplitz, rho};
}

/// D^{-1/2} (L + cI)^{-1} D^{-1/2} with D = diag((L + cI)^{-1}); unit diagonal.
inline CovarianceMatrix laplacian_inverse_covariance(const Eigen::Ref<const Matrix>& laplacian,
                                                     double c) {
  detail::require(laplacian.rows() == laplacian.cols() && laplacian.rows() >= 1,
                  "laplacian_inverse covariance: laplacian must be square and nonempty");
  detail::require(c > 0.0, "laplacian_inverse covariance: c must be positive");
  const Index p = laplacian.rows();
  const Matrix shifted = laplacian + c * Matrix::Identity(p, p);
  Matrix inv = shifted.ldlt().solve(Matrix::Identity(p, p));
  inv = detail::clip_psd(inv);
  const Vector scale = inv.diagonal().cwiseSqrt().cwiseInverse();
  Matrix s = scale.asDiagonal() * inv * scale.asDiagonal();
  s = 0.5 * (s + s.transpose());
  s.diagonal().setOnes();
  return {s, CovarianceKind::laplacian_inverse, c};
}

inline CovarianceMatrix custom_covariance(const Matrix& values) {
  detail::require(values.rows() == values.cols() && values.rows() >= 1,
                  "custom covariance: matrix must be square and nonempty");
  detail::require(all_finite(values), "custom covariance: non-finite entries");
  detail::require((values - values.transpose()).cwiseAbs().maxCoeff() <= 1e-8,
                  "custom covariance: matrix is not symmetric");
  return {detail::clip_psd(values), CovarianceKind::custom, 0.0};
}

// ---------------------------------------------------------------------------
// Gaussian sampling
// ---------------------------------------------------------------------------

/// Draws rows i.i.d. N(0, Sigma) through the eigen square root of Sigma,
/// so singular covariances are handled. Caches the factor across draws.
class GaussianSampler {
 public:
  explicit GaussianSampler(const Matrix& sigma) : root_(psd_sqrt(sigma)) {}
  explicit GaussianSampler(const CovarianceMatrix& sigma) : GaussianSampler(sigma.values) {}

  Index dim() const { return root_.rows(); }
  const Matrix& root() const { return root_; }

  /// Standard normals are consumed in row-major order.
  Matrix sample(Index n, SeededRng& rng) const {
    const Index p = dim();
    Matrix z(n, p);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < p; ++j) z(i, j) = rng.normal();
    return z * root_;  // root_ is symmetric
  }

 private:
  Matrix root_;
};

inline Matrix sample_gaussian_rows(Index n, const CovarianceMatrix& sigma, SeededRng& rng) {
  detail::require(n >= 1, "sample_gaussian_rows: n must be positive");
  return GaussianSampler(sigma).sample(n, rng);
}

// ---------------------------------------------------------------------------
// Scalar transforms
// ---------------------------------------------------------------------------

/// Variance-stabilizing transform for Poisson counts.
inline double anscombe(double x) {
  detail::require(std::isfinite(x) && x >= 0.0, "anscombe: input must be a nonnegative count");
  return 2.0 * std::sqrt(x + 3.0 / 8.0);
}

// ---------------------------------------------------------------------------
// Matrix CSV: comma separated, one row per line, no header.
// ---------------------------------------------------------------------------

inline Matrix parse_matrix_csv(std::istream& in, const std::string& source = "<stream>") {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        const double value = std::stod(cell, &used);
        if (cell.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(cell);
        row.push_back(value);
      } catch (const std::exception&) {
        throw IoError(source + ":" + std::to_string(line_no) + ": cannot parse '" + cell + "'");
      }
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw IoError(source + ":" + std::to_string(line_no) + ": ragged row");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) return Matrix(0, 0);
  Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) m(i, j) = rows[i][j];
  return m;
}

inline Matrix read_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return parse_matrix_csv(in, path);
}

/// Accepts a single column or a single row.
inline Vector read_vector_csv(const std::string& path) {
  const Matrix m = read_matrix_csv(path);
  if (m.cols() == 1) return m.col(0);
  if (m.rows() == 1) return m.row(0).transpose();
  if (m.size() == 0) return Vector(0);
  throw IoError(path + ": expected a single row or column");
}

inline void write_matrix_csv(std::ostream& out, const Eigen::Ref<const Matrix>& m) {
  out << std::setprecision(17);
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << m(i, j);
    }
    out << '\n';
  }
}

inline void write_matrix_csv(const std::string& path, const Eigen::Ref<const Matrix>& m) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  write_matrix_csv(out, m);
}

}  // namespace genet
