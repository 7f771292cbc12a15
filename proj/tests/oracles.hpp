#pragma once

// Reference implementations that share no code with the library solvers.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

namespace oracle {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Projected gradient on min 1/2 u'Qu - b'u, |u_j| <= box_j, step 1/lambda_max(Q).
inline Vector box_qp_projected_gradient(const Matrix& q, const Vector& b, const Vector& box,
                                        long max_iter = 1000000, double step_tol = 1e-15) {
  const Index m = q.rows();
  Vector u = Vector::Zero(m);
  if (m == 0) return u;
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (q + q.transpose()), Eigen::EigenvaluesOnly);
  const double lmax = std::max(es.eigenvalues().maxCoeff(), 1e-300);
  const double step = 1.0 / lmax;
  for (long it = 0; it < max_iter; ++it) {
    Vector next = u - step * (q * u - b);
    next = next.cwiseMax(-box).cwiseMin(box);
    const double change = (next - u).lpNorm<Eigen::Infinity>();
    u = next;
    if (change <= step_tol) break;
  }
  return u;
}

/// Exact 1D total-variation denoising
///   argmin 1/2 ||y - beta||^2 + lambda sum_i |beta_{i+1} - beta_i|
/// by enumerating every jump set and sign pattern. The solution is unique;
/// the candidate satisfying the optimality conditions is returned.
///
/// With fixed jump set and signs, each segment g takes the value
/// mean(y_g) + lambda (s_right - s_left) / |g|. The candidate is optimal iff
/// the partial sums u_e = sum_{i<=e} (y_i - beta_i) satisfy |u_e| <= lambda,
/// u_e = -lambda s_e on jump edges, and total sum zero.
inline std::optional<Vector> tv1d_exact(const Vector& y, double lambda, double kkt_tol = 1e-9) {
  const int p = static_cast<int>(y.size());
  const int m = p - 1;
  for (std::uint32_t jumps = 0; jumps < (1u << m); ++jumps) {
    std::vector<int> jump_edges;
    for (int e = 0; e < m; ++e)
      if (jumps & (1u << e)) jump_edges.push_back(e);
    const int j = static_cast<int>(jump_edges.size());
    for (std::uint32_t signs = 0; signs < (1u << j); ++signs) {
      std::vector<double> s(j);
      for (int t = 0; t < j; ++t) s[t] = (signs & (1u << t)) ? 1.0 : -1.0;
      Vector beta(p);
      int start = 0;
      bool consistent = true;
      std::vector<double> levels;
      for (int g = 0; g <= j; ++g) {
        const int end = g < j ? jump_edges[g] : p - 1;  // inclusive
        const double s_left = g > 0 ? s[g - 1] : 0.0;
        const double s_right = g < j ? s[g] : 0.0;
        const double len = end - start + 1;
        const double mean = y.segment(start, end - start + 1).sum() / len;
        const double c = mean + lambda * (s_right - s_left) / len;
        levels.push_back(c);
        beta.segment(start, end - start + 1).setConstant(c);
        start = end + 1;
      }
      for (int t = 0; t < j && consistent; ++t) {
        const double d = levels[t + 1] - levels[t];
        if (!(d * s[t] > 0.0)) consistent = false;
      }
      if (!consistent) continue;
      double cum = 0.0;
      bool ok = true;
      int next_jump = 0;
      for (int e = 0; e < m && ok; ++e) {
        cum += y(e) - beta(e);
        if (std::abs(cum) > lambda + kkt_tol) ok = false;
        if (next_jump < j && jump_edges[next_jump] == e) {
          if (std::abs(cum + lambda * s[next_jump]) > kkt_tol) ok = false;
          ++next_jump;
        }
      }
      cum += y(p - 1) - beta(p - 1);
      if (std::abs(cum) > kkt_tol) ok = false;
      if (ok) return beta;
    }
  }
  return std::nullopt;
}

/// Penalized least squares objective 1/2||y - X b||^2 + sum_j r_j |(A b)_j| + l2 ||B b||^2.
inline double objective(const Matrix& x, const Vector& y, const Matrix& a, const Vector& radii, const Matrix& bmat,
                        double l2, const Vector& beta) {
  double v = 0.5 * (y - x * beta).squaredNorm();
  if (a.rows() > 0) v += radii.dot((a * beta).cwiseAbs());
  if (bmat.rows() > 0) v += l2 * (bmat * beta).squaredNorm();
  return v;
}

/// Indices of connected components by union-find.
inline int count_components(int p, const std::vector<std::pair<int, int>>& edges) {
  std::vector<int> parent(p);
  for (int i = 0; i < p; ++i) parent[i] = i;
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  int comps = p;
  for (auto [a, b] : edges) {
    const int ra = find(a), rb = find(b);
    if (ra != rb) {
      parent[ra] = rb;
      --comps;
    }
  }
  return comps;
}

/// Random symmetric PSD matrix G G^T / cols with G m x cols.
inline Matrix random_psd(int m, int cols, std::mt19937_64& gen) {
  std::normal_distribution<double> nd;
  Matrix g(m, cols);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < cols; ++j) g(i, j) = nd(gen);
  return g * g.transpose() / static_cast<double>(cols);
}

inline Matrix random_matrix(int rows, int cols, std::mt19937_64& gen) {
  std::normal_distribution<double> nd;
  Matrix g(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) g(i, j) = nd(gen);
  return g;
}

inline Vector random_vector(int n, std::mt19937_64& gen) {
  std::normal_distribution<double> nd;
  Vector v(n);
  for (int i = 0; i < n; ++i) v(i) = nd(gen);
  return v;
}

}  // namespace oracle
