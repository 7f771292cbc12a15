#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "genet/error.hpp"
#include "genet/numerics.hpp"

namespace genet {

struct Edge {
  Index first = 0;
  Index second = 0;

  Index low() const { return std::min(first, second); }
  Index high() const { return std::max(first, second); }
  friend bool operator==(const Edge&, const Edge&) = default;
};

enum class GraphKind { chain, grid, star, complete, barbell, custom };

inline const char* to_string(GraphKind kind) {
  switch (kind) {
    case GraphKind::chain: return "chain";
    case GraphKind::grid: return "grid";
    case GraphKind::star: return "star";
    case GraphKind::complete: return "complete";
    case GraphKind::barbell: return "barbell";
    case GraphKind::custom: return "custom";
  }
  return "unknown";
}

/// Simple undirected graph on vertices 0..p-1. Immutable after construction.
///
/// The constructor rejects out-of-range endpoints, self-loops and repeated
/// edges. `kind` and `shape` record how a generated graph was built (grid
/// dimensions, barbell clique size and path length) so that signal
/// generators can reason about its geometry.
class Graph {
 public:
  Graph(Index p, std::vector<Edge> edges, GraphKind kind = GraphKind::custom,
        std::vector<Index> shape = {})
      : p_(p), edges_(std::move(edges)), kind_(kind), shape_(std::move(shape)) {
    detail::require(p_ >= 1, "graph: vertex count must be positive");
    std::set<std::pair<Index, Index>> seen;
    for (const Edge& e : edges_) {
      detail::require(e.first >= 0 && e.first < p_ && e.second >= 0 && e.second < p_,
                      "graph: edge endpoint out of range");
      detail::require(e.first != e.second, "graph: self-loops are not allowed");
      detail::require(seen.emplace(e.low(), e.high()).second, "graph: repeated edge");
    }
  }

  Index num_vertices() const { return p_; }
  Index num_edges() const { return static_cast<Index>(edges_.size()); }
  const std::vector<Edge>& edges() const { return edges_; }
  GraphKind kind() const { return kind_; }
  const std::vector<Index>& shape() const { return shape_; }

  std::vector<Index> degrees() const {
    std::vector<Index> deg(static_cast<std::size_t>(p_), 0);
    for (const Edge& e : edges_) {
      ++deg[e.first];
      ++deg[e.second];
    }
    return deg;
  }

  Index max_degree() const {
    const auto deg = degrees();
    return deg.empty() ? 0 : *std::max_element(deg.begin(), deg.end());
  }

  /// Component label per vertex, labels 0..nc-1 in order of first vertex.
  std::vector<Index> component_labels() const {
    std::vector<std::vector<Index>> adj(static_cast<std::size_t>(p_));
    for (const Edge& e : edges_) {
      adj[e.first].push_back(e.second);
      adj[e.second].push_back(e.first);
    }
    std::vector<Index> label(static_cast<std::size_t>(p_), -1);
    Index next = 0;
    std::vector<Index> stack;
    for (Index s = 0; s < p_; ++s) {
      if (label[s] >= 0) continue;
      label[s] = next;
      stack.push_back(s);
      while (!stack.empty()) {
        const Index v = stack.back();
        stack.pop_back();
        for (Index w : adj[v])
          if (label[w] < 0) {
            label[w] = next;
            stack.push_back(w);
          }
      }
      ++next;
    }
    return label;
  }

  Index num_components() const {
    const auto label = component_labels();
    return label.empty() ? 0 : *std::max_element(label.begin(), label.end()) + 1;
  }

 private:
  Index p_;
  std::vector<Edge> edges_;
  GraphKind kind_;
  std::vector<Index> shape_;
};

// ---------------------------------------------------------------------------
// Constructors. Edge enumeration is canonical so matrices are reproducible.
// ---------------------------------------------------------------------------

/// Edges (i, i+1).
inline Graph chain_graph(Index p) {
  detail::require(p >= 1, "chain graph: p must be >= 1");
  std::vector<Edge> edges;
  for (Index i = 0; i + 1 < p; ++i) edges.push_back({i, i + 1});
  return Graph(p, std::move(edges), GraphKind::chain, {p});
}

/// Lattice with row-major vertex numbering (last axis fastest). Edges are
/// listed axis by axis; within an axis, in row-major order of the lower endpoint.
inline Graph grid_graph(const std::vector<Index>& dims) {
  detail::require(!dims.empty(), "grid graph: at least one dimension required");
  for (Index d : dims) detail::require(d >= 1, "grid graph: dimension sizes must be >= 1");
  const std::size_t r = dims.size();
  std::vector<Index> stride(r, 1);
  for (std::size_t a = r - 1; a > 0; --a) stride[a - 1] = stride[a] * dims[a];
  const Index p = stride[0] * dims[0];
  std::vector<Edge> edges;
  std::vector<Index> coord(r, 0);
  for (std::size_t axis = 0; axis < r; ++axis) {
    for (Index v = 0; v < p; ++v) {
      Index rest = v;
      for (std::size_t a = 0; a < r; ++a) {
        coord[a] = rest / stride[a];
        rest %= stride[a];
      }
      if (coord[axis] + 1 < dims[axis]) edges.push_back({v, v + stride[axis]});
    }
  }
  return Graph(p, std::move(edges), GraphKind::grid, dims);
}

/// Center is vertex 0; edges (0, j).
inline Graph star_graph(Index p) {
  detail::require(p >= 2, "star graph: p must be >= 2");
  std::vector<Edge> edges;
  for (Index j = 1; j < p; ++j) edges.push_back({0, j});
  return Graph(p, std::move(edges), GraphKind::star, {p});
}

/// All pairs in lexicographic order.
inline Graph complete_graph(Index p) {
  detail::require(p >= 1, "complete graph: p must be >= 1");
  std::vector<Edge> edges;
  for (Index i = 0; i < p; ++i)
    for (Index j = i + 1; j < p; ++j) edges.push_back({i, j});
  return Graph(p, std::move(edges), GraphKind::complete, {p});
}

/// Two k-cliques joined by a path of `path_edges` edges.
///
/// Clique A occupies [0, k), clique B occupies [p-k, p), and the path runs
/// from vertex k-1 through the interior vertices k .. p-k-1 to vertex p-k,
/// so p = 2k + path_edges - 1. Edges: clique A, then the path, then clique B.
inline Graph barbell_graph(Index k, Index path_edges) {
  detail::require(k >= 2, "barbell graph: clique size must be >= 2");
  detail::require(path_edges >= 1, "barbell graph: path length must be >= 1");
  const Index p = 2 * k + path_edges - 1;
  std::vector<Edge> edges;
  for (Index i = 0; i < k; ++i)
    for (Index j = i + 1; j < k; ++j) edges.push_back({i, j});
  for (Index v = k - 1; v < p - k; ++v) edges.push_back({v, v + 1});
  for (Index i = p - k; i < p; ++i)
    for (Index j = i + 1; j < p; ++j) edges.push_back({i, j});
  return Graph(p, std::move(edges), GraphKind::barbell, {k, path_edges});
}

/// Dispatch by kind. Parameters: chain/star/complete {p}; grid {d1, ..., dr};
/// barbell {k, path_edges}.
inline Graph build_graph(GraphKind kind, const std::vector<Index>& params) {
  auto single = [&](const char* name) {
    detail::require(params.size() == 1, std::string(name) + " graph takes one parameter (p)");
    return params[0];
  };
  switch (kind) {
    case GraphKind::chain: return chain_graph(single("chain"));
    case GraphKind::star: return star_graph(single("star"));
    case GraphKind::complete: return complete_graph(single("complete"));
    case GraphKind::grid: return grid_graph(params);
    case GraphKind::barbell:
      detail::require(params.size() == 2, "barbell graph takes two parameters (k, path length)");
      return barbell_graph(params[0], params[1]);
    case GraphKind::custom: break;
  }
  throw ValidationError("build_graph: custom graphs must be read from an edge list");
}

inline GraphKind parse_graph_kind(const std::string& name) {
  if (name == "chain") return GraphKind::chain;
  if (name == "grid") return GraphKind::grid;
  if (name == "star") return GraphKind::star;
  if (name == "complete") return GraphKind::complete;
  if (name == "barbell") return GraphKind::barbell;
  throw ValidationError("unknown graph kind '" + name + "'");
}

/// Parses "chain:10", "grid:5x5", "star:4", "complete:6", "barbell:3,4".
inline Graph parse_graph_preset(const std::string& text) {
  const auto colon = text.find(':');
  detail::require(colon != std::string::npos, "graph preset must look like kind:params");
  const GraphKind kind = parse_graph_kind(text.substr(0, colon));
  std::vector<Index> params;
  std::string token;
  for (char ch : text.substr(colon + 1) + ",") {
    if (ch == ',' || ch == 'x') {
      detail::require(!token.empty(), "graph preset: empty parameter in '" + text + "'");
      try {
        std::size_t used = 0;
        const long long value = std::stoll(token, &used);
        detail::require(used == token.size(), "graph preset: bad integer '" + token + "'");
        params.push_back(static_cast<Index>(value));
      } catch (const std::logic_error&) {
        throw ValidationError("graph preset: bad integer '" + token + "'");
      }
      token.clear();
    } else {
      token.push_back(ch);
    }
  }
  return build_graph(kind, params);
}

inline bool looks_like_graph_preset(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) return false;
  const std::string head = text.substr(0, colon);
  return head == "chain" || head == "grid" || head == "star" || head == "complete" ||
         head == "barbell";
}

// ---------------------------------------------------------------------------
// Edge-list text format: one "i j" pair per line, 0-based, '#' comments.
// ---------------------------------------------------------------------------

/// Reads an edge list. When `p` is omitted the vertex count is max index + 1.
inline Graph parse_edge_list(std::istream& in, std::optional<Index> p = std::nullopt,
                             const std::string& source = "<stream>") {
  std::vector<Edge> edges;
  std::string line;
  std::size_t line_no = 0;
  Index max_index = -1;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    long long i = 0, j = 0;
    if (!(ss >> i)) continue;
    std::string extra;
    if (!(ss >> j) || (ss >> extra))
      throw IoError(source + ":" + std::to_string(line_no) + ": expected 'i j'");
    if (i < 0 || j < 0)
      throw ValidationError(source + ":" + std::to_string(line_no) + ": negative vertex index");
    edges.push_back({static_cast<Index>(i), static_cast<Index>(j)});
    max_index = std::max({max_index, static_cast<Index>(i), static_cast<Index>(j)});
  }
  const Index vertices = p.value_or(max_index + 1);
  return Graph(vertices, std::move(edges));
}

inline Graph read_edge_list(const std::string& path, std::optional<Index> p = std::nullopt) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return parse_edge_list(in, p, path);
}

inline void write_edge_list(std::ostream& out, const Graph& g) {
  out << "# " << g.num_vertices() << " vertices, " << g.num_edges() << " edges\n";
  for (const Edge& e : g.edges()) out << e.first << ' ' << e.second << '\n';
}

// ---------------------------------------------------------------------------
// Graph operators
// ---------------------------------------------------------------------------

/// m x p signed incidence matrix: +1 at the smaller endpoint, -1 at the larger.
inline Matrix incidence_matrix(const Graph& g) {
  Matrix gamma = Matrix::Zero(g.num_edges(), g.num_vertices());
  for (Index r = 0; r < g.num_edges(); ++r) {
    const Edge& e = g.edges()[static_cast<std::size_t>(r)];
    gamma(r, e.low()) = 1.0;
    gamma(r, e.high()) = -1.0;
  }
  return gamma;
}

/// Degree minus adjacency, assembled edge by edge (equals Gamma^T Gamma exactly).
inline Matrix laplacian(const Graph& g) {
  Matrix lap = Matrix::Zero(g.num_vertices(), g.num_vertices());
  for (const Edge& e : g.edges()) {
    lap(e.first, e.first) += 1.0;
    lap(e.second, e.second) += 1.0;
    lap(e.first, e.second) -= 1.0;
    lap(e.second, e.first) -= 1.0;
  }
  return lap;
}

inline CovarianceMatrix laplacian_inverse_covariance(const Graph& g, double c) {
  return laplacian_inverse_covariance(laplacian(g), c);
}

struct GraphSpectra {
  Matrix laplacian;          // p x p
  Matrix pinv_incidence;     // p x m
  Matrix kernel_projection;  // p x p, projector onto ker(Gamma)
  Index n_components = 0;
  Index max_degree = 0;
  double rho = 0.0;          // max column norm of the pseudoinverse
};

inline GraphSpectra graph_spectra(const Graph& g, double svd_tol = 1e-10) {
  detail::require(svd_tol > 0.0 && svd_tol < 1.0, "graph_spectra: svd_tol must be in (0, 1)");
  const Index p = g.num_vertices();
  const Index m = g.num_edges();
  GraphSpectra out;
  out.laplacian = laplacian(g);
  out.max_degree = g.max_degree();
  if (m == 0) {
    out.pinv_incidence = Matrix(p, 0);
    out.kernel_projection = Matrix::Identity(p, p);
    out.n_components = p;
    return out;
  }
  const TruncatedSvd svd = truncated_svd(incidence_matrix(g), svd_tol);
  out.pinv_incidence = svd.v * svd.sigma.cwiseInverse().asDiagonal() * svd.u.transpose();
  out.kernel_projection = Matrix::Identity(p, p) - svd.v * svd.v.transpose();
  out.n_components = p - svd.rank;
  out.rho = out.pinv_incidence.colwise().norm().maxCoeff();
  return out;
}

/// sqrt(|S|) ||beta||_2 / ||(Gamma beta)_S||_1 -- an upper bound on k_S for every beta.
inline double compatibility_ratio(const Graph& g, const std::vector<Index>& edge_subset,
                                  const Eigen::Ref<const Vector>& beta) {
  detail::require(!edge_subset.empty(), "compatibility_ratio: edge subset must be nonempty");
  detail::require(beta.size() == g.num_vertices(), "compatibility_ratio: beta has wrong length");
  std::set<Index> unique(edge_subset.begin(), edge_subset.end());
  detail::require(unique.size() == edge_subset.size(), "compatibility_ratio: repeated edge index");
  double l1 = 0.0;
  for (Index j : unique) {
    detail::require(j >= 0 && j < g.num_edges(), "compatibility_ratio: edge index out of range");
    const Edge& e = g.edges()[static_cast<std::size_t>(j)];
    l1 += std::abs(beta(e.low()) - beta(e.high()));
  }
  if (l1 == 0.0) throw ValidationError("compatibility_ratio: (Gamma beta)_S is zero");
  return std::sqrt(static_cast<double>(unique.size())) * beta.norm() / l1;
}

/// The lower bound 1 / (2 sqrt(min(d, |S|))) implied by k_S^{-2} <= 4 min(d, |S|).
inline double compatibility_lower_bound(const Graph& g, Index subset_size) {
  const Index d = std::min(g.max_degree(), subset_size);
  detail::require(d >= 1, "compatibility_lower_bound: degenerate graph or subset");
  return 1.0 / (2.0 * std::sqrt(static_cast<double>(d)));
}

}  // namespace genet
