#pragma once

// Lazy, unbounded fractal graphs: the doubly-infinite Sierpinski gasket, the
// one-sided gasket and a one-quadrant graphical Sierpinski carpet.
//
// Gasket vertices use skewed integer coordinates (u, v). The planar embedding
// is x = u + v/2, y = v*sqrt(3)/2, so the unit triangle {(0,0),(1,0),(0,1)}
// is the equilateral base cell. A unit up-triangle anchored at (a, b) is part
// of the positive gasket iff a, b >= 0 and (a & b) == 0 (Pascal's triangle
// mod 2). The doubly-infinite gasket is the positive copy glued at the origin
// to its point reflection v -> -v.

#include <array>
#include <cmath>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace sgidla {

struct Vertex {
  std::int64_t u = 0;
  std::int64_t v = 0;

  constexpr Vertex operator-() const { return {-u, -v}; }
  constexpr Vertex operator+(const Vertex& o) const { return {u + o.u, v + o.v}; }
  friend constexpr auto operator<=>(const Vertex&, const Vertex&) = default;
};

inline constexpr Vertex kOrigin{0, 0};

struct VertexHash {
  std::size_t operator()(const Vertex& x) const noexcept {
    // splitmix64 finalizer over the packed pair
    std::uint64_t h = static_cast<std::uint64_t>(x.u) * 0x9E3779B97F4A7C15ULL ^
                      static_cast<std::uint64_t>(x.v);
    h ^= h >> 30;
    h *= 0xBF58476D1CE4E5B9ULL;
    h ^= h >> 27;
    h *= 0x94D049BB133111EBULL;
    h ^= h >> 31;
    return static_cast<std::size_t>(h);
  }
};

template <typename T>
using VertexMap = std::unordered_map<Vertex, T, VertexHash>;

std::string to_string(const Vertex& x);

enum class GraphFamily { GasketTwoSided, GasketOneSided, CarpetQuadrant };

/// Short names used on the command line and in files: "sg2", "sg1", "carpet".
std::string_view to_string(GraphFamily kind);
GraphFamily parse_graph_family(std::string_view name);

namespace constants {
/// Volume growth exponent, |B(n)| ~ n^alpha.
inline const double alpha = std::log(3.0) / std::log(2.0);
/// Walk dimension, E[exit time of B(n)] ~ n^beta.
inline const double beta = std::log(5.0) / std::log(2.0);
/// Spectral dimension 2 alpha / beta.
inline const double spectral_dim = 2.0 * std::log(3.0) / std::log(5.0);
}  // namespace constants

inline constexpr std::size_t kMaxDegree = 4;
inline constexpr std::size_t kDefaultBallCap = 50'000'000;

/// Fixed-capacity neighbor list; iteration order is the deterministic
/// counterclockwise direction order used by rotor walks.
class NeighborList {
 public:
  void push_back(const Vertex& x) { items_[count_++] = x; }
  std::size_t size() const { return count_; }
  bool empty() const { return count_ == 0; }
  const Vertex& operator[](std::size_t i) const { return items_[i]; }
  const Vertex* begin() const { return items_.data(); }
  const Vertex* end() const { return items_.data() + count_; }
  bool contains(const Vertex& x) const;

 private:
  std::array<Vertex, kMaxDegree> items_{};
  std::size_t count_ = 0;
};

bool sg_contains(GraphFamily kind, const Vertex& x);

/// Neighbors of x. Gasket order is by direction (1,0), (0,1), (-1,1), (-1,0),
/// (0,-1), (1,-1); carpet order is (1,0), (0,1), (-1,0), (0,-1).
/// Throws InvalidVertexError if x is not a vertex.
NeighborList neighbors(GraphFamily kind, const Vertex& x);

std::size_t degree(GraphFamily kind, const Vertex& x);

/// Open metric ball B_x(n) = {y : d(x,y) < n} together with its outer
/// boundary {y : d(x,y) = n}. Both lists are ordered by BFS layer, then (u,v).
struct Ball {
  GraphFamily kind = GraphFamily::GasketTwoSided;
  Vertex center;
  int radius = 0;
  std::vector<Vertex> interior;
  std::vector<Vertex> boundary;
  /// interior[layer_start[d] .. layer_start[d+1]) are the vertices at distance d.
  std::vector<std::size_t> layer_start;
  /// Position of each interior vertex in `interior`.
  VertexMap<std::size_t> index;

  bool contains(const Vertex& x) const { return index.contains(x); }
  std::size_t size() const { return interior.size(); }
};

Ball ball(GraphFamily kind, const Vertex& center, int n, std::size_t cap = kDefaultBallCap);

/// |B_center(n)| without building the index map.
std::size_t ball_size(GraphFamily kind, const Vertex& center, int n,
                      std::size_t cap = kDefaultBallCap);

/// Counts |B_center(r)| for every r = 0..n_max in a single BFS. result[r] = b_r.
std::vector<std::size_t> ball_size_profile(GraphFamily kind, const Vertex& center, int n_max,
                                           std::size_t cap = kDefaultBallCap);

struct AnnulusBound {
  int n = 0;
  double eps = 0.0;
  int inner_radius = 0;  // ceil(n (1 - eps))
  std::size_t lhs = 0;   // b_n - b_inner
  double rhs = 0.0;      // 4 eps^(alpha - 1) b_n
  bool holds = false;
};

/// Annulus growth check b_n - b_{ceil(n(1-eps))} <= 4 eps^(alpha-1) b_n around
/// the origin. Requires 1/n <= eps < 1.
AnnulusBound annulus_bound_check(int n, double eps,
                                 GraphFamily kind = GraphFamily::GasketTwoSided);

/// Graph distance by bidirectional BFS; nullopt if it exceeds cap.
std::optional<int> graph_distance(GraphFamily kind, const Vertex& x, const Vertex& y, int cap);

/// ceil(x) that tolerates floating error just above an integer.
int ceil_radius(double x);

/// Incrementally indexed view of an infinite graph. Vertices receive dense
/// ids on first touch and neighbor ids are cached, so hot loops (walks,
/// sandpile sweeps) run on arrays instead of hash lookups.
class LocalGraph {
 public:
  using Id = std::uint32_t;

  explicit LocalGraph(GraphFamily kind);

  GraphFamily kind() const { return kind_; }
  std::size_t size() const { return vertices_.size(); }

  Id id_of(const Vertex& x);
  std::optional<Id> find(const Vertex& x) const;
  const Vertex& vertex(Id id) const { return vertices_[id]; }

  std::size_t degree(Id id) {
    expand(id);
    return nodes_[id].degree;
  }
  /// The i-th neighbor of id in deterministic order.
  Id neighbor(Id id, std::size_t i) {
    expand(id);
    return nodes_[id].nbr[i];
  }
  /// Valid until the next call that may insert vertices.
  std::span<const Id> neighbors(Id id) {
    expand(id);
    return {nodes_[id].nbr.data(), nodes_[id].degree};
  }

 private:
  struct Node {
    std::array<Id, kMaxDegree> nbr{};
    std::uint8_t degree = 0;
    bool expanded = false;
  };

  void expand(Id id) {
    if (!nodes_[id].expanded) expand_slow(id);
  }
  void expand_slow(Id id);

  GraphFamily kind_;
  std::vector<Vertex> vertices_;
  std::vector<Node> nodes_;
  VertexMap<Id> ids_;
};

}  // namespace sgidla
