#pragma once

// Geodesic distances as shortest paths on a Steiner-refined edge graph:
// every mesh edge carries k-1 interior points, and the boundary points of
// each flat triangle are joined by straight chords. Path lengths
// over-approximate the polyhedral geodesic distance and converge as k and
// the mesh are refined.

#include <algorithm>
#include <functional>
#include <limits>
#include <memory>
#include <queue>
#include <span>
#include <thread>
#include <utility>
#include <vector>

#include "maxgraph/error.hpp"
#include "maxgraph/mesh.hpp"

namespace maxgraph {

struct DistanceField {
  int source = -1;  // -1 for multi-source fields
  std::vector<double> values;

  double operator[](int v) const { return values[v]; }
};

class GeodesicGraph {
 public:
  static constexpr int kDefaultSubdivisions = 6;

  explicit GeodesicGraph(const SurfaceMesh& mesh, int subdivisions = kDefaultSubdivisions)
      : vertex_count_(mesh.vertex_count()), subdivisions_(subdivisions) {
    if (subdivisions < 1) throw Error(ErrorCode::invalid_parameter, "Steiner subdivision count must be >= 1");
    const int inner = subdivisions - 1;
    const int node_count = mesh.vertex_count() + inner * mesh.edge_count();

    struct Link {
      int a, b;
      double w;
    };
    std::vector<Link> links;
    links.reserve(static_cast<std::size_t>(mesh.edge_count()) * subdivisions +
                  static_cast<std::size_t>(mesh.triangle_count()) * 3 * (inner + 1) * (inner + 1));

    auto steiner = [&](int e, int s) { return mesh.vertex_count() + inner * e + s; };

    // Segments along each edge.
    for (int e = 0; e < mesh.edge_count(); ++e) {
      const double w = mesh.edge_lengths()[e] / subdivisions;
      int prev = mesh.edges()[e][0];
      for (int s = 0; s < inner; ++s) {
        links.push_back({prev, steiner(e, s), w});
        prev = steiner(e, s);
      }
      links.push_back({prev, mesh.edges()[e][1], w});
    }

    // Chords between boundary points of each triangle lying on different edges.
    struct Point {
      int node;
      Eigen::Vector2d x;
    };
    std::array<std::vector<Point>, 3> on_edge;  // interior points of edge k
    for (int t = 0; t < mesh.triangle_count(); ++t) {
      const auto& tri = mesh.triangle(t);
      const auto& c = mesh.geometry(t).frame.corners;
      for (int k = 0; k < 3; ++k) {
        on_edge[k].clear();
        const int e = mesh.triangle_edges(t)[k];
        const bool forward = mesh.edges()[e][0] == tri[k];
        for (int s = 0; s < inner; ++s) {
          double lambda = static_cast<double>(s + 1) / subdivisions;
          if (!forward) lambda = 1.0 - lambda;
          on_edge[k].push_back({steiner(e, s), (1.0 - lambda) * c[k] + lambda * c[(k + 1) % 3]});
        }
      }
      for (int k = 0; k < 3; ++k) {
        // corner opposite edge k is corner (k+2)
        const int opp = (k + 2) % 3;
        for (const auto& p : on_edge[k]) links.push_back({tri[opp], p.node, (p.x - c[opp]).norm()});
        for (const auto& p : on_edge[k])
          for (const auto& q : on_edge[(k + 1) % 3]) links.push_back({p.node, q.node, (p.x - q.x).norm()});
      }
    }

    offsets_.assign(node_count + 1, 0);
    for (const auto& l : links) {
      ++offsets_[l.a + 1];
      ++offsets_[l.b + 1];
    }
    for (int i = 0; i < node_count; ++i) offsets_[i + 1] += offsets_[i];
    targets_.resize(offsets_[node_count]);
    weights_.resize(offsets_[node_count]);
    std::vector<int> fill(offsets_.begin(), offsets_.end() - 1);
    for (const auto& l : links) {
      targets_[fill[l.a]] = l.b;
      weights_[fill[l.a]++] = l.w;
      targets_[fill[l.b]] = l.a;
      weights_[fill[l.b]++] = l.w;
    }
  }

  int node_count() const noexcept { return static_cast<int>(offsets_.size()) - 1; }
  int vertex_count() const noexcept { return vertex_count_; }
  int subdivisions() const noexcept { return subdivisions_; }

  /// Multi-source Dijkstra; returns distances at the mesh vertices.
  /// Each source carries a starting offset.
  std::vector<double> vertex_distances(std::span<const std::pair<int, double>> sources) const {
    const int n = node_count();
    std::vector<double> dist(n, std::numeric_limits<double>::infinity());
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    for (const auto& [node, offset] : sources) {
      if (node < 0 || node >= vertex_count_) throw Error(ErrorCode::invalid_parameter, "source is not a vertex id");
      if (offset < dist[node]) {
        dist[node] = offset;
        heap.emplace(offset, node);
      }
    }
    while (!heap.empty()) {
      const auto [d, u] = heap.top();
      heap.pop();
      if (d > dist[u]) continue;
      for (int i = offsets_[u]; i < offsets_[u + 1]; ++i) {
        const double nd = d + weights_[i];
        const int v = targets_[i];
        if (nd < dist[v]) {
          dist[v] = nd;
          heap.emplace(nd, v);
        }
      }
    }
    dist.resize(vertex_count_);
    return dist;
  }

 private:
  int vertex_count_;
  int subdivisions_;
  std::vector<int> offsets_;
  std::vector<int> targets_;
  std::vector<double> weights_;
};

/// The mesh's cached Steiner graph (built on first use, thread-safe).
inline const GeodesicGraph& geodesic_graph(const SurfaceMesh& mesh) {
  auto& slot = mesh.geodesic_slot();
  std::call_once(slot.once, [&] { slot.value = std::make_shared<const GeodesicGraph>(mesh); });
  return *static_cast<const GeodesicGraph*>(slot.value.get());
}

inline DistanceField geodesic_distance(const SurfaceMesh& mesh, int source) {
  if (source < 0 || source >= mesh.vertex_count())
    throw Error(ErrorCode::invalid_parameter, "invalid source vertex " + std::to_string(source));
  const std::pair<int, double> src{source, 0.0};
  return {source, geodesic_graph(mesh).vertex_distances(std::span(&src, 1))};
}

/// Distance to the nearest vertex of a set.
inline DistanceField distance_to_set(const SurfaceMesh& mesh, std::span<const int> sources) {
  std::vector<std::pair<int, double>> src;
  src.reserve(sources.size());
  for (int s : sources) src.emplace_back(s, 0.0);
  return {-1, geodesic_graph(mesh).vertex_distances(src)};
}

/// Runs fn(i) for i in [0, n) on up to `threads` workers. Each index is
/// handled by exactly one worker, so results written per index do not
/// depend on the thread count.
inline void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
  threads = std::clamp(threads, 1, std::max(1, n));
  if (threads == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(threads);
  {
    std::vector<std::jthread> pool;
    for (int w = 0; w < threads; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (int i = w; i < n; i += threads) fn(i);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace maxgraph
