// Independent reference implementations used only by the test suites.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <queue>
#include <random>
#include <set>
#include <vector>

#include "percoflow/geometry.hpp"
#include "percoflow/maxflow.hpp"

namespace percoflow::oracle {

/// Scans every edge of a padded box and keeps those with exactly one endpoint in nA.
inline std::vector<LatticeEdge> edge_boundary(const ConvexBody& body, std::int64_t n) {
  auto [lo, hi] = body.bounding_box();
  const int d = body.dim();
  IVec ilo(d), ihi(d);
  for (int i = 0; i < d; ++i) {
    ilo[i] = static_cast<std::int64_t>(std::floor(lo[i] * n)) - 2;
    ihi[i] = static_cast<std::int64_t>(std::ceil(hi[i] * n)) + 2;
  }
  std::vector<LatticeEdge> out;
  IVec x = ilo;
  const double s = static_cast<double>(n);
  while (true) {
    for (int a = 0; a < d; ++a) {
      if (x[a] == ihi[a]) continue;
      IVec y = x;
      ++y[a];
      const bool in_x = body.contains(lattice_point(x, s));
      const bool in_y = body.contains(lattice_point(y, s));
      if (in_x != in_y) out.push_back({x, a});
    }
    int i = d - 1;
    while (i >= 0 && x[i] == ihi[i]) --i;
    if (i < 0) break;
    ++x[i];
    for (int j = i + 1; j < d; ++j) x[j] = ilo[j];
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// Does the segment [p, q] meet A + level * v? Root-finding by bisection on the
/// height function, membership by Euclidean distance to the shifted base.
inline bool segment_meets_shifted_base(const FlatPolytope& base, const Vec& p, const Vec& q, double level) {
  const double tol = 1e-9;
  auto f = [&](double s) { return base.height(p + s * (q - p)) - level; };
  auto on_base = [&](const Vec& z) { return base.distance(z - level * base.normal()) <= 2 * tol; };
  const double f0 = f(0.0), f1 = f(1.0);
  if (std::abs(f0) <= tol && std::abs(f1) <= tol) {
    for (int k = 0; k <= 2000; ++k)
      if (on_base(p + (k / 2000.0) * (q - p))) return true;
    return false;
  }
  if (std::abs(f0) <= tol) return on_base(p);
  if (std::abs(f1) <= tol) return on_base(q);
  if ((f0 > 0) == (f1 > 0)) return false;
  double a = 0.0, b = 1.0;
  for (int it = 0; it < 200; ++it) {
    const double m = 0.5 * (a + b);
    if ((f(m) > 0) == (f0 > 0))
      a = m;
    else
      b = m;
  }
  return on_base(p + (0.5 * (a + b)) * (q - p));
}

struct CylinderSets {
  std::set<IVec> sources, sinks;
};

/// Literal enumeration of T_n/B_n (top_bottom) or C'_1/C'_2 (half_boundary).
inline CylinderSets cylinder_sets(const Cylinder& cyl, std::int64_t n, CylinderMode mode) {
  auto [lo, hi] = cyl.bounding_box();
  const int d = cyl.base.dim();
  const double s = static_cast<double>(n);
  IVec ilo(d), ihi(d);
  for (int i = 0; i < d; ++i) {
    ilo[i] = static_cast<std::int64_t>(std::floor(lo[i] * n)) - 2;
    ihi[i] = static_cast<std::int64_t>(std::ceil(hi[i] * n)) + 2;
  }
  CylinderSets out;
  IVec x = ilo;
  while (true) {
    const Vec p = lattice_point(x, s);
    if (cyl.contains(p)) {
      for (int a = 0; a < d; ++a)
        for (int sign : {-1, 1}) {
          IVec y = x;
          y[a] += sign;
          const Vec q = lattice_point(y, s);
          if (cyl.contains(q)) continue;
          if (mode == CylinderMode::top_bottom) {
            if (segment_meets_shifted_base(cyl.base, p, q, cyl.half_height)) out.sources.insert(x);
            if (segment_meets_shifted_base(cyl.base, p, q, -cyl.half_height)) out.sinks.insert(x);
          } else {
            const double h = cyl.base.height(p);
            if (h > 1e-9) out.sources.insert(x);
            if (h < -1e-9) out.sinks.insert(x);
          }
        }
    }
    int i = d - 1;
    while (i >= 0 && x[i] == ihi[i]) --i;
    if (i < 0) break;
    ++x[i];
    for (int j = i + 1; j < d; ++j) x[j] = ilo[j];
  }
  return out;
}

/// Random connected simple graph with at most `max_edges` edges, integer
/// capacities in [0, max_cap] and disjoint nonempty S, T.
inline FlowProblem random_small_graph(std::mt19937_64& rng, int max_edges, int max_cap) {
  std::uniform_int_distribution<int> nv(2, std::min(6, max_edges + 1));
  const int n = nv(rng);
  FlowProblem p;
  p.vertex_count = n;
  std::set<std::pair<int, int>> used;
  std::uniform_int_distribution<int> cap(0, max_cap);
  for (int v = 1; v < n; ++v) {
    const int u = std::uniform_int_distribution<int>(0, v - 1)(rng);
    used.insert({u, v});
    p.edges.push_back({u, v, static_cast<double>(cap(rng))});
  }
  const int extra = std::uniform_int_distribution<int>(0, max_edges - (n - 1))(rng);
  for (int k = 0; k < extra; ++k) {
    const int u = std::uniform_int_distribution<int>(0, n - 1)(rng);
    const int v = std::uniform_int_distribution<int>(0, n - 1)(rng);
    if (u == v) continue;
    const auto key = std::minmax(u, v);
    if (!used.insert({key.first, key.second}).second) continue;
    p.edges.push_back({u, v, static_cast<double>(cap(rng))});
  }
  std::vector<int> perm(n);
  for (int i = 0; i < n; ++i) perm[i] = i;
  std::shuffle(perm.begin(), perm.end(), rng);
  const int ns = std::uniform_int_distribution<int>(1, n - 1)(rng);
  const int nt = std::uniform_int_distribution<int>(1, n - ns)(rng);
  for (int i = 0; i < ns; ++i) p.sources.push_back(perm[i]);
  for (int i = 0; i < nt; ++i) p.sinks.push_back(perm[ns + i]);
  return p;
}

/// Minimum of V(edges leaving X) over every vertex set X with S in X and T
/// outside, by enumeration of the free vertices (at most 20 of them).
inline double partition_min_cut(const FlowProblem& p) {
  std::vector<int> role(static_cast<std::size_t>(p.vertex_count), 0);  // 1 source, 2 sink
  for (auto s : p.sources) role[static_cast<std::size_t>(s)] = 1;
  for (auto t : p.sinks) role[static_cast<std::size_t>(t)] = 2;
  std::vector<std::int64_t> free;
  for (std::int64_t v = 0; v < p.vertex_count; ++v)
    if (role[static_cast<std::size_t>(v)] == 0) free.push_back(v);
  double best = std::numeric_limits<double>::infinity();
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << free.size()); ++mask) {
    std::vector<char> side(static_cast<std::size_t>(p.vertex_count), 0);
    for (auto s : p.sources) side[static_cast<std::size_t>(s)] = 1;
    for (std::size_t i = 0; i < free.size(); ++i)
      if (mask >> i & 1) side[static_cast<std::size_t>(free[i])] = 1;
    double cut = 0.0;
    for (const auto& e : p.edges)
      if (side[static_cast<std::size_t>(e.u)] != side[static_cast<std::size_t>(e.v)]) cut += e.capacity;
    best = std::min(best, cut);
  }
  return best;
}

/// Breadth-first search from S avoiding the removed edges; true when no sink is reached.
inline bool blocks_all_paths(const FlowProblem& p, const std::vector<std::int64_t>& removed) {
  std::set<std::int64_t> cut(removed.begin(), removed.end());
  std::vector<std::vector<std::int64_t>> adj(static_cast<std::size_t>(p.vertex_count));
  for (std::size_t k = 0; k < p.edges.size(); ++k) {
    if (cut.count(static_cast<std::int64_t>(k))) continue;
    adj[static_cast<std::size_t>(p.edges[k].u)].push_back(p.edges[k].v);
    adj[static_cast<std::size_t>(p.edges[k].v)].push_back(p.edges[k].u);
  }
  std::vector<char> seen(static_cast<std::size_t>(p.vertex_count), 0);
  std::queue<std::int64_t> q;
  for (auto s : p.sources) {
    seen[static_cast<std::size_t>(s)] = 1;
    q.push(s);
  }
  while (!q.empty()) {
    const auto u = q.front();
    q.pop();
    for (auto v : adj[static_cast<std::size_t>(u)])
      if (!seen[static_cast<std::size_t>(v)]) {
        seen[static_cast<std::size_t>(v)] = 1;
        q.push(v);
      }
  }
  for (auto t : p.sinks)
    if (seen[static_cast<std::size_t>(t)]) return false;
  return true;
}

/// Edges of Z^2/n whose endpoints lie strictly on opposite sides of the line
/// through c normal to v and whose crossing point is within half a unit of c.
inline std::size_t staircase_count(const Vec& v, const Vec& c, std::int64_t n) {
  const Vec u = normalized(v);
  const Vec t{-u[1], u[0]};
  const double s = static_cast<double>(n);
  std::size_t count = 0;
  for (std::int64_t i = -2 * n; i <= 2 * n; ++i)
    for (std::int64_t j = -2 * n; j <= 2 * n; ++j)
      for (int axis = 0; axis < 2; ++axis) {
        const Vec a{i / s - c[0], j / s - c[1]};
        const Vec b{a[0] + (axis == 0 ? 1 / s : 0.0), a[1] + (axis == 1 ? 1 / s : 0.0)};
        const double ha = dot(a, u), hb = dot(b, u);
        if ((ha > 0) == (hb > 0) || ha == 0 || hb == 0) continue;
        const double w = ha / (ha - hb);
        const Vec x{a[0] + w * (b[0] - a[0]), a[1] + w * (b[1] - a[1])};
        if (std::abs(dot(x, t)) <= 0.5) ++count;
      }
  return count;
}

/// Does removing `cut` disconnect the lattice points of nA from the boundary
/// of the box obtained by padding the bounding box of nA by `margin` steps?
inline bool encloses(const ConvexBody& body, std::int64_t n, const std::set<LatticeEdge>& cut, std::int64_t margin) {
  const int d = body.dim();
  auto [lo, hi] = body.bounding_box();
  IVec ilo(d), ihi(d);
  for (int i = 0; i < d; ++i) {
    ilo[i] = static_cast<std::int64_t>(std::floor(lo[i] * n)) - margin;
    ihi[i] = static_cast<std::int64_t>(std::ceil(hi[i] * n)) + margin;
  }
  const LatticeRegion region(ilo, ihi);
  std::vector<char> seen(static_cast<std::size_t>(region.vertex_count()), 0);
  std::queue<std::int64_t> q;
  for (std::int64_t v = 0; v < region.vertex_count(); ++v)
    if (body.contains(lattice_point(region.vertex_coords(v), static_cast<double>(n)))) {
      seen[static_cast<std::size_t>(v)] = 1;
      q.push(v);
    }
  while (!q.empty()) {
    const auto u = q.front();
    q.pop();
    if (region.on_boundary(u)) return false;
    const IVec x = region.vertex_coords(u);
    for (int a = 0; a < d; ++a)
      for (int sgn : {-1, 1}) {
        IVec y = x;
        y[a] += sgn;
        if (!region.contains(y)) continue;
        if (cut.count(LatticeEdge{sgn > 0 ? x : y, a})) continue;
        const auto v = region.vertex_index(y);
        if (!seen[static_cast<std::size_t>(v)]) {
          seen[static_cast<std::size_t>(v)] = 1;
          q.push(v);
        }
      }
  }
  return true;
}

}  // namespace percoflow::oracle
