#include "percoflow/flow_functionals.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <limits>
#include <set>
#include <sstream>

namespace percoflow {

double edge_capacity(const Environment& env, const IVec& base, int axis) {
  const auto& region = env.region();
  IVec top = base;
  ++top[static_cast<std::size_t>(axis)];
  if (region.contains(base) && region.contains(top)) return env.capacity(base, axis);
  return env.law().quantile(edge_uniform(env.stream(), base.data(), static_cast<int>(base.size()), axis));
}

double total_capacity(const std::vector<CutEdge>& edges) {
  double s = 0.0;
  for (const auto& e : edges) s += e.capacity;
  return s;
}

FlowProblem cylinder_problem(const DiscreteCylinder& cylinder, const Environment& env) {
  const auto& region = cylinder.region;
  FlowProblem p;
  p.vertex_count = region.vertex_count();
  p.edges.reserve(cylinder.edges.size());
  for (auto e : cylinder.edges) {
    auto [u, v] = region.edge_endpoints(e);
    auto [base, axis] = region.edge_geometry(e);
    p.edges.push_back({u, v, edge_capacity(env, base, axis)});
  }
  p.sources = cylinder.sources;
  p.sinks = cylinder.sinks;
  return p;
}

CylinderFlow cylinder_flow(const Cylinder& cylinder, std::int64_t n, const Environment& env, CylinderMode mode) {
  const auto dc = discretize_cylinder(cylinder, n, mode);
  const auto problem = cylinder_problem(dc, env);
  const auto result = max_flow(problem);
  const auto cut = min_cut(problem, result);
  CylinderFlow out;
  for (auto k : cut.edges) {
    auto [base, axis] = dc.region.edge_geometry(dc.edges[static_cast<std::size_t>(k)]);
    out.cutset.push_back({{std::move(base), axis}, problem.edges[static_cast<std::size_t>(k)].capacity});
  }
  std::sort(out.cutset.begin(), out.cutset.end(), [](const CutEdge& a, const CutEdge& b) { return a.edge < b.edge; });
  out.value = total_capacity(out.cutset);
  return out;
}

double phi_cylinder(const Cylinder& cylinder, std::int64_t n, const Environment& env) {
  return cylinder_flow(cylinder, n, env, CylinderMode::top_bottom).value;
}

double tau_cylinder(const Cylinder& cylinder, std::int64_t n, const Environment& env) {
  return cylinder_flow(cylinder, n, env, CylinderMode::half_boundary).value;
}

namespace {

std::string describe_trace(const std::vector<TruncationStep>& trace) {
  std::ostringstream os;
  for (const auto& s : trace) os << " (R=" << s.radius << ", value=" << s.value << (s.interior ? "" : ", touches shell") << ")";
  return os.str();
}

// Breadth-first search in a lattice region over vertices with allowed[u] set,
// skipping removed edges. Returns a lattice path from a source to a target, if any.
std::optional<std::vector<IVec>> escape_path(const LatticeRegion& region, const std::vector<char>& allowed,
                                             const std::vector<char>& removed,
                                             const std::vector<std::int64_t>& sources,
                                             const std::function<bool(std::int64_t)>& is_target) {
  const int d = region.dim();
  std::vector<std::int64_t> parent(static_cast<std::size_t>(region.vertex_count()), -2);
  std::deque<std::int64_t> queue;
  for (auto s : sources) {
    if (parent[static_cast<std::size_t>(s)] != -2) continue;
    parent[static_cast<std::size_t>(s)] = -1;
    queue.push_back(s);
  }
  IVec x;
  while (!queue.empty()) {
    const auto u = queue.front();
    queue.pop_front();
    if (is_target(u)) {
      std::vector<IVec> path;
      for (auto w = u; w >= 0; w = parent[static_cast<std::size_t>(w)]) path.push_back(region.vertex_coords(w));
      std::reverse(path.begin(), path.end());
      return path;
    }
    region.vertex_coords(u, x);
    for (int a = 0; a < d; ++a)
      for (int sign : {-1, 1}) {
        const auto ax = static_cast<std::size_t>(a);
        if ((sign < 0 && x[ax] == region.lo()[ax]) || (sign > 0 && x[ax] == region.hi()[ax])) continue;
        const auto v = u + sign * region.stride(a);
        if (!allowed[static_cast<std::size_t>(v)] || parent[static_cast<std::size_t>(v)] != -2) continue;
        IVec base = x;
        if (sign < 0) --base[ax];
        if (removed[static_cast<std::size_t>(region.edge_index(base, a))]) continue;
        parent[static_cast<std::size_t>(v)] = u;
        queue.push_back(v);
      }
  }
  return std::nullopt;
}

std::string describe_path(const std::vector<IVec>& path) {
  std::ostringstream os;
  for (std::size_t i = 0; i < path.size() && i < 64; ++i) {
    os << (i ? " -> (" : "(");
    for (std::size_t k = 0; k < path[i].size(); ++k) os << (k ? "," : "") << path[i][k];
    os << ')';
  }
  if (path.size() > 64) os << " ...";
  return os.str();
}

void sort_unique(std::vector<CutEdge>& edges) {
  std::sort(edges.begin(), edges.end(), [](const CutEdge& a, const CutEdge& b) { return a.edge < b.edge; });
  edges.erase(std::unique(edges.begin(), edges.end(), [](const CutEdge& a, const CutEdge& b) { return a.edge == b.edge; }),
              edges.end());
}

std::vector<char> removed_mask(const LatticeRegion& region, const std::vector<CutEdge>& edges) {
  std::vector<char> removed(static_cast<std::size_t>(region.edge_count()), 0);
  for (const auto& e : edges) {
    IVec top = e.edge.base;
    ++top[static_cast<std::size_t>(e.edge.axis)];
    if (region.contains(e.edge.base) && region.contains(top))
      removed[static_cast<std::size_t>(region.edge_index(e.edge.base, e.edge.axis))] = 1;
  }
  return removed;
}

double distance_to_side(const Vec& x, const std::vector<Vec>& side) {
  if (side.size() == 1) return norm(x - side[0]);
  const Vec ab = side[1] - side[0];
  const double t = std::clamp(dot(x - side[0], ab) / dot(ab, ab), 0.0, 1.0);
  return norm(x - (side[0] + t * ab));
}

}  // namespace

FlowToInfinityResult phi_to_infinity(const ConvexBody& body, std::int64_t n, const CapacityLaw& law,
                                     std::uint64_t master_seed, std::uint64_t replica,
                                     const TruncationOptions& options) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "scale n must be >= 1");
  law.check();
  const int d = body.dim();
  const auto inside = discretize_body(body, n);
  const double rho = std::max(options.base_radius.value_or(body.circumradius()), 1.0 / static_cast<double>(n));

  FlowToInfinityResult out;
  std::int64_t previous_half = -1;
  for (int k = 0; k < options.steps; ++k) {
    const double radius = rho * (1.0 + std::ldexp(1.0, k) / 4.0);
    const auto half = static_cast<std::int64_t>(std::ceil(radius * static_cast<double>(n) - kGeomTol));
    if (half == previous_half) continue;
    previous_half = half;
    const LatticeRegion region = LatticeRegion::centered_box(d, half);
    if (region.edge_count() > options.edge_budget)
      throw NoStabilizationError("edge budget reached before the value stabilised:" + describe_trace(out.trace),
                                 out.trace);
    const auto env = sample_environment(region, law, master_seed, replica, options.edge_budget);

    FlowProblem problem;
    problem.vertex_count = region.vertex_count();
    problem.edges.reserve(static_cast<std::size_t>(region.edge_count()));
    region.for_each_edge([&](std::int64_t e, std::int64_t u, std::int64_t v, int) {
      problem.edges.push_back({u, v, env.capacity(e)});
    });
    for (const auto& x : inside) {
      if (!region.contains(x) || region.on_boundary(region.vertex_index(x)))
        throw Error(ErrorCode::InvalidArgument, "truncation box does not strictly contain nA");
      problem.sources.push_back(region.vertex_index(x));
    }
    for (std::int64_t u = 0; u < region.vertex_count(); ++u)
      if (region.on_boundary(u)) problem.sinks.push_back(u);

    const auto cut = min_cut(problem, max_flow(problem));
    bool interior = true;
    std::vector<CutEdge> cutset;
    for (auto e : cut.edges) {
      const auto& fe = problem.edges[static_cast<std::size_t>(e)];
      if (region.on_boundary(fe.u) || region.on_boundary(fe.v)) interior = false;
      auto [base, axis] = region.edge_geometry(e);
      cutset.push_back({{std::move(base), axis}, fe.capacity});
    }
    // summed in lattice order, so equal cuts give bit-identical values on any box
    std::sort(cutset.begin(), cutset.end(), [](const CutEdge& a, const CutEdge& b) { return a.edge < b.edge; });
    const double value = total_capacity(cutset);
    const bool stable = !out.trace.empty() && out.trace.back().value == value && interior;
    out.trace.push_back({radius, half, value, interior});
    if (stable) {
      out.value = value;
      out.radius = radius;
      out.cutset = std::move(cutset);
      return out;
    }
  }
  throw NoStabilizationError("truncation schedule exhausted:" + describe_trace(out.trace), out.trace);
}

FaceGluing glue_face(const Cylinder& cylinder, std::int64_t n, const Environment& env, double kappa) {
  const FlatPolytope& face = cylinder.base;
  const int d = face.dim();
  if (!(kappa > 0.0)) throw Error(ErrorCode::InvalidArgument, "hypersquare side must be positive");
  const auto verts = face.vertices();
  if (verts.empty()) throw Error(ErrorCode::InvalidArgument, "face gluing needs explicit face vertices (d in {2,3})");
  const int k = d - 1;
  Vec lo(static_cast<std::size_t>(k), std::numeric_limits<double>::infinity());
  Vec hi(static_cast<std::size_t>(k), -std::numeric_limits<double>::infinity());
  for (const auto& v : verts) {
    const Vec p = face.to_local(v);
    for (int i = 0; i < k; ++i) {
      lo[static_cast<std::size_t>(i)] = std::min(lo[static_cast<std::size_t>(i)], p[static_cast<std::size_t>(i)]);
      hi[static_cast<std::size_t>(i)] = std::max(hi[static_cast<std::size_t>(i)], p[static_cast<std::size_t>(i)]);
    }
  }

  FaceGluing out;
  out.zeta = 4.0 * d / static_cast<double>(n);

  // grid squares of side kappa lying entirely in F; they cover D(kappa, F)
  std::vector<Vec> corners;  // local lower corners
  std::vector<std::int64_t> cells(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i)
    cells[static_cast<std::size_t>(i)] =
        static_cast<std::int64_t>(std::floor((hi[static_cast<std::size_t>(i)] - lo[static_cast<std::size_t>(i)]) / kappa + kGeomTol));
  std::vector<std::int64_t> idx(static_cast<std::size_t>(k), 0);
  bool any_cells = true;
  for (auto c : cells) any_cells = any_cells && c > 0;
  while (any_cells) {
    Vec corner(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i)
      corner[static_cast<std::size_t>(i)] = lo[static_cast<std::size_t>(i)] + kappa * static_cast<double>(idx[static_cast<std::size_t>(i)]);
    bool fits = true;
    for (unsigned mask = 0; mask < (1u << k) && fits; ++mask) {
      Vec q = corner;
      for (int i = 0; i < k; ++i)
        if (mask & (1u << i)) q[static_cast<std::size_t>(i)] += kappa;
      fits = face.contains_local(q);
    }
    if (fits) corners.push_back(corner);
    int i = k - 1;
    while (i >= 0 && idx[static_cast<std::size_t>(i)] + 1 == cells[static_cast<std::size_t>(i)]) idx[static_cast<std::size_t>(i--)] = 0;
    if (i < 0) break;
    ++idx[static_cast<std::size_t>(i)];
  }

  for (const auto& corner : corners) {
    Vec center_local = corner;
    for (auto& c : center_local) c += 0.5 * kappa;
    out.squares.push_back(FlatPolytope::hyperrectangle(face.from_local(center_local), face.normal(), face.axes(),
                                                       std::vector<double>(static_cast<std::size_t>(k), kappa)));
    const auto flow = cylinder_flow(Cylinder{out.squares.back(), cylinder.half_height}, n, env, CylinderMode::half_boundary);
    out.square_values.push_back(flow.value);
    out.square_cuts.insert(out.square_cuts.end(), flow.cutset.begin(), flow.cutset.end());
  }
  sort_unique(out.square_cuts);

  // in-plane distance from a local point to the boundary of square s (or to s from outside)
  auto square_boundary_distance = [&](const Vec& p, const Vec& corner) {
    double outside = 0.0, inside = std::numeric_limits<double>::infinity();
    for (int i = 0; i < k; ++i) {
      const double a = p[static_cast<std::size_t>(i)] - corner[static_cast<std::size_t>(i)];
      const double gap = std::max({0.0, -a, a - kappa});
      outside += gap * gap;
      inside = std::min({inside, a, kappa - a});
    }
    return outside > 0.0 ? std::sqrt(outside) : std::max(0.0, inside);
  };
  const double zeta = out.zeta;
  auto in_shell = [&](const Vec& x) {
    const double t = face.height(x);
    if (std::abs(t) > zeta + kGeomTol) return false;
    const Vec p = face.to_local(x);
    double uncovered = 0.0;  // distance to F minus the open squares, bounded above
    if (!face.contains_local(p)) {
      uncovered = face.local_distance(p);
    } else {
      for (const auto& c : corners) {
        bool in = true;
        for (int i = 0; i < k && in; ++i) {
          const double a = p[static_cast<std::size_t>(i)] - c[static_cast<std::size_t>(i)];
          in = a >= -kGeomTol && a <= kappa + kGeomTol;
        }
        if (in) {
          uncovered = square_boundary_distance(p, c);
          break;
        }
      }
    }
    double nearest = uncovered;
    for (const auto& c : corners) nearest = std::min(nearest, square_boundary_distance(p, c));
    return t * t + nearest * nearest <= zeta * zeta + kGeomTol;
  };

  const auto dc = discretize_cylinder(cylinder, n, CylinderMode::half_boundary);
  const double s = static_cast<double>(n);
  for (auto e : dc.edges) {
    auto [base, axis] = dc.region.edge_geometry(e);
    LatticeEdge le{std::move(base), axis};
    if (edge_included(le, s, in_shell)) out.shell.push_back({le, 0.0});
  }
  for (auto& e : out.shell) e.capacity = edge_capacity(env, e.edge.base, e.edge.axis);
  out.edges = out.shell;
  out.edges.insert(out.edges.end(), out.square_cuts.begin(), out.square_cuts.end());
  sort_unique(out.edges);
  out.capacity = total_capacity(out.edges);
  out.bound = total_capacity(out.shell);
  for (double v : out.square_values) out.bound += v;

  std::vector<char> allowed(static_cast<std::size_t>(dc.region.vertex_count()), 0);
  for (auto u : dc.vertices) allowed[static_cast<std::size_t>(u)] = 1;
  std::vector<char> sink(allowed.size(), 0);
  for (auto u : dc.sinks) sink[static_cast<std::size_t>(u)] = 1;
  if (auto path = escape_path(dc.region, allowed, removed_mask(dc.region, out.edges), dc.sources,
                              [&](std::int64_t u) { return sink[static_cast<std::size_t>(u)] != 0; }))
    throw NotSeparatingError("glued face cutset leaves a path from C'_1 to C'_2: " + describe_path(*path), *path);
  return out;
}

GluedCutset glued_upper_bound(const ConvexPolytope& polytope, std::int64_t n, const Environment& env,
                              double epsilon, const GluingOptions& options) {
  const int d = polytope.dim();
  if (d != 2 && d != 3) throw Error(ErrorCode::InvalidArgument, "gluing is implemented for d in {2,3}");
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "scale n must be >= 1");
  if (!(epsilon > 0.0)) throw Error(ErrorCode::InvalidArgument, "shell width must be positive");
  const double s = static_cast<double>(n);

  GluedCutset out;
  out.epsilon = epsilon;
  out.zeta = 4.0 * d / s;

  const auto& faces = polytope.faces();
  std::vector<Cylinder> cylinders;
  for (const auto& f : faces)
    cylinders.push_back({FlatPolytope::from_face(f).translated(epsilon * f.normal), epsilon});

  // pairwise disjoint interiors, checked on the lattice points of each cylinder
  for (std::size_t i = 0; i < cylinders.size(); ++i) {
    const auto region = scaled_region(cylinders[i].bounding_box(), n, 1);
    IVec x;
    for (std::int64_t u = 0; u < region.vertex_count(); ++u) {
      region.vertex_coords(u, x);
      const Vec p = lattice_point(x, s);
      if (!cylinders[i].contains(p, -kGeomTol)) continue;
      for (std::size_t j = i + 1; j < cylinders.size(); ++j)
        if (cylinders[j].contains(p, -kGeomTol))
          throw Error(ErrorCode::InvalidArgument, "face cylinders overlap; shell width too large for this polytope");
    }
  }

  std::vector<CutEdge> all;
  for (const auto& cyl : cylinders) {
    const auto flow = cylinder_flow(cyl, n, env, CylinderMode::half_boundary);
    out.face_values.push_back(flow.value);
    if (options.kappa) {
      auto glued = glue_face(cyl, n, env, *options.kappa);
      out.shell.insert(out.shell.end(), glued.shell.begin(), glued.shell.end());
      out.face_cuts.push_back(std::move(glued.edges));
    } else {
      out.face_cuts.push_back(flow.cutset);
    }
    all.insert(all.end(), out.face_cuts.back().begin(), out.face_cuts.back().end());
  }
  sort_unique(out.shell);

  const double outer = epsilon + out.zeta;
  const double inner = epsilon - out.zeta;
  for (auto [i, j] : polytope.adjacent_faces()) {
    const auto side = polytope.shared_side(i, j);
    Vec lo = side[0], hi = side[0];
    for (const auto& v : side)
      for (int a = 0; a < d; ++a) {
        lo[static_cast<std::size_t>(a)] = std::min(lo[static_cast<std::size_t>(a)], v[static_cast<std::size_t>(a)] - outer);
        hi[static_cast<std::size_t>(a)] = std::max(hi[static_cast<std::size_t>(a)], v[static_cast<std::size_t>(a)] + outer);
      }
    const auto region = scaled_region({lo, hi}, n, 1);
    auto in_bridge = [&](const Vec& x) {
      return distance_to_side(x, side) <= outer + kGeomTol && polytope.distance(x) > inner - kGeomTol;
    };
    std::vector<CutEdge> bridge;
    region.for_each_edge([&](std::int64_t e, std::int64_t, std::int64_t, int) {
      auto [base, axis] = region.edge_geometry(e);
      LatticeEdge le{std::move(base), axis};
      if (edge_included(le, s, in_bridge)) bridge.push_back({le, 0.0});
    });
    for (auto& e : bridge) e.capacity = edge_capacity(env, e.edge.base, e.edge.axis);
    out.adjacent.emplace_back(i, j);
    all.insert(all.end(), bridge.begin(), bridge.end());
    out.bridges.push_back(std::move(bridge));
  }
  sort_unique(all);
  out.edges = std::move(all);
  out.capacity = total_capacity(out.edges);

  // separation of nP from the shell of a box enclosing every part
  auto [lo, hi] = polytope.bounding_box();
  const double margin = 2.0 * epsilon + out.zeta + 2.0 / s;
  for (int a = 0; a < d; ++a) {
    lo[static_cast<std::size_t>(a)] -= margin;
    hi[static_cast<std::size_t>(a)] += margin;
  }
  const auto region = scaled_region({lo, hi}, n, 2);
  std::vector<std::int64_t> sources;
  for (const auto& x : discretize_body(ConvexBody::polytope(polytope), n)) sources.push_back(region.vertex_index(x));
  const std::vector<char> allowed(static_cast<std::size_t>(region.vertex_count()), 1);
  if (auto path = escape_path(region, allowed, removed_mask(region, out.edges), sources,
                              [&](std::int64_t u) { return region.on_boundary(u); }))
    throw NotSeparatingError("glued cutset leaves a path from nP to infinity: " + describe_path(*path), *path);
  return out;
}

namespace {

nlohmann::json edges_json(const std::vector<CutEdge>& edges) {
  auto arr = nlohmann::json::array();
  for (const auto& e : edges) arr.push_back({{"base", e.edge.base}, {"axis", e.edge.axis}, {"t", e.capacity}});
  return arr;
}

}  // namespace

nlohmann::json to_json(const std::vector<TruncationStep>& trace) {
  auto arr = nlohmann::json::array();
  for (const auto& s : trace)
    arr.push_back({{"R", s.radius}, {"half_width", s.half_width}, {"value", s.value}, {"interior", s.interior}});
  return arr;
}

nlohmann::json to_json(const FlowToInfinityResult& result) {
  return {{"value", result.value},
          {"cutset_size", result.cutset.size()},
          {"cutset_capacity", total_capacity(result.cutset)},
          {"R", result.radius},
          {"trace", to_json(result.trace)}};
}

nlohmann::json to_json(const GluedCutset& glued) {
  nlohmann::json faces = nlohmann::json::array();
  for (std::size_t i = 0; i < glued.face_cuts.size(); ++i)
    faces.push_back({{"tau", glued.face_values[i]}, {"cut_size", glued.face_cuts[i].size()},
                     {"cut_capacity", total_capacity(glued.face_cuts[i])}});
  nlohmann::json bridges = nlohmann::json::array();
  for (std::size_t b = 0; b < glued.bridges.size(); ++b)
    bridges.push_back({{"faces", {glued.adjacent[b].first, glued.adjacent[b].second}},
                       {"size", glued.bridges[b].size()},
                       {"capacity", total_capacity(glued.bridges[b])}});
  return {{"epsilon", glued.epsilon}, {"zeta", glued.zeta},     {"faces", faces},
          {"bridges", bridges},       {"shell_size", glued.shell.size()},
          {"union_size", glued.edges.size()}, {"capacity", glued.capacity},
          {"union", edges_json(glued.edges)}};
}

}  // namespace percoflow
