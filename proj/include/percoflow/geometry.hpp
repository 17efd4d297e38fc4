#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "percoflow/capacity_env.hpp"
#include "percoflow/error.hpp"

namespace percoflow {

using Vec = std::vector<double>;

/// Absolute tolerance of every geometric predicate, in continuum coordinates.
inline constexpr double kGeomTol = 1e-9;

double dot(const Vec& a, const Vec& b);
double norm(const Vec& a);
Vec operator+(const Vec& a, const Vec& b);
Vec operator-(const Vec& a, const Vec& b);
Vec operator*(double s, const Vec& a);
Vec normalized(const Vec& a);
Vec lattice_point(const IVec& x, double scale);  // x / scale

/// d-1 orthonormal vectors spanning the hyperplane normal to the unit vector `v`.
/// Deterministic: d=2 gives (-v2, v1); otherwise Gram-Schmidt on the canonical
/// basis with the axis most aligned with v left out.
std::vector<Vec> orthonormal_complement(const Vec& v);

/// {x : normal . x <= offset}, |normal| = 1.
struct Halfspace {
  Vec normal;
  double offset = 0.0;
};

/// (d-1)-face of a polytope.
struct Face {
  Vec normal;    // outward unit normal
  double offset = 0.0;
  double area = 0.0;  // H^{d-1}
  /// d=2: the two endpoints; d=3: the polygon, counter-clockwise seen from
  /// outside; d>=4 (boxes only): empty.
  std::vector<Vec> vertices;
};

/// Bounded full-dimensional intersection of half-spaces, with its faces.
/// Exact face geometry for d in {2,3}; for d >= 4 only axis-aligned boxes.
class ConvexPolytope {
 public:
  ConvexPolytope() = default;

  /// Throws DegenerateBody when the intersection has empty interior and
  /// UnboundedPolytope when it is unbounded.
  static ConvexPolytope from_halfspaces(std::vector<Halfspace> halfspaces, int d);
  /// Convex hull of points in dimension 2 or 3.
  static ConvexPolytope hull(const std::vector<Vec>& points);
  static ConvexPolytope box(const Vec& lo, const Vec& hi);

  int dim() const noexcept { return dim_; }
  const std::vector<Halfspace>& halfspaces() const noexcept { return halfspaces_; }
  const std::vector<Face>& faces() const noexcept { return faces_; }
  const std::vector<Vec>& vertices() const noexcept { return vertices_; }
  bool is_box() const noexcept { return box_.has_value(); }

  bool contains(const Vec& x, double tol = kGeomTol) const;
  /// sup { x . y : x in P }.
  double support(const Vec& y) const;
  double surface_area() const;
  /// Lebesgue measure (area for d=2).
  double volume() const;
  Vec interior_point() const;
  /// Euclidean distance from x to P (zero inside).
  double distance(const Vec& x) const;
  std::pair<Vec, Vec> bounding_box() const;

  /// Pairs (i, j), i < j, of faces sharing a (d-2)-dimensional side.
  std::vector<std::pair<std::size_t, std::size_t>> adjacent_faces() const;
  /// Vertices of F_i cap F_j (one point for d=2, a segment for d=3).
  std::vector<Vec> shared_side(std::size_t i, std::size_t j) const;

 private:
  int dim_ = 0;
  std::vector<Halfspace> halfspaces_;
  std::vector<Face> faces_;
  std::vector<Vec> vertices_;
  std::optional<std::pair<Vec, Vec>> box_;
};

/// Face list of a polytope. The facets already carry outward normals and areas;
/// this exists for symmetry with the other geometric operations.
std::vector<Face> face_decomposition(const ConvexPolytope& polytope);

struct Ball {
  Vec center;
  double radius = 0.0;
};

struct Box {
  Vec lo, hi;
};

/// Compact convex set A.
class ConvexBody {
 public:
  using Variant = std::variant<Ball, Box, ConvexPolytope>;

  explicit ConvexBody(Variant body);
  static ConvexBody ball(Vec center, double radius) { return ConvexBody(Ball{std::move(center), radius}); }
  static ConvexBody box(Vec lo, Vec hi) { return ConvexBody(Box{std::move(lo), std::move(hi)}); }
  static ConvexBody polytope(ConvexPolytope p) { return ConvexBody(std::move(p)); }

  const Variant& variant() const noexcept { return body_; }
  int dim() const;
  bool degenerate() const;
  bool contains(const Vec& x, double tol = kGeomTol) const;
  double support(const Vec& y) const;
  Vec interior_point() const;
  /// max |x| over the body (distance from the origin).
  double circumradius() const;
  std::pair<Vec, Vec> bounding_box() const;
  /// Largest t with c + t u in the body, for c interior and |u| = 1.
  double radial_exit(const Vec& c, const Vec& u) const;
  /// Exact surface-energy-ready polytope when the body already is one.
  std::optional<ConvexPolytope> as_polytope() const;

 private:
  Variant body_;
};

/// d=2: m equally spaced angles 2 pi k/m. d=3: the six axis directions first
/// when m >= 6, then a Fibonacci sphere grid. d>=4: the 2d axis directions.
std::vector<Vec> direction_set(int d, std::size_t m);

/// Q containing A from m tangent half-spaces along direction_set(d, m).
ConvexPolytope outer_polytope(const ConvexBody& body, std::size_t m);
/// Convex hull of the boundary points hit by rays from an interior point along direction_set(d, m).
ConvexPolytope inner_polytope(const ConvexBody& body, std::size_t m);
/// Convex hull of caller-supplied boundary points, each checked to lie in A.
ConvexPolytope inner_polytope(const ConvexBody& body, const std::vector<Vec>& boundary_points);

/// Edge {base, base + e_axis} of Z^d.
struct LatticeEdge {
  IVec base;
  int axis = 0;
  friend bool operator==(const LatticeEdge&, const LatticeEdge&) = default;
  friend auto operator<=>(const LatticeEdge&, const LatticeEdge&) = default;
};

/// nA cap Z^d (closed set convention), sorted lexicographically.
std::vector<IVec> discretize_body(const ConvexBody& body, std::int64_t n);
/// All edges <x, y> with x in nA and y outside, sorted.
std::vector<LatticeEdge> edge_boundary(const ConvexBody& body, std::int64_t n);

/// (d-1)-dimensional convex polytope lying in a hyperplane of R^d, described in
/// local coordinates p = ((x - origin) . axes_k)_k.
class FlatPolytope {
 public:
  FlatPolytope() = default;

  /// Hyperrectangle centred at `center`, normal to `normal`, with side lengths
  /// along orthonormal_complement(normal).
  static FlatPolytope hyperrectangle(const Vec& center, const Vec& normal, const std::vector<double>& sides);
  static FlatPolytope hyperrectangle(const Vec& center, const Vec& normal, const std::vector<Vec>& axes,
                                     const std::vector<double>& sides);
  /// A face of a polytope in d in {2,3}.
  static FlatPolytope from_face(const Face& face);

  int dim() const noexcept { return static_cast<int>(origin_.size()); }
  const Vec& origin() const noexcept { return origin_; }
  const Vec& normal() const noexcept { return normal_; }
  const std::vector<Vec>& axes() const noexcept { return axes_; }
  double area() const noexcept { return area_; }
  /// Vertices in R^d (empty for hyperrectangles when d >= 4).
  std::vector<Vec> vertices() const;

  FlatPolytope translated(const Vec& shift) const;

  double height(const Vec& x) const;  // (x - origin) . normal
  Vec to_local(const Vec& x) const;
  Vec from_local(const Vec& p, double height = 0.0) const;
  bool contains_local(const Vec& p, double tol = kGeomTol) const;
  /// In-plane distance from local point p to the polytope (zero inside).
  double local_distance(const Vec& p) const;
  /// Distance from a local point to the relative boundary of the polytope.
  double local_boundary_distance(const Vec& p) const;
  double distance(const Vec& x) const;
  /// Does the closed segment [a, b] meet the polytope shifted by `level` along the normal?
  bool segment_intersects(const Vec& a, const Vec& b, double level, double tol = kGeomTol) const;

 private:
  Vec origin_, normal_;
  std::vector<Vec> axes_;
  std::vector<Halfspace> local_constraints_;  // w . p <= b in local coordinates
  std::vector<Vec> local_vertices_;           // ordered for d = 3
  std::optional<std::vector<double>> half_sides_;  // set for hyperrectangles
  double area_ = 0.0;
};

/// cyl(A, h) = {x + t v : x in A, t in [-h, h]} for a flat base A with unit normal v.
struct Cylinder {
  FlatPolytope base;
  double half_height = 0.0;

  bool contains(const Vec& x, double tol = kGeomTol) const;
  /// Signed position along the normal relative to the base plane.
  double height(const Vec& x) const { return base.height(x); }
  std::pair<Vec, Vec> bounding_box() const;
};

enum class CylinderMode {
  top_bottom,     // sources T_n(A,h), sinks B_n(A,h)
  half_boundary,  // sources C'_{1,n}(A,h), sinks C'_{2,n}(A,h)
};

struct DiscreteCylinder {
  LatticeRegion region;                 // bounding box padded by one lattice step
  std::vector<std::int64_t> vertices;   // region indices of n cyl cap Z^d
  std::vector<std::int64_t> sources;    // T_n or C'_{1,n}
  std::vector<std::int64_t> sinks;      // B_n or C'_{2,n}
  std::vector<std::int64_t> edges;      // region edges with both endpoints in the cylinder
};

/// Lattice region [floor(n lo) - pad, ceil(n hi) + pad] around a continuum box.
LatticeRegion scaled_region(const std::pair<Vec, Vec>& box, std::int64_t n, std::int64_t pad);

DiscreteCylinder discretize_cylinder(const Cylinder& cylinder, std::int64_t n, CylinderMode mode);

/// Intersection of {x : x . y <= nu(y)} over the supplied unit directions.
ConvexPolytope wulff_crystal(const std::function<double(const Vec&)>& nu, const std::vector<Vec>& directions);

/// Hausdorff distance between two polytopes of dimension 2 or 3, using
/// vertex-to-body distances (exact for convex polytopes).
double hausdorff_distance(const ConvexPolytope& a, const ConvexPolytope& b);

}  // namespace percoflow
