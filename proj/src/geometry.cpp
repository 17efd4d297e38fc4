#include "percoflow/geometry.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numbers>
#include <random>

namespace percoflow {

// ---------------------------------------------------------------------------
// Vector helpers
// ---------------------------------------------------------------------------

double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(const Vec& a) { return std::sqrt(dot(a, a)); }

Vec operator+(const Vec& a, const Vec& b) {
  Vec r(a);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] += b[i];
  return r;
}

Vec operator-(const Vec& a, const Vec& b) {
  Vec r(a);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] -= b[i];
  return r;
}

Vec operator*(double s, const Vec& a) {
  Vec r(a);
  for (double& x : r) x *= s;
  return r;
}

Vec normalized(const Vec& a) {
  const double len = norm(a);
  if (!(len > 0.0)) throw Error(ErrorCode::InvalidArgument, "cannot normalise a zero vector");
  return (1.0 / len) * a;
}

Vec lattice_point(const IVec& x, double scale) {
  Vec p(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) p[i] = static_cast<double>(x[i]) / scale;
  return p;
}

namespace {

Vec cross(const Vec& a, const Vec& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

Vec unit(int d, int axis, double sign = 1.0) {
  Vec e(d, 0.0);
  e[axis] = sign;
  return e;
}

double point_segment_distance(const Vec& p, const Vec& a, const Vec& b) {
  const Vec ab = b - a;
  const double len2 = dot(ab, ab);
  double s = len2 > 0.0 ? dot(p - a, ab) / len2 : 0.0;
  s = std::clamp(s, 0.0, 1.0);
  return norm(p - (a + s * ab));
}

bool close(const Vec& a, const Vec& b, double tol) { return norm(a - b) <= tol; }

double scale_of(const std::vector<Halfspace>& hs) {
  double s = 1.0;
  for (const auto& h : hs) s = std::max(s, std::abs(h.offset));
  return s;
}

// Sutherland-Hodgman clip of a convex polygon by n . x <= offset.
std::vector<Vec> clip(const std::vector<Vec>& poly, const Halfspace& h) {
  std::vector<Vec> out;
  const std::size_t k = poly.size();
  for (std::size_t i = 0; i < k; ++i) {
    const Vec& p = poly[i];
    const Vec& q = poly[(i + 1) % k];
    const double dp = dot(h.normal, p) - h.offset;
    const double dq = dot(h.normal, q) - h.offset;
    if (dp <= 0.0) out.push_back(p);
    if ((dp < 0.0 && dq > 0.0) || (dp > 0.0 && dq < 0.0)) out.push_back(p + (dp / (dp - dq)) * (q - p));
  }
  std::vector<Vec> dedup;
  for (const auto& p : out)
    if (dedup.empty() || !close(dedup.back(), p, 1e-12 * (1.0 + norm(p)))) dedup.push_back(p);
  while (dedup.size() > 1 && close(dedup.front(), dedup.back(), 1e-12 * (1.0 + norm(dedup.front()))))
    dedup.pop_back();
  return dedup;
}

double polygon_area_2d(const std::vector<Vec>& poly) {
  double a = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vec& p = poly[i];
    const Vec& q = poly[(i + 1) % poly.size()];
    a += p[0] * q[1] - p[1] * q[0];
  }
  return 0.5 * a;
}

constexpr double kFar = 1e6;

std::vector<Halfspace> normalise_and_merge(std::vector<Halfspace> hs, int d) {
  std::vector<Halfspace> merged;
  for (auto& h : hs) {
    if (static_cast<int>(h.normal.size()) != d)
      throw Error(ErrorCode::InvalidArgument, "half-space dimension mismatch");
    const double len = norm(h.normal);
    if (!(len > 0.0)) throw Error(ErrorCode::InvalidArgument, "half-space with zero normal");
    h.normal = (1.0 / len) * h.normal;
    h.offset /= len;
    bool found = false;
    for (auto& m : merged) {
      if (close(m.normal, h.normal, 1e-12)) {
        m.offset = std::min(m.offset, h.offset);
        found = true;
        break;
      }
    }
    if (!found) merged.push_back(h);
  }
  return merged;
}

// Order the vertices of a planar polygon counter-clockwise seen from +normal.
std::vector<Vec> order_polygon(std::vector<Vec> pts, const Vec& normal) {
  Vec c(normal.size(), 0.0);
  for (const auto& p : pts) c = c + p;
  c = (1.0 / static_cast<double>(pts.size())) * c;
  const auto basis = orthonormal_complement(normal);
  std::sort(pts.begin(), pts.end(), [&](const Vec& a, const Vec& b) {
    const double ta = std::atan2(dot(a - c, basis[1]), dot(a - c, basis[0]));
    const double tb = std::atan2(dot(b - c, basis[1]), dot(b - c, basis[0]));
    return ta < tb;
  });
  return pts;
}

double polygon_area_3d(const std::vector<Vec>& poly, const Vec& normal) {
  Vec acc(3, 0.0);
  for (std::size_t i = 0; i < poly.size(); ++i) acc = acc + cross(poly[i], poly[(i + 1) % poly.size()]);
  return 0.5 * std::abs(dot(acc, normal));
}

bool solve3(const Vec& a, const Vec& b, const Vec& c, const Vec& rhs, Vec& x) {
  // rows a, b, c
  const double det = dot(a, cross(b, c));
  if (std::abs(det) < 1e-12) return false;
  const Vec bc = cross(b, c), ca = cross(c, a), ab = cross(a, b);
  x = (1.0 / det) * (rhs[0] * bc + rhs[1] * ca + rhs[2] * ab);
  return true;
}

}  // namespace

std::vector<Vec> orthonormal_complement(const Vec& v) {
  const int d = static_cast<int>(v.size());
  if (d == 2) return {Vec{-v[1], v[0]}};
  if (d == 3) {
    int k = 0;
    for (int i = 1; i < 3; ++i)
      if (std::abs(v[i]) < std::abs(v[k])) k = i;
    Vec e = unit(3, k);
    Vec u1 = normalized(e - dot(e, v) * v);
    return {u1, cross(v, u1)};
  }
  int skip = 0;
  for (int i = 1; i < d; ++i)
    if (std::abs(v[i]) > std::abs(v[skip])) skip = i;
  std::vector<Vec> basis;
  for (int i = 0; i < d; ++i) {
    if (i == skip) continue;
    Vec e = unit(d, i);
    e = e - dot(e, v) * v;
    for (const auto& b : basis) e = e - dot(e, b) * b;
    basis.push_back(normalized(e));
  }
  return basis;
}

// ---------------------------------------------------------------------------
// ConvexPolytope
// ---------------------------------------------------------------------------

ConvexPolytope ConvexPolytope::box(const Vec& lo, const Vec& hi) {
  const int d = static_cast<int>(lo.size());
  if (d < 2 || hi.size() != lo.size()) throw Error(ErrorCode::InvalidArgument, "box bounds mismatch");
  for (int i = 0; i < d; ++i)
    if (!(lo[i] < hi[i])) throw Error(ErrorCode::DegenerateBody, "box with empty interior");
  std::vector<Halfspace> hs;
  for (int i = 0; i < d; ++i) {
    hs.push_back({unit(d, i, -1.0), -lo[i]});
    hs.push_back({unit(d, i, 1.0), hi[i]});
  }
  if (d <= 3) {
    ConvexPolytope p = from_halfspaces(hs, d);
    p.box_ = std::make_pair(lo, hi);
    return p;
  }
  ConvexPolytope p;
  p.dim_ = d;
  p.halfspaces_ = hs;
  p.box_ = std::make_pair(lo, hi);
  for (const auto& h : hs) {
    double area = 1.0;
    const int axis = static_cast<int>(std::find_if(h.normal.begin(), h.normal.end(),
                                                   [](double x) { return x != 0.0; }) -
                                      h.normal.begin());
    for (int i = 0; i < d; ++i)
      if (i != axis) area *= hi[i] - lo[i];
    p.faces_.push_back(Face{h.normal, h.offset, area, {}});
  }
  return p;
}

ConvexPolytope ConvexPolytope::from_halfspaces(std::vector<Halfspace> input, int d) {
  if (d < 2) throw Error(ErrorCode::InvalidArgument, "dimension must be >= 2");
  std::vector<Halfspace> hs = normalise_and_merge(std::move(input), d);

  if (d >= 4) {
    Vec lo(d, -std::numeric_limits<double>::infinity()), hi(d, std::numeric_limits<double>::infinity());
    for (const auto& h : hs) {
      int axis = -1;
      for (int i = 0; i < d; ++i) {
        if (std::abs(std::abs(h.normal[i]) - 1.0) < 1e-12) axis = i;
      }
      if (axis < 0)
        throw Error(ErrorCode::InvalidArgument, "only axis-aligned boxes are supported for d >= 4");
      if (h.normal[axis] > 0)
        hi[axis] = std::min(hi[axis], h.offset);
      else
        lo[axis] = std::max(lo[axis], -h.offset);
    }
    for (int i = 0; i < d; ++i)
      if (!std::isfinite(lo[i]) || !std::isfinite(hi[i]))
        throw Error(ErrorCode::UnboundedPolytope, "half-spaces do not bound every axis");
    return box(lo, hi);
  }

  const double scale = scale_of(hs);
  const double tol = kGeomTol * scale;
  ConvexPolytope p;
  p.dim_ = d;

  if (d == 2) {
    std::vector<Vec> poly = {{-kFar, -kFar}, {kFar, -kFar}, {kFar, kFar}, {-kFar, kFar}};
    for (const auto& h : hs) {
      poly = clip(poly, h);
      if (poly.size() < 3) throw Error(ErrorCode::DegenerateBody, "half-space intersection is empty");
    }
    if (polygon_area_2d(poly) < 1e-14 * scale * scale)
      throw Error(ErrorCode::DegenerateBody, "half-space intersection has empty interior");
    for (const auto& v : poly)
      if (std::abs(v[0]) > 0.5 * kFar || std::abs(v[1]) > 0.5 * kFar)
        throw Error(ErrorCode::UnboundedPolytope, "half-space intersection is unbounded");
    p.vertices_ = poly;
    for (const auto& h : hs) {
      const Vec t{-h.normal[1], h.normal[0]};
      std::vector<Vec> on;
      for (const auto& v : poly)
        if (std::abs(dot(h.normal, v) - h.offset) <= tol) on.push_back(v);
      if (on.size() < 2) continue;
      auto [mn, mx] = std::minmax_element(on.begin(), on.end(),
                                          [&](const Vec& a, const Vec& b) { return dot(a, t) < dot(b, t); });
      const double len = norm(*mx - *mn);
      if (len <= tol) continue;
      p.halfspaces_.push_back(h);
      p.faces_.push_back(Face{h.normal, h.offset, len, {*mn, *mx}});
    }
    return p;
  }

  // d == 3: vertex enumeration over plane triples, bounded by a far box.
  std::vector<Halfspace> planes = hs;
  for (int i = 0; i < 3; ++i) {
    planes.push_back({unit(3, i, 1.0), kFar});
    planes.push_back({unit(3, i, -1.0), kFar});
  }
  std::vector<Vec> verts;
  const std::size_t m = planes.size();
  Vec x;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j)
      for (std::size_t k = j + 1; k < m; ++k) {
        if (!solve3(planes[i].normal, planes[j].normal, planes[k].normal,
                    {planes[i].offset, planes[j].offset, planes[k].offset}, x))
          continue;
        bool feasible = true;
        for (const auto& h : planes)
          if (dot(h.normal, x) > h.offset + kGeomTol * std::max(1.0, std::abs(h.offset))) {
            feasible = false;
            break;
          }
        if (!feasible) continue;
        bool dup = false;
        for (const auto& v : verts)
          if (close(v, x, tol)) {
            dup = true;
            break;
          }
        if (!dup) verts.push_back(x);
      }
  if (verts.size() < 4) throw Error(ErrorCode::DegenerateBody, "half-space intersection has empty interior");
  for (const auto& v : verts)
    for (double c : v)
      if (std::abs(c) > 0.5 * kFar) throw Error(ErrorCode::UnboundedPolytope, "half-space intersection is unbounded");
  p.vertices_ = verts;
  for (const auto& h : hs) {
    std::vector<Vec> on;
    for (const auto& v : verts)
      if (std::abs(dot(h.normal, v) - h.offset) <= tol) on.push_back(v);
    if (on.size() < 3) continue;
    on = order_polygon(std::move(on), h.normal);
    const double area = polygon_area_3d(on, h.normal);
    if (area <= 1e-12 * scale * scale) continue;
    p.halfspaces_.push_back(h);
    p.faces_.push_back(Face{h.normal, h.offset, area, std::move(on)});
  }
  if (p.volume() <= 1e-14 * scale * scale * scale)
    throw Error(ErrorCode::DegenerateBody, "half-space intersection has empty interior");
  return p;
}

ConvexPolytope ConvexPolytope::hull(const std::vector<Vec>& points) {
  if (points.empty()) throw Error(ErrorCode::DegenerateBody, "hull of no points");
  const int d = static_cast<int>(points.front().size());
  double scale = 1.0;
  for (const auto& p : points) scale = std::max(scale, norm(p));
  std::vector<Halfspace> hs;
  if (d == 2) {
    std::vector<Vec> pts = points;
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end(), [&](const Vec& a, const Vec& b) { return close(a, b, 1e-12 * scale); }),
              pts.end());
    if (pts.size() < 3) throw Error(ErrorCode::DegenerateBody, "hull needs three distinct points");
    auto turn = [](const Vec& o, const Vec& a, const Vec& b) {
      return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
    };
    std::vector<Vec> h(2 * pts.size());
    std::size_t k = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      while (k >= 2 && turn(h[k - 2], h[k - 1], pts[i]) <= 1e-14 * scale * scale) --k;
      h[k++] = pts[i];
    }
    for (std::size_t i = pts.size() - 1, t = k + 1; i > 0; --i) {
      while (k >= t && turn(h[k - 2], h[k - 1], pts[i - 1]) <= 1e-14 * scale * scale) --k;
      h[k++] = pts[i - 1];
    }
    h.resize(k - 1);
    if (h.size() < 3) throw Error(ErrorCode::DegenerateBody, "points are collinear");
    for (std::size_t i = 0; i < h.size(); ++i) {
      const Vec& a = h[i];
      const Vec& b = h[(i + 1) % h.size()];
      const Vec n = normalized(Vec{b[1] - a[1], a[0] - b[0]});
      hs.push_back({n, dot(n, a)});
    }
    return from_halfspaces(hs, 2);
  }
  if (d != 3) throw Error(ErrorCode::InvalidArgument, "hull is implemented for d in {2,3}");
  const std::size_t m = points.size();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j)
      for (std::size_t k = j + 1; k < m; ++k) {
        Vec n = cross(points[j] - points[i], points[k] - points[i]);
        const double len = norm(n);
        if (len <= 1e-12 * scale * scale) continue;
        n = (1.0 / len) * n;
        double off = dot(n, points[i]);
        bool above = false, below = false;
        for (const auto& q : points) {
          const double s = dot(n, q) - off;
          if (s > 1e-10 * scale) above = true;
          if (s < -1e-10 * scale) below = true;
          if (above && below) break;
        }
        if (above && below) continue;
        if (!above && !below) continue;  // all coplanar
        if (above) {
          n = -1.0 * n;
          off = -off;
        }
        hs.push_back({n, off});
      }
  if (hs.empty()) throw Error(ErrorCode::DegenerateBody, "points are coplanar");
  return from_halfspaces(hs, 3);
}

bool ConvexPolytope::contains(const Vec& x, double tol) const {
  if (box_) {
    for (int i = 0; i < dim_; ++i)
      if (x[i] < box_->first[i] - tol || x[i] > box_->second[i] + tol) return false;
    return true;
  }
  for (const auto& h : halfspaces_)
    if (dot(h.normal, x) > h.offset + tol) return false;
  return true;
}

double ConvexPolytope::support(const Vec& y) const {
  if (box_) {
    double s = 0.0;
    for (int i = 0; i < dim_; ++i) s += std::max(box_->first[i] * y[i], box_->second[i] * y[i]);
    return s;
  }
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& v : vertices_) best = std::max(best, dot(v, y));
  return best;
}

double ConvexPolytope::surface_area() const {
  double s = 0.0;
  for (const auto& f : faces_) s += f.area;
  return s;
}

double ConvexPolytope::volume() const {
  if (box_) {
    double v = 1.0;
    for (int i = 0; i < dim_; ++i) v *= box_->second[i] - box_->first[i];
    return v;
  }
  double v = 0.0;
  for (const auto& f : faces_) v += f.area * f.offset;
  return v / dim_;
}

Vec ConvexPolytope::interior_point() const {
  if (box_) return 0.5 * (box_->first + box_->second);
  Vec c(dim_, 0.0);
  for (const auto& v : vertices_) c = c + v;
  return (1.0 / static_cast<double>(vertices_.size())) * c;
}

std::pair<Vec, Vec> ConvexPolytope::bounding_box() const {
  if (box_) return *box_;
  Vec lo(dim_, std::numeric_limits<double>::infinity()), hi(dim_, -std::numeric_limits<double>::infinity());
  for (const auto& v : vertices_)
    for (int i = 0; i < dim_; ++i) {
      lo[i] = std::min(lo[i], v[i]);
      hi[i] = std::max(hi[i], v[i]);
    }
  return {lo, hi};
}

double ConvexPolytope::distance(const Vec& x) const {
  if (contains(x, 0.0)) return 0.0;
  if (box_) {
    double s = 0.0;
    for (int i = 0; i < dim_; ++i) {
      const double c = std::clamp(x[i], box_->first[i], box_->second[i]);
      s += (x[i] - c) * (x[i] - c);
    }
    return std::sqrt(s);
  }
  double best = std::numeric_limits<double>::infinity();
  if (dim_ == 2) {
    for (const auto& f : faces_) best = std::min(best, point_segment_distance(x, f.vertices[0], f.vertices[1]));
    return best;
  }
  for (const auto& f : faces_) best = std::min(best, FlatPolytope::from_face(f).distance(x));
  return best;
}

std::vector<std::pair<std::size_t, std::size_t>> ConvexPolytope::adjacent_faces() const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i = 0; i < faces_.size(); ++i)
    for (std::size_t j = i + 1; j < faces_.size(); ++j) {
      if (dim_ >= 4) {
        if (std::abs(dot(faces_[i].normal, faces_[j].normal)) < 0.5) out.emplace_back(i, j);
        continue;
      }
      if (shared_side(i, j).size() >= static_cast<std::size_t>(dim_ - 1)) out.emplace_back(i, j);
    }
  return out;
}

std::vector<Vec> ConvexPolytope::shared_side(std::size_t i, std::size_t j) const {
  std::vector<Vec> out;
  for (const auto& a : faces_.at(i).vertices)
    for (const auto& b : faces_.at(j).vertices)
      if (close(a, b, 1e-9 * (1.0 + norm(a)))) out.push_back(a);
  return out;
}

std::vector<Face> face_decomposition(const ConvexPolytope& polytope) {
  if (polytope.dim() == 0) throw Error(ErrorCode::UnboundedPolytope, "empty polytope record");
  return polytope.faces();
}

// ---------------------------------------------------------------------------
// ConvexBody
// ---------------------------------------------------------------------------

ConvexBody::ConvexBody(Variant body) : body_(std::move(body)) {
  if (dim() < 2) throw Error(ErrorCode::InvalidArgument, "body dimension must be >= 2");
  if (auto* b = std::get_if<Box>(&body_); b && b->lo.size() != b->hi.size())
    throw Error(ErrorCode::InvalidArgument, "box bounds mismatch");
}

int ConvexBody::dim() const {
  return std::visit([](const auto& b) -> int {
    using T = std::decay_t<decltype(b)>;
    if constexpr (std::is_same_v<T, Ball>) return static_cast<int>(b.center.size());
    else if constexpr (std::is_same_v<T, Box>) return static_cast<int>(b.lo.size());
    else return b.dim();
  }, body_);
}

bool ConvexBody::degenerate() const {
  if (auto* b = std::get_if<Ball>(&body_)) return !(b->radius > 0.0);
  if (auto* b = std::get_if<Box>(&body_)) {
    for (std::size_t i = 0; i < b->lo.size(); ++i)
      if (!(b->lo[i] < b->hi[i])) return true;
  }
  return false;
}

bool ConvexBody::contains(const Vec& x, double tol) const {
  if (auto* b = std::get_if<Ball>(&body_)) return norm(x - b->center) <= b->radius + tol;
  if (auto* b = std::get_if<Box>(&body_)) {
    for (std::size_t i = 0; i < b->lo.size(); ++i)
      if (x[i] < b->lo[i] - tol || x[i] > b->hi[i] + tol) return false;
    return true;
  }
  return std::get<ConvexPolytope>(body_).contains(x, tol);
}

double ConvexBody::support(const Vec& y) const {
  if (auto* b = std::get_if<Ball>(&body_)) return dot(b->center, y) + b->radius * norm(y);
  if (auto* b = std::get_if<Box>(&body_)) {
    double s = 0.0;
    for (std::size_t i = 0; i < b->lo.size(); ++i) s += std::max(b->lo[i] * y[i], b->hi[i] * y[i]);
    return s;
  }
  return std::get<ConvexPolytope>(body_).support(y);
}

Vec ConvexBody::interior_point() const {
  if (auto* b = std::get_if<Ball>(&body_)) return b->center;
  if (auto* b = std::get_if<Box>(&body_)) return 0.5 * (b->lo + b->hi);
  return std::get<ConvexPolytope>(body_).interior_point();
}

double ConvexBody::circumradius() const {
  if (auto* b = std::get_if<Ball>(&body_)) return norm(b->center) + b->radius;
  if (auto* b = std::get_if<Box>(&body_)) {
    double s = 0.0;
    for (std::size_t i = 0; i < b->lo.size(); ++i) s += std::max(b->lo[i] * b->lo[i], b->hi[i] * b->hi[i]);
    return std::sqrt(s);
  }
  const auto& p = std::get<ConvexPolytope>(body_);
  if (p.is_box()) {
    auto [lo, hi] = p.bounding_box();
    return ConvexBody::box(lo, hi).circumradius();
  }
  double r = 0.0;
  for (const auto& v : p.vertices()) r = std::max(r, norm(v));
  return r;
}

std::pair<Vec, Vec> ConvexBody::bounding_box() const {
  if (auto* b = std::get_if<Ball>(&body_)) {
    Vec r(b->center.size(), b->radius);
    return {b->center - r, b->center + r};
  }
  if (auto* b = std::get_if<Box>(&body_)) return {b->lo, b->hi};
  return std::get<ConvexPolytope>(body_).bounding_box();
}

double ConvexBody::radial_exit(const Vec& c, const Vec& u) const {
  if (auto* b = std::get_if<Ball>(&body_)) {
    const Vec w = c - b->center;
    const double bb = dot(w, u);
    const double disc = bb * bb - (dot(w, w) - b->radius * b->radius);
    return -bb + std::sqrt(std::max(disc, 0.0));
  }
  double t = std::numeric_limits<double>::infinity();
  if (auto* b = std::get_if<Box>(&body_)) {
    for (std::size_t i = 0; i < b->lo.size(); ++i) {
      if (u[i] > 0) t = std::min(t, (b->hi[i] - c[i]) / u[i]);
      if (u[i] < 0) t = std::min(t, (b->lo[i] - c[i]) / u[i]);
    }
    return t;
  }
  for (const auto& h : std::get<ConvexPolytope>(body_).halfspaces()) {
    const double nu = dot(h.normal, u);
    if (nu > 0) t = std::min(t, (h.offset - dot(h.normal, c)) / nu);
  }
  return t;
}

std::optional<ConvexPolytope> ConvexBody::as_polytope() const {
  if (auto* b = std::get_if<Box>(&body_)) return ConvexPolytope::box(b->lo, b->hi);
  if (auto* p = std::get_if<ConvexPolytope>(&body_)) return *p;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Polytope approximation
// ---------------------------------------------------------------------------

std::vector<Vec> direction_set(int d, std::size_t m) {
  std::vector<Vec> dirs;
  if (d == 2) {
    for (std::size_t k = 0; k < m; ++k) {
      if ((4 * k) % m == 0) {
        static const Vec axes[4] = {{1.0, 0.0}, {0.0, 1.0}, {-1.0, 0.0}, {0.0, -1.0}};
        dirs.push_back(axes[(4 * k) / m]);
        continue;
      }
      const double t = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(m);
      dirs.push_back({std::cos(t), std::sin(t)});
    }
    return dirs;
  }
  if (d == 3) {
    std::size_t rest = m;
    if (m >= 6) {
      for (int i = 0; i < 3; ++i) {
        dirs.push_back(unit(3, i, 1.0));
        dirs.push_back(unit(3, i, -1.0));
      }
      rest = m - 6;
    }
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (std::size_t i = 0; i < rest; ++i) {
      const double z = 1.0 - 2.0 * (static_cast<double>(i) + 0.5) / static_cast<double>(rest);
      const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      const double phi = golden * static_cast<double>(i);
      dirs.push_back({r * std::cos(phi), r * std::sin(phi), z});
    }
    return dirs;
  }
  if (m < static_cast<std::size_t>(2 * d))
    throw Error(ErrorCode::InvalidArgument, "d >= 4 needs at least the 2d axis directions");
  for (int i = 0; i < d; ++i) {
    dirs.push_back(unit(d, i, 1.0));
    dirs.push_back(unit(d, i, -1.0));
  }
  return dirs;
}

namespace {

std::vector<Vec> sample_body(const ConvexBody& body, std::size_t count) {
  std::mt19937_64 rng(0x5eed5eedULL);
  auto [lo, hi] = body.bounding_box();
  std::vector<Vec> pts;
  Vec x(lo.size());
  std::size_t attempts = 0;
  while (pts.size() < count && attempts < 200 * count) {
    ++attempts;
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::uniform_real_distribution<double>(lo[i], hi[i])(rng);
    if (body.contains(x, 0.0)) pts.push_back(x);
  }
  return pts;
}

}  // namespace

ConvexPolytope outer_polytope(const ConvexBody& body, std::size_t m) {
  const int d = body.dim();
  if (m < static_cast<std::size_t>(d + 1)) throw Error(ErrorCode::InvalidArgument, "need m >= d+1 directions");
  if (body.degenerate()) throw Error(ErrorCode::DegenerateBody, "body has empty interior");
  if (d >= 4) {
    auto poly = body.as_polytope();
    if (!poly || !poly->is_box()) throw Error(ErrorCode::InvalidArgument, "d >= 4 supports boxes only");
    return *poly;
  }
  std::vector<Halfspace> hs;
  for (const auto& u : direction_set(d, m)) hs.push_back({u, body.support(u)});
  ConvexPolytope q = ConvexPolytope::from_halfspaces(std::move(hs), d);
  const double tol = kGeomTol * std::max(1.0, body.circumradius());
  for (const auto& x : sample_body(body, 1000))
    if (!q.contains(x, tol)) throw std::logic_error("outer polytope does not contain a sample point of A");
  return q;
}

ConvexPolytope inner_polytope(const ConvexBody& body, const std::vector<Vec>& boundary_points) {
  const double tol = kGeomTol * std::max(1.0, body.circumradius());
  for (const auto& x : boundary_points)
    if (!body.contains(x, tol)) throw Error(ErrorCode::InvalidArgument, "hull point lies outside A");
  ConvexPolytope p = ConvexPolytope::hull(boundary_points);
  for (const auto& v : p.vertices())
    if (!body.contains(v, tol)) throw std::logic_error("inner polytope vertex escapes A");
  return p;
}

ConvexPolytope inner_polytope(const ConvexBody& body, std::size_t m) {
  const int d = body.dim();
  if (body.degenerate()) throw Error(ErrorCode::DegenerateBody, "body has empty interior");
  if (d > 3) throw Error(ErrorCode::InvalidArgument, "inner polytopes need d in {2,3}");
  if (m < static_cast<std::size_t>(d + 1)) throw Error(ErrorCode::InvalidArgument, "need m >= d+1 points");
  const Vec c = body.interior_point();
  std::vector<Vec> pts;
  for (const auto& u : direction_set(d, m)) pts.push_back(c + body.radial_exit(c, u) * u);
  return inner_polytope(body, pts);
}

// ---------------------------------------------------------------------------
// Discretisation of bodies
// ---------------------------------------------------------------------------

namespace {

// Visits every integer point of [lo, hi] in lexicographic order.
template <class F>
void for_each_point(const IVec& lo, const IVec& hi, F&& f) {
  const std::size_t d = lo.size();
  IVec x = lo;
  while (true) {
    f(x);
    std::size_t i = d;
    while (i > 0) {
      --i;
      if (x[i] < hi[i]) {
        ++x[i];
        for (std::size_t j = i + 1; j < d; ++j) x[j] = lo[j];
        break;
      }
      if (i == 0) return;
    }
  }
}

}  // namespace

LatticeRegion scaled_region(const std::pair<Vec, Vec>& box, std::int64_t n, std::int64_t pad) {
  const std::size_t d = box.first.size();
  IVec lo(d), hi(d);
  const double s = static_cast<double>(n);
  for (std::size_t i = 0; i < d; ++i) {
    lo[i] = static_cast<std::int64_t>(std::floor(s * box.first[i] - 1e-9)) - pad;
    hi[i] = static_cast<std::int64_t>(std::ceil(s * box.second[i] + 1e-9)) + pad;
    if (hi[i] <= lo[i]) hi[i] = lo[i] + 1;
  }
  return LatticeRegion(lo, hi);
}

std::vector<IVec> discretize_body(const ConvexBody& body, std::int64_t n) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "scale n must be >= 1");
  const LatticeRegion region = scaled_region(body.bounding_box(), n, 0);
  std::vector<IVec> out;
  const double s = static_cast<double>(n);
  for_each_point(region.lo(), region.hi(), [&](const IVec& x) {
    if (body.contains(lattice_point(x, s))) out.push_back(x);
  });
  if (out.empty()) throw Error(ErrorCode::EmptyDiscretization, "nA contains no lattice point");
  return out;
}

std::vector<LatticeEdge> edge_boundary(const ConvexBody& body, std::int64_t n) {
  const std::vector<IVec> inside = discretize_body(body, n);
  const LatticeRegion region = scaled_region(body.bounding_box(), n, 1);
  std::vector<char> flag(static_cast<std::size_t>(region.vertex_count()), 0);
  for (const auto& x : inside) flag[static_cast<std::size_t>(region.vertex_index(x))] = 1;
  const int d = region.dim();
  std::vector<LatticeEdge> out;
  for (const auto& x : inside) {
    const std::int64_t u = region.vertex_index(x);
    for (int a = 0; a < d; ++a) {
      if (!flag[static_cast<std::size_t>(u + region.stride(a))]) out.push_back({x, a});
      if (!flag[static_cast<std::size_t>(u - region.stride(a))]) {
        IVec y = x;
        --y[a];
        out.push_back({y, a});
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------------------
// Flat polytopes and cylinders
// ---------------------------------------------------------------------------

FlatPolytope FlatPolytope::hyperrectangle(const Vec& center, const Vec& normal, const std::vector<double>& sides) {
  const Vec v = normalized(normal);
  return hyperrectangle(center, v, orthonormal_complement(v), sides);
}

FlatPolytope FlatPolytope::hyperrectangle(const Vec& center, const Vec& normal, const std::vector<Vec>& axes,
                                          const std::vector<double>& sides) {
  const int d = static_cast<int>(center.size());
  if (static_cast<int>(axes.size()) != d - 1 || static_cast<int>(sides.size()) != d - 1)
    throw Error(ErrorCode::InvalidArgument, "hyperrectangle needs d-1 axes and sides");
  FlatPolytope f;
  f.origin_ = center;
  f.normal_ = normalized(normal);
  f.axes_ = axes;
  f.area_ = 1.0;
  std::vector<double> half;
  for (int k = 0; k < d - 1; ++k) {
    if (!(sides[k] >= 0.0)) throw Error(ErrorCode::InvalidArgument, "negative side length");
    f.area_ *= sides[k];
    half.push_back(0.5 * sides[k]);
    f.local_constraints_.push_back({unit(d - 1, k, 1.0), half[k]});
    f.local_constraints_.push_back({unit(d - 1, k, -1.0), half[k]});
  }
  if (d == 2) {
    f.local_vertices_ = {{-half[0]}, {half[0]}};
  } else if (d == 3) {
    f.local_vertices_ = {{-half[0], -half[1]}, {half[0], -half[1]}, {half[0], half[1]}, {-half[0], half[1]}};
  }
  f.half_sides_ = half;
  return f;
}

FlatPolytope FlatPolytope::from_face(const Face& face) {
  const int d = static_cast<int>(face.normal.size());
  if (d != 2 && d != 3) throw Error(ErrorCode::InvalidArgument, "faces with vertices exist only for d in {2,3}");
  FlatPolytope f;
  f.normal_ = face.normal;
  f.axes_ = orthonormal_complement(face.normal);
  Vec c(d, 0.0);
  for (const auto& v : face.vertices) c = c + v;
  f.origin_ = (1.0 / static_cast<double>(face.vertices.size())) * c;
  // snap the origin onto the supporting hyperplane
  f.origin_ = f.origin_ + (face.offset - dot(face.normal, f.origin_)) * face.normal;
  for (const auto& v : face.vertices) f.local_vertices_.push_back(f.to_local(v));
  if (d == 2) {
    double a = f.local_vertices_[0][0], b = f.local_vertices_[1][0];
    if (a > b) std::swap(a, b);
    f.local_vertices_ = {{a}, {b}};
    f.local_constraints_ = {{{1.0}, b}, {{-1.0}, -a}};
    f.area_ = b - a;
  } else {
    const auto& lv = f.local_vertices_;
    double area = 0.0;
    for (std::size_t i = 0; i < lv.size(); ++i) {
      const Vec& p = lv[i];
      const Vec& q = lv[(i + 1) % lv.size()];
      area += p[0] * q[1] - p[1] * q[0];
      const Vec w = normalized(Vec{q[1] - p[1], p[0] - q[0]});
      f.local_constraints_.push_back({w, dot(w, p)});
    }
    f.area_ = 0.5 * area;
    if (f.area_ < 0) throw std::logic_error("face polygon is not counter-clockwise");
  }
  return f;
}

std::vector<Vec> FlatPolytope::vertices() const {
  std::vector<Vec> out;
  if (!local_vertices_.empty()) {
    for (const auto& p : local_vertices_) out.push_back(from_local(p));
    return out;
  }
  const int k = dim() - 1;
  for (std::uint64_t mask = 0; mask < (1ULL << k); ++mask) {
    Vec p(k);
    for (int i = 0; i < k; ++i) p[i] = ((mask >> i) & 1) ? (*half_sides_)[i] : -(*half_sides_)[i];
    out.push_back(from_local(p));
  }
  return out;
}

FlatPolytope FlatPolytope::translated(const Vec& shift) const {
  FlatPolytope f = *this;
  f.origin_ = f.origin_ + shift;
  return f;
}

double FlatPolytope::height(const Vec& x) const { return dot(x - origin_, normal_); }

Vec FlatPolytope::to_local(const Vec& x) const {
  const Vec w = x - origin_;
  Vec p(axes_.size());
  for (std::size_t k = 0; k < axes_.size(); ++k) p[k] = dot(w, axes_[k]);
  return p;
}

Vec FlatPolytope::from_local(const Vec& p, double h) const {
  Vec x = origin_ + h * normal_;
  for (std::size_t k = 0; k < axes_.size(); ++k) x = x + p[k] * axes_[k];
  return x;
}

bool FlatPolytope::contains_local(const Vec& p, double tol) const {
  for (const auto& c : local_constraints_)
    if (dot(c.normal, p) > c.offset + tol) return false;
  return true;
}

double FlatPolytope::local_distance(const Vec& p) const {
  if (contains_local(p, 0.0)) return 0.0;
  if (half_sides_) {
    double s = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
      const double e = std::max(0.0, std::abs(p[k]) - (*half_sides_)[k]);
      s += e * e;
    }
    return std::sqrt(s);
  }
  if (p.size() == 1) {
    const double a = local_vertices_[0][0], b = local_vertices_[1][0];
    return p[0] < a ? a - p[0] : p[0] - b;
  }
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < local_vertices_.size(); ++i)
    best = std::min(best, point_segment_distance(p, local_vertices_[i],
                                                 local_vertices_[(i + 1) % local_vertices_.size()]));
  return best;
}

double FlatPolytope::local_boundary_distance(const Vec& p) const {
  if (!contains_local(p, 0.0)) return local_distance(p);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& c : local_constraints_) best = std::min(best, c.offset - dot(c.normal, p));
  return best;
}

double FlatPolytope::distance(const Vec& x) const {
  const double h = height(x);
  const double r = local_distance(to_local(x));
  return std::sqrt(h * h + r * r);
}

bool FlatPolytope::segment_intersects(const Vec& a, const Vec& b, double level, double tol) const {
  const double ha = height(a) - level;
  const double hb = height(b) - level;
  const Vec pa = to_local(a);
  const Vec pb = to_local(b);
  if (std::abs(ha) <= tol && std::abs(hb) <= tol) {
    // Segment lies in the plane: clip [0,1] against the local constraints.
    double s0 = 0.0, s1 = 1.0;
    for (const auto& c : local_constraints_) {
      const double fa = dot(c.normal, pa) - c.offset - tol;
      const double fb = dot(c.normal, pb) - c.offset - tol;
      if (fa > 0 && fb > 0) return false;
      if (fa > 0) s0 = std::max(s0, fa / (fa - fb));
      if (fb > 0) s1 = std::min(s1, fa / (fa - fb));
    }
    return s0 <= s1;
  }
  double s;
  if (std::abs(ha) <= tol) {
    s = 0.0;
  } else if (std::abs(hb) <= tol) {
    s = 1.0;
  } else if ((ha > 0) == (hb > 0)) {
    return false;
  } else {
    s = ha / (ha - hb);
  }
  return contains_local(pa + s * (pb - pa), tol);
}

bool Cylinder::contains(const Vec& x, double tol) const {
  return std::abs(base.height(x)) <= half_height + tol && base.contains_local(base.to_local(x), tol);
}

std::pair<Vec, Vec> Cylinder::bounding_box() const {
  const int d = base.dim();
  Vec lo(d, std::numeric_limits<double>::infinity()), hi(d, -std::numeric_limits<double>::infinity());
  for (const auto& v : base.vertices())
    for (double s : {-half_height, half_height}) {
      const Vec p = v + s * base.normal();
      for (int i = 0; i < d; ++i) {
        lo[i] = std::min(lo[i], p[i]);
        hi[i] = std::max(hi[i], p[i]);
      }
    }
  return {lo, hi};
}

DiscreteCylinder discretize_cylinder(const Cylinder& cylinder, std::int64_t n, CylinderMode mode) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "scale n must be >= 1");
  if (!(cylinder.base.area() > 0.0) || !(cylinder.half_height > 0.0))
    throw Error(ErrorCode::DegenerateCylinder, "cylinder base area and height must be positive");
  DiscreteCylinder out;
  out.region = scaled_region(cylinder.bounding_box(), n, 1);
  const LatticeRegion& region = out.region;
  const int d = region.dim();
  const double s = static_cast<double>(n);
  const auto count = static_cast<std::size_t>(region.vertex_count());
  std::vector<char> inside(count, 0);
  IVec x;
  for (std::int64_t u = 0; u < region.vertex_count(); ++u) {
    region.vertex_coords(u, x);
    if (cylinder.contains(lattice_point(x, s))) {
      inside[static_cast<std::size_t>(u)] = 1;
      out.vertices.push_back(u);
    }
  }
  for (std::int64_t u : out.vertices) {
    region.vertex_coords(u, x);
    const Vec p = lattice_point(x, s);
    bool top = false, bottom = false, boundary = false;
    for (int a = 0; a < d; ++a)
      for (int sign : {-1, 1}) {
        const std::int64_t w = u + sign * region.stride(a);
        if (inside[static_cast<std::size_t>(w)]) continue;
        boundary = true;
        if (mode == CylinderMode::top_bottom) {
          IVec y = x;
          y[a] += sign;
          const Vec q = lattice_point(y, s);
          if (cylinder.base.segment_intersects(p, q, cylinder.half_height)) top = true;
          if (cylinder.base.segment_intersects(p, q, -cylinder.half_height)) bottom = true;
        }
      }
    if (mode == CylinderMode::half_boundary && boundary) {
      const double h = cylinder.height(p);
      top = h > kGeomTol;
      bottom = h < -kGeomTol;
    }
    if (top) out.sources.push_back(u);
    if (bottom) out.sinks.push_back(u);
  }
  region.for_each_edge([&](std::int64_t e, std::int64_t u, std::int64_t v, int) {
    if (inside[static_cast<std::size_t>(u)] && inside[static_cast<std::size_t>(v)]) out.edges.push_back(e);
  });
  if (out.sources.empty() || out.sinks.empty())
    throw Error(ErrorCode::DegenerateCylinder, "discretised cylinder has an empty source or sink set");
  std::vector<std::int64_t> both;
  std::set_intersection(out.sources.begin(), out.sources.end(), out.sinks.begin(), out.sinks.end(),
                        std::back_inserter(both));
  if (!both.empty()) throw Error(ErrorCode::DegenerateCylinder, "source and sink sets overlap at this scale");
  return out;
}

ConvexPolytope wulff_crystal(const std::function<double(const Vec&)>& nu, const std::vector<Vec>& directions) {
  if (directions.empty()) throw Error(ErrorCode::InvalidArgument, "no directions");
  std::vector<Halfspace> hs;
  for (const auto& y : directions) {
    const double value = nu(y);
    if (!(value > 0.0)) throw Error(ErrorCode::InvalidArgument, "nu must be positive on every direction");
    hs.push_back({y, value});
  }
  try {
    return ConvexPolytope::from_halfspaces(std::move(hs), static_cast<int>(directions.front().size()));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::DegenerateBody) throw Error(ErrorCode::EmptyCrystal, e.what());
    throw;
  }
}

double hausdorff_distance(const ConvexPolytope& a, const ConvexPolytope& b) {
  double h = 0.0;
  for (const auto& v : a.vertices()) h = std::max(h, b.distance(v));
  for (const auto& v : b.vertices()) h = std::max(h, a.distance(v));
  return h;
}

}  // namespace percoflow
