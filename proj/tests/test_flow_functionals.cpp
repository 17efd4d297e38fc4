#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "percoflow/flow_functionals.hpp"

using namespace percoflow;

namespace {

// Unit base normal to e2, shifted by 1/(4n) so that it holds exactly n lattice columns.
Cylinder unit_cylinder(std::int64_t n, double h) {
  const double shift = 0.25 / static_cast<double>(n);
  return {FlatPolytope::hyperrectangle({0.5 + shift, 0.0}, {0.0, 1.0}, std::vector<double>{1.0}), h};
}

Environment field(int d, const CapacityLaw& law, std::uint64_t seed, std::uint64_t replica = 0) {
  return sample_environment(LatticeRegion::centered_box(d, 1), law, seed, replica);
}

double boundary_capacity(const ConvexBody& body, std::int64_t n, const Environment& env) {
  double s = 0.0;
  for (const auto& e : edge_boundary(body, n)) s += edge_capacity(env, e.base, e.axis);
  return s;
}

}  // namespace

TEST_CASE("edge_capacity agrees with sampled environments everywhere") {
  const auto law = CapacityLaw::exponential(1.0);
  const auto big = sample_environment(LatticeRegion({-6, -6}, {6, 6}), law, 5, 3);
  const auto tiny = field(2, law, 5, 3);
  big.region().for_each_edge([&](std::int64_t e, std::int64_t, std::int64_t, int) {
    auto [base, axis] = big.region().edge_geometry(e);
    CHECK(edge_capacity(tiny, base, axis) == big.capacity(e));
  });
}

TEST_CASE("flat cylinder flows under constant laws") {
  for (double c : {1.0, 2.5}) {
    const auto env = field(2, CapacityLaw::constant(c), 1);
    CHECK(phi_cylinder(unit_cylinder(8, 1.0), 8, env) == 8 * c);
    CHECK(tau_cylinder(unit_cylinder(8, 1.0), 8, env) == 8 * c);
  }
  const auto zero = field(2, CapacityLaw::constant(0.0), 1);
  CHECK(phi_cylinder(unit_cylinder(8, 1.0), 8, zero) == 0.0);
  CHECK(tau_cylinder(unit_cylinder(8, 1.0), 8, zero) == 0.0);
}

TEST_CASE("phi_cylinder equals the exhaustive cut at n = 3") {
  const auto cyl = unit_cylinder(3, 0.5);
  const auto dc = discretize_cylinder(cyl, 3, CylinderMode::top_bottom);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto env = field(2, CapacityLaw::bernoulli_scaled(0.5, 1.0), seed);
    const auto problem = cylinder_problem(dc, env);
    REQUIRE(problem.edges.size() <= 20);
    CHECK(phi_cylinder(cyl, 3, env) == brute_force_min_cut(problem).capacity);
  }
}

TEST_CASE("top and bottom sets sit inside the boundary halves, so phi never exceeds tau") {
  const std::vector<Cylinder> cylinders = {
      unit_cylinder(8, 1.0),
      {FlatPolytope::hyperrectangle({0.1, 0.2}, normalized({1.0, 1.0}), std::vector<double>{1.2}), 0.7},
      {FlatPolytope::hyperrectangle({0.0, 0.0}, normalized({2.0, -1.0}), std::vector<double>{0.9}), 0.5},
      {FlatPolytope::hyperrectangle({0.0, 0.0, 0.0}, {0.0, 0.0, 1.0}, std::vector<double>{1.0, 1.0}), 0.5},
  };
  for (const auto& cyl : cylinders) {
    const std::int64_t n = cyl.base.dim() == 2 ? 10 : 5;
    const auto tb = discretize_cylinder(cyl, n, CylinderMode::top_bottom);
    const auto hb = discretize_cylinder(cyl, n, CylinderMode::half_boundary);
    CHECK(std::includes(hb.sources.begin(), hb.sources.end(), tb.sources.begin(), tb.sources.end()));
    CHECK(std::includes(hb.sinks.begin(), hb.sinks.end(), tb.sinks.begin(), tb.sinks.end()));
  }
  const std::vector<CapacityLaw> laws = {CapacityLaw::bernoulli_scaled(0.7, 1.0), CapacityLaw::uniform(0.0, 2.0),
                                         CapacityLaw::exponential(1.0)};
  for (const auto& cyl : cylinders)
    for (const auto& law : laws)
      for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const int d = cyl.base.dim();
        const std::int64_t n = d == 2 ? 10 : 5;
        const auto env = field(d, law, seed);
        const double tau = tau_cylinder(cyl, n, env);
        CHECK(phi_cylinder(cyl, n, env) <= tau * (1 + 1e-12));
      }
}

TEST_CASE("phi_to_infinity of the unit square under constant laws") {
  const auto square = ConvexBody::box({0.0, 0.0}, {1.0, 1.0});
  for (std::int64_t n : {4, 8}) {
    const auto r = phi_to_infinity(square, n, CapacityLaw::constant(1.0), 7);
    CHECK(r.value == static_cast<double>(edge_boundary(square, n).size()));
    CHECK(total_capacity(r.cutset) == r.value);
    REQUIRE(r.trace.size() >= 2);
    CHECK(r.trace.back().value == r.trace[r.trace.size() - 2].value);
    CHECK(r.trace.back().interior);
  }
  const auto zero = phi_to_infinity(square, 4, CapacityLaw::constant(0.0), 7);
  CHECK(zero.value == 0.0);
  CHECK(zero.trace.front().value == 0.0);
}

TEST_CASE("phi_to_infinity reports exhaustion with its trace") {
  TruncationOptions options;
  options.steps = 1;
  try {
    phi_to_infinity(ConvexBody::box({0.0, 0.0}, {1.0, 1.0}), 4, CapacityLaw::constant(1.0), 1, 0, options);
    CHECK(false);
  } catch (const NoStabilizationError& e) {
    CHECK(e.code() == ErrorCode::NoStabilization);
    CHECK(e.trace().size() == 1);
  }
}

TEST_CASE("cut bound, scaling and monotonicity on random environments") {
  const auto square = ConvexBody::box({0.0, 0.0}, {1.0, 1.0});
  const auto disk = ConvexBody::ball({0.5, 0.5}, 0.45);
  const auto tri = ConvexBody::polytope(ConvexPolytope::hull({{0.1, 0.1}, {0.9, 0.2}, {0.3, 0.8}}));
  const std::int64_t n = 8;
  TruncationOptions shared;
  shared.base_radius = square.circumradius();
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto law = CapacityLaw::bernoulli_scaled(0.7, 1.0);
    const auto env = field(2, law, seed);
    const auto big = phi_to_infinity(square, n, law, seed, 0, shared);
    CHECK(big.value <= boundary_capacity(square, n, env));
    for (const auto& inner : {disk, tri}) {
      const auto small = phi_to_infinity(inner, n, law, seed, 0, shared);
      CHECK(small.value <= boundary_capacity(inner, n, env));
      CHECK(small.value <= big.value);
    }
    const auto scaled = phi_to_infinity(square, n, CapacityLaw::bernoulli_scaled(0.7, 2.5), seed, 0, shared);
    CHECK(scaled.value == 2.5 * big.value);
  }
  const auto one = phi_to_infinity(disk, n, CapacityLaw::constant(1.0), 3);
  const auto many = phi_to_infinity(disk, n, CapacityLaw::constant(2.5), 3);
  CHECK(many.value == 2.5 * one.value);
}

TEST_CASE("phi_to_infinity in three dimensions") {
  const auto cube = ConvexBody::box({0.0, 0.0, 0.0}, {1.0, 1.0, 1.0});
  const auto r = phi_to_infinity(cube, 3, CapacityLaw::constant(1.0), 1);
  CHECK(r.value == static_cast<double>(edge_boundary(cube, 3).size()));
}

TEST_CASE("glued cutset separates and bounds phi_to_infinity") {
  const auto square = ConvexPolytope::box({0.0, 0.0}, {1.0, 1.0});
  const std::int64_t n = 8;
  const auto env1 = field(2, CapacityLaw::constant(1.0), 1);
  const auto glued = glued_upper_bound(square, n, env1, 0.25);
  CHECK(glued.face_cuts.size() == 4);
  CHECK(glued.bridges.size() == 4);
  CHECK(glued.capacity >= phi_to_infinity(ConvexBody::polytope(square), n, CapacityLaw::constant(1.0), 1).value);
  std::set<LatticeEdge> unique;
  double parts = 0.0;
  for (const auto& cut : glued.face_cuts)
    for (const auto& e : cut)
      if (unique.insert(e.edge).second) parts += e.capacity;
  for (const auto& b : glued.bridges)
    for (const auto& e : b)
      if (unique.insert(e.edge).second) parts += e.capacity;
  CHECK(unique.size() == glued.edges.size());
  CHECK(glued.capacity == parts);

  const auto law = CapacityLaw::bernoulli_scaled(0.9, 1.0);
  const auto hexagon = ConvexPolytope::hull({{0, 0}, {0.6, -0.2}, {1.1, 0.2}, {1.0, 0.8}, {0.4, 1.0}, {-0.1, 0.5}});
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto env = field(2, law, seed);
    for (const auto& p : {square, hexagon}) {
      const auto g = glued_upper_bound(p, 12, env, 0.2);
      CHECK(g.capacity >= phi_to_infinity(ConvexBody::polytope(p), 12, law, seed).value);
    }
  }
}

TEST_CASE("glued cutset in three dimensions and with face gluing") {
  const auto cube = ConvexPolytope::box({0.0, 0.0, 0.0}, {1.0, 1.0, 1.0});
  const auto law = CapacityLaw::bernoulli_scaled(0.8, 1.0);
  const auto env = field(3, law, 2);
  const auto g = glued_upper_bound(cube, 4, env, 0.25);
  CHECK(g.bridges.size() == 12);
  CHECK(g.capacity >= phi_to_infinity(ConvexBody::polytope(cube), 4, law, 2).value);

  GluingOptions options;
  options.kappa = 0.25;
  const auto square = ConvexPolytope::box({0.0, 0.0}, {1.0, 1.0});
  const auto env2 = field(2, law, 4);
  const auto h = glued_upper_bound(square, 16, env2, 0.25, options);
  CHECK_FALSE(h.shell.empty());
  CHECK(h.capacity >= phi_to_infinity(ConvexBody::polytope(square), 16, law, 4).value);
}

TEST_CASE("subadditive gluing over hypersquares") {
  const Cylinder face{FlatPolytope::hyperrectangle({0.5, 0.0}, {0.0, 1.0}, std::vector<double>{1.0}), 0.5};
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto env = field(2, CapacityLaw::bernoulli_scaled(0.7, 1.0), seed);
    const auto g = glue_face(face, 32, env, 0.25);
    CHECK(g.squares.size() == 4);
    CHECK(tau_cylinder(face, 32, env) <= g.bound);
    CHECK(g.capacity <= g.bound);
  }
  const Cylinder square_face{FlatPolytope::hyperrectangle({0.0, 0.0, 0.0}, {0.0, 0.0, 1.0}, std::vector<double>{1.0, 1.0}), 0.5};
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const auto env = field(3, CapacityLaw::uniform(0.0, 1.0), seed);
    const auto g = glue_face(square_face, 8, env, 0.5);
    CHECK(g.squares.size() == 4);
    CHECK(tau_cylinder(square_face, 8, env) <= g.bound);
  }
}

TEST_CASE("paired glued and phi means over 20 seeds at n = 16") {
  // With zeta = 4d/n the bridges are shells of width 2 zeta n = 16 lattice
  // steps, so at this scale they dominate the glued capacity. The per-face
  // tau cuts alone stay close to phi.
  const auto law = CapacityLaw::bernoulli_scaled(0.9, 1.0);
  const auto square = ConvexPolytope::box({0.0, 0.0}, {1.0, 1.0});
  double glued = 0.0, phi = 0.0, faces = 0.0;
  for (std::uint64_t k = 0; k < 20; ++k) {
    const auto g = glued_upper_bound(square, 16, field(2, law, 1234, k), 0.25);
    const double p = phi_to_infinity(ConvexBody::polytope(square), 16, law, 1234, k).value;
    CHECK(g.capacity >= p);
    glued += g.capacity;
    phi += p;
    for (double v : g.face_values) faces += v;
  }
  CHECK(glued >= phi);
  CHECK(std::abs(faces / phi - 1.0) <= 0.25);
}

TEST_CASE("result records serialise") {
  const auto r = phi_to_infinity(ConvexBody::box({0.0, 0.0}, {1.0, 1.0}), 4, CapacityLaw::constant(1.0), 7);
  const auto j = to_json(r);
  CHECK(j["value"] == 20.0);
  CHECK(j["cutset_size"] == 20);
  CHECK(j["trace"].size() == r.trace.size());
}
