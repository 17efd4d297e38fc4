#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "percoflow/estimators.hpp"

using namespace percoflow;

TEST_CASE("summaries") {
  const auto s = summarize({1.0, 2.0, 3.0, 4.0});
  CHECK(s.mean == 2.5);
  CHECK(s.sd == doctest::Approx(std::sqrt(5.0 / 3.0)));
  CHECK(s.se == doctest::Approx(std::sqrt(5.0 / 3.0) / 2.0));
  CHECK(s.min == 1.0);
  CHECK(s.max == 4.0);
  const auto one = summarize({0.1, 0.1, 0.1});
  CHECK(one.mean >= one.min);
  CHECK(one.mean <= one.max);
  CHECK(summarize({7.0}).se == 0.0);
}

TEST_CASE("flat-cut estimates are exact for constant laws") {
  for (double c : {1.0, 2.5})
    for (std::int64_t n : {5, 8, 13, 32}) {
      const auto r = estimate_nu({1.0, 0.0}, n, 1.0, CapacityLaw::constant(c), 3, 1);
      CHECK(r.summary.mean == c);
      CHECK(r.summary.sd == 0.0);
      CHECK(r.values.size() == 3);
    }
  const auto zero = estimate_nu({1.0, 0.0}, 32, 1.0, CapacityLaw::constant(0.0), 2, 1);
  CHECK(zero.summary.mean == 0.0);
  const auto e3 = estimate_nu({0.0, 0.0, 1.0}, 6, 1.0, CapacityLaw::constant(2.0), 2, 1);
  CHECK(e3.summary.mean == 2.0);
}

TEST_CASE("diagonal estimate against the staircase count") {
  const std::int64_t n = 32;
  const Vec v{1.0, 1.0};
  const double count = static_cast<double>(oracle::staircase_count(v, {0.3 / n, 0.1 / n}, n)) / static_cast<double>(n);
  CHECK(std::abs(count - std::sqrt(2.0)) / std::sqrt(2.0) < 0.05);
  for (double c : {1.0, 2.5}) {
    const auto r = estimate_nu(v, n, 1.0, CapacityLaw::constant(c), 2, 1);
    CHECK(std::abs(r.summary.mean - c * std::sqrt(2.0)) <= 0.05 * c * std::sqrt(2.0));
    CHECK(std::abs(r.summary.mean - c * count) <= 0.05 * c * count);
  }
}

TEST_CASE("lattice symmetry of the estimates") {
  const auto law = CapacityLaw::bernoulli_scaled(0.8, 1.0);
  const auto a = estimate_nu({1.0, 0.0}, 16, 1.0, law, 40, 101);
  const auto b = estimate_nu({0.0, 1.0}, 16, 1.0, law, 40, 202);
  CHECK(std::abs(a.summary.mean - b.summary.mean) < 3.0 * std::hypot(a.summary.se, b.summary.se));
}

TEST_CASE("replica results do not depend on the worker count") {
  const auto law = CapacityLaw::uniform(0.0, 1.0);
  const auto a = estimate_nu({1.0, 2.0}, 12, 1.0, law, 16, 9, 1);
  const auto b = estimate_nu({1.0, 2.0}, 12, 1.0, law, 16, 9, 4);
  CHECK(a.values == b.values);
  CHECK(a.seeds == b.seeds);
  const auto s1 = sample_flows(ConvexBody::ball({0.0, 0.0}, 0.5), 8, law, 12, 3, 1);
  const auto s4 = sample_flows(ConvexBody::ball({0.0, 0.0}, 0.5), 8, law, 12, 3, 4);
  CHECK(s1.values == s4.values);
}

TEST_CASE("surface energy face sums") {
  const auto square = ConvexPolytope::box({0, 0}, {1, 1});
  const std::vector<Vec> axes2 = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
  std::vector<EstimateRecord> ones, weighted;
  for (const auto& v : axes2) {
    ones.push_back(exact_estimate(v, 1.0));
    weighted.push_back(exact_estimate(v, v[0] != 0.0 ? 1.0 : 2.0));
  }
  CHECK(surface_energy(square, ones).total == 4.0);
  CHECK(surface_energy(square, weighted).total == 6.0);

  const auto cube = ConvexPolytope::box({0, 0, 0}, {1, 1, 1});
  std::vector<EstimateRecord> ones3;
  for (int a = 0; a < 3; ++a)
    for (double s : {-1.0, 1.0}) {
      Vec v(3, 0.0);
      v[static_cast<std::size_t>(a)] = s;
      ones3.push_back(exact_estimate(v, 1.0));
    }
  const auto cube_report = surface_energy(cube, ones3);
  CHECK(cube_report.total == doctest::Approx(6.0).epsilon(1e-12));
  double sum = 0.0;
  for (const auto& f : cube_report.faces) {
    CHECK(f.contribution >= 0.0);
    sum += f.contribution;
  }
  CHECK(sum == cube_report.total);

  ones.pop_back();
  try {
    surface_energy(square, ones);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MissingDirection);
  }
  // nearest direction within 1e-9 is accepted, 1e-6 is not
  ones.push_back(exact_estimate({1e-12, -1.0}, 1.0));
  CHECK(surface_energy(square, ones).total == doctest::Approx(4.0));
  ones.back() = exact_estimate({1e-6, -1.0}, 1.0);
  CHECK_THROWS_AS(surface_energy(square, ones), Error);
}

TEST_CASE("surface energy error propagation") {
  // 2 x 1 rectangle: faces +-e1 have length 1, +-e2 length 2
  const auto rect = ConvexPolytope::box({0, 0}, {2, 1});
  std::vector<EstimateRecord> est;
  const std::vector<std::pair<Vec, double>> se = {{{1, 0}, 0.1}, {{-1, 0}, 0.2}, {{0, 1}, 0.3}, {{0, -1}, 0.4}};
  for (const auto& [v, s] : se) {
    auto r = exact_estimate(v, 1.0);
    r.summary.se = s;
    est.push_back(r);
  }
  const auto report = surface_energy(rect, est);
  CHECK(report.total == doctest::Approx(6.0));
  CHECK(report.se == doctest::Approx(std::sqrt(0.01 + 0.04 + 0.36 + 0.64)));
}

TEST_CASE("chopping a polytope never increases the constant-law energy") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> angle(0.0, 6.283185307179586), offset(-0.5, 0.9);
  for (double c : {1.0, 2.5}) {
    auto nu = [c](const Vec& v) { return constant_law_nu(c, v); };
    const auto square = ConvexPolytope::box({-1, -1}, {1, 1});
    for (int k = 0; k < 50; ++k) {
      const double a = angle(rng);
      auto hs = square.halfspaces();
      hs.push_back({{std::cos(a), std::sin(a)}, offset(rng)});
      const auto chopped = ConvexPolytope::from_halfspaces(hs, 2);
      CHECK(surface_energy(chopped, nu) <= surface_energy(square, nu) + 1e-9);
    }
    const auto cube = ConvexPolytope::box({-1, -1, -1}, {1, 1, 1});
    for (int k = 0; k < 20; ++k) {
      auto hs = cube.halfspaces();
      hs.push_back({normalized({std::cos(angle(rng)), std::sin(angle(rng)), std::cos(angle(rng))}), offset(rng)});
      const auto chopped = ConvexPolytope::from_halfspaces(hs, 3);
      CHECK(surface_energy(chopped, nu) <= surface_energy(cube, nu) + 1e-9);
    }
  }
}

TEST_CASE("polytope approximations bracket the energy of a disk") {
  auto l1 = [](const Vec& v) { return constant_law_nu(1.0, v); };
  auto l2 = [](const Vec& v) { return norm(v); };
  const auto disk = ConvexBody::ball({0.2, 0.1}, 0.7);
  for (std::size_t m : {8u, 16u, 64u}) {
    const double inner = surface_energy(inner_polytope(disk, m), l2);
    const double outer = surface_energy(outer_polytope(disk, m), l2);
    CHECK(inner <= 2 * M_PI * 0.7);
    CHECK(outer >= 2 * M_PI * 0.7);
    CHECK(surface_energy(inner_polytope(disk, m), l1) <= surface_energy(outer_polytope(disk, m), l1) + 1e-9);
  }
  const double ref = reference_energy(disk, l1, 64);
  CHECK(std::abs(ref - 4 * 1.4) / (4 * 1.4) < 0.01);
}

TEST_CASE("constant-law convergence is the edge-boundary count") {
  const auto square = ConvexBody::box({0.0, 0.0}, {1.0, 1.0});
  auto nu = [](const Vec& v) { return constant_law_nu(1.0, v); };
  const auto rows = convergence_experiment(square, CapacityLaw::constant(1.0), {4, 8, 16}, 3, 7, nu);
  REQUIRE(rows.size() == 3);
  for (const auto& row : rows) {
    const double expected = static_cast<double>(edge_boundary(square, row.n).size()) / static_cast<double>(row.n);
    CHECK(row.summary.mean == expected);
    CHECK(row.summary.sd == 0.0);
    CHECK(row.i_reference == 4.0);
    CHECK(row.gap * static_cast<double>(row.n) <= 8.0);
  }
  const auto zero = convergence_experiment(square, CapacityLaw::constant(0.0), {4, 8}, 2, 7,
                                           [](const Vec& v) { return constant_law_nu(0.0, v); });
  for (const auto& row : zero) {
    CHECK(row.summary.mean == 0.0);
    CHECK(row.i_reference == 0.0);
  }
}

TEST_CASE("deviation tables") {
  const auto square = ConvexBody::box({0.0, 0.0}, {1.0, 1.0});
  const auto constant = deviation_tail(square, CapacityLaw::constant(1.0), {4, 8, 16}, 0.1, 3, 1, 4.0);
  for (const auto& row : constant) CHECK((row.frequency == 0.0 || row.frequency == 1.0));
  CHECK(constant[0].frequency == 1.0);  // 5 vs 4
  CHECK(constant[2].frequency == 0.0);  // 4.25 vs 4

  const auto law = CapacityLaw::bernoulli_scaled(0.9, 1.0);
  const double reference = 4.0 * estimate_nu({1.0, 0.0}, 32, 1.0, law, 20, 99).summary.mean;
  const auto huge = deviation_tail(square, law, {4, 8}, 10.0, 10, 1, reference);
  for (const auto& row : huge) {
    CHECK(row.frequency == 0.0);
    CHECK(std::isnan(row.log_rate));
  }
  // batches of 10 replicas with distinct master seeds
  int monotone = 0;
  const int batches = 10;
  for (int b = 0; b < batches; ++b) {
    const auto rows = deviation_tail(square, law, {4, 8, 16}, 0.2, 10, 1000 + b, reference);
    bool ok = true;
    for (std::size_t i = 1; i < rows.size(); ++i) ok = ok && rows[i].frequency <= rows[i - 1].frequency;
    if (ok) ++monotone;
  }
  CHECK(monotone >= 9);
}

TEST_CASE("edge classification") {
  const auto c = classify_edges({0.0, 0.5, 2.0}, 1.0);
  CHECK(c.zero == 1);
  CHECK(c.minus == 1);
  CHECK(c.plus == 1);
  CHECK_THROWS_AS(classify_edges({1.0}, 0.0), Error);

  const auto stats = cutset_statistics(ConvexBody::box({0.0, 0.0}, {1.0, 1.0}), CapacityLaw::constant(1.0), 8, 0.5, 2, 1);
  for (const auto& r : stats.records) {
    CHECK(r.classes.plus == r.size);
    CHECK(r.classes.minus == 0);
    CHECK(r.classes.zero == 0);
  }
}

TEST_CASE("cutset statistics invariants") {
  const auto square = ConvexBody::box({0.0, 0.0}, {1.0, 1.0});
  const auto law = CapacityLaw::bernoulli_scaled(0.7, 1.0);
  const double eps = 0.5;
  const auto stats = cutset_statistics(square, law, 16, eps, 20, 3, 2);
  REQUIRE(stats.records.size() == 20);
  std::size_t histogram_total = 0;
  for (const auto& [start, count] : stats.histogram) histogram_total += count;
  CHECK(histogram_total == 20);
  for (const auto& r : stats.records) {
    CHECK(r.classes.plus + r.classes.minus + r.classes.zero == r.size);
    CHECK(eps * static_cast<double>(r.classes.plus) <= r.capacity);
    CHECK(r.capacity <= r.boundary_capacity);
  }
  REQUIRE(stats.betas == std::vector<double>{4, 8, 16, 32});
  for (std::size_t i = 1; i < stats.beta_frequency.size(); ++i)
    CHECK(stats.beta_frequency[i] <= stats.beta_frequency[i - 1]);
}
