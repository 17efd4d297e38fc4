#include <doctest.h>

#include <random>
#include <sstream>

#include "oracles.hpp"
#include "percoflow/maxflow.hpp"

using namespace percoflow;

namespace {

FlowProblem grid(int rows, int cols, double cap) {
  FlowProblem p;
  p.vertex_count = rows * cols;
  auto id = [&](int r, int c) { return static_cast<std::int64_t>(r * cols + c); };
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      if (c + 1 < cols) p.edges.push_back({id(r, c), id(r, c + 1), cap});
      if (r + 1 < rows) p.edges.push_back({id(r, c), id(r + 1, c), cap});
    }
  return p;
}

void check_flow_invariants(const FlowProblem& p, const MaxFlowResult& r) {
  std::vector<double> net(static_cast<std::size_t>(p.vertex_count), 0.0);
  for (std::size_t i = 0; i < p.edges.size(); ++i) {
    CHECK(std::abs(r.flow[i]) <= p.edges[i].capacity + 1e-12);
    net[static_cast<std::size_t>(p.edges[i].u)] -= r.flow[i];
    net[static_cast<std::size_t>(p.edges[i].v)] += r.flow[i];
  }
  std::vector<char> terminal(net.size(), 0);
  double into_sinks = 0.0, out_of_sources = 0.0;
  for (auto s : p.sources) {
    terminal[static_cast<std::size_t>(s)] = 1;
    out_of_sources -= net[static_cast<std::size_t>(s)];
  }
  for (auto t : p.sinks) {
    terminal[static_cast<std::size_t>(t)] = 1;
    into_sinks += net[static_cast<std::size_t>(t)];
  }
  for (std::size_t v = 0; v < net.size(); ++v)
    if (!terminal[v]) CHECK(std::abs(net[v]) <= 1e-9 * (1.0 + r.value));
  CHECK(out_of_sources == doctest::Approx(r.value).epsilon(1e-9));
  CHECK(into_sinks == doctest::Approx(r.value).epsilon(1e-9));
}

}  // namespace

TEST_CASE("bottleneck path and parallel paths") {
  FlowProblem path{3, {{0, 1, 3.0}, {1, 2, 2.0}}, {0}, {2}};
  const auto r = max_flow(path);
  CHECK(r.value == 2.0);
  const auto cut = min_cut(path, r);
  CHECK(cut.edges == std::vector<std::int64_t>{1});
  CHECK(cut.capacity == 2.0);
  CHECK(brute_force_min_cut(path).capacity == 2.0);

  FlowProblem parallel{4, {{0, 1, 1.0}, {1, 3, 1.0}, {0, 2, 4.0}, {2, 3, 4.0}}, {0}, {3}};
  CHECK(max_flow(parallel).value == 5.0);
  CHECK(brute_force_min_cut(parallel).capacity == 5.0);
}

TEST_CASE("grid cuts") {
  auto g = grid(3, 3, 1.0);
  g.sources = {0, 3, 6};
  g.sinks = {2, 5, 8};
  const auto r = max_flow(g);
  CHECK(r.value == 3.0);
  const auto cut = min_cut(g, r);
  CHECK(cut.capacity == 3.0);
  CHECK(brute_force_min_cut(g).capacity == 3.0);
  CHECK(separates(g, cut.edges));

  auto sq = grid(2, 2, 1.0);
  sq.sources = {0};
  sq.sinks = {3};
  CHECK(brute_force_min_cut(sq).capacity == 2.0);
  CHECK(max_flow(sq).value == 2.0);
}

TEST_CASE("zero-capacity graph still yields a separating cut") {
  auto g = grid(3, 4, 0.0);
  g.sources = {0};
  g.sinks = {11};
  const auto r = max_flow(g);
  CHECK(r.value == 0.0);
  const auto cut = min_cut(g, r);
  CHECK(cut.capacity == 0.0);
  CHECK(separates(g, cut.edges));
  CHECK(cut.edges.size() == 2);  // the two edges leaving the source corner
}

TEST_CASE("disconnected terminals give value zero") {
  FlowProblem p{4, {{0, 1, 2.0}, {2, 3, 2.0}}, {0}, {3}};
  const auto r = max_flow(p);
  CHECK(r.value == 0.0);
  CHECK(min_cut(p, r).edges.empty());
}

TEST_CASE("invalid problems are rejected") {
  CHECK_THROWS_AS(max_flow(FlowProblem{2, {{0, 1, 1.0}}, {0}, {0}}), Error);
  CHECK_THROWS_AS(max_flow(FlowProblem{2, {{0, 1, -1.0}}, {0}, {1}}), Error);
  CHECK_THROWS_AS(max_flow(FlowProblem{2, {{0, 2, 1.0}}, {0}, {1}}), Error);
  FlowProblem huge{2, {{0, 1, 1e308}, {0, 1, 1e308}}, {0}, {1}};
  try {
    max_flow(huge);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::OverflowGuard);
  }
  auto big = grid(5, 5, 1.0);
  big.sources = {0};
  big.sinks = {24};
  CHECK_THROWS_AS(brute_force_min_cut(big), Error);
}

TEST_CASE("max_flow equals the exhaustive oracle on random small graphs") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto p = oracle::random_small_graph(rng, 8, 3);
    const auto r = max_flow(p);
    const auto cut = min_cut(p, r);
    const auto brute = brute_force_min_cut(p);
    CHECK(r.value == brute.capacity);
    CHECK(cut.capacity == r.value);
    CHECK(separates(p, cut.edges));
    CHECK(separates(p, brute.edges));
    check_flow_invariants(p, r);
  }
}

TEST_CASE("duality, node law and monotonicity on random real-valued grids") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> unif(0.0, 2.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const int rows = 2 + static_cast<int>(rng() % 6), cols = 2 + static_cast<int>(rng() % 6);
    auto g = grid(rows, cols, 0.0);
    for (auto& e : g.edges) e.capacity = (rng() % 4 == 0) ? 0.0 : unif(rng);
    for (int r = 0; r < rows; ++r) {
      g.sources.push_back(r * cols);
      g.sinks.push_back(r * cols + cols - 1);
    }
    const auto res = max_flow(g);
    const auto cut = min_cut(g, res);
    CHECK(std::abs(cut.capacity - res.value) <= 1e-9 * std::max(1.0, res.value));
    CHECK(separates(g, cut.edges));
    check_flow_invariants(g, res);

    if (trial % 10 == 0) {
      auto bumped = g;
      bumped.edges[rng() % bumped.edges.size()].capacity += unif(rng);
      CHECK(max_flow(bumped).value >= res.value - 1e-12);
    }
  }
}

TEST_CASE("edge-list text format round-trips") {
  FlowProblem p{4, {{0, 1, 0.1}, {1, 3, 2.5}, {0, 2, 1e-3}, {2, 3, 7.0}}, {0}, {3}};
  std::stringstream ss;
  p.write_text(ss);
  CHECK(ss.str().rfind("4 4 1 1\n", 0) == 0);
  const auto q = FlowProblem::read_text(ss);
  REQUIRE(q.edges.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) CHECK(q.edges[i].capacity == p.edges[i].capacity);
  CHECK(max_flow(q).value == max_flow(p).value);
}
