#include "percoflow/maxflow.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <queue>
#include <string>

#include "percoflow/util.hpp"

namespace percoflow {

void FlowProblem::validate() const {
  if (vertex_count < 0) throw Error(ErrorCode::InvalidArgument, "negative vertex count");
  for (const auto& e : edges) {
    if (e.u < 0 || e.u >= vertex_count || e.v < 0 || e.v >= vertex_count)
      throw Error(ErrorCode::InvalidArgument, "edge endpoint out of range");
    if (!(e.capacity >= 0.0) || !std::isfinite(e.capacity))
      throw Error(ErrorCode::InvalidArgument, "capacities must be finite and >= 0");
  }
  std::vector<char> mark(static_cast<std::size_t>(vertex_count), 0);
  for (auto s : sources) {
    if (s < 0 || s >= vertex_count) throw Error(ErrorCode::InvalidArgument, "source out of range");
    mark[static_cast<std::size_t>(s)] = 1;
  }
  for (auto t : sinks) {
    if (t < 0 || t >= vertex_count) throw Error(ErrorCode::InvalidArgument, "sink out of range");
    if (mark[static_cast<std::size_t>(t)] == 1) throw Error(ErrorCode::InvalidArgument, "S and T intersect");
  }
}

void FlowProblem::write_text(std::ostream& out) const {
  out << vertex_count << ' ' << edges.size() << ' ' << sources.size() << ' ' << sinks.size() << '\n';
  for (const auto& e : edges) out << e.u << ' ' << e.v << ' ' << format_double(e.capacity) << '\n';
  for (std::size_t i = 0; i < sources.size(); ++i) out << (i ? " " : "") << sources[i];
  out << '\n';
  for (std::size_t i = 0; i < sinks.size(); ++i) out << (i ? " " : "") << sinks[i];
  out << '\n';
}

FlowProblem FlowProblem::read_text(std::istream& in) {
  FlowProblem p;
  std::size_t m = 0, ns = 0, nt = 0;
  if (!(in >> p.vertex_count >> m >> ns >> nt)) throw Error(ErrorCode::IoError, "bad flow problem header");
  p.edges.resize(m);
  for (auto& e : p.edges)
    if (!(in >> e.u >> e.v >> e.capacity)) throw Error(ErrorCode::IoError, "bad edge line");
  p.sources.resize(ns);
  for (auto& s : p.sources)
    if (!(in >> s)) throw Error(ErrorCode::IoError, "bad source list");
  p.sinks.resize(nt);
  for (auto& t : p.sinks)
    if (!(in >> t)) throw Error(ErrorCode::IoError, "bad sink list");
  p.validate();
  return p;
}

namespace {

// Residual network in CSR form. Arcs 2k and 2k+1 are mutual reverses.
class Dinic {
 public:
  Dinic(const FlowProblem& p) : n_(p.vertex_count + 2), s_(p.vertex_count), t_(p.vertex_count + 1) {
    double total = 0.0;
    for (const auto& e : p.edges) {
      total += e.capacity;
      max_cap_ = std::max(max_cap_, e.capacity);
    }
    if (!std::isfinite(total) || total > 1e300)
      throw Error(ErrorCode::OverflowGuard, "total capacity exceeds the representable range");
    const double inf = total + 1.0;
    tol_ = 1e-12 * max_cap_;

    const std::size_t arcs = 2 * (p.edges.size() + p.sources.size() + p.sinks.size());
    tail_.reserve(arcs);
    head_.reserve(arcs);
    res_.reserve(arcs);
    auto add = [&](std::int64_t a, std::int64_t b, double cab, double cba) {
      tail_.push_back(a), head_.push_back(b), res_.push_back(cab);
      tail_.push_back(b), head_.push_back(a), res_.push_back(cba);
    };
    for (const auto& e : p.edges) add(e.u, e.v, e.capacity, e.capacity);
    for (auto s : p.sources) add(s_, s, inf, 0.0);
    for (auto t : p.sinks) add(t, t_, inf, 0.0);

    // CSR adjacency over arc ids
    start_.assign(static_cast<std::size_t>(n_) + 1, 0);
    for (auto a : tail_) ++start_[static_cast<std::size_t>(a) + 1];
    for (std::size_t i = 1; i < start_.size(); ++i) start_[i] += start_[i - 1];
    adj_.resize(tail_.size());
    std::vector<std::int64_t> fill(start_.begin(), start_.end() - 1);
    for (std::size_t k = 0; k < tail_.size(); ++k) adj_[static_cast<std::size_t>(fill[static_cast<std::size_t>(tail_[k])]++)] = static_cast<std::int64_t>(k);
  }

  double run() {
    double flow = 0.0;
    level_.resize(static_cast<std::size_t>(n_));
    it_.resize(static_cast<std::size_t>(n_));
    while (bfs()) {
      std::copy(start_.begin(), start_.end() - 1, it_.begin());
      flow += blocking_flow();
    }
    return flow;
  }

  double residual(std::size_t arc) const { return res_[arc]; }
  double tol() const { return tol_; }

  std::vector<char> reachable_from_source() const {
    std::vector<char> seen(static_cast<std::size_t>(n_), 0);
    std::vector<std::int64_t> stack{s_};
    seen[static_cast<std::size_t>(s_)] = 1;
    while (!stack.empty()) {
      const auto u = stack.back();
      stack.pop_back();
      for (auto k = start_[static_cast<std::size_t>(u)]; k < start_[static_cast<std::size_t>(u) + 1]; ++k) {
        const auto arc = static_cast<std::size_t>(adj_[static_cast<std::size_t>(k)]);
        const auto v = head_[arc];
        if (res_[arc] > tol_ && !seen[static_cast<std::size_t>(v)]) {
          seen[static_cast<std::size_t>(v)] = 1;
          stack.push_back(v);
        }
      }
    }
    return seen;
  }

 private:
  bool bfs() {
    std::fill(level_.begin(), level_.end(), -1);
    std::queue<std::int64_t> q;
    level_[static_cast<std::size_t>(s_)] = 0;
    q.push(s_);
    while (!q.empty()) {
      const auto u = q.front();
      q.pop();
      for (auto k = start_[static_cast<std::size_t>(u)]; k < start_[static_cast<std::size_t>(u) + 1]; ++k) {
        const auto arc = static_cast<std::size_t>(adj_[static_cast<std::size_t>(k)]);
        const auto v = head_[arc];
        if (res_[arc] > tol_ && level_[static_cast<std::size_t>(v)] < 0) {
          level_[static_cast<std::size_t>(v)] = level_[static_cast<std::size_t>(u)] + 1;
          q.push(v);
        }
      }
    }
    return level_[static_cast<std::size_t>(t_)] >= 0;
  }

  // Iterative DFS over the level graph with current-arc pointers.
  double blocking_flow() {
    double total = 0.0;
    std::vector<std::size_t> path;  // arcs from s to the current vertex
    std::int64_t u = s_;
    while (true) {
      if (u == t_) {
        double push = std::numeric_limits<double>::infinity();
        for (auto arc : path) push = std::min(push, res_[arc]);
        std::size_t cut = path.size();
        for (std::size_t i = 0; i < path.size(); ++i) {
          res_[path[i]] -= push;
          res_[path[i] ^ 1] += push;
          if (res_[path[i]] <= tol_ && cut == path.size()) cut = i;
        }
        total += push;
        path.resize(cut);
        u = path.empty() ? s_ : head_[path.back()];
        continue;
      }
      auto& k = it_[static_cast<std::size_t>(u)];
      const auto end = start_[static_cast<std::size_t>(u) + 1];
      bool advanced = false;
      for (; k < end; ++k) {
        const auto arc = static_cast<std::size_t>(adj_[static_cast<std::size_t>(k)]);
        const auto v = head_[arc];
        if (res_[arc] > tol_ && level_[static_cast<std::size_t>(v)] == level_[static_cast<std::size_t>(u)] + 1) {
          path.push_back(arc);
          u = v;
          advanced = true;
          break;
        }
      }
      if (advanced) continue;
      // dead end: prune u from the level graph and retreat
      level_[static_cast<std::size_t>(u)] = -1;
      if (path.empty()) break;
      path.pop_back();
      u = path.empty() ? s_ : head_[path.back()];
      ++it_[static_cast<std::size_t>(u)];
    }
    return total;
  }

  std::int64_t n_, s_, t_;
  double max_cap_ = 0.0;
  double tol_ = 0.0;
  std::vector<std::int64_t> tail_, head_;
  std::vector<double> res_;
  std::vector<std::int64_t> start_, adj_;
  std::vector<int> level_;
  std::vector<std::int64_t> it_;
};

}  // namespace

MaxFlowResult max_flow(const FlowProblem& problem) {
  problem.validate();
  Dinic dinic(problem);
  MaxFlowResult r;
  r.value = dinic.run();
  r.flow.resize(problem.edges.size());
  for (std::size_t i = 0; i < problem.edges.size(); ++i)
    r.flow[i] = 0.5 * (dinic.residual(2 * i + 1) - dinic.residual(2 * i));
  auto seen = dinic.reachable_from_source();
  seen.resize(static_cast<std::size_t>(problem.vertex_count));
  r.source_side = std::move(seen);
  return r;
}

Cutset min_cut(const FlowProblem& problem, const MaxFlowResult& result) {
  Cutset cut;
  for (std::size_t i = 0; i < problem.edges.size(); ++i) {
    const auto& e = problem.edges[i];
    if (result.source_side[static_cast<std::size_t>(e.u)] != result.source_side[static_cast<std::size_t>(e.v)]) {
      cut.edges.push_back(static_cast<std::int64_t>(i));
      cut.capacity += e.capacity;
    }
  }
  return cut;
}

bool separates(const FlowProblem& problem, const std::vector<std::int64_t>& removed) {
  const auto n = static_cast<std::size_t>(problem.vertex_count);
  std::vector<char> gone(problem.edges.size(), 0);
  for (auto e : removed) gone[static_cast<std::size_t>(e)] = 1;
  std::vector<std::vector<std::int64_t>> adj(n);
  for (std::size_t i = 0; i < problem.edges.size(); ++i) {
    if (gone[i]) continue;
    adj[static_cast<std::size_t>(problem.edges[i].u)].push_back(problem.edges[i].v);
    adj[static_cast<std::size_t>(problem.edges[i].v)].push_back(problem.edges[i].u);
  }
  std::vector<char> seen(n, 0), sink(n, 0);
  for (auto t : problem.sinks) sink[static_cast<std::size_t>(t)] = 1;
  std::vector<std::int64_t> stack;
  for (auto s : problem.sources)
    if (!seen[static_cast<std::size_t>(s)]) {
      seen[static_cast<std::size_t>(s)] = 1;
      stack.push_back(s);
    }
  while (!stack.empty()) {
    const auto u = stack.back();
    stack.pop_back();
    if (sink[static_cast<std::size_t>(u)]) return false;
    for (auto v : adj[static_cast<std::size_t>(u)])
      if (!seen[static_cast<std::size_t>(v)]) {
        seen[static_cast<std::size_t>(v)] = 1;
        stack.push_back(v);
      }
  }
  return true;
}

Cutset brute_force_min_cut(const FlowProblem& problem) {
  problem.validate();
  const std::size_t m = problem.edges.size();
  if (m > 20) throw Error(ErrorCode::TooLarge, "brute force is limited to 20 edges");
  Cutset best;
  best.capacity = std::numeric_limits<double>::infinity();
  std::vector<std::int64_t> subset;
  for (std::uint64_t mask = 0; mask < (1ULL << m); ++mask) {
    double cap = 0.0;
    subset.clear();
    for (std::size_t i = 0; i < m; ++i)
      if ((mask >> i) & 1) {
        cap += problem.edges[i].capacity;
        subset.push_back(static_cast<std::int64_t>(i));
      }
    if (cap > best.capacity || (cap == best.capacity && subset.size() >= best.edges.size())) continue;
    if (!separates(problem, subset)) continue;
    best.capacity = cap;
    best.edges = subset;
  }
  return best;
}

}  // namespace percoflow
