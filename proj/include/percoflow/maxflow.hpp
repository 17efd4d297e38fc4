#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "percoflow/error.hpp"

namespace percoflow {

/// Undirected edge {u, v} with capacity t(e).
struct FlowEdge {
  std::int64_t u = 0;
  std::int64_t v = 0;
  double capacity = 0.0;
};

/// Capacitated undirected graph with source set S and sink set T.
struct FlowProblem {
  std::int64_t vertex_count = 0;
  std::vector<FlowEdge> edges;
  std::vector<std::int64_t> sources;
  std::vector<std::int64_t> sinks;

  /// Throws InvalidArgument on out-of-range endpoints, negative or non-finite
  /// capacities, or S cap T nonempty.
  void validate() const;

  /// Plain edge-list format:
  ///   n_vertices n_edges |S| |T|
  ///   u v cap            (n_edges lines)
  ///   s_1 ... s_|S|
  ///   t_1 ... t_|T|
  void write_text(std::ostream& out) const;
  static FlowProblem read_text(std::istream& in);
};

struct MaxFlowResult {
  double value = 0.0;
  /// Net flow on each edge, positive in the u -> v direction.
  std::vector<double> flow;
  /// Vertices reachable from S in the final residual graph.
  std::vector<char> source_side;
};

struct Cutset {
  std::vector<std::int64_t> edges;  // indices into FlowProblem::edges, ascending
  double capacity = 0.0;            // V(E)
  std::size_t size() const noexcept { return edges.size(); }
};

/// Exact maximum flow from S to T (Dinic's algorithm on the residual graph, with
/// S and T contracted to super-terminals joined by arcs of capacity sum(t)+1).
MaxFlowResult max_flow(const FlowProblem& problem);

/// Canonical minimal cutset: edges between the residual-reachable side of S and
/// its complement. This is the inclusion-minimal source side.
Cutset min_cut(const FlowProblem& problem, const MaxFlowResult& result);

/// Minimum-capacity separating edge set by exhaustive search (<= 20 edges).
/// Ties are broken by cardinality, then by lowest subset mask.
Cutset brute_force_min_cut(const FlowProblem& problem);

/// True when every S-T path uses an edge in `removed` (capacities ignored).
bool separates(const FlowProblem& problem, const std::vector<std::int64_t>& removed);

}  // namespace percoflow
