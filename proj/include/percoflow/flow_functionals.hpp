#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include <json.hpp>

#include "percoflow/capacity_env.hpp"
#include "percoflow/error.hpp"
#include "percoflow/geometry.hpp"
#include "percoflow/maxflow.hpp"

namespace percoflow {

/// Capacity of the lattice edge {base, base + e_axis} in the coupled field of
/// `env`. Edges outside the sampled region are drawn from the same stream, so
/// the answer never depends on how large the region is.
double edge_capacity(const Environment& env, const IVec& base, int axis);

struct CutEdge {
  LatticeEdge edge;
  double capacity = 0.0;
};

double total_capacity(const std::vector<CutEdge>& edges);

/// Flow problem on the edges of a discretised cylinder; vertex ids are region indices.
FlowProblem cylinder_problem(const DiscreteCylinder& cylinder, const Environment& env);

struct CylinderFlow {
  double value = 0.0;
  std::vector<CutEdge> cutset;  // canonical minimal cutset, sorted
};

CylinderFlow cylinder_flow(const Cylinder& cylinder, std::int64_t n, const Environment& env, CylinderMode mode);

/// phi_n(A, h): maximal flow from T_n(A,h) to B_n(A,h) inside n cyl(A,h).
double phi_cylinder(const Cylinder& cylinder, std::int64_t n, const Environment& env);
/// tau_n(A, h): maximal flow from C'_{1,n}(A,h) to C'_{2,n}(A,h) inside n cyl(A,h).
double tau_cylinder(const Cylinder& cylinder, std::int64_t n, const Environment& env);

struct TruncationStep {
  double radius = 0.0;         // R, in continuum units
  std::int64_t half_width = 0;  // box [-ceil(R n), ceil(R n)]^d
  double value = 0.0;
  bool interior = false;  // no cut edge touches the box shell
};

struct FlowToInfinityResult {
  double value = 0.0;
  std::vector<CutEdge> cutset;
  double radius = 0.0;
  std::vector<TruncationStep> trace;
};

struct TruncationOptions {
  /// Replaces the circumradius rho_A in the schedule R_k = rho (1 + 2^k / 4).
  /// Two bodies evaluated with the same value share every truncation box.
  std::optional<double> base_radius;
  int steps = 7;
  std::int64_t edge_budget = kDefaultEdgeBudget;
};

/// Raised when the truncation schedule ends before the value stabilises.
class NoStabilizationError : public Error {
 public:
  NoStabilizationError(const std::string& message, std::vector<TruncationStep> trace)
      : Error(ErrorCode::NoStabilization, message), trace_(std::move(trace)) {}
  const std::vector<TruncationStep>& trace() const noexcept { return trace_; }

 private:
  std::vector<TruncationStep> trace_;
};

/// mincut_n(A, infinity), certified by exact stabilisation over growing boxes.
FlowToInfinityResult phi_to_infinity(const ConvexBody& body, std::int64_t n, const CapacityLaw& law,
                                     std::uint64_t master_seed, std::uint64_t replica = 0,
                                     const TruncationOptions& options = {});

/// Edges of Z^d / n "included" in a region: both endpoints and the midpoint belong to it.
template <class Pred>
bool edge_included(const LatticeEdge& e, double n, Pred&& inside) {
  Vec a = lattice_point(e.base, n);
  Vec b = a;
  b[static_cast<std::size_t>(e.axis)] += 1.0 / n;
  Vec mid = a;
  mid[static_cast<std::size_t>(e.axis)] += 0.5 / n;
  return inside(a) && inside(b) && inside(mid);
}

struct FaceGluing {
  std::vector<FlatPolytope> squares;   // S_i
  std::vector<double> square_values;   // tau_n(S_i, h)
  std::vector<CutEdge> square_cuts;    // union of the minimal cutsets E_i
  std::vector<CutEdge> shell;          // E_0
  std::vector<CutEdge> edges;          // E_0 cup (cup_i E_i)
  double capacity = 0.0;               // V of the union
  double bound = 0.0;                  // V(E_0) + sum_i tau_n(S_i, h)
  double zeta = 0.0;
};

/// Covers the face F (the base of `cylinder`) by grid hypersquares of side kappa
/// lying inside F, solves tau_n on each, and adds the shell E_0 of edges within
/// zeta = 4d/n of the uncovered part and of every square boundary. The union is
/// checked to separate C'_1 from C'_2 in cyl(F, h); throws NotSeparating if not.
FaceGluing glue_face(const Cylinder& cylinder, std::int64_t n, const Environment& env, double kappa);

struct GluedCutset {
  double epsilon = 0.0;
  double zeta = 0.0;
  std::vector<std::vector<CutEdge>> face_cuts;  // E'_i
  std::vector<double> face_values;              // tau_n(F_i + eps v_i, eps)
  std::vector<std::pair<std::size_t, std::size_t>> adjacent;  // face pairs with a bridge
  std::vector<std::vector<CutEdge>> bridges;    // M_{i,j}, aligned with `adjacent`
  std::vector<CutEdge> shell;                   // E_0 of the face gluings (empty without kappa)
  std::vector<CutEdge> edges;                   // the union
  double capacity = 0.0;                        // V(union)
};

struct GluingOptions {
  /// When set, each face cutset is itself glued from hypersquares of this side.
  std::optional<double> kappa;
};

/// Upper-bound cutset from nP to infinity: minimal cutsets of the face cylinders
/// cyl(F_i + eps v_i, eps) joined by the bridges M_{i,j}. Separation from the
/// shell of an enclosing box is verified by search.
GluedCutset glued_upper_bound(const ConvexPolytope& polytope, std::int64_t n, const Environment& env,
                              double epsilon, const GluingOptions& options = {});

/// Raised by the separation checks, with a lattice path that avoids the cutset.
class NotSeparatingError : public Error {
 public:
  NotSeparatingError(const std::string& message, std::vector<IVec> witness)
      : Error(ErrorCode::NotSeparating, message), witness_(std::move(witness)) {}
  const std::vector<IVec>& witness() const noexcept { return witness_; }

 private:
  std::vector<IVec> witness_;
};

nlohmann::json to_json(const std::vector<TruncationStep>& trace);
nlohmann::json to_json(const FlowToInfinityResult& result);
nlohmann::json to_json(const GluedCutset& glued);

}  // namespace percoflow
