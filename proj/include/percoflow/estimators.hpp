#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "percoflow/capacity_env.hpp"
#include "percoflow/flow_functionals.hpp"
#include "percoflow/geometry.hpp"

namespace percoflow {

struct Summary {
  double mean = 0.0;
  double sd = 0.0;  // sample standard deviation (n - 1)
  double se = 0.0;  // sd / sqrt(count); 0 with fewer than two samples
  double min = 0.0;
  double max = 0.0;
};

Summary summarize(const std::vector<double>& values);

struct EstimateRecord {
  std::string quantity;  // "nu_tau" or "nu_phi"
  Vec direction;
  std::int64_t n = 0;
  double h = 0.0;
  std::string law;
  std::uint64_t master_seed = 0;
  std::vector<std::uint64_t> seeds;  // per-replica streams
  std::vector<double> values;        // normalised flow per replica
  Summary summary;
};

/// Exact value with zero spread, e.g. the constant-law nu(v) = c |v|_1.
EstimateRecord exact_estimate(const Vec& direction, double value);

/// Unit-area hyperrectangle normal to v, centred at the origin and shifted by
/// 1/(4n) along each in-plane axis so that a lattice-aligned base holds exactly
/// n^{d-1} lattice points.
FlatPolytope unit_base(const Vec& direction, std::int64_t n);

/// nu_hat(v): mean over replicas of the flow through n cyl(unit_base, h),
/// divided by n^{d-1}. `mode` selects tau (half_boundary, the default) or phi.
EstimateRecord estimate_nu(const Vec& direction, std::int64_t n, double h, const CapacityLaw& law,
                           std::size_t replicas, std::uint64_t master_seed, unsigned workers = 1,
                           CylinderMode mode = CylinderMode::half_boundary);

struct FaceContribution {
  Vec normal;
  double area = 0.0;
  double nu = 0.0;
  double contribution = 0.0;
};

struct SurfaceEnergyReport {
  std::vector<FaceContribution> faces;
  double total = 0.0;
  double se = 0.0;  // first-order propagation, one term per distinct estimate
};

/// I_hat(P) = sum_i nu_hat(v_i) area(F_i). Every face normal needs an estimate
/// within 1e-9 of it; otherwise MissingDirection.
SurfaceEnergyReport surface_energy(const ConvexPolytope& polytope, const std::vector<EstimateRecord>& estimates);
/// Same sum with a known nu.
double surface_energy(const ConvexPolytope& polytope, const std::function<double(const Vec&)>& nu);

/// nu for the constant law c: c |v|_1.
double constant_law_nu(double c, const Vec& v);

/// Normalised flows phi_to_infinity(A, n) / n^{d-1}, one per replica.
struct FlowSample {
  std::int64_t n = 0;
  std::uint64_t master_seed = 0;
  std::vector<std::uint64_t> seeds;
  std::vector<double> values;      // raw min-cut capacities
  std::vector<double> normalized;  // values / n^{d-1}
  std::vector<FlowToInfinityResult> results;
};

FlowSample sample_flows(const ConvexBody& body, std::int64_t n, const CapacityLaw& law, std::size_t replicas,
                        std::uint64_t master_seed, unsigned workers = 1, const TruncationOptions& options = {});

struct ConvergenceRow {
  std::int64_t n = 0;
  Summary summary;        // of the normalised values
  double spread = 0.0;    // sd / mean (0 when mean is 0)
  double i_outer = 0.0;   // I(P_outer)
  double i_inner = 0.0;   // I(P_inner)
  double i_reference = 0.0;
  double gap = 0.0;       // |mean - i_reference|
  FlowSample sample;
};

struct ConvergenceOptions {
  std::size_t polytope_directions = 32;
  unsigned workers = 1;
  TruncationOptions truncation;
};

/// For each n: spread of phi_to_infinity(A, n)/n^{d-1}, plus I of the outer
/// and inner polytope approximations under `nu`. The reference I_hat is the
/// exact face sum when A is a polytope and the mean of the two bounds otherwise.
std::vector<ConvergenceRow> convergence_experiment(const ConvexBody& body, const CapacityLaw& law,
                                                   const std::vector<std::int64_t>& schedule, std::size_t replicas,
                                                   std::uint64_t master_seed,
                                                   const std::function<double(const Vec&)>& nu,
                                                   const ConvergenceOptions& options = {});

/// I_hat(A) as used by the convergence table.
double reference_energy(const ConvexBody& body, const std::function<double(const Vec&)>& nu,
                        std::size_t polytope_directions);

struct DeviationRow {
  std::int64_t n = 0;
  std::size_t exceed = 0;
  std::size_t replicas = 0;
  double frequency = 0.0;
  /// log(frequency) / n^{d-1}; NaN when the frequency is 0.
  double log_rate = 0.0;
};

/// Empirical frequency of |phi_n/n^{d-1} - reference| >= relative_eps * reference.
std::vector<DeviationRow> deviation_tail(const ConvexBody& body, const CapacityLaw& law,
                                         const std::vector<std::int64_t>& schedule, double relative_eps,
                                         std::size_t replicas, std::uint64_t master_seed, double reference,
                                         unsigned workers = 1);
/// Same table from samples already drawn.
std::vector<DeviationRow> deviation_tail(const std::vector<FlowSample>& samples, int d, double relative_eps,
                                         double reference);

struct EdgeClasses {
  std::size_t plus = 0;   // t(e) > eps
  std::size_t minus = 0;  // 0 < t(e) <= eps
  std::size_t zero = 0;   // t(e) = 0
};

EdgeClasses classify_edges(const std::vector<double>& capacities, double eps);

struct CutsetRecord {
  std::uint64_t seed = 0;
  std::size_t size = 0;       // |E|
  double capacity = 0.0;      // V(E)
  double boundary_capacity = 0.0;  // V(edge boundary of nA) on the same environment
  EdgeClasses classes;
};

struct CutsetStats {
  std::int64_t n = 0;
  double eps = 0.0;
  std::vector<double> betas;             // {1,2,4,8} x 2d
  std::vector<double> beta_frequency;    // frequency of |E| >= beta n^{d-1}
  std::vector<CutsetRecord> records;
  double bin_width = 0.25;
  std::vector<std::pair<double, std::size_t>> histogram;  // (bin start, count) of |E|/n^{d-1}
};

CutsetStats cutset_statistics(const ConvexBody& body, const CapacityLaw& law, std::int64_t n, double eps,
                              std::size_t replicas, std::uint64_t master_seed, unsigned workers = 1);
/// Same statistics from samples already drawn.
CutsetStats cutset_statistics(const ConvexBody& body, const CapacityLaw& law, const FlowSample& sample, double eps);

nlohmann::json to_json(const Summary& s);
nlohmann::json to_json(const EstimateRecord& r);
nlohmann::json to_json(const SurfaceEnergyReport& r);

}  // namespace percoflow
