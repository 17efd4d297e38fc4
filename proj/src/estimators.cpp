#include "percoflow/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "percoflow/parallel.hpp"

namespace percoflow {

namespace {

double scale_power(std::int64_t n, int d) { return std::pow(static_cast<double>(n), d - 1); }

Environment field(int d, const CapacityLaw& law, std::uint64_t master_seed, std::uint64_t replica) {
  return sample_environment(LatticeRegion::centered_box(d, 1), law, master_seed, replica);
}

}  // namespace

Summary summarize(const std::vector<double>& values) {
  Summary s;
  if (values.empty()) return s;
  const double count = static_cast<double>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / count;
  s.min = *std::min_element(values.begin(), values.end());
  s.max = *std::max_element(values.begin(), values.end());
  // the fold can drift outside [min, max] by rounding for constant samples
  s.mean = std::clamp(s.mean, s.min, s.max);
  if (values.size() >= 2) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.sd = std::sqrt(ss / (count - 1.0));
    s.se = s.sd / std::sqrt(count);
  }
  return s;
}

EstimateRecord exact_estimate(const Vec& direction, double value) {
  EstimateRecord r;
  r.quantity = "nu_exact";
  r.direction = normalized(direction);
  r.values = {value};
  r.summary = summarize(r.values);
  return r;
}

FlatPolytope unit_base(const Vec& direction, std::int64_t n) {
  const Vec v = normalized(direction);
  const auto axes = orthonormal_complement(v);
  Vec center(v.size(), 0.0);
  for (const auto& a : axes) center = center + (0.25 / static_cast<double>(n)) * a;
  return FlatPolytope::hyperrectangle(center, v, axes, std::vector<double>(axes.size(), 1.0));
}

EstimateRecord estimate_nu(const Vec& direction, std::int64_t n, double h, const CapacityLaw& law,
                           std::size_t replicas, std::uint64_t master_seed, unsigned workers, CylinderMode mode) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "scale n must be >= 1");
  if (!(h > 0.0)) throw Error(ErrorCode::InvalidArgument, "height h must be positive");
  if (replicas < 1) throw Error(ErrorCode::InvalidArgument, "at least one replica is required");
  law.check();
  EstimateRecord r;
  r.quantity = mode == CylinderMode::half_boundary ? "nu_tau" : "nu_phi";
  r.direction = normalized(direction);
  r.n = n;
  r.h = h;
  r.law = law.describe();
  r.master_seed = master_seed;
  const int d = static_cast<int>(r.direction.size());
  const Cylinder cylinder{unit_base(r.direction, n), h};
  // discretisation does not depend on the replica
  const auto dc = discretize_cylinder(cylinder, n, mode);
  r.values.resize(replicas);
  r.seeds.resize(replicas);
  parallel_for(replicas, workers, [&](std::size_t k) {
    const auto env = sample_environment(dc.region, law, master_seed, k);
    const auto problem = cylinder_problem(dc, env);
    const auto cut = min_cut(problem, max_flow(problem));
    r.values[k] = cut.capacity / scale_power(n, d);
    r.seeds[k] = replica_seed(master_seed, k);
  });
  r.summary = summarize(r.values);
  return r;
}

double constant_law_nu(double c, const Vec& v) {
  double s = 0.0;
  for (double x : v) s += std::abs(x);
  return c * s;
}

SurfaceEnergyReport surface_energy(const ConvexPolytope& polytope, const std::vector<EstimateRecord>& estimates) {
  SurfaceEnergyReport report;
  std::map<std::size_t, double> area_per_estimate;
  for (const auto& face : polytope.faces()) {
    std::size_t match = estimates.size();
    for (std::size_t k = 0; k < estimates.size() && match == estimates.size(); ++k)
      if (estimates[k].direction.size() == face.normal.size() &&
          norm(normalized(estimates[k].direction) - face.normal) <= 1e-9)
        match = k;
    if (match == estimates.size()) {
      std::string dir;
      for (double x : face.normal) dir += (dir.empty() ? "" : ",") + std::to_string(x);
      throw Error(ErrorCode::MissingDirection, "no estimate for face normal (" + dir + ")");
    }
    const double nu = estimates[match].summary.mean;
    report.faces.push_back({face.normal, face.area, nu, nu * face.area});
    report.total += nu * face.area;
    area_per_estimate[match] += face.area;
  }
  double var = 0.0;
  for (auto [k, area] : area_per_estimate) var += std::pow(estimates[k].summary.se * area, 2);
  report.se = std::sqrt(var);
  return report;
}

double surface_energy(const ConvexPolytope& polytope, const std::function<double(const Vec&)>& nu) {
  double total = 0.0;
  for (const auto& face : polytope.faces()) total += nu(face.normal) * face.area;
  return total;
}

FlowSample sample_flows(const ConvexBody& body, std::int64_t n, const CapacityLaw& law, std::size_t replicas,
                        std::uint64_t master_seed, unsigned workers, const TruncationOptions& options) {
  FlowSample s;
  s.n = n;
  s.master_seed = master_seed;
  s.seeds.resize(replicas);
  s.values.resize(replicas);
  s.normalized.resize(replicas);
  s.results.resize(replicas);
  const double scale = scale_power(n, body.dim());
  parallel_for(replicas, workers, [&](std::size_t k) {
    s.results[k] = phi_to_infinity(body, n, law, master_seed, k, options);
    s.seeds[k] = replica_seed(master_seed, k);
    s.values[k] = s.results[k].value;
    s.normalized[k] = s.results[k].value / scale;
  });
  return s;
}

double reference_energy(const ConvexBody& body, const std::function<double(const Vec&)>& nu,
                        std::size_t polytope_directions) {
  if (auto p = body.as_polytope()) return surface_energy(*p, nu);
  return 0.5 * (surface_energy(outer_polytope(body, polytope_directions), nu) +
                surface_energy(inner_polytope(body, polytope_directions), nu));
}

std::vector<ConvergenceRow> convergence_experiment(const ConvexBody& body, const CapacityLaw& law,
                                                   const std::vector<std::int64_t>& schedule, std::size_t replicas,
                                                   std::uint64_t master_seed,
                                                   const std::function<double(const Vec&)>& nu,
                                                   const ConvergenceOptions& options) {
  if (schedule.empty()) throw Error(ErrorCode::InvalidArgument, "empty n schedule");
  law.check();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  double i_outer = nan, i_inner = nan, i_ref = nan;
  if (nu) {
    i_outer = surface_energy(outer_polytope(body, options.polytope_directions), nu);
    i_inner = surface_energy(inner_polytope(body, options.polytope_directions), nu);
    i_ref = reference_energy(body, nu, options.polytope_directions);
  }
  std::vector<ConvergenceRow> rows;
  for (auto n : schedule) {
    ConvergenceRow row;
    row.n = n;
    row.sample = sample_flows(body, n, law, replicas, master_seed, options.workers, options.truncation);
    row.summary = summarize(row.sample.normalized);
    row.spread = row.summary.mean > 0.0 ? row.summary.sd / row.summary.mean : 0.0;
    row.i_outer = i_outer;
    row.i_inner = i_inner;
    row.i_reference = i_ref;
    row.gap = std::abs(row.summary.mean - i_ref);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<DeviationRow> deviation_tail(const std::vector<FlowSample>& samples, int d, double relative_eps,
                                         double reference) {
  if (!(relative_eps > 0.0)) throw Error(ErrorCode::InvalidArgument, "relative_eps must be positive");
  std::vector<DeviationRow> rows;
  for (const auto& s : samples) {
    DeviationRow row;
    row.n = s.n;
    row.replicas = s.normalized.size();
    for (double x : s.normalized)
      if (std::abs(x - reference) >= relative_eps * reference) ++row.exceed;
    row.frequency = row.replicas ? static_cast<double>(row.exceed) / static_cast<double>(row.replicas) : 0.0;
    row.log_rate = row.exceed ? std::log(row.frequency) / scale_power(s.n, d)
                              : std::numeric_limits<double>::quiet_NaN();
    rows.push_back(row);
  }
  return rows;
}

std::vector<DeviationRow> deviation_tail(const ConvexBody& body, const CapacityLaw& law,
                                         const std::vector<std::int64_t>& schedule, double relative_eps,
                                         std::size_t replicas, std::uint64_t master_seed, double reference,
                                         unsigned workers) {
  if (!(relative_eps > 0.0)) throw Error(ErrorCode::InvalidArgument, "relative_eps must be positive");
  std::vector<FlowSample> samples;
  for (auto n : schedule) samples.push_back(sample_flows(body, n, law, replicas, master_seed, workers));
  return deviation_tail(samples, body.dim(), relative_eps, reference);
}

EdgeClasses classify_edges(const std::vector<double>& capacities, double eps) {
  if (!(eps > 0.0)) throw Error(ErrorCode::InvalidArgument, "eps must be positive");
  EdgeClasses c;
  for (double t : capacities) {
    if (t > eps)
      ++c.plus;
    else if (t > 0.0)
      ++c.minus;
    else
      ++c.zero;
  }
  return c;
}

CutsetStats cutset_statistics(const ConvexBody& body, const CapacityLaw& law, const FlowSample& sample, double eps) {
  const int d = body.dim();
  CutsetStats stats;
  stats.n = sample.n;
  stats.eps = eps;
  const auto boundary = edge_boundary(body, sample.n);
  for (std::size_t k = 0; k < sample.results.size(); ++k) {
    const auto& r = sample.results[k];
    CutsetRecord rec;
    rec.seed = sample.seeds[k];
    rec.size = r.cutset.size();
    std::vector<double> caps;
    for (const auto& e : r.cutset) caps.push_back(e.capacity);
    rec.capacity = total_capacity(r.cutset);
    rec.classes = classify_edges(caps, eps);
    const auto env = field(d, law, sample.master_seed, k);
    for (const auto& e : boundary) rec.boundary_capacity += edge_capacity(env, e.base, e.axis);
    stats.records.push_back(rec);
  }
  const double scale = scale_power(sample.n, d);
  for (double b : {1.0, 2.0, 4.0, 8.0}) {
    const double beta = b * 2.0 * d;
    std::size_t hits = 0;
    for (const auto& rec : stats.records)
      if (static_cast<double>(rec.size) >= beta * scale) ++hits;
    stats.betas.push_back(beta);
    stats.beta_frequency.push_back(stats.records.empty() ? 0.0
                                                         : static_cast<double>(hits) / static_cast<double>(stats.records.size()));
  }
  std::map<std::int64_t, std::size_t> bins;
  for (const auto& rec : stats.records)
    ++bins[static_cast<std::int64_t>(std::floor(static_cast<double>(rec.size) / scale / stats.bin_width))];
  for (auto [b, count] : bins) stats.histogram.emplace_back(static_cast<double>(b) * stats.bin_width, count);
  return stats;
}

CutsetStats cutset_statistics(const ConvexBody& body, const CapacityLaw& law, std::int64_t n, double eps,
                              std::size_t replicas, std::uint64_t master_seed, unsigned workers) {
  if (!(eps > 0.0)) throw Error(ErrorCode::InvalidArgument, "eps must be positive");
  return cutset_statistics(body, law, sample_flows(body, n, law, replicas, master_seed, workers), eps);
}

nlohmann::json to_json(const Summary& s) {
  return {{"mean", s.mean}, {"sd", s.sd}, {"se", s.se}, {"min", s.min}, {"max", s.max}};
}

nlohmann::json to_json(const EstimateRecord& r) {
  return {{"quantity", r.quantity}, {"direction", r.direction}, {"n", r.n},
          {"h", r.h},               {"law", r.law},             {"replicas", r.values.size()},
          {"master_seed", r.master_seed}, {"seeds", r.seeds}, {"summary", to_json(r.summary)}};
}

nlohmann::json to_json(const SurfaceEnergyReport& r) {
  auto faces = nlohmann::json::array();
  for (const auto& f : r.faces)
    faces.push_back({{"normal", f.normal}, {"area", f.area}, {"nu", f.nu}, {"contribution", f.contribution}});
  return {{"faces", faces}, {"total", r.total}, {"se", r.se}};
}

}  // namespace percoflow
