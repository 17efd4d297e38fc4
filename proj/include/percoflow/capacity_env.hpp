#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "percoflow/error.hpp"

namespace percoflow {

using IVec = std::vector<std::int64_t>;

// ---------------------------------------------------------------------------
// Capacity laws
// ---------------------------------------------------------------------------

struct ConstantLaw {
  double value;
};

/// Mass 1-p at zero and p at `value`.
struct BernoulliScaledLaw {
  double p;
  double value;
};

struct UniformLaw {
  double a;
  double b;
};

struct ExponentialLaw {
  double rate;
};

struct FiniteDiscreteLaw {
  std::vector<std::pair<double, double>> atoms;  // (value, probability)
};

/// Distribution G of the i.i.d. edge capacities.
class CapacityLaw {
 public:
  using Variant =
      std::variant<ConstantLaw, BernoulliScaledLaw, UniformLaw, ExponentialLaw, FiniteDiscreteLaw>;

  CapacityLaw() : law_(ConstantLaw{1.0}) {}
  /// Atoms of a finite_discrete law are stored sorted by value.
  explicit CapacityLaw(Variant law);

  static CapacityLaw constant(double c) { return CapacityLaw(ConstantLaw{c}); }
  static CapacityLaw bernoulli_scaled(double p, double v) { return CapacityLaw(BernoulliScaledLaw{p, v}); }
  static CapacityLaw uniform(double a, double b) { return CapacityLaw(UniformLaw{a, b}); }
  static CapacityLaw exponential(double rate) { return CapacityLaw(ExponentialLaw{rate}); }
  static CapacityLaw finite_discrete(std::vector<std::pair<double, double>> atoms) {
    return CapacityLaw(FiniteDiscreteLaw{std::move(atoms)});
  }

  const Variant& variant() const noexcept { return law_; }
  std::string kind_name() const;
  /// Human-readable one-line description, e.g. "bernoulli_scaled(p=0.9, value=1)".
  std::string describe() const;

  /// Throws Error(MalformedLaw) if parameters are out of range.
  void check() const;

  /// G({0}).
  double atom_at_zero() const;
  /// G([0, x]).
  double cdf(double x) const;
  /// Left-continuous inverse of the cdf, u in [0,1).
  double quantile(double u) const;
  double mean() const;
  bool is_deterministic() const;

 private:
  Variant law_;
};

struct ValidationReport {
  double zero_atom = 0.0;
  std::optional<double> pc;  // p_c(d) when tabulated
  bool subcritical_zeros = false;
  bool exp_moment = false;
  std::string exp_moment_note;
  std::vector<std::string> warnings;  // "HypothesisViolated", "UnsupportedDimension"
};

/// Bond percolation threshold table; nullopt for d outside {2, 3}.
std::optional<double> critical_probability(int d);

/// Checks the hypotheses G({0}) < 1 - p_c(d) and the exponential moment.
/// Violations are reported as warnings; only malformed laws throw.
ValidationReport validate_law(const CapacityLaw& law, int d);

// ---------------------------------------------------------------------------
// Lattice regions
// ---------------------------------------------------------------------------

/// Integer box [lo_1,hi_1] x ... x [lo_d,hi_d] of Z^d with its nearest-neighbour edges.
///
/// Vertices are indexed row-major (last coordinate fastest). Edges are indexed
/// by scanning vertices in that order and, for each axis a, emitting the edge
/// {x, x+e_a} when x_a < hi_a; edge indices are grouped by axis (all axis-0
/// edges first).
class LatticeRegion {
 public:
  LatticeRegion() = default;
  LatticeRegion(IVec lo, IVec hi);

  /// [-half, half]^d.
  static LatticeRegion centered_box(int d, std::int64_t half);

  int dim() const noexcept { return static_cast<int>(lo_.size()); }
  const IVec& lo() const noexcept { return lo_; }
  const IVec& hi() const noexcept { return hi_; }
  std::int64_t extent(int axis) const { return hi_[axis] - lo_[axis] + 1; }
  std::int64_t stride(int axis) const { return strides_[axis]; }

  std::int64_t vertex_count() const noexcept { return vertex_count_; }
  std::int64_t edge_count() const noexcept { return edge_offsets_.back(); }

  bool contains(const IVec& x) const;
  std::int64_t vertex_index(const IVec& x) const;
  IVec vertex_coords(std::int64_t index) const;
  void vertex_coords(std::int64_t index, IVec& out) const;
  /// True when some coordinate sits on lo_i or hi_i.
  bool on_boundary(std::int64_t index) const;

  /// Edge from `base` to base + e_axis; both endpoints must lie in the region.
  std::int64_t edge_index(const IVec& base, int axis) const;
  /// Lower endpoint and axis of an edge.
  std::pair<IVec, int> edge_geometry(std::int64_t edge) const;
  std::pair<std::int64_t, std::int64_t> edge_endpoints(std::int64_t edge) const;

  /// Visits every edge in index order as (edge, u, v, axis) with u the lower endpoint.
  void for_each_edge(
      const std::function<void(std::int64_t, std::int64_t, std::int64_t, int)>& visit) const;

 private:
  IVec lo_, hi_;
  std::vector<std::int64_t> strides_;
  std::vector<std::int64_t> edge_offsets_{0};
  std::int64_t vertex_count_ = 0;
};

// ---------------------------------------------------------------------------
// Seeded environments
// ---------------------------------------------------------------------------

/// SplitMix64 finaliser (Steele, Lea, Flood 2014).
std::uint64_t mix64(std::uint64_t z);
/// Stream identifier of a replica: mix64(mix64(master_seed) ^ replica).
std::uint64_t replica_seed(std::uint64_t master_seed, std::uint64_t replica);
/// Uniform draw in [0,1) attached to the lattice edge {x, x+e_axis}. It depends
/// only on the replica stream and the global edge, so any two regions sampled
/// from the same stream agree on their common edges.
double edge_uniform(std::uint64_t stream, const std::int64_t* base, int d, int axis);

inline constexpr std::int64_t kDefaultEdgeBudget = 60'000'000;

/// Immutable capacity assignment t(e) on the edges of a region.
class Environment {
 public:
  Environment(LatticeRegion region, CapacityLaw law, std::uint64_t master_seed,
              std::uint64_t replica, std::vector<double> capacities);

  const LatticeRegion& region() const noexcept { return region_; }
  const CapacityLaw& law() const noexcept { return law_; }
  std::uint64_t master_seed() const noexcept { return master_seed_; }
  std::uint64_t replica() const noexcept { return replica_; }
  std::uint64_t stream() const noexcept { return replica_seed(master_seed_, replica_); }
  const std::vector<double>& capacities() const noexcept { return capacities_; }

  double capacity(std::int64_t edge) const { return capacities_.at(static_cast<std::size_t>(edge)); }
  double capacity(const IVec& base, int axis) const { return capacity(region_.edge_index(base, axis)); }

  /// "edge_index,t" lines with a header; values printed round-trip exact.
  void write_csv(std::ostream& out) const;
  /// Little-endian: magic "PFENV1\0\0", int64 d, lo[d], hi[d], uint64 seed,
  /// uint64 replica, int64 edge count, then edge-count doubles.
  void write_binary(std::ostream& out) const;
  static Environment read_binary(std::istream& in, const CapacityLaw& law);

 private:
  LatticeRegion region_;
  CapacityLaw law_;
  std::uint64_t master_seed_;
  std::uint64_t replica_;
  std::vector<double> capacities_;
};

/// Draws t(e) = G^{-1}(edge_uniform(...)) for every edge of the region.
Environment sample_environment(const LatticeRegion& region, const CapacityLaw& law,
                               std::uint64_t master_seed, std::uint64_t replica,
                               std::int64_t edge_budget = kDefaultEdgeBudget);

}  // namespace percoflow
