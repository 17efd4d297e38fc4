#include "percoflow/capacity_env.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "percoflow/util.hpp"

namespace percoflow {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

[[noreturn]] void malformed(const std::string& what) { throw Error(ErrorCode::MalformedLaw, what); }

}  // namespace

CapacityLaw::CapacityLaw(Variant law) : law_(std::move(law)) {
  if (auto* discrete = std::get_if<FiniteDiscreteLaw>(&law_))
    std::sort(discrete->atoms.begin(), discrete->atoms.end());
}

std::string CapacityLaw::kind_name() const {
  return std::visit(overloaded{
                        [](const ConstantLaw&) { return std::string("constant"); },
                        [](const BernoulliScaledLaw&) { return std::string("bernoulli_scaled"); },
                        [](const UniformLaw&) { return std::string("uniform"); },
                        [](const ExponentialLaw&) { return std::string("exponential"); },
                        [](const FiniteDiscreteLaw&) { return std::string("finite_discrete"); },
                    },
                    law_);
}

std::string CapacityLaw::describe() const {
  std::ostringstream os;
  std::visit(overloaded{
                 [&](const ConstantLaw& l) { os << "constant(" << format_double(l.value) << ")"; },
                 [&](const BernoulliScaledLaw& l) {
                   os << "bernoulli_scaled(p=" << format_double(l.p) << ", value=" << format_double(l.value)
                      << ")";
                 },
                 [&](const UniformLaw& l) {
                   os << "uniform(" << format_double(l.a) << ", " << format_double(l.b) << ")";
                 },
                 [&](const ExponentialLaw& l) { os << "exponential(rate=" << format_double(l.rate) << ")"; },
                 [&](const FiniteDiscreteLaw& l) {
                   os << "finite_discrete(";
                   for (std::size_t i = 0; i < l.atoms.size(); ++i) {
                     if (i) os << ", ";
                     os << format_double(l.atoms[i].first) << ":" << format_double(l.atoms[i].second);
                   }
                   os << ")";
                 },
             },
             law_);
  return os.str();
}

void CapacityLaw::check() const {
  std::visit(overloaded{
                 [](const ConstantLaw& l) {
                   if (!(l.value >= 0.0) || !std::isfinite(l.value)) malformed("constant value must be >= 0");
                 },
                 [](const BernoulliScaledLaw& l) {
                   if (!(l.p >= 0.0 && l.p <= 1.0)) malformed("bernoulli_scaled p must lie in [0,1]");
                   if (!(l.value > 0.0) || !std::isfinite(l.value))
                     malformed("bernoulli_scaled value must be > 0");
                 },
                 [](const UniformLaw& l) {
                   if (!(l.a >= 0.0 && l.a < l.b) || !std::isfinite(l.b))
                     malformed("uniform requires 0 <= a < b");
                 },
                 [](const ExponentialLaw& l) {
                   if (!(l.rate > 0.0) || !std::isfinite(l.rate)) malformed("exponential rate must be > 0");
                 },
                 [](const FiniteDiscreteLaw& l) {
                   if (l.atoms.empty()) malformed("finite_discrete needs at least one atom");
                   double total = 0.0;
                   for (const auto& [value, prob] : l.atoms) {
                     if (!(value >= 0.0) || !std::isfinite(value)) malformed("negative support value");
                     if (!(prob >= 0.0)) malformed("negative probability");
                     total += prob;
                   }
                   if (std::abs(total - 1.0) > 1e-12) malformed("probabilities do not sum to 1");
                 },
             },
             law_);
}

double CapacityLaw::atom_at_zero() const {
  return std::visit(overloaded{
                        [](const ConstantLaw& l) { return l.value == 0.0 ? 1.0 : 0.0; },
                        [](const BernoulliScaledLaw& l) { return 1.0 - l.p; },
                        [](const UniformLaw&) { return 0.0; },
                        [](const ExponentialLaw&) { return 0.0; },
                        [](const FiniteDiscreteLaw& l) {
                          double mass = 0.0;
                          for (const auto& [value, prob] : l.atoms)
                            if (value == 0.0) mass += prob;
                          return mass;
                        },
                    },
                    law_);
}

double CapacityLaw::cdf(double x) const {
  if (x < 0.0) return 0.0;
  return std::visit(overloaded{
                        [&](const ConstantLaw& l) { return x >= l.value ? 1.0 : 0.0; },
                        [&](const BernoulliScaledLaw& l) { return x >= l.value ? 1.0 : 1.0 - l.p; },
                        [&](const UniformLaw& l) {
                          if (x <= l.a) return 0.0;
                          if (x >= l.b) return 1.0;
                          return (x - l.a) / (l.b - l.a);
                        },
                        [&](const ExponentialLaw& l) { return -std::expm1(-l.rate * x); },
                        [&](const FiniteDiscreteLaw& l) {
                          double mass = 0.0;
                          for (const auto& [value, prob] : l.atoms)
                            if (value <= x) mass += prob;
                          return std::min(mass, 1.0);
                        },
                    },
                    law_);
}

double CapacityLaw::quantile(double u) const {
  return std::visit(overloaded{
                        [](const ConstantLaw& l) { return l.value; },
                        [&](const BernoulliScaledLaw& l) { return u < 1.0 - l.p ? 0.0 : l.value; },
                        [&](const UniformLaw& l) { return l.a + u * (l.b - l.a); },
                        [&](const ExponentialLaw& l) { return -std::log1p(-u) / l.rate; },
                        [&](const FiniteDiscreteLaw& l) {
                          double acc = 0.0;
                          for (const auto& [value, prob] : l.atoms) {
                            acc += prob;
                            if (u < acc) return value;
                          }
                          return l.atoms.back().first;
                        },
                    },
                    law_);
}

double CapacityLaw::mean() const {
  return std::visit(overloaded{
                        [](const ConstantLaw& l) { return l.value; },
                        [](const BernoulliScaledLaw& l) { return l.p * l.value; },
                        [](const UniformLaw& l) { return 0.5 * (l.a + l.b); },
                        [](const ExponentialLaw& l) { return 1.0 / l.rate; },
                        [](const FiniteDiscreteLaw& l) {
                          double m = 0.0;
                          for (const auto& [value, prob] : l.atoms) m += value * prob;
                          return m;
                        },
                    },
                    law_);
}

bool CapacityLaw::is_deterministic() const {
  return std::visit(overloaded{
                        [](const ConstantLaw&) { return true; },
                        [](const BernoulliScaledLaw& l) { return l.p == 0.0 || l.p == 1.0; },
                        [](const UniformLaw&) { return false; },
                        [](const ExponentialLaw&) { return false; },
                        [](const FiniteDiscreteLaw& l) {
                          int positive = 0;
                          for (const auto& atom : l.atoms)
                            if (atom.second > 0.0) ++positive;
                          return positive <= 1;
                        },
                    },
                    law_);
}

std::optional<double> critical_probability(int d) {
  if (d == 2) return 0.5;
  if (d == 3) return 0.2488;
  return std::nullopt;
}

ValidationReport validate_law(const CapacityLaw& law, int d) {
  law.check();
  ValidationReport report;
  report.zero_atom = law.atom_at_zero();
  report.pc = critical_probability(d);
  if (report.pc) {
    report.subcritical_zeros = report.zero_atom < 1.0 - *report.pc;
    if (!report.subcritical_zeros) report.warnings.emplace_back("HypothesisViolated");
  } else {
    report.subcritical_zeros = false;
    report.warnings.emplace_back("UnsupportedDimension");
  }
  report.exp_moment = true;
  report.exp_moment_note = std::holds_alternative<ExponentialLaw>(law.variant())
                               ? "exponential tail: E[exp(theta t)] < inf for theta < rate"
                               : "bounded support";
  return report;
}

// ---------------------------------------------------------------------------

LatticeRegion::LatticeRegion(IVec lo, IVec hi) : lo_(std::move(lo)), hi_(std::move(hi)) {
  if (lo_.empty() || lo_.size() != hi_.size())
    throw Error(ErrorCode::InvalidArgument, "region bounds must have equal nonzero dimension");
  const int d = dim();
  for (int i = 0; i < d; ++i)
    if (!(lo_[i] < hi_[i])) throw Error(ErrorCode::InvalidArgument, "region requires lo_i < hi_i");
  strides_.assign(d, 1);
  for (int i = d - 2; i >= 0; --i) strides_[i] = strides_[i + 1] * extent(i + 1);
  vertex_count_ = strides_[0] * extent(0);
  for (int a = 0; a < d; ++a) {
    std::int64_t block = 1;
    for (int i = 0; i < d; ++i) block *= (i == a) ? extent(i) - 1 : extent(i);
    edge_offsets_.push_back(edge_offsets_.back() + block);
  }
}

LatticeRegion LatticeRegion::centered_box(int d, std::int64_t half) {
  return LatticeRegion(IVec(d, -half), IVec(d, half));
}

bool LatticeRegion::contains(const IVec& x) const {
  for (int i = 0; i < dim(); ++i)
    if (x[i] < lo_[i] || x[i] > hi_[i]) return false;
  return true;
}

std::int64_t LatticeRegion::vertex_index(const IVec& x) const {
  if (!contains(x)) throw Error(ErrorCode::InvalidArgument, "vertex outside region");
  std::int64_t idx = 0;
  for (int i = 0; i < dim(); ++i) idx += (x[i] - lo_[i]) * strides_[i];
  return idx;
}

IVec LatticeRegion::vertex_coords(std::int64_t index) const {
  IVec out;
  vertex_coords(index, out);
  return out;
}

void LatticeRegion::vertex_coords(std::int64_t index, IVec& out) const {
  out.resize(dim());
  for (int i = 0; i < dim(); ++i) {
    out[i] = lo_[i] + index / strides_[i];
    index %= strides_[i];
  }
}

bool LatticeRegion::on_boundary(std::int64_t index) const {
  for (int i = 0; i < dim(); ++i) {
    const std::int64_t c = index / strides_[i];
    index %= strides_[i];
    if (c == 0 || c == extent(i) - 1) return true;
  }
  return false;
}

std::int64_t LatticeRegion::edge_index(const IVec& base, int axis) const {
  const int d = dim();
  if (axis < 0 || axis >= d || !contains(base) || base[axis] >= hi_[axis])
    throw Error(ErrorCode::InvalidArgument, "edge outside region");
  std::int64_t local = 0;
  std::int64_t stride = 1;
  for (int i = d - 1; i >= 0; --i) {
    const std::int64_t ext = (i == axis) ? extent(i) - 1 : extent(i);
    local += (base[i] - lo_[i]) * stride;
    stride *= ext;
  }
  return edge_offsets_[axis] + local;
}

std::pair<IVec, int> LatticeRegion::edge_geometry(std::int64_t edge) const {
  if (edge < 0 || edge >= edge_count()) throw Error(ErrorCode::InvalidArgument, "edge index out of range");
  const int d = dim();
  int axis = 0;
  while (edge >= edge_offsets_[axis + 1]) ++axis;
  std::int64_t local = edge - edge_offsets_[axis];
  IVec base(d);
  for (int i = d - 1; i >= 0; --i) {
    const std::int64_t ext = (i == axis) ? extent(i) - 1 : extent(i);
    base[i] = lo_[i] + local % ext;
    local /= ext;
  }
  return {base, axis};
}

std::pair<std::int64_t, std::int64_t> LatticeRegion::edge_endpoints(std::int64_t edge) const {
  auto [base, axis] = edge_geometry(edge);
  const std::int64_t u = vertex_index(base);
  return {u, u + strides_[axis]};
}

void LatticeRegion::for_each_edge(
    const std::function<void(std::int64_t, std::int64_t, std::int64_t, int)>& visit) const {
  const int d = dim();
  IVec x;
  for (int axis = 0; axis < d; ++axis) {
    std::int64_t e = edge_offsets_[axis];
    for (std::int64_t u = 0; u < vertex_count_; ++u) {
      // coordinate along `axis` relative to lo
      const std::int64_t c = (u / strides_[axis]) % extent(axis);
      if (c == extent(axis) - 1) continue;
      visit(e++, u, u + strides_[axis], axis);
    }
  }
}

// ---------------------------------------------------------------------------

std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t replica_seed(std::uint64_t master_seed, std::uint64_t replica) {
  return mix64(mix64(master_seed) ^ replica);
}

double edge_uniform(std::uint64_t stream, const std::int64_t* base, int d, int axis) {
  std::uint64_t h = stream;
  for (int i = 0; i < d; ++i) h = mix64(h ^ static_cast<std::uint64_t>(base[i]));
  h = mix64(h ^ static_cast<std::uint64_t>(axis));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

Environment::Environment(LatticeRegion region, CapacityLaw law, std::uint64_t master_seed,
                         std::uint64_t replica, std::vector<double> capacities)
    : region_(std::move(region)),
      law_(std::move(law)),
      master_seed_(master_seed),
      replica_(replica),
      capacities_(std::move(capacities)) {
  if (static_cast<std::int64_t>(capacities_.size()) != region_.edge_count())
    throw Error(ErrorCode::InvalidArgument, "capacity array does not match region");
  for (double t : capacities_)
    if (!(t >= 0.0)) throw Error(ErrorCode::InvalidArgument, "negative capacity");
}

void Environment::write_csv(std::ostream& out) const {
  out << "edge_index,t\n";
  for (std::size_t e = 0; e < capacities_.size(); ++e) out << e << ',' << format_double(capacities_[e]) << '\n';
}

namespace {

template <class T>
void put(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <class T>
T get(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw Error(ErrorCode::IoError, "truncated environment dump");
  return value;
}

constexpr char kMagic[8] = {'P', 'F', 'E', 'N', 'V', '1', 0, 0};

}  // namespace

void Environment::write_binary(std::ostream& out) const {
  out.write(kMagic, sizeof(kMagic));
  put<std::int64_t>(out, region_.dim());
  for (auto v : region_.lo()) put<std::int64_t>(out, v);
  for (auto v : region_.hi()) put<std::int64_t>(out, v);
  put<std::uint64_t>(out, master_seed_);
  put<std::uint64_t>(out, replica_);
  put<std::int64_t>(out, static_cast<std::int64_t>(capacities_.size()));
  for (double t : capacities_) put<double>(out, t);
}

Environment Environment::read_binary(std::istream& in, const CapacityLaw& law) {
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(magic)) != 0)
    throw Error(ErrorCode::IoError, "not an environment dump");
  const auto d = get<std::int64_t>(in);
  if (d <= 0 || d > 16) throw Error(ErrorCode::IoError, "bad dimension in dump");
  IVec lo(d), hi(d);
  for (auto& v : lo) v = get<std::int64_t>(in);
  for (auto& v : hi) v = get<std::int64_t>(in);
  const auto seed = get<std::uint64_t>(in);
  const auto replica = get<std::uint64_t>(in);
  const auto count = get<std::int64_t>(in);
  LatticeRegion region(lo, hi);
  if (count != region.edge_count()) throw Error(ErrorCode::IoError, "edge count mismatch in dump");
  std::vector<double> caps(static_cast<std::size_t>(count));
  for (auto& t : caps) t = get<double>(in);
  return Environment(std::move(region), law, seed, replica, std::move(caps));
}

Environment sample_environment(const LatticeRegion& region, const CapacityLaw& law,
                               std::uint64_t master_seed, std::uint64_t replica,
                               std::int64_t edge_budget) {
  law.check();
  if (region.edge_count() > edge_budget)
    throw Error(ErrorCode::RegionTooLarge, "region has " + std::to_string(region.edge_count()) +
                                               " edges, budget is " + std::to_string(edge_budget));
  const int d = region.dim();
  const std::uint64_t stream = replica_seed(master_seed, replica);
  std::vector<double> caps(static_cast<std::size_t>(region.edge_count()));
  IVec x;
  region.for_each_edge([&](std::int64_t e, std::int64_t u, std::int64_t, int axis) {
    region.vertex_coords(u, x);
    caps[static_cast<std::size_t>(e)] = law.quantile(edge_uniform(stream, x.data(), d, axis));
  });
  return Environment(region, law, master_seed, replica, std::move(caps));
}

}  // namespace percoflow
