#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "percoflow/cli_runner.hpp"

namespace percoflow {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    parts.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

template <class T>
std::optional<T> parse_number(const std::string& text) {
  T value{};
  const char* first = text.data();
  const char* last = first + text.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || first == last) return std::nullopt;
  if constexpr (std::is_floating_point_v<T>)
    if (!std::isfinite(value)) return std::nullopt;
  return value;
}

template <class T>
std::optional<std::vector<T>> parse_list(const std::string& text, char sep = ',') {
  std::vector<T> out;
  if (trim(text).empty()) return out;
  for (const auto& part : split(text, sep)) {
    auto v = parse_number<T>(part);
    if (!v) return std::nullopt;
    out.push_back(*v);
  }
  return out;
}

struct Entry {
  std::string value;
  int line = 0;
};

using Section = std::map<std::string, Entry>;

// key -> expected type, used only for the TypeMismatch message
const std::map<std::string, std::map<std::string, std::string>>& schema() {
  static const std::map<std::string, std::map<std::string, std::string>> s = {
      {"experiment",
       {{"kind", "kind name"},
        {"schedule", "list of integers"},
        {"replicas", "integer"},
        {"seed", "unsigned 64-bit integer"},
        {"output", "path"},
        {"workers", "integer"}}},
      {"body",
       {{"type", "box | ball | hull | halfspaces"},
        {"lo", "list of numbers"},
        {"hi", "list of numbers"},
        {"center", "list of numbers"},
        {"radius", "number"},
        {"points", "';'-separated points"},
        {"halfspaces", "';'-separated 'normal..., offset' rows"}}},
      {"law",
       {{"type", "constant | bernoulli_scaled | uniform | exponential | finite_discrete"},
        {"value", "number"},
        {"p", "number"},
        {"a", "number"},
        {"b", "number"},
        {"rate", "number"},
        {"atoms", "comma-separated value:probability pairs"}}},
      {"nu",
       {{"direction", "list of numbers"},
        {"h", "number"},
        {"mode", "tau | phi"},
        {"n", "integer"},
        {"replicas", "integer"}}},
      {"converge", {{"polytope_directions", "integer"}}},
      {"tail", {{"eps", "number"}, {"reference", "number"}}},
      {"cutset", {{"eps", "number"}}},
      {"wulff", {{"dim", "integer"}, {"directions", "integer"}}},
      {"truncation", {{"base_radius", "number"}, {"steps", "integer"}, {"edge_budget", "integer"}}},
  };
  return s;
}

class Parser {
 public:
  std::vector<ConfigIssue> issues;

  void issue(std::string code, int line, std::string section, std::string key, std::string message) {
    issues.push_back({std::move(code), line, std::move(section), std::move(key), std::move(message)});
  }

  void read(std::string_view text) {
    std::string current = "experiment";
    bool section_known = true;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
      const auto nl = text.find('\n', pos);
      std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
      pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
      ++line_no;
      if (const auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
      const std::string line = trim(raw);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']') {
          issue("ConstraintViolation", line_no, current, "", "malformed section header '" + line + "'");
          continue;
        }
        current = trim(std::string_view(line).substr(1, line.size() - 2));
        section_known = schema().count(current) > 0;
        if (!section_known) issue("UnknownKey", line_no, current, "", "unknown section [" + current + "]");
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos) {
        issue("ConstraintViolation", line_no, current, "", "expected 'key = value', got '" + line + "'");
        continue;
      }
      const std::string key = trim(std::string_view(line).substr(0, eq));
      const std::string value = trim(std::string_view(line).substr(eq + 1));
      if (!section_known) continue;  // already reported at the header
      if (!schema().at(current).count(key)) {
        issue("UnknownKey", line_no, current, key, "unknown key '" + key + "' in [" + current + "]");
        continue;
      }
      auto& sec = sections_[current];
      if (sec.count(key)) {
        issue("ConstraintViolation", line_no, current, key,
              "duplicate key '" + key + "' (first set at line " + std::to_string(sec[key].line) + ")");
        continue;
      }
      sec[key] = {value, line_no};
    }
  }

  const Entry* find(const std::string& section, const std::string& key) const {
    const auto s = sections_.find(section);
    if (s == sections_.end()) return nullptr;
    const auto k = s->second.find(key);
    return k == s->second.end() ? nullptr : &k->second;
  }

  int line_of(const std::string& section, const std::string& key) const {
    const auto* e = find(section, key);
    return e ? e->line : 0;
  }

  void mismatch(const std::string& section, const std::string& key) {
    const auto* e = find(section, key);
    issue("TypeMismatch", e->line, section, key,
          "'" + e->value + "' is not a valid " + schema().at(section).at(key));
  }

  template <class T>
  std::optional<T> number(const std::string& section, const std::string& key) {
    const auto* e = find(section, key);
    if (!e) return std::nullopt;
    auto v = parse_number<T>(e->value);
    if (!v) mismatch(section, key);
    return v;
  }

  template <class T>
  std::optional<std::vector<T>> list(const std::string& section, const std::string& key) {
    const auto* e = find(section, key);
    if (!e) return std::nullopt;
    auto v = parse_list<T>(e->value);
    if (!v) mismatch(section, key);
    return v;
  }

  std::optional<std::string> text(const std::string& section, const std::string& key) const {
    const auto* e = find(section, key);
    if (!e) return std::nullopt;
    return e->value;
  }

  bool has_section(const std::string& section) const { return sections_.count(section) > 0; }

  void require(bool ok, const std::string& section, const std::string& key, const std::string& message) {
    if (!ok) issue("ConstraintViolation", line_of(section, key), section, key, message);
  }

 private:
  std::map<std::string, Section> sections_;
};

std::optional<CapacityLaw> read_law(Parser& p) {
  const auto type = p.text("law", "type");
  if (!type) {
    p.issue("ConstraintViolation", 0, "law", "type", "missing [law] type");
    return std::nullopt;
  }
  auto need = [&](const char* key) -> std::optional<double> {
    auto v = p.number<double>("law", key);
    if (!v && !p.find("law", key))
      p.issue("ConstraintViolation", p.line_of("law", "type"), "law", key,
              "law '" + *type + "' needs '" + key + "'");
    return v;
  };
  std::optional<CapacityLaw> law;
  if (*type == "constant") {
    if (auto c = need("value")) law = CapacityLaw::constant(*c);
  } else if (*type == "bernoulli_scaled") {
    auto prob = need("p");
    auto v = need("value");
    if (prob && v) law = CapacityLaw::bernoulli_scaled(*prob, *v);
  } else if (*type == "uniform") {
    auto a = need("a");
    auto b = need("b");
    if (a && b) law = CapacityLaw::uniform(*a, *b);
  } else if (*type == "exponential") {
    if (auto r = need("rate")) law = CapacityLaw::exponential(*r);
  } else if (*type == "finite_discrete") {
    const auto atoms_text = p.text("law", "atoms");
    if (!atoms_text) {
      p.issue("ConstraintViolation", p.line_of("law", "type"), "law", "atoms", "law 'finite_discrete' needs 'atoms'");
    } else {
      std::vector<std::pair<double, double>> atoms;
      bool ok = true;
      for (const auto& item : split(*atoms_text, ',')) {
        const auto parts = split(item, ':');
        std::optional<double> v, q;
        if (parts.size() == 2) {
          v = parse_number<double>(parts[0]);
          q = parse_number<double>(parts[1]);
        }
        if (!v || !q) {
          ok = false;
          break;
        }
        atoms.emplace_back(*v, *q);
      }
      if (!ok)
        p.mismatch("law", "atoms");
      else
        law = CapacityLaw::finite_discrete(std::move(atoms));
    }
  } else {
    p.issue("TypeMismatch", p.line_of("law", "type"), "law", "type",
            "'" + *type + "' is not a valid " + schema().at("law").at("type"));
    return std::nullopt;
  }
  if (law) {
    try {
      law->check();
    } catch (const Error& e) {
      p.issue("ConstraintViolation", p.line_of("law", "type"), "law", "type", e.what());
      return std::nullopt;
    }
  }
  return law;
}

std::optional<BodySpec> read_body(Parser& p) {
  if (!p.has_section("body")) return std::nullopt;
  const auto type = p.text("body", "type");
  if (!type) {
    p.issue("ConstraintViolation", 0, "body", "type", "missing [body] type");
    return std::nullopt;
  }
  BodySpec spec;
  spec.type = *type;
  const int line = p.line_of("body", "type");
  auto missing = [&](const char* key) {
    p.issue("ConstraintViolation", line, "body", key, "body '" + *type + "' needs '" + key + "'");
  };
  bool ok = true;
  if (*type == "box") {
    auto lo = p.list<double>("body", "lo");
    auto hi = p.list<double>("body", "hi");
    if (!p.find("body", "lo")) missing("lo");
    if (!p.find("body", "hi")) missing("hi");
    if (!lo || !hi) return std::nullopt;
    spec.lo = *lo;
    spec.hi = *hi;
    spec.dim = static_cast<int>(lo->size());
    p.require(lo->size() == hi->size(), "body", "hi", "'lo' and 'hi' must have the same length");
    for (std::size_t i = 0; i < std::min(lo->size(), hi->size()); ++i)
      if (!((*lo)[i] < (*hi)[i])) {
        p.require(false, "body", "hi", "box needs lo < hi in every coordinate");
        ok = false;
        break;
      }
    ok = ok && lo->size() == hi->size();
  } else if (*type == "ball") {
    auto c = p.list<double>("body", "center");
    auto r = p.number<double>("body", "radius");
    if (!p.find("body", "center")) missing("center");
    if (!p.find("body", "radius")) missing("radius");
    if (!c || !r) return std::nullopt;
    spec.center = *c;
    spec.radius = *r;
    spec.dim = static_cast<int>(c->size());
    if (!(*r > 0.0)) {
      p.require(false, "body", "radius", "radius must be positive");
      ok = false;
    }
  } else if (*type == "hull") {
    const auto text = p.text("body", "points");
    if (!text) {
      missing("points");
      return std::nullopt;
    }
    for (const auto& row : split(*text, ';')) {
      auto pt = parse_list<double>(row);
      if (!pt || pt->empty()) {
        p.mismatch("body", "points");
        return std::nullopt;
      }
      spec.points.push_back(*pt);
    }
    spec.dim = static_cast<int>(spec.points.front().size());
    for (const auto& pt : spec.points)
      if (static_cast<int>(pt.size()) != spec.dim) {
        p.require(false, "body", "points", "all points need the same dimension");
        return std::nullopt;
      }
  } else if (*type == "halfspaces") {
    const auto text = p.text("body", "halfspaces");
    if (!text) {
      missing("halfspaces");
      return std::nullopt;
    }
    for (const auto& row : split(*text, ';')) {
      auto coeffs = parse_list<double>(row);
      if (!coeffs || coeffs->size() < 3) {
        p.mismatch("body", "halfspaces");
        return std::nullopt;
      }
      Vec normal(coeffs->begin(), coeffs->end() - 1);
      const double scale = norm(normal);
      if (spec.dim != 0 && static_cast<int>(normal.size()) != spec.dim) {
        p.require(false, "body", "halfspaces", "all half-spaces need the same dimension");
        return std::nullopt;
      }
      spec.dim = static_cast<int>(normal.size());
      if (!(scale > 0.0)) {
        p.require(false, "body", "halfspaces", "half-space normals must be nonzero");
        return std::nullopt;
      }
      spec.halfspaces.push_back({(1.0 / scale) * normal, coeffs->back() / scale});
    }
  } else {
    p.issue("TypeMismatch", line, "body", "type", "'" + *type + "' is not a valid " + schema().at("body").at("type"));
    return std::nullopt;
  }
  if (!ok) return std::nullopt;
  if (spec.dim < 2) {
    p.require(false, "body", "type", "bodies need dimension >= 2");
    return std::nullopt;
  }
  try {
    (void)spec.build();
  } catch (const Error& e) {
    p.issue("ConstraintViolation", line, "body", "type", e.what());
    return std::nullopt;
  }
  return spec;
}

}  // namespace

std::string_view to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::nu: return "nu";
    case ExperimentKind::flow: return "flow";
    case ExperimentKind::converge: return "converge";
    case ExperimentKind::tail: return "tail";
    case ExperimentKind::cutset: return "cutset";
    case ExperimentKind::wulff: return "wulff";
  }
  return "?";
}

std::optional<ExperimentKind> parse_kind(std::string_view name) {
  for (auto k : {ExperimentKind::nu, ExperimentKind::flow, ExperimentKind::converge, ExperimentKind::tail,
                 ExperimentKind::cutset, ExperimentKind::wulff})
    if (to_string(k) == name) return k;
  return std::nullopt;
}

namespace {

std::string describe_issues(const std::vector<ConfigIssue>& issues) {
  std::ostringstream os;
  os << issues.size() << " problem(s) in config";
  for (const auto& i : issues) {
    os << "; " << i.code;
    if (i.line > 0) os << " at line " << i.line;
    os << ": " << i.message;
  }
  return os.str();
}

}  // namespace

ConfigError::ConfigError(std::vector<ConfigIssue> issues)
    : Error(ErrorCode::ConfigError, describe_issues(issues)), issues_(std::move(issues)) {}

ConvexBody BodySpec::build() const {
  if (type == "box") return ConvexBody::box(lo, hi);
  if (type == "ball") return ConvexBody::ball(center, radius);
  if (type == "hull") return ConvexBody::polytope(ConvexPolytope::hull(points));
  if (type == "halfspaces") return ConvexBody::polytope(ConvexPolytope::from_halfspaces(halfspaces, dim));
  throw Error(ErrorCode::InvalidArgument, "unknown body type '" + type + "'");
}

int ExperimentConfig::dim() const {
  if (body) return body->dim;
  if (!direction.empty()) return static_cast<int>(direction.size());
  return wulff_dim;
}

ExperimentConfig parse_config(std::string_view text, std::optional<ExperimentKind> kind) {
  Parser p;
  p.read(text);
  ExperimentConfig c;
  c.source_text = std::string(text);

  if (auto k = p.text("experiment", "kind")) {
    c.kind = parse_kind(*k);
    if (!c.kind)
      p.mismatch("experiment", "kind");
    else if (kind && *kind != *c.kind)
      p.require(false, "experiment", "kind",
                "config is for '" + *k + "' but '" + std::string(to_string(*kind)) + "' was requested");
  }
  if (kind) c.kind = kind;

  if (auto s = p.list<std::int64_t>("experiment", "schedule")) {
    c.schedule = *s;
    p.require(!s->empty(), "experiment", "schedule", "n schedule must not be empty");
    bool increasing = true;
    for (std::size_t i = 1; i < s->size(); ++i) increasing = increasing && (*s)[i] > (*s)[i - 1];
    p.require(increasing, "experiment", "schedule", "n schedule must be strictly increasing");
    p.require(s->empty() || s->front() >= 1, "experiment", "schedule", "scales must be >= 1");
  } else if (!p.find("experiment", "schedule")) {
    p.issue("ConstraintViolation", 0, "experiment", "schedule", "missing [experiment] schedule");
  }
  if (auto r = p.number<std::int64_t>("experiment", "replicas")) {
    p.require(*r >= 1, "experiment", "replicas", "replicas must be >= 1");
    c.replicas = static_cast<std::size_t>(std::max<std::int64_t>(*r, 1));
  }
  if (auto s = p.number<std::uint64_t>("experiment", "seed")) c.master_seed = *s;
  if (auto o = p.text("experiment", "output")) {
    p.require(!o->empty(), "experiment", "output", "output directory must not be empty");
    c.output_dir = *o;
  }
  if (auto w = p.number<std::int64_t>("experiment", "workers")) {
    p.require(*w >= 1, "experiment", "workers", "workers must be >= 1");
    c.workers = static_cast<unsigned>(std::clamp<std::int64_t>(*w, 1, 1024));
  }

  if (auto law = read_law(p)) c.law = *law;
  c.body = read_body(p);

  if (auto v = p.list<double>("nu", "direction")) {
    c.direction = *v;
    p.require(v->size() >= 2, "nu", "direction", "direction needs at least two coordinates");
    p.require(norm(*v) > 0.0, "nu", "direction", "direction must be nonzero");
  }
  if (auto h = p.number<double>("nu", "h")) {
    p.require(*h > 0.0, "nu", "h", "h must be positive");
    c.h = *h;
  }
  if (auto m = p.text("nu", "mode")) {
    if (*m == "tau")
      c.mode = CylinderMode::half_boundary;
    else if (*m == "phi")
      c.mode = CylinderMode::top_bottom;
    else
      p.mismatch("nu", "mode");
  }
  if (auto n = p.number<std::int64_t>("nu", "n")) {
    p.require(*n >= 1, "nu", "n", "n must be >= 1");
    c.nu_n = *n;
  }
  if (auto r = p.number<std::int64_t>("nu", "replicas")) {
    p.require(*r >= 1, "nu", "replicas", "replicas must be >= 1");
    c.nu_replicas = static_cast<std::size_t>(std::max<std::int64_t>(*r, 1));
  }
  if (auto m = p.number<std::int64_t>("converge", "polytope_directions")) {
    p.require(*m >= 3, "converge", "polytope_directions", "need at least 3 directions");
    c.polytope_directions = static_cast<std::size_t>(std::max<std::int64_t>(*m, 3));
  }
  if (auto e = p.number<double>("tail", "eps")) {
    p.require(*e > 0.0, "tail", "eps", "eps must be positive");
    c.tail_eps = *e;
  }
  if (auto r = p.number<double>("tail", "reference")) {
    p.require(*r > 0.0, "tail", "reference", "reference must be positive");
    c.tail_reference = *r;
  }
  if (auto e = p.number<double>("cutset", "eps")) {
    p.require(*e > 0.0, "cutset", "eps", "eps must be positive");
    c.cutset_eps = *e;
  }
  if (auto d = p.number<std::int64_t>("wulff", "dim")) {
    p.require(*d == 2 || *d == 3, "wulff", "dim", "wulff crystals are computed for d in {2, 3}");
    c.wulff_dim = static_cast<int>(*d);
  }
  if (auto m = p.number<std::int64_t>("wulff", "directions")) {
    p.require(*m >= 4, "wulff", "directions", "need at least 4 directions");
    c.wulff_directions = static_cast<std::size_t>(std::max<std::int64_t>(*m, 4));
  }
  if (auto r = p.number<double>("truncation", "base_radius")) {
    p.require(*r > 0.0, "truncation", "base_radius", "base_radius must be positive");
    c.truncation.base_radius = *r;
  }
  if (auto s = p.number<std::int64_t>("truncation", "steps")) {
    p.require(*s >= 2 && *s <= 20, "truncation", "steps", "steps must lie in [2, 20]");
    c.truncation.steps = static_cast<int>(*s);
  }
  if (auto b = p.number<std::int64_t>("truncation", "edge_budget")) {
    p.require(*b >= 1, "truncation", "edge_budget", "edge_budget must be positive");
    c.truncation.edge_budget = *b;
  }

  if (c.body && !c.direction.empty())
    p.require(static_cast<int>(c.direction.size()) == c.body->dim, "nu", "direction",
              "direction and body have different dimensions");

  if (c.kind) {
    switch (*c.kind) {
      case ExperimentKind::nu:
        if (!p.find("nu", "direction"))
          p.issue("ConstraintViolation", 0, "nu", "direction", "kind 'nu' needs [nu] direction");
        break;
      case ExperimentKind::wulff:
        if (c.body) p.require(c.body->dim == c.wulff_dim, "wulff", "dim", "wulff dim differs from the body");
        break;
      default:
        if (!p.has_section("body"))
          p.issue("ConstraintViolation", 0, "body", "type",
                  "kind '" + std::string(to_string(*c.kind)) + "' needs a [body] section");
        break;
    }
  }

  if (!p.issues.empty()) {
    std::stable_sort(p.issues.begin(), p.issues.end(), [](const ConfigIssue& a, const ConfigIssue& b) {
      return a.line < b.line;
    });
    throw ConfigError(std::move(p.issues));
  }
  return c;
}

nlohmann::json config_to_json(const ExperimentConfig& c) {
  nlohmann::json j;
  if (c.kind) j["kind"] = std::string(to_string(*c.kind));
  j["schedule"] = c.schedule;
  j["replicas"] = c.replicas;
  j["master_seed"] = c.master_seed;
  j["law"] = c.law.describe();
  if (c.body) {
    nlohmann::json b{{"type", c.body->type}, {"dim", c.body->dim}};
    if (c.body->type == "box") {
      b["lo"] = c.body->lo;
      b["hi"] = c.body->hi;
    } else if (c.body->type == "ball") {
      b["center"] = c.body->center;
      b["radius"] = c.body->radius;
    } else if (c.body->type == "hull") {
      b["points"] = c.body->points;
    } else {
      auto rows = nlohmann::json::array();
      for (const auto& hs : c.body->halfspaces) rows.push_back({{"normal", hs.normal}, {"offset", hs.offset}});
      b["halfspaces"] = rows;
    }
    j["body"] = b;
  }
  j["nu"] = {{"direction", c.direction},
             {"h", c.h},
             {"mode", c.mode == CylinderMode::half_boundary ? "tau" : "phi"},
             {"n", c.schedule.empty() ? 0 : c.nu_scale()},
             {"replicas", c.nu_replica_count()}};
  j["converge"] = {{"polytope_directions", c.polytope_directions}};
  j["tail"] = {{"eps", c.tail_eps}};
  if (c.tail_reference) j["tail"]["reference"] = *c.tail_reference;
  j["cutset"] = {{"eps", c.cutset_eps}};
  j["wulff"] = {{"dim", c.wulff_dim}, {"directions", c.wulff_directions}};
  j["truncation"] = {{"steps", c.truncation.steps}, {"edge_budget", c.truncation.edge_budget}};
  if (c.truncation.base_radius) j["truncation"]["base_radius"] = *c.truncation.base_radius;
  return j;
}

}  // namespace percoflow
