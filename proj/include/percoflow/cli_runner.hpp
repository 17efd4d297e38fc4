#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "percoflow/capacity_env.hpp"
#include "percoflow/error.hpp"
#include "percoflow/flow_functionals.hpp"
#include "percoflow/geometry.hpp"

namespace percoflow {

inline constexpr const char* kSoftwareVersion = "0.1.0";
inline constexpr const char* kResultsSchema = "percoflow.results/1";
inline constexpr const char* kManifestSchema = "percoflow.manifest/1";
inline constexpr const char* kErrorSchema = "percoflow.error/1";

enum class ExperimentKind { nu, flow, converge, tail, cutset, wulff };

std::string_view to_string(ExperimentKind kind);
std::optional<ExperimentKind> parse_kind(std::string_view name);

/// One problem found in a config file. `line` is 1-based; 0 means the problem
/// concerns a missing key rather than a line.
struct ConfigIssue {
  std::string code;  // "UnknownKey", "TypeMismatch" or "ConstraintViolation"
  int line = 0;
  std::string section;
  std::string key;
  std::string message;
};

/// Thrown by parse_config with every issue found, in line order.
class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<ConfigIssue> issues);
  const std::vector<ConfigIssue>& issues() const noexcept { return issues_; }

 private:
  std::vector<ConfigIssue> issues_;
};

struct BodySpec {
  std::string type;  // box | ball | hull | halfspaces
  Vec lo, hi;
  Vec center;
  double radius = 0.0;
  std::vector<Vec> points;
  std::vector<Halfspace> halfspaces;
  int dim = 0;

  ConvexBody build() const;
};

struct ExperimentConfig {
  std::optional<ExperimentKind> kind;
  std::vector<std::int64_t> schedule;
  std::size_t replicas = 32;
  std::uint64_t master_seed = 0;
  std::string output_dir = "out";
  unsigned workers = 1;

  std::optional<BodySpec> body;
  CapacityLaw law;

  // [nu]: the estimated direction (kind nu) and how nu_hat is produced when
  // another experiment needs it for a random law.
  Vec direction;
  double h = 1.0;
  CylinderMode mode = CylinderMode::half_boundary;
  std::optional<std::int64_t> nu_n;
  std::optional<std::size_t> nu_replicas;

  std::size_t polytope_directions = 32;
  double tail_eps = 0.2;
  std::optional<double> tail_reference;
  double cutset_eps = 0.5;
  int wulff_dim = 2;
  std::size_t wulff_directions = 32;
  TruncationOptions truncation;

  std::string source_text;

  /// Dimension implied by the body, the direction or the wulff section.
  int dim() const;
  std::int64_t nu_scale() const { return nu_n.value_or(schedule.back()); }
  std::size_t nu_replica_count() const { return nu_replicas.value_or(replicas); }
};

/// Parses the key/value config format documented in docs/formats.md.
/// Every problem is collected before throwing ConfigError. When `kind` is
/// given (or the file names one) the keys that kind needs are also required.
ExperimentConfig parse_config(std::string_view text, std::optional<ExperimentKind> kind = std::nullopt);

/// Canonical text of the parsed configuration; the manifest echoes it.
nlohmann::json config_to_json(const ExperimentConfig& config);

struct RunReport {
  std::vector<std::string> artifacts;  // file names inside the output directory
};

/// Runs the experiment and writes results.csv, summary CSVs, manifest.json and
/// plot.svg to config.output_dir. Artifact bytes depend only on the config.
/// Throws Error on failure.
RunReport run(const ExperimentConfig& config, ExperimentKind kind);

/// Machine-readable error document.
nlohmann::json error_json(int exit_code, const std::exception& error);

/// Entry point of the percoflow tool: 0 on success, 1 on configuration
/// errors, 2 on runtime errors. Errors are printed as JSON on `err` and, when
/// possible, written to error.json in the output directory.
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace percoflow
