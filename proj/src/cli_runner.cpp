#include "percoflow/cli_runner.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "percoflow/estimators.hpp"

namespace percoflow {

namespace fs = std::filesystem;

namespace {

// Shortest round-trip text of a double; identical on every run.
std::string num(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, end);
}

std::string label(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

double scale_power(std::int64_t n, int d) { return std::pow(static_cast<double>(n), d - 1); }

struct Row {
  std::string quantity;
  std::int64_t n = 0;
  std::size_t replica = 0;
  std::uint64_t seed = 0;
  double value = 0.0;
  double normalized = 0.0;
};

class Artifacts {
 public:
  explicit Artifacts(fs::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw Error(ErrorCode::IoError, "cannot create output directory '" + dir_.string() + "': " + ec.message());
  }

  void write(const std::string& name, const std::string& content) {
    const auto path = dir_ / name;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (out) out << content;
    if (out) out.flush();
    if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path.string() + "'");
    names_.push_back(name);
  }

  const std::vector<std::string>& names() const { return names_; }

 private:
  fs::path dir_;
  std::vector<std::string> names_;
};

std::string rows_csv(const std::vector<Row>& rows) {
  std::ostringstream os;
  os << "quantity,n,replica,seed,value,normalized_value\n";
  for (const auto& r : rows)
    os << r.quantity << ',' << r.n << ',' << r.replica << ',' << r.seed << ',' << num(r.value) << ','
       << num(r.normalized) << '\n';
  return os.str();
}

// ---------------------------------------------------------------------------
// nu_hat for experiments that need a surface energy
// ---------------------------------------------------------------------------

// Lattice symmetries (coordinate permutations and sign flips) map every
// direction to one with sorted nonnegative coordinates.
Vec canonical_direction(const Vec& v) {
  Vec c = normalized(v);
  for (double& x : c) x = std::abs(x);
  std::sort(c.begin(), c.end(), std::greater<>());
  return c;
}

std::uint64_t direction_seed(std::uint64_t master_seed, const Vec& canonical) {
  std::uint64_t s = mix64(master_seed ^ 0x6e75'0000'0000'0000ULL);
  for (double x : canonical) s = mix64(s ^ static_cast<std::uint64_t>(std::llround(x * 1e9)));
  return s;
}

class NuTable {
 public:
  explicit NuTable(const ExperimentConfig& c) : config_(c) {}

  double operator()(const Vec& v) { return lookup(v).summary.mean; }

  const EstimateRecord& lookup(const Vec& v) {
    const Vec key = canonical_direction(v);
    std::vector<long long> rounded;
    for (double x : key) rounded.push_back(std::llround(x * 1e9));
    if (auto it = index_.find(rounded); it != index_.end()) return records_[it->second];
    EstimateRecord r;
    if (const auto* k = std::get_if<ConstantLaw>(&config_.law.variant())) {
      r = exact_estimate(key, constant_law_nu(k->value, key));
    } else {
      r = estimate_nu(key, config_.nu_scale(), config_.h, config_.law, config_.nu_replica_count(),
                      direction_seed(config_.master_seed, key), config_.workers, config_.mode);
    }
    index_[rounded] = records_.size();
    records_.push_back(std::move(r));
    return records_.back();
  }

  const std::vector<EstimateRecord>& records() const { return records_; }

  std::vector<Row> rows() const {
    std::vector<Row> out;
    const int d = config_.dim();
    for (std::size_t k = 0; k < records_.size(); ++k) {
      const auto& r = records_[k];
      if (r.seeds.empty()) continue;  // exact values have no replicas
      const double scale = scale_power(r.n, d);
      for (std::size_t i = 0; i < r.values.size(); ++i)
        out.push_back({r.quantity + "#" + std::to_string(k), r.n, i, r.seeds[i], r.values[i] * scale, r.values[i]});
    }
    return out;
  }

  nlohmann::json to_json() const {
    auto a = nlohmann::json::array();
    for (std::size_t k = 0; k < records_.size(); ++k) {
      auto j = percoflow::to_json(records_[k]);
      j["index"] = k;
      a.push_back(j);
    }
    return a;
  }

 private:
  const ExperimentConfig& config_;
  std::map<std::vector<long long>, std::size_t> index_;
  std::vector<EstimateRecord> records_;
};

// ---------------------------------------------------------------------------
// SVG rendering of tables already computed
// ---------------------------------------------------------------------------

struct PlotPoint {
  double x, y, err;
};

std::string series_svg(const std::string& title, const std::string& ylabel, const std::vector<PlotPoint>& pts,
                       std::optional<double> reference) {
  const double W = 640, H = 400, L = 70, R = 20, T = 40, B = 50;
  double ylo = std::numeric_limits<double>::infinity(), yhi = -ylo;
  double xlo = ylo, xhi = -ylo;
  for (const auto& p : pts) {
    ylo = std::min(ylo, p.y - p.err);
    yhi = std::max(yhi, p.y + p.err);
    xlo = std::min(xlo, std::log2(p.x));
    xhi = std::max(xhi, std::log2(p.x));
  }
  if (reference && std::isfinite(*reference)) {
    ylo = std::min(ylo, *reference);
    yhi = std::max(yhi, *reference);
  }
  if (pts.empty()) xlo = 0, xhi = 1, ylo = 0, yhi = 1;
  if (yhi - ylo < 1e-12) ylo -= 0.5, yhi += 0.5;
  const double pad = 0.08 * (yhi - ylo);
  ylo -= pad;
  yhi += pad;
  if (xhi - xlo < 1e-12) xlo -= 0.5, xhi += 0.5;
  auto sx = [&](double x) { return L + (std::log2(x) - xlo) / (xhi - xlo) * (W - L - R); };
  auto sy = [&](double y) { return H - B - (y - ylo) / (yhi - ylo) * (H - T - B); };
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 "
     << W << ' ' << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">" << title << "</text>\n";
  os << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
     << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  os << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">n (log scale)</text>\n";
  os << "<text x=\"16\" y=\"" << (T + H - B) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
     << (T + H - B) / 2 << ")\">" << ylabel << "</text>\n";
  for (int k = 0; k <= 4; ++k) {
    const double y = ylo + (yhi - ylo) * k / 4.0;
    os << "<text x=\"" << L - 6 << "\" y=\"" << sy(y) + 4 << "\" text-anchor=\"end\">" << label(y) << "</text>\n";
  }
  if (reference && std::isfinite(*reference))
    os << "<line x1=\"" << L << "\" y1=\"" << sy(*reference) << "\" x2=\"" << W - R << "\" y2=\"" << sy(*reference)
       << "\" stroke=\"gray\" stroke-dasharray=\"6 4\"/>\n";
  for (const auto& p : pts) {
    const double x = sx(p.x);
    os << "<text x=\"" << x << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\">" << label(p.x) << "</text>\n";
    if (p.err > 0)
      os << "<line x1=\"" << x << "\" y1=\"" << sy(p.y - p.err) << "\" x2=\"" << x << "\" y2=\"" << sy(p.y + p.err)
         << "\" stroke=\"steelblue\"/>\n";
    os << "<circle cx=\"" << x << "\" cy=\"" << sy(p.y) << "\" r=\"4\" fill=\"steelblue\"/>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::string polygon_svg(const std::string& title, const std::vector<Vec>& vertices) {
  const double W = 480, M = 40;
  double r = 1e-12;
  for (const auto& v : vertices) r = std::max({r, std::abs(v[0]), std::abs(v[1])});
  auto s = [&](double x) { return W / 2 + x / r * (W / 2 - M); };
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << W + 30 << "\" viewBox=\"0 0 "
     << W << ' ' << W + 30 << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << title << "</text>\n";
  os << "<g transform=\"translate(0 30)\">\n";
  os << "<line x1=\"" << M << "\" y1=\"" << W / 2 << "\" x2=\"" << W - M << "\" y2=\"" << W / 2
     << "\" stroke=\"#ccc\"/>\n";
  os << "<line x1=\"" << W / 2 << "\" y1=\"" << M << "\" x2=\"" << W / 2 << "\" y2=\"" << W - M
     << "\" stroke=\"#ccc\"/>\n";
  os << "<polygon fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\" points=\"";
  for (const auto& v : vertices) os << s(v[0]) << ',' << W - s(v[1]) << ' ';
  os << "\"/>\n</g>\n</svg>\n";
  return os.str();
}

std::vector<Vec> polygon_order(std::vector<Vec> pts) {
  std::sort(pts.begin(), pts.end(), [](const Vec& a, const Vec& b) {
    return std::atan2(a[1], a[0]) < std::atan2(b[1], b[0]);
  });
  return pts;
}

std::string summary_csv_header() { return "quantity,n,replicas,mean,sd,se,min,max\n"; }

std::string summary_line(const std::string& quantity, std::int64_t n, std::size_t count, const Summary& s) {
  std::ostringstream os;
  os << quantity << ',' << n << ',' << count << ',' << num(s.mean) << ',' << num(s.sd) << ',' << num(s.se) << ','
     << num(s.min) << ',' << num(s.max) << '\n';
  return os.str();
}

void append_flow_rows(std::vector<Row>& rows, const FlowSample& s) {
  for (std::size_t k = 0; k < s.values.size(); ++k)
    rows.push_back({"phi_inf", s.n, k, s.seeds[k], s.values[k], s.normalized[k]});
}

std::string seed_scheme() {
  return "stream(k) = mix64(mix64(master_seed) ^ k) for replica k, shared by every n; "
         "edge {x, x+e_a}: h = stream(k), h = mix64(h ^ x_i) for each coordinate i, h = mix64(h ^ a), "
         "u = (h >> 11) * 2^-53, t(e) = G^-1(u); mix64 is the SplitMix64 finaliser. "
         "nu_hat(v) uses master seed s = mix64(master_seed ^ 0x6e75000000000000), then "
         "s = mix64(s ^ round(1e9 c_i)) over the coordinates c_i of v sorted by decreasing absolute value";
}

}  // namespace

RunReport run(const ExperimentConfig& config, ExperimentKind kind) {
  if (config.schedule.empty()) throw Error(ErrorCode::ConfigError, "empty n schedule");
  config.law.check();
  const int d = config.dim();
  if (kind != ExperimentKind::nu && kind != ExperimentKind::wulff && !config.body)
    throw Error(ErrorCode::ConfigError, "experiment needs a body");
  if (kind == ExperimentKind::nu && config.direction.empty())
    throw Error(ErrorCode::ConfigError, "experiment needs a direction");
  Artifacts out(config.output_dir);

  nlohmann::json manifest;
  manifest["schema"] = kManifestSchema;
  manifest["software_version"] = kSoftwareVersion;
  manifest["kind"] = std::string(to_string(kind));
  manifest["config"] = config_to_json(config);
  manifest["config_text"] = config.source_text;
  manifest["csv_schema"] = kResultsSchema;
  manifest["csv_columns"] = {"quantity", "n", "replica", "seed", "value", "normalized_value"};
  manifest["seed_scheme"] = seed_scheme();
  manifest["master_seed"] = config.master_seed;
  {
    auto seeds = nlohmann::json::array();
    for (std::size_t k = 0; k < config.replicas; ++k) seeds.push_back(replica_seed(config.master_seed, k));
    manifest["replica_seeds"] = seeds;
  }
  const auto report = validate_law(config.law, d);
  nlohmann::json constants{{"dimension", d},
                           {"zero_atom", report.zero_atom},
                           {"subcritical_zeros", report.subcritical_zeros},
                           {"exp_moment", report.exp_moment},
                           {"exp_moment_note", report.exp_moment_note},
                           {"warnings", report.warnings}};
  if (report.pc) constants["p_c"] = *report.pc;

  std::vector<Row> rows;
  NuTable nu(config);
  std::vector<PlotPoint> plot;
  std::optional<double> plot_ref;
  std::string plot_title, plot_ylabel, svg;

  switch (kind) {
    case ExperimentKind::nu: {
      std::string summary = summary_csv_header();
      auto estimates = nlohmann::json::array();
      for (auto n : config.schedule) {
        const auto r = estimate_nu(config.direction, n, config.h, config.law, config.replicas, config.master_seed,
                                   config.workers, config.mode);
        const double scale = scale_power(n, d);
        for (std::size_t k = 0; k < r.values.size(); ++k)
          rows.push_back({r.quantity, n, k, r.seeds[k], r.values[k] * scale, r.values[k]});
        summary += summary_line(r.quantity, n, r.values.size(), r.summary);
        plot.push_back({static_cast<double>(n), r.summary.mean, r.summary.se});
        estimates.push_back(to_json(r));
        plot_ylabel = r.quantity;
      }
      out.write("summary.csv", summary);
      manifest["estimates"] = estimates;
      plot_title = "flow constant estimate";
      break;
    }
    case ExperimentKind::flow: {
      const auto body = config.body->build();
      std::string summary = summary_csv_header();
      for (auto n : config.schedule) {
        const auto s = sample_flows(body, n, config.law, config.replicas, config.master_seed, config.workers,
                                    config.truncation);
        append_flow_rows(rows, s);
        const auto sum = summarize(s.normalized);
        summary += summary_line("phi_inf", n, s.normalized.size(), sum);
        plot.push_back({static_cast<double>(n), sum.mean, sum.se});
      }
      out.write("summary.csv", summary);
      plot_title = "flow to infinity";
      plot_ylabel = "phi_inf / n^(d-1)";
      break;
    }
    case ExperimentKind::converge: {
      const auto body = config.body->build();
      ConvergenceOptions options;
      options.polytope_directions = config.polytope_directions;
      options.workers = config.workers;
      options.truncation = config.truncation;
      const auto table = convergence_experiment(body, config.law, config.schedule, config.replicas,
                                                config.master_seed, std::ref(nu), options);
      std::ostringstream csv;
      csv << "n,replicas,mean,sd,se,spread,i_outer,i_inner,i_reference,gap\n";
      for (const auto& row : table) {
        append_flow_rows(rows, row.sample);
        csv << row.n << ',' << row.sample.normalized.size() << ',' << num(row.summary.mean) << ','
            << num(row.summary.sd) << ',' << num(row.summary.se) << ',' << num(row.spread) << ','
            << num(row.i_outer) << ',' << num(row.i_inner) << ',' << num(row.i_reference) << ',' << num(row.gap)
            << '\n';
        plot.push_back({static_cast<double>(row.n), row.summary.mean, row.summary.se});
        plot_ref = row.i_reference;
      }
      out.write("converge.csv", csv.str());
      plot_title = "convergence towards the surface energy";
      plot_ylabel = "phi_inf / n^(d-1)";
      break;
    }
    case ExperimentKind::tail: {
      const auto body = config.body->build();
      std::vector<FlowSample> samples;
      for (auto n : config.schedule) {
        samples.push_back(sample_flows(body, n, config.law, config.replicas, config.master_seed, config.workers,
                                       config.truncation));
        append_flow_rows(rows, samples.back());
      }
      const double reference = config.tail_reference
                                   ? *config.tail_reference
                                   : reference_energy(body, std::ref(nu), config.polytope_directions);
      manifest["tail_reference"] = reference;
      const auto table = deviation_tail(samples, d, config.tail_eps, reference);
      std::ostringstream csv;
      csv << "n,exceed,replicas,frequency,log_rate\n";
      for (const auto& row : table) {
        csv << row.n << ',' << row.exceed << ',' << row.replicas << ',' << num(row.frequency) << ','
            << num(row.log_rate) << '\n';
        plot.push_back({static_cast<double>(row.n), row.frequency, 0.0});
      }
      out.write("tail.csv", csv.str());
      plot_title = "deviation frequency, eps = " + label(config.tail_eps);
      plot_ylabel = "frequency";
      break;
    }
    case ExperimentKind::cutset: {
      const auto body = config.body->build();
      std::ostringstream per, beta, hist;
      per << "n,replica,seed,size,capacity,boundary_capacity,n_plus,n_minus,n_zero\n";
      beta << "n,beta,frequency\n";
      hist << "n,bin_start,bin_width,count\n";
      for (auto n : config.schedule) {
        const auto s = sample_flows(body, n, config.law, config.replicas, config.master_seed, config.workers,
                                    config.truncation);
        append_flow_rows(rows, s);
        const auto stats = cutset_statistics(body, config.law, s, config.cutset_eps);
        const double scale = scale_power(n, d);
        std::vector<double> sizes;
        for (std::size_t k = 0; k < stats.records.size(); ++k) {
          const auto& r = stats.records[k];
          rows.push_back({"cutset_size", n, k, r.seed, static_cast<double>(r.size), r.size / scale});
          sizes.push_back(r.size / scale);
          per << n << ',' << k << ',' << r.seed << ',' << r.size << ',' << num(r.capacity) << ','
              << num(r.boundary_capacity) << ',' << r.classes.plus << ',' << r.classes.minus << ','
              << r.classes.zero << '\n';
        }
        for (std::size_t b = 0; b < stats.betas.size(); ++b)
          beta << n << ',' << num(stats.betas[b]) << ',' << num(stats.beta_frequency[b]) << '\n';
        for (const auto& [start, count] : stats.histogram)
          hist << n << ',' << num(start) << ',' << num(stats.bin_width) << ',' << count << '\n';
        const auto sum = summarize(sizes);
        plot.push_back({static_cast<double>(n), sum.mean, sum.se});
      }
      out.write("cutset.csv", per.str());
      out.write("cutset_beta.csv", beta.str());
      out.write("cutset_hist.csv", hist.str());
      plot_title = "minimal cutset size, eps = " + label(config.cutset_eps);
      plot_ylabel = "|E| / n^(d-1)";
      break;
    }
    case ExperimentKind::wulff: {
      const auto dirs = direction_set(config.wulff_dim, config.wulff_directions);
      std::ostringstream nus;
      nus << "index";
      for (int k = 0; k < config.wulff_dim; ++k) nus << ",v" << k;
      nus << ",nu,se\n";
      for (std::size_t i = 0; i < dirs.size(); ++i) {
        const auto& r = nu.lookup(dirs[i]);
        nus << i;
        for (double x : dirs[i]) nus << ',' << num(x);
        nus << ',' << num(r.summary.mean) << ',' << num(r.summary.se) << '\n';
      }
      const auto crystal = wulff_crystal(std::ref(nu), dirs);
      std::ostringstream verts;
      for (int k = 0; k < config.wulff_dim; ++k) verts << (k ? ",x" : "x") << k;
      verts << '\n';
      auto ordered = config.wulff_dim == 2 ? polygon_order(crystal.vertices()) : crystal.vertices();
      for (const auto& v : ordered) {
        for (std::size_t k = 0; k < v.size(); ++k) verts << (k ? "," : "") << num(v[k]);
        verts << '\n';
      }
      out.write("wulff_nu.csv", nus.str());
      out.write("wulff_vertices.csv", verts.str());
      manifest["wulff"] = {{"volume", crystal.volume()}, {"surface_area", crystal.surface_area()}};
      if (config.wulff_dim == 2) svg = polygon_svg("Wulff crystal", ordered);
      plot_title = "flow constant by direction";
      break;
    }
  }

  // Per-replica nu_hat values behind any surface energy go to results.csv
  // for wulff and to nu_estimates.csv otherwise.
  const auto nu_rows = nu.rows();
  if (kind == ExperimentKind::wulff)
    rows = nu_rows;
  else if (!nu_rows.empty())
    out.write("nu_estimates.csv", rows_csv(nu_rows));
  constants["nu"] = nu.to_json();
  manifest["constants"] = constants;

  out.write("results.csv", rows_csv(rows));
  if (svg.empty()) {
    if (kind == ExperimentKind::wulff)
      for (std::size_t k = 0; k < nu.records().size(); ++k)
        plot.push_back({std::exp2(static_cast<double>(k)), nu.records()[k].summary.mean, nu.records()[k].summary.se});
    svg = series_svg(plot_title, plot_ylabel, plot, plot_ref);
  }
  out.write("plot.svg", svg);

  auto names = out.names();
  names.push_back("manifest.json");
  manifest["artifacts"] = names;
  out.write("manifest.json", manifest.dump(2) + "\n");
  return RunReport{out.names()};
}

nlohmann::json error_json(int exit_code, const std::exception& error) {
  nlohmann::json j{{"schema", kErrorSchema}, {"exit_code", exit_code}, {"message", error.what()}};
  if (const auto* e = dynamic_cast<const Error*>(&error)) j["code"] = std::string(to_string(e->code()));
  else j["code"] = "Internal";
  if (const auto* c = dynamic_cast<const ConfigError*>(&error)) {
    auto issues = nlohmann::json::array();
    for (const auto& i : c->issues())
      issues.push_back({{"code", i.code}, {"line", i.line}, {"section", i.section}, {"key", i.key},
                        {"message", i.message}});
    j["issues"] = issues;
  }
  return j;
}

namespace {

std::optional<std::uint64_t> env_number(const char* name) {
  const char* v = std::getenv(name);
  if (!v) return std::nullopt;
  std::uint64_t out = 0;
  const std::string s = v;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
    throw ConfigError({{"TypeMismatch", 0, "environment", name, std::string(name) + "='" + s + "' is not an integer"}});
  return out;
}

void report_error(std::ostream& err, int code, const std::exception& e, const std::optional<std::string>& dir) {
  const auto j = error_json(code, e);
  err << j.dump() << '\n';
  if (!dir) return;
  std::error_code ec;
  fs::create_directories(*dir, ec);
  std::ofstream f(fs::path(*dir) / "error.json", std::ios::binary | std::ios::trunc);
  if (f) f << j.dump(2) << '\n';
}

}  // namespace

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Maximal flows in first passage percolation"};
  std::string kind_name, config_path, out_dir;
  std::optional<unsigned> workers;
  app.add_option("kind", kind_name, "nu | flow | converge | tail | cutset | wulff")->required();
  app.add_option("--config", config_path, "experiment config file")->required();
  app.add_option("--workers", workers, "worker threads (overrides PERCOFLOW_WORKERS and the config)");
  app.add_option("--out", out_dir, "output directory (overrides the config)");
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    report_error(err, 1, Error(ErrorCode::ConfigError, e.what()), std::nullopt);
    return 1;
  }

  std::optional<std::string> dir = out_dir.empty() ? std::nullopt : std::optional(out_dir);
  ExperimentConfig config;
  ExperimentKind kind{};
  try {
    const auto k = parse_kind(kind_name);
    if (!k) throw ConfigError({{"ConstraintViolation", 0, "cli", "kind", "unknown experiment kind '" + kind_name + "'"}});
    kind = *k;
    std::ifstream in(config_path, std::ios::binary);
    if (!in) throw Error(ErrorCode::ConfigError, "cannot read config file '" + config_path + "'");
    std::ostringstream text;
    text << in.rdbuf();
    config = parse_config(text.str(), kind);
    if (auto s = env_number("PERCOFLOW_SEED")) config.master_seed = *s;
    if (auto w = env_number("PERCOFLOW_WORKERS")) config.workers = static_cast<unsigned>(std::clamp<std::uint64_t>(*w, 1, 1024));
    if (workers) config.workers = std::max(1u, *workers);
    if (dir) config.output_dir = *dir;
    dir = config.output_dir;
  } catch (const std::exception& e) {
    report_error(err, 1, e, dir);
    return 1;
  }

  try {
    for (const auto& w : validate_law(config.law, config.dim()).warnings) err << "warning: " << w << '\n';
    const auto report = run(config, kind);
    out << "wrote";
    for (const auto& a : report.artifacts) out << ' ' << a;
    out << " to " << config.output_dir << '\n';
    return 0;
  } catch (const std::exception& e) {
    report_error(err, 2, e, dir);
    return 2;
  }
}

}  // namespace percoflow
