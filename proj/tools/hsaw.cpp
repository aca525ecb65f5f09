// hsaw: command-line driver for the hyperbolic self-avoiding walk library.
//
// Configuration precedence: command-line flags > --config JSON > defaults.
// Every run writes its data files and then, last and atomically, manifest.json.
// Errors go to stderr as {"error": {"kind": ..., "message": ...}}.

#include <CLI11.hpp>
#include <openssl/evp.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "hsaw/hsaw.hpp"

namespace fs = std::filesystem;
using namespace hsaw;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_internal = 1;
constexpr int exit_config = 2;
constexpr int exit_feasibility = 3;
constexpr int exit_verification = 4;

const std::vector<std::string> all_suites = {"delta", "two_geodesics", "hull_density", "near_geodesic",
                                             "rescaling"};

/// Verification suite knobs; keys of the "verify" config object.
struct VerifySettings {
  std::vector<std::string> suites = all_suites;
  double delta = default_delta;
  std::int64_t triangles = 10'000;
  double radius_cap = 20.0;
  std::int64_t trials = 1'000;
  double separation = 3.0;
  double half_length = 50.0;
  int hull_n = 50;
  std::int64_t hull_samples = 100;
  int near_n = 100;
  std::int64_t near_samples = 1'000;
  double near_C = 2.0;
  int rescaling_n = 5;
};

/// Fully resolved run configuration.
struct RunConfig {
  SawParams params;
  bool seed_given = false;
  std::int64_t samples = 1'000;
  std::vector<int> n_values;
  EpsRule eps_rule = EpsRule::constant(1.0);
  bool eps_rule_given = false;
  Normalization normalization = Normalization::raw;
  VerifySettings verify;
  std::string checkpoint;
};

/// Raw flag values; unset optionals leave config/defaults in place.
struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  unsigned jobs = default_jobs();
  std::string out = "hsaw_out";
  std::optional<std::int64_t> samples;
  bool quiet = false;
  std::optional<int> d;
  std::optional<double> c;
  std::optional<int> n;
  std::optional<double> eps;
  std::optional<std::int64_t> rejection_cap;
  std::optional<std::string> sampler;
  std::vector<int> n_values;
  std::optional<std::string> eps_rule;
  std::optional<double> beta0;
  std::optional<std::string> normalization;
  std::vector<std::string> suites;
  std::string checkpoint;
};

int exit_code_for(ErrorKind k) {
  switch (k) {
    case ErrorKind::usage:
    case ErrorKind::config: return exit_config;
    case ErrorKind::feasibility: return exit_feasibility;
    case ErrorKind::verification: return exit_verification;
    default: return exit_internal;
  }
}

void report_error(const std::string& kind, const std::string& message, const json& extra = json::object()) {
  json e{{"kind", kind}, {"message", message}};
  for (const auto& [k, v] : extra.items()) e[k] = v;
  std::cerr << json{{"error", e}}.dump() << std::endl;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json parse_json_file(const fs::path& p) {
  try {
    return json::parse(read_file(p));
  } catch (const json::parse_error& e) {
    throw ConfigError("invalid JSON in " + p.string() + ": " + e.what());
  }
}

/// Writes via a temporary file and rename so readers never see partial files.
void write_atomic(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::io, "cannot write " + tmp.string());
    out << content;
    if (!out.flush()) throw Error(ErrorKind::io, "write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

/// Git blob object id: SHA-1 over "blob <size>\0<content>".
std::string git_blob_sha1(const std::string& content) {
  const std::string header = "blob " + std::to_string(content.size()) + '\0';
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr);
  EVP_DigestUpdate(ctx, header.data(), header.size());
  EVP_DigestUpdate(ctx, content.data(), content.size());
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return hex.str();
}

EpsRule parse_eps_rule(const std::string& kind, double value_eps, double beta0) {
  if (kind == "const") return EpsRule::constant(value_eps);
  if (kind == "inverse") return EpsRule::inverse();
  if (kind == "power") return EpsRule::power(beta0);
  throw ConfigError("eps_rule must be const, inverse or power, got '" + kind + "'");
}

Normalization parse_normalization(const std::string& s) {
  if (s == "raw") return Normalization::raw;
  if (s == "rescaled") return Normalization::rescaled;
  throw ConfigError("normalization must be raw or rescaled, got '" + s + "'");
}

json eps_rule_json(const EpsRule& r) {
  json j{{"kind", to_string(r.kind)}};
  if (r.kind == EpsRule::Kind::constant) j["eps"] = r.value;
  if (r.kind == EpsRule::Kind::power) j["beta0"] = r.value;
  return j;
}

void merge_verify(const json& j, VerifySettings& v) {
  detail::reject_unknown(j,
                         {"suites", "delta", "triangles", "radius_cap", "trials", "separation", "half_length",
                          "hull_n", "hull_samples", "near_n", "near_samples", "near_C", "rescaling_n"},
                         "verify");
  auto take = [&](const char* key, auto& field) {
    if (j.contains(key)) field = detail::get_as<std::decay_t<decltype(field)>>(j, key, "verify");
  };
  take("suites", v.suites);
  take("delta", v.delta);
  take("triangles", v.triangles);
  take("radius_cap", v.radius_cap);
  take("trials", v.trials);
  take("separation", v.separation);
  take("half_length", v.half_length);
  take("hull_n", v.hull_n);
  take("hull_samples", v.hull_samples);
  take("near_n", v.near_n);
  take("near_samples", v.near_samples);
  take("near_C", v.near_C);
  take("rescaling_n", v.rescaling_n);
}

json verify_json(const VerifySettings& v) {
  return json{{"suites", v.suites},         {"delta", v.delta},
              {"triangles", v.triangles},   {"radius_cap", v.radius_cap},
              {"trials", v.trials},         {"separation", v.separation},
              {"half_length", v.half_length}, {"hull_n", v.hull_n},
              {"hull_samples", v.hull_samples}, {"near_n", v.near_n},
              {"near_samples", v.near_samples}, {"near_C", v.near_C},
              {"rescaling_n", v.rescaling_n}};
}

/// Merges defaults, the config file and flags (in increasing precedence).
RunConfig resolve(const Flags& f) {
  RunConfig rc;
  if (!f.config.empty()) {
    const json j = parse_json_file(f.config);
    detail::reject_unknown(j,
                           {"d", "c", "n", "eps", "seed", "sampler", "mcmc", "rejection_cap", "samples", "n_values", "eps_rule",
                            "normalization", "verify", "checkpoint"},
                           "config");
    merge_params(j, rc.params);
    rc.seed_given = j.contains("seed");
    if (j.contains("samples")) rc.samples = detail::get_as<std::int64_t>(j, "samples", "config");
    if (j.contains("n_values")) rc.n_values = detail::get_as<std::vector<int>>(j, "n_values", "config");
    if (j.contains("eps_rule")) {
      const json& r = j.at("eps_rule");
      detail::reject_unknown(r, {"kind", "eps", "beta0"}, "eps_rule");
      rc.eps_rule = parse_eps_rule(detail::get_as<std::string>(r, "kind", "eps_rule"),
                                   r.value("eps", 1.0), r.value("beta0", 0.5));
      rc.eps_rule_given = true;
    }
    if (j.contains("normalization")) {
      rc.normalization = parse_normalization(detail::get_as<std::string>(j, "normalization", "config"));
    }
    if (j.contains("verify")) merge_verify(j.at("verify"), rc.verify);
    if (j.contains("checkpoint")) rc.checkpoint = detail::get_as<std::string>(j, "checkpoint", "config");
  }
  if (f.seed) {
    rc.params.seed = *f.seed;
    rc.seed_given = true;
  }
  if (f.samples) rc.samples = *f.samples;
  if (f.d) rc.params.d = *f.d;
  if (f.c) rc.params.c = *f.c;
  if (f.n) rc.params.n = *f.n;
  if (f.eps) rc.params.eps = *f.eps;
  if (f.rejection_cap) rc.params.rejection_cap = *f.rejection_cap;
  if (f.sampler) rc.params.sampler = parse_sampler(*f.sampler);
  if (!f.n_values.empty()) rc.n_values = f.n_values;
  if (f.eps_rule || f.beta0) {
    const std::string kind = f.eps_rule.value_or(to_string(rc.eps_rule.kind));
    const double beta0 = f.beta0.value_or(rc.eps_rule.kind == EpsRule::Kind::power ? rc.eps_rule.value : 0.5);
    rc.eps_rule = parse_eps_rule(kind, 1.0, beta0);
    rc.eps_rule_given = true;
  }
  if (f.normalization) rc.normalization = parse_normalization(*f.normalization);
  if (!f.suites.empty()) rc.verify.suites = f.suites;
  if (!f.checkpoint.empty()) rc.checkpoint = f.checkpoint;
  // The const rule defaults to the configured step length.
  if (!rc.eps_rule_given) rc.eps_rule = EpsRule::constant(rc.params.eps);
  return rc;
}

/// The configuration that determines a run's results (excludes --jobs,
/// --out and --quiet, which do not).
json config_json(const std::string& command, const RunConfig& rc) {
  json j{{"command", command}, {"params", to_json(rc.params)}, {"samples", rc.samples}};
  if (command == "scan" || command == "scaling") j["n_values"] = rc.n_values;
  if (command == "scaling") {
    j["eps_rule"] = eps_rule_json(rc.eps_rule);
    j["normalization"] = to_string(rc.normalization);
  }
  if (command == "verify") j["verify"] = verify_json(rc.verify);
  return j;
}

class Run {
 public:
  Run(std::string command, const Flags& flags, RunConfig rc)
      : command_(std::move(command)), flags_(flags), rc_(std::move(rc)), out_(flags.out),
        start_(std::chrono::steady_clock::now()) {
    std::error_code ec;
    fs::create_directories(out_, ec);
    if (ec || !fs::is_directory(out_)) throw Error(ErrorKind::io, "cannot create output directory " + out_.string());
  }

  const RunConfig& config() const { return rc_; }
  RunConfig& config() { return rc_; }
  unsigned jobs() const { return flags_.jobs; }
  const fs::path& out() const { return out_; }

  void write(const std::string& name, const std::string& content) {
    write_atomic(out_ / name, content);
    outputs_.push_back(name);
    if (!flags_.quiet) std::cout << "wrote " << (out_ / name).string() << '\n';
  }

  void finish() {
    const json cfg = config_json(command_, rc_);
    json manifest{{"command", command_},
                  {"tool_version", HSAW_VERSION},
                  {"params", to_json(rc_.params)},
                  {"config", cfg},
                  {"config_hash", git_blob_sha1(cfg.dump())},
                  {"outputs", outputs_},
                  {"wall_clock", detail::seconds_since(start_)}};
    write_atomic(out_ / "manifest.json", manifest.dump(2) + "\n");
    if (!flags_.quiet) std::cout << "wrote " << (out_ / "manifest.json").string() << '\n';
  }

  void note(const std::string& line) const {
    if (!flags_.quiet) std::cout << line << '\n';
  }

 private:
  std::string command_;
  Flags flags_;
  RunConfig rc_;
  fs::path out_;
  std::chrono::steady_clock::time_point start_;
  std::vector<std::string> outputs_;
};

void require_seed(const RunConfig& rc) {
  if (!rc.seed_given) throw ConfigError("a seed is required: pass --seed or set \"seed\" in the config");
}

std::string walk_file_name(std::int64_t k) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "walk_%06lld.json", static_cast<long long>(k));
  return buf;
}

// ---------------------------------------------------------------------------
// Commands

void cmd_sample(Run& run) {
  const SawParams& p = run.config().params;
  const std::int64_t count = run.config().samples;
  if (count < 1) throw ConfigError("samples must be >= 1");
  const std::vector<std::string> files = with_dimension(p.d, [&](auto dim) {
    constexpr int D = decltype(dim)::value;
    std::vector<std::string> text(static_cast<std::size_t>(count));
    if (p.sampler == SamplerKind::rejection) {
      parallel_for(text.size(), run.jobs(), [&](std::size_t k) {
        Rng rng(derive_seed(p.seed, k));
        text[k] = to_json(rejection_sample<D>(p, rng).walk).dump() + "\n";
      });
    } else {
      Chain<D> chain(p, Rng(derive_seed(p.seed, 0)));
      for (auto& t : text) t = to_json(chain.next()).dump() + "\n";
    }
    return text;
  });
  for (std::size_t k = 0; k < files.size(); ++k) run.write(walk_file_name(static_cast<std::int64_t>(k)), files[k]);
}

template <int D>
void write_speed_with_checkpoint(Run& run, Chain<D>& chain) {
  DisplacementSample s;
  s.values = chain.trace();
  s.method = EstimateMethod::batch_means;
  const auto report = speed_report(s, chain.params().n);
  run.write("speed.csv", scan_csv({ScanRow{chain.params().n, report}}));
  run.write("checkpoint.json", checkpoint_to_json(chain).dump() + "\n");
  run.note("speed " + format_real(report.estimate) + " +- " + format_real(report.std_error));
}

void cmd_speed(Run& run) {
  const SawParams& p = run.config().params;
  const std::int64_t samples = run.config().samples;
  if (samples < min_speed_samples) throw ConfigError("speed needs samples >= 10");
  if (p.sampler == SamplerKind::mcmc) {
    // Same chain and seed as speed_estimate, kept so it can be checkpointed.
    with_dimension(p.d, [&](auto dim) {
      constexpr int D = decltype(dim)::value;
      Chain<D> chain(p, Rng(derive_seed(p.seed, 0)));
      for (std::int64_t k = 0; k < samples; ++k) chain.next();
      write_speed_with_checkpoint(run, chain);
    });
    return;
  }
  const auto report = speed_estimate(p, samples, run.jobs());
  run.write("speed.csv", scan_csv({ScanRow{p.n, report}}));
  run.note("speed " + format_real(report.estimate) + " +- " + format_real(report.std_error));
}

void cmd_resume(Run& run) {
  RunConfig& rc = run.config();
  if (rc.checkpoint.empty()) throw ConfigError("resume needs --checkpoint PATH");
  if (rc.samples < 1) throw ConfigError("samples must be >= 1");
  const json cp = parse_json_file(rc.checkpoint);
  if (!cp.contains("params")) throw ConfigError("checkpoint: missing params");
  rc.params = params_from_json(cp.at("params"));
  with_dimension(rc.params.d, [&](auto dim) {
    constexpr int D = decltype(dim)::value;
    Chain<D> chain = chain_from_checkpoint<D>(cp);
    for (std::int64_t k = 0; k < rc.samples; ++k) chain.next();
    if (chain.trace().size() < static_cast<std::size_t>(min_speed_samples)) {
      throw ConfigError("resume: fewer than 10 samples in total");
    }
    write_speed_with_checkpoint(run, chain);
  });
}

void cmd_scan(Run& run) {
  const auto& rc = run.config();
  if (rc.n_values.empty()) throw ConfigError("scan needs n_values (--n-values or config)");
  try {
    require_ascending(rc.n_values);
  } catch (const UsageError& e) {
    throw ConfigError(e.what());
  }
  const auto rows = ballisticity_scan(rc.params, rc.n_values, rc.samples, run.jobs());
  run.write("scan.csv", scan_csv(rows));
}

void cmd_scaling(Run& run) {
  const auto& rc = run.config();
  if (rc.n_values.empty()) throw ConfigError("scaling needs n_values (--n-values or config)");
  try {
    require_ascending(rc.n_values);
  } catch (const UsageError& e) {
    throw ConfigError(e.what());
  }
  const auto points = scaling_sweep(rc.params, rc.n_values, rc.eps_rule, rc.samples, run.jobs());
  run.write("scaling.csv", scaling_csv(points));
  json fit{{"eps_rule", eps_rule_json(rc.eps_rule)}, {"normalization", to_string(rc.normalization)}};
  fit["beta_fit"] = points.size() >= 3 ? to_json(beta_fit(points, rc.normalization)) : json(nullptr);
  const bool log_ok = points.size() >= 4 && rc.n_values.front() >= 2;
  fit["log_corrected_fit"] = log_ok ? to_json(log_corrected_fit(points, rc.normalization)) : json(nullptr);
  run.write("beta_fit.json", fit.dump(2) + "\n");
}

json suite_delta(const RunConfig& rc, unsigned jobs) {
  const auto& v = rc.verify;
  Rng rng(derive_seed(rc.params.seed, 1));
  const auto est = with_dimension(rc.params.d, [&](auto dim) {
    return estimate_delta<decltype(dim)::value>(v.triangles, v.radius_cap, rng, jobs);
  });
  json j = to_json(est);
  j["d"] = rc.params.d;
  j["radius_cap"] = v.radius_cap;
  j["threshold"] = v.delta;
  j["pass"] = est.max_observed <= v.delta;
  return j;
}

json suite_two_geodesics(const RunConfig& rc, unsigned jobs) {
  const auto& v = rc.verify;
  Rng rng(derive_seed(rc.params.seed, 2));
  const auto r = with_dimension(rc.params.d, [&](auto dim) {
    return verify_two_geodesics<decltype(dim)::value>(v.delta, v.trials, rng, v.separation, v.half_length, jobs);
  });
  json j = to_json(r);
  j["d"] = rc.params.d;
  return j;
}

json suite_hull_density(const RunConfig& rc) {
  const auto& v = rc.verify;
  SawParams p = rc.params;
  p.d = 2;
  p.n = v.hull_n;
  p.seed = derive_seed(rc.params.seed, 3);
  const double fixture = surface_density(geodesic_walk<2>(p)).fraction;
  const auto fractions =
      chain_statistic<2>(p, v.hull_samples, [](const Walk<2>& w) { return surface_density(w).fraction; });
  const double min_fraction = *std::min_element(fractions.begin(), fractions.end());
  const auto mean = summarize(fractions);
  return json{{"d", 2},
              {"n", p.n},
              {"samples", v.hull_samples},
              {"threshold", 0.5 * (1.0 - p.c) * p.eps},
              {"geodesic_fixture_fraction", fixture},
              {"min_fraction", min_fraction},
              {"mean_fraction", mean.mean()},
              {"pass", fixture == 1.0 && min_fraction > 0.0}};
}

json suite_near_geodesic(const RunConfig& rc) {
  const auto& v = rc.verify;
  SawParams p = rc.params;
  p.n = v.near_n;
  p.seed = derive_seed(rc.params.seed, 4);
  const auto fractions = with_dimension(p.d, [&](auto dim) {
    constexpr int D = decltype(dim)::value;
    return chain_statistic<D>(p, v.near_samples,
                              [&](const Walk<D>& w) { return near_geodesic_fraction(w, v.near_C); });
  });
  const auto est = fractions.size() >= 20 ? batch_means_estimate(fractions) : iid_estimate(fractions);
  constexpr double z99 = 2.5758293035489004;
  const double low = est.estimate - z99 * est.std_error;
  return json{{"d", p.d},
              {"n", p.n},
              {"C", v.near_C},
              {"samples", v.near_samples},
              {"mean_fraction", est.estimate},
              {"std_error", est.std_error},
              {"ci99_low", low},
              {"pass", low > 0.0}};
}

json suite_rescaling(const RunConfig& rc) {
  json checks = json::array();
  bool pass = true;
  for (double eps : {0.5, 1.0}) {
    SawParams p = rc.params;
    p.sampler = SamplerKind::rejection;
    p.n = rc.verify.rescaling_n;
    p.eps = eps;
    const auto r = with_dimension(p.d, [&](auto dim) {
      return rescaling_identity_check<decltype(dim)::value>(p, derive_seed(rc.params.seed, 5));
    });
    pass = pass && r.pass;
    checks.push_back(json{{"eps", r.eps},
                          {"n", r.n},
                          {"displacement", r.displacement},
                          {"scaled_displacement", r.scaled_displacement},
                          {"difference", r.difference},
                          {"pass", r.pass}});
  }
  return json{{"tolerance", rescaling_tolerance}, {"checks", checks}, {"pass", pass}};
}

/// Runs the requested suites; returns false if any failed.
bool cmd_verify(Run& run) {
  const auto& rc = run.config();
  if (!(rc.verify.delta > 0.0)) throw ConfigError("verify.delta must be > 0");
  json suites = json::object();
  bool pass = true;
  for (const auto& name : rc.verify.suites) {
    json r;
    if (name == "delta") r = suite_delta(rc, run.jobs());
    else if (name == "two_geodesics") r = suite_two_geodesics(rc, run.jobs());
    else if (name == "hull_density") r = suite_hull_density(rc);
    else if (name == "near_geodesic") r = suite_near_geodesic(rc);
    else if (name == "rescaling") r = suite_rescaling(rc);
    else throw ConfigError("unknown verify suite '" + name + "'");
    pass = pass && r.at("pass").get<bool>();
    run.note(name + (r.at("pass").get<bool>() ? ": pass" : ": FAIL"));
    suites[name] = std::move(r);
  }
  run.write("verify.json", json{{"suites", suites}, {"pass", pass}}.dump(2) + "\n");
  return pass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Continuous self-avoiding walks on hyperbolic space"};
  app.set_version_flag("--version", std::string(HSAW_VERSION));
  app.require_subcommand(1);
  app.fallthrough();

  Flags f;
  app.add_option("--config", f.config, "JSON configuration file")->check(CLI::ExistingFile);
  app.add_option("--seed", f.seed, "Master seed (required unless set in the config)");
  app.add_option("--jobs", f.jobs, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--out", f.out, "Output directory")->capture_default_str();
  app.add_option("--samples", f.samples, "Number of samples (walks, or estimator samples)");
  app.add_flag("--quiet", f.quiet, "Suppress progress output on stdout");
  app.add_option("--d", f.d, "Dimension (2..5)");
  app.add_option("--c", f.c, "Self-avoidance constant in (0, 1)");
  app.add_option("--n", f.n, "Number of steps");
  app.add_option("--eps", f.eps, "Step length");
  app.add_option("--rejection-cap", f.rejection_cap, "Rejection attempts per walk before giving up");
  app.add_option("--sampler", f.sampler, "rejection | mcmc");
  app.add_option("--n-values", f.n_values, "Ascending step counts for scan/scaling")->delimiter(',');
  app.add_option("--eps-rule", f.eps_rule, "const | inverse | power (scaling)");
  app.add_option("--beta0", f.beta0, "Exponent of the power eps rule");
  app.add_option("--normalization", f.normalization, "raw | rescaled (scaling fits)");
  app.add_option("--suites", f.suites, "Verification suites to run")->delimiter(',');
  app.add_option("--checkpoint", f.checkpoint, "Chain checkpoint to resume from");

  auto* sample = app.add_subcommand("sample", "Write sampled walks as JSON");
  auto* speed = app.add_subcommand("speed", "Estimate E[d(x_0, x_n)] / n");
  auto* scan = app.add_subcommand("scan", "Speed estimates over n_values");
  auto* scaling = app.add_subcommand("scaling", "(n, eps) scaling sweep with exponent fits");
  auto* verify = app.add_subcommand("verify", "Geometry verification suites");
  auto* resume = app.add_subcommand("resume", "Continue a checkpointed Markov chain");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    report_error("usage", e.what());
    return exit_config;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    RunConfig rc = resolve(f);
    if (command != "resume") {
      require_seed(rc);
      rc.params.validate();
    }
    Run run(command, f, std::move(rc));
    bool ok = true;
    if (sample->parsed()) cmd_sample(run);
    else if (speed->parsed()) cmd_speed(run);
    else if (scan->parsed()) cmd_scan(run);
    else if (scaling->parsed()) cmd_scaling(run);
    else if (verify->parsed()) ok = cmd_verify(run);
    else if (resume->parsed()) cmd_resume(run);
    run.finish();
    if (!ok) {
      report_error(std::string(to_string(ErrorKind::verification)), "one or more verification suites failed");
      return exit_verification;
    }
    return exit_ok;
  } catch (const FeasibilityError& e) {
    report_error(std::string(to_string(e.kind())), e.what(), json{{"acceptance_rate", e.acceptance_rate()}});
    return exit_feasibility;
  } catch (const Error& e) {
    report_error(std::string(to_string(e.kind())), e.what());
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    report_error("internal", e.what());
    return exit_internal;
  }
}
