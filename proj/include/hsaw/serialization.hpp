#pragma once

// JSON forms of parameters, walks, chain checkpoints and reports. Doubles are
// written in shortest round-trip form, so a walk read back is bitwise equal to
// the one written.

#include <json.hpp>

#include <cmath>
#include <string>
#include <vector>

#include "hsaw/error.hpp"
#include "hsaw/experiments.hpp"
#include "hsaw/geometry_analysis.hpp"
#include "hsaw/rng.hpp"
#include "hsaw/samplers.hpp"
#include "hsaw/statistics.hpp"
#include "hsaw/walk.hpp"

namespace hsaw {

using json = nlohmann::ordered_json;

inline constexpr double walk_point_tolerance = 1e-7;

namespace detail {

template <typename T>
T get_as(const json& j, const char* key, const char* what) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string(what) + ": bad or missing '" + key + "' (" + e.what() + ")");
  }
}

inline void reject_unknown(const json& j, std::initializer_list<const char*> keys, const char* what) {
  if (!j.is_object()) throw ConfigError(std::string(what) + ": expected a JSON object");
  for (const auto& [k, v] : j.items()) {
    bool known = false;
    for (const char* key : keys) known = known || k == key;
    if (!known) throw ConfigError(std::string(what) + ": unknown key '" + k + "'");
  }
}

}  // namespace detail

inline SamplerKind parse_sampler(const std::string& s) {
  if (s == "rejection") return SamplerKind::rejection;
  if (s == "mcmc") return SamplerKind::mcmc;
  throw ConfigError("sampler must be 'rejection' or 'mcmc', got '" + s + "'");
}

inline json to_json(const McmcSettings& m) {
  json j = json::object();
  if (m.burn_in) j["burn_in"] = *m.burn_in;
  if (m.thinning) j["thinning"] = *m.thinning;
  j["pivot_fraction"] = m.pivot_fraction;
  if (m.block_max) j["block_max"] = *m.block_max;
  return j;
}

/// Overlays the keys present in `j` onto `m`.
inline void merge_mcmc(const json& j, McmcSettings& m) {
  detail::reject_unknown(j, {"burn_in", "thinning", "pivot_fraction", "block_max"}, "mcmc");
  if (j.contains("burn_in")) m.burn_in = detail::get_as<std::int64_t>(j, "burn_in", "mcmc");
  if (j.contains("thinning")) m.thinning = detail::get_as<std::int64_t>(j, "thinning", "mcmc");
  if (j.contains("pivot_fraction")) m.pivot_fraction = detail::get_as<double>(j, "pivot_fraction", "mcmc");
  if (j.contains("block_max")) m.block_max = detail::get_as<int>(j, "block_max", "mcmc");
}

inline json to_json(const SawParams& p) {
  return json{{"d", p.d},         {"c", p.c},
              {"n", p.n},         {"eps", p.eps},
              {"seed", p.seed},   {"sampler", to_string(p.sampler)},
              {"mcmc", to_json(p.mcmc)}, {"rejection_cap", p.rejection_cap}};
}

inline const std::initializer_list<const char*> params_keys = {"d", "c", "n", "eps", "seed", "sampler", "mcmc",
                                                                 "rejection_cap"};

/// Overlays the parameter keys present in `j` onto `p` (other keys ignored).
inline void merge_params(const json& j, SawParams& p) {
  if (j.contains("d")) p.d = detail::get_as<int>(j, "d", "params");
  if (j.contains("c")) p.c = detail::get_as<double>(j, "c", "params");
  if (j.contains("n")) p.n = detail::get_as<int>(j, "n", "params");
  if (j.contains("eps")) p.eps = detail::get_as<double>(j, "eps", "params");
  if (j.contains("seed")) p.seed = detail::get_as<std::uint64_t>(j, "seed", "params");
  if (j.contains("sampler")) p.sampler = parse_sampler(detail::get_as<std::string>(j, "sampler", "params"));
  if (j.contains("mcmc")) merge_mcmc(j.at("mcmc"), p.mcmc);
  if (j.contains("rejection_cap")) p.rejection_cap = detail::get_as<std::int64_t>(j, "rejection_cap", "params");
}

inline SawParams params_from_json(const json& j) {
  detail::reject_unknown(j, params_keys, "params");
  SawParams p;
  merge_params(j, p);
  p.validate();
  return p;
}

// ---------------------------------------------------------------------------
// Walks

template <int D>
json to_json(const Walk<D>& w) {
  json dirs = json::array();
  for (const auto& u : w.directions()) dirs.push_back(std::vector<double>(u.data(), u.data() + D));
  json pts = json::array();
  for (const auto& p : w.points()) pts.push_back(std::vector<double>(p.coords().data(), p.coords().data() + D + 1));
  return json{{"d", D}, {"c", w.params().c}, {"n", w.steps()}, {"eps", w.params().eps},
              {"directions", std::move(dirs)}, {"points", std::move(pts)}};
}

/// Reads a walk; points are recomputed from the directions and, if present,
/// must agree with the stored ones within 1e-7 relative.
template <int D>
Walk<D> walk_from_json(const json& j, SawParams params = {}) {
  detail::reject_unknown(j, {"d", "c", "n", "eps", "directions", "points"}, "walk");
  params.d = detail::get_as<int>(j, "d", "walk");
  params.c = detail::get_as<double>(j, "c", "walk");
  params.n = detail::get_as<int>(j, "n", "walk");
  params.eps = detail::get_as<double>(j, "eps", "walk");
  if (params.d != D) throw ConfigError("walk: dimension mismatch");
  params.validate();
  const auto raw = detail::get_as<std::vector<std::vector<double>>>(j, "directions", "walk");
  std::vector<Spatial<D>> dirs;
  for (const auto& r : raw) {
    if (r.size() != static_cast<std::size_t>(D)) throw ConfigError("walk: direction has wrong length");
    dirs.push_back(Eigen::Map<const Spatial<D>>(r.data()));
  }
  Walk<D> w = [&] {
    try {
      return develop<D>(std::move(dirs), params);
    } catch (const UsageError& e) {
      throw ConfigError(std::string("walk: ") + e.what());
    }
  }();
  if (j.contains("points")) {
    const auto pts = detail::get_as<std::vector<std::vector<double>>>(j, "points", "walk");
    if (pts.size() != w.points().size()) throw ConfigError("walk: wrong number of points");
    for (std::size_t k = 0; k < pts.size(); ++k) {
      if (pts[k].size() != static_cast<std::size_t>(D + 1)) throw ConfigError("walk: point has wrong length");
      const Ambient<D> stored = Eigen::Map<const Ambient<D>>(pts[k].data());
      const Ambient<D>& mine = w.points()[k].coords();
      if ((stored - mine).norm() > walk_point_tolerance * std::max(1.0, mine[0])) {
        throw ConfigError("walk: stored point " + std::to_string(k) + " disagrees with the directions");
      }
    }
  }
  return w;
}

// ---------------------------------------------------------------------------
// Chain checkpoints

inline json to_json(const ChainStats& s) {
  return json{{"proposals", s.proposals},
              {"acceptances", s.acceptances},
              {"pivot_proposals", s.pivot_proposals},
              {"pivot_acceptances", s.pivot_acceptances},
              {"regrow_proposals", s.regrow_proposals},
              {"regrow_acceptances", s.regrow_acceptances},
              {"acceptance_rate", s.acceptance_rate()},
              {"autocorrelation_time_estimate", s.autocorrelation_time_estimate}};
}

inline ChainStats chain_stats_from_json(const json& j) {
  ChainStats s;
  s.proposals = detail::get_as<std::int64_t>(j, "proposals", "stats");
  s.acceptances = detail::get_as<std::int64_t>(j, "acceptances", "stats");
  s.pivot_proposals = detail::get_as<std::int64_t>(j, "pivot_proposals", "stats");
  s.pivot_acceptances = detail::get_as<std::int64_t>(j, "pivot_acceptances", "stats");
  s.regrow_proposals = detail::get_as<std::int64_t>(j, "regrow_proposals", "stats");
  s.regrow_acceptances = detail::get_as<std::int64_t>(j, "regrow_acceptances", "stats");
  s.autocorrelation_time_estimate = detail::get_as<double>(j, "autocorrelation_time_estimate", "stats");
  return s;
}

template <int D>
json checkpoint_to_json(const Chain<D>& chain) {
  json dirs = json::array();
  for (const auto& u : chain.current().directions()) dirs.push_back(std::vector<double>(u.data(), u.data() + D));
  return json{{"params", to_json(chain.params())},
              {"directions", std::move(dirs)},
              {"rng_state", chain.rng().serialize()},
              {"stats", to_json(chain.stats())},
              {"burned_in", chain.burned_in()},
              {"emitted", chain.emitted()},
              {"trace", chain.trace()}};
}

template <int D>
Chain<D> chain_from_checkpoint(const json& j) {
  detail::reject_unknown(j, {"params", "directions", "rng_state", "stats", "burned_in", "emitted", "trace"},
                         "checkpoint");
  const SawParams params = params_from_json(j.at("params"));
  if (params.sampler != SamplerKind::mcmc) throw ConfigError("checkpoint: sampler must be mcmc");
  json wj{{"d", params.d}, {"c", params.c}, {"n", params.n}, {"eps", params.eps}, {"directions", j.at("directions")}};
  Walk<D> state = walk_from_json<D>(wj, params);
  Rng rng = [&] {
    try {
      return Rng::deserialize(detail::get_as<std::string>(j, "rng_state", "checkpoint"));
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError(std::string("checkpoint: bad rng_state: ") + e.what());
    }
  }();
  return Chain<D>::restore(params, std::move(rng), std::move(state), chain_stats_from_json(j.at("stats")),
                           detail::get_as<bool>(j, "burned_in", "checkpoint"),
                           detail::get_as<std::int64_t>(j, "emitted", "checkpoint"),
                           detail::get_as<std::vector<double>>(j, "trace", "checkpoint"));
}

// ---------------------------------------------------------------------------
// Reports

inline json to_json(const EstimateReport& r) {
  return json{{"estimate", r.estimate},
              {"std_error", r.std_error},
              {"ci95", {r.ci_low, r.ci_high}},
              {"n_samples", r.n_samples},
              {"method", to_string(r.method)},
              {"autocorrelation_time", r.autocorrelation_time}};
}

inline json to_json(const DeltaEstimate& d) {
  return json{{"delta", d.delta}, {"samples", d.samples}, {"max_observed", d.max_observed}};
}

inline json to_json(const TwoGeodesicsReport& r) {
  return json{{"trials", r.trials},
              {"separation", r.separation},
              {"max_observed", r.max_observed},
              {"threshold", r.threshold},
              {"violations", r.violations},
              {"discretization_bound", r.discretization_bound},
              {"pass", r.pass}};
}

inline json to_json(const BetaFit& f) {
  return json{{"beta", f.beta}, {"intercept", f.intercept}, {"r_squared", f.r_squared},
              {"normalization", to_string(f.normalization)}};
}

inline json to_json(const LogCorrectedFit& f) {
  return json{{"beta", f.beta},
              {"log_log_coefficient", f.gamma},
              {"intercept", f.intercept},
              {"r_squared", f.r_squared},
              {"normalization", to_string(f.normalization)}};
}

}  // namespace hsaw
