#pragma once

// Samplers for the SAW measure: i.i.d. uniform directions conditioned on
// self-avoidance.
//
// Exact sampling is rejection from the product measure. The Markov chain
// combines two moves whose proposals are symmetric and leave the product
// measure invariant, so "accept iff self-avoiding" is a Metropolis kernel for
// the conditioned measure:
//   pivot:   rotate the tail about x_i by a Haar element Q of O(D); in the
//            direction representation every tail direction becomes Q u_k.
//   regrow:  redraw a contiguous block of directions i.i.d. uniform.

#include <cstdint>
#include <cstdio>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "hsaw/error.hpp"
#include "hsaw/hyperbolic.hpp"
#include "hsaw/rng.hpp"
#include "hsaw/statistics.hpp"
#include "hsaw/walk.hpp"

namespace hsaw {

template <int D>
std::vector<Spatial<D>> random_directions(int n, Rng& rng) {
  std::vector<Spatial<D>> dirs(static_cast<std::size_t>(n));
  for (auto& u : dirs) u = random_unit_direction<D>(rng);
  return dirs;
}

namespace detail {
inline std::string format_rate(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}
}  // namespace detail

template <int D>
struct RejectionResult {
  Walk<D> walk;
  std::int64_t attempts;
};

template <int D>
RejectionResult<D> rejection_sample(const SawParams& params, Rng& rng) {
  params.validate();
  const std::int64_t cap = params.rejection_cap;
  for (std::int64_t attempt = 1; attempt <= cap; ++attempt) {
    auto dirs = random_directions<D>(params.n, rng);
    if (is_self_avoiding<D>(dirs, params)) return {develop<D>(std::move(dirs), params), attempt};
  }
  throw FeasibilityError("rejection sampler: no self-avoiding walk in " + std::to_string(cap) +
                             " attempts (acceptance rate < " + detail::format_rate(1.0 / static_cast<double>(cap)) + ")",
                         0.0);
}

/// Pivot proposal: tail directions u_{i+1}..u_n replaced by Q u_k. Equals the
/// walk obtained by applying to x_{i+1}..x_n the isometry fixing x_i that acts
/// as Q in x_i's developed frame.
template <int D>
Walk<D> pivot_proposal(const Walk<D>& w, int pivot, const OrthogonalMatrix<D>& q) {
  if (pivot < 0 || pivot >= w.steps()) throw UsageError("pivot index out of range");
  if (!is_orthogonal<D>(q)) throw UsageError("pivot: matrix is not orthogonal");
  std::vector<Spatial<D>> tail;
  tail.reserve(static_cast<std::size_t>(w.steps() - pivot));
  for (int k = pivot; k < w.steps(); ++k) tail.push_back(q * w.directions()[static_cast<std::size_t>(k)]);
  Walk<D> out = w;
  out.replace_tail(static_cast<std::size_t>(pivot), tail);
  return out;
}

template <int D>
struct MoveResult {
  Walk<D> walk;
  bool accepted;
};

template <int D>
MoveResult<D> pivot_move(const Walk<D>& w, Rng& rng) {
  const int pivot = static_cast<int>(rng.uniform_int(0, w.steps() - 1));
  const OrthogonalMatrix<D> q = random_rotation<D>(rng);
  Walk<D> proposal = pivot_proposal(w, pivot, q);
  if (is_self_avoiding(proposal)) return {std::move(proposal), true};
  return {w, false};
}

/// Block-regrow proposal with the block [start, start + length) redrawn.
template <int D>
Walk<D> regrow_proposal(const Walk<D>& w, int start, int length, Rng& rng) {
  if (start < 0 || length < 1 || start + length > w.steps()) throw UsageError("block out of range");
  std::vector<Spatial<D>> tail(w.directions().begin() + start, w.directions().end());
  for (int k = 0; k < length; ++k) tail[static_cast<std::size_t>(k)] = random_unit_direction<D>(rng);
  Walk<D> out = w;
  out.replace_tail(static_cast<std::size_t>(start), tail);
  return out;
}

template <int D>
MoveResult<D> block_regrow_move(const Walk<D>& w, Rng& rng, int block_max) {
  if (block_max < 1 || block_max > w.steps()) throw UsageError("block_max must lie in [1, n]");
  const int length = static_cast<int>(rng.uniform_int(1, block_max));
  const int start = static_cast<int>(rng.uniform_int(0, w.steps() - length));
  Walk<D> proposal = regrow_proposal(w, start, length, rng);
  if (is_self_avoiding(proposal)) return {std::move(proposal), true};
  return {w, false};
}

struct ChainStats {
  std::int64_t proposals = 0;
  std::int64_t acceptances = 0;
  std::int64_t pivot_proposals = 0;
  std::int64_t pivot_acceptances = 0;
  std::int64_t regrow_proposals = 0;
  std::int64_t regrow_acceptances = 0;
  double autocorrelation_time_estimate = 1.0;

  static double rate(std::int64_t acc, std::int64_t prop) {
    return prop > 0 ? static_cast<double>(acc) / static_cast<double>(prop) : 0.0;
  }
  double acceptance_rate() const { return rate(acceptances, proposals); }
  double pivot_rate() const { return rate(pivot_acceptances, pivot_proposals); }
  double regrow_rate() const { return rate(regrow_acceptances, regrow_proposals); }
};

/// A pivot + block-regrow Markov chain owning its walk and RNG stream.
template <int D>
class Chain {
 public:
  /// Starts from the geodesic walk.
  Chain(const SawParams& params, Rng rng)
      : Chain(params, std::move(rng), geodesic_walk<D>(checked(params))) {}

  /// Starts from a given self-avoiding walk.
  Chain(const SawParams& params, Rng rng, Walk<D> start)
      : params_(checked(params)), settings_(resolve_mcmc(params_)), rng_(std::move(rng)),
        current_(std::move(start)) {
    if (!is_self_avoiding(current_)) throw UsageError("chain start is not self-avoiding");
  }

  /// Performs one move; returns whether it was accepted. Draws from the RNG
  /// in the same order as pivot_move / block_regrow_move.
  bool step() {
    const bool pivot = rng_.uniform() < settings_.pivot_fraction;
    const int n = current_.steps();
    proposal_ = current_;
    if (pivot) {
      const int at = static_cast<int>(rng_.uniform_int(0, n - 1));
      const OrthogonalMatrix<D> q = random_rotation<D>(rng_);
      tail_.clear();
      for (int k = at; k < n; ++k) tail_.push_back(q * current_.directions()[static_cast<std::size_t>(k)]);
      proposal_.replace_tail(static_cast<std::size_t>(at), tail_);
    } else {
      const int length = static_cast<int>(rng_.uniform_int(1, settings_.block_max));
      const int start = static_cast<int>(rng_.uniform_int(0, n - length));
      tail_.assign(current_.directions().begin() + start, current_.directions().end());
      for (int k = 0; k < length; ++k) tail_[static_cast<std::size_t>(k)] = random_unit_direction<D>(rng_);
      proposal_.replace_tail(static_cast<std::size_t>(start), tail_);
    }
    const bool accepted = is_self_avoiding(proposal_);
    ++stats_.proposals;
    (pivot ? stats_.pivot_proposals : stats_.regrow_proposals) += 1;
    if (accepted) {
      ++stats_.acceptances;
      (pivot ? stats_.pivot_acceptances : stats_.regrow_acceptances) += 1;
      std::swap(current_, proposal_);
    }
    return accepted;
  }

  /// Runs the configured burn-in once.
  void burn_in() {
    if (burned_in_) return;
    for (std::int64_t k = 0; k < settings_.burn_in; ++k) step();
    burned_in_ = true;
  }

  /// Advances `thinning` moves (after burn-in) and returns the new state.
  const Walk<D>& next() {
    burn_in();
    for (std::int64_t k = 0; k < settings_.thinning; ++k) step();
    trace_.push_back(end_to_end_distance(current_));
    ++emitted_;
    return current_;
  }

  const Walk<D>& current() const { return current_; }
  /// Counters plus the autocorrelation time of d(x_0, x_n) over the states
  /// emitted since construction (or the checkpointed value if none yet).
  ChainStats stats() const {
    ChainStats s = stats_;
    if (trace_.size() >= 40) s.autocorrelation_time_estimate = integrated_autocorrelation(trace_);
    return s;
  }
  const std::vector<double>& trace() const { return trace_; }
  const Rng& rng() const { return rng_; }
  const SawParams& params() const { return params_; }
  bool burned_in() const { return burned_in_; }
  std::int64_t emitted() const { return emitted_; }

  /// Restores a checkpointed chain.
  static Chain restore(const SawParams& params, Rng rng, Walk<D> state, ChainStats stats,
                       bool burned_in, std::int64_t emitted, std::vector<double> trace = {}) {
    Chain c(params, std::move(rng), std::move(state));
    c.trace_ = std::move(trace);
    c.stats_ = stats;
    c.burned_in_ = burned_in;
    c.emitted_ = emitted;
    return c;
  }

 private:
  static const SawParams& checked(const SawParams& p) {
    p.validate();
    return p;
  }

  SawParams params_;
  ResolvedMcmc settings_;
  Rng rng_;
  Walk<D> current_;
  Walk<D> proposal_ = current_;
  std::vector<Spatial<D>> tail_;
  ChainStats stats_;
  std::vector<double> trace_;
  bool burned_in_ = false;
  std::int64_t emitted_ = 0;
};

/// Runs a fresh chain, handing each of `samples` thinned states to `sink`.
template <int D>
ChainStats run_chain(const SawParams& params, Rng rng, std::int64_t samples,
                     const std::function<void(const Walk<D>&)>& sink) {
  if (params.sampler != SamplerKind::mcmc) throw UsageError("run_chain: params.sampler must be mcmc");
  Chain<D> chain(params, std::move(rng));
  for (std::int64_t k = 0; k < samples; ++k) sink(chain.next());
  return chain.stats();
}

}  // namespace hsaw
