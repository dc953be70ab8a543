#pragma once

// Exact degree laws of the secrecy graph, their empirical counterparts, and
// the geometric-offspring Galton-Watson process that dominates out-cluster
// growth.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <ostream>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "secperc/components.hpp"
#include "secperc/errors.hpp"
#include "secperc/quadrature.hpp"
#include "secperc/rng.hpp"
#include "secperc/secrecy_graph.hpp"
#include "secperc/statistics.hpp"

namespace secperc {

// P(outdegree = k): the k nearest points of black+red are black and the next
// one is red, (1/(1+lambda))^k * lambda/(1+lambda).
inline double outdegree_pmf(double lambda, std::size_t k) {
  if (!(lambda > 0.0)) throw std::invalid_argument("outdegree_pmf: lambda must be > 0");
  return std::exp(-static_cast<double>(k) * std::log1p(lambda)) * lambda / (1.0 + lambda);
}

// P(indegree = k) in one dimension,
//   (1/k!) * integral_0^inf f1(t) e^{-t/lambda} (t/lambda)^k dt,  f1(t) = 4 t e^{-2t},
// by adaptive Simpson on [0, T]. T is grown until the tail bound
//   prefactor * T^{k+1} e^{-cT} * 2/c,   c = 2 + 1/lambda,
// (valid once T >= 2(k+1)/c, where the log-integrand decays at rate >= c/2)
// drops below tol/2; the quadrature gets the other tol/2.
inline double indegree_pmf_d1(double lambda, std::size_t k, double tol = 1e-12) {
  if (!(lambda > 0.0)) throw std::invalid_argument("indegree_pmf_d1: lambda must be > 0");
  if (!(tol > 0.0)) throw std::invalid_argument("indegree_pmf_d1: tol must be > 0");
  const double kk = static_cast<double>(k);
  const double c = 2.0 + 1.0 / lambda;
  const double log_pref = std::log(4.0) - kk * std::log(lambda) - std::lgamma(kk + 1.0);
  auto integrand = [&](double t) {
    if (t <= 0.0) return 0.0;
    return std::exp(log_pref + (kk + 1.0) * std::log(t) - c * t);
  };
  double upper = std::max(2.0 * (kk + 1.0) / c, 1.0);
  auto tail_bound = [&](double t) { return std::exp(log_pref + (kk + 1.0) * std::log(t) - c * t) * 2.0 / c; };
  while (tail_bound(upper) >= 0.5 * tol) upper *= 1.5;

  const auto q = adaptive_simpson(integrand, 0.0, upper, 0.5 * tol);
  if (!q.converged) throw NumericalError("indegree_pmf_d1: quadrature did not converge");
  return q.value;
}

enum class DegreeSide { In, Out };

struct DegreeHistogram {
  DegreeSide side = DegreeSide::Out;
  std::map<std::size_t, std::size_t> counts;
  std::size_t n = 0;

  double mean() const {
    double s = 0.0;
    for (const auto& [k, c] : counts) s += static_cast<double>(k) * static_cast<double>(c);
    return n ? s / static_cast<double>(n) : 0.0;
  }
  double variance() const {
    const double m = mean();
    double s = 0.0;
    for (const auto& [k, c] : counts) s += (static_cast<double>(k) - m) * (static_cast<double>(k) - m) * static_cast<double>(c);
    return n > 1 ? s / static_cast<double>(n - 1) : 0.0;
  }
};

// Degree histogram over core vertices (distance >= margin from every face).
// Margin 0 keeps every vertex.
inline DegreeHistogram empirical_degree_hist(const SecrecyGraph& g, DegreeSide side, double margin) {
  check_margin(g.blacks().window(), margin, true);
  const auto core = core_mask(g.blacks(), margin);
  const std::vector<std::size_t> deg = side == DegreeSide::In ? g.in_degrees() : g.out_degrees();
  DegreeHistogram h;
  h.side = side;
  for (std::size_t v = 0; v < deg.size(); ++v) {
    if (!core[v]) continue;
    ++h.counts[deg[v]];
    ++h.n;
  }
  return h;
}

// Core histograms split into `blocks` equal slabs along the first axis.
inline std::vector<DegreeHistogram> empirical_degree_blocks(const SecrecyGraph& g, DegreeSide side, double margin,
                                                            std::size_t blocks) {
  check_margin(g.blacks().window(), margin, true);
  if (blocks == 0) throw std::invalid_argument("empirical_degree_blocks: blocks must be positive");
  const Window& w = g.blacks().window();
  const auto core = core_mask(g.blacks(), margin);
  const std::vector<std::size_t> deg = side == DegreeSide::In ? g.in_degrees() : g.out_degrees();
  const double lo = w.lo()[0] + margin, width = (w.side(0) - 2.0 * margin) / static_cast<double>(blocks);
  std::vector<DegreeHistogram> out(blocks);
  for (auto& h : out) h.side = side;
  for (std::size_t v = 0; v < deg.size(); ++v) {
    if (!core[v]) continue;
    const double f = std::floor((g.blacks().point(v)[0] - lo) / width);
    const auto i = static_cast<std::size_t>(std::clamp(f, 0.0, static_cast<double>(blocks - 1)));
    ++out[i].counts[deg[v]];
    ++out[i].n;
  }
  return out;
}

inline constexpr std::size_t kDefaultGofBlocks = 40;

// Dependence-robust fit of core degrees to pmf (see batch_means_gof).
inline GofResult degree_batch_gof(const SecrecyGraph& g, DegreeSide side, double margin,
                                  const std::function<double(std::size_t)>& pmf,
                                  std::size_t blocks = kDefaultGofBlocks) {
  std::vector<std::map<std::size_t, std::size_t>> counts;
  for (auto& h : empirical_degree_blocks(g, side, margin, blocks)) counts.push_back(std::move(h.counts));
  return batch_means_gof(counts, pmf);
}

inline void write_csv(std::ostream& os, const DegreeHistogram& h) {
  os << "k,count\n";
  for (const auto& [k, c] : h.counts) os << k << ',' << c << '\n';
}

// Law of the n-th generation size of a Galton-Watson process with geometric
// offspring of mean mu > 1 (offspring generating function 1 / (1 + mu(1-x)),
// i.e. lambda / (1 + lambda - x) with lambda = 1/mu).
inline double gw_generation_pmf(double mu, std::size_t n, std::size_t j) {
  if (!(mu > 1.0)) throw std::invalid_argument("gw_generation_pmf: mu must be > 1");
  const double nn = static_cast<double>(n);
  const double mun = std::pow(mu, nn);
  const double mun1 = mun * mu;
  if (j == 0) return (mun - 1.0) / (mun1 - 1.0);
  const double head = mun * (mu - 1.0) * (mu - 1.0) / ((mun1 - 1.0) * (mun1 - 1.0));
  const double ratio = (mun1 - mu) / (mun1 - 1.0);
  return head * std::pow(ratio, static_cast<double>(j - 1));
}

// Smallest root of x = lambda / (1 + lambda - x).
inline double extinction_probability(double lambda) {
  if (!(lambda > 0.0)) throw std::invalid_argument("extinction_probability: lambda must be > 0");
  return std::min(1.0, lambda);
}

struct GWRun {
  double offspring_mean = 0.0;
  std::vector<std::uint64_t> generation_sizes{1};
  bool extinct = false;
  bool capped = false;

  std::uint64_t generation(std::size_t n) const { return n < generation_sizes.size() ? generation_sizes[n] : 0; }
};

inline constexpr std::uint64_t kDefaultProgenyCap = 1'000'000;

// Offspring are i.i.d. geometric with mean 1/lambda, one inverse-CDF draw per
// individual. Stops at extinction, after max_gen generations, or once the
// total progeny exceeds progeny_cap (then `capped` is set).
inline GWRun gw_simulate(double lambda, std::size_t max_gen, std::uint64_t progeny_cap, Rng& rng) {
  if (!(lambda > 0.0)) throw std::invalid_argument("gw_simulate: lambda must be > 0");
  if (max_gen == 0 || progeny_cap == 0) throw std::invalid_argument("gw_simulate: caps must be positive");
  const double p_stop = lambda / (1.0 + lambda);
  GWRun run;
  run.offspring_mean = 1.0 / lambda;
  std::uint64_t total = 1;
  for (std::size_t gen = 1; gen <= max_gen; ++gen) {
    const std::uint64_t parents = run.generation_sizes.back();
    std::uint64_t next = 0;
    for (std::uint64_t i = 0; i < parents && total + next <= progeny_cap; ++i) next += rng.geometric(p_stop);
    total += next;
    if (total > progeny_cap) {
      run.capped = true;
      break;
    }
    run.generation_sizes.push_back(next);
    if (next == 0) {
      run.extinct = true;
      break;
    }
  }
  return run;
}

inline GWRun gw_simulate(double lambda, std::size_t max_gen, std::uint64_t progeny_cap, Seed seed) {
  Rng rng(seed);
  return gw_simulate(lambda, max_gen, progeny_cap, rng);
}

struct GWBatchSummary {
  double lambda = 0.0;
  std::size_t runs = 0;
  double extinct_frac = 0.0;
  double capped_frac = 0.0;
};

// Run i uses substream (master, i). Capped runs count as surviving.
inline GWBatchSummary gw_batch(double lambda, std::size_t runs, std::size_t max_gen, std::uint64_t progeny_cap,
                               std::uint64_t master) {
  GWBatchSummary s;
  s.lambda = lambda;
  s.runs = runs;
  std::size_t extinct = 0, capped = 0;
  for (std::size_t i = 0; i < runs; ++i) {
    const GWRun r = gw_simulate(lambda, max_gen, progeny_cap, Seed{master, i});
    extinct += r.extinct ? 1 : 0;
    capped += r.capped ? 1 : 0;
  }
  if (runs) {
    s.extinct_frac = static_cast<double>(extinct) / static_cast<double>(runs);
    s.capped_frac = static_cast<double>(capped) / static_cast<double>(runs);
  }
  return s;
}

inline nlohmann::json to_json(const GWBatchSummary& s) {
  return {{"lambda", s.lambda}, {"runs", s.runs}, {"extinct_frac", s.extinct_frac}, {"capped_frac", s.capped_frac}};
}

}  // namespace secperc
