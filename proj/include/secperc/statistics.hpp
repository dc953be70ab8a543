#pragma once

// Goodness-of-fit helpers for comparing empirical counts with a PMF.

#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/special_functions/gamma.hpp>

namespace secperc {

struct GofResult {
  double statistic = 0.0;
  std::size_t dof = 0;
  double p_value = 1.0;
  std::size_t bins = 0;
  std::size_t dof2 = 0;  // denominator degrees of freedom of an F statistic
};

// Pearson chi-square test of counts[k] against pmf(k). Bins k = 0, 1, ...
// are used while their expected count is at least min_expected; everything
// beyond is pooled into one tail bin, which is merged backwards if it is
// itself too small. dof = bins - 1.
inline GofResult chi_square_gof(const std::map<std::size_t, std::size_t>& counts,
                                const std::function<double(std::size_t)>& pmf, double min_expected = 5.0) {
  std::size_t n = 0;
  for (const auto& [k, c] : counts) n += c;
  if (n == 0) throw std::invalid_argument("chi_square_gof: empty sample");
  const double total = static_cast<double>(n);

  std::vector<double> expected, observed;
  double mass = 0.0;
  std::size_t k = 0;
  for (;; ++k) {
    const double p = pmf(k);
    if (total * p < min_expected || total * (1.0 - mass - p) < min_expected) break;
    expected.push_back(total * p);
    const auto it = counts.find(k);
    observed.push_back(it == counts.end() ? 0.0 : static_cast<double>(it->second));
    mass += p;
  }
  // Tail bin: k and above.
  double tail_obs = 0.0;
  for (auto it = counts.lower_bound(k); it != counts.end(); ++it) tail_obs += static_cast<double>(it->second);
  double tail_exp = total * std::max(0.0, 1.0 - mass);
  while (!expected.empty() && tail_exp < min_expected) {
    tail_exp += expected.back();
    tail_obs += observed.back();
    expected.pop_back();
    observed.pop_back();
  }
  expected.push_back(tail_exp);
  observed.push_back(tail_obs);

  GofResult r;
  r.bins = expected.size();
  for (std::size_t i = 0; i < expected.size(); ++i) {
    if (expected[i] <= 0.0) continue;
    const double d = observed[i] - expected[i];
    r.statistic += d * d / expected[i];
  }
  r.dof = r.bins > 1 ? r.bins - 1 : 0;
  r.p_value = r.dof ? boost::math::gamma_q(0.5 * static_cast<double>(r.dof), 0.5 * r.statistic) : 1.0;
  return r;
}

// Goodness of fit for samples made of spatially dependent blocks. Degrees of
// neighbouring vertices are strongly correlated, so a Pearson test on one
// window overstates the evidence. Here each block b contributes the residual
// vector r_b[k] = count_b[k] - n_b * pmf(k) over the bins k = 0..K-1 whose
// pooled expected count is at least min_expected per block (the remaining
// tail is implied and dropped). Under the law the residuals have mean zero;
// blocks are treated as independent and tested with Hotelling's T^2, reported
// as F = (B-K)/(K(B-1)) T^2 on (K, B-K) degrees of freedom.
inline GofResult batch_means_gof(const std::vector<std::map<std::size_t, std::size_t>>& blocks,
                                 const std::function<double(std::size_t)>& pmf, double min_expected = 2.0) {
  const std::size_t b = blocks.size();
  std::vector<double> sizes(b, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < b; ++i) {
    for (const auto& [k, c] : blocks[i]) sizes[i] += static_cast<double>(c);
    total += sizes[i];
  }
  if (total == 0.0) throw std::invalid_argument("batch_means_gof: empty sample");

  std::vector<double> probs;
  double mass = 0.0;
  for (std::size_t k = 0;; ++k) {
    const double p = pmf(k);
    if (total * p < min_expected * static_cast<double>(b) || total * (1.0 - mass - p) < min_expected * static_cast<double>(b)) break;
    probs.push_back(p);
    mass += p;
  }
  const std::size_t kb = probs.size();
  if (kb == 0 || b < kb + 2) throw std::invalid_argument("batch_means_gof: too few blocks for the number of bins");

  Eigen::MatrixXd r(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(kb));
  for (std::size_t i = 0; i < b; ++i)
    for (std::size_t k = 0; k < kb; ++k) {
      const auto it = blocks[i].find(k);
      const double obs = it == blocks[i].end() ? 0.0 : static_cast<double>(it->second);
      r(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = obs - sizes[i] * probs[k];
    }
  const Eigen::VectorXd mean = r.colwise().mean().transpose();
  const Eigen::MatrixXd centred = r.rowwise() - mean.transpose();
  const Eigen::MatrixXd cov = centred.transpose() * centred / static_cast<double>(b - 1);
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(cov);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
    throw std::invalid_argument("batch_means_gof: singular block covariance");
  const double t2 = static_cast<double>(b) * mean.dot(ldlt.solve(mean));

  const double p = static_cast<double>(kb), bb = static_cast<double>(b);
  GofResult res;
  res.bins = kb;
  res.dof = kb;
  res.dof2 = b - kb;
  res.statistic = (bb - p) / (p * (bb - 1.0)) * t2;
  res.p_value = boost::math::cdf(boost::math::complement(boost::math::fisher_f_distribution<double>(p, bb - p), res.statistic));
  return res;
}

}  // namespace secperc
