#pragma once

/// Monte Carlo Lyapunov exponents of random transfer-matrix products.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "diracloc/potential.h"
#include "diracloc/scattering.h"

namespace diracloc {

struct LyapunovEstimate {
  double E = 0.0;
  double gamma_hat = 0.0;
  double std_error = 0.0;
  long n = 0;
  long R = 0;
  std::uint64_t seed = 0;
};

/// Mean over R realizations of (1/n) log ||U_E(n)|| with std_error = std / sqrt(R).
/// Realization r uses the cells 1..n of AndersonModel::medium(1, n, seed, r).
LyapunovEstimate lyapunov_estimate(const AndersonModel& model, double E, long n, long R,
                                   std::uint64_t seed);

/// One orbit of n * R cells; the error is estimated from R batch means.
LyapunovEstimate lyapunov_single_orbit(const AndersonModel& model, double E, long n, long R,
                                       std::uint64_t seed);

struct HolderFit {
  double alpha_hat = 0.0;
  double log_c_hat = 0.0;
  double ci_lo = 0.0, ci_hi = 0.0;  // 95% interval for alpha
  std::size_t pairs = 0;
};

struct LyapunovCurve {
  std::vector<LyapunovEstimate> points;
  HolderFit fit;
  std::vector<std::string> warnings;

  void write_csv(std::ostream& os) const;
  void write_fit_json(std::ostream& os) const;
};

/// Least-squares fit of log|f(E) - f(E')| against log|E - E'| over dyadic index pairs (i, i + 2^k).
HolderFit holder_fit(const std::vector<double>& grid, const std::vector<double>& values);

/// Every energy uses the same seeds (common random numbers).
/// Grid points within `margin` of a critical energy are annotated in `warnings`.
LyapunovCurve lyapunov_curve(const AndersonModel& model, const std::vector<double>& grid, long n,
                             long R, std::uint64_t seed, const CriticalSet* critical = nullptr,
                             double margin = 0.0);

/// max over the support of the cell integral of |am| + |sc|; bounds gamma from above.
double lyapunov_upper_bound(const AndersonModel& model);

/// Fraction of realizations with exp((gamma - eps) n) <= ||U_E(n) x|| <= exp((gamma + eps) n), x = (1, 0).
double large_deviation_probe(const AndersonModel& model, double E, long n, long R, double eps,
                             double gamma_ref, std::uint64_t seed);

/// Mean of ||U_E(n) x||^(-delta), x = (1, 0).
double inverse_moment(const AndersonModel& model, double E, long n, long R, double delta,
                      std::uint64_t seed);

}  // namespace diracloc
