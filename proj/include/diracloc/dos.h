#pragma once

/// Integrated density of states of Dirichlet boxes, the log-weighted Thouless integral
/// and the Kotani w-function.

#include <cstdint>
#include <iosfwd>
#include <utility>
#include <vector>

#include "diracloc/linalg.h"
#include "diracloc/lyapunov.h"
#include "diracloc/potential.h"

namespace diracloc {

/// mu = N - N0 given at increasing nodes t, linear in between and constant outside,
/// plus point masses (t_k, a_k) inside [t.front(), t.back()].
struct SignedMeasure {
  std::vector<double> t, mu;
  std::vector<std::pair<double, double>> atoms;

  /// Throws ConfigError for unsorted or non-finite data and atoms outside the nodes.
  void validate() const;
};

/// Integral of log|(E - t)/(t - i)| d mu(t), in closed form per linear piece.
double log_weight_integral(double E, const SignedMeasure& m);

/// Integral of (1 + t z)/((t - z)(1 + t^2)) mu(t) dt over the line, tails included.
cplx herglotz_integral(cplx z, const SignedMeasure& m);

/// Integral of mu(t) / (t - z)^2 dt over the line, tails included.
cplx stieltjes_derivative(cplx z, const SignedMeasure& m);

struct IdsTable {
  std::vector<double> E;
  std::vector<double> N_hat;
  double L = 0.0;
  long R = 0;
  std::uint64_t seed = 0;
  double sup_norm = 0.0;  // of the total potential

  static double N0(double e);
  /// (2/pi) ||W|| + 4/L.
  double bound() const;
  double max_deviation() const;
  /// Least-squares slope of N_hat against E.
  double slope() const;
  SignedMeasure measure() const;
  /// Columns E, N_hat, N0.
  void write_csv(std::ostream& os) const;
};

/// N_hat(E) = average over R boxes [-L/2, L/2] of (k(E) - k(0)) / L, k the Pruefer index.
/// Throws ConfigError for L < 20, R < 20 or an unsorted grid.
IdsTable ids_estimate(const AndersonModel& model, const std::vector<double>& grid, double L,
                      long R, std::uint64_t seed);

struct ThoulessFit {
  double alpha_hat = 0.0;
  std::vector<double> E, gamma, integral, residual;
  double rms = 0.0;
  double truncation_bound = 0.0;

  void write_json(std::ostream& os) const;
};

/// gamma(E) = -alpha + integral(E); alpha fitted by least squares.
/// The table must cover [min E - margin, max E + margin] (ConfigError otherwise).
ThoulessFit thouless_check(const LyapunovCurve& curve, const IdsTable& ids, double margin = 5.0);

struct KotaniSample {
  cplx z;
  cplx w, w0;
  double std_error = 0.0;  // of |w| over realizations
  long R = 0;
  double X = 0.0;
  std::uint64_t seed = 0;

  /// -Re(w - w0).
  double gamma() const { return -(w - w0).real(); }
};

/// w0(z) = i z, the value of the w formula for the zero potential.
cplx kotani_w0(cplx z);

/// w = mean of psi_up'/psi_up for the solution decaying at +infinity, averaged over the
/// positions in [0, X - 25/Im z] and R realizations. The solution is the backward propagation
/// of (0, 1) from X. Throws ConfigError for Im z < 0.1 or X < 50 / Im z.
KotaniSample kotani_w(const AndersonModel& model, cplx z, long R, double X, std::uint64_t seed);

/// Central difference (w(z + h) - w(z - h)) / 2h on common realizations.
cplx kotani_derivative(const AndersonModel& model, cplx z, double h, long R, double X,
                       std::uint64_t seed);

/// w0'(z) + the Stieltjes form of the table: i + integral (N - N0)(t) / (t - z)^2 dt.
cplx kotani_derivative_from_ids(cplx z, const IdsTable& ids);

/// Columns re_z, im_z, re_w, im_w.
void write_kotani_csv(std::ostream& os, const std::vector<KotaniSample>& rows);

}  // namespace diracloc
