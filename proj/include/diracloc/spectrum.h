#pragma once

/// Dirichlet boxes: Pruefer counting, eigenvalues and eigenfunctions, the box Green
/// function, Schur bounds of restricted resolvents, and the Wegner / H1 / SLI probes.

#include <cstdint>
#include <iosfwd>
#include <utility>
#include <vector>

#include "diracloc/linalg.h"
#include "diracloc/potential.h"

namespace diracloc {

/// Box [c - L/2, c + L/2] with psi_up = 0 at both ends.
class DirichletBox {
 public:
  /// Throws ConfigError for L <= 0 or a box outside the medium.
  DirichletBox(const Medium& medium, double center, double length);
  /// The box spanned by the slice.
  explicit DirichletBox(Slice slice);

  double center() const { return center_; }
  double length() const { return length_; }
  double left() const { return slice_.x0; }
  double right() const { return slice_.x0 + length_; }
  const Slice& slice() const { return slice_; }

 private:
  Slice slice_;
  double center_ = 0.0, length_ = 0.0;
};

/// Box of length L centred at c for realization r of the model.
DirichletBox model_box(const AndersonModel& model, double center, double length,
                       std::uint64_t seed, std::uint64_t r);

/// Continuous phase at the right edge for psi = r (sin theta, cos theta), theta(left) = 0.
/// Increasing in E; the eigenvalues solve theta = k pi.
double pruefer_phase(const DirichletBox& box, double E);

/// floor(theta / pi), snapped to the nearest integer when within 1e-10.
long pruefer_index(const DirichletBox& box, double E);

/// Number of eigenvalues in (E1, E2]. Throws ConfigError unless E1 < E2.
long pruefer_count(const DirichletBox& box, double E1, double E2);

/// psi_up / |psi| at the right edge for the left Dirichlet solution: sin theta.
double shooting_residual(const DirichletBox& box, double E);

struct EigenList {
  std::vector<long> index;  // Pruefer winding number of each eigenvalue
  std::vector<double> E;

  std::size_t size() const { return E.size(); }
  /// Columns index, E.
  void write_csv(std::ostream& os) const;
};

/// Eigenvalues in (E1, E2], sorted, each refined to well below 1e-9.
EigenList dirichlet_eigenvalues(const DirichletBox& box, double E1, double E2);

/// Spinor value kept as a unit direction and a log scale.
struct ScaledVec {
  Vec2 dir;
  double log_norm = 0.0;
};

/// Left (psi(left) = (0,1)) and right (psi(right) = (0,1)) Dirichlet solutions at z.
class BoxSolutions {
 public:
  BoxSolutions(const DirichletBox& box, cplx z);

  ScaledVec left(double x) const;
  ScaledVec right(double x) const;
  const DirichletBox& box() const { return box_; }
  cplx z() const { return z_; }

 private:
  std::size_t locate(double x) const;
  DirichletBox box_;
  cplx z_;
  std::vector<double> starts_;
  std::vector<ScaledVec> left_at_start_;
  std::vector<ScaledVec> right_at_end_;
};

struct Eigenfunction {
  double E = 0.0;
  std::vector<double> x;
  std::vector<Vec2> psi;  // L2-normalized, psi_down(left) > 0
  double norm_check = 0.0;  // L2 norm of the stored function, by quadrature
  double boundary_residual = 0.0;  // jump of the normalized glued solution at the matching point
  double localization_center = 0.0;
  double m_hat = 0.0;  // decay rate
  double fit_rms = 0.0;
  bool localized = false;

  /// Columns x, abs_psi, psi_up, psi_down.
  void write_csv(std::ostream& os) const;
};

/// Eigenfunction sampled every `step` (at most), glued from the left solution and the
/// rescaled right solution at the maximum of |psi_left| |psi_right|. The decay rate is fitted by least squares
/// of log|psi| against |x - center| away from a 10% margin at each edge.
/// A state counts as localized when m_hat * L > 4 and the fit rms stays below `rms_threshold`.
Eigenfunction eigenfunction(const DirichletBox& box, double E, double step = 0.05,
                            double rms_threshold = 3.0);

/// G(x, y) = u+(x) u-(y)^T / W for x >= y and u-(x) u+(y)^T / W otherwise,
/// u- the left and u+ the right Dirichlet solution, W = u+_up u-_down - u-_up u+_down.
class BoxGreen {
 public:
  /// Throws NumericalDegeneracy when the normalized Wronskian is below 1e-12.
  BoxGreen(const DirichletBox& box, cplx z);

  Mat2 kernel(double x, double y) const;
  /// log |G(x, y)| (operator norm of the rank-one kernel).
  double log_abs_kernel(double x, double y) const;
  /// Wronskian of the unit-normalized solutions at the box center.
  cplx normalized_wronskian() const { return w_dir_; }
  double log_abs_wronskian() const { return log_w_; }
  const BoxSolutions& solutions() const { return sol_; }

 private:
  BoxSolutions sol_;
  cplx w_dir_;
  double log_w_ = 0.0;
};

Mat2 green_kernel(const DirichletBox& box, cplx z, double x, double y);

/// Finite union of closed intervals.
using IntervalSet = std::vector<std::pair<double, double>>;

/// Boundary strip {x : L/2 - 3/2 <= |x - c| <= L/2 - 1/2}.
IntervalSet boundary_strip(double center, double length);
/// [c - l/2, c + l/2].
IntervalSet box_interval(double center, double length);

/// log of the Schur-test bound sqrt(max row integral * max column integral) of |G| on A x B.
/// Integrals use the midpoint rule with `points_per_unit` nodes per unit length.
double log_schur_bound(const BoxGreen& green, const IntervalSet& A, const IntervalSet& B,
                       int points_per_unit = 16);

struct Regularity {
  bool regular = false;
  double log_bound = 0.0;  // log of the Schur bound of |Gamma R chi_{L/3}|
  double log_threshold = 0.0;  // -m L / 2
};

/// Throws NumericalDegeneracy when an eigenvalue lies within 1e-10 of E,
/// ConfigError for L <= 6.
Regularity box_regularity(const DirichletBox& box, double E, double m);

struct WegnerResult {
  double E = 0.0, L = 0.0;
  long R = 0;
  std::uint64_t seed = 0;
  std::vector<double> eta;
  std::vector<long> hits;
  std::vector<double> probability;
  double slope = 0.0, slope_se = 0.0;  // weighted log-log fit, zero counts dropped
  std::size_t fit_points = 0;

  void write_json(std::ostream& os) const;
};

/// P(dist(E, spec) < eta) over R boxes of length L centred at 0, for eta = eta_max 2^-k,
/// k = 0 .. levels - 1, all levels on the same realizations. Throws ConfigError for R < 50.
WegnerResult wegner_probe(const AndersonModel& model, double E, double L, double eta_max,
                          int levels, long R, std::uint64_t seed);

struct H1Result {
  double E = 0.0, L0 = 0.0, theta = 0.0;
  long R = 0;
  std::uint64_t seed = 0;
  double probability = 0.0;
  double target = 1.0 - 1.0 / 841.0;
  bool exceeds_target = false;

  void write_json(std::ostream& os) const;
};

/// Fraction of boxes with the Schur bound of |Gamma R chi_{L0/3}| at most L0^-theta.
/// Energies within 1e-10 of the box spectrum count as failures. L0 must be a multiple of 6.
H1Result h1_probe(const AndersonModel& model, double E, double L0, double theta, long R,
                  std::uint64_t seed);

struct SliResult {
  double E = 0.0, L = 0.0;
  std::uint64_t seed = 0;
  std::vector<double> ratios;
  double kappa_hat = 0.0;

  void write_json(std::ostream& os) const;
};

/// Ratio |Gamma_{x,L} R chi_{y,l''}| / (|Gamma_{y',l'} R_{y',l'} chi_{y,l''}| |Gamma_{x,L} R Gamma_{y',l'}|)
/// of Schur bounds over `samples` random nested boxes inside [-L/2, L/2]; kappa_hat is the max.
SliResult sli_ratio(const AndersonModel& model, double E, double L, int samples,
                    std::uint64_t seed);

}  // namespace diracloc
