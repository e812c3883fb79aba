#pragma once

/// Periodic and random potentials of J u' + V u = z u in Pauli coordinates.
///
/// A real symmetric 2x2 potential is written V = v_am s1 + v_sc s3 + v_el I.
/// The unit cell n is [n - 1/2, n + 1/2]; the periodic background and the
/// single-site potential are both piecewise constant on a grid of [-1/2, 1/2].

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace diracloc {

using RealMat2 = std::array<std::array<double, 2>, 2>;

struct PauliCoeffs {
  double am = 0.0;  // anomalous magnetic moment (sigma_1)
  double sc = 0.0;  // scalar (sigma_3)
  double el = 0.0;  // electrostatic (identity)

  PauliCoeffs operator+(const PauliCoeffs& o) const { return {am + o.am, sc + o.sc, el + o.el}; }
  PauliCoeffs operator*(double s) const { return {am * s, sc * s, el * s}; }
  bool operator==(const PauliCoeffs&) const = default;

  /// Operator norm of the matrix: |el| + sqrt(am^2 + sc^2).
  double matrix_norm() const;
  RealMat2 matrix() const;
};

/// Throws ConfigError when |M12 - M21| > 1e-12, reporting the asymmetry.
PauliCoeffs pauli_decompose(const RealMat2& m);

/// Piecewise-constant Pauli field on [-1/2, 1/2], extended 1-periodically.
class PauliField {
 public:
  PauliField();  // zero field, one segment
  PauliField(std::vector<double> breakpoints, std::vector<PauliCoeffs> coeffs);

  static PauliField constant(PauliCoeffs v);
  static PauliField uniform_grid(std::vector<PauliCoeffs> coeffs);
  /// Cell averages of a bounded measurable field on a uniform grid.
  static PauliField project(const std::function<RealMat2(double)>& f, int segments,
                            int samples_per_segment = 64);

  /// Value at x, reduced to the period [-1/2, 1/2).
  PauliCoeffs at(double x) const;

  const std::vector<double>& breakpoints() const { return breakpoints_; }
  const std::vector<PauliCoeffs>& coeffs() const { return coeffs_; }
  std::size_t segments() const { return coeffs_.size(); }

  double sup_norm() const;
  bool is_zero() const;

 private:
  std::vector<double> breakpoints_;
  std::vector<PauliCoeffs> coeffs_;
};

/// Elementary potential u, supported in [-1/2, 1/2].
class SingleSitePotential {
 public:
  enum class Kind { NormalForm, Electrostatic };

  SingleSitePotential();  // zero normal-form bump
  SingleSitePotential(PauliField field, Kind kind);

  /// q_sc = amplitude on [lo, hi], zero elsewhere.
  static SingleSitePotential mass_bump(double lo, double hi, double amplitude = 1.0);
  static SingleSitePotential electrostatic_bump(double lo, double hi, double amplitude = 1.0);

  const PauliField& field() const { return field_; }
  Kind kind() const { return kind_; }
  PauliCoeffs at(double x) const;  // zero outside [-1/2, 1/2]

  /// Grid measure of supp q_el intersected with supp (v_am^2 + v_sc^2) of the background.
  /// The electrostatic case needs this to be positive; callers report a warning otherwise.
  double overlap_measure(const PauliField& background) const;

 private:
  PauliField field_;
  Kind kind_;
};

/// Law of the i.i.d. couplings: finitely many atoms or a uniform interval.
class DisorderModel {
 public:
  enum class Kind { Discrete, Uniform };

  static DisorderModel discrete(std::vector<double> atoms, std::vector<double> probs,
                                std::uint64_t seed);
  static DisorderModel bernoulli(double p_one, std::uint64_t seed);
  static DisorderModel uniform(double lo, double hi, std::uint64_t seed);
  /// Single atom; allowed for pure periodic runs, flagged by nontrivial() == false.
  static DisorderModel degenerate(double value, std::uint64_t seed = 0);

  Kind kind() const { return kind_; }
  std::uint64_t seed() const { return seed_; }
  const std::vector<double>& atoms() const { return atoms_; }
  const std::vector<double>& probs() const { return probs_; }
  double lo() const { return lo_; }
  double hi() const { return hi_; }

  /// Value for cell n from the counter-based stream keyed by (seed, n).
  double draw(std::uint64_t seed, long n) const;
  bool contains(double lambda) const;
  bool nontrivial() const;
  /// The two support points used by the two-point reduction (smallest, largest).
  std::pair<double, double> extreme_support() const;
  double max_abs() const;
  double mean() const;

 private:
  DisorderModel() = default;
  Kind kind_ = Kind::Discrete;
  std::vector<double> atoms_;
  std::vector<double> probs_;
  std::vector<double> cdf_;
  double lo_ = 0.0, hi_ = 0.0;
  std::uint64_t seed_ = 0;
};

/// Counter-based 64-bit hash (SplitMix64 finalizer over the key pair).
std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t counter);
/// Uniform double in [0, 1) keyed by (seed, counter).
double counter_uniform(std::uint64_t seed, std::uint64_t counter);
/// Seed of the r-th independent realization derived from a master seed.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

struct DisorderRealization {
  long n_min = 0;
  long n_max = -1;
  std::vector<double> lambda;

  bool covers(long n) const { return n >= n_min && n <= n_max; }
  double at(long n) const;
  std::size_t size() const { return lambda.size(); }

  void write_csv(std::ostream& os) const;
  static DisorderRealization read_csv(std::istream& is);
};

/// Throws ConfigError on an empty window.
DisorderRealization sample_disorder(const DisorderModel& model, long n_min, long n_max,
                                    std::uint64_t seed);

struct Segment {
  double length = 0.0;
  PauliCoeffs v;
};

/// Contiguous piecewise-constant potential starting at x0.
struct Slice {
  double x0 = 0.0;
  std::vector<Segment> segments;

  double length() const;
  double x1() const { return x0 + length(); }
  /// Integral of |am| + |sc| (Gronwall exponent).
  double gronwall_integral() const;
  double sup_norm() const;
};

/// Grid obtained by merging the breakpoints of the background and the site potential.
class CellTemplate {
 public:
  CellTemplate() = default;
  CellTemplate(const PauliField& per, const SingleSitePotential& site);

  /// Segments of cell n for coupling lambda, with local coordinates shifted by n.
  Slice cell(long n, double lambda) const;
  std::size_t segments() const { return lengths_.size(); }
  const std::vector<double>& local_breakpoints() const { return points_; }
  PauliCoeffs coeff(std::size_t i, double lambda) const { return per_[i] + site_[i] * lambda; }

 private:
  std::vector<double> points_;
  std::vector<double> lengths_;
  std::vector<PauliCoeffs> per_;
  std::vector<PauliCoeffs> site_;
};

/// A one-dimensional medium: periodic background plus lambda_n u(x - n).
/// Without a realization every coupling is zero and the medium covers the whole line.
class Medium {
 public:
  Medium(PauliField per, SingleSitePotential site, DisorderRealization realization);
  explicit Medium(PauliField per);

  const PauliField& periodic() const { return per_; }
  const SingleSitePotential& site() const { return site_; }
  const std::optional<DisorderRealization>& realization() const { return realization_; }
  const CellTemplate& cell_template() const { return template_; }

  double coupling(long n) const;
  bool covers_cell(long n) const;
  bool covers(double a, double b) const;

  Slice cell(long n) const;
  /// Potential restricted to [a, b]; throws ConfigError outside the realization window.
  Slice slice(double a, double b) const;
  RealMat2 potential(double x) const;
  PauliCoeffs coeffs(double x) const;

 private:
  PauliField per_;
  SingleSitePotential site_;
  std::optional<DisorderRealization> realization_;
  CellTemplate template_;
};

/// V_per(x mod 1) + lambda_{floor(x+1/2)} u(x - floor(x+1/2)).
RealMat2 total_potential(const PauliField& per, const DisorderRealization& real,
                         const SingleSitePotential& site, double x);

/// Cell index containing x (cell n is [n - 1/2, n + 1/2)).
long cell_index(double x);

/// Periodic background + site potential + coupling law.
struct AndersonModel {
  PauliField per;
  SingleSitePotential site;
  DisorderModel law = DisorderModel::degenerate(0.0);

  /// The r-th realization over cells [n_min, n_max], keyed by (master seed, r).
  Medium medium(long n_min, long n_max, std::uint64_t master_seed, std::uint64_t r) const;
  /// Realization covering the box [a, b].
  Medium medium_for(double a, double b, std::uint64_t master_seed, std::uint64_t r) const;
  /// sup over cells and support of |el| + sqrt(am^2 + sc^2) of V_per + lambda u.
  double sup_norm() const;
  /// max over the support of the cell Gronwall integral of |am| + |sc|.
  double max_cell_gronwall() const;
};

/// Normal form of a slice after the gauge x -> R_phi(x), phi' = v_el, phi(x0) = 0.
///
/// A solution u of the original system maps to w = R_phi u, which solves
/// J w' + (a~ s1 + c~ s3) w = z w with (a~, c~) the coefficients rotated by 2 phi.
class NormalFormSlice {
 public:
  explicit NormalFormSlice(const Slice& slice);

  double phase(double x) const;
  /// (a~, c~) at x; the electrostatic part is zero.
  std::pair<double, double> coefficients(double x) const;
  /// Original coefficients at x.
  PauliCoeffs original(double x) const;
  /// Spinor gauge matrix [[cos phi, sin phi], [-sin phi, cos phi]] at x.
  RealMat2 spinor_gauge(double x) const;
  double x0() const { return slice_.x0; }
  double x1() const { return slice_.x1(); }

 private:
  std::size_t locate(double x) const;
  Slice slice_;
  std::vector<double> starts_;
  std::vector<double> phase_starts_;
};

NormalFormSlice gauge_to_normal_form(const Slice& slice);

}  // namespace diracloc
