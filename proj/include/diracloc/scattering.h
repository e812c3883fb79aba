#pragma once

/// Single-cell scattering against a periodic background, the Furstenberg matrices
/// C, g~0, s, the projective growth probe and critical-set detection.

#include <iosfwd>
#include <string>
#include <vector>

#include "diracloc/floquet.h"
#include "diracloc/potential.h"

namespace diracloc {

struct ScatteringData {
  double E = 0.0;
  cplx a, b;
  double A = 0.0, B = 0.0, alpha = 0.0, beta = 0.0;
  Mat2 g1;  // perturbed monodromy
};

/// Background cell at coupling lambda0, perturbed cell at lambda1.
/// Throws ConfigError outside the open bands and NumericalDegeneracy at band edges.
ScatteringData scattering_coefficients(const CellTemplate& tmpl, double lambda0, double lambda1,
                                       double E);
/// Perturbation lambda * u of the background `per`.
ScatteringData scattering_coefficients(const PauliField& per, const SingleSitePotential& site,
                                       double lambda, double E);

/// Background field of the template at coupling lambda, as a PauliField.
PauliField background_field(const CellTemplate& tmpl, double lambda);

struct FurstenbergTriple {
  Mat2 C, g_tilde, s;
};

/// [[cos t, sin t], [sin t, -cos t]].
Mat2 reflection(double t);

/// Throws NumericalDegeneracy when Im c_+ vanishes.
FurstenbergTriple furstenberg_matrices(const ScatteringData& sd, const FloquetData& fd);

/// ||s v(theta)||^2 = 1 + 2B(B + A cos(alpha + beta - 2 theta)), v(theta) = (cos theta, sin theta).
double growth_factor(const ScatteringData& sd, double theta);

/// Largest arc of theta in [0, pi) with R(theta) > 1 + delta: center +- half_width (mod pi).
struct GrowthWindow {
  double center = 0.0, half_width = 0.0;
  bool contains(double theta) const;
  double measure() const { return 2.0 * half_width; }
};
GrowthWindow growth_window(const ScatteringData& sd, double delta = 1e-3);

struct GrowthProbe {
  std::vector<double> log_norms;  // log of the norm after every application of s
  std::vector<double> angles;  // projective angles visited, in [0, pi)
};

/// Apply s inside the growth window, otherwise rotate by g~0; `iterations` applications of s.
/// Throws NumericalDegeneracy for B = 0.
GrowthProbe projective_growth_probe(const ScatteringData& sd, const FloquetData& fd,
                                    int iterations, double theta0 = 0.0);

/// Real gap energy: g1 v_i = a_i rho_i v_i + b_i rho_j v_j in the basis with |rho_1| < 1 < |rho_2|.
/// Unit eigenvectors are oriented to have positive overlap with the optional references,
/// so that the b_i vary continuously along a scan.
struct GapCoefficients {
  double a1 = 0, b1 = 0, a2 = 0, b2 = 0;
  double rho1 = 0, rho2 = 0;
  Vec2 v1, v2;
};
GapCoefficients gap_coefficients(const CellTemplate& tmpl, double lambda0, double lambda1,
                                 double E, const GapCoefficients* reference = nullptr);

enum class CriticalReason { BZero, DZero, BandEdge, GapCoeffZero };
std::string to_string(CriticalReason r);

struct CriticalSet {
  struct Entry {
    double E;
    CriticalReason reason;
  };
  std::vector<Entry> entries;

  double distance(double e) const;
  std::size_t count(CriticalReason r) const;
  void write_json(std::ostream& os) const;
};

/// Two-point reduction on the extreme support points of the law.
CriticalSet critical_set_scan(const PauliField& per, const SingleSitePotential& site,
                              const DisorderModel& law, double lo, double hi, double resolution);

/// CSV with columns E, re_a, im_a, re_b, im_b, abs_b.
void write_scattering_csv(std::ostream& os, const std::vector<ScatteringData>& rows);

}  // namespace diracloc
