#pragma once

/// Monodromy, discriminant, stability intervals and Floquet solutions of a periodic background.

#include <iosfwd>
#include <string>
#include <vector>

#include "diracloc/linalg.h"
#include "diracloc/potential.h"
#include "diracloc/transfer.h"

namespace diracloc {

/// Points with |D -+ 2| below this are band edges.
inline constexpr double kBandEdgeTol = 1e-7;

enum class Stability { Band, Gap, Edge, Complex };

std::string to_string(Stability s);

struct FloquetData {
  cplx z;
  Mat2 g0;  // columns u_N(1/2), u_D(1/2)
  cplx D;
  cplx rho_plus, rho_minus;
  cplx c_plus, c_minus;
  Stability tag = Stability::Complex;

  Vec2 v_plus() const { return {1.0, c_plus}; }
  Vec2 v_minus() const { return {1.0, c_minus}; }
};

Mat2 monodromy(const PauliField& per, cplx z);

/// Roots of rho^2 - D rho + 1 = 0 as (D +- i sqrt(4 - D^2)) / 2 and c = (rho - g0_11) / g0_12.
FloquetData floquet_data(const Mat2& g0, cplx z);
FloquetData floquet_data(const PauliField& per, cplx z);

struct StabilityIntervalList {
  double lo = 0.0, hi = 0.0;
  std::vector<std::pair<double, double>> bands;
  std::vector<std::pair<double, double>> gaps;  // complement inside [lo, hi]; may be single points
  std::vector<double> edges;                    // sorted, excluding the window ends

  bool in_band(double e) const;
  /// Distance from e to the nearest edge (infinity without edges).
  double edge_distance(double e) const;
  void write_json(std::ostream& os) const;
};

/// Sign changes of |D| - 2 on the grid, plus tangential touchings, refined to ~1e-12.
StabilityIntervalList stability_scan(const PauliField& per, double lo, double hi,
                                     double resolution);

/// CSV with columns E, re_D, im_D, in_band.
void write_band_csv(std::ostream& os, const PauliField& per, const std::vector<double>& grid);

struct FloquetSolutions {
  FloquetData data;
  Vec2 v_plus, v_minus;  // values at -1/2
};

/// Throws NumericalDegeneracy at band edges or when u_D(1/2, z) vanishes.
FloquetSolutions floquet_solutions(const PauliField& per, cplx z);

/// phi(x) for x in [-1/2, -1/2 + periods] with phi(-1/2) = v.
SolutionTrace floquet_trace(const PauliField& per, const Vec2& v, cplx z, int periods,
                            double step);

/// Ratio down/up at -1/2 of the eigenvector whose eigenvalue has modulus below one.
struct WeylPeriodic {
  cplx m;
  cplx rho;  // selected eigenvalue, |rho| < 1
  Vec2 v;
};

/// Needs Im z > 0; a modulus tie throws NumericalDegeneracy.
WeylPeriodic weyl_m_periodic(const PauliField& per, cplx z);

/// Floquet roots along an energy path, continued by nearest-root matching.
std::vector<std::pair<cplx, cplx>> track_floquet_branches(const PauliField& per,
                                                          const std::vector<cplx>& path);

}  // namespace diracloc
