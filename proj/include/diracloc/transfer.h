#pragma once

/// Exact propagation of J u' + V u = z u through piecewise-constant media.

#include <iosfwd>
#include <vector>

#include "diracloc/linalg.h"
#include "diracloc/potential.h"

namespace diracloc {

/// J^{-1}(z - V) for a constant potential; traceless.
Mat2 segment_generator(const PauliCoeffs& v, cplx z);

/// exp(t A) for the generator of v, via cosh/sinh of the eigenvalue k with k^2 = am^2 + sc^2 - (z - el)^2.
Mat2 segment_exponential(const PauliCoeffs& v, cplx z, double t);

inline Mat2 segment_transfer(const Segment& seg, cplx z) {
  return segment_exponential(seg.v, z, seg.length);
}

/// Ordered product over the slice: maps u(x0) to u(x1).
Mat2 cell_transfer(const Slice& slice, cplx z);

/// Transfer matrix of the medium from a to b; b < a gives the inverse map.
Mat2 transfer(const Medium& medium, double a, double b, cplx z);

struct SolutionTrace {
  cplx z;
  std::vector<double> x;
  std::vector<Vec2> psi;

  /// Columns x, Re psi_up, Im psi_up, Re psi_down, Im psi_down.
  void write_csv(std::ostream& os) const;
};

/// Solution with psi(y) = initial, sampled from y towards x (either direction).
/// Samples are spaced by at most `step` and include every segment boundary.
SolutionTrace propagate_solution(const Medium& medium, double y, double x, Vec2 initial, cplx z,
                                 double step);
SolutionTrace propagate_solution(const Slice& slice, Vec2 initial, cplx z, double step);

/// Matrix product kept as a unit-norm direction times exp(log_norm).
struct RenormalizedProduct {
  Mat2 direction = Mat2::identity();
  double log_norm = 0.0;
  long n = 0;

  /// Left-multiplies by g and rescales by the operator norm.
  void apply(const Mat2& g);
  Mat2 value() const;
};

/// Vector analogue of RenormalizedProduct.
struct RenormalizedVector {
  Vec2 direction{1.0, 0.0};
  double log_norm = 0.0;

  void apply(const Mat2& g);
};

/// Cell transfer matrices of one medium template at a fixed energy, cached by coupling value.
class CellTransferCache {
 public:
  CellTransferCache(const CellTemplate& tmpl, cplx z, std::size_t capacity = 16);
  Mat2 get(double lambda);

 private:
  const CellTemplate& tmpl_;
  cplx z_;
  std::size_t capacity_;
  std::vector<std::pair<double, Mat2>> entries_;
};

/// U_E(n) = g(n) ... g(1) with renormalization after each cell.
RenormalizedProduct transfer_product(const Medium& medium, cplx z, long n);

/// exp(2 * integral of |am| + |sc|): bound on ||g||^2 for real energy.
double gronwall_bound(const Slice& slice);

/// Constant C with ||g(E) - g(E')|| <= C |E - E'| for real E, E'.
double lipschitz_constant(const Slice& slice, double e1, double e2);

}  // namespace diracloc
