#include "diracloc/transfer.h"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

#include "diracloc/errors.h"

namespace diracloc {

Mat2 segment_generator(const PauliCoeffs& v, cplx z) {
  return {-v.am, z - v.el + v.sc, v.el + v.sc - z, v.am};
}

Mat2 segment_exponential(const PauliCoeffs& v, cplx z, double t) {
  const Mat2 a = segment_generator(v, z);
  const cplx w = z - v.el;
  const cplx k2 = v.am * v.am + v.sc * v.sc - w * w;
  const cplx s2 = k2 * (t * t);
  cplx ch;
  cplx sh_over_k;  // sinh(t k) / k
  if (std::abs(s2) < 1e-4) {
    ch = 1.0 + s2 / 2.0 * (1.0 + s2 / 12.0 * (1.0 + s2 / 30.0 * (1.0 + s2 / 56.0)));
    sh_over_k = t * (1.0 + s2 / 6.0 * (1.0 + s2 / 20.0 * (1.0 + s2 / 42.0 * (1.0 + s2 / 72.0))));
  } else {
    const cplx k = std::sqrt(k2);
    ch = std::cosh(t * k);
    sh_over_k = std::sinh(t * k) / k;
  }
  return Mat2::identity() * ch + a * sh_over_k;
}

Mat2 cell_transfer(const Slice& slice, cplx z) {
  if (slice.segments.empty()) throw ConfigError("cell_transfer: empty slice");
  Mat2 g = Mat2::identity();
  for (const auto& seg : slice.segments) {
    if (!(seg.length > 0.0)) throw ConfigError("cell_transfer: nonpositive segment length");
    g = segment_transfer(seg, z) * g;
  }
  return g;
}

Mat2 transfer(const Medium& medium, double a, double b, cplx z) {
  if (a == b) return Mat2::identity();
  if (a < b) return cell_transfer(medium.slice(a, b), z);
  return cell_transfer(medium.slice(b, a), z).inverse();
}

void SolutionTrace::write_csv(std::ostream& os) const {
  os << "x,re_up,im_up,re_down,im_down\n" << std::setprecision(17);
  for (std::size_t i = 0; i < x.size(); ++i) {
    os << x[i] << ',' << psi[i].up.real() << ',' << psi[i].up.imag() << ','
       << psi[i].down.real() << ',' << psi[i].down.imag() << '\n';
  }
}

namespace {

void check_initial(const Vec2& v) {
  if (v.norm() == 0.0) throw ConfigError("propagate_solution: zero initial vector");
}

/// Samples one segment (starting at position x with value u) forward or backward.
void sample_segment(SolutionTrace& tr, const Segment& seg, double x, double dir, Vec2& u,
                    double step) {
  const int pieces = std::max(1, static_cast<int>(std::ceil(seg.length / step - 1e-12)));
  const double h = seg.length / pieces;
  const Mat2 g = segment_exponential(seg.v, tr.z, dir * h);
  for (int p = 1; p <= pieces; ++p) {
    u = g * u;
    tr.x.push_back(p == pieces ? x + dir * seg.length : x + dir * h * p);
    tr.psi.push_back(u);
  }
}

}  // namespace

SolutionTrace propagate_solution(const Slice& slice, Vec2 initial, cplx z, double step) {
  check_initial(initial);
  if (!(step > 0.0)) throw ConfigError("propagate_solution: step must be positive");
  SolutionTrace tr{z, {slice.x0}, {initial}};
  double x = slice.x0;
  for (const auto& seg : slice.segments) {
    sample_segment(tr, seg, x, 1.0, initial, step);
    x += seg.length;
  }
  return tr;
}

SolutionTrace propagate_solution(const Medium& medium, double y, double x, Vec2 initial, cplx z,
                                 double step) {
  if (x >= y) return propagate_solution(medium.slice(y, x), initial, z, step);
  check_initial(initial);
  if (!(step > 0.0)) throw ConfigError("propagate_solution: step must be positive");
  const Slice s = medium.slice(x, y);
  SolutionTrace tr{z, {y}, {initial}};
  double pos = y;
  for (auto it = s.segments.rbegin(); it != s.segments.rend(); ++it) {
    sample_segment(tr, *it, pos, -1.0, initial, step);
    pos -= it->length;
  }
  return tr;
}

void RenormalizedProduct::apply(const Mat2& g) {
  direction = g * direction;
  const double s = direction.op_norm();
  if (!(s > 0.0) || !std::isfinite(s)) {
    throw NumericalDegeneracy("renormalized product: degenerate scale");
  }
  direction = direction * (1.0 / s);
  log_norm += std::log(s);
  ++n;
}

Mat2 RenormalizedProduct::value() const { return direction * std::exp(log_norm); }

void RenormalizedVector::apply(const Mat2& g) {
  direction = g * direction;
  const double s = direction.norm();
  if (!(s > 0.0) || !std::isfinite(s)) {
    throw NumericalDegeneracy("renormalized vector: degenerate scale");
  }
  direction = direction * (1.0 / s);
  log_norm += std::log(s);
}

CellTransferCache::CellTransferCache(const CellTemplate& tmpl, cplx z, std::size_t capacity)
    : tmpl_(tmpl), z_(z), capacity_(capacity) {}

Mat2 CellTransferCache::get(double lambda) {
  for (const auto& [lam, g] : entries_) {
    if (lam == lambda) return g;
  }
  const Mat2 g = cell_transfer(tmpl_.cell(0, lambda), z_);
  if (entries_.size() < capacity_) entries_.emplace_back(lambda, g);
  return g;
}

RenormalizedProduct transfer_product(const Medium& medium, cplx z, long n) {
  if (n < 0) throw ConfigError("transfer_product: negative cell count");
  RenormalizedProduct p;
  if (n == 0) return p;
  if (!medium.covers_cell(1) || !medium.covers_cell(n)) {
    throw ConfigError("transfer_product: realization window does not cover cells 1.." +
                      std::to_string(n));
  }
  CellTransferCache cache(medium.cell_template(), z);
  for (long k = 1; k <= n; ++k) p.apply(cache.get(medium.coupling(k)));
  return p;
}

double gronwall_bound(const Slice& slice) { return std::exp(2.0 * slice.gronwall_integral()); }

double lipschitz_constant(const Slice& slice, double e1, double e2) {
  double expo = 0.0;
  for (const auto& seg : slice.segments) {
    const double r = std::hypot(seg.v.am, seg.v.sc);
    expo += seg.length * (std::abs(seg.v.el - e1) + std::abs(seg.v.el - e2) + 2.0 * r);
  }
  return slice.length() * std::exp(expo);
}

}  // namespace diracloc
