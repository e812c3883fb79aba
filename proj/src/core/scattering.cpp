#include "diracloc/scattering.h"

#include <algorithm>
#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <limits>
#include <ostream>

#include "diracloc/errors.h"
#include "diracloc/io.h"
#include "json.hpp"

namespace diracloc {

PauliField background_field(const CellTemplate& tmpl, double lambda) {
  std::vector<PauliCoeffs> cs;
  for (std::size_t i = 0; i < tmpl.segments(); ++i) cs.push_back(tmpl.coeff(i, lambda));
  return PauliField(tmpl.local_breakpoints(), std::move(cs));
}

ScatteringData scattering_coefficients(const CellTemplate& tmpl, double lambda0, double lambda1,
                                       double E) {
  const Mat2 g0 = cell_transfer(tmpl.cell(0, lambda0), E);
  const FloquetData fd = floquet_data(g0, E);
  if (fd.tag == Stability::Edge) {
    throw NumericalDegeneracy("scattering: energy at a band edge");
  }
  if (fd.tag != Stability::Band) {
    throw ConfigError("scattering: energy is not inside a stability interval");
  }
  if (std::abs(g0.b) < 1e-12) {
    throw NumericalDegeneracy("scattering: Dirichlet eigenvalue inside a band");
  }
  ScatteringData sd;
  sd.E = E;
  sd.g1 = cell_transfer(tmpl.cell(0, lambda1), E);
  const Mat2 basis =
      Mat2::from_columns(fd.v_plus() * fd.rho_plus, fd.v_minus() * fd.rho_minus);
  const cplx det = basis.det();
  if (std::abs(det) < 1e-12) {
    throw NumericalDegeneracy("scattering: Floquet solutions are colinear (missed band edge)");
  }
  const Vec2 ab = basis.inverse() * (sd.g1 * fd.v_plus());
  sd.a = ab.up;
  sd.b = ab.down;
  sd.A = std::abs(sd.a);
  sd.B = std::abs(sd.b);
  sd.alpha = std::arg(sd.a);
  sd.beta = std::arg(sd.b);
  return sd;
}

ScatteringData scattering_coefficients(const PauliField& per, const SingleSitePotential& site,
                                       double lambda, double E) {
  return scattering_coefficients(CellTemplate(per, site), 0.0, lambda, E);
}

Mat2 reflection(double t) { return {std::cos(t), std::sin(t), std::sin(t), -std::cos(t)}; }

FurstenbergTriple furstenberg_matrices(const ScatteringData& sd, const FloquetData& fd) {
  const cplx c = fd.c_plus;
  if (std::abs(c.imag()) < 1e-14) {
    throw NumericalDegeneracy("furstenberg: Im c vanishes, C is singular (band edge)");
  }
  const cplx rho = fd.rho_plus;
  FurstenbergTriple t;
  t.C = {1.0, 0.0, c.real(), c.imag()};
  t.g_tilde = {rho.real(), rho.imag(), -rho.imag(), rho.real()};
  t.s = Mat2::rotation(sd.alpha) * sd.A + reflection(sd.beta) * sd.B;
  return t;
}

double growth_factor(const ScatteringData& sd, double theta) {
  return 1.0 + 2.0 * sd.B * (sd.B + sd.A * std::cos(sd.alpha + sd.beta - 2.0 * theta));
}

namespace {

double mod_pi(double t) {
  double r = std::fmod(t, M_PI);
  if (r < 0) r += M_PI;
  return r;
}

}  // namespace

bool GrowthWindow::contains(double theta) const {
  double d = mod_pi(theta - center);
  if (d > M_PI / 2) d -= M_PI;
  return std::abs(d) < half_width;
}

GrowthWindow growth_window(const ScatteringData& sd, double delta) {
  GrowthWindow w;
  w.center = mod_pi(0.5 * (sd.alpha + sd.beta));
  if (sd.B <= 0.0) return w;
  // cos(alpha + beta - 2 theta) > t
  const double t = (delta / (2.0 * sd.B) - sd.B) / sd.A;
  if (t >= 1.0) return w;
  w.half_width = t <= -1.0 ? M_PI / 2 : 0.5 * std::acos(t);
  return w;
}

GrowthProbe projective_growth_probe(const ScatteringData& sd, const FloquetData& fd,
                                    int iterations, double theta0) {
  if (!(sd.B > 0.0)) throw NumericalDegeneracy("growth probe: B = 0, critical energy");
  const FurstenbergTriple ft = furstenberg_matrices(sd, fd);
  const GrowthWindow k = growth_window(sd);
  if (k.half_width <= 0.0) throw NumericalDegeneracy("growth probe: empty growth window");
  GrowthProbe out;
  Vec2 v{std::cos(theta0), std::sin(theta0)};
  double log_norm = 0.0;
  auto angle = [](const Vec2& u) { return mod_pi(std::atan2(u.down.real(), u.up.real())); };
  for (int it = 0; it < iterations; ++it) {
    int rotations = 0;
    while (!k.contains(angle(v))) {
      v = ft.g_tilde * v;
      out.angles.push_back(angle(v));
      if (++rotations > 100000) {
        throw NumericalDegeneracy("growth probe: rotation never reaches the growth window");
      }
    }
    v = ft.s * v;
    const double n = v.norm();
    log_norm += std::log(n);
    v = v * (1.0 / n);
    out.log_norms.push_back(log_norm);
    out.angles.push_back(angle(v));
  }
  return out;
}

namespace {

Vec2 unit_eigenvector(const Mat2& g, cplx rho, const Vec2* ref) {
  Vec2 p{g.b, rho - g.a};
  Vec2 q{rho - g.d, g.c};
  Vec2 v = p.norm() >= q.norm() ? p : q;
  const double n = v.norm();
  if (n == 0.0) throw NumericalDegeneracy("gap coefficients: degenerate eigenvector");
  v = v * (1.0 / n);
  v = {v.up.real(), v.down.real()};
  if (ref) {
    const double dot = (v.up * std::conj(ref->up) + v.down * std::conj(ref->down)).real();
    if (dot < 0.0) v = v * -1.0;
  } else if (v.up.real() < 0.0 || (v.up.real() == 0.0 && v.down.real() < 0.0)) {
    v = v * -1.0;
  }
  return v;
}

}  // namespace

GapCoefficients gap_coefficients(const CellTemplate& tmpl, double lambda0, double lambda1,
                                 double E, const GapCoefficients* reference) {
  const Mat2 g0 = cell_transfer(tmpl.cell(0, lambda0), E);
  const FloquetData fd = floquet_data(g0, E);
  if (fd.tag != Stability::Gap) {
    throw ConfigError("gap coefficients: energy is not inside a gap");
  }
  GapCoefficients gc;
  const bool plus_small = std::abs(fd.rho_plus) < std::abs(fd.rho_minus);
  gc.rho1 = (plus_small ? fd.rho_plus : fd.rho_minus).real();
  gc.rho2 = (plus_small ? fd.rho_minus : fd.rho_plus).real();
  gc.v1 = unit_eigenvector(g0, gc.rho1, reference ? &reference->v1 : nullptr);
  gc.v2 = unit_eigenvector(g0, gc.rho2, reference ? &reference->v2 : nullptr);
  const Mat2 g1 = cell_transfer(tmpl.cell(0, lambda1), E);
  const Mat2 basis = Mat2::from_columns(gc.v1, gc.v2);
  const Mat2 inv = basis.inverse();
  const Vec2 w1 = inv * (g1 * gc.v1);
  const Vec2 w2 = inv * (g1 * gc.v2);
  gc.a1 = w1.up.real() / gc.rho1;
  gc.b1 = w1.down.real() / gc.rho2;
  gc.a2 = w2.down.real() / gc.rho2;
  gc.b2 = w2.up.real() / gc.rho1;
  return gc;
}

std::string to_string(CriticalReason r) {
  switch (r) {
    case CriticalReason::BZero: return "b_zero";
    case CriticalReason::DZero: return "D_zero";
    case CriticalReason::BandEdge: return "band_edge";
    case CriticalReason::GapCoeffZero: return "gap_coeff_zero";
  }
  return "unknown";
}

double CriticalSet::distance(double e) const {
  double d = std::numeric_limits<double>::infinity();
  for (const auto& x : entries) d = std::min(d, std::abs(x.E - e));
  return d;
}

std::size_t CriticalSet::count(CriticalReason r) const {
  return static_cast<std::size_t>(
      std::count_if(entries.begin(), entries.end(), [r](const Entry& x) { return x.reason == r; }));
}

void CriticalSet::write_json(std::ostream& os) const {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& x : entries) j.push_back({{"E", x.E}, {"reason", to_string(x.reason)}});
  os << nlohmann::json{{"critical", j}}.dump(2) << '\n';
}

namespace {

template <class F>
double bracket_root(F f, double a, double b, double fa, double fb) {
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  std::uintmax_t iters = 200;
  const auto r = boost::math::tools::toms748_solve(
      f, a, b, fa, fb, boost::math::tools::eps_tolerance<double>(50), iters);
  return 0.5 * (r.first + r.second);
}

constexpr double kBZeroThreshold = 1e-6;

/// Sub-interval of (a, b) whose ends are classified as `want` (away from the edge tolerance).
std::pair<double, double> strict_interior(const CellTemplate& tmpl, double q0, double a, double b,
                                          Stability want) {
  const auto tag = [&](double x) { return floquet_data(cell_transfer(tmpl.cell(0, q0), x), x).tag; };
  double lo = a, hi = b;
  for (double m = 1e-6; m < 0.25 * (b - a); m *= 2) {
    if (tag(a + m) == want) {
      lo = a + m;
      break;
    }
  }
  for (double m = 1e-6; m < 0.25 * (b - a); m *= 2) {
    if (tag(b - m) == want) {
      hi = b - m;
      break;
    }
  }
  if (lo == a || hi == b) return {0.0, 0.0};
  return {lo, hi};
}

void scan_band(const CellTemplate& tmpl, double q0, double q1, double a, double b,
               double resolution, std::vector<CriticalSet::Entry>& out) {
  const auto [lo, hi] = strict_interior(tmpl, q0, a, b, Stability::Band);
  if (!(hi > lo)) return;
  const auto n = std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil((hi - lo) / resolution)));
  std::vector<double> e(n + 1), d(n + 1), absb(n + 1);
  std::vector<cplx> bv(n + 1);
  const auto disc = [&](double x) { return cell_transfer(tmpl.cell(0, q0), x).trace().real(); };
  const auto b_of = [&](double x) { return scattering_coefficients(tmpl, q0, q1, x).b; };
  for (std::size_t i = 0; i <= n; ++i) {
    e[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n);
    d[i] = disc(e[i]);
    bv[i] = b_of(e[i]);
    absb[i] = std::abs(bv[i]);
  }
  for (std::size_t i = 0; i < n; ++i) {
    if ((d[i] < 0.0) != (d[i + 1] < 0.0)) {
      out.push_back({bracket_root(disc, e[i], e[i + 1], d[i], d[i + 1]), CriticalReason::DZero});
    }
  }
  for (std::size_t i = 0; i <= n; ++i) {
    const bool left_ok = i == 0 || absb[i] <= absb[i - 1];
    const bool right_ok = i == n || absb[i] <= absb[i + 1];
    if (!(left_ok && right_ok)) continue;
    const double x0 = e[i == 0 ? 0 : i - 1], x1 = e[i == n ? n : i + 1];
    const auto m = boost::math::tools::brent_find_minima(
        [&](double x) { return std::abs(b_of(x)); }, x0, x1, 40);
    if (m.second >= kBZeroThreshold) continue;
    const double delta = std::max(1e-7, 1e-3 * resolution);
    const double xl = std::max(lo, m.first - delta), xr = std::min(hi, m.first + delta);
    const cplx bl = b_of(xl), br = b_of(xr);
    const bool re_change = (bl.real() < 0.0) != (br.real() < 0.0);
    const bool im_change = (bl.imag() < 0.0) != (br.imag() < 0.0);
    if (re_change || im_change) out.push_back({m.first, CriticalReason::BZero});
  }
}

void scan_gap(const CellTemplate& tmpl, double q0, double q1, double a, double b,
              double resolution, std::vector<CriticalSet::Entry>& out) {
  const auto [lo, hi] = strict_interior(tmpl, q0, a, b, Stability::Gap);
  if (!(hi > lo)) return;
  const auto n = std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil((hi - lo) / resolution)));
  std::vector<double> e(n + 1);
  std::vector<GapCoefficients> gc(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    e[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n);
    gc[i] = gap_coefficients(tmpl, q0, q1, e[i], i ? &gc[i - 1] : nullptr);
  }
  using Getter = double GapCoefficients::*;
  for (Getter field : {&GapCoefficients::a1, &GapCoefficients::b1, &GapCoefficients::a2,
                       &GapCoefficients::b2}) {
    for (std::size_t i = 0; i < n; ++i) {
      const double fa = gc[i].*field, fb = gc[i + 1].*field;
      if ((fa < 0.0) == (fb < 0.0)) continue;
      const GapCoefficients ref = gc[i];
      const auto f = [&](double x) { return gap_coefficients(tmpl, q0, q1, x, &ref).*field; };
      out.push_back({bracket_root(f, e[i], e[i + 1], fa, fb), CriticalReason::GapCoeffZero});
    }
  }
}

}  // namespace

CriticalSet critical_set_scan(const PauliField& per, const SingleSitePotential& site,
                              const DisorderModel& law, double lo, double hi, double resolution) {
  if (!(resolution > 0.0)) throw ConfigError("critical_set_scan: resolution must be positive");
  const auto [q0, q1] = law.extreme_support();
  const CellTemplate tmpl(per, site);
  const PauliField bg = background_field(tmpl, q0);
  const StabilityIntervalList bands = stability_scan(bg, lo, hi, resolution);
  CriticalSet cs;
  for (double x : bands.edges) cs.entries.push_back({x, CriticalReason::BandEdge});
  if (q1 > q0) {
    for (const auto& [a, b] : bands.bands) scan_band(tmpl, q0, q1, a, b, resolution, cs.entries);
    for (const auto& [a, b] : bands.gaps) {
      if (b > a) scan_gap(tmpl, q0, q1, a, b, resolution, cs.entries);
    }
  }
  std::sort(cs.entries.begin(), cs.entries.end(),
            [](const auto& x, const auto& y) { return x.E < y.E; });
  return cs;
}

void write_scattering_csv(std::ostream& os, const std::vector<ScatteringData>& rows) {
  os << "E,re_a,im_a,re_b,im_b,abs_b\n";
  for (const auto& r : rows) {
    os << fmt(r.E) << ',' << fmt(r.a.real()) << ',' << fmt(r.a.imag()) << ',' << fmt(r.b.real())
       << ',' << fmt(r.b.imag()) << ',' << fmt(r.B) << '\n';
  }
}

}  // namespace diracloc
