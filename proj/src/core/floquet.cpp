#include "diracloc/floquet.h"

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

std::string to_string(Stability s) {
  switch (s) {
    case Stability::Band: return "band";
    case Stability::Gap: return "gap";
    case Stability::Edge: return "edge";
    case Stability::Complex: return "complex";
  }
  return "unknown";
}

namespace {

Slice period_slice(const PauliField& per) {
  Slice s;
  s.x0 = -0.5;
  const auto& bp = per.breakpoints();
  for (std::size_t i = 0; i < per.segments(); ++i) {
    s.segments.push_back({bp[i + 1] - bp[i], per.coeffs()[i]});
  }
  return s;
}

}  // namespace

Mat2 monodromy(const PauliField& per, cplx z) { return cell_transfer(period_slice(per), z); }

FloquetData floquet_data(const Mat2& g0, cplx z) {
  FloquetData fd;
  fd.z = z;
  fd.g0 = g0;
  fd.D = g0.trace();
  const cplx root = std::sqrt(4.0 - fd.D * fd.D);
  fd.rho_plus = 0.5 * (fd.D + cplx(0.0, 1.0) * root);
  fd.rho_minus = 0.5 * (fd.D - cplx(0.0, 1.0) * root);
  fd.c_plus = (fd.rho_plus - g0.a) / g0.b;
  fd.c_minus = (fd.rho_minus - g0.a) / g0.b;
  if (z.imag() != 0.0) {
    fd.tag = Stability::Complex;
  } else {
    const double d = std::abs(fd.D.real());
    if (std::abs(d - 2.0) < kBandEdgeTol) {
      fd.tag = Stability::Edge;
    } else {
      fd.tag = d < 2.0 ? Stability::Band : Stability::Gap;
    }
  }
  return fd;
}

FloquetData floquet_data(const PauliField& per, cplx z) { return floquet_data(monodromy(per, z), z); }

bool StabilityIntervalList::in_band(double e) const {
  return std::any_of(bands.begin(), bands.end(),
                     [e](const auto& b) { return e > b.first && e < b.second; });
}

double StabilityIntervalList::edge_distance(double e) const {
  double d = std::numeric_limits<double>::infinity();
  for (double x : edges) d = std::min(d, std::abs(e - x));
  return d;
}

void StabilityIntervalList::write_json(std::ostream& os) const {
  nlohmann::json j;
  j["window"] = {lo, hi};
  j["bands"] = nlohmann::json::array();
  for (const auto& [a, b] : bands) j["bands"].push_back({a, b});
  j["gaps"] = nlohmann::json::array();
  for (const auto& [a, b] : gaps) j["gaps"].push_back({a, b});
  j["edges"] = edges;
  os << j.dump(2) << '\n';
}

namespace {

struct Discriminant {
  const PauliField& per;
  double operator()(double e) const { return std::abs(monodromy(per, e).trace().real()) - 2.0; }
};

double refine_root(const Discriminant& f, double a, double b, double fa, double fb) {
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  std::uintmax_t iters = 200;
  const auto r = boost::math::tools::toms748_solve(
      f, a, b, fa, fb, boost::math::tools::eps_tolerance<double>(50), iters);
  return 0.5 * (r.first + r.second);
}

/// Distance of the monodromy from +-I; vanishes at coexistence points.
double coexistence_defect(const PauliField& per, double e) {
  const Mat2 g = monodromy(per, e);
  const double s = g.trace().real() >= 0.0 ? 1.0 : -1.0;
  return (g - Mat2::identity() * s).frobenius();
}

/// At a coexistence point the off-diagonal entry g0_12 changes sign linearly.
double refine_coexistence(const PauliField& per, double guess) {
  const auto off = [&](double e) { return monodromy(per, e).b.real(); };
  for (double delta : {1e-7, 1e-6, 1e-5}) {
    const double a = guess - delta, b = guess + delta;
    const double fa = off(a), fb = off(b);
    if ((fa < 0.0) == (fb < 0.0)) continue;
    std::uintmax_t iters = 200;
    const auto r = boost::math::tools::toms748_solve(
        off, a, b, fa, fb, boost::math::tools::eps_tolerance<double>(50), iters);
    return 0.5 * (r.first + r.second);
  }
  return guess;
}

}  // namespace

StabilityIntervalList stability_scan(const PauliField& per, double lo, double hi,
                                     double resolution) {
  if (!(hi > lo)) throw ConfigError("stability_scan: degenerate window");
  if (!(resolution > 0.0)) throw ConfigError("stability_scan: resolution must be positive");
  const Discriminant f{per};
  const auto n = static_cast<std::size_t>(std::ceil((hi - lo) / resolution));
  std::vector<double> e(n + 1), fv(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    e[i] = i == n ? hi : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n);
    fv[i] = f(e[i]);
  }
  std::vector<double> edges;
  for (std::size_t i = 0; i < n; ++i) {
    if ((fv[i] < 0.0) != (fv[i + 1] < 0.0)) {
      edges.push_back(refine_root(f, e[i], e[i + 1], fv[i], fv[i + 1]));
    }
  }
  // Tangential contact with |D| = 2 inside a grid cell (no sign change on the grid).
  for (std::size_t i = 1; i < n; ++i) {
    const bool loc_max = fv[i] >= fv[i - 1] && fv[i] >= fv[i + 1] && fv[i] < 0.0;
    const bool loc_min = fv[i] <= fv[i - 1] && fv[i] <= fv[i + 1] && fv[i] >= 0.0;
    if (!(loc_max || loc_min) || std::abs(fv[i]) > 1e-2) continue;
    if ((fv[i - 1] < 0.0) != (fv[i] < 0.0) || (fv[i + 1] < 0.0) != (fv[i] < 0.0)) continue;
    const auto defect = boost::math::tools::brent_find_minima(
        [&](double x) { return coexistence_defect(per, x); }, e[i - 1], e[i + 1], 52);
    if (defect.second < 1e-6) {
      edges.push_back(refine_coexistence(per, defect.first));
      continue;
    }
    const double sgn = loc_max ? -1.0 : 1.0;
    const auto ext = boost::math::tools::brent_find_minima(
        [&](double x) { return sgn * f(x); }, e[i - 1], e[i + 1], 52);
    const double fext = f(ext.first);
    if (std::abs(fext) < kBandEdgeTol) {
      edges.push_back(ext.first);
    } else if ((fext < 0.0) != (fv[i] < 0.0)) {
      edges.push_back(refine_root(f, e[i - 1], ext.first, fv[i - 1], fext));
      edges.push_back(refine_root(f, ext.first, e[i + 1], fext, fv[i + 1]));
    }
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end(),
                          [](double a, double b) { return std::abs(a - b) < 1e-10; }),
              edges.end());

  StabilityIntervalList out;
  out.lo = lo;
  out.hi = hi;
  out.edges = edges;
  std::vector<double> pts{lo};
  for (double x : edges) {
    if (x > lo && x < hi) pts.push_back(x);
  }
  pts.push_back(hi);
  std::vector<bool> is_band;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const bool band = f(0.5 * (pts[i] + pts[i + 1])) < 0.0;
    is_band.push_back(band);
    (band ? out.bands : out.gaps).emplace_back(pts[i], pts[i + 1]);
  }
  for (std::size_t i = 1; i + 1 < pts.size(); ++i) {
    if (is_band[i - 1] && is_band[i]) out.gaps.emplace_back(pts[i], pts[i]);
  }
  std::sort(out.gaps.begin(), out.gaps.end());
  return out;
}

void write_band_csv(std::ostream& os, const PauliField& per, const std::vector<double>& grid) {
  os << "E,re_D,im_D,in_band\n";
  for (double e : grid) {
    const cplx d = monodromy(per, e).trace();
    os << fmt(e) << ',' << fmt(d.real()) << ',' << fmt(d.imag()) << ','
       << (std::abs(d.real()) < 2.0 ? 1 : 0) << '\n';
  }
}

FloquetSolutions floquet_solutions(const PauliField& per, cplx z) {
  const FloquetData fd = floquet_data(per, z);
  if (fd.tag == Stability::Edge || std::abs(fd.rho_plus - fd.rho_minus) < 1e-9) {
    throw NumericalDegeneracy("floquet_solutions: band edge, Floquet multipliers coincide");
  }
  if (std::abs(fd.g0.b) < 1e-12) {
    throw NumericalDegeneracy("floquet_solutions: u_D(1/2, z) vanishes (Dirichlet eigenvalue)");
  }
  return {fd, fd.v_plus(), fd.v_minus()};
}

SolutionTrace floquet_trace(const PauliField& per, const Vec2& v, cplx z, int periods,
                            double step) {
  if (periods < 1) throw ConfigError("floquet_trace: need at least one period");
  const Medium m(per);
  return propagate_solution(m, -0.5, -0.5 + periods, v, z, step);
}

WeylPeriodic weyl_m_periodic(const PauliField& per, cplx z) {
  if (!(z.imag() > 0.0)) throw ConfigError("weyl_m_periodic: need Im z > 0");
  const FloquetData fd = floquet_data(per, z);
  const double r1 = std::abs(fd.rho_plus), r2 = std::abs(fd.rho_minus);
  if (std::abs(r1 - r2) < 1e-12) {
    throw NumericalDegeneracy("weyl_m_periodic: |rho_1| = |rho_2|, z is effectively real");
  }
  const cplx rho = r1 < r2 ? fd.rho_plus : fd.rho_minus;
  const Mat2& g = fd.g0;
  Vec2 v;
  if (std::abs(g.b) >= std::abs(rho - g.d)) {
    v = {1.0, (rho - g.a) / g.b};
  } else {
    v = {1.0, g.c / (rho - g.d)};
  }
  return {v.down, rho, v};
}

std::vector<std::pair<cplx, cplx>> track_floquet_branches(const PauliField& per,
                                                          const std::vector<cplx>& path) {
  std::vector<std::pair<cplx, cplx>> out;
  out.reserve(path.size());
  for (const cplx& z : path) {
    const FloquetData fd = floquet_data(per, z);
    if (out.empty()) {
      out.emplace_back(fd.rho_plus, fd.rho_minus);
      continue;
    }
    const auto& prev = out.back();
    const double keep = std::abs(fd.rho_plus - prev.first) + std::abs(fd.rho_minus - prev.second);
    const double swap = std::abs(fd.rho_minus - prev.first) + std::abs(fd.rho_plus - prev.second);
    if (keep <= swap) {
      out.emplace_back(fd.rho_plus, fd.rho_minus);
    } else {
      out.emplace_back(fd.rho_minus, fd.rho_plus);
    }
  }
  return out;
}

}  // namespace diracloc
