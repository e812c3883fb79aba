#include "diracloc/spectrum.h"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/tools/toms748_solve.hpp>
#include <cmath>
#include <limits>
#include <ostream>

#include "diracloc/errors.h"
#include "diracloc/io.h"
#include "diracloc/transfer.h"
#include "json.hpp"

namespace diracloc {

namespace {

constexpr double kSnap = 1e-10;
constexpr double kSpectralGap = 1e-10;

/// Real exp(t A) for real energy, as [[a, b], [c, d]].
struct RealExp {
  double a, b, c, d;
};

RealExp real_exponential(const PauliCoeffs& v, double E, double t) {
  const double w = E - v.el;
  const double k2 = v.am * v.am + v.sc * v.sc - w * w;
  const double s = t * t * k2;
  double c0, c1;
  if (std::abs(s) < 1e-4) {
    c0 = 1.0 + s / 2.0 + s * s / 24.0;
    c1 = t * (1.0 + s / 6.0 + s * s / 120.0);
  } else if (k2 > 0.0) {
    const double k = std::sqrt(k2);
    c0 = std::cosh(t * k);
    c1 = std::sinh(t * k) / k;
  } else {
    const double k = std::sqrt(-k2);
    c0 = std::cos(t * k);
    c1 = std::sin(t * k) / k;
  }
  return {c0 - c1 * v.am, c1 * (w + v.sc), c1 * (v.sc - w), c0 + c1 * v.am};
}

double log_sum_exp(const std::vector<double>& v) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : v) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

ScaledVec renormalize(const Vec2& v, double log_norm) {
  const double n = v.norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw NumericalDegeneracy("box solution: degenerate scale");
  return {v * (1.0 / n), log_norm + std::log(n)};
}

}  // namespace

DirichletBox::DirichletBox(const Medium& medium, double center, double length)
    : center_(center), length_(length) {
  if (!(length > 0.0)) throw ConfigError("DirichletBox: length must be positive");
  slice_ = medium.slice(center - length / 2.0, center + length / 2.0);
}

DirichletBox::DirichletBox(Slice slice) : slice_(std::move(slice)) {
  length_ = slice_.length();
  if (!(length_ > 0.0)) throw ConfigError("DirichletBox: empty slice");
  center_ = slice_.x0 + length_ / 2.0;
}

DirichletBox model_box(const AndersonModel& model, double center, double length,
                       std::uint64_t seed, std::uint64_t r) {
  if (!(length > 0.0)) throw ConfigError("model_box: length must be positive");
  const Medium m = model.medium_for(center - length / 2.0, center + length / 2.0, seed, r);
  return DirichletBox(m, center, length);
}

double pruefer_phase(const DirichletBox& box, double E) {
  double theta = 0.0, s = 0.0, c = 1.0;
  for (const auto& seg : box.slice().segments) {
    const double rho = std::hypot(seg.v.am, seg.v.sc);
    const int ns = std::max(1, static_cast<int>(std::ceil(seg.length * rho)));
    const double h = seg.length / ns;
    const RealExp g = real_exponential(seg.v, E, h);
    const double mid = h * (E - seg.v.el);
    for (int j = 0; j < ns; ++j) {
      const double up = g.a * s + g.b * c;
      const double down = g.c * s + g.d * c;
      const double raw = std::atan2(up, down) - std::atan2(s, c);
      theta += mid + std::remainder(raw - mid, 2.0 * M_PI);
      const double n = std::hypot(up, down);
      s = up / n;
      c = down / n;
    }
  }
  return theta;
}

long pruefer_index(const DirichletBox& box, double E) {
  const double t = pruefer_phase(box, E) / M_PI;
  const double j = std::nearbyint(t);
  if (std::abs(t - j) < kSnap) return static_cast<long>(j);
  return static_cast<long>(std::floor(t));
}

long pruefer_count(const DirichletBox& box, double E1, double E2) {
  if (!(E1 < E2)) throw ConfigError("pruefer_count: need E1 < E2");
  return pruefer_index(box, E2) - pruefer_index(box, E1);
}

double shooting_residual(const DirichletBox& box, double E) {
  return std::sin(pruefer_phase(box, E));
}

void EigenList::write_csv(std::ostream& os) const {
  os << "index,E\n";
  for (std::size_t i = 0; i < E.size(); ++i) os << index[i] << ',' << fmt(E[i]) << '\n';
}

EigenList dirichlet_eigenvalues(const DirichletBox& box, double E1, double E2) {
  if (!std::isfinite(E1) || !std::isfinite(E2)) throw ConfigError("dirichlet_eigenvalues: window must be finite");
  if (!(E1 < E2)) throw ConfigError("dirichlet_eigenvalues: need E1 < E2");
  const long k1 = pruefer_index(box, E1);
  const long k2 = pruefer_index(box, E2);
  EigenList out;
  double lo = E1;
  for (long k = k1 + 1; k <= k2; ++k) {
    const auto f = [&](double e) { return pruefer_phase(box, e) - static_cast<double>(k) * M_PI; };
    double root;
    const double fhi = f(E2);
    if (fhi <= 0.0) {
      root = E2;
    } else {
      const double flo = f(lo);
      boost::uintmax_t iters = 300;
      const auto tol = [](double a, double b) {
        return std::abs(b - a) <= 1e-14 * std::max(1.0, std::abs(a));
      };
      const auto r = boost::math::tools::toms748_solve(f, lo, E2, flo, fhi, tol, iters);
      root = 0.5 * (r.first + r.second);
    }
    out.index.push_back(k);
    out.E.push_back(root);
    lo = root;
  }
  return out;
}

BoxSolutions::BoxSolutions(const DirichletBox& box, cplx z) : box_(box), z_(z) {
  const auto& segs = box_.slice().segments;
  if (segs.empty()) throw ConfigError("BoxSolutions: empty box");
  double x = box_.left();
  ScaledVec cur{{0.0, 1.0}, 0.0};
  for (const auto& seg : segs) {
    starts_.push_back(x);
    left_at_start_.push_back(cur);
    cur = renormalize(segment_exponential(seg.v, z_, seg.length) * cur.dir, cur.log_norm);
    x += seg.length;
  }
  right_at_end_.resize(segs.size());
  cur = {{0.0, 1.0}, 0.0};
  for (std::size_t i = segs.size(); i-- > 0;) {
    right_at_end_[i] = cur;
    cur = renormalize(segment_exponential(segs[i].v, z_, -segs[i].length) * cur.dir, cur.log_norm);
  }
}

std::size_t BoxSolutions::locate(double x) const {
  const auto it = std::upper_bound(starts_.begin(), starts_.end(), x);
  return it == starts_.begin() ? 0 : static_cast<std::size_t>(it - starts_.begin() - 1);
}

ScaledVec BoxSolutions::left(double x) const {
  const std::size_t i = locate(x);
  const auto& seg = box_.slice().segments[i];
  const ScaledVec& s = left_at_start_[i];
  return renormalize(segment_exponential(seg.v, z_, x - starts_[i]) * s.dir, s.log_norm);
}

ScaledVec BoxSolutions::right(double x) const {
  const std::size_t i = locate(x);
  const auto& seg = box_.slice().segments[i];
  const ScaledVec& s = right_at_end_[i];
  const double end = starts_[i] + seg.length;
  return renormalize(segment_exponential(seg.v, z_, x - end) * s.dir, s.log_norm);
}

void Eigenfunction::write_csv(std::ostream& os) const {
  os << "x,abs_psi,psi_up,psi_down\n";
  for (std::size_t i = 0; i < x.size(); ++i) {
    os << fmt(x[i]) << ',' << fmt(psi[i].norm()) << ',' << fmt(psi[i].up.real()) << ','
       << fmt(psi[i].down.real()) << '\n';
  }
}

Eigenfunction eigenfunction(const DirichletBox& box, double E, double step, double rms_threshold) {
  if (!(step > 0.0)) throw ConfigError("eigenfunction: step must be positive");
  const BoxSolutions sol(box, E);
  const double x0 = box.left(), L = box.length(), x1 = box.right();
  const long N = std::max(2L, static_cast<long>(std::ceil(L / step)));

  Eigenfunction ef;
  ef.E = E;
  std::vector<ScaledVec> lv, rv;
  std::size_t jm = 0;
  double best = -std::numeric_limits<double>::infinity();
  for (long j = 0; j <= N; ++j) {
    const double x = j == N ? x1 : x0 + L * static_cast<double>(j) / static_cast<double>(N);
    ef.x.push_back(x);
    lv.push_back(sol.left(x));
    rv.push_back(sol.right(x));
    const double score = lv.back().log_norm + rv.back().log_norm;
    if (score > best) {
      best = score;
      jm = static_cast<std::size_t>(j);
    }
  }
  const double xm = ef.x[jm];
  const Vec2& a = lv[jm].dir;
  const Vec2& b = rv[jm].dir;
  const double dot = (std::conj(b.up) * a.up + std::conj(b.down) * a.down).real();
  const double sign = dot >= 0.0 ? 1.0 : -1.0;
  const double log_c = lv[jm].log_norm - rv[jm].log_norm + std::log(std::abs(dot));

  const auto value = [&](double x) -> ScaledVec {
    if (x <= xm) return sol.left(x);
    ScaledVec r = sol.right(x);
    return {r.dir * sign, r.log_norm + log_c};
  };

  std::vector<double> logs(ef.x.size());
  double ref = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < ef.x.size(); ++j) {
    logs[j] = j <= jm ? lv[j].log_norm : rv[j].log_norm + log_c;
    ref = std::max(ref, logs[j]);
  }

  // Quadrature pieces: segment boundaries, the matching point, and a length limit per segment.
  std::vector<std::pair<double, double>> pieces;
  double pos = x0;
  for (const auto& seg : box.slice().segments) {
    const double rate = std::abs(E - seg.v.el) + std::hypot(seg.v.am, seg.v.sc);
    const double hmax = rate > 0.0 ? 0.5 / rate : seg.length;
    std::vector<double> cuts{pos, pos + seg.length};
    if (xm > pos && xm < pos + seg.length) cuts.insert(cuts.begin() + 1, xm);
    for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
      const int np = std::max(1, static_cast<int>(std::ceil((cuts[c + 1] - cuts[c]) / hmax)));
      const double h = (cuts[c + 1] - cuts[c]) / np;
      for (int p = 0; p < np; ++p) {
        const double lo = cuts[c] + h * p;
        pieces.emplace_back(lo, p + 1 == np ? cuts[c + 1] : lo + h);
      }
    }
    pos += seg.length;
  }
  const auto density = [&](double x, double shift) {
    const ScaledVec v = value(x);
    return std::exp(2.0 * (v.log_norm - shift));
  };
  double mass = 0.0;
  for (auto [lo, hi] : pieces) {
    mass += boost::math::quadrature::gauss<double, 10>::integrate(
        [&](double x) { return density(x, ref); }, lo, hi);
  }
  const double log_norm = ref + 0.5 * std::log(mass);
  double check = 0.0;
  for (auto [lo, hi] : pieces) {
    check += boost::math::quadrature::gauss<double, 15>::integrate(
        [&](double x) { return density(x, log_norm); }, lo, hi);
  }
  ef.norm_check = std::sqrt(check);

  for (std::size_t j = 0; j < ef.x.size(); ++j) {
    const Vec2 dir = j <= jm ? lv[j].dir : rv[j].dir * sign;
    ef.psi.push_back(dir * std::exp(logs[j] - log_norm));
  }
  const Vec2 jump = a * std::exp(lv[jm].log_norm - log_norm) -
                    b * (sign * std::exp(rv[jm].log_norm + log_c - log_norm));
  ef.boundary_residual = jump.norm();

  std::size_t jc = 0;
  for (std::size_t j = 1; j < logs.size(); ++j) {
    if (logs[j] > logs[jc]) jc = j;
  }
  ef.localization_center = ef.x[jc];
  std::vector<double> d, y;
  for (std::size_t j = 0; j < ef.x.size(); ++j) {
    if (ef.x[j] < x0 + 0.1 * L || ef.x[j] > x1 - 0.1 * L) continue;
    d.push_back(std::abs(ef.x[j] - ef.localization_center));
    y.push_back(logs[j] - log_norm);
  }
  if (d.size() >= 3) {
    double md = 0, my = 0;
    for (std::size_t i = 0; i < d.size(); ++i) {
      md += d[i];
      my += y[i];
    }
    md /= static_cast<double>(d.size());
    my /= static_cast<double>(d.size());
    double sdd = 0, sdy = 0;
    for (std::size_t i = 0; i < d.size(); ++i) {
      sdd += (d[i] - md) * (d[i] - md);
      sdy += (d[i] - md) * (y[i] - my);
    }
    const double slope = sdd > 0.0 ? sdy / sdd : 0.0;
    double ss = 0;
    for (std::size_t i = 0; i < d.size(); ++i) {
      const double r = y[i] - my - slope * (d[i] - md);
      ss += r * r;
    }
    ef.m_hat = -slope;
    ef.fit_rms = std::sqrt(ss / static_cast<double>(d.size()));
  }
  ef.localized = ef.m_hat * L > 4.0 && ef.fit_rms < rms_threshold;
  return ef;
}

BoxGreen::BoxGreen(const DirichletBox& box, cplx z) : sol_(box, z) {
  const ScaledVec l = sol_.left(box.center());
  const ScaledVec r = sol_.right(box.center());
  w_dir_ = wronskian(r.dir, l.dir);
  if (!(std::abs(w_dir_) >= 1e-12)) {
    throw NumericalDegeneracy("box Green function: vanishing Wronskian, energy in the spectrum");
  }
  log_w_ = l.log_norm + r.log_norm + std::log(std::abs(w_dir_));
}

Mat2 BoxGreen::kernel(double x, double y) const {
  const ScaledVec a = x >= y ? sol_.right(x) : sol_.left(x);
  const ScaledVec b = x >= y ? sol_.left(y) : sol_.right(y);
  const cplx s = std::exp(a.log_norm + b.log_norm - log_w_) * (std::abs(w_dir_) / w_dir_);
  return Mat2{a.dir.up * b.dir.up, a.dir.up * b.dir.down, a.dir.down * b.dir.up,
              a.dir.down * b.dir.down} *
         s;
}

double BoxGreen::log_abs_kernel(double x, double y) const {
  const ScaledVec a = x >= y ? sol_.right(x) : sol_.left(x);
  const ScaledVec b = x >= y ? sol_.left(y) : sol_.right(y);
  return a.log_norm + b.log_norm - log_w_;
}

Mat2 green_kernel(const DirichletBox& box, cplx z, double x, double y) {
  return BoxGreen(box, z).kernel(x, y);
}

IntervalSet boundary_strip(double center, double length) {
  const double outer = length / 2.0 - 0.5, inner = length / 2.0 - 1.5;
  if (!(inner > 0.0)) throw ConfigError("boundary_strip: box too short");
  return {{center - outer, center - inner}, {center + inner, center + outer}};
}

IntervalSet box_interval(double center, double length) {
  if (!(length > 0.0)) throw ConfigError("box_interval: length must be positive");
  return {{center - length / 2.0, center + length / 2.0}};
}

double log_schur_bound(const BoxGreen& green, const IntervalSet& A, const IntervalSet& B,
                       int points_per_unit) {
  if (points_per_unit < 1) throw ConfigError("log_schur_bound: need points_per_unit >= 1");
  struct Node {
    double x, log_w, log_left, log_right;
  };
  const auto& sol = green.solutions();
  const auto nodes = [&](const IntervalSet& set) {
    std::vector<Node> out;
    for (auto [lo, hi] : set) {
      if (!(hi > lo)) throw ConfigError("log_schur_bound: empty interval");
      const int n = std::max(1, static_cast<int>(std::ceil((hi - lo) * points_per_unit)));
      const double h = (hi - lo) / n;
      for (int i = 0; i < n; ++i) {
        const double x = lo + h * (i + 0.5);
        out.push_back({x, std::log(h), sol.left(x).log_norm, sol.right(x).log_norm});
      }
    }
    return out;
  };
  const auto na = nodes(A), nb = nodes(B);
  const double lw = green.log_abs_wronskian();
  const auto lg = [&](const Node& p, const Node& q) {
    return p.x >= q.x ? p.log_right + q.log_left - lw : p.log_left + q.log_right - lw;
  };
  double row = -std::numeric_limits<double>::infinity();
  std::vector<double> terms;
  for (const auto& p : na) {
    terms.clear();
    for (const auto& q : nb) terms.push_back(lg(p, q) + q.log_w);
    row = std::max(row, log_sum_exp(terms));
  }
  double col = -std::numeric_limits<double>::infinity();
  for (const auto& q : nb) {
    terms.clear();
    for (const auto& p : na) terms.push_back(lg(p, q) + p.log_w);
    col = std::max(col, log_sum_exp(terms));
  }
  return 0.5 * (row + col);
}

Regularity box_regularity(const DirichletBox& box, double E, double m) {
  const double L = box.length();
  if (!(L > 6.0)) throw ConfigError("box_regularity: need L > 6");
  if (pruefer_count(box, E - kSpectralGap, E + kSpectralGap) > 0) {
    throw NumericalDegeneracy("box_regularity: energy within 1e-10 of an eigenvalue");
  }
  const BoxGreen g(box, E);
  Regularity out;
  out.log_bound = log_schur_bound(g, boundary_strip(box.center(), L), box_interval(box.center(), L / 3.0));
  out.log_threshold = -m * L / 2.0;
  out.regular = out.log_bound <= out.log_threshold;
  return out;
}

void WegnerResult::write_json(std::ostream& os) const {
  nlohmann::json j{{"E", E},         {"L", L},
                   {"R", R},         {"seed", seed},
                   {"eta", eta},     {"hits", hits},
                   {"probability", probability}, {"slope", slope},
                   {"slope_se", slope_se},       {"fit_points", fit_points}};
  os << j.dump(2) << '\n';
}

WegnerResult wegner_probe(const AndersonModel& model, double E, double L, double eta_max,
                          int levels, long R, std::uint64_t seed) {
  if (R < 50) throw ConfigError("wegner_probe: need R >= 50");
  if (levels < 1) throw ConfigError("wegner_probe: need levels >= 1");
  if (!(eta_max > 0.0)) throw ConfigError("wegner_probe: eta must be positive");
  WegnerResult out;
  out.E = E;
  out.L = L;
  out.R = R;
  out.seed = seed;
  for (int k = 0; k < levels; ++k) out.eta.push_back(eta_max * std::ldexp(1.0, -k));
  out.hits.assign(out.eta.size(), 0);

  const auto distance = [&](long r) {
    const DirichletBox box = model_box(model, 0.0, L, seed, static_cast<std::uint64_t>(r));
    const EigenList ev = dirichlet_eigenvalues(box, E - 10.0 * eta_max, E + 10.0 * eta_max);
    double d = std::numeric_limits<double>::infinity();
    for (double e : ev.E) d = std::min(d, std::abs(e - E));
    return d;
  };
  const bool once = !model.law.nontrivial();
  const double d0 = once ? distance(0) : 0.0;
  for (long r = 0; r < R; ++r) {
    const double d = once ? d0 : distance(r);
    for (std::size_t k = 0; k < out.eta.size(); ++k) {
      if (d < out.eta[k]) ++out.hits[k];
    }
  }
  std::vector<double> xs, ys, ws;
  for (std::size_t k = 0; k < out.eta.size(); ++k) {
    out.probability.push_back(static_cast<double>(out.hits[k]) / static_cast<double>(R));
    if (out.hits[k] > 0) {
      xs.push_back(std::log(out.eta[k]));
      ys.push_back(std::log(out.probability.back()));
      ws.push_back(static_cast<double>(out.hits[k]));
    }
  }
  out.fit_points = xs.size();
  if (xs.size() >= 2) {
    double sw = 0, mx = 0, my = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sw += ws[i];
      mx += ws[i] * xs[i];
      my += ws[i] * ys[i];
    }
    mx /= sw;
    my /= sw;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sxx += ws[i] * (xs[i] - mx) * (xs[i] - mx);
      sxy += ws[i] * (xs[i] - mx) * (ys[i] - my);
    }
    out.slope = sxy / sxx;
    out.slope_se = 1.0 / std::sqrt(sxx);
  }
  return out;
}

void H1Result::write_json(std::ostream& os) const {
  nlohmann::json j{{"E", E},
                   {"L0", L0},
                   {"theta", theta},
                   {"R", R},
                   {"seed", seed},
                   {"probability", probability},
                   {"target", target},
                   {"exceeds_target", exceeds_target}};
  os << j.dump(2) << '\n';
}

H1Result h1_probe(const AndersonModel& model, double E, double L0, double theta, long R,
                  std::uint64_t seed) {
  if (!(L0 > 0.0) || std::fmod(L0, 6.0) != 0.0) throw ConfigError("h1_probe: L0 must be a positive multiple of 6");
  if (R < 1) throw ConfigError("h1_probe: need R >= 1");
  H1Result out;
  out.E = E;
  out.L0 = L0;
  out.theta = theta;
  out.R = R;
  out.seed = seed;
  const double log_target = -theta * std::log(L0);
  const auto good = [&](long r) {
    const DirichletBox box = model_box(model, 0.0, L0, seed, static_cast<std::uint64_t>(r));
    try {
      return box_regularity(box, E, 0.0).log_bound <= log_target;
    } catch (const NumericalDegeneracy&) {
      return false;
    }
  };
  long ok = 0;
  if (!model.law.nontrivial()) {
    ok = good(0) ? R : 0;
  } else {
    for (long r = 0; r < R; ++r) ok += good(r) ? 1 : 0;
  }
  out.probability = static_cast<double>(ok) / static_cast<double>(R);
  out.exceeds_target = out.probability > out.target;
  return out;
}

void SliResult::write_json(std::ostream& os) const {
  nlohmann::json j{{"E", E}, {"L", L}, {"seed", seed}, {"samples", ratios.size()},
                   {"kappa_hat", kappa_hat}, {"ratios", ratios}};
  os << j.dump(2) << '\n';
}

SliResult sli_ratio(const AndersonModel& model, double E, double L, int samples,
                    std::uint64_t seed) {
  if (!(L >= 24.0)) throw ConfigError("sli_ratio: need L >= 24");
  if (samples < 1) throw ConfigError("sli_ratio: need samples >= 1");
  SliResult out;
  out.E = E;
  out.L = L;
  out.seed = seed;
  const std::uint64_t geo = derive_seed(~seed, 0);
  for (int s = 0; s < samples; ++s) {
    const auto u = [&](int k) { return counter_uniform(derive_seed(geo, s), k); };
    const double lp = 8.0 + u(0) * (L / 2.0 - 8.0);
    const double yp_max = L / 2.0 - 2.0 - lp / 2.0;
    const double yp = (2.0 * u(1) - 1.0) * yp_max;
    const double lpp = 1.0 + u(2) * (lp / 3.0 - 1.0);
    const double y_max = lp / 2.0 - 2.0 - lpp / 2.0;
    const double y = yp + (2.0 * u(3) - 1.0) * y_max;
    const Medium m = model.medium_for(-L / 2.0, L / 2.0, seed, static_cast<std::uint64_t>(s));
    try {
      const DirichletBox big(m, 0.0, L), inner(m, yp, lp);
      const BoxGreen gb(big, E), gi(inner, E);
      const IntervalSet chi = box_interval(y, lpp);
      const IntervalSet g_big = boundary_strip(0.0, L), g_in = boundary_strip(yp, lp);
      const double lhs = log_schur_bound(gb, g_big, chi);
      const double f1 = log_schur_bound(gi, g_in, chi);
      const double f2 = log_schur_bound(gb, g_big, g_in);
      out.ratios.push_back(std::exp(lhs - f1 - f2));
    } catch (const NumericalDegeneracy&) {
      continue;
    }
  }
  for (double r : out.ratios) out.kappa_hat = std::max(out.kappa_hat, r);
  return out;
}

}  // namespace diracloc
