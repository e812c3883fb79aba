#include "diracloc/dos.h"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "diracloc/errors.h"
#include "diracloc/io.h"
#include "diracloc/spectrum.h"
#include "diracloc/transfer.h"
#include "json.hpp"

namespace diracloc {

namespace {

/// Antiderivative of log|t - E|.
double log_abs_antiderivative(double t, double E) {
  const double u = t - E;
  return u == 0.0 ? 0.0 : u * std::log(std::abs(u)) - u;
}

/// Antiderivative of (1/2) log(1 + t^2).
double half_log_antiderivative(double t) {
  return 0.5 * (t * std::log1p(t * t) - 2.0 * t + 2.0 * std::atan(t));
}

double log_weight(double E, double t) {
  if (t == E) throw NumericalDegeneracy("log_weight_integral: atom at the evaluation energy");
  return std::log(std::abs(E - t)) - 0.5 * std::log1p(t * t);
}

/// log(t - z) - (1/2) log(1 + t^2).
cplx herglotz_primitive(double t, cplx z) { return std::log(t - z) - 0.5 * std::log1p(t * t); }

}  // namespace

void SignedMeasure::validate() const {
  if (t.size() != mu.size()) throw ConfigError("measure: node and value counts differ");
  if (t.empty()) throw ConfigError("measure: no nodes");
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!std::isfinite(t[i]) || !std::isfinite(mu[i])) throw ConfigError("measure: non-finite data");
    if (i > 0 && !(t[i] > t[i - 1])) throw ConfigError("measure: nodes must increase");
  }
  for (auto [p, a] : atoms) {
    if (!std::isfinite(p) || !std::isfinite(a)) throw ConfigError("measure: non-finite atom");
    if (p < t.front() || p > t.back()) throw ConfigError("measure: atom outside the node range");
  }
}

double log_weight_integral(double E, const SignedMeasure& m) {
  m.validate();
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < m.t.size(); ++i) {
    const double a = m.t[i], b = m.t[i + 1];
    const double slope = (m.mu[i + 1] - m.mu[i]) / (b - a);
    if (slope == 0.0) continue;
    s += slope * (log_abs_antiderivative(b, E) - log_abs_antiderivative(a, E) -
                  (half_log_antiderivative(b) - half_log_antiderivative(a)));
  }
  for (auto [p, a] : m.atoms) s += a * log_weight(E, p);
  return s;
}

cplx herglotz_integral(cplx z, const SignedMeasure& m) {
  m.validate();
  if (z.imag() == 0.0) throw ConfigError("herglotz_integral: need Im z != 0");
  const double sg = z.imag() > 0 ? 1.0 : -1.0;
  cplx s = 0.0;
  for (std::size_t i = 0; i + 1 < m.t.size(); ++i) {
    const double a = m.t[i], b = m.t[i + 1];
    const double beta = (m.mu[i + 1] - m.mu[i]) / (b - a);
    const double alpha = m.mu[i] - beta * a;
    s += beta * (b - a) + (alpha + beta * z) * (std::log(b - z) - std::log(a - z));
    s -= alpha * 0.5 * (std::log1p(b * b) - std::log1p(a * a)) +
         beta * ((b - std::atan(b)) - (a - std::atan(a)));
  }
  s -= m.mu.back() * herglotz_primitive(m.t.back(), z);
  s += m.mu.front() * (herglotz_primitive(m.t.front(), z) + cplx(0.0, sg * M_PI));
  for (auto [p, a] : m.atoms) s -= a * herglotz_primitive(p, z);
  return s;
}

cplx stieltjes_derivative(cplx z, const SignedMeasure& m) {
  m.validate();
  if (z.imag() == 0.0) throw ConfigError("stieltjes_derivative: need Im z != 0");
  cplx s = 0.0;
  for (std::size_t i = 0; i + 1 < m.t.size(); ++i) {
    const double a = m.t[i], b = m.t[i + 1];
    const double beta = (m.mu[i + 1] - m.mu[i]) / (b - a);
    const double alpha = m.mu[i] - beta * a;
    const cplx c = alpha + beta * z;
    s += -c / (b - z) + c / (a - z) + beta * (std::log(b - z) - std::log(a - z));
  }
  s += m.mu.back() / (m.t.back() - z);
  s -= m.mu.front() / (m.t.front() - z);
  for (auto [p, a] : m.atoms) s += a / (p - z);
  return s;
}

double IdsTable::N0(double e) { return e / M_PI; }

double IdsTable::bound() const { return 2.0 / M_PI * sup_norm + 4.0 / L; }

double IdsTable::max_deviation() const {
  double d = 0.0;
  for (std::size_t i = 0; i < E.size(); ++i) d = std::max(d, std::abs(N_hat[i] - N0(E[i])));
  return d;
}

double IdsTable::slope() const {
  if (E.size() < 2) throw ConfigError("IdsTable::slope: need two points");
  double me = 0, mn = 0;
  for (std::size_t i = 0; i < E.size(); ++i) {
    me += E[i];
    mn += N_hat[i];
  }
  me /= static_cast<double>(E.size());
  mn /= static_cast<double>(E.size());
  double see = 0, sen = 0;
  for (std::size_t i = 0; i < E.size(); ++i) {
    see += (E[i] - me) * (E[i] - me);
    sen += (E[i] - me) * (N_hat[i] - mn);
  }
  return sen / see;
}

SignedMeasure IdsTable::measure() const {
  SignedMeasure m;
  m.t = E;
  for (std::size_t i = 0; i < E.size(); ++i) m.mu.push_back(N_hat[i] - N0(E[i]));
  return m;
}

void IdsTable::write_csv(std::ostream& os) const {
  os << "E,N_hat,N0\n";
  for (std::size_t i = 0; i < E.size(); ++i) {
    os << fmt(E[i]) << ',' << fmt(N_hat[i]) << ',' << fmt(N0(E[i])) << '\n';
  }
}

IdsTable ids_estimate(const AndersonModel& model, const std::vector<double>& grid, double L,
                      long R, std::uint64_t seed) {
  if (!(L >= 20.0)) throw ConfigError("ids_estimate: need L >= 20");
  if (R < 20) throw ConfigError("ids_estimate: need R >= 20");
  if (grid.empty()) throw ConfigError("ids_estimate: empty grid");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) throw ConfigError("ids_estimate: grid must increase");
  }
  IdsTable t;
  t.E = grid;
  t.L = L;
  t.R = R;
  t.seed = seed;
  t.sup_norm = model.sup_norm();
  std::vector<long> total(grid.size(), 0);
  const auto accumulate = [&](long r, long weight) {
    const DirichletBox box = model_box(model, 0.0, L, seed, static_cast<std::uint64_t>(r));
    const long k0 = pruefer_index(box, 0.0);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      total[i] += weight * (grid[i] == 0.0 ? 0 : pruefer_index(box, grid[i]) - k0);
    }
  };
  if (!model.law.nontrivial()) {
    accumulate(0, R);
  } else {
    for (long r = 0; r < R; ++r) accumulate(r, 1);
  }
  for (long c : total) t.N_hat.push_back(static_cast<double>(c) / (static_cast<double>(R) * L));
  return t;
}

void ThoulessFit::write_json(std::ostream& os) const {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < E.size(); ++i) {
    rows.push_back({{"E", E[i]}, {"gamma_hat", gamma[i]}, {"integral", integral[i]}, {"residual", residual[i]}});
  }
  nlohmann::json j{{"alpha_hat", alpha_hat},
                   {"rms", rms},
                   {"truncation_bound", truncation_bound},
                   {"residuals", rows}};
  os << j.dump(2) << '\n';
}

ThoulessFit thouless_check(const LyapunovCurve& curve, const IdsTable& ids, double margin) {
  if (curve.points.empty()) throw ConfigError("thouless_check: empty curve");
  if (ids.E.size() < 2) throw ConfigError("thouless_check: ids table too small");
  const double lo = curve.points.front().E, hi = curve.points.back().E;
  if (ids.E.front() > lo - margin || ids.E.back() < hi + margin) {
    throw ConfigError("thouless_check: ids grid must cover the curve grid by the margin");
  }
  const SignedMeasure m = ids.measure();
  ThoulessFit f;
  double diff = 0.0;
  for (const auto& p : curve.points) {
    f.E.push_back(p.E);
    f.gamma.push_back(p.gamma_hat);
    f.integral.push_back(log_weight_integral(p.E, m));
    diff += f.integral.back() - p.gamma_hat;
  }
  f.alpha_hat = diff / static_cast<double>(f.E.size());
  double ss = 0.0;
  const double C = ids.bound();
  for (std::size_t i = 0; i < f.E.size(); ++i) {
    f.residual.push_back(f.gamma[i] + f.alpha_hat - f.integral[i]);
    ss += f.residual.back() * f.residual.back();
    const double tail = std::abs(log_weight(f.E[i], ids.E.front())) + std::abs(log_weight(f.E[i], ids.E.back()));
    f.truncation_bound = std::max(f.truncation_bound, 2.0 * C * tail);
  }
  f.rms = std::sqrt(ss / static_cast<double>(f.E.size()));
  return f;
}

cplx kotani_w0(cplx z) { return cplx(0.0, 1.0) * z; }

namespace {

/// Backward propagation of v across the slice; with `acc` set, sums log(psi_up ratios).
void propagate_back(const Slice& s, cplx z, Vec2& v, cplx* acc) {
  for (auto it = s.segments.rbegin(); it != s.segments.rend(); ++it) {
    const double rate = std::abs(z - it->v.el) + std::hypot(it->v.am, it->v.sc);
    const double dmax = std::min(it->length, 0.25 / std::max(rate, 1e-300));
    double left = it->length, d = dmax;
    while (left > 0.0) {
      d = std::min(d, left);
      const Vec2 u = segment_exponential(it->v, z, -d) * v;
      if (acc) {
        const cplx ratio = u.up / v.up;
        if (std::abs(ratio - 1.0) > 0.5 && d > 1e-9) {
          d *= 0.5;
          continue;
        }
        *acc += std::log(ratio);
      }
      v = u * (1.0 / u.norm());
      left -= d;
      d = std::min(2.0 * d, dmax);
    }
  }
}

}  // namespace

KotaniSample kotani_w(const AndersonModel& model, cplx z, long R, double X, std::uint64_t seed) {
  if (!(z.imag() >= 0.1)) throw ConfigError("kotani_w: need Im z >= 0.1 for the truncation to converge");
  if (!(X >= 50.0 / z.imag())) throw ConfigError("kotani_w: need X >= 50 / Im z");
  if (R < 1) throw ConfigError("kotani_w: need R >= 1");
  const double X0 = X - 25.0 / z.imag();
  const auto one = [&](long r) {
    const Medium m = model.medium_for(0.0, X, seed, static_cast<std::uint64_t>(r));
    Vec2 v{0.0, 1.0};
    propagate_back(m.slice(X0, X), z, v, nullptr);
    cplx acc = 0.0;
    propagate_back(m.slice(0.0, X0), z, v, &acc);
    return -acc / X0;
  };
  std::vector<cplx> ws;
  if (!model.law.nontrivial()) {
    ws.assign(static_cast<std::size_t>(R), one(0));
  } else {
    for (long r = 0; r < R; ++r) ws.push_back(one(r));
  }
  KotaniSample k;
  k.z = z;
  k.R = R;
  k.X = X;
  k.seed = seed;
  k.w0 = kotani_w0(z);
  for (const cplx& w : ws) k.w += w;
  k.w /= static_cast<double>(R);
  if (R > 1 && model.law.nontrivial()) {
    double ss = 0.0;
    for (const cplx& w : ws) ss += std::norm(w - k.w);
    k.std_error = std::sqrt(ss / static_cast<double>(R - 1)) / std::sqrt(static_cast<double>(R));
  }
  return k;
}

cplx kotani_derivative(const AndersonModel& model, cplx z, double h, long R, double X,
                       std::uint64_t seed) {
  if (!(h > 0.0)) throw ConfigError("kotani_derivative: need h > 0");
  const cplx wp = kotani_w(model, z + h, R, X, seed).w;
  const cplx wm = kotani_w(model, z - h, R, X, seed).w;
  return (wp - wm) / (2.0 * h);
}

cplx kotani_derivative_from_ids(cplx z, const IdsTable& ids) {
  return cplx(0.0, 1.0) + stieltjes_derivative(z, ids.measure());
}

void write_kotani_csv(std::ostream& os, const std::vector<KotaniSample>& rows) {
  os << "re_z,im_z,re_w,im_w\n";
  for (const auto& k : rows) {
    os << fmt(k.z.real()) << ',' << fmt(k.z.imag()) << ',' << fmt(k.w.real()) << ','
       << fmt(k.w.imag()) << '\n';
  }
}

}  // namespace diracloc
