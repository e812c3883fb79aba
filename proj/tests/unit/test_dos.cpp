#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <sstream>

#include "diracloc/dos.h"
#include "diracloc/errors.h"
#include "json.hpp"

using namespace diracloc;

namespace {

const cplx I{0.0, 1.0};

AndersonModel free_model() {
  return {PauliField{}, SingleSitePotential::electrostatic_bump(-0.5, 0.5), DisorderModel::degenerate(0.0)};
}

AndersonModel periodic_mass(double m) {
  return {PauliField::constant({0.0, m, 0.0}), SingleSitePotential::mass_bump(-0.25, 0.25),
          DisorderModel::degenerate(0.0)};
}

AndersonModel random_bump(double amplitude = 2.0, std::uint64_t seed = 5) {
  return {PauliField{}, SingleSitePotential::mass_bump(-0.25, 0.25, amplitude),
          DisorderModel::bernoulli(0.5, seed)};
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v;
  for (int i = 0; i < n; ++i) v.push_back(a + (b - a) * i / (n - 1));
  return v;
}

/// N - N0 for the constant mass m: sign(E) sqrt(E^2 - m^2)/pi outside the gap.
double mass_mu(double e, double m) {
  const double n = std::abs(e) > m ? std::copysign(std::sqrt(e * e - m * m), e) / M_PI : 0.0;
  return n - e / M_PI;
}

SignedMeasure mass_measure(double m, double T, int n) {
  SignedMeasure s;
  s.t = linspace(-T, T, n);
  for (double t : s.t) s.mu.push_back(mass_mu(t, m));
  return s;
}

LyapunovCurve curve_of(const std::vector<double>& E, const std::vector<double>& g) {
  LyapunovCurve c;
  for (std::size_t i = 0; i < E.size(); ++i) {
    LyapunovEstimate p;
    p.E = E[i];
    p.gamma_hat = g[i];
    c.points.push_back(p);
  }
  return c;
}

}  // namespace

TEST_CASE("free IDS slope is 1/pi and N_hat(0) = 0") {
  const auto grid = linspace(-6, 6, 49);
  const auto t = ids_estimate(free_model(), grid, 200, 20, 3);
  CHECK(std::abs(t.slope() * M_PI - 1.0) < 0.01);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i] == 0.0) CHECK(t.N_hat[i] == 0.0);
    if (i > 0) CHECK(t.N_hat[i] >= t.N_hat[i - 1]);
  }
  CHECK(t.max_deviation() <= t.bound());
  CHECK(t.bound() == doctest::Approx(4.0 / 200));
}

TEST_CASE("random IDS respects the bound and is monotone") {
  const auto model = random_bump(2.0);
  const auto grid = linspace(-8, 8, 65);
  const auto t = ids_estimate(model, grid, 60, 20, 8);
  CHECK(t.max_deviation() <= t.bound());
  for (std::size_t i = 1; i < grid.size(); ++i) CHECK(t.N_hat[i] >= t.N_hat[i - 1]);
  std::ostringstream os;
  t.write_csv(os);
  CHECK(os.str().rfind("E,N_hat,N0\n", 0) == 0);
}

TEST_CASE("periodic IDS matches the constant-mass counting function") {
  const auto grid = linspace(-4, 4, 33);
  const auto t = ids_estimate(periodic_mass(1.0), grid, 400, 20, 1);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(std::abs(t.N_hat[i] - t.N0(grid[i]) - mass_mu(grid[i], 1.0)) <= 2.0 / 400);
  }
}

TEST_CASE("ids validation") {
  CHECK_THROWS_AS(ids_estimate(free_model(), {0, 1}, 10, 20, 1), ConfigError);
  CHECK_THROWS_AS(ids_estimate(free_model(), {0, 1}, 50, 5, 1), ConfigError);
  CHECK_THROWS_AS(ids_estimate(free_model(), {1, 0}, 50, 20, 1), ConfigError);
}

TEST_CASE("log weight integral: zero measure, atom and ramp") {
  SignedMeasure zero{{-1, 0, 1}, {0.3, 0.3, 0.3}, {}};
  CHECK(log_weight_integral(0.4, zero) == 0.0);

  SignedMeasure atom{{-1, 3}, {0, 0}, {{2.0, 1.0}}};
  CHECK(log_weight_integral(0.0, atom) == doctest::Approx(std::log(2.0 / std::sqrt(5.0))).epsilon(1e-14));
  SignedMeasure at_e{{-1, 3}, {0, 0}, {{0.5, 1.0}}};
  CHECK_THROWS_AS(log_weight_integral(0.5, at_e), NumericalDegeneracy);

  SignedMeasure ramp{{-2, 0.5, 3}, {0, 0.75, -0.5}, {}};
  boost::math::quadrature::tanh_sinh<double> ts;
  for (double E : {-3.0, -2.0, 0.1, 0.5, 1.7, 4.0}) {
    const auto w = [E](double t) { return std::log(std::abs(E - t)) - 0.5 * std::log1p(t * t); };
    double oracle = 0.0;
    for (std::size_t i = 0; i + 1 < ramp.t.size(); ++i) {
      const double a = ramp.t[i], b = ramp.t[i + 1];
      const double s = (ramp.mu[i + 1] - ramp.mu[i]) / (b - a);
      if (E > a && E < b) {
        oracle += s * (ts.integrate(w, a, E) + ts.integrate(w, E, b));
      } else {
        oracle += s * ts.integrate(w, a, b);
      }
    }
    CHECK(std::abs(log_weight_integral(E, ramp) - oracle) < 1e-8);
  }
}

TEST_CASE("log weight integral is continuous across nodes") {
  SignedMeasure ramp{{-2, 0.5, 3}, {0, 0.75, -0.5}, {}};
  const double c = log_weight_integral(0.5, ramp);
  for (double h : {1e-3, 1e-5, 1e-7}) {
    CHECK(std::abs(log_weight_integral(0.5 + h, ramp) - c) < 20 * h * std::log(1 / h));
    CHECK(std::abs(log_weight_integral(0.5 - h, ramp) - c) < 20 * h * std::log(1 / h));
  }
}

TEST_CASE("measure validation") {
  SignedMeasure bad{{0, 1}, {0}, {}};
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  SignedMeasure unsorted{{1, 0}, {0, 0}, {}};
  CHECK_THROWS_AS(unsorted.validate(), ConfigError);
  SignedMeasure outside{{0, 1}, {0, 0}, {{2.0, 1.0}}};
  CHECK_THROWS_AS(outside.validate(), ConfigError);
}

TEST_CASE("Herglotz and Stieltjes integrals against quadrature") {
  SignedMeasure m{{-2, 0.5, 3}, {0.2, 0.75, -0.5}, {{1.0, 0.3}}};
  const cplx z{0.7, 0.4};
  boost::math::quadrature::tanh_sinh<double> ts;
  const auto mu = [&](double t) {
    double v;
    if (t <= m.t.front()) v = m.mu.front();
    else if (t >= m.t.back()) v = m.mu.back();
    else {
      std::size_t i = 0;
      while (t > m.t[i + 1]) ++i;
      v = m.mu[i] + (m.mu[i + 1] - m.mu[i]) * (t - m.t[i]) / (m.t[i + 1] - m.t[i]);
    }
    return t >= 1.0 ? v + 0.3 : v;
  };
  const auto integrate = [&](auto k) {
    cplx s = 0.0;
    for (auto part : {0, 1}) {
      const auto f = [&](double t) {
        const cplx v = k(t) * mu(t);
        return part == 0 ? v.real() : v.imag();
      };
      double acc = ts.integrate(f, -std::numeric_limits<double>::infinity(), -2.0);
      for (auto [a, b] : {std::pair{-2.0, 0.5}, {0.5, 1.0}, {1.0, 3.0}}) acc += ts.integrate(f, a, b);
      acc += ts.integrate(f, 3.0, std::numeric_limits<double>::infinity());
      s += part == 0 ? cplx(acc) : I * acc;
    }
    return s;
  };
  const cplx h = integrate([&](double t) { return (1.0 + t * z) / ((t - z) * (1.0 + t * t)); });
  const cplx d = integrate([&](double t) { return 1.0 / ((t - z) * (t - z)); });
  CHECK(std::abs(herglotz_integral(z, m) - h) < 1e-7);
  CHECK(std::abs(stieltjes_derivative(z, m) - d) < 1e-8);
  CHECK_THROWS_AS(herglotz_integral(cplx(1.0, 0.0), m), ConfigError);
}

TEST_CASE("Thouless identity is exact for the free measure") {
  IdsTable ids;
  ids.E = linspace(-10, 10, 81);
  for (double e : ids.E) ids.N_hat.push_back(IdsTable::N0(e));
  ids.L = 100;
  const auto f = thouless_check(curve_of({-1, 0, 1}, {0, 0, 0}), ids);
  CHECK(std::abs(f.alpha_hat) < 1e-12);
  CHECK(f.rms < 1e-12);
}

TEST_CASE("Thouless residual for the periodic mass model") {
  const auto model = periodic_mass(1.0);
  const auto ids = ids_estimate(model, linspace(-12, 12, 1201), 2000, 20, 1);
  const auto Eg = linspace(-2.5, 2.5, 21);
  const auto curve = lyapunov_curve(model, Eg, 20000, 2, 1);
  const auto f = thouless_check(curve, ids);
  double in_gap = 0.0;
  int n = 0;
  for (const auto& p : curve.points) {
    if (std::abs(p.E) < 1.0) {
      in_gap += p.gamma_hat;
      ++n;
    }
  }
  in_gap /= n;
  CHECK(f.rms < 0.05 * in_gap);
  CHECK(std::isfinite(f.truncation_bound));
  std::ostringstream os;
  f.write_json(os);
  CHECK(nlohmann::json::parse(os.str())["residuals"].size() == Eg.size());
}

TEST_CASE("Thouless fit absorbs a constant shift into alpha") {
  const auto ids = ids_estimate(periodic_mass(1.0), linspace(-10, 10, 401), 400, 20, 1);
  const std::vector<double> E{-0.5, 0.0, 0.5};
  const auto a = thouless_check(curve_of(E, {0.8, 1.0, 0.8}), ids);
  const auto b = thouless_check(curve_of(E, {1.1, 1.3, 1.1}), ids);
  CHECK(b.alpha_hat == doctest::Approx(a.alpha_hat - 0.3).epsilon(1e-12));
  CHECK(b.rms == doctest::Approx(a.rms).epsilon(1e-9));
  CHECK_THROWS_AS(thouless_check(curve_of({-9.0}, {0.0}), ids), ConfigError);
}

TEST_CASE("Thouless integral of the exact mass measure gives the gap exponent") {
  // In the gap gamma(E) = sqrt(1 - E^2); the identity fixes alpha once.
  const auto m = mass_measure(1.0, 400, 160001);
  const double alpha = log_weight_integral(0.0, m) - 1.0;
  for (double e : {-0.6, 0.3, 0.9}) {
    CHECK(std::abs(log_weight_integral(e, m) - alpha - std::sqrt(1 - e * e)) < 1e-3);
  }
}

TEST_CASE("free Kotani w equals i z") {
  for (cplx z : {cplx(0, 1), cplx(1.5, 0.3), cplx(-2, 0.1)}) {
    const auto k = kotani_w(free_model(), z, 3, 60 / z.imag(), 2);
    CHECK(std::abs(k.w - I * z) < 1e-12);
    CHECK(std::abs(k.gamma()) < 1e-12);
    CHECK(k.std_error == 0.0);
  }
}

TEST_CASE("Kotani preconditions") {
  CHECK_THROWS_AS(kotani_w(free_model(), cplx(0, 0.05), 2, 2000, 1), ConfigError);
  CHECK_THROWS_AS(kotani_w(free_model(), cplx(0, 0.5), 2, 50, 1), ConfigError);
  CHECK_THROWS_AS(kotani_derivative(free_model(), cplx(0, 0.5), 0.0, 2, 200, 1), ConfigError);
}

TEST_CASE("Kotani gamma of the mass gap") {
  // Constant mass m: Weyl solution decays like exp(-sqrt(m^2 - z^2) x).
  const cplx z{0.2, 0.5};
  const auto k = kotani_w(periodic_mass(1.0), z, 2, 200, 1);
  CHECK(std::abs(k.w + std::sqrt(1.0 - z * z)) < 1e-9);
}

TEST_CASE("Kotani exponent approaches the real-axis exponent") {
  const auto model = random_bump(2.0);
  const double E = 0.3;
  const auto g = lyapunov_estimate(model, E, 20000, 20, 4);
  double prev = 1e9;
  for (double eta : {0.4, 0.2, 0.1}) {
    const auto k = kotani_w(model, cplx(E, eta), 20, 60 / eta, 4);
    const double d = std::abs(k.gamma() - g.gamma_hat);
    CHECK(d < prev + 3 * k.std_error);
    prev = d;
  }
  CHECK(prev < 0.25 * g.gamma_hat);
}

TEST_CASE("Herglotz representation of gamma(z) for the mass model") {
  const auto m = mass_measure(1.0, 400, 160001);
  const double alpha = log_weight_integral(0.0, m) - 1.0;
  for (cplx z : {cplx(0.2, 0.5), cplx(1.5, 0.4), cplx(-3, 1)}) {
    const auto k = kotani_w(periodic_mass(1.0), z, 2, 100 / z.imag(), 1);
    const double re_h = herglotz_integral(z, m).real();
    CHECK(std::abs(re_h + k.gamma() + alpha) < 2e-3);
  }
}

TEST_CASE("finite-difference dw/dz matches the Stieltjes form") {
  const auto model = random_bump(2.0);
  const cplx z{2.0, 0.5};
  const cplx fd = kotani_derivative(model, z, 1e-3, 100, 400, 6);
  const auto ids = ids_estimate(model, linspace(-30, 30, 1201), 200, 40, 6);
  const cplx st = kotani_derivative_from_ids(z, ids);
  CHECK(std::abs(fd - st) < 0.05 * std::abs(fd));
  std::ostringstream os;
  write_kotani_csv(os, {kotani_w(model, z, 2, 200, 6)});
  CHECK(os.str().rfind("re_z,im_z,re_w,im_w\n", 0) == 0);
}
