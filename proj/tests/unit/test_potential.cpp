#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numeric>
#include <sstream>

#include "diracloc/errors.h"
#include "diracloc/potential.h"
#include "support/oracles.h"

using namespace diracloc;

TEST_CASE("pauli_decompose on basis matrices") {
  CHECK(pauli_decompose({{{0, 1}, {1, 0}}}) == PauliCoeffs{1, 0, 0});
  CHECK(pauli_decompose({{{2.5, 0}, {0, -2.5}}}) == PauliCoeffs{0, 2.5, 0});
  CHECK(pauli_decompose({{{-3, 0}, {0, -3}}}) == PauliCoeffs{0, 0, -3});
}

TEST_CASE("pauli_decompose reconstructs symmetric matrices") {
  for (int k = 0; k < 200; ++k) {
    const double a = counter_uniform(1, 3 * k) * 4 - 2;
    const double b = counter_uniform(1, 3 * k + 1) * 4 - 2;
    const double c = counter_uniform(1, 3 * k + 2) * 4 - 2;
    const RealMat2 m{{{a, b}, {b, c}}};
    const RealMat2 r = pauli_decompose(m).matrix();
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) CHECK(r[i][j] == doctest::Approx(m[i][j]).epsilon(1e-15));
  }
  // dyadic entries are reconstructed bit for bit
  const RealMat2 m{{{0.75, -0.125}, {-0.125, 0.5}}};
  CHECK(pauli_decompose(m).matrix() == m);
}

TEST_CASE("pauli_decompose rejects asymmetric input with the asymmetry in the message") {
  try {
    pauli_decompose({{{0, 1}, {0.5, 0}}});
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("0.5") != std::string::npos);
  }
  CHECK_NOTHROW(pauli_decompose({{{0, 1}, {1 + 1e-13, 0}}}));
}

TEST_CASE("PauliField validation and evaluation") {
  CHECK_THROWS_AS(PauliField({-0.5, 0.2}, {PauliCoeffs{}}), ConfigError);
  CHECK_THROWS_AS(PauliField({-0.5, 0.1, 0.1, 0.5}, {{}, {}, {}}), ConfigError);
  CHECK_THROWS_AS(PauliField({-0.5, 0.5}, {PauliCoeffs{NAN, 0, 0}}), ConfigError);
  const PauliField f({-0.5, 0.0, 0.5}, {{1, 0, 0}, {0, 2, 0}});
  CHECK(f.at(-0.25).am == 1.0);
  CHECK(f.at(0.25).sc == 2.0);
  CHECK(f.at(0.75).am == 1.0);  // periodic
  CHECK(f.at(3.25).sc == 2.0);
  CHECK(f.sup_norm() == 2.0);
  const PauliField g = PauliField::uniform_grid(std::vector<PauliCoeffs>(16, PauliCoeffs{0, 0, 1}));
  CHECK(g.segments() == 16);
  CHECK(g.breakpoints()[8] == doctest::Approx(0.0));
}

TEST_CASE("PauliField::project averages a smooth field") {
  const auto f = [](double x) {
    return RealMat2{{{std::cos(2 * M_PI * x), 0.0}, {0.0, -std::cos(2 * M_PI * x)}}};
  };
  const PauliField p = PauliField::project(f, 16, 256);
  for (std::size_t s = 0; s < 16; ++s) {
    const double a = -0.5 + s / 16.0, b = a + 1 / 16.0;
    const double exact = (std::sin(2 * M_PI * b) - std::sin(2 * M_PI * a)) / (2 * M_PI) * 16.0;
    CHECK(p.coeffs()[s].sc == doctest::Approx(exact).epsilon(1e-4));
  }
}

TEST_CASE("sample_disorder determinism and window consistency") {
  const auto law = DisorderModel::bernoulli(0.5, 7);
  const auto a = sample_disorder(law, -10, 100, 42);
  const auto b = sample_disorder(law, -10, 100, 42);
  CHECK(a.lambda == b.lambda);
  const auto c = sample_disorder(law, 50, 300, 42);
  for (long n = 50; n <= 100; ++n) CHECK(a.at(n) == c.at(n));
  const auto d = sample_disorder(law, -10, 100, 43);
  CHECK(a.lambda != d.lambda);
  for (double v : a.lambda) CHECK(law.contains(v));
  CHECK_THROWS_AS(sample_disorder(law, 5, 4, 1), ConfigError);
  CHECK_THROWS_AS(a.at(101), ConfigError);
}

TEST_CASE("single-atom law gives a constant sequence") {
  const auto law = DisorderModel::degenerate(0.3);
  const auto r = sample_disorder(law, 0, 999, 11);
  for (double v : r.lambda) CHECK(v == 0.3);
  CHECK_FALSE(law.nontrivial());
}

TEST_CASE("Bernoulli sample mean against the binomial oracle") {
  const auto law = DisorderModel::bernoulli(0.5, 0);
  const auto r = sample_disorder(law, 1, 10000, 2024);
  const double mean = std::accumulate(r.lambda.begin(), r.lambda.end(), 0.0) / r.size();
  CHECK(std::abs(mean - 0.5) < 5 * oracle::binomial_sigma(0.5, r.size()));
}

TEST_CASE("uniform law stays in its support and has the right mean") {
  const auto law = DisorderModel::uniform(-1.0, 3.0, 0);
  const auto r = sample_disorder(law, 0, 19999, 5);
  double s = 0.0;
  for (double v : r.lambda) {
    CHECK(law.contains(v));
    s += v;
  }
  const double sigma = 4.0 / std::sqrt(12.0) / std::sqrt(20000.0);
  CHECK(std::abs(s / r.size() - 1.0) < 5 * sigma);
}

TEST_CASE("disorder law validation") {
  CHECK_THROWS_AS(DisorderModel::discrete({0, 1}, {0.5, 0.6}, 0), ConfigError);
  CHECK_THROWS_AS(DisorderModel::discrete({0, 1}, {0.5}, 0), ConfigError);
  CHECK_THROWS_AS(DisorderModel::uniform(1, 1, 0), ConfigError);
  CHECK_THROWS_AS(DisorderModel::bernoulli(1.0, 0), ConfigError);
  const auto law = DisorderModel::discrete({-2, 0.5, 3}, {0.2, 0.5, 0.3}, 0);
  CHECK(law.extreme_support() == std::pair<double, double>{-2, 3});
  CHECK(law.max_abs() == 3);
  CHECK(law.mean() == doctest::Approx(-0.4 + 0.25 + 0.9));
}

TEST_CASE("realization CSV round trip") {
  const auto r = sample_disorder(DisorderModel::uniform(0, 1, 0), -3, 20, 9);
  std::stringstream ss;
  r.write_csv(ss);
  const auto back = DisorderRealization::read_csv(ss);
  CHECK(back.n_min == -3);
  CHECK(back.n_max == 20);
  CHECK(back.lambda == r.lambda);
  std::stringstream bad("n,lambda\n0,1\n2,1\n");
  CHECK_THROWS_AS(DisorderRealization::read_csv(bad), ConfigError);
  std::stringstream nohdr("0,1\n");
  CHECK_THROWS_AS(DisorderRealization::read_csv(nohdr), ConfigError);
}

TEST_CASE("total_potential cell arithmetic") {
  const PauliField per({-0.5, 0.0, 0.5}, {{0.1, 0.2, 0.3}, {0.4, 0.5, 0.6}});
  const auto site = SingleSitePotential::mass_bump(-0.25, 0.25, 2.0);
  DisorderRealization zero{-5, 5, std::vector<double>(11, 0.0)};
  for (double x : {-3.3, -0.1, 0.2, 4.9}) CHECK(total_potential(per, zero, site, x) == per.at(x).matrix());

  DisorderRealization r{-5, 5, std::vector<double>(11, 0.0)};
  r.lambda[5] = 1.0;   // n = 0
  r.lambda[6] = -0.7;  // n = 1
  const RealMat2 at0 = total_potential(per, r, site, 0.0);
  CHECK(at0 == (per.at(0.0) + site.at(0.0)).matrix());
  const RealMat2 at075 = total_potential(per, r, site, 0.75);
  CHECK(at075 == (per.at(0.75) + site.at(-0.25) * -0.7).matrix());
  // x = 0.75 lies at the edge of the bump of cell 1
  CHECK(total_potential(per, r, site, 0.8) == (per.at(0.8) + PauliCoeffs{0, -1.4, 0}).matrix());
  CHECK_THROWS_AS(total_potential(per, r, site, 5.6), ConfigError);
}

TEST_CASE("single-site potential kinds") {
  CHECK_THROWS_AS(SingleSitePotential(PauliField::constant({0, 0, 1}), SingleSitePotential::Kind::NormalForm),
                  ConfigError);
  CHECK_THROWS_AS(SingleSitePotential(PauliField::constant({1, 0, 0}), SingleSitePotential::Kind::Electrostatic),
                  ConfigError);
  const auto el = SingleSitePotential::electrostatic_bump(-0.25, 0.25);
  CHECK(el.overlap_measure(PauliField::constant({0, 1, 0})) == doctest::Approx(0.5));
  CHECK(el.overlap_measure(PauliField::constant({0, 0, 1})) == 0.0);
  const PauliField half({-0.5, 0.0, 0.5}, {{0, 0, 0}, {1, 0, 0}});
  CHECK(el.overlap_measure(half) == doctest::Approx(0.25));
  CHECK_THROWS_AS(SingleSitePotential::mass_bump(0.2, 0.1), ConfigError);
  CHECK_THROWS_AS(SingleSitePotential::mass_bump(-0.7, 0.1), ConfigError);
}

TEST_CASE("Medium slices follow cell and segment boundaries") {
  const PauliField per = PauliField::uniform_grid({{0, 1, 0}, {0, 2, 0}, {0, 3, 0}, {0, 4, 0}});
  const auto site = SingleSitePotential::mass_bump(-0.1, 0.1);
  const Medium m(per, site, DisorderRealization{0, 3, {0.5, 1.0, 1.5, 2.0}});
  const Slice s = m.slice(-0.3, 2.6);
  CHECK(s.x0 == -0.3);
  CHECK(s.length() == doctest::Approx(2.9).epsilon(1e-14));
  double x = s.x0;
  for (const auto& seg : s.segments) {
    const double mid = x + seg.length / 2;
    CHECK(seg.v == m.coeffs(mid));
    x += seg.length;
  }
  CHECK_THROWS_AS(m.slice(0, 3.6), ConfigError);
  CHECK_THROWS_AS(m.slice(-0.6, 1), ConfigError);
  CHECK_THROWS_AS(m.slice(1, 0), ConfigError);
  CHECK(m.covers(-0.5, 3.5));
  CHECK_FALSE(m.covers(-0.5, 3.51));
  const Medium free(PauliField{});
  CHECK(free.slice(-100.25, 37.5).length() == doctest::Approx(137.75));
}

TEST_CASE("gauge: zero electrostatic part is the identity gauge") {
  const PauliField per = PauliField::uniform_grid({{0.3, -0.2, 0}, {0.1, 0.7, 0}});
  const Slice s = Medium(per).slice(-0.5, 1.5);
  const NormalFormSlice nf(s);
  for (double x = -0.5; x < 1.5; x += 0.1) {
    CHECK(nf.phase(x) == 0.0);
    const auto [a, c] = nf.coefficients(x);
    CHECK(a == nf.original(x).am);
    CHECK(c == nf.original(x).sc);
  }
}

TEST_CASE("gauge: constant electrostatic part rotates by 2 c (x - x0)") {
  const double c = 0.8;
  const Slice s = Medium(PauliField::constant({0.6, 0.3, c})).slice(-0.5, 0.5);
  const NormalFormSlice nf = gauge_to_normal_form(s);
  for (double x = -0.5; x < 0.5; x += 0.05) {
    const double phi = c * (x + 0.5);
    CHECK(nf.phase(x) == doctest::Approx(phi).epsilon(1e-14));
    const auto [a, q] = nf.coefficients(x);
    CHECK(a == doctest::Approx(0.6 * std::cos(2 * phi) - 0.3 * std::sin(2 * phi)));
    CHECK(q == doctest::Approx(0.6 * std::sin(2 * phi) + 0.3 * std::cos(2 * phi)));
  }
}

TEST_CASE("gauge: pointwise norm and solution modulus are preserved") {
  const auto law = DisorderModel::uniform(-1, 1, 0);
  const AndersonModel model{PauliField::uniform_grid({{0.5, 0.2, 1.0}, {-0.3, 0.4, -0.6}}),
                            SingleSitePotential::mass_bump(-0.25, 0.25), law};
  const Medium m = model.medium(-2, 2, 99, 0);
  const Slice s = m.slice(-2.5, 2.5);
  const NormalFormSlice nf(s);
  for (double x = -2.5; x < 2.5; x += 0.037) {
    const auto [a, c] = nf.coefficients(x);
    const auto v = nf.original(x);
    CHECK(std::abs(a * a + c * c - v.am * v.am - v.sc * v.sc) < 1e-12);
  }
  // w = R_phi u solves the normal-form system: integrate both with RK4 and compare
  const double e = 0.9;
  const auto pot = [&](double x) { return m.potential(x); };
  const auto pot_nf = [&](double x) {
    const auto [a, c] = nf.coefficients(x);
    return oracle::Sym{{{c, a}, {a, -c}}};
  };
  std::vector<double> cuts;
  double x = s.x0;
  for (const auto& seg : s.segments) cuts.push_back(x += seg.length);
  const oracle::V2 u0{1.0, 0.5};
  for (double xe : {-1.7, 0.0, 1.3, 2.5}) {
    const auto u = oracle::rk4(pot, cuts, -2.5, xe, e, u0, 2000);
    const auto w = oracle::rk4(pot_nf, cuts, -2.5, xe, e, u0, 8000);
    const RealMat2 r = nf.spinor_gauge(xe - 1e-13);
    const std::complex<double> ru0 = r[0][0] * u[0] + r[0][1] * u[1];
    const std::complex<double> ru1 = r[1][0] * u[0] + r[1][1] * u[1];
    CHECK(std::abs(ru0 - w[0]) < 1e-7);
    CHECK(std::abs(ru1 - w[1]) < 1e-7);
    CHECK(std::abs(std::hypot(std::abs(u[0]), std::abs(u[1])) -
                   std::hypot(std::abs(w[0]), std::abs(w[1]))) < 1e-7);
  }
}

TEST_CASE("AndersonModel bounds") {
  const AndersonModel model{PauliField::constant({0, 1, 0.5}), SingleSitePotential::mass_bump(-0.25, 0.25),
                            DisorderModel::bernoulli(0.5, 0)};
  CHECK(model.sup_norm() == doctest::Approx(2.5));
  CHECK(model.max_cell_gronwall() == doctest::Approx(1.5));
}
