#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <sstream>

#include "diracloc/errors.h"
#include "diracloc/floquet.h"

using namespace diracloc;

namespace {
PauliField lumpy() {
  return PauliField::uniform_grid({{0.5, 0.2, 0.1}, {-0.4, 1.1, -0.3}, {0.2, -0.7, 0.4}, {0.0, 0.3, 0.0}});
}
}  // namespace

TEST_CASE("free monodromy is the rotation with D = 2 cos E") {
  for (double e : {-2.0, 0.3, 1.0, 5.5}) {
    const Mat2 g = monodromy(PauliField{}, e);
    CHECK(distance(g, Mat2::rotation(e)) < 1e-14);
    CHECK(std::abs(g.trace() - 2 * std::cos(e)) < 1e-14);
  }
}

TEST_CASE("mass monodromy at zero energy") {
  for (double m : {0.2, 1.0, 2.5}) {
    CHECK(std::abs(monodromy(PauliField::constant({0, m, 0}), 0.0).trace() - 2 * std::cosh(m)) < 1e-12);
  }
}

TEST_CASE("discriminant is holomorphic: Cauchy-Riemann residual") {
  const PauliField p = lumpy();
  const double h = 1e-5;
  for (double x : {-1.0, 0.5, 2.0})
    for (double y : {-0.5, 0.1, 0.8}) {
      const cplx z(x, y);
      const cplx dx = (monodromy(p, z + h).trace() - monodromy(p, z - h).trace()) / (2 * h);
      const cplx dy = (monodromy(p, z + cplx(0, h)).trace() - monodromy(p, z - cplx(0, h)).trace()) / (2 * h);
      // f_y = i f_x
      CHECK(std::abs(dy - cplx(0, 1) * dx) < 1e-6);
    }
}

TEST_CASE("Floquet multipliers: characteristic equation and band/gap structure") {
  const PauliField p = lumpy();
  for (int k = 0; k < 200; ++k) {
    const cplx z(-6 + 12 * counter_uniform(1, k), k % 2 ? 0.0 : counter_uniform(2, k));
    const FloquetData fd = floquet_data(p, z);
    CHECK(std::abs(fd.rho_plus * fd.rho_minus - 1.0) < 1e-10);
    CHECK(std::abs(fd.rho_plus + fd.rho_minus - fd.D) < 1e-10);
    if (fd.tag == Stability::Band) {
      CHECK(std::abs(std::abs(fd.rho_plus) - 1) < 1e-10);
      CHECK(std::abs(fd.rho_minus - std::conj(fd.rho_plus)) < 1e-10);
      CHECK(std::abs(fd.c_minus - std::conj(fd.c_plus)) < 1e-9);
    } else if (fd.tag == Stability::Gap) {
      CHECK(std::abs(fd.rho_plus.imag()) < 1e-12);
      const double a = std::abs(fd.rho_plus), b = std::abs(fd.rho_minus);
      CHECK(std::min(a, b) < 1.0);
      CHECK(std::max(a, b) > 1.0);
    }
    CHECK((fd.g0 * fd.v_plus() - fd.v_plus() * fd.rho_plus).norm() < 1e-9 * fd.v_plus().norm());
    CHECK((fd.g0 * fd.v_minus() - fd.v_minus() * fd.rho_minus).norm() < 1e-9 * fd.v_minus().norm());
  }
}

TEST_CASE("stability scan: free bands touch at multiples of pi") {
  const auto s = stability_scan(PauliField{}, -0.5, 3 * M_PI + 0.5, 0.01);
  REQUIRE(s.edges.size() == 4);
  for (int k = 0; k < 4; ++k) CHECK(std::abs(s.edges[k] - k * M_PI) < 1e-6);
  REQUIRE(s.bands.size() == 5);
  for (int k = 1; k <= 3; ++k) {
    CHECK(std::abs(s.bands[k].first - (k - 1) * M_PI) < 1e-6);
    CHECK(std::abs(s.bands[k].second - k * M_PI) < 1e-6);
  }
  CHECK(s.in_band(1.0));
  CHECK_FALSE(s.in_band(s.edges[1]));
  CHECK_THROWS_AS(stability_scan(PauliField{}, 1, 1, 0.1), ConfigError);
  CHECK_THROWS_AS(stability_scan(PauliField{}, 0, 1, 0.0), ConfigError);
}

TEST_CASE("stability scan: mass gap and massive band touchings") {
  const double m = 0.5;
  const auto s = stability_scan(PauliField::constant({0, m, 0}), -4, 4, 0.01);
  const double touch = std::sqrt(m * m + M_PI * M_PI);
  std::vector<double> expect{-touch, -m, m, touch};
  REQUIRE(s.edges.size() == expect.size());
  for (std::size_t i = 0; i < expect.size(); ++i) CHECK(std::abs(s.edges[i] - expect[i]) < 1e-6);
  bool found_gap = false;
  for (const auto& [a, b] : s.gaps) {
    if (std::abs(a + m) < 1e-6 && std::abs(b - m) < 1e-6) found_gap = true;
  }
  CHECK(found_gap);
  // in the gap D = 2 cosh sqrt(m^2 - E^2)
  for (double e : {-0.4, 0.0, 0.3}) {
    CHECK(std::abs(monodromy(PauliField::constant({0, m, 0}), e).trace() -
                   2 * std::cosh(std::sqrt(m * m - e * e))) < 1e-12);
  }
}

TEST_CASE("stability scan: electrostatic shift translates the bands") {
  const double c = 0.7;
  const auto base = stability_scan(PauliField::constant({0.3, 0.4, 0}), -5, 5, 0.01);
  const auto shifted = stability_scan(PauliField::constant({0.3, 0.4, c}), -5 + c, 5 + c, 0.01);
  REQUIRE(base.edges.size() == shifted.edges.size());
  for (std::size_t i = 0; i < base.edges.size(); ++i) {
    CHECK(std::abs(shifted.edges[i] - base.edges[i] - c) < 1e-8);
  }
}

TEST_CASE("stability scan edges agree with an independent dense scan") {
  const PauliField p = lumpy();
  const auto s = stability_scan(p, -6, 6, 0.02);
  std::vector<double> dense;
  const int n = 600000;
  double prev = std::abs(monodromy(p, -6.0).trace().real()) - 2;
  for (int i = 1; i <= n; ++i) {
    const double e = -6 + 12.0 * i / n;
    const double f = std::abs(monodromy(p, e).trace().real()) - 2;
    if ((f < 0) != (prev < 0)) dense.push_back(e);
    prev = f;
  }
  REQUIRE(dense.size() == s.edges.size());
  for (std::size_t i = 0; i < dense.size(); ++i) CHECK(std::abs(dense[i] - s.edges[i]) < 1e-4);
  for (double e : s.edges) CHECK(std::abs(std::abs(monodromy(p, e).trace().real()) - 2) < kBandEdgeTol);
  std::ostringstream os;
  s.write_json(os);
  CHECK(os.str().find("\"bands\"") != std::string::npos);
}

TEST_CASE("Floquet solutions of the free operator") {
  for (double e : {0.3, 1.5, 2.9}) {
    const auto fs = floquet_solutions(PauliField{}, e);
    CHECK(std::abs(fs.data.rho_plus - std::polar(1.0, e)) < 1e-12);
    CHECK(std::abs(fs.data.c_plus - cplx(0, 1)) < 1e-12);
    CHECK(std::abs(fs.data.c_minus - cplx(0, -1)) < 1e-12);
  }
  CHECK_THROWS_AS(floquet_solutions(PauliField{}, M_PI), NumericalDegeneracy);
}

TEST_CASE("Floquet quasi-periodicity along three periods") {
  const PauliField p = lumpy();
  const auto bands = stability_scan(p, -5, 5, 0.01);
  for (const auto& [a, b] : bands.bands) {
    if (b - a < 0.1) continue;
    const double e = 0.5 * (a + b);
    const auto fs = floquet_solutions(p, e);
    const auto tr = floquet_trace(p, fs.v_plus, e, 3, 0.01);
    const auto tr1 = floquet_trace(p, fs.v_plus * fs.data.rho_plus, e, 2, 0.01);
    // samples of tr at x + 1 against rho * tr at x
    std::size_t off = 0;
    while (tr.x[off] < 0.5 - 1e-12) ++off;
    for (std::size_t i = 0; i < tr1.x.size(); ++i) {
      CHECK(std::abs(tr.x[off + i] - tr1.x[i] - 1.0) < 1e-12);
      CHECK((tr.psi[off + i] - tr1.psi[i]).norm() < 1e-8);
    }
  }
}

TEST_CASE("periodic Weyl m-function") {
  const auto w = weyl_m_periodic(PauliField{}, cplx(0, 1));
  CHECK(std::abs(w.m - cplx(0, 1)) < 1e-12);
  CHECK(std::abs(w.rho) < 1.0);
  for (cplx z : {cplx(0.5, 0.3), cplx(-1.0, 2.0), cplx(3.0, 0.05)}) {
    CHECK(std::abs(weyl_m_periodic(PauliField{}, z).m - cplx(0, 1)) < 1e-10);
  }
  const PauliField p = lumpy();
  const cplx z(0.8, 0.5);
  const auto wp = weyl_m_periodic(p, z);
  CHECK(std::abs(wp.rho) < 1.0);
  const auto tr = floquet_trace(p, wp.v, z, 20, 0.05);
  for (int k = 1; k <= 20; ++k) {
    std::size_t i = 0;
    while (tr.x[i] < -0.5 + k - 1e-12) ++i;
    const double ratio = std::pow(tr.psi[i].norm() / tr.psi[0].norm(), 1.0 / k);
    CHECK(std::abs(ratio - std::abs(wp.rho)) < 1e-3);
  }
  CHECK_THROWS_AS(weyl_m_periodic(p, 1.0), ConfigError);
}

TEST_CASE("branch tracking follows the nearest root") {
  std::vector<cplx> path;
  for (int i = 0; i <= 100; ++i) path.emplace_back(0.1 + 0.02 * i, 0.05);
  const auto br = track_floquet_branches(PauliField{}, path);
  for (std::size_t i = 0; i < path.size(); ++i) {
    // the branch exp(i z) is followed continuously
    CHECK(std::abs(br[i].first - std::exp(cplx(0, 1) * path[i])) < 1e-10);
  }
}

TEST_CASE("band CSV") {
  std::ostringstream os;
  write_band_csv(os, PauliField{}, {0.5, M_PI + 0.5});
  CHECK(os.str().rfind("E,re_D,im_D,in_band\n", 0) == 0);
  CHECK(os.str().find(",1\n") != std::string::npos);
}
