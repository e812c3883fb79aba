#include "diracloc/lyapunov.h"

#include <cmath>
#include <ostream>

#include "diracloc/errors.h"
#include "diracloc/io.h"
#include "diracloc/transfer.h"
#include "json.hpp"

namespace diracloc {

namespace {

void check_sizes(long n, long R) {
  if (n < 1) throw ConfigError("lyapunov: need n >= 1");
  if (R < 2) throw ConfigError("lyapunov: need R >= 2");
}

/// log ||U_E(n)|| for realization stream `stream` of the model.
double log_norm_of_orbit(const AndersonModel& model, CellTransferCache& cache, long n,
                         std::uint64_t stream) {
  RenormalizedProduct p;
  for (long k = 1; k <= n; ++k) p.apply(cache.get(model.law.draw(stream, k)));
  return p.log_norm;
}

double sample_std(const std::vector<double>& x, double mean) {
  double s = 0.0;
  for (double v : x) s += (v - mean) * (v - mean);
  return std::sqrt(s / static_cast<double>(x.size() - 1));
}

}  // namespace

LyapunovEstimate lyapunov_estimate(const AndersonModel& model, double E, long n, long R,
                                   std::uint64_t seed) {
  check_sizes(n, R);
  const CellTemplate tmpl(model.per, model.site);
  CellTransferCache cache(tmpl, E);
  std::vector<double> g(static_cast<std::size_t>(R));
  if (!model.law.nontrivial()) {
    const double v = log_norm_of_orbit(model, cache, n, derive_seed(seed, 0)) / n;
    std::fill(g.begin(), g.end(), v);
  } else {
    for (long r = 0; r < R; ++r) {
      g[static_cast<std::size_t>(r)] = log_norm_of_orbit(model, cache, n, derive_seed(seed, r)) / n;
    }
  }
  double mean = 0.0;
  for (double v : g) mean += v;
  mean /= static_cast<double>(R);
  return {E, mean, sample_std(g, mean) / std::sqrt(static_cast<double>(R)), n, R, seed};
}

LyapunovEstimate lyapunov_single_orbit(const AndersonModel& model, double E, long n, long R,
                                       std::uint64_t seed) {
  check_sizes(n, R);
  const CellTemplate tmpl(model.per, model.site);
  CellTransferCache cache(tmpl, E);
  const std::uint64_t stream = derive_seed(seed, 0x8000000000000000ULL);
  RenormalizedProduct p;
  std::vector<double> batch(static_cast<std::size_t>(R));
  long cell = 1;
  for (long r = 0; r < R; ++r) {
    const double start = p.log_norm;
    for (long k = 0; k < n; ++k, ++cell) p.apply(cache.get(model.law.draw(stream, cell)));
    batch[static_cast<std::size_t>(r)] = (p.log_norm - start) / n;
  }
  const double mean = p.log_norm / (static_cast<double>(n) * R);
  return {E, mean, sample_std(batch, mean) / std::sqrt(static_cast<double>(R)), n * R, 1, seed};
}

HolderFit holder_fit(const std::vector<double>& grid, const std::vector<double>& values) {
  if (grid.size() != values.size()) throw ConfigError("holder_fit: size mismatch");
  std::vector<double> xs, ys;
  for (std::size_t step = 1; step < grid.size(); step *= 2) {
    for (std::size_t i = 0; i + step < grid.size(); ++i) {
      const double dx = std::abs(grid[i + step] - grid[i]);
      const double dy = std::abs(values[i + step] - values[i]);
      if (dx > 0.0 && dy > 0.0) {
        xs.push_back(std::log(dx));
        ys.push_back(std::log(dy));
      }
    }
  }
  HolderFit fit;
  fit.pairs = xs.size();
  if (xs.size() < 3) return fit;
  const double m = static_cast<double>(xs.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= m;
  my /= m;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (sxx == 0.0) return fit;
  fit.alpha_hat = sxy / sxx;
  fit.log_c_hat = my - fit.alpha_hat * mx;
  double ssr = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - fit.log_c_hat - fit.alpha_hat * xs[i];
    ssr += r * r;
  }
  const double se = std::sqrt(ssr / (m - 2.0) / sxx);
  fit.ci_lo = fit.alpha_hat - 1.96 * se;
  fit.ci_hi = fit.alpha_hat + 1.96 * se;
  return fit;
}

LyapunovCurve lyapunov_curve(const AndersonModel& model, const std::vector<double>& grid, long n,
                             long R, std::uint64_t seed, const CriticalSet* critical,
                             double margin) {
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) throw ConfigError("lyapunov_curve: grid must increase");
  }
  LyapunovCurve c;
  std::vector<double> vals;
  for (double e : grid) {
    if (critical && critical->distance(e) < margin) {
      c.warnings.push_back("energy " + fmt(e) + " lies within " + fmt(margin) +
                           " of a critical energy");
    }
    c.points.push_back(lyapunov_estimate(model, e, n, R, seed));
    vals.push_back(c.points.back().gamma_hat);
  }
  c.fit = holder_fit(grid, vals);
  return c;
}

void LyapunovCurve::write_csv(std::ostream& os) const {
  os << "E,gamma_hat,stderr,n,R\n";
  for (const auto& p : points) {
    os << fmt(p.E) << ',' << fmt(p.gamma_hat) << ',' << fmt(p.std_error) << ',' << p.n << ','
       << p.R << '\n';
  }
}

void LyapunovCurve::write_fit_json(std::ostream& os) const {
  nlohmann::json j{{"alpha_hat", fit.alpha_hat},
                   {"C_hat", std::exp(fit.log_c_hat)},
                   {"CI", {fit.ci_lo, fit.ci_hi}},
                   {"pairs", fit.pairs},
                   {"warnings", warnings}};
  os << j.dump(2) << '\n';
}

double lyapunov_upper_bound(const AndersonModel& model) { return model.max_cell_gronwall(); }

namespace {

/// log ||U_E(n) x|| per realization with x = (1, 0).
std::vector<double> vector_log_norms(const AndersonModel& model, double E, long n, long R,
                                     std::uint64_t seed) {
  check_sizes(n, R);
  const CellTemplate tmpl(model.per, model.site);
  CellTransferCache cache(tmpl, E);
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(R));
  for (long r = 0; r < R; ++r) {
    const std::uint64_t stream = derive_seed(seed, r);
    RenormalizedVector v;
    for (long k = 1; k <= n; ++k) v.apply(cache.get(model.law.draw(stream, k)));
    out.push_back(v.log_norm);
  }
  return out;
}

}  // namespace

double large_deviation_probe(const AndersonModel& model, double E, long n, long R, double eps,
                             double gamma_ref, std::uint64_t seed) {
  if (!(eps >= 0.0)) throw ConfigError("large_deviation_probe: need eps >= 0");
  const auto ln = vector_log_norms(model, E, n, R, seed);
  long hits = 0;
  for (double l : ln) {
    if (l >= (gamma_ref - eps) * n && l <= (gamma_ref + eps) * n) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(R);
}

double inverse_moment(const AndersonModel& model, double E, long n, long R, double delta,
                      std::uint64_t seed) {
  if (!(delta > 0.0)) throw ConfigError("inverse_moment: need delta > 0");
  const auto ln = vector_log_norms(model, E, n, R, seed);
  double s = 0.0;
  for (double l : ln) s += std::exp(-delta * l);
  return s / static_cast<double>(R);
}

}  // namespace diracloc
