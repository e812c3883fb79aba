#include "diracloc/potential.h"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include "diracloc/errors.h"

namespace diracloc {

namespace {

constexpr double kBreakpointTol = 1e-14;

std::uint64_t splitmix_finalize(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xbf58476d1ce4e5b9ULL;
  z ^= z >> 27;
  z *= 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return z;
}

void validate_breakpoints(std::vector<double>& bp, std::size_t n_coeffs) {
  if (bp.size() < 2 || bp.size() != n_coeffs + 1) {
    throw ConfigError("PauliField: need one more breakpoint than segments");
  }
  if (std::abs(bp.front() + 0.5) > 1e-12 || std::abs(bp.back() - 0.5) > 1e-12) {
    throw ConfigError("PauliField: breakpoints must span [-1/2, 1/2]");
  }
  bp.front() = -0.5;
  bp.back() = 0.5;
  for (std::size_t i = 1; i < bp.size(); ++i) {
    if (!(bp[i] > bp[i - 1])) throw ConfigError("PauliField: breakpoints must increase strictly");
  }
}

bool finite(const PauliCoeffs& v) {
  return std::isfinite(v.am) && std::isfinite(v.sc) && std::isfinite(v.el);
}

}  // namespace

double PauliCoeffs::matrix_norm() const { return std::abs(el) + std::hypot(am, sc); }

RealMat2 PauliCoeffs::matrix() const {
  return {{{el + sc, am}, {am, el - sc}}};
}

PauliCoeffs pauli_decompose(const RealMat2& m) {
  const double asym = std::abs(m[0][1] - m[1][0]);
  if (asym > 1e-12) {
    std::ostringstream os;
    os << "pauli_decompose: matrix is not symmetric, |M12 - M21| = " << std::setprecision(3)
       << asym;
    throw ConfigError(os.str());
  }
  return {m[0][1], 0.5 * (m[0][0] - m[1][1]), 0.5 * (m[0][0] + m[1][1])};
}

// ---------------------------------------------------------------- PauliField

PauliField::PauliField() : breakpoints_{-0.5, 0.5}, coeffs_{PauliCoeffs{}} {}

PauliField::PauliField(std::vector<double> breakpoints, std::vector<PauliCoeffs> coeffs)
    : breakpoints_(std::move(breakpoints)), coeffs_(std::move(coeffs)) {
  validate_breakpoints(breakpoints_, coeffs_.size());
  for (const auto& c : coeffs_) {
    if (!finite(c)) throw ConfigError("PauliField: non-finite coefficient");
  }
}

PauliField PauliField::constant(PauliCoeffs v) { return PauliField({-0.5, 0.5}, {v}); }

PauliField PauliField::uniform_grid(std::vector<PauliCoeffs> coeffs) {
  if (coeffs.empty()) throw ConfigError("PauliField: empty coefficient list");
  const std::size_t n = coeffs.size();
  std::vector<double> bp(n + 1);
  for (std::size_t i = 0; i <= n; ++i) bp[i] = -0.5 + static_cast<double>(i) / n;
  return PauliField(std::move(bp), std::move(coeffs));
}

PauliField PauliField::project(const std::function<RealMat2(double)>& f, int segments,
                               int samples_per_segment) {
  if (segments < 1 || samples_per_segment < 1) {
    throw ConfigError("PauliField::project: need positive segment and sample counts");
  }
  std::vector<PauliCoeffs> coeffs;
  coeffs.reserve(segments);
  const double h = 1.0 / segments;
  for (int s = 0; s < segments; ++s) {
    RealMat2 avg{};
    for (int k = 0; k < samples_per_segment; ++k) {
      const double x = -0.5 + h * (s + (k + 0.5) / samples_per_segment);
      const RealMat2 m = f(x);
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) avg[i][j] += m[i][j] / samples_per_segment;
    }
    coeffs.push_back(pauli_decompose(avg));
  }
  return uniform_grid(std::move(coeffs));
}

PauliCoeffs PauliField::at(double x) const {
  const double y = x - std::floor(x + 0.5);
  auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), y);
  std::size_t idx = static_cast<std::size_t>(std::distance(breakpoints_.begin(), it));
  idx = std::clamp<std::size_t>(idx, 1, coeffs_.size()) - 1;
  return coeffs_[idx];
}

double PauliField::sup_norm() const {
  double s = 0.0;
  for (const auto& c : coeffs_) s = std::max(s, c.matrix_norm());
  return s;
}

bool PauliField::is_zero() const {
  return std::all_of(coeffs_.begin(), coeffs_.end(),
                     [](const PauliCoeffs& c) { return c == PauliCoeffs{}; });
}

// ------------------------------------------------------- SingleSitePotential

SingleSitePotential::SingleSitePotential() : kind_(Kind::NormalForm) {}

SingleSitePotential::SingleSitePotential(PauliField field, Kind kind)
    : field_(std::move(field)), kind_(kind) {
  for (const auto& c : field_.coeffs()) {
    if (kind_ == Kind::NormalForm && c.el != 0.0) {
      throw ConfigError("single-site potential: normal form admits only q_am and q_sc");
    }
    if (kind_ == Kind::Electrostatic && (c.am != 0.0 || c.sc != 0.0)) {
      throw ConfigError("single-site potential: electrostatic case admits only q_el");
    }
  }
}

namespace {

PauliField bump(double lo, double hi, PauliCoeffs inside) {
  if (!(lo < hi) || lo < -0.5 || hi > 0.5) {
    throw ConfigError("single-site potential: support must be a subinterval of [-1/2, 1/2]");
  }
  std::vector<double> bp{-0.5};
  std::vector<PauliCoeffs> cs;
  if (lo > -0.5) {
    bp.push_back(lo);
    cs.push_back({});
  }
  cs.push_back(inside);
  if (hi < 0.5) {
    bp.push_back(hi);
    cs.push_back({});
  }
  bp.push_back(0.5);
  return PauliField(std::move(bp), std::move(cs));
}

}  // namespace

SingleSitePotential SingleSitePotential::mass_bump(double lo, double hi, double amplitude) {
  return SingleSitePotential(bump(lo, hi, {0.0, amplitude, 0.0}), Kind::NormalForm);
}

SingleSitePotential SingleSitePotential::electrostatic_bump(double lo, double hi,
                                                            double amplitude) {
  return SingleSitePotential(bump(lo, hi, {0.0, 0.0, amplitude}), Kind::Electrostatic);
}

PauliCoeffs SingleSitePotential::at(double x) const {
  if (x < -0.5 || x > 0.5) return {};
  return field_.at(std::min(x, 0.5 - 1e-15));
}

double SingleSitePotential::overlap_measure(const PauliField& background) const {
  const CellTemplate grid(background, *this);
  const auto& pts = grid.local_breakpoints();
  double measure = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double mid = 0.5 * (pts[i] + pts[i + 1]);
    const PauliCoeffs b = background.at(mid);
    const PauliCoeffs q = field_.at(mid);
    if (q.el != 0.0 && (b.am * b.am + b.sc * b.sc) > 0.0) measure += pts[i + 1] - pts[i];
  }
  return measure;
}

// ------------------------------------------------------------- DisorderModel

std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t counter) {
  std::uint64_t z = splitmix_finalize(seed ^ 0x9e3779b97f4a7c15ULL);
  z += counter * 0xd1b54a32d192ed03ULL + 0x632be59bd9b4e019ULL;
  return splitmix_finalize(z);
}

double counter_uniform(std::uint64_t seed, std::uint64_t counter) {
  return static_cast<double>(counter_hash(seed, counter) >> 11) * 0x1.0p-53;
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  return counter_hash(master ^ 0x5851f42d4c957f2dULL, stream);
}

DisorderModel DisorderModel::discrete(std::vector<double> atoms, std::vector<double> probs,
                                      std::uint64_t seed) {
  if (atoms.empty() || atoms.size() != probs.size()) {
    throw ConfigError("disorder law: atoms and probabilities must have equal nonzero length");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if (!std::isfinite(atoms[i])) throw ConfigError("disorder law: non-finite atom");
    if (!(probs[i] >= 0.0)) throw ConfigError("disorder law: negative probability");
    total += probs[i];
  }
  if (std::abs(total - 1.0) > 1e-12) throw ConfigError("disorder law: probabilities must sum to 1");
  DisorderModel m;
  m.kind_ = Kind::Discrete;
  m.atoms_ = std::move(atoms);
  m.probs_ = std::move(probs);
  m.cdf_.resize(m.probs_.size());
  std::partial_sum(m.probs_.begin(), m.probs_.end(), m.cdf_.begin());
  m.cdf_.back() = 1.0;
  m.seed_ = seed;
  return m;
}

DisorderModel DisorderModel::bernoulli(double p_one, std::uint64_t seed) {
  if (!(p_one > 0.0 && p_one < 1.0)) throw ConfigError("bernoulli law: need 0 < p < 1");
  return discrete({0.0, 1.0}, {1.0 - p_one, p_one}, seed);
}

DisorderModel DisorderModel::uniform(double lo, double hi, std::uint64_t seed) {
  if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
    throw ConfigError("uniform law: need finite lo < hi");
  }
  DisorderModel m;
  m.kind_ = Kind::Uniform;
  m.lo_ = lo;
  m.hi_ = hi;
  m.seed_ = seed;
  return m;
}

DisorderModel DisorderModel::degenerate(double value, std::uint64_t seed) {
  return discrete({value}, {1.0}, seed);
}

double DisorderModel::draw(std::uint64_t seed, long n) const {
  const double u = counter_uniform(seed, static_cast<std::uint64_t>(n));
  if (kind_ == Kind::Uniform) return lo_ + (hi_ - lo_) * u;
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  const std::size_t idx =
      std::min<std::size_t>(static_cast<std::size_t>(it - cdf_.begin()), atoms_.size() - 1);
  return atoms_[idx];
}

bool DisorderModel::contains(double lambda) const {
  if (kind_ == Kind::Uniform) return lambda >= lo_ && lambda <= hi_;
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    if (atoms_[i] == lambda && probs_[i] > 0.0) return true;
  }
  return false;
}

bool DisorderModel::nontrivial() const {
  if (kind_ == Kind::Uniform) return true;
  return std::count_if(probs_.begin(), probs_.end(), [](double p) { return p > 0.0; }) >= 2;
}

std::pair<double, double> DisorderModel::extreme_support() const {
  if (kind_ == Kind::Uniform) return {lo_, hi_};
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    if (probs_[i] <= 0.0) continue;
    lo = std::min(lo, atoms_[i]);
    hi = std::max(hi, atoms_[i]);
  }
  return {lo, hi};
}

double DisorderModel::max_abs() const {
  const auto [lo, hi] = extreme_support();
  return std::max(std::abs(lo), std::abs(hi));
}

double DisorderModel::mean() const {
  if (kind_ == Kind::Uniform) return 0.5 * (lo_ + hi_);
  double m = 0.0;
  for (std::size_t i = 0; i < atoms_.size(); ++i) m += atoms_[i] * probs_[i];
  return m;
}

// ------------------------------------------------------- DisorderRealization

double DisorderRealization::at(long n) const {
  if (!covers(n)) {
    throw ConfigError("disorder realization: cell " + std::to_string(n) +
                      " outside window [" + std::to_string(n_min) + ", " +
                      std::to_string(n_max) + "]");
  }
  return lambda[static_cast<std::size_t>(n - n_min)];
}

void DisorderRealization::write_csv(std::ostream& os) const {
  os << "n,lambda\n" << std::setprecision(17);
  for (std::size_t i = 0; i < lambda.size(); ++i) {
    os << (n_min + static_cast<long>(i)) << ',' << lambda[i] << '\n';
  }
}

DisorderRealization DisorderRealization::read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("n,lambda", 0) != 0) {
    throw ConfigError("realization CSV: expected header 'n,lambda'");
  }
  DisorderRealization r;
  bool first = true;
  int line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw ConfigError("realization CSV: line " + std::to_string(line_no) + " has no comma");
    }
    long n = 0;
    double lam = 0.0;
    try {
      n = std::stol(line.substr(0, comma));
      lam = std::stod(line.substr(comma + 1));
    } catch (const std::exception&) {
      throw ConfigError("realization CSV: cannot parse line " + std::to_string(line_no));
    }
    if (first) {
      r.n_min = n;
      first = false;
    } else if (n != r.n_min + static_cast<long>(r.lambda.size())) {
      throw ConfigError("realization CSV: indices must be consecutive (line " +
                        std::to_string(line_no) + ")");
    }
    r.lambda.push_back(lam);
  }
  r.n_max = r.n_min + static_cast<long>(r.lambda.size()) - 1;
  return r;
}

DisorderRealization sample_disorder(const DisorderModel& model, long n_min, long n_max,
                                    std::uint64_t seed) {
  if (n_max < n_min) throw ConfigError("sample_disorder: empty window");
  DisorderRealization r;
  r.n_min = n_min;
  r.n_max = n_max;
  r.lambda.resize(static_cast<std::size_t>(n_max - n_min + 1));
  for (long n = n_min; n <= n_max; ++n) {
    r.lambda[static_cast<std::size_t>(n - n_min)] = model.draw(seed, n);
  }
  return r;
}

// ---------------------------------------------------------------- Slice

double Slice::length() const {
  double s = 0.0;
  for (const auto& seg : segments) s += seg.length;
  return s;
}

double Slice::gronwall_integral() const {
  double s = 0.0;
  for (const auto& seg : segments) s += seg.length * (std::abs(seg.v.am) + std::abs(seg.v.sc));
  return s;
}

double Slice::sup_norm() const {
  double s = 0.0;
  for (const auto& seg : segments) s = std::max(s, seg.v.matrix_norm());
  return s;
}

// --------------------------------------------------------------- CellTemplate

CellTemplate::CellTemplate(const PauliField& per, const SingleSitePotential& site) {
  std::vector<double> pts = per.breakpoints();
  const auto& sp = site.field().breakpoints();
  pts.insert(pts.end(), sp.begin(), sp.end());
  std::sort(pts.begin(), pts.end());
  points_.clear();
  for (double p : pts) {
    if (points_.empty() || p - points_.back() > kBreakpointTol) points_.push_back(p);
  }
  points_.front() = -0.5;
  points_.back() = 0.5;
  for (std::size_t i = 0; i + 1 < points_.size(); ++i) {
    const double mid = 0.5 * (points_[i] + points_[i + 1]);
    lengths_.push_back(points_[i + 1] - points_[i]);
    per_.push_back(per.at(mid));
    site_.push_back(site.at(mid));
  }
}

Slice CellTemplate::cell(long n, double lambda) const {
  Slice s;
  s.x0 = static_cast<double>(n) - 0.5;
  s.segments.reserve(lengths_.size());
  for (std::size_t i = 0; i < lengths_.size(); ++i) {
    s.segments.push_back({lengths_[i], per_[i] + site_[i] * lambda});
  }
  return s;
}

// -------------------------------------------------------------------- Medium

long cell_index(double x) { return static_cast<long>(std::floor(x + 0.5)); }

Medium::Medium(PauliField per, SingleSitePotential site, DisorderRealization realization)
    : per_(std::move(per)),
      site_(std::move(site)),
      realization_(std::move(realization)),
      template_(per_, site_) {}

Medium::Medium(PauliField per) : per_(std::move(per)), template_(per_, site_) {}

double Medium::coupling(long n) const { return realization_ ? realization_->at(n) : 0.0; }

bool Medium::covers_cell(long n) const { return !realization_ || realization_->covers(n); }

namespace {
long last_cell_before(double b) { return static_cast<long>(std::ceil(b + 0.5)) - 1; }
}  // namespace

bool Medium::covers(double a, double b) const {
  if (!realization_) return true;
  return realization_->covers(cell_index(a)) && realization_->covers(last_cell_before(b));
}

Slice Medium::cell(long n) const { return template_.cell(n, coupling(n)); }

Slice Medium::slice(double a, double b) const {
  if (!(b >= a)) throw ConfigError("Medium::slice: need a <= b");
  if (!covers(a, b)) throw ConfigError("Medium::slice: interval outside the realization window");
  Slice s;
  s.x0 = a;
  const auto& pts = template_.local_breakpoints();
  const long n_lo = cell_index(a);
  const long n_hi = last_cell_before(b);
  for (long n = n_lo; n <= n_hi; ++n) {
    const double lam = coupling(n);
    const double shift = static_cast<double>(n);
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
      const double lo = std::max(a, shift + pts[i]);
      const double hi = std::min(b, shift + pts[i + 1]);
      if (hi - lo > kBreakpointTol) s.segments.push_back({hi - lo, template_.coeff(i, lam)});
    }
  }
  return s;
}

PauliCoeffs Medium::coeffs(double x) const {
  const long n = cell_index(x);
  return per_.at(x) + site_.at(x - static_cast<double>(n)) * coupling(n);
}

RealMat2 Medium::potential(double x) const { return coeffs(x).matrix(); }

RealMat2 total_potential(const PauliField& per, const DisorderRealization& real,
                         const SingleSitePotential& site, double x) {
  const long n = cell_index(x);
  if (!real.covers(n)) throw ConfigError("total_potential: x outside the realization window");
  return (per.at(x) + site.at(x - static_cast<double>(n)) * real.at(n)).matrix();
}

// ------------------------------------------------------------- AndersonModel

Medium AndersonModel::medium(long n_min, long n_max, std::uint64_t master_seed,
                             std::uint64_t r) const {
  return Medium(per, site, sample_disorder(law, n_min, n_max, derive_seed(master_seed, r)));
}

Medium AndersonModel::medium_for(double a, double b, std::uint64_t master_seed,
                                 std::uint64_t r) const {
  return medium(cell_index(a), last_cell_before(b), master_seed, r);
}

double AndersonModel::sup_norm() const {
  const CellTemplate grid(per, site);
  const auto [lo, hi] = law.extreme_support();
  double s = 0.0;
  for (std::size_t i = 0; i < grid.segments(); ++i) {
    s = std::max({s, grid.coeff(i, lo).matrix_norm(), grid.coeff(i, hi).matrix_norm()});
  }
  return s;
}

double AndersonModel::max_cell_gronwall() const {
  const CellTemplate grid(per, site);
  const auto [lo, hi] = law.extreme_support();
  return std::max(grid.cell(0, lo).gronwall_integral(), grid.cell(0, hi).gronwall_integral());
}

// ----------------------------------------------------------- NormalFormSlice

NormalFormSlice::NormalFormSlice(const Slice& slice) : slice_(slice) {
  double x = slice_.x0;
  double phi = 0.0;
  for (const auto& seg : slice_.segments) {
    starts_.push_back(x);
    phase_starts_.push_back(phi);
    x += seg.length;
    phi += seg.v.el * seg.length;
  }
}

std::size_t NormalFormSlice::locate(double x) const {
  if (starts_.empty()) throw ConfigError("NormalFormSlice: empty slice");
  auto it = std::upper_bound(starts_.begin(), starts_.end(), x);
  if (it == starts_.begin()) return 0;
  return static_cast<std::size_t>(std::distance(starts_.begin(), it)) - 1;
}

double NormalFormSlice::phase(double x) const {
  const std::size_t i = locate(x);
  return phase_starts_[i] + slice_.segments[i].v.el * (x - starts_[i]);
}

PauliCoeffs NormalFormSlice::original(double x) const { return slice_.segments[locate(x)].v; }

std::pair<double, double> NormalFormSlice::coefficients(double x) const {
  const PauliCoeffs v = original(x);
  const double t = 2.0 * phase(x);
  const double c = std::cos(t), s = std::sin(t);
  return {v.am * c - v.sc * s, v.am * s + v.sc * c};
}

RealMat2 NormalFormSlice::spinor_gauge(double x) const {
  const double p = phase(x);
  return {{{std::cos(p), std::sin(p)}, {-std::sin(p), std::cos(p)}}};
}

NormalFormSlice gauge_to_normal_form(const Slice& slice) { return NormalFormSlice(slice); }

}  // namespace diracloc
