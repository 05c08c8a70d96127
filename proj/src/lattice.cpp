#include "smlab/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include "smlab/rng.hpp"

namespace smlab {

namespace {
double lp_norm(const Vec& a, double s) {
  if (std::isinf(s)) return a.size() ? a.maxCoeff() : 0.0;
  if (s == 1.0) return a.sum();
  if (s == 2.0) return a.norm();
  return std::pow(a.array().pow(s).sum(), 1.0 / s);
}
}  // namespace

LatticeSpec LatticeSpec::seq(double s, int m) {
  require(s >= 1.0, ErrCode::invalid_argument, "lattice exponent s must be >= 1");
  require(m >= 1, ErrCode::invalid_argument, "lattice dimension must be >= 1");
  LatticeSpec y;
  y.kind_ = Kind::sequence;
  y.s_ = s;
  y.m_outer_ = m;
  y.dim_ = m;
  return y;
}

LatticeSpec LatticeSpec::mixed(double s_outer, int m_outer, int m_inner) {
  require(s_outer >= 1.0, ErrCode::invalid_argument, "outer exponent must be >= 1");
  require(m_outer >= 1 && m_inner >= 1, ErrCode::invalid_argument,
          "mixed lattice dimensions must be >= 1");
  LatticeSpec y;
  y.kind_ = Kind::mixed;
  y.s_ = s_outer;
  y.m_outer_ = m_outer;
  y.m_inner_ = m_inner;
  y.dim_ = m_outer * m_inner;
  return y;
}

LatticeSpec LatticeSpec::convexify(LatticeSpec base, double p) {
  require(p >= 1.0, ErrCode::invalid_argument, "convexification power must be >= 1");
  require(p <= base.convexity_exponent() + 1e-12, ErrCode::invalid_argument,
          "base lattice is not " + std::to_string(p) + "-convex");
  LatticeSpec y;
  y.kind_ = Kind::convexified;
  y.p_ = p;
  y.dim_ = base.dim();
  y.base_ = std::make_shared<LatticeSpec>(std::move(base));
  return y;
}

double LatticeSpec::convexity_exponent() const {
  switch (kind_) {
    case Kind::sequence:
      return s_;
    case Kind::mixed:
      return std::min(s_, 2.0);
    case Kind::convexified:
      return base_->convexity_exponent() * p_;
  }
  return 1.0;
}

double LatticeSpec::norm(const CVec& y) const { return norm_abs(y.cwiseAbs()); }

double LatticeSpec::norm_abs(const Vec& a) const {
  require(static_cast<int>(a.size()) == dim_, ErrCode::invalid_argument,
          "lattice norm: vector has dimension " + std::to_string(a.size()) + ", expected " +
              std::to_string(dim_));
  switch (kind_) {
    case Kind::sequence:
      return lp_norm(a, s_);
    case Kind::mixed: {
      // blocks of m_inner entries; inner l^2, outer l^s
      Vec outer(m_outer_);
      for (int i = 0; i < m_outer_; ++i)
        outer(i) = a.segment(i * m_inner_, m_inner_).norm();
      return lp_norm(outer, s_);
    }
    case Kind::convexified:
      return std::pow(base_->norm_abs(a.array().pow(1.0 / p_).matrix()), p_);
  }
  return 0.0;
}

std::string LatticeSpec::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case Kind::sequence:
      os << "l^" << s_ << "_" << m_outer_;
      break;
    case Kind::mixed:
      os << "l^" << s_ << "_" << m_outer_ << "(l^2_" << m_inner_ << ")";
      break;
    case Kind::convexified:
      os << "(" << base_->describe() << ")^" << p_;
      break;
  }
  return os.str();
}

double bochner_norm(double p, const LatticeSpec& Y, const Space& space, const VectorField& f) {
  require(p >= 1.0, ErrCode::invalid_argument, "bochner_norm: p must be >= 1");
  require(static_cast<int>(f.rows()) == space.size(), ErrCode::invalid_argument,
          "bochner_norm: field rows must match point count");
  if (std::isinf(p)) {
    double best = 0.0;
    for (int x = 0; x < space.size(); ++x)
      best = std::max(best, Y.norm(f.row(x).transpose()));
    return best;
  }
  double acc = 0.0;
  for (int x = 0; x < space.size(); ++x)
    acc += space.mu(x) * std::pow(Y.norm(f.row(x).transpose()), p);
  return std::pow(acc, 1.0 / p);
}

double bochner_norm(double p, const LatticeSpec& Y, const Space& space, const RealField& f) {
  VectorField g = f.cast<Complex>();
  return bochner_norm(p, Y, space, g);
}

double square_function_norm(double p, const LatticeSpec& Y, const Space& space,
                            const std::vector<VectorField>& fields) {
  require(!fields.empty(), ErrCode::invalid_argument, "square_function_norm: no fields");
  RealField sq = RealField::Zero(fields[0].rows(), fields[0].cols());
  for (const auto& f : fields) {
    require(f.rows() == sq.rows() && f.cols() == sq.cols(), ErrCode::invalid_argument,
            "square_function_norm: field shapes differ");
    sq += f.cwiseAbs2();
  }
  return bochner_norm(p, Y, space, RealField(sq.cwiseSqrt()));
}

double rademacher_norm(double p, const LatticeSpec& Y, const Space& space,
                       const std::vector<VectorField>& fields, const RademacherOptions& opt) {
  require(!fields.empty(), ErrCode::invalid_argument, "rademacher_norm: no fields");
  const int K = static_cast<int>(fields.size());
  require(opt.moment == 1 || opt.moment == 2, ErrCode::invalid_argument,
          "rademacher_norm: moment must be 1 or 2");
  auto accumulate = [&](auto&& sign_of) {
    VectorField sum = VectorField::Zero(fields[0].rows(), fields[0].cols());
    for (int k = 0; k < K; ++k) sum += sign_of(k) * fields[k];
    return bochner_norm(p, Y, space, sum);
  };
  if (opt.exact) {
    require(K <= 16, ErrCode::invalid_argument,
            "rademacher_norm: exact mode supports at most 16 fields (2^K patterns)");
    const std::uint64_t total = 1ull << K;
    double acc = 0.0;
    for (std::uint64_t mask = 0; mask < total; ++mask) {
      double v = accumulate([&](int k) { return (mask >> k) & 1 ? -1.0 : 1.0; });
      acc += opt.moment == 1 ? v : v * v;
    }
    acc /= static_cast<double>(total);
    return opt.moment == 1 ? acc : std::sqrt(acc);
  }
  require(opt.samples >= 1, ErrCode::invalid_argument,
          "rademacher_norm: monte carlo mode needs samples >= 1");
  double acc = 0.0;
  for (int i = 0; i < opt.samples; ++i) {
    Rng rng(Rng::derive(opt.seed, static_cast<std::uint64_t>(i)));
    std::vector<double> signs(K);
    for (int k = 0; k < K; ++k) signs[k] = rng.uniform() < 0.5 ? 1.0 : -1.0;
    double v = accumulate([&](int k) { return signs[k]; });
    acc += opt.moment == 1 ? v : v * v;
  }
  acc /= opt.samples;
  return opt.moment == 1 ? acc : std::sqrt(acc);
}

double alpha_exponent(double p, double pY, double qY) {
  require(p > 1.0 && std::isfinite(p), ErrCode::invalid_argument, "alpha: p must be in (1,inf)");
  require(pY > 1.0 && pY <= 2.0, ErrCode::invalid_argument, "alpha: pY must be in (1,2]");
  require(qY >= 2.0 && std::isfinite(qY), ErrCode::invalid_argument,
          "alpha: qY must be in [2,inf)");
  double hi = std::max({1.0 / p, 1.0 / pY, 0.5});
  double lo = std::min({1.0 / p, 1.0 / qY, 0.5});
  return hi - lo;
}

double alpha_tilde_exponent(double p, double pY, double qY) {
  require(p > 1.0 && std::isfinite(p), ErrCode::invalid_argument, "alpha~: p must be in (1,inf)");
  require(pY > 1.0 && pY <= 2.0, ErrCode::invalid_argument, "alpha~: pY must be in (1,2]");
  require(qY >= 2.0 && std::isfinite(qY), ErrCode::invalid_argument,
          "alpha~: qY must be in [2,inf)");
  return std::max({std::abs(1.0 / p - 0.5), std::abs(1.0 / pY - 0.5),
                   std::abs(1.0 / qY - 0.5)});
}

double convexity_defect(const LatticeSpec& Y, double p,
                        const std::vector<std::vector<CVec>>& samples) {
  require(p >= 1.0 && std::isfinite(p), ErrCode::invalid_argument,
          "convexity_defect: p must be in [1,inf)");
  double worst = 0.0;
  for (const auto& family : samples) {
    if (family.empty()) continue;
    Vec power_sum = Vec::Zero(Y.dim());
    double norm_sum = 0.0;
    for (const auto& x : family) {
      power_sum += x.cwiseAbs().array().pow(p).matrix();
      norm_sum += std::pow(Y.norm(x), p);
    }
    double lhs = Y.norm_abs(power_sum.array().pow(1.0 / p).matrix());
    double rhs = std::pow(norm_sum, 1.0 / p);
    if (rhs > 0.0) worst = std::max(worst, lhs / rhs);
  }
  return worst;
}

void save_field(std::ostream& os, const VectorField& f) {
  os << "x_index, omega_index, re, im\n";
  os << std::setprecision(17);
  for (int x = 0; x < f.rows(); ++x)
    for (int w = 0; w < f.cols(); ++w)
      os << x << ", " << w << ", " << f(x, w).real() << ", " << f(x, w).imag() << "\n";
}

VectorField load_field(std::istream& is) {
  std::string line;
  require(static_cast<bool>(std::getline(is, line)), ErrCode::parse, "field csv: empty");
  struct Entry {
    int x, w;
    Complex v;
  };
  std::vector<Entry> entries;
  int max_x = -1, max_w = -1;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    Entry e{};
    double re, im;
    if (!(ls >> e.x >> e.w >> re >> im))
      fail(ErrCode::parse, "field csv line " + std::to_string(lineno) + ": expected 4 columns");
    e.v = Complex(re, im);
    require(e.x >= 0 && e.w >= 0, ErrCode::parse,
            "field csv line " + std::to_string(lineno) + ": negative index");
    entries.push_back(e);
    max_x = std::max(max_x, e.x);
    max_w = std::max(max_w, e.w);
  }
  require(max_x >= 0, ErrCode::parse, "field csv: no data rows");
  VectorField f = VectorField::Zero(max_x + 1, max_w + 1);
  for (const auto& e : entries) f(e.x, e.w) = e.v;
  return f;
}

void save_field_file(const std::string& path, const VectorField& f) {
  std::ofstream os(path);
  require(os.good(), ErrCode::io, "cannot open for writing: " + path);
  save_field(os, f);
}

VectorField load_field_file(const std::string& path) {
  std::ifstream is(path);
  require(is.good(), ErrCode::io, "cannot open: " + path);
  return load_field(is);
}

}  // namespace smlab
