#include "smlab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace smlab {

namespace {
constexpr double kSelfAdjointTol = 1e-10;
constexpr double kNegativeSpectrumTol = 1e-10;
constexpr double kReconstructionTol = 1e-9;

// Relative cut below which an eigenvalue counts as kernel.
double kernel_cut(const Vec& lambda) {
  double top = lambda.size() ? lambda.cwiseAbs().maxCoeff() : 0.0;
  return 1e-12 * std::max(1.0, top);
}
}  // namespace

Multiplier::Multiplier(std::string name, Eval f) : name_(std::move(name)), eval_(std::move(f)) {}

Multiplier::Multiplier(std::string name, Eval f, Deriv derivs, int max_order)
    : name_(std::move(name)), eval_(std::move(f)), derivs_(std::move(derivs)),
      max_order_(max_order) {}

Complex Multiplier::derivative(int k, double t) const {
  require(k >= 0, ErrCode::invalid_argument, "derivative order must be >= 0");
  if (k == 0) return eval_(t);
  if (derivs_ && k <= max_order_) return derivs_(k, t);
  require(t > 0.0, ErrCode::invalid_argument,
          "numeric derivative of " + name_ + " needs t > 0");
  // iterated central difference with a scale-aware step
  double h = t * std::pow(0x1p-52, 1.0 / (k + 2));
  Complex acc = 0.0;
  double binom = 1.0;
  for (int j = 0; j <= k; ++j) {
    double node = t + (k / 2.0 - j) * h;
    acc += ((j % 2) ? -binom : binom) * eval_(std::max(node, 0.0));
    binom = binom * (k - j) / (j + 1);
  }
  return acc / std::pow(h, k);
}

Multiplier Multiplier::identity() {
  return {"identity", [](double t) { return Complex(t, 0.0); },
          [](int k, double) { return Complex(k == 1 ? 1.0 : 0.0, 0.0); }, 64};
}

Multiplier Multiplier::constant(Complex c) {
  std::ostringstream name;
  name << "constant:" << c.real();
  return {name.str(), [c](double) { return c; },
          [](int, double) { return Complex(0.0, 0.0); }, 64};
}

Multiplier Multiplier::heat(Complex z) {
  require(z.real() >= 0.0, ErrCode::invalid_argument, "heat multiplier needs Re z >= 0");
  std::ostringstream name;
  name << "heat:" << z.real();
  if (z.imag() != 0.0) name << ":" << z.imag();
  return {name.str(), [z](double t) { return std::exp(-z * t); },
          [z](int k, double t) { return std::pow(-z, k) * std::exp(-z * t); }, 64};
}

Multiplier Multiplier::imaginary(double t0) {
  std::ostringstream name;
  name << "imaginary:" << t0;
  Complex it(0.0, t0);
  return {name.str(), [it](double t) { return std::exp(it * t); },
          [it](int k, double t) { return std::pow(it, k) * std::exp(it * t); }, 64};
}

Multiplier Multiplier::wave_resolvent(double delta, double t0) {
  std::ostringstream name;
  name << "wave-resolvent:" << delta << ":" << t0;
  return {name.str(), [delta, t0](double t) {
            return std::pow(1.0 + t, -delta) * std::exp(Complex(0.0, t0 * std::sqrt(t)));
          }};
}

Multiplier Multiplier::bochner_riesz(double delta, double u) {
  require(u > 0.0, ErrCode::invalid_argument, "bochner-riesz scale u must be > 0");
  require(delta >= 0.0, ErrCode::invalid_argument, "bochner-riesz order must be >= 0");
  std::ostringstream name;
  name << "bochner-riesz:" << delta << ":" << u;
  auto eval = [delta, u](double t) {
    double b = 1.0 - t / u;
    return Complex(b > 0.0 ? std::pow(b, delta) : 0.0, 0.0);
  };
  auto deriv = [delta, u](int k, double t) {
    if (t >= u) return Complex(0.0, 0.0);
    double coeff = 1.0;
    for (int j = 0; j < k; ++j) coeff *= (delta - j) * (-1.0 / u);
    return Complex(coeff * std::pow(1.0 - t / u, delta - k), 0.0);
  };
  return {name.str(), eval, deriv, 64};
}

Multiplier Multiplier::bump(int level) {
  std::ostringstream name;
  name << "bump:" << level;
  double scale = std::pow(2.0, -level);
  return {name.str(),
          [scale](double t) { return Complex(DyadicPartition::phi0(scale * t), 0.0); }};
}

Multiplier Multiplier::from_spec(const std::string& spec) {
  std::vector<std::string> parts;
  std::istringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(item);
  require(!parts.empty(), ErrCode::parse, "empty multiplier spec");
  auto arg = [&](std::size_t i, const char* what) {
    require(i < parts.size(), ErrCode::parse,
            "multiplier spec '" + spec + "': missing " + what);
    try {
      return std::stod(parts[i]);
    } catch (const std::exception&) {
      fail(ErrCode::parse, "multiplier spec '" + spec + "': bad number '" + parts[i] + "'");
    }
  };
  const std::string& kind = parts[0];
  if (kind == "identity") return identity();
  if (kind == "one") return constant(1.0);
  if (kind == "constant") return constant(Complex(arg(1, "value"), 0.0));
  if (kind == "heat")
    return heat(Complex(arg(1, "re"), parts.size() > 2 ? arg(2, "im") : 0.0));
  if (kind == "imaginary") return imaginary(arg(1, "t"));
  if (kind == "wave-resolvent") return wave_resolvent(arg(1, "delta"), arg(2, "t"));
  if (kind == "bochner-riesz") return bochner_riesz(arg(1, "delta"), arg(2, "u"));
  if (kind == "bump") return bump(static_cast<int>(arg(1, "level")));
  fail(ErrCode::parse, "unknown multiplier kind '" + kind + "'");
}

SpectralOperator SpectralOperator::decompose(const Mat& A, const Space& space) {
  const int n = space.size();
  require(A.rows() == n && A.cols() == n, ErrCode::invalid_argument,
          "operator shape does not match the space");
  const Vec& mu = space.weights();

  Mat M = mu.asDiagonal() * A;
  double scale = std::max(1e-300, M.cwiseAbs().maxCoeff());
  double asym = (M - M.transpose()).cwiseAbs().maxCoeff();
  require(asym <= kSelfAdjointTol * std::max(1.0, scale), ErrCode::invalid_argument,
          "operator is not mu-self-adjoint (relative asymmetry " +
              std::to_string(asym / scale) + ")");

  Vec sqrt_mu = mu.cwiseSqrt();
  Mat S = sqrt_mu.asDiagonal() * A * sqrt_mu.cwiseInverse().asDiagonal();
  S = ((S + S.transpose()) / 2.0).eval();
  Eigen::SelfAdjointEigenSolver<Mat> es(S);
  require(es.info() == Eigen::Success, ErrCode::numeric, "eigendecomposition failed");

  Vec lambda = es.eigenvalues();
  double top = std::max(1.0, lambda.cwiseAbs().maxCoeff());
  require(lambda.minCoeff() >= -kNegativeSpectrumTol * top, ErrCode::invalid_argument,
          "operator has negative spectrum beyond tolerance (min eigenvalue " +
              std::to_string(lambda.minCoeff()) + ")");
  lambda = lambda.cwiseMax(0.0);

  SpectralOperator op;
  op.space_ = std::make_shared<Space>(space);
  op.A_ = A;
  op.lambda_ = lambda;
  op.V_ = sqrt_mu.cwiseInverse().asDiagonal() * es.eigenvectors();

  Mat recon = op.V_ * lambda.asDiagonal() * op.V_.transpose() * mu.asDiagonal();
  double num = (recon - A).norm();
  double den = std::max(A.norm(), 1e-300);
  require(num <= kReconstructionTol * std::max(1.0, den), ErrCode::numeric,
          "eigendecomposition reconstruction error too large");
  return op;
}

SpectralOperator SpectralOperator::graph_laplacian(const Space& space, double edge_length) {
  const int n = space.size();
  Mat L = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      if (std::abs(space.dist(i, j) - edge_length) <= 1e-9) {
        L(i, j) = -1.0;
        L(i, i) += 1.0;
      }
    }
  return decompose(L, space);
}

double SpectralOperator::lambda_min_positive() const {
  double cut = kernel_cut(lambda_);
  double best = lambda_max();
  for (int i = 0; i < lambda_.size(); ++i)
    if (lambda_(i) > cut) best = std::min(best, lambda_(i));
  return best;
}

VectorField SpectralOperator::apply(const Multiplier& f, const VectorField& field) const {
  require(static_cast<int>(field.rows()) == space_->size(), ErrCode::invalid_argument,
          "apply: field rows must match point count");
  CVec fl(lambda_.size());
  for (int i = 0; i < lambda_.size(); ++i) {
    fl(i) = f(lambda_(i));
    require(std::isfinite(fl(i).real()) && std::isfinite(fl(i).imag()), ErrCode::numeric,
            "multiplier " + f.name() + " is not finite on the spectrum");
  }
  CVec wmu = space_->weights().cast<Complex>();
  CMat coeffs = V_.cast<Complex>().transpose() * (wmu.asDiagonal() * field);
  coeffs = fl.asDiagonal() * coeffs;
  return V_.cast<Complex>() * coeffs;
}

CMat SpectralOperator::multiplier_matrix(const Multiplier& f) const {
  CVec fl(lambda_.size());
  for (int i = 0; i < lambda_.size(); ++i) {
    fl(i) = f(lambda_(i));
    require(std::isfinite(fl(i).real()) && std::isfinite(fl(i).imag()), ErrCode::numeric,
            "multiplier " + f.name() + " is not finite on the spectrum");
  }
  CMat Vc = V_.cast<Complex>();
  CVec wmu = space_->weights().cast<Complex>();
  return Vc * fl.asDiagonal() * Vc.transpose() * wmu.asDiagonal();
}

CMat SpectralOperator::semigroup_kernel(Complex z) const {
  require(z.real() >= 0.0, ErrCode::invalid_argument, "semigroup kernel needs Re z >= 0");
  CVec e(lambda_.size());
  for (int i = 0; i < lambda_.size(); ++i) e(i) = std::exp(-z * lambda_(i));
  CMat Vc = V_.cast<Complex>();
  return Vc * e.asDiagonal() * Vc.transpose();
}

VectorField SpectralOperator::range_projection(const VectorField& field) const {
  double cut = kernel_cut(lambda_);
  CVec indicator(lambda_.size());
  for (int i = 0; i < lambda_.size(); ++i) indicator(i) = lambda_(i) > cut ? 1.0 : 0.0;
  CVec wmu = space_->weights().cast<Complex>();
  CMat coeffs = V_.cast<Complex>().transpose() * (wmu.asDiagonal() * field);
  coeffs = indicator.asDiagonal() * coeffs;
  return V_.cast<Complex>() * coeffs;
}

double SpectralOperator::l2_multiplier_norm(const Multiplier& f) const {
  double best = 0.0;
  for (int i = 0; i < lambda_.size(); ++i) best = std::max(best, std::abs(f(lambda_(i))));
  return best;
}

DyadicPartition::DyadicPartition(int k_lo, int k_hi) : k_lo_(k_lo), k_hi_(k_hi) {
  require(k_lo <= k_hi, ErrCode::invalid_argument, "partition level range is empty");
}

double DyadicPartition::base_bump(double t) {
  double u = (t - 1.25) / 0.75;
  if (u <= -1.0 || u >= 1.0) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - u * u));
}

double DyadicPartition::phi0(double t) {
  if (t <= 0.0) return 0.0;
  double num = base_bump(t);
  if (num == 0.0) return 0.0;
  // at most two dyadic shifts meet any t > 0
  int j0 = static_cast<int>(std::floor(std::log2(t)));
  double den = 0.0;
  for (int j = j0 - 2; j <= j0 + 2; ++j) den += base_bump(std::ldexp(t, -j));
  return num / den;
}

double DyadicPartition::phi(int k, double t) const { return phi0(std::ldexp(t, -k)); }

double DyadicPartition::psi(int n, double t) const {
  require(n >= 0, ErrCode::invalid_argument, "psi index must be >= 0");
  if (n >= 1) return phi(n, t);
  if (t <= 0.0) return 0.0;
  if (t <= 1.0) return 1.0;  // all phi_k with k >= 1 vanish there
  double s = 0.0;
  int j0 = static_cast<int>(std::floor(std::log2(t)));
  for (int k = std::max(1, j0 - 2); k <= j0 + 2; ++k) s += phi(k, t);
  return std::max(0.0, 1.0 - s);
}

double DyadicPartition::partition_residual(double t) const {
  require(t > 0.0, ErrCode::invalid_argument, "partition residual needs t > 0");
  double s = 0.0;
  for (int k = k_lo_; k <= k_hi_; ++k) s += phi(k, t);
  return std::abs(s - 1.0);
}

bool DyadicPartition::covers(double lambda_lo, double lambda_hi) const {
  return lambda_lo >= std::ldexp(1.0, k_lo_) && lambda_hi <= std::ldexp(1.0, k_hi_);
}

VectorField calculus_apply(const Multiplier& f, const SpectralOperator& A,
                           const DyadicPartition& partition, int K, const VectorField& field,
                           double* coverage_residual) {
  require(K >= 0, ErrCode::invalid_argument, "calculus_apply: K must be >= 0");
  const Vec& lambda = A.eigenvalues();
  double cut = 1e-12 * std::max(1.0, A.lambda_max());
  CVec factor(lambda.size());
  double residual = 0.0;
  for (int i = 0; i < lambda.size(); ++i) {
    double sum_phi = 0.0;
    for (int k = -K; k <= K; ++k) sum_phi += partition.phi(k, lambda(i));
    factor(i) = sum_phi * f(lambda(i));
    if (lambda(i) > cut) residual = std::max(residual, std::abs(sum_phi - 1.0));
  }
  if (coverage_residual) *coverage_residual = residual;
  CVec wmu = A.space().weights().cast<Complex>();
  CMat coeffs = A.eigenvectors().cast<Complex>().transpose() * (wmu.asDiagonal() * field);
  coeffs = factor.asDiagonal() * coeffs;
  return A.eigenvectors().cast<Complex>() * coeffs;
}

PaleyLittlewoodResult paley_littlewood(const VectorField& f, const SpectralOperator& A,
                                       double p, const LatticeSpec& Y,
                                       const DyadicPartition& partition) {
  PaleyLittlewoodResult res;
  VectorField g = A.range_projection(f);
  res.norm = bochner_norm(p, Y, A.space(), g);

  std::vector<VectorField> phi_pieces;
  for (int n = partition.k_lo(); n <= partition.k_hi(); ++n) {
    Multiplier mn("phi_n", [&partition, n](double t) {
      return Complex(partition.phi(n, t), 0.0);
    });
    phi_pieces.push_back(A.apply(mn, g));
  }
  res.sq_phi = square_function_norm(p, Y, A.space(), phi_pieces);

  std::vector<VectorField> psi_pieces;
  for (int n = 0; n <= std::max(0, partition.k_hi()); ++n) {
    Multiplier mn("psi_n", [&partition, n](double t) {
      return Complex(partition.psi(n, t), 0.0);
    });
    psi_pieces.push_back(A.apply(mn, g));
  }
  res.sq_psi = square_function_norm(p, Y, A.space(), psi_pieces);

  res.ratio_phi = res.sq_phi > 0.0 ? res.norm / res.sq_phi : 0.0;
  res.ratio_psi = res.sq_psi > 0.0 ? res.norm / res.sq_psi : 0.0;
  return res;
}

}  // namespace smlab
