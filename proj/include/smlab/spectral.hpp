#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "smlab/common.hpp"
#include "smlab/lattice.hpp"
#include "smlab/space.hpp"

namespace smlab {

/// A multiplier function on [0, inf), complex valued, with optional analytic
/// derivatives (central differences otherwise).
class Multiplier {
public:
  using Eval = std::function<Complex(double)>;
  using Deriv = std::function<Complex(int, double)>;

  Multiplier(std::string name, Eval f);
  Multiplier(std::string name, Eval f, Deriv derivs, int max_order);

  Complex operator()(double t) const { return eval_(t); }
  /// k-th derivative; k = 0 returns the value.
  Complex derivative(int k, double t) const;
  bool has_analytic_derivatives(int k) const { return derivs_ && k <= max_order_; }
  const std::string& name() const { return name_; }

  static Multiplier identity();                       ///< f(l) = l
  static Multiplier constant(Complex c);
  static Multiplier heat(Complex z);                  ///< e^{-z l}, Re z >= 0
  static Multiplier imaginary(double t);              ///< e^{i t l}
  static Multiplier wave_resolvent(double delta, double t);  ///< (1+l)^{-delta} e^{it sqrt(l)}
  static Multiplier bochner_riesz(double delta, double u);   ///< (1 - l/u)_+^delta
  static Multiplier bump(int level);                  ///< phi_0(2^{-level} l)
  /// Parses "heat:1", "bochner-riesz:2:1", "wave-resolvent:1:1", "imaginary:2",
  /// "identity", "one", "bump:0".
  static Multiplier from_spec(const std::string& spec);

private:
  std::string name_;
  Eval eval_;
  Deriv derivs_;
  int max_order_ = -1;
};

/// mu-self-adjoint positive matrix with its eigendecomposition in the
/// mu-weighted inner product. Immutable once decomposed.
class SpectralOperator {
public:
  /// Symmetrizes via D^{1/2} A D^{-1/2} and solves the symmetric problem.
  /// Errors when A is not mu-self-adjoint (1e-10 relative) or has spectrum
  /// below -1e-10; small negative eigenvalues are clamped to 0.
  static SpectralOperator decompose(const Mat& A, const Space& space);

  /// Graph Laplacian of the unit-distance graph of a model space.
  static SpectralOperator graph_laplacian(const Space& space, double edge_length = 1.0);

  const Space& space() const { return *space_; }
  const Mat& matrix() const { return A_; }
  const Vec& eigenvalues() const { return lambda_; }
  /// Columns are mu-orthonormal eigenvectors.
  const Mat& eigenvectors() const { return V_; }
  double lambda_max() const { return lambda_.size() ? lambda_.maxCoeff() : 0.0; }
  /// Smallest eigenvalue treated as nonzero (above the kernel cut).
  double lambda_min_positive() const;

  /// f(A) x, columnwise over omega' (the tensor extension f(A) (x) Id_Y).
  VectorField apply(const Multiplier& f, const VectorField& field) const;
  /// f(A) as a dense matrix.
  CMat multiplier_matrix(const Multiplier& f) const;
  /// Kernel p_z(x,y) of e^{-zA}: T_z g(x) = sum_y mu(y) p_z(x,y) g(y). Re z >= 0.
  CMat semigroup_kernel(Complex z) const;
  /// Projection onto range(A) (kernel components removed), columnwise.
  VectorField range_projection(const VectorField& field) const;
  /// ||f(A)||_{L^2(mu) -> L^2(mu)} = max_i |f(lambda_i)|.
  double l2_multiplier_norm(const Multiplier& f) const;

private:
  SpectralOperator() = default;
  std::shared_ptr<const Space> space_;
  Mat A_;
  Vec lambda_;
  Mat V_;
};

/// Dyadic partition of unity phi_k(t) = phi_0(2^{-k} t), supp phi_k in
/// [2^{k-1}, 2^{k+1}], sum_k phi_k = 1 on (0, inf).
class DyadicPartition {
public:
  DyadicPartition(int k_lo, int k_hi);
  int k_lo() const { return k_lo_; }
  int k_hi() const { return k_hi_; }
  double phi(int k, double t) const;
  /// psi_n = phi_n for n >= 1; psi_0 = sum_{k <= 0} phi_k (0 at t = 0).
  double psi(int n, double t) const;
  /// |sum_{k in range} phi_k(t) - 1| for t > 0.
  double partition_residual(double t) const;
  /// True when every nonzero eigenvalue lies in the fully covered band.
  bool covers(double lambda_lo, double lambda_hi) const;

  /// The fixed window: smooth bump supported on [1/2, 2], value 1 at 5/4.
  static double base_bump(double t);
  /// base_bump normalized so the dyadic shifts sum to 1.
  static double phi0(double t);

private:
  int k_lo_ = 0;
  int k_hi_ = 0;
};

/// Discretization of the Hoermander norm |f(0)| + sup_R ||phi f(R .)||_{W^b_2}.
struct HormanderParams {
  double beta = 1.0;
  double r_min = 1.0 / 256.0;
  double r_max = 256.0;
  int per_octave = 8;        ///< R-grid resolution: R = 2^{j/per_octave}
  int samples = 1 << 12;     ///< window samples over [0, 4]
  int padding = 4;           ///< zero-padding factor for the transform
  /// Overrides the dyadic grid when nonempty (matched-grid comparisons).
  std::vector<double> explicit_grid;
  static HormanderParams for_range(double beta, double lo, double hi);
  HormanderParams scaled(double c) const;  ///< R-grid divided by c, pointwise
  std::vector<double> r_grid() const;
};

struct HormanderNorm {
  double value = 0.0;     ///< |f(0)| + sup term
  double f0 = 0.0;
  double sup_term = 0.0;
  double argmax_R = 0.0;
  bool undersampled = false;  ///< windowed tail energy above 1e-6 of the total
};

HormanderNorm hormander_norm(const Multiplier& f, const HormanderParams& params);

/// Integer-order variant (|f(0)|^2 + sum_{k<=beta} sup_R int_R^{2R}
/// |t^k f^(k)(t)|^2 dt/t)^{1/2} by adaptive quadrature over the same R-grid.
double hormander_norm_integer(const Multiplier& f, int beta, const HormanderParams& params);

/// Mihlin norm max_{k<=N} sup_t t^k |f^(k)(t)| over the params' grid span.
double mihlin_norm(const Multiplier& f, int N, const HormanderParams& params);

struct MembershipResult {
  double beta = 0.0;
  bool finite = false;
  double base_norm = 0.0;
  double refined_norm = 0.0;
};

/// Flags each beta finite when the norm is stable (growth <= 10x) under the
/// fixed refinement: 8x window samples, R-range extended 4 octaves both ways
/// at 16 points/octave.
std::vector<MembershipResult> membership_check(const Multiplier& f,
                                               const std::vector<double>& betas,
                                               const HormanderParams& base);

/// sum_{|k| <= K} (phi_k f)(A) applied to the field. coverage_residual (if
/// given) receives max_i |sum phi_k(lambda_i) - 1| over nonzero eigenvalues;
/// a positive value means the partition missed part of the spectrum.
VectorField calculus_apply(const Multiplier& f, const SpectralOperator& A,
                           const DyadicPartition& partition, int K, const VectorField& field,
                           double* coverage_residual = nullptr);

struct PaleyLittlewoodResult {
  double norm = 0.0;
  double sq_phi = 0.0;
  double sq_psi = 0.0;
  double ratio_phi = 0.0;  ///< norm / sq_phi
  double ratio_psi = 0.0;
};

/// Norm and the two square-function norms of Cor.-style spectral
/// decompositions; the field is projected onto range(A) for the phi version.
PaleyLittlewoodResult paley_littlewood(const VectorField& f, const SpectralOperator& A,
                                       double p, const LatticeSpec& Y,
                                       const DyadicPartition& partition);

}  // namespace smlab
