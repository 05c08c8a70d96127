#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "smlab/common.hpp"
#include "smlab/space.hpp"

namespace smlab {

/// A finite Banach function lattice Y over the index set Omega' (counting
/// measure): l^s_m, mixed l^s(l^2), or a p-convexification of either.
class LatticeSpec {
public:
  enum class Kind { sequence, mixed, convexified };

  static LatticeSpec seq(double s, int m);
  /// One nesting level l^s(l^2): m_outer blocks of m_inner coordinates.
  static LatticeSpec mixed(double s_outer, int m_outer, int m_inner);
  /// p-convexification Y^p, ||z||_{Y^p} = || |z|^{1/p} ||_Y^p. Requires the
  /// base to be p-convex (p <= s, and p <= 2 for the mixed inner part).
  static LatticeSpec convexify(LatticeSpec base, double p);

  Kind kind() const { return kind_; }
  double s() const { return s_; }
  double conv_p() const { return p_; }
  int dim() const { return dim_; }
  const LatticeSpec& base() const { return *base_; }

  /// Lattice norm of an m-vector.
  double norm(const CVec& y) const;
  /// Norm evaluated on the entrywise absolute values (nonnegative input).
  double norm_abs(const Vec& a) const;

  /// Largest p such that the lattice is p-convex with constant 1.
  double convexity_exponent() const;

  std::string describe() const;

private:
  LatticeSpec() = default;
  Kind kind_ = Kind::sequence;
  double s_ = 2.0;        // sequence/mixed outer exponent
  int m_outer_ = 1;
  int m_inner_ = 1;
  double p_ = 1.0;        // convexification power
  int dim_ = 1;
  std::shared_ptr<const LatticeSpec> base_;
};

/// ||f||_{L^p(Omega;Y)} = (sum_x mu(x) ||f(x,.)||_Y^p)^{1/p}; max over x at p=inf.
double bochner_norm(double p, const LatticeSpec& Y, const Space& space, const VectorField& f);
double bochner_norm(double p, const LatticeSpec& Y, const Space& space, const RealField& f);

/// Norm of the pointwise square function (sum_k |f_k|^2)^{1/2}.
double square_function_norm(double p, const LatticeSpec& Y, const Space& space,
                            const std::vector<VectorField>& fields);

struct RademacherOptions {
  bool exact = true;           ///< enumerate all 2^K sign patterns (K <= 16)
  int samples = 0;             ///< Monte Carlo draws when !exact
  std::uint64_t seed = 0;
  int moment = 1;              ///< 1: E||.||; 2: (E||.||^2)^{1/2}
};

/// E|| sum_k eps_k f_k ||_{L^p(Omega;Y)} over Rademacher signs.
double rademacher_norm(double p, const LatticeSpec& Y, const Space& space,
                       const std::vector<VectorField>& fields, const RademacherOptions& opt);

/// alpha(p, pY, qY) = max(1/p, 1/pY, 1/2) - min(1/p, 1/qY, 1/2).
double alpha_exponent(double p, double pY, double qY);

/// alpha~(p, pY, qY) = max(|1/p - 1/2|, |1/pY - 1/2|, |1/qY - 1/2|).
double alpha_tilde_exponent(double p, double pY, double qY);

/// Smallest empirical C with ||(sum |x_i|^p)^{1/p}||_Y <= C (sum ||x_i||_Y^p)^{1/p}
/// over the sample families.
double convexity_defect(const LatticeSpec& Y, double p,
                        const std::vector<std::vector<CVec>>& samples);

/// VectorField CSV I/O with header "x_index, omega_index, re, im".
void save_field(std::ostream& os, const VectorField& f);
VectorField load_field(std::istream& is);
void save_field_file(const std::string& path, const VectorField& f);
VectorField load_field_file(const std::string& path);

}  // namespace smlab
