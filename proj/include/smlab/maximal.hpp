#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "smlab/common.hpp"
#include "smlab/dyadic.hpp"
#include "smlab/lattice.hpp"
#include "smlab/space.hpp"

namespace smlab {

/// Hardy-Littlewood maximal operator: pointwise sup over r > 0 of ball
/// averages of |f|. Exact on finite spaces (only realized radii matter).
RealField m_hl(const Space& space, const VectorField& f);

/// Local L^q average N_{q,r} f(x,.) = V(x,r)^{-1/q} (int_{B(x,r)} |f|^q dmu)^{1/q};
/// q = inf takes the max over the ball.
RealField n_q_r(const Space& space, double q, double r, const VectorField& f);

/// M^q_HL f = sup over realized radii of N_{q,r} f, q in [1, inf).
RealField m_hl_q(const Space& space, double q, const VectorField& f);

/// Smallest c with M_HL f <= c * sum_m M_{F^m}(|f|) pointwise (0 when f = 0).
double domination_constant(const Space& space, const AdjacentFamily& family,
                           const VectorField& f);

struct MaximalReport {
  std::string operator_name;
  double p = 2.0;
  std::string lattice;
  double ratio = 0.0;          ///< max over trials of ||Tf|| / ||f||
  int trials = 0;
  std::uint64_t seed = 0;
};

using FieldOperator = std::function<RealField(const Space&, const VectorField&)>;

/// Lower bound on the L^p(Omega;Y) operator norm by seeded random search.
/// Trials alternate dense Gaussian fields with sparse indicators; extra
/// caller-provided fields (e.g. a previous sweep's maximizer) join the pool.
MaximalReport norm_probe(const std::string& op_name, const FieldOperator& op, double p,
                         const LatticeSpec& Y, const Space& space, int trials,
                         std::uint64_t seed,
                         const std::vector<VectorField>& extra_fields = {},
                         VectorField* argmax = nullptr);

/// Measured constant in N_{q1,rho(t)}(S(t) f) <= C * M^{q0}_HL f over a time
/// grid, for a semigroup-type family S(t) with scaling rho(t).
double ku08_domination(const Space& space, double q0, double q1,
                       const std::function<VectorField(double)>& apply_S,
                       const std::function<double(double)>& rho,
                       const std::vector<double>& t_grid, const VectorField& f);

}  // namespace smlab
