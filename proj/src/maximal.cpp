#include "smlab/maximal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "smlab/rng.hpp"

namespace smlab {

RealField m_hl(const Space& space, const VectorField& f) {
  const int n = space.size();
  require(static_cast<int>(f.rows()) == n, ErrCode::invalid_argument,
          "m_hl: field rows must match point count");
  const int m = static_cast<int>(f.cols());
  RealField out(n, m);
  RealField absf = f.cwiseAbs();
  for (int x = 0; x < n; ++x) {
    const auto& ord = space.order_from(x);
    const auto& ds = space.dists_from(x);
    Vec acc = Vec::Zero(m);
    double mass = 0.0;
    Vec best = Vec::Zero(m);
    int i = 0;
    while (i < n) {
      // absorb the whole equal-distance group before taking the average
      double r = ds[i];
      while (i < n && ds[i] == r) {
        acc += space.mu(ord[i]) * absf.row(ord[i]).transpose();
        mass += space.mu(ord[i]);
        ++i;
      }
      best = best.cwiseMax(acc / mass);
    }
    out.row(x) = best.transpose();
  }
  return out;
}

RealField n_q_r(const Space& space, double q, double r, const VectorField& f) {
  const int n = space.size();
  require(static_cast<int>(f.rows()) == n, ErrCode::invalid_argument,
          "n_q_r: field rows must match point count");
  require(q >= 1.0, ErrCode::invalid_argument, "n_q_r: q must be >= 1");
  require(r > 0.0, ErrCode::invalid_argument, "n_q_r: r must be > 0");
  const int m = static_cast<int>(f.cols());
  RealField absf = f.cwiseAbs();
  RealField out(n, m);
  for (int x = 0; x < n; ++x) {
    std::vector<int> b = space.ball(x, r);
    if (std::isinf(q)) {
      Vec mx = Vec::Zero(m);
      for (int y : b) mx = mx.cwiseMax(absf.row(y).transpose());
      out.row(x) = mx.transpose();
      continue;
    }
    Vec acc = Vec::Zero(m);
    double vol = 0.0;
    for (int y : b) {
      acc += space.mu(y) * absf.row(y).array().pow(q).matrix().transpose();
      vol += space.mu(y);
    }
    out.row(x) = (acc / vol).array().pow(1.0 / q).matrix().transpose();
  }
  return out;
}

RealField m_hl_q(const Space& space, double q, const VectorField& f) {
  const int n = space.size();
  require(static_cast<int>(f.rows()) == n, ErrCode::invalid_argument,
          "m_hl_q: field rows must match point count");
  require(q >= 1.0 && std::isfinite(q), ErrCode::invalid_argument,
          "m_hl_q: q must lie in [1, inf)");
  const int m = static_cast<int>(f.cols());
  RealField absf = f.cwiseAbs();
  RealField out(n, m);
  for (int x = 0; x < n; ++x) {
    const auto& ord = space.order_from(x);
    const auto& ds = space.dists_from(x);
    Vec acc = Vec::Zero(m);
    double mass = 0.0;
    Vec best = Vec::Zero(m);
    int i = 0;
    while (i < n) {
      double r = ds[i];
      while (i < n && ds[i] == r) {
        acc += space.mu(ord[i]) * absf.row(ord[i]).array().pow(q).matrix().transpose();
        mass += space.mu(ord[i]);
        ++i;
      }
      best = best.cwiseMax((acc / mass).array().pow(1.0 / q).matrix());
    }
    out.row(x) = best.transpose();
  }
  return out;
}

double domination_constant(const Space& space, const AdjacentFamily& family,
                           const VectorField& f) {
  require(family.covered(), ErrCode::invalid_argument,
          "domination_constant: family leaves balls uncovered (achieved_K infinite)");
  RealField lhs = m_hl(space, f);
  RealField rhs = RealField::Zero(lhs.rows(), lhs.cols());
  for (const auto& sys : family.systems)
    rhs += dyadic_maximal(sys, space, f.cwiseAbs().cast<Complex>());
  double c = 0.0;
  for (int x = 0; x < lhs.rows(); ++x)
    for (int w = 0; w < lhs.cols(); ++w) {
      if (lhs(x, w) == 0.0) continue;
      require(rhs(x, w) > 0.0, ErrCode::numeric,
              "domination_constant: dyadic side vanishes where M_HL does not");
      c = std::max(c, lhs(x, w) / rhs(x, w));
    }
  return c;
}

MaximalReport norm_probe(const std::string& op_name, const FieldOperator& op, double p,
                         const LatticeSpec& Y, const Space& space, int trials,
                         std::uint64_t seed, const std::vector<VectorField>& extra_fields,
                         VectorField* argmax) {
  require(trials >= 1, ErrCode::invalid_argument, "norm_probe: trials must be >= 1");
  const int n = space.size();
  const int m = Y.dim();
  MaximalReport rep;
  rep.operator_name = op_name;
  rep.p = p;
  rep.lattice = Y.describe();
  rep.trials = trials;
  rep.seed = seed;

  auto consider = [&](const VectorField& f) {
    double den = bochner_norm(p, Y, space, f);
    if (den <= 0.0) return;
    double num = bochner_norm(p, Y, space, op(space, f));
    double ratio = num / den;
    if (ratio > rep.ratio) {
      rep.ratio = ratio;
      if (argmax) *argmax = f;
    }
  };

  for (const auto& f : extra_fields) consider(f);
  for (int t = 0; t < trials; ++t) {
    Rng rng(Rng::derive(seed, static_cast<std::uint64_t>(t)));
    VectorField f = VectorField::Zero(n, m);
    if (t % 2 == 0) {
      for (int x = 0; x < n; ++x)
        for (int w = 0; w < m; ++w) f(x, w) = rng.cgaussian();
    } else {
      // sparse indicators extremize maximal ratios
      int spikes = 1 + rng.uniform_int(3);
      for (int s = 0; s < spikes; ++s) f(rng.uniform_int(n), rng.uniform_int(m)) = 1.0;
    }
    consider(f);
  }
  return rep;
}

double ku08_domination(const Space& space, double q0, double q1,
                       const std::function<VectorField(double)>& apply_S,
                       const std::function<double(double)>& rho,
                       const std::vector<double>& t_grid, const VectorField& f) {
  require(q0 >= 1.0 && q1 >= q0, ErrCode::invalid_argument,
          "ku08_domination: need 1 <= q0 <= q1");
  RealField denom = m_hl_q(space, q0, f);
  double c = 0.0;
  for (double t : t_grid) {
    VectorField sf = apply_S(t);
    RealField lhs = n_q_r(space, q1, rho(t), sf);
    for (int x = 0; x < lhs.rows(); ++x)
      for (int w = 0; w < lhs.cols(); ++w) {
        if (lhs(x, w) == 0.0) continue;
        require(denom(x, w) > 0.0, ErrCode::numeric,
                "ku08_domination: M^q0 vanishes where the left side does not");
        c = std::max(c, lhs(x, w) / denom(x, w));
      }
  }
  return c;
}

}  // namespace smlab
