// Acceptance suite: one runnable check per release criterion, each printing a
// single pass/fail line. Exit status is the number of failed criteria.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "smlab/dyadic.hpp"
#include "smlab/estimates.hpp"
#include "smlab/lattice.hpp"
#include "smlab/maximal.hpp"
#include "smlab/rng.hpp"
#include "smlab/scenario.hpp"
#include "smlab/space.hpp"
#include "smlab/spectral.hpp"

using namespace smlab;

namespace {

struct Criterion {
  bool pass = true;
  std::ostringstream detail;
  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << (detail.str().empty() ? "" : "; ") << what;
    }
  }
  void note(const std::string& text) {
    detail << (detail.str().empty() ? "" : "; ") << text;
  }
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::vector<double> log_grid(double lo, double hi, int count) {
  std::vector<double> g;
  for (int i = 0; i < count; ++i)
    g.push_back(lo * std::pow(hi / lo, count == 1 ? 0.0 : double(i) / (count - 1)));
  return g;
}

VectorField random_field(const Space& s, int m, std::uint64_t seed) {
  Rng rng(seed);
  VectorField f(s.size(), m);
  for (int x = 0; x < s.size(); ++x)
    for (int w = 0; w < m; ++w) f(x, w) = rng.cgaussian();
  return f;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

// 1. dyadic systems on 20 seeded spaces: exact partition/nesting, c1 > 0,
//    C1 <= 4, under 10 seconds total
Criterion criterion_dyadic_systems() {
  Criterion c;
  auto start = std::chrono::steady_clock::now();
  std::vector<Space> spaces;
  for (int n : {8, 12, 16, 20, 24, 32, 40, 48, 56, 64}) spaces.push_back(Space::cycle(n));
  for (int side : {4, 5, 6, 7, 8}) spaces.push_back(Space::torus(side, 2));
  for (int seed = 1; seed <= 5; ++seed) spaces.push_back(Space::random_cloud(100, 2, seed));
  double worst_C1 = 0.0, best_c1 = 1e9;
  for (std::size_t i = 0; i < spaces.size(); ++i) {
    DyadicSystem sys = DyadicSystem::build(spaces[i], 0.5, 1000 + i);
    DyadicVerifyReport rep = verify_dyadic(sys, spaces[i], 0.0, 4.0);
    c.check(rep.partition_ok, "partition broken on space " + std::to_string(i));
    c.check(rep.nesting_ok, "nesting broken on space " + std::to_string(i));
    c.check(rep.positive_measure_ok, "zero-measure cube on space " + std::to_string(i));
    c.check(rep.achieved_c1 > 0.0, "c1 not positive on space " + std::to_string(i));
    c.check(rep.achieved_C1 <= 4.0, "C1 above 4 on space " + std::to_string(i));
    worst_C1 = std::max(worst_C1, rep.achieved_C1);
    best_c1 = std::min(best_c1, rep.achieved_c1);
  }
  double elapsed = seconds_since(start);
  c.check(elapsed < 10.0, "runtime " + fmt(elapsed) + "s over budget");
  c.note("20 spaces, c1 >= " + fmt(best_c1) + ", C1 <= " + fmt(worst_C1) + ", " +
         fmt(elapsed) + "s");
  return c;
}

// 2. k(r) inequality on 10^4 random samples, zero violations
Criterion criterion_k_of_r() {
  Criterion c;
  Rng rng(42);
  int violations = 0;
  for (int i = 0; i < 10000; ++i) {
    double r = std::pow(10.0, rng.uniform(-3.0, 3.0));
    double delta = rng.uniform(1e-9, 0.5);
    int k = k_of_r(r, delta);
    double dk = std::pow(delta, k);
    if (!(delta * r <= 4.0 * dk && 4.0 * dk < r)) ++violations;
  }
  c.check(violations == 0, std::to_string(violations) + " violations");
  c.note("10000 samples, 0 violations");
  return c;
}

// 3. conditional expectations: projection, tower, mass preservation to 1e-12
//    on 100 random fields
Criterion criterion_conditional_expectation() {
  Criterion c;
  Space spaces[2] = {Space::cycle(32), Space::random_cloud(30, 2, 7)};
  double worst = 0.0;
  for (int si = 0; si < 2; ++si) {
    const Space& s = spaces[si];
    DyadicSystem sys = DyadicSystem::build(s, 0.5, 5 + si);
    for (int trial = 0; trial < 50; ++trial) {
      VectorField f = random_field(s, 3, Rng::derive(900 + si, trial));
      for (int k = sys.level_min(); k <= sys.level_max(); ++k) {
        VectorField ek = conditional_expectation(sys, k, s, f);
        worst = std::max(worst,
                         (conditional_expectation(sys, k, s, ek) - ek).cwiseAbs().maxCoeff());
        for (int l = k; l <= sys.level_max(); ++l) {
          VectorField el = conditional_expectation(sys, l, s, f);
          worst = std::max(worst, (conditional_expectation(sys, k, s, el) - ek)
                                      .cwiseAbs()
                                      .maxCoeff());
        }
        for (int w = 0; w < 3; ++w) {
          Complex a = 0, b = 0;
          for (int x = 0; x < s.size(); ++x) {
            a += s.mu(x) * ek(x, w);
            b += s.mu(x) * f(x, w);
          }
          worst = std::max(worst, std::abs(a - b));
        }
      }
    }
  }
  c.check(worst <= 1e-12, "worst identity error " + fmt(worst));
  c.note("100 fields, worst error " + fmt(worst));
  return c;
}

// 4. the Z_4 hand case is exact and the M^q identity holds to 1e-12
Criterion criterion_mhl_hand_case() {
  Criterion c;
  Space path = Space::path(4);
  VectorField ind = VectorField::Zero(4, 1);
  ind(0, 0) = 1.0;
  RealField m = m_hl(path, ind);
  c.check(m(0, 0) == 1.0 && m(1, 0) == 1.0 / 3.0 && m(2, 0) == 0.25 && m(3, 0) == 0.25,
          "hand values off: (" + fmt(m(0, 0)) + "," + fmt(m(1, 0)) + "," + fmt(m(2, 0)) +
              "," + fmt(m(3, 0)) + ")");

  Space s = Space::cycle(32);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    VectorField f = random_field(s, 2, Rng::derive(41, trial));
    for (double q : {1.0, 2.0, 3.5}) {
      RealField direct = m_hl_q(s, q, f);
      VectorField powq = f.cwiseAbs().array().pow(q).matrix().cast<Complex>();
      RealField via = m_hl(s, powq).array().pow(1.0 / q).matrix();
      worst = std::max(worst, (direct - via).cwiseAbs().maxCoeff());
    }
  }
  c.check(worst <= 1e-12, "M^q identity error " + fmt(worst));
  c.note("identity error " + fmt(worst));
  return c;
}

// 5. dimension sweep of the M_HL ratio stays under 4x the m=1 ratio
Criterion criterion_dimension_sweep() {
  Criterion c;
  auto start = std::chrono::steady_clock::now();
  Space s = Space::cycle(32);
  double first = 0.0, worst = 0.0;
  VectorField carry;
  bool have_carry = false;
  std::ostringstream ratios;
  for (int m : {1, 2, 4, 8, 16, 32, 64}) {
    LatticeSpec Y = LatticeSpec::seq(1.5, m);
    std::vector<VectorField> extras;
    if (have_carry) {
      VectorField lifted = VectorField::Zero(s.size(), m);
      lifted.leftCols(carry.cols()) = carry;
      extras.push_back(lifted);
    }
    VectorField argmax;
    MaximalReport rep = norm_probe(
        "m_hl", [](const Space& sp, const VectorField& f) { return m_hl(sp, f); }, 3.0, Y,
        s, 16, Rng::derive(52, m), extras, &argmax);
    if (m == 1) first = rep.ratio;
    worst = std::max(worst, rep.ratio);
    carry = argmax;
    have_carry = true;
    ratios << (m == 1 ? "" : " ") << fmt(rep.ratio);
  }
  double elapsed = seconds_since(start);
  c.check(first > 0.0, "degenerate m=1 ratio");
  c.check(worst <= 4.0 * first,
          "sweep max " + fmt(worst) + " above 4 x " + fmt(first));
  c.check(elapsed < 60.0, "runtime " + fmt(elapsed) + "s over budget");
  c.note("ratios [" + ratios.str() + "], " + fmt(elapsed) + "s");
  return c;
}

// 6. exact Rademacher second-moment identity on L^2(l^2); measured
//    equivalence ratio on L^3(l^{3/2})
Criterion criterion_rademacher_square() {
  Criterion c;
  Space s = Space::cycle(8);
  LatticeSpec H = LatticeSpec::seq(2.0, 2);
  std::vector<VectorField> fields;
  for (int k = 0; k < 10; ++k) fields.push_back(random_field(s, 2, Rng::derive(61, k)));
  RademacherOptions second;
  second.moment = 2;
  double lhs = rademacher_norm(2.0, H, s, fields, second);
  double rhs = 0.0;
  for (const auto& f : fields) rhs += std::pow(bochner_norm(2.0, H, s, f), 2);
  rhs = std::sqrt(rhs);
  double rel = std::abs(lhs - rhs) / rhs;
  c.check(rel <= 1e-10, "second-moment identity off by rel " + fmt(rel));

  LatticeSpec Y = LatticeSpec::seq(1.5, 2);
  double lo = 1e300, hi = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<VectorField> fs;
    for (int k = 0; k < 8; ++k)
      fs.push_back(random_field(s, 2, Rng::derive(62, 10 * trial + k)));
    RademacherOptions first;
    double ratio = rademacher_norm(3.0, Y, s, fs, first) / square_function_norm(3.0, Y, s, fs);
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
  }
  c.check(std::isfinite(hi) && lo > 0.0, "equivalence ratio degenerate");
  c.note("identity rel " + fmt(rel) + ", equivalence ratio in [" + fmt(lo) + ", " +
         fmt(hi) + "]");
  return c;
}

// 7. Hoermander norm: dilation invariance, Bochner-Riesz scale independence,
//    beta monotonicity, membership flags on the (delta, beta) grids
Criterion criterion_hormander_norm() {
  Criterion c;
  HormanderParams base;
  base.beta = 1.25;
  base.r_min = 1.0 / 64.0;
  base.r_max = 64.0;

  // dilation invariance of the sup term on matched grids
  Multiplier heat = Multiplier::heat(1.0);
  double ref = hormander_norm(heat, base).sup_term;
  for (double scale : {0.5, 2.0, 3.7}) {
    Multiplier dil("dilated", [scale](double t) { return std::exp(-Complex(scale * t, 0.0)); });
    double v = hormander_norm(dil, base.scaled(scale)).sup_term;
    c.check(std::abs(v - ref) <= 1e-6 * ref,
            "dilation c=" + fmt(scale) + " off by rel " + fmt(std::abs(v - ref) / ref));
  }

  // Bochner-Riesz cutoff-scale independence
  double br_ref = 0.0;
  for (double u : {0.25, 1.0, 4.0}) {
    double v = hormander_norm(Multiplier::bochner_riesz(2.0, u), base.scaled(1.0 / u)).value;
    if (u == 0.25)
      br_ref = v;
    else
      c.check(std::abs(v - br_ref) <= 1e-6 * br_ref,
              "BR u=" + fmt(u) + " off by rel " + fmt(std::abs(v - br_ref) / br_ref));
  }

  // beta monotonicity with constant 1 in the fixed discretization
  double prev = 0.0;
  for (double beta : {0.6, 1.0, 1.7, 2.5, 3.5}) {
    HormanderParams p = base;
    p.beta = beta;
    double v = hormander_norm(Multiplier::wave_resolvent(1.0, 2.0), p).value;
    c.check(v >= prev, "not monotone at beta=" + fmt(beta));
    prev = v;
  }

  // membership grids: wave-resolvent(delta, t=8) finite iff delta >= beta/2
  for (double delta : {0.5, 1.0, 2.0}) {
    auto res = membership_check(Multiplier::wave_resolvent(delta, 8.0),
                                {1.0, 2.0, 4.0}, base);
    for (const auto& r : res) {
      bool expect = delta >= r.beta / 2.0;
      c.check(r.finite == expect, "wave delta=" + fmt(delta) + " beta=" + fmt(r.beta) +
                                      " flagged " + (r.finite ? "finite" : "infinite"));
    }
  }
  // Bochner-Riesz(delta) finite iff delta > beta - 1/2
  for (double delta : {0.5, 2.0, 3.5}) {
    auto res = membership_check(Multiplier::bochner_riesz(delta, 1.0),
                                {0.9, 2.4, 3.9}, base);
    for (const auto& r : res) {
      bool expect = delta > r.beta - 0.5;
      c.check(r.finite == expect, "BR delta=" + fmt(delta) + " beta=" + fmt(r.beta) +
                                      " flagged " + (r.finite ? "finite" : "infinite"));
    }
  }
  c.note("dilation, scale independence, monotonicity and 18 membership flags");
  return c;
}

// 8. calculus reconstruction against the direct spectral route, 1e-8
Criterion criterion_calculus_reconstruction() {
  Criterion c;
  Space s = Space::cycle(32);
  SpectralOperator A = SpectralOperator::graph_laplacian(s);
  DyadicPartition part(-9, 3);
  VectorField f = A.range_projection(random_field(s, 2, 81));
  double worst = 0.0;
  for (const Multiplier& m : {Multiplier::heat(1.0), Multiplier::bochner_riesz(2.0, 1.0),
                              Multiplier::identity()}) {
    double resid = 0.0;
    VectorField via = calculus_apply(m, A, part, 9, f, &resid);
    VectorField direct = A.apply(m, f);
    double err = (via - direct).cwiseAbs().maxCoeff();
    worst = std::max(worst, err);
    c.check(resid <= 1e-10, m.name() + ": partition residual " + fmt(resid));
    c.check(err <= 1e-8, m.name() + ": reconstruction error " + fmt(err));
  }
  c.note("worst reconstruction error " + fmt(worst));
  return c;
}

// 9. Paley-Littlewood ratios on three (p, s) combinations, stable within 20%
Criterion criterion_paley_littlewood() {
  Criterion c;
  Space s = Space::cycle(32);
  SpectralOperator A = SpectralOperator::graph_laplacian(s);
  DyadicPartition part(-9, 3);
  const std::pair<double, double> combos[3] = {{2.0, 2.0}, {3.0, 1.5}, {1.5, 3.0}};
  for (const auto& [p, ls] : combos) {
    LatticeSpec Y = LatticeSpec::seq(ls, 4);
    double phi_lo = 1e300, phi_hi = 0.0, psi_lo = 1e300, psi_hi = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
      VectorField f = random_field(s, 4, Rng::derive(91, trial));
      PaleyLittlewoodResult res = paley_littlewood(f, A, p, Y, part);
      phi_lo = std::min(phi_lo, res.ratio_phi);
      phi_hi = std::max(phi_hi, res.ratio_phi);
      psi_lo = std::min(psi_lo, res.ratio_psi);
      psi_hi = std::max(psi_hi, res.ratio_psi);
    }
    std::string combo = "(p=" + fmt(p) + ",s=" + fmt(ls) + ")";
    c.check(phi_lo > 0.0 && std::isfinite(phi_hi), combo + " phi ratio degenerate");
    c.check(psi_lo > 0.0 && std::isfinite(psi_hi), combo + " psi ratio degenerate");
    c.check(phi_hi <= 1.2 * phi_lo, combo + " phi spread " + fmt(phi_hi / phi_lo));
    c.check(psi_hi <= 1.2 * psi_lo, combo + " psi spread " + fmt(psi_hi / psi_lo));
    c.note(combo + " phi [" + fmt(phi_lo) + "," + fmt(phi_hi) + "] psi [" + fmt(psi_lo) +
           "," + fmt(psi_hi) + "]");
  }
  return c;
}

// 10. feasible Gaussian fit on Z_32 with zero residual violations and the
//     GE => GGE(1,2) implication, under 30 seconds
Criterion criterion_gaussian_fit() {
  Criterion c;
  auto start = std::chrono::steady_clock::now();
  Space s = Space::cycle(32);
  SpectralOperator A = SpectralOperator::graph_laplacian(s);
  std::vector<double> ts = log_grid(0.1, 10.0, 17);
  std::vector<double> cs = log_grid(1.0 / 64.0, 4.0, 33);
  GaussianFit fit = fit_gaussian(A, 2.0, ts, cs);
  c.check(fit.pass, "gaussian fit infeasible");
  int violations = 0;
  for (std::size_t ti = 0; ti < ts.size(); ++ti) {
    double rt = std::sqrt(ts[ti]);
    CMat K = A.semigroup_kernel(ts[ti]);
    for (int x = 0; x < 32; ++x)
      for (int y = 0; y < 32; ++y) {
        if (std::abs(K(x, y)) <= fit.noise_floors[ti]) continue;
        double bound = fit.C / s.volume(x, rt) *
                       std::exp(-fit.c * std::pow(s.dist(x, y) / rt, 2.0));
        if (std::abs(K(x, y)) > bound * (1 + 1e-9)) ++violations;
      }
  }
  c.check(violations == 0, std::to_string(violations) + " residual violations");
  GgeResult gge = check_gge(A, 1.0, 2.0, ts, cs);
  c.check(gge.pass, "GGE(1,2) check failed");
  double elapsed = seconds_since(start);
  c.check(elapsed < 30.0, "runtime " + fmt(elapsed) + "s over budget");
  c.note("C=" + fmt(fit.C) + " c=" + fmt(fit.c) + ", GGE C=" + fmt(gge.C) + ", " +
         fmt(elapsed) + "s");
  return c;
}

// 11. complex-time profile: d_hat <= fitted dimension + 0.5 with R^2 >= 0.9
Criterion criterion_complex_profile() {
  Criterion c;
  Space s = Space::cycle(32);
  SpectralOperator A = SpectralOperator::graph_laplacian(s);
  std::vector<double> ts = log_grid(0.1, 10.0, 17);
  std::vector<double> cs = log_grid(1.0 / 64.0, 4.0, 33);
  GaussianFit fit = fit_gaussian(A, 2.0, ts, cs);
  c.check(fit.pass, "prerequisite gaussian fit failed");
  double d_fit = s.doubling_profile().d;
  std::vector<double> thetas = {0.0, 0.35, 0.7, 1.0, 1.2, 1.45};
  ComplexTimeProfile prof = complex_time_profile(A, 2.0, thetas, ts, fit, d_fit, 0.5);
  c.check(prof.s_theta[0] <= fit.C * (1 + 1e-9), "theta=0 exceeds the real-time constant");
  c.check(prof.d_hat <= d_fit + 0.5,
          "d_hat " + fmt(prof.d_hat) + " above " + fmt(d_fit) + " + 0.5");
  c.check(prof.r2 >= 0.9, "R^2 " + fmt(prof.r2) + " below 0.9");
  c.note("d_hat=" + fmt(prof.d_hat) + ", d_fit=" + fmt(d_fit) + ", R^2=" + fmt(prof.r2));
  return c;
}

// 12. Calderon-Zygmund batch: exact reconstruction, finite constants, stable
//     c_sum across halves
Criterion criterion_cz() {
  Criterion c;
  Space s = Space::cycle(32);
  DyadicSystem sys = DyadicSystem::build(s, 0.5, 3);
  double recon = 0.0, cg = 0.0, cm = 0.0;
  int overlap = 0;
  double half1 = 0.0, half2 = 0.0;
  int done = 0;
  for (int trial = 0; trial < 100; ++trial) {
    Rng rng(Rng::derive(121, trial));
    Vec f(32);
    for (int i = 0; i < 32; ++i) f(i) = rng.gaussian();
    double l1 = f.cwiseAbs().sum();
    double lo = l1 / 32.0, hi = 0.9 * f.cwiseAbs().maxCoeff();
    if (hi <= lo) continue;
    double lambda = lo + (hi - lo) * rng.uniform(0.05, 0.95);
    CzDecomposition dec = cz_decompose(s, sys, f, lambda);
    recon = std::max(recon, dec.recon_error);
    cg = std::max(cg, dec.c_good);
    cm = std::max(cm, dec.c_mass);
    overlap = std::max(overlap, dec.overlap);
    // (a5) with the per-run constant
    double sum_balls = 0.0;
    for (const auto& [z, r] : dec.balls)
      for (int y : s.ball(z, r)) sum_balls += s.mu(y);
    if (sum_balls > dec.c_sum / lambda * l1 * (1 + 1e-12)) c.check(false, "a5 violated");
    (trial < 50 ? half1 : half2) = std::max(trial < 50 ? half1 : half2, dec.c_sum);
    ++done;
  }
  c.check(done >= 90, "too few decompositions: " + std::to_string(done));
  c.check(recon <= 1e-12, "reconstruction error " + fmt(recon));
  c.check(std::isfinite(cg) && std::isfinite(cm) && overlap >= 1, "constants degenerate");
  double hi_h = std::max(half1, half2), lo_h = std::min(half1, half2);
  c.check(lo_h > 0.0 && hi_h <= 2.0 * lo_h, "c_sum halves " + fmt(half1) + " vs " + fmt(half2));
  c.note("recon " + fmt(recon) + ", c_good " + fmt(cg) + ", c_mass " + fmt(cm) +
         ", overlap " + std::to_string(overlap) + ", c_sum halves [" + fmt(lo_h) + "," +
         fmt(hi_h) + "]");
  return c;
}

// 13. R-bound profile stays under the alpha(p,pY,qY) d_hat + 0.1 envelope;
//     the singleton estimate matches the exact norm on L^2(l^2)
Criterion criterion_rbound_consistency() {
  Criterion c;
  Space s = Space::cycle(32);
  SpectralOperator A = SpectralOperator::graph_laplacian(s);
  double d_hat = s.doubling_profile().d;
  std::vector<double> thetas = {0.0, 0.3, 0.6, 0.9, 1.2, 1.45};
  std::vector<double> ts = log_grid(0.2, 5.0, 8);

  struct Combo {
    double p, lat_s, pY, qY;
  };
  for (const Combo& combo : {Combo{4.0, 1.5, 1.5, 2.0}, Combo{1.5, 4.0, 2.0, 4.0}}) {
    LatticeSpec Y = LatticeSpec::seq(combo.lat_s, 8);
    double alpha = alpha_exponent(combo.p, combo.pY, combo.qY);
    double env_alpha = alpha * d_hat + 0.1;
    RBoundProfile prof = semigroup_rbound_profile(A, combo.p, Y, thetas, ts, 16, 8,
                                                  Rng::derive(131, combo.p * 10), env_alpha);
    std::string combo_name = "(p=" + fmt(combo.p) + ",s=" + fmt(combo.lat_s) + ")";
    c.check(prof.envelope_holds, combo_name + " envelope violated");
    c.note(combo_name + " alpha_hat=" + fmt(prof.alpha_hat) + " env=" + fmt(env_alpha));
  }

  LatticeSpec H = LatticeSpec::seq(2.0, 2);
  for (double t : {0.3, 1.0, 4.0}) {
    CMat T = A.multiplier_matrix(Multiplier::heat(t));
    double exact = A.l2_multiplier_norm(Multiplier::heat(t));
    double est = r_bound_estimate({T}, 2.0, H, s, 8, 1, 7);
    c.check(std::abs(est - exact) <= 1e-9,
            "singleton t=" + fmt(t) + " off by " + fmt(std::abs(est - exact)));
  }
  return c;
}

// 14. multiplier square-function constant over 200 random normalized families
Criterion criterion_square_test() {
  Criterion c;
  Space s = Space::cycle(32);
  SpectralOperator A = SpectralOperator::graph_laplacian(s);
  double d_hat = s.doubling_profile().d;
  double p = 3.0, pY = 1.5, qY = 2.0;
  LatticeSpec Y = LatticeSpec::seq(1.5, 8);
  double beta = alpha_exponent(p, pY, qY) * d_hat + 0.6;
  HormanderParams params = HormanderParams::for_range(beta, A.lambda_min_positive(),
                                                      A.lambda_max());
  SquareTestBatch batch = multiplier_square_batch(A, p, Y, beta, params, 200, 8, 141);
  double hi = std::max(batch.half1_max, batch.half2_max);
  double lo = std::min(batch.half1_max, batch.half2_max);
  c.check(std::isfinite(batch.c_max) && batch.c_max > 0.0, "constant degenerate");
  c.check(lo > 0.0 && hi <= 2.0 * lo,
          "halves " + fmt(batch.half1_max) + " vs " + fmt(batch.half2_max));
  c.note("beta=" + fmt(beta) + ", c_max=" + fmt(batch.c_max) + ", halves [" + fmt(lo) +
         "," + fmt(hi) + "]");
  return c;
}

// 15. identical seeds reproduce byte-identical reports
Criterion criterion_determinism() {
  Criterion c;
  Config cfg = Config::parse_file(std::string(SMLAB_SOURCE_DIR) + "/scenarios/z32.cfg");
  RunOptions opt;
  ScenarioOutcome a = run_scenario(cfg, opt);
  ScenarioOutcome b = run_scenario(cfg, opt);
  c.check(a.tasks.size() == b.tasks.size(), "task counts differ");
  for (std::size_t i = 0; i < std::min(a.tasks.size(), b.tasks.size()); ++i) {
    c.check(a.tasks[i].report_json == b.tasks[i].report_json,
            a.tasks[i].type + " reports differ");
    c.check(a.tasks[i].csv_files == b.tasks[i].csv_files,
            a.tasks[i].type + " csv differs");
  }
  c.check(a.summary_json == b.summary_json, "summaries differ");
  c.check(a.all_pass, "bundled scenario does not pass");
  c.note(std::to_string(a.tasks.size()) + " task reports byte-identical");
  return c;
}

}  // namespace

int main() {
  struct Entry {
    const char* name;
    std::function<Criterion()> run;
  };
  const Entry entries[] = {
      {"dyadic systems on 20 seeded spaces", criterion_dyadic_systems},
      {"k(r) inequality", criterion_k_of_r},
      {"conditional expectation identities", criterion_conditional_expectation},
      {"M_HL hand case and M^q identity", criterion_mhl_hand_case},
      {"M_HL dimension sweep", criterion_dimension_sweep},
      {"Rademacher/square equivalence", criterion_rademacher_square},
      {"Hoermander norm properties and membership", criterion_hormander_norm},
      {"calculus reconstruction", criterion_calculus_reconstruction},
      {"Paley-Littlewood ratios", criterion_paley_littlewood},
      {"Gaussian fit and GGE implication", criterion_gaussian_fit},
      {"complex-time profile", criterion_complex_profile},
      {"Calderon-Zygmund decomposition", criterion_cz},
      {"R-bound envelope consistency", criterion_rbound_consistency},
      {"multiplier square-function test", criterion_square_test},
      {"byte-identical reports", criterion_determinism},
  };
  int failures = 0;
  int index = 0;
  for (const Entry& entry : entries) {
    ++index;
    Criterion result = entry.run();
    std::printf("[%s] criterion %2d: %s%s%s\n", result.pass ? "PASS" : "FAIL", index,
                entry.name, result.detail.str().empty() ? "" : " -- ",
                result.detail.str().c_str());
    std::fflush(stdout);
    if (!result.pass) ++failures;
  }
  if (failures > 0) std::printf("%d of 15 criteria failed\n", failures);
  return failures;
}
