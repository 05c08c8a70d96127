#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "smlab/estimates.hpp"
#include "smlab/maximal.hpp"
#include "smlab/rng.hpp"

using namespace smlab;

namespace {

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

DyadicSystem hand_z8_system() {
  std::vector<std::vector<DyadicCube>> levels(4);
  levels[0].push_back({-3, 0, 0, -1, {0, 1, 2, 3, 4, 5, 6, 7}});
  levels[1].push_back({-2, 0, 1, 0, {0, 1, 2, 3}});
  levels[1].push_back({-2, 1, 5, 0, {4, 5, 6, 7}});
  for (int i = 0; i < 4; ++i)
    levels[2].push_back({-1, i, 2 * i, i / 2, {2 * i, 2 * i + 1}});
  for (int i = 0; i < 8; ++i) levels[3].push_back({0, i, i, i / 2, {i}});
  return DyadicSystem::from_levels(0.5, -3, std::move(levels));
}

}  // namespace

TEST_CASE("gaussian fit") {
  std::vector<double> c_grid = log_grid(1.0 / 64, 4.0, 25);

  SUBCASE("zero generator reduces to a volume ratio") {
    Space s = Space::cycle(8);
    SpectralOperator A = SpectralOperator::decompose(Mat::Zero(8, 8), s);
    std::vector<double> ts = log_grid(0.25, 4.0, 5);
    GaussianFit fit = fit_gaussian(A, 2.0, ts, c_grid);
    double oracle = 0.0;
    for (double t : ts)
      for (int x = 0; x < 8; ++x)
        oracle = std::max(oracle, s.volume(x, std::sqrt(t)) / s.mu(x));
    CHECK(fit.C == doctest::Approx(oracle));
    CHECK(fit.pass);
    CHECK(fit.c == doctest::Approx(c_grid.front()));  // C e^c picks the smallest c
  }

  SUBCASE("cycle laplacian admits a feasible fit, re-verified independently") {
    Space s = Space::cycle(32);
    SpectralOperator A = SpectralOperator::graph_laplacian(s);
    std::vector<double> ts = log_grid(0.1, 10.0, 17);
    GaussianFit fit = fit_gaussian(A, 2.0, ts, c_grid);
    CHECK(fit.pass);
    CHECK(fit.max_residual <= 1e-9);
    for (std::size_t ti = 0; ti < ts.size(); ++ti) {
      double t = ts[ti];
      double rt = std::sqrt(t);
      CMat K = A.semigroup_kernel(t);
      for (int x = 0; x < 32; ++x)
        for (int y = 0; y < 32; ++y) {
          if (std::abs(K(x, y)) <= fit.noise_floors[ti]) continue;
          double bound = fit.C / s.volume(x, rt) *
                         std::exp(-fit.c * std::pow(s.dist(x, y) / rt, 2.0));
          CHECK(std::abs(K(x, y)) <= bound * (1 + 1e-9));
        }
    }
    CHECK(fit.feasible.size() == c_grid.size());
  }

  SUBCASE("far coupling blows the constant") {
    Space s = Space::cycle(32);
    SpectralOperator good = SpectralOperator::graph_laplacian(s);
    GaussianFit ref = fit_gaussian(good, 2.0, {1.0}, c_grid, /*C_cap=*/10.0);
    CHECK(ref.pass);  // the cap is realistic for a genuine heat kernel

    Vec v = Vec::Zero(32);
    v(0) = 1.0;
    v(16) = 1.0;
    Mat A = v * v.transpose();
    SpectralOperator op = SpectralOperator::decompose(A, s);
    GaussianFit fit = fit_gaussian(op, 2.0, {1.0}, c_grid, /*C_cap=*/10.0);
    CHECK_FALSE(fit.pass);
    CHECK(fit.C > 10.0);
  }

  SUBCASE("degenerate grids are rejected") {
    Space s = Space::cycle(4);
    SpectralOperator A = SpectralOperator::graph_laplacian(s);
    CHECK_THROWS_AS(fit_gaussian(A, 2.0, {}, c_grid), Error);
    CHECK_THROWS_AS(fit_gaussian(A, 2.0, {-1.0}, c_grid), Error);
    CHECK_THROWS_AS(fit_gaussian(A, 2.0, {1.0}, {}), Error);
  }
}

TEST_CASE("generalised gaussian estimates") {
  std::vector<double> c_grid = log_grid(1.0 / 64, 4.0, 25);

  SUBCASE("GE implies GGE(1, m) on model laplacians") {
    for (int n : {8, 32}) {
      Space s = Space::cycle(n);
      SpectralOperator A = SpectralOperator::graph_laplacian(s);
      std::vector<double> ts = log_grid(0.1, 10.0, 9);
      GaussianFit ge = fit_gaussian(A, 2.0, ts, c_grid);
      REQUIRE(ge.pass);
      GgeResult gge = check_gge(A, 1.0, 2.0, ts, c_grid);
      CHECK(gge.pass);
      CHECK(gge.mode == "exact");
      CHECK(gge.max_residual <= 1e-9);
    }
  }
  SUBCASE("large times on a connected graph still fit") {
    Space s = Space::cycle(8);
    SpectralOperator A = SpectralOperator::graph_laplacian(s);
    GgeResult gge = check_gge(A, 1.0, 2.0, log_grid(0.1, 1000.0, 9), c_grid);
    CHECK(gge.pass);
  }
  SUBCASE("single point is trivial") {
    Space pt = Space::from_matrices(Mat::Zero(1, 1), Vec::Ones(1));
    SpectralOperator A = SpectralOperator::decompose(Mat::Zero(1, 1), pt);
    GgeResult gge = check_gge(A, 1.0, 2.0, {1.0}, c_grid);
    CHECK(gge.pass);
  }
  SUBCASE("davies-gaffney endpoint p0 = 2 is exact") {
    Space s = Space::cycle(8);
    SpectralOperator A = SpectralOperator::graph_laplacian(s);
    GgeResult gge = check_gge(A, 2.0, 2.0, log_grid(0.2, 5.0, 5), c_grid);
    CHECK(gge.pass);
    CHECK(gge.mode == "exact");
  }
  SUBCASE("interpolated mode brackets the norm") {
    Space s = Space::cycle(8);
    SpectralOperator A = SpectralOperator::graph_laplacian(s);
    GgeResult gge = check_gge(A, 1.5, 2.0, log_grid(0.2, 5.0, 5), c_grid);
    CHECK(gge.pass);
    CHECK(gge.mode == "interpolated");
    CHECK(gge.lower_vs_upper > 0.0);
    CHECK(gge.lower_vs_upper <= 1.0 + 1e-12);
  }
}

TEST_CASE("complex time profile") {
  Space s = Space::cycle(32);
  SpectralOperator A = SpectralOperator::graph_laplacian(s);
  std::vector<double> ts = log_grid(0.1, 10.0, 9);
  std::vector<double> c_grid = log_grid(1.0 / 64, 4.0, 25);
  GaussianFit ge = fit_gaussian(A, 2.0, ts, c_grid);
  REQUIRE(ge.pass);
  std::vector<double> thetas = {0.0, 0.3, 0.6, 0.9, 1.2, 1.45};
  ComplexTimeProfile prof = complex_time_profile(A, 2.0, thetas, ts, ge, 2.0, 0.5);

  SUBCASE("theta = 0 stays under the real-time constant") {
    CHECK(prof.s_theta[0] <= ge.C * (1 + 1e-9));
  }
  SUBCASE("profile is finite with a sane regression") {
    for (double v : prof.s_theta) CHECK(std::isfinite(v));
    CHECK(std::isfinite(prof.d_hat));
    CHECK(prof.r2 >= 0.0);
    CHECK(prof.r2 <= 1.0 + 1e-12);
  }
  SUBCASE("requires a prior fit") {
    GaussianFit bad;
    bad.pass = false;
    CHECK_THROWS_AS(complex_time_profile(A, 2.0, thetas, ts, bad, 2.0, 0.5), Error);
  }
  SUBCASE("torus profile is recorded") {
    Space t = Space::torus(5, 2);
    SpectralOperator L = SpectralOperator::graph_laplacian(t);
    GaussianFit ge2 = fit_gaussian(L, 2.0, ts, c_grid);
    REQUIRE(ge2.pass);
    ComplexTimeProfile p2 = complex_time_profile(L, 2.0, thetas, ts, ge2, 2.0, 0.5);
    CHECK(std::isfinite(p2.d_hat));
  }
}

TEST_CASE("dispersive estimates") {
  SUBCASE("synthetic decay is recovered exactly") {
    std::vector<double> ts = log_grid(1.0, 100.0, 12);
    for (double d : {1.0, 2.0, 3.0}) {
      std::vector<double> ns;
      for (double t : ts) ns.push_back(3.7 * std::pow(t, -d / 2.0));
      auto [C, e] = fit_log_decay(ts, ns);
      CHECK(e == doctest::Approx(d / 2.0).epsilon(1e-6));
      CHECK(C == doctest::Approx(3.7).epsilon(1e-6));
    }
  }
  SUBCASE("tiny time gives the identity kernel norm") {
    Space s = Space::cycle(8);
    SpectralOperator A = SpectralOperator::graph_laplacian(s);
    DispersiveFit fit = dispersive_check(A, 1.0, {1e-9, 1e-8});
    CHECK(fit.norms[0] == doctest::Approx(1.0));  // max_x 1/mu(x)
  }
  SUBCASE("cycle laplacian reports a cutoff and an exponent") {
    Space s = Space::cycle(32);
    SpectralOperator A = SpectralOperator::graph_laplacian(s);
    DispersiveFit fit = dispersive_check(A, 1.0, log_grid(0.5, 200.0, 24));
    CHECK(fit.used >= 2);
    CHECK(fit.used <= static_cast<int>(fit.t_grid.size()));
    CHECK(std::isfinite(fit.e_hat));
    CHECK(fit.C_envelope > 0.0);
  }
}

TEST_CASE("calderon-zygmund decomposition") {
  Space s = Space::cycle(8);
  DyadicSystem sys = hand_z8_system();

  SUBCASE("no bad cubes when the height dominates") {
    Vec f(8);
    f << 1, -1, 0.5, 0.25, -0.5, 1, 0.75, -0.25;
    CzDecomposition dec = cz_decompose(s, sys, f, 2.0);
    CHECK(dec.bad_parts.empty());
    CHECK((dec.good - f).cwiseAbs().maxCoeff() == 0.0);
    CHECK(dec.c_good <= 1.0);
  }
  SUBCASE("height below the average is rejected") {
    Vec f = Vec::Ones(8);
    CHECK_THROWS_AS(cz_decompose(s, sys, f, 0.5), Error);
  }
  SUBCASE("single spike: one bad cube with c_mass <= 2") {
    Vec f = Vec::Zero(8);
    f(0) = 3.0;
    CzDecomposition dec = cz_decompose(s, sys, f, 1.4);
    REQUIRE(dec.bad_parts.size() == 1);
    CHECK(dec.bad_cubes[0].first == -1);  // the two-point cube {0,1}
    CHECK(dec.c_mass <= 2.0);
    CHECK(dec.recon_error <= 1e-12);
    // f_i integrates to zero
    double total = 0.0;
    for (int x = 0; x < 8; ++x) total += s.mu(x) * dec.bad_parts[0](x);
    CHECK(std::abs(total) < 1e-12);
  }
  SUBCASE("random batch: all five properties hold with finite constants") {
    Space z32 = Space::cycle(32);
    DyadicSystem d32 = DyadicSystem::build(z32, 0.5, 11);
    Rng rng(321);
    for (int trial = 0; trial < 40; ++trial) {
      Vec f(32);
      for (int i = 0; i < 32; ++i) f(i) = rng.gaussian();
      double l1 = f.cwiseAbs().sum();
      double lo = l1 / 32.0, hi = 0.9 * f.cwiseAbs().maxCoeff();
      if (hi <= lo) continue;
      double lambda = lo + (hi - lo) * rng.uniform(0.05, 0.95);
      CzDecomposition dec = cz_decompose(z32, d32, f, lambda);
      CHECK(dec.recon_error <= 1e-12);
      CHECK(std::isfinite(dec.c_good));
      CHECK(std::isfinite(dec.c_mass));
      CHECK(dec.overlap >= static_cast<int>(!dec.bad_parts.empty()));
      // (a5) re-check
      double sum_balls = 0.0;
      for (const auto& [z, r] : dec.balls)
        for (int y : z32.ball(z, r)) sum_balls += z32.mu(y), (void)y;
      CHECK(sum_balls <= dec.c_sum / lambda * l1 * (1 + 1e-12));
      // supp f_i inside its ball
      for (std::size_t i = 0; i < dec.bad_parts.size(); ++i)
        for (int x = 0; x < 32; ++x)
          if (dec.bad_parts[i](x) != 0.0)
            CHECK(z32.dist(dec.balls[i].first, x) <= dec.balls[i].second + 1e-12);
    }
  }
}

TEST_CASE("r-bound estimation") {
  Space s = Space::cycle(8);
  LatticeSpec H = LatticeSpec::seq(2.0, 2);
  CMat I = CMat::Identity(8, 8);

  SUBCASE("identity family") {
    CHECK(r_bound_estimate({I}, 2.0, H, s, 6, 1, 3) == doctest::Approx(1.0));
    CHECK(r_bound_estimate({I, I, I}, 3.0, H, s, 6, 2, 3) == doctest::Approx(1.0));
  }
  SUBCASE("scaled identities reach the largest scale") {
    std::vector<CMat> ops;
    for (int j = 1; j <= 4; ++j) ops.push_back(double(j) * I);
    CHECK(r_bound_estimate(ops, 2.0, H, s, 10, 3, 3) == doctest::Approx(4.0));
  }
  SUBCASE("monotone along a nested chain") {
    std::vector<CMat> ops;
    double prev = 0.0;
    for (int j = 1; j <= 4; ++j) {
      ops.push_back(double(j) * I);
      double est = r_bound_estimate(ops, 3.0, LatticeSpec::seq(1.5, 2), s, 8,
                                    static_cast<int>(ops.size()), 5);
      CHECK(est >= prev - 1e-12);
      prev = est;
    }
  }
  SUBCASE("singleton semigroup matches the exact norm on L^2(l^2)") {
    SpectralOperator A = SpectralOperator::graph_laplacian(s);
    for (double t : {0.3, 1.0, 4.0}) {
      CMat T = A.multiplier_matrix(Multiplier::heat(t));
      double exact = A.l2_multiplier_norm(Multiplier::heat(t));
      double est = r_bound_estimate({T}, 2.0, H, s, 8, 1, 7);
      CHECK(est <= exact + 1e-9);
      CHECK(est == doctest::Approx(exact).epsilon(1e-9));
    }
  }
  SUBCASE("preconditions") {
    CHECK_THROWS_AS(r_bound_estimate({}, 2.0, H, s, 4, 1, 0), Error);
    CHECK_THROWS_AS(r_bound_estimate({I}, 2.0, H, s, 4, 2, 0), Error);
  }
}

TEST_CASE("semigroup r-bound profile") {
  Space s = Space::cycle(8);
  LatticeSpec H = LatticeSpec::seq(2.0, 2);
  std::vector<double> thetas = {0.0, 0.4, 0.8, 1.2};
  std::vector<double> ts = log_grid(0.2, 5.0, 4);

  SUBCASE("zero generator is flat") {
    SpectralOperator Z = SpectralOperator::decompose(Mat::Zero(8, 8), s);
    RBoundProfile prof = semigroup_rbound_profile(Z, 2.0, H, thetas, ts, 4, 4, 1, 1.0);
    for (double r : prof.r_hat) CHECK(r == doctest::Approx(1.0));
    CHECK(prof.alpha_hat == doctest::Approx(0.0));
    CHECK(prof.envelope_holds);
  }
  SUBCASE("contraction semigroup at theta=0") {
    SpectralOperator A = SpectralOperator::graph_laplacian(s);
    RBoundProfile prof = semigroup_rbound_profile(A, 2.0, H, {0.0}, ts, 6, 4, 2, 1.0);
    CHECK(prof.r_hat[0] <= 1.0 + 1e-9);
  }
  SUBCASE("profile is monotone up to monte carlo noise on the model laplacian") {
    SpectralOperator A = SpectralOperator::graph_laplacian(s);
    LatticeSpec Y = LatticeSpec::seq(1.5, 4);
    RBoundProfile prof = semigroup_rbound_profile(A, 3.0, Y, thetas, ts, 12, 4, 5, 1.0);
    for (std::size_t i = 1; i < prof.r_hat.size(); ++i)
      CHECK(prof.r_hat[i] >= prof.r_hat[i - 1] * 0.95);
  }
}

TEST_CASE("multiplier square function test") {
  Space s = Space::cycle(16);
  SpectralOperator A = SpectralOperator::graph_laplacian(s);
  LatticeSpec Y = LatticeSpec::seq(2.0, 2);
  HormanderParams params = HormanderParams::for_range(1.5, A.lambda_min_positive(),
                                                      std::max(A.lambda_max(), 1e-6));
  params.samples = 1 << 11;

  SUBCASE("constant multiplier stays below one") {
    std::vector<Multiplier> ms = {Multiplier::constant(1.0)};
    std::vector<VectorField> fs = {random_field(s, 2, 1)};
    double c = multiplier_square_constant(A, 2.0, Y, ms, fs, 1.5, params);
    CHECK(c <= 1.0 + 1e-12);
    CHECK(c > 0.0);
  }
  SUBCASE("multiplier supported away from the field's eigenvalue") {
    // top eigenvalue of the even cycle is 4 with eigenvector (-1)^x
    VectorField f = VectorField::Zero(16, 2);
    for (int x = 0; x < 16; ++x) f(x, 0) = (x % 2 == 0) ? 1.0 : -1.0;
    std::vector<Multiplier> ms = {Multiplier::bump(-3)};  // supported near 1/8
    std::vector<VectorField> fs = {f};
    double c = multiplier_square_constant(A, 2.0, Y, ms, fs, 1.5, params);
    CHECK(c <= 1e-10);
  }
  SUBCASE("zero denominator errors") {
    std::vector<Multiplier> ms = {Multiplier::constant(1.0)};
    std::vector<VectorField> fs = {VectorField::Zero(16, 2)};
    CHECK_THROWS_AS(multiplier_square_constant(A, 2.0, Y, ms, fs, 1.5, params), Error);
  }
  SUBCASE("batch halves are positive and finite") {
    SquareTestBatch batch = multiplier_square_batch(A, 3.0, LatticeSpec::seq(1.5, 2), 1.5,
                                                    params, 8, 3, 99);
    CHECK(batch.c_max > 0.0);
    CHECK(std::isfinite(batch.c_max));
    CHECK(batch.half1_max > 0.0);
    CHECK(batch.half2_max > 0.0);
    CHECK(batch.c_max == doctest::Approx(std::max(batch.half1_max, batch.half2_max)));
  }
}

TEST_CASE("ku08 domination for the heat semigroup") {
  Space s = Space::cycle(8);
  SpectralOperator A = SpectralOperator::graph_laplacian(s);
  VectorField f = random_field(s, 2, 13);
  auto apply_S = [&](double t) { return A.apply(Multiplier::heat(t), f); };
  auto rho = [](double t) { return std::sqrt(t); };
  double c = ku08_domination(s, 1.0, 2.0, apply_S, rho, log_grid(0.1, 10.0, 7), f);
  CHECK(std::isfinite(c));
  CHECK(c > 0.0);
}
