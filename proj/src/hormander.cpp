#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <vector>

#include "smlab/parallel.hpp"
#include "smlab/spectral.hpp"

namespace smlab {

namespace {

// Sampled window phi(t_i) on the uniform grid over [0, 4].
std::vector<double> window_samples(int n) {
  std::vector<double> w(n);
  double dt = 4.0 / n;
  for (int i = 0; i < n; ++i) w[i] = DyadicPartition::base_bump(i * dt);
  return w;
}

struct GridSpec {
  std::vector<double> rs;
  int samples;
  int padding;
};

std::vector<double> dyadic_r_grid(double r_min, double r_max, int per_octave) {
  require(r_min > 0.0 && r_max >= r_min, ErrCode::invalid_argument,
          "hormander norm: bad R-grid bounds");
  require(per_octave >= 1, ErrCode::invalid_argument, "hormander norm: bad octave count");
  std::vector<double> rs;
  int j_lo = static_cast<int>(std::ceil(per_octave * std::log2(r_min) - 1e-9));
  int j_hi = static_cast<int>(std::floor(per_octave * std::log2(r_max) + 1e-9));
  for (int j = j_lo; j <= j_hi; ++j)
    rs.push_back(std::pow(2.0, static_cast<double>(j) / per_octave));
  if (rs.empty()) rs.push_back(r_min);
  return rs;
}

struct SupResult {
  std::vector<double> sup;       // per beta
  std::vector<double> argmax_R;  // per beta
  bool undersampled = false;
};

// sup over the R-grid of the discrete fractional Sobolev norm of
// g_R(t) = phi(t) f(Rt), for several beta at once (one transform per R).
SupResult sup_terms(const Multiplier& f, const GridSpec& grid,
                    const std::vector<double>& betas, int threads) {
  const int n = grid.samples;
  require((n & (n - 1)) == 0 && n >= 4, ErrCode::invalid_argument,
          "hormander norm: samples must be a power of two");
  require(grid.padding >= 1 && (grid.padding & (grid.padding - 1)) == 0,
          ErrCode::invalid_argument, "hormander norm: padding must be a power of two");
  const int len = n * grid.padding;
  const double dt = 4.0 / n;
  const std::vector<double> win = window_samples(n);
  // nonzero window span: [1/2, 2]
  int i_lo = static_cast<int>(0.5 / dt);
  int i_hi = std::min(n - 1, static_cast<int>(2.0 / dt) + 1);
  const std::vector<double>& rs = grid.rs;
  require(!rs.empty(), ErrCode::invalid_argument, "hormander norm: empty R-grid");

  // frequency weights share the layout of the transform output
  std::vector<double> xi2(len);
  for (int j = 0; j < len; ++j) {
    int jj = j <= len / 2 ? j : j - len;
    double xi = 2.0 * M_PI * jj / (len * dt);
    xi2[j] = xi * xi;
  }
  const double nyquist2 = xi2[len / 2];

  std::vector<std::vector<double>> sob(rs.size(), std::vector<double>(betas.size(), 0.0));
  std::vector<char> under(rs.size(), 0);

  parallel_for(rs.size(), threads, [&](std::size_t ri) {
    const double R = rs[ri];
    std::vector<Complex> g(len, Complex(0.0, 0.0));
    for (int i = i_lo; i <= i_hi; ++i)
      if (win[i] != 0.0) g[i] = win[i] * f(R * (i * dt));
    Eigen::FFT<double> fft;
    std::vector<Complex> G;
    fft.fwd(G, g);
    // (1/2pi) sum (1+xi^2)^beta |dt G|^2 dxi, dxi = 2pi/(len dt)
    const double scale = dt / len;
    std::vector<double> acc(betas.size(), 0.0);
    std::vector<double> tail(betas.size(), 0.0);
    for (int j = 0; j < len; ++j) {
      double e = std::norm(G[j]);
      if (e == 0.0) continue;
      for (std::size_t b = 0; b < betas.size(); ++b) {
        double w = std::pow(1.0 + xi2[j], betas[b]) * e;
        acc[b] += w;
        if (xi2[j] >= nyquist2 / 4.0) tail[b] += w;
      }
    }
    for (std::size_t b = 0; b < betas.size(); ++b) {
      sob[ri][b] = std::sqrt(scale * acc[b]);
      if (acc[b] > 0.0 && tail[b] > 1e-6 * acc[b]) under[ri] = 1;
    }
  });

  SupResult out;
  out.sup.assign(betas.size(), 0.0);
  out.argmax_R.assign(betas.size(), rs.front());
  for (std::size_t ri = 0; ri < rs.size(); ++ri) {
    if (under[ri]) out.undersampled = true;
    for (std::size_t b = 0; b < betas.size(); ++b)
      if (sob[ri][b] > out.sup[b]) {
        out.sup[b] = sob[ri][b];
        out.argmax_R[b] = rs[ri];
      }
  }
  return out;
}

}  // namespace

HormanderParams HormanderParams::for_range(double beta, double lo, double hi) {
  HormanderParams p;
  p.beta = beta;
  require(lo > 0.0 && hi >= lo, ErrCode::invalid_argument,
          "hormander params: bad spectral range");
  p.r_min = lo / 4.0;  // two octaves of padding around the band of interest
  p.r_max = hi * 4.0;
  return p;
}

HormanderParams HormanderParams::scaled(double c) const {
  require(c > 0.0, ErrCode::invalid_argument, "grid scale must be > 0");
  HormanderParams p = *this;
  p.explicit_grid = r_grid();
  for (double& r : p.explicit_grid) r /= c;
  return p;
}

std::vector<double> HormanderParams::r_grid() const {
  if (!explicit_grid.empty()) return explicit_grid;
  return dyadic_r_grid(r_min, r_max, per_octave);
}

HormanderNorm hormander_norm(const Multiplier& f, const HormanderParams& params) {
  require(params.beta > 0.5, ErrCode::invalid_argument,
          "hormander norm: beta must be > 1/2");
  GridSpec g{params.r_grid(), params.samples, params.padding};
  SupResult res = sup_terms(f, g, {params.beta}, 0);
  HormanderNorm out;
  out.f0 = std::abs(f(0.0));
  out.sup_term = res.sup[0];
  out.argmax_R = res.argmax_R[0];
  out.value = out.f0 + out.sup_term;
  out.undersampled = res.undersampled;
  return out;
}

namespace {
double adaptive_simpson(const std::function<double(double)>& h, double a, double b, double fa,
                        double fm, double fb, double whole, double tol, int depth) {
  double m = (a + b) / 2.0;
  double lm = (a + m) / 2.0, rm = (m + b) / 2.0;
  double flm = h(lm), frm = h(rm);
  double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return adaptive_simpson(h, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
         adaptive_simpson(h, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}

double integrate(const std::function<double(double)>& h, double a, double b) {
  double fa = h(a), fb = h(b), fm = h((a + b) / 2.0);
  double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  double tol = std::max(1e-12, 1e-9 * std::abs(whole));
  return adaptive_simpson(h, a, b, fa, fm, fb, whole, tol, 18);
}
}  // namespace

double hormander_norm_integer(const Multiplier& f, int beta, const HormanderParams& params) {
  require(beta >= 1, ErrCode::invalid_argument, "integer hormander norm: beta must be >= 1");
  double total = std::norm(f(0.0));
  std::vector<double> rs = params.r_grid();
  for (int k = 0; k <= beta; ++k) {
    auto integrand = [&](double t) {
      Complex d = f.derivative(k, t);
      return std::norm(std::pow(t, k) * d) / t;
    };
    double sup = 0.0;
    for (double R : rs) sup = std::max(sup, integrate(integrand, R, 2.0 * R));
    total += sup;
  }
  return std::sqrt(total);
}

double mihlin_norm(const Multiplier& f, int N, const HormanderParams& params) {
  require(N >= 0, ErrCode::invalid_argument, "mihlin norm: order must be >= 0");
  // denser grid than the R-grid: 4 extra points per step
  std::vector<double> rs = params.r_grid();
  std::vector<double> ts;
  for (std::size_t i = 0; i + 1 < rs.size(); ++i)
    for (int j = 0; j < 4; ++j)
      ts.push_back(rs[i] * std::pow(rs[i + 1] / rs[i], j / 4.0));
  if (!rs.empty()) ts.push_back(rs.back());
  double best = 0.0;
  for (int k = 0; k <= N; ++k)
    for (double t : ts) best = std::max(best, std::pow(t, k) * std::abs(f.derivative(k, t)));
  return best;
}

std::vector<MembershipResult> membership_check(const Multiplier& f,
                                               const std::vector<double>& betas,
                                               const HormanderParams& base) {
  GridSpec g0{base.r_grid(), base.samples, base.padding};
  // refinement: 8x window samples, 4 octaves further down, 8 octaves further
  // up (growth in R is the slow divergence channel), doubled octave density
  GridSpec g1{dyadic_r_grid(base.r_min / 16.0, base.r_max * 256.0, 16), base.samples * 8,
              base.padding};
  SupResult s0 = sup_terms(f, g0, betas, 0);
  SupResult s1 = sup_terms(f, g1, betas, 0);
  double f0 = std::abs(f(0.0));
  std::vector<MembershipResult> out;
  for (std::size_t b = 0; b < betas.size(); ++b) {
    MembershipResult r;
    r.beta = betas[b];
    r.base_norm = f0 + s0.sup[b];
    r.refined_norm = f0 + s1.sup[b];
    r.finite = r.refined_norm <= 10.0 * r.base_norm + 1e-12;
    out.push_back(r);
  }
  return out;
}

}  // namespace smlab
