#include "smlab/space.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include "smlab/rng.hpp"

namespace smlab {

namespace {
constexpr double kMetricTol = 1e-12;
}

Space Space::from_matrices(Mat dist, Vec mu) {
  const int n = static_cast<int>(mu.size());
  require(n >= 1, ErrCode::invalid_argument, "space needs at least one point");
  require(dist.rows() == n && dist.cols() == n, ErrCode::invalid_argument,
          "distance matrix shape does not match weight count");
  for (int i = 0; i < n; ++i) {
    require(std::isfinite(mu(i)) && mu(i) > 0.0, ErrCode::invalid_argument,
            "weight " + std::to_string(i) + " must be positive");
    require(dist(i, i) == 0.0, ErrCode::invalid_argument,
            "dist(" + std::to_string(i) + "," + std::to_string(i) + ") must be 0");
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      require(std::isfinite(dist(i, j)) && dist(i, j) >= 0.0, ErrCode::invalid_argument,
              "distances must be finite and nonnegative");
      require(std::abs(dist(i, j) - dist(j, i)) <= kMetricTol, ErrCode::invalid_argument,
              "distance matrix not symmetric at (" + std::to_string(i) + "," +
                  std::to_string(j) + ")");
      if (i != j)
        require(dist(i, j) > 0.0, ErrCode::invalid_argument,
                "duplicate points " + std::to_string(i) + " and " + std::to_string(j) +
                    " (distance 0) are rejected");
    }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        if (dist(i, j) > dist(i, k) + dist(k, j) + kMetricTol)
          fail(ErrCode::invalid_argument,
               "invalid metric: triangle inequality violated at (" + std::to_string(i) + "," +
                   std::to_string(j) + "," + std::to_string(k) + ") by " +
                   std::to_string(dist(i, j) - dist(i, k) - dist(k, j)));

  Space s;
  s.n_ = n;
  s.dist_ = std::move(dist);
  s.mu_ = std::move(mu);
  s.finalize();
  return s;
}

void Space::finalize() {
  total_mass_ = mu_.sum();
  diameter_ = 0.0;
  min_pos_dist_ = std::numeric_limits<double>::infinity();
  realized_radii_.clear();
  for (int i = 0; i < n_; ++i)
    for (int j = i + 1; j < n_; ++j) {
      double d = dist_(i, j);
      diameter_ = std::max(diameter_, d);
      min_pos_dist_ = std::min(min_pos_dist_, d);
      realized_radii_.push_back(d);
    }
  std::sort(realized_radii_.begin(), realized_radii_.end());
  realized_radii_.erase(std::unique(realized_radii_.begin(), realized_radii_.end()),
                        realized_radii_.end());

  order_.assign(n_, {});
  sorted_dists_.assign(n_, {});
  for (int x = 0; x < n_; ++x) {
    std::vector<int> idx(n_);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](int a, int b) { return dist_(x, a) < dist_(x, b); });
    order_[x] = idx;
    sorted_dists_[x].resize(n_);
    for (int i = 0; i < n_; ++i) sorted_dists_[x][i] = dist_(x, idx[i]);
  }
}

Space Space::cycle(int n) {
  require(n >= 1, ErrCode::invalid_argument, "cycle size must be >= 1");
  Mat d(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      int a = std::abs(i - j);
      d(i, j) = std::min(a, n - a);
    }
  return from_matrices(std::move(d), Vec::Ones(n));
}

Space Space::path(int n) {
  require(n >= 1, ErrCode::invalid_argument, "path size must be >= 1");
  Mat d(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) d(i, j) = std::abs(i - j);
  return from_matrices(std::move(d), Vec::Ones(n));
}

Space Space::torus(int side, int dims) {
  require(side >= 1 && dims >= 1, ErrCode::invalid_argument, "torus needs side, dims >= 1");
  int n = 1;
  for (int k = 0; k < dims; ++k) {
    require(n <= 1'000'000 / side, ErrCode::invalid_argument, "torus too large");
    n *= side;
  }
  auto coord = [&](int p, int axis) {
    for (int k = 0; k < axis; ++k) p /= side;
    return p % side;
  };
  Mat d(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      int sum = 0;
      for (int k = 0; k < dims; ++k) {
        int a = std::abs(coord(i, k) - coord(j, k));
        sum += std::min(a, side - a);
      }
      d(i, j) = sum;
    }
  return from_matrices(std::move(d), Vec::Ones(n));
}

Space Space::cloud(const Mat& points) {
  const int n = static_cast<int>(points.rows());
  require(n >= 1, ErrCode::invalid_argument, "cloud needs at least one point");
  Mat d(n, n);
  for (int i = 0; i < n; ++i) {
    d(i, i) = 0.0;
    for (int j = i + 1; j < n; ++j) {
      double v = (points.row(i) - points.row(j)).norm();
      d(i, j) = v;
      d(j, i) = v;
    }
  }
  return from_matrices(std::move(d), Vec::Ones(n));
}

Space Space::random_cloud(int n, int dim, std::uint64_t seed) {
  Rng rng(seed);
  Mat pts(n, dim);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < dim; ++k) pts(i, k) = rng.uniform();
  return cloud(pts);
}

std::vector<int> Space::ball(int x, double r) const {
  require(x >= 0 && x < n_, ErrCode::invalid_argument, "ball: point index out of range");
  require(r >= 0.0, ErrCode::invalid_argument, "ball: radius must be >= 0");
  std::vector<int> out;
  for (int y = 0; y < n_; ++y)
    if (dist_(x, y) <= r) out.push_back(y);
  return out;
}

double Space::volume(int x, double r) const {
  require(x >= 0 && x < n_, ErrCode::invalid_argument, "volume: point index out of range");
  require(r >= 0.0, ErrCode::invalid_argument, "volume: radius must be >= 0");
  const auto& ds = sorted_dists_[x];
  const auto& ord = order_[x];
  double v = 0.0;
  for (int i = 0; i < n_ && ds[i] <= r; ++i) v += mu_(ord[i]);
  return v;
}

std::vector<int> Space::annulus(int x, double r, int k) const {
  require(r > 0.0, ErrCode::invalid_argument, "annulus: radius must be > 0");
  require(k >= 0, ErrCode::invalid_argument, "annulus: k must be >= 0");
  if (k == 0) return ball(x, r);
  double inner = static_cast<double>(k) * r;
  double outer = static_cast<double>(k + 1) * r;
  std::vector<int> out;
  for (int y = 0; y < n_; ++y)
    if (dist_(x, y) <= outer && dist_(x, y) > inner) out.push_back(y);
  return out;
}

std::vector<double> Space::doubling_scan_radii() const {
  std::vector<double> rs;
  rs.reserve(realized_radii_.size() * 3);
  for (std::size_t i = 0; i < realized_radii_.size(); ++i) {
    rs.push_back(realized_radii_[i]);
    rs.push_back(realized_radii_[i] / 2.0);
    if (i + 1 < realized_radii_.size())
      rs.push_back((realized_radii_[i] + realized_radii_[i + 1]) / 2.0);
  }
  std::sort(rs.begin(), rs.end());
  rs.erase(std::unique(rs.begin(), rs.end()), rs.end());
  while (!rs.empty() && rs.front() <= 0.0) rs.erase(rs.begin());
  return rs;
}

DoublingProfile Space::doubling_profile() const {
  DoublingProfile prof;
  // Precompute V(x, r) on a grid by sweeping the sorted distance lists.
  auto volumes_on = [&](const std::vector<double>& grid) {
    Mat V(n_, static_cast<int>(grid.size()));
    for (int x = 0; x < n_; ++x) {
      const auto& ds = sorted_dists_[x];
      const auto& ord = order_[x];
      int i = 0;
      double acc = 0.0;
      for (std::size_t g = 0; g < grid.size(); ++g) {
        while (i < n_ && ds[i] <= grid[g]) acc += mu_(ord[i++]);
        V(x, static_cast<int>(g)) = acc;
      }
    }
    return V;
  };

  // C_D over the breakpoint-complete grid (values, midpoints, halves).
  {
    std::vector<double> rs = doubling_scan_radii();
    std::vector<double> grid;
    grid.reserve(rs.size() * 2);
    for (double r : rs) {
      grid.push_back(r);
      grid.push_back(2.0 * r);
    }
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    Mat V = volumes_on(grid);
    auto at = [&](double r) {
      return static_cast<int>(std::lower_bound(grid.begin(), grid.end(), r) - grid.begin());
    };
    double best = 1.0;
    for (double r : rs) {
      int a = at(r), b = at(2.0 * r);
      for (int x = 0; x < n_; ++x) best = std::max(best, V(x, b) / V(x, a));
    }
    prof.C_D = best;
  }

  // (C_d, d) fit over lambda in {2^{j/4} : j = 1..16} and realized radii.
  {
    std::vector<double> lambdas;
    for (int j = 1; j <= 16; ++j) lambdas.push_back(std::pow(2.0, j / 4.0));
    std::vector<double> grid;
    for (double r : realized_radii_) {
      grid.push_back(r);
      for (double l : lambdas) grid.push_back(l * r);
    }
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    Mat V = volumes_on(grid);
    auto at = [&](double r) {
      return static_cast<int>(std::lower_bound(grid.begin(), grid.end(), r) - grid.begin());
    };
    std::vector<double> max_ratio(lambdas.size(), 1.0);
    for (double r : realized_radii_) {
      int a = at(r);
      for (std::size_t li = 0; li < lambdas.size(); ++li) {
        int b = at(lambdas[li] * r);
        for (int x = 0; x < n_; ++x)
          max_ratio[li] = std::max(max_ratio[li], V(x, b) / V(x, a));
      }
    }
    // the bound V(x,lr) <= C_d l^d V(x,r) is an envelope: regress the per-l
    // worst ratio, not the saturated cloud
    double sxx = 0, sxy = 0, sx = 0, sy = 0;
    const double cnt = static_cast<double>(lambdas.size());
    for (std::size_t li = 0; li < lambdas.size(); ++li) {
      double lx = std::log(lambdas[li]);
      double ly = std::log(max_ratio[li]);
      sxx += lx * lx;
      sxy += lx * ly;
      sx += lx;
      sy += ly;
    }
    {
      double denom = cnt * sxx - sx * sx;
      prof.d = denom > 0 ? std::max(0.0, (cnt * sxy - sx * sy) / denom) : 0.0;
    }
    double cd = 1.0;
    double dmin = 0.0;
    for (std::size_t li = 0; li < lambdas.size(); ++li) {
      cd = std::max(cd, max_ratio[li] / std::pow(lambdas[li], prof.d));
      // minimal d with companion constant <= 16, per lambda: ratio <= 16 l^d
      if (max_ratio[li] > 16.0)
        dmin = std::max(dmin, std::log(max_ratio[li] / 16.0) / std::log(lambdas[li]));
    }
    prof.C_d = cd;
    prof.d_min16 = dmin;
  }

  prof.C_cmp = volume_comparability();
  return prof;
}

double Space::volume_comparability() const {
  if (n_ == 1) return 1.0;
  const std::vector<double>& grid = realized_radii_;
  Mat V(n_, static_cast<int>(grid.size()));
  for (int x = 0; x < n_; ++x) {
    const auto& ds = sorted_dists_[x];
    const auto& ord = order_[x];
    int i = 0;
    double acc = 0.0;
    for (std::size_t g = 0; g < grid.size(); ++g) {
      while (i < n_ && ds[i] <= grid[g]) acc += mu_(ord[i++]);
      V(x, static_cast<int>(g)) = acc;
    }
  }
  double best = 1.0;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    double r = grid[g];
    for (int x = 0; x < n_; ++x)
      for (int y = x + 1; y < n_; ++y) {
        if (dist_(x, y) > r) continue;
        double a = V(x, static_cast<int>(g)), b = V(y, static_cast<int>(g));
        best = std::max(best, std::max(a / b, b / a));
      }
  }
  return best;
}

void Space::save(std::ostream& os) const {
  os << "# smlab space: n, then n weights, then the n x n distance matrix\n";
  os << n_ << "\n";
  os << std::fixed << std::setprecision(15);
  for (int i = 0; i < n_; ++i) os << mu_(i) << "\n";
  for (int i = 0; i < n_; ++i) {
    for (int j = 0; j < n_; ++j) os << (j ? " " : "") << dist_(i, j);
    os << "\n";
  }
}

namespace {
// Strips comments; returns whitespace-separated tokens.
std::vector<std::string> tokenize_stream(std::istream& is) {
  std::vector<std::string> toks;
  std::string line;
  while (std::getline(is, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string t;
    while (ls >> t) toks.push_back(t);
  }
  return toks;
}
}  // namespace

Space Space::load(std::istream& is) {
  auto toks = tokenize_stream(is);
  require(!toks.empty(), ErrCode::parse, "space file: empty");
  std::size_t pos = 0;
  auto next = [&]() -> const std::string& {
    require(pos < toks.size(), ErrCode::parse, "space file: unexpected end of input");
    return toks[pos++];
  };
  int n = 0;
  try {
    n = std::stoi(next());
  } catch (const std::exception&) {
    fail(ErrCode::parse, "space file: bad point count");
  }
  require(n >= 1, ErrCode::parse, "space file: point count must be >= 1");
  auto number = [&]() {
    try {
      return std::stod(next());
    } catch (const Error&) {
      throw;
    } catch (const std::exception&) {
      fail(ErrCode::parse, "space file: bad number near token " + std::to_string(pos));
    }
  };
  Vec mu(n);
  for (int i = 0; i < n; ++i) mu(i) = number();
  Mat d(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) d(i, j) = number();
  require(pos == toks.size(), ErrCode::parse, "space file: trailing tokens");
  return from_matrices(std::move(d), std::move(mu));
}

void Space::save_file(const std::string& path) const {
  std::ofstream os(path);
  require(os.good(), ErrCode::io, "cannot open for writing: " + path);
  save(os);
  require(os.good(), ErrCode::io, "write failed: " + path);
}

Space Space::load_file(const std::string& path) {
  std::ifstream is(path);
  require(is.good(), ErrCode::io, "cannot open: " + path);
  return load(is);
}

}  // namespace smlab
