#include "smlab/dyadic.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>

#include "smlab/rng.hpp"

namespace smlab {

DyadicSystem DyadicSystem::build(const Space& space, double delta, std::uint64_t seed) {
  require(delta > 0.0 && delta <= 0.5, ErrCode::invalid_argument,
          "delta must lie in (0, 1/2]");
  const int n = space.size();

  // Top level: one cube = Omega, scale chosen so delta^k covers the diameter.
  int k_top = 0;
  if (space.diameter() > 0.0) {
    k_top = static_cast<int>(std::floor(std::log(space.diameter()) / std::log(delta)));
    while (std::pow(delta, k_top) < space.diameter()) --k_top;
  }
  // Stop once delta^k < half the minimum positive distance (all singletons).
  int k_stop = k_top;
  if (n > 1) {
    double bound = space.min_positive_dist() / 2.0;
    while (std::pow(delta, k_stop) >= bound) ++k_stop;
  }

  Rng order_rng(Rng::derive(seed, 0x6e6574));
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  // seeded shuffle, shared by all levels
  for (int i = n - 1; i > 0; --i) std::swap(order[i], order[order_rng.uniform_int(i + 1)]);

  std::vector<std::vector<DyadicCube>> levels;
  {
    DyadicCube top;
    top.level = k_top;
    top.index = 0;
    top.parent = -1;
    top.points.resize(n);
    std::iota(top.points.begin(), top.points.end(), 0);
    // center: first point in seeded order
    top.center = order.empty() ? 0 : order[0];
    levels.push_back({top});
  }

  for (int k = k_top + 1; k <= k_stop; ++k) {
    const double radius = std::pow(delta, k);
    const auto& parents = levels.back();
    std::vector<DyadicCube> cur;
    for (std::size_t pi = 0; pi < parents.size(); ++pi) {
      const auto& parent = parents[pi];
      // greedy net among the parent's points, in seeded order
      std::vector<int> centers;
      for (int cand : order) {
        if (!std::binary_search(parent.points.begin(), parent.points.end(), cand)) continue;
        bool far = true;
        for (int c : centers)
          if (space.dist(cand, c) <= radius) {
            far = false;
            break;
          }
        if (far) centers.push_back(cand);
      }
      std::vector<std::vector<int>> members(centers.size());
      for (int p : parent.points) {
        int best = -1;
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < centers.size(); ++c) {
          double d = space.dist(p, centers[c]);
          // ties by lowest center point index
          if (d < best_d || (d == best_d && best >= 0 && centers[c] < centers[best]))
            best = static_cast<int>(c), best_d = d;
        }
        members[static_cast<std::size_t>(best)].push_back(p);
      }
      for (std::size_t c = 0; c < centers.size(); ++c) {
        if (members[c].empty()) continue;
        DyadicCube q;
        q.level = k;
        q.index = static_cast<int>(cur.size());
        q.center = centers[c];
        q.parent = static_cast<int>(pi);
        std::sort(members[c].begin(), members[c].end());
        q.points = std::move(members[c]);
        cur.push_back(std::move(q));
      }
    }
    levels.push_back(std::move(cur));
  }

  DyadicSystem sys = from_levels(delta, k_top, std::move(levels));
  sys.measure_constants(space);
  return sys;
}

DyadicSystem DyadicSystem::from_levels(double delta, int level_min,
                                       std::vector<std::vector<DyadicCube>> levels) {
  require(!levels.empty(), ErrCode::invalid_argument, "dyadic system needs >= 1 level");
  DyadicSystem sys;
  sys.delta_ = delta;
  sys.level_min_ = level_min;
  sys.levels_ = std::move(levels);
  int n = 0;
  for (const auto& lv : sys.levels_)
    for (const auto& q : lv)
      for (int p : q.points) n = std::max(n, p + 1);
  sys.rebuild_point_index(n);
  return sys;
}

void DyadicSystem::rebuild_point_index(int n_points) {
  point_cube_.assign(levels_.size(), std::vector<int>(n_points, -1));
  for (std::size_t l = 0; l < levels_.size(); ++l)
    for (const auto& q : levels_[l])
      for (int p : q.points)
        if (point_cube_[l][p] < 0) point_cube_[l][p] = q.index;
}

const DyadicCube& DyadicSystem::cube_of(int k, int x) const {
  int ci = cube_index_of(k, x);
  require(ci >= 0, ErrCode::invalid_argument,
          "point " + std::to_string(x) + " not covered at level " + std::to_string(k));
  return levels_[idx(k)][ci];
}

void DyadicSystem::measure_constants(const Space& space) {
  double c1 = std::numeric_limits<double>::infinity();
  double C1 = 0.0;
  for (int k = level_min(); k <= level_max(); ++k) {
    const double scale = std::pow(delta_, k);
    for (const auto& q : cubes(k)) {
      double far = 0.0;
      for (int p : q.points) far = std::max(far, space.dist(q.center, p));
      C1 = std::max(C1, far / scale);
      double nearest_out = std::numeric_limits<double>::infinity();
      for (int y = 0; y < space.size(); ++y)
        if (!std::binary_search(q.points.begin(), q.points.end(), y))
          nearest_out = std::min(nearest_out, space.dist(q.center, y));
      if (std::isfinite(nearest_out)) c1 = std::min(c1, nearest_out / scale);
    }
  }
  achieved_c1_ = std::isfinite(c1) ? c1 : 1.0;  // vacuous on a single point
  achieved_C1_ = C1;
}

void DyadicSystem::dump(std::ostream& os, const Space& space) const {
  (void)space;
  os << "# smlab dyadic system\n";
  os << "delta = " << delta_ << "\n";
  for (int k = level_min(); k <= level_max(); ++k)
    for (const auto& q : cubes(k)) {
      os << "level " << k << ": " << q.index << " -> [";
      for (std::size_t i = 0; i < q.points.size(); ++i) os << (i ? " " : "") << q.points[i];
      os << "], center " << q.center << "\n";
    }
}

DyadicSystem DyadicSystem::parse(std::istream& is, const Space& space) {
  double delta = 0.0;
  std::map<int, std::vector<DyadicCube>> by_level;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::string trimmed = line;
    trimmed.erase(0, trimmed.find_first_not_of(" \t"));
    if (trimmed.empty()) continue;
    auto bad = [&](const std::string& what) {
      fail(ErrCode::parse, "dyadic dump line " + std::to_string(lineno) + ": " + what);
    };
    if (trimmed.rfind("delta", 0) == 0) {
      auto eq = trimmed.find('=');
      if (eq == std::string::npos) bad("expected 'delta = <value>'");
      try {
        delta = std::stod(trimmed.substr(eq + 1));
      } catch (const std::exception&) {
        bad("bad delta value");
      }
      continue;
    }
    if (trimmed.rfind("level", 0) != 0) bad("expected 'level k: id -> [points], center z'");
    // level K: ID -> [p p p], center Z
    int k = 0, id = 0, center = 0;
    std::vector<int> pts;
    {
      std::string rest = trimmed.substr(5);
      std::istringstream ss(rest);
      char colon;
      if (!(ss >> k >> colon) || colon != ':') bad("bad level header");
      std::string arrow;
      if (!(ss >> id >> arrow) || arrow != "->") bad("bad cube id");
      std::string tail;
      std::getline(ss, tail);
      auto lb = tail.find('['), rb = tail.find(']');
      if (lb == std::string::npos || rb == std::string::npos || rb < lb) bad("bad point list");
      std::istringstream ps(tail.substr(lb + 1, rb - lb - 1));
      int p;
      while (ps >> p) pts.push_back(p);
      auto cpos = tail.find("center", rb);
      if (cpos == std::string::npos) bad("missing center");
      try {
        center = std::stoi(tail.substr(cpos + 6));
      } catch (const std::exception&) {
        bad("bad center");
      }
    }
    DyadicCube q;
    q.level = k;
    q.index = id;
    q.center = center;
    std::sort(pts.begin(), pts.end());
    q.points = std::move(pts);
    by_level[k].push_back(std::move(q));
  }
  require(delta > 0.0 && delta < 1.0, ErrCode::parse, "dyadic dump: missing or bad delta");
  require(!by_level.empty(), ErrCode::parse, "dyadic dump: no cubes");
  int level_min = by_level.begin()->first;
  int level_max = by_level.rbegin()->first;
  std::vector<std::vector<DyadicCube>> levels;
  for (int k = level_min; k <= level_max; ++k) {
    auto it = by_level.find(k);
    require(it != by_level.end(), ErrCode::parse,
            "dyadic dump: missing level " + std::to_string(k));
    std::sort(it->second.begin(), it->second.end(),
              [](const DyadicCube& a, const DyadicCube& b) { return a.index < b.index; });
    levels.push_back(std::move(it->second));
  }
  // Recover parents from containment; verify_dyadic reports any breakage.
  DyadicSystem sys = from_levels(delta, level_min, std::move(levels));
  for (int k = level_min + 1; k <= level_max; ++k) {
    auto& lv = sys.levels_[sys.idx(k)];
    for (auto& q : lv)
      if (!q.points.empty()) q.parent = sys.cube_index_of(k - 1, q.points.front());
  }
  sys.measure_constants(space);
  return sys;
}

DyadicVerifyReport verify_dyadic(const DyadicSystem& sys, const Space& space, double c1_min,
                                 double C1_max) {
  DyadicVerifyReport rep;
  const int n = space.size();

  rep.partition_ok = true;
  for (int k = sys.level_min(); k <= sys.level_max(); ++k) {
    std::vector<int> count(n, 0);
    for (const auto& q : sys.cubes(k))
      for (int p : q.points)
        if (p >= 0 && p < n) ++count[p];
    for (int p = 0; p < n; ++p)
      if (count[p] != 1) {
        rep.partition_ok = false;
        rep.failures.push_back("level " + std::to_string(k) + ": point " + std::to_string(p) +
                               " covered " + std::to_string(count[p]) + " times");
      }
  }

  rep.nesting_ok = true;
  for (int k = sys.level_min() + 1; k <= sys.level_max(); ++k) {
    for (const auto& q : sys.cubes(k)) {
      if (q.points.empty()) continue;
      int host = sys.cube_index_of(k - 1, q.points.front());
      for (int p : q.points)
        if (sys.cube_index_of(k - 1, p) != host) {
          rep.nesting_ok = false;
          rep.failures.push_back("level " + std::to_string(k) + " cube " +
                                 std::to_string(q.index) + " straddles level " +
                                 std::to_string(k - 1) + " cubes");
          break;
        }
    }
  }

  rep.positive_measure_ok = true;
  for (int k = sys.level_min(); k <= sys.level_max(); ++k)
    for (const auto& q : sys.cubes(k)) {
      double m = 0.0;
      for (int p : q.points) m += space.mu(p);
      if (!(m > 0.0)) {
        rep.positive_measure_ok = false;
        rep.failures.push_back("level " + std::to_string(k) + " cube " +
                               std::to_string(q.index) + " has measure 0");
      }
    }

  DyadicSystem measured = sys;
  measured.measure_constants(space);
  rep.achieved_c1 = measured.achieved_c1();
  rep.achieved_C1 = measured.achieved_C1();

  rep.pass = rep.partition_ok && rep.nesting_ok && rep.positive_measure_ok &&
             rep.achieved_c1 >= c1_min && rep.achieved_C1 <= C1_max;
  if (rep.achieved_c1 < c1_min)
    rep.failures.push_back("achieved c1 below threshold");
  if (rep.achieved_C1 > C1_max)
    rep.failures.push_back("achieved C1 above threshold");
  return rep;
}

int k_of_r(double r, double delta) {
  require(r > 0.0, ErrCode::invalid_argument, "k_of_r: r must be > 0");
  require(delta > 0.0 && delta < 1.0, ErrCode::invalid_argument,
          "k_of_r: delta must lie in (0,1)");
  int k = static_cast<int>(std::floor(std::log(r / 4.0) / std::log(delta)));
  // guard the float estimate, then move to the smallest k with delta^k < r/4
  while (std::pow(delta, k) < r / 4.0) --k;
  while (std::pow(delta, k) >= r / 4.0) ++k;
  return k;
}

VectorField conditional_expectation(const DyadicSystem& sys, int k, const Space& space,
                                    const VectorField& f) {
  require(sys.has_level(k), ErrCode::invalid_argument,
          "conditional_expectation: level not in system");
  VectorField out(f.rows(), f.cols());
  for (const auto& q : sys.cubes(k)) {
    CVec avg = CVec::Zero(f.cols());
    double mass = 0.0;
    for (int p : q.points) {
      avg += space.mu(p) * f.row(p).transpose();
      mass += space.mu(p);
    }
    avg /= mass;
    for (int p : q.points) out.row(p) = avg.transpose();
  }
  return out;
}

RealField conditional_expectation_q(const DyadicSystem& sys, int k, double q,
                                    const Space& space, const VectorField& f) {
  require(sys.has_level(k), ErrCode::invalid_argument,
          "conditional_expectation_q: level not in system");
  require(q >= 1.0, ErrCode::invalid_argument, "conditional_expectation_q: q must be >= 1");
  RealField out(f.rows(), f.cols());
  for (const auto& cube : sys.cubes(k)) {
    Vec avg = Vec::Zero(f.cols());
    double mass = 0.0;
    for (int p : cube.points) {
      avg += space.mu(p) * f.row(p).cwiseAbs().array().pow(q).matrix().transpose();
      mass += space.mu(p);
    }
    avg = (avg / mass).array().pow(1.0 / q).matrix();
    for (int p : cube.points) out.row(p) = avg.transpose();
  }
  return out;
}

RealField dyadic_maximal(const DyadicSystem& sys, const Space& space, const VectorField& f) {
  RealField out = RealField::Zero(f.rows(), f.cols());
  for (int k = sys.level_min(); k <= sys.level_max(); ++k) {
    VectorField ek = conditional_expectation(sys, k, space, f);
    out = out.cwiseMax(ek.cwiseAbs());
  }
  return out;
}

AdjacentFamily AdjacentFamily::build(const Space& space, double delta, int m_systems,
                                     std::uint64_t seed) {
  require(m_systems >= 1, ErrCode::invalid_argument, "need at least one system");
  std::vector<DyadicSystem> systems;
  systems.reserve(m_systems);
  for (int m = 0; m < m_systems; ++m)
    systems.push_back(DyadicSystem::build(space, delta, Rng::derive(seed, 1000 + m)));
  return scan(space, std::move(systems));
}

AdjacentFamily AdjacentFamily::scan(const Space& space, std::vector<DyadicSystem> systems) {
  AdjacentFamily fam;
  fam.systems = std::move(systems);
  double worst = 1.0;
  bool any_uncovered = false;
  for (int x = 0; x < space.size(); ++x) {
    std::vector<double> radii = space.dists_from(x);
    std::sort(radii.begin(), radii.end());
    radii.erase(std::unique(radii.begin(), radii.end()), radii.end());
    for (double r : radii) {
      if (r <= 0.0) continue;
      std::vector<int> b = space.ball(x, r);
      double mu_b = 0.0;
      for (int p : b) mu_b += space.mu(p);
      double best = std::numeric_limits<double>::infinity();
      for (const auto& sys : fam.systems) {
        // walk the chain of cubes containing x, finest first; the first cube
        // containing the ball is the cheapest in this system
        for (int k = sys.level_max(); k >= sys.level_min(); --k) {
          if (sys.cube_index_of(k, x) < 0) continue;
          const DyadicCube& q = sys.cube_of(k, x);
          if (std::includes(q.points.begin(), q.points.end(), b.begin(), b.end())) {
            double mu_q = 0.0;
            for (int p : q.points) mu_q += space.mu(p);
            best = std::min(best, mu_q / mu_b);
            break;
          }
        }
      }
      if (!std::isfinite(best)) {
        any_uncovered = true;
        fam.uncovered.emplace_back(x, r);
      } else {
        worst = std::max(worst, best);
      }
    }
  }
  fam.achieved_K = any_uncovered ? std::numeric_limits<double>::infinity() : worst;
  return fam;
}

}  // namespace smlab
