#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "smlab/common.hpp"
#include "smlab/space.hpp"

namespace smlab {

struct DyadicCube {
  int level = 0;
  int index = 0;             ///< index within its level
  int center = 0;            ///< point index z
  int parent = -1;           ///< cube index at the previous (coarser) level
  std::vector<int> points;   ///< ascending point indices
};

/// Nested level-indexed partitions of a space into cubes comparable to balls:
/// B(z, c1 d^k) subset Q subset B(z, C1 d^k) with measured (c1, C1).
class DyadicSystem {
public:
  /// Greedy seeded net construction. The top level is one cube = Omega; each
  /// finer level picks a d^k-net inside every parent cube (seeded order,
  /// centers pairwise further than d^k apart) and assigns each point to its
  /// nearest center, ties to the lowest point index. Stops at the first level
  /// with d^k < min positive distance / 2.
  static DyadicSystem build(const Space& space, double delta, std::uint64_t seed);

  /// Assembles a system from explicit per-level cube lists (top level first).
  /// No validity checks: verify_dyadic is the judge. Used for hand-built and
  /// parsed systems.
  static DyadicSystem from_levels(double delta, int level_min,
                                  std::vector<std::vector<DyadicCube>> levels);

  double delta() const { return delta_; }
  int level_min() const { return level_min_; }
  int level_max() const { return level_min_ + static_cast<int>(levels_.size()) - 1; }
  int level_count() const { return static_cast<int>(levels_.size()); }
  bool has_level(int k) const { return k >= level_min() && k <= level_max(); }

  const std::vector<DyadicCube>& cubes(int k) const { return levels_.at(idx(k)); }
  /// Cube index within level k containing point x (-1 if none).
  int cube_index_of(int k, int x) const {
    const auto& pc = point_cube_.at(idx(k));
    return (x >= 0 && x < static_cast<int>(pc.size())) ? pc[x] : -1;
  }
  const DyadicCube& cube_of(int k, int x) const;

  double achieved_c1() const { return achieved_c1_; }
  double achieved_C1() const { return achieved_C1_; }

  /// Text dump: "level k: id -> [points], center z" lines.
  void dump(std::ostream& os, const Space& space) const;
  static DyadicSystem parse(std::istream& is, const Space& space);

  /// Recomputes the measured containment constants against a space.
  void measure_constants(const Space& space);

private:
  int idx(int k) const { return k - level_min_; }
  void rebuild_point_index(int n_points);

  double delta_ = 0.5;
  int level_min_ = 0;
  std::vector<std::vector<DyadicCube>> levels_;
  std::vector<std::vector<int>> point_cube_;  ///< per level: point -> cube index
  double achieved_c1_ = 0.0;
  double achieved_C1_ = 0.0;
};

struct DyadicVerifyReport {
  bool partition_ok = false;
  bool nesting_ok = false;
  bool positive_measure_ok = false;
  double achieved_c1 = 0.0;
  double achieved_C1 = 0.0;
  bool pass = false;
  std::vector<std::string> failures;
};

/// Checks partition, nesting and positive measure exactly; measures (c1, C1)
/// and compares them against the thresholds. Failures are report entries, not
/// errors.
DyadicVerifyReport verify_dyadic(const DyadicSystem& sys, const Space& space,
                                 double c1_min = 0.0,
                                 double C1_max = std::numeric_limits<double>::infinity());

/// Smallest integer k with delta^k < r/4; satisfies delta*r <= 4 delta^k < r.
int k_of_r(double r, double delta);

/// E_k f(x,.) = average of f over the level-k cube containing x.
VectorField conditional_expectation(const DyadicSystem& sys, int k, const Space& space,
                                    const VectorField& f);

/// L^q version: E_{q,k} f(x,.) = (average of |f|^q over the cube)^{1/q}.
RealField conditional_expectation_q(const DyadicSystem& sys, int k, double q,
                                    const Space& space, const VectorField& f);

/// M_F f = sup over levels of |E_k f|, pointwise.
RealField dyadic_maximal(const DyadicSystem& sys, const Space& space, const VectorField& f);

/// A finite collection of dyadic systems such that every realized ball has a
/// covering cube of comparable measure in one of them.
struct AdjacentFamily {
  std::vector<DyadicSystem> systems;
  double achieved_K = std::numeric_limits<double>::infinity();
  std::vector<std::pair<int, double>> uncovered;  ///< (x, r) with no covering cube

  bool covered() const { return uncovered.empty(); }

  static AdjacentFamily build(const Space& space, double delta, int m_systems,
                              std::uint64_t seed);
  /// Scans every (x, realized r) against caller-provided systems.
  static AdjacentFamily scan(const Space& space, std::vector<DyadicSystem> systems);
};

}  // namespace smlab
