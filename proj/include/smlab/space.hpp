#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "smlab/common.hpp"

namespace smlab {

/// Best doubling constant and fitted homogeneous dimension of a finite
/// metric measure space.
struct DoublingProfile {
  double C_D = 1.0;     ///< best constant in V(x,2r) <= C_D * V(x,r)
  double d = 0.0;       ///< least-squares homogeneous dimension
  double C_d = 1.0;     ///< tightened companion constant in V(x,lr) <= C_d l^d V(x,r)
  double d_min16 = 0.0; ///< minimal d for which the companion constant stays <= 16
  double C_cmp = 1.0;   ///< volume comparability constant (dist(x,y) <= r case)
};

/// Finite metric measure space of homogeneous type: point set with a distance
/// matrix and positive weights. Balls are closed. Immutable after
/// construction; all queries are pure and thread-safe.
class Space {
public:
  /// Validates symmetry, zero diagonal, the triangle inequality (tolerance
  /// 1e-12), distinct points and positive weights.
  static Space from_matrices(Mat dist, Vec mu);

  static Space cycle(int n);
  static Space path(int n);
  /// side^dims points with the l^1 graph metric on the discrete torus.
  static Space torus(int side, int dims);
  /// Euclidean point cloud; one row per point.
  static Space cloud(const Mat& points);
  static Space random_cloud(int n, int dim, std::uint64_t seed);

  int size() const { return n_; }
  double dist(int x, int y) const { return dist_(x, y); }
  double mu(int x) const { return mu_(x); }
  const Mat& dist_matrix() const { return dist_; }
  const Vec& weights() const { return mu_; }
  double total_mass() const { return total_mass_; }
  double diameter() const { return diameter_; }
  /// Smallest positive distance; +inf on a single point.
  double min_positive_dist() const { return min_pos_dist_; }

  /// Closed ball {y : dist(x,y) <= r}, ascending point indices.
  std::vector<int> ball(int x, double r) const;
  /// V(x,r), the measure of the closed ball.
  double volume(int x, double r) const;
  /// Disjoint annuli: k=0 gives B(x,r); k>=1 gives B(x,(k+1)r) \ B(x,kr).
  std::vector<int> annulus(int x, double r, int k) const;

  /// Distinct positive distances, ascending. Every ball B(x,r), r>0, equals a
  /// ball at one of these radii.
  const std::vector<double>& realized_radii() const { return realized_radii_; }
  /// Radii where r -> V(x,r) or r -> V(x,2r) can jump: realized values, their
  /// midpoints and their halves. Scanning these makes sup_{r>0} exact.
  std::vector<double> doubling_scan_radii() const;

  DoublingProfile doubling_profile() const;
  /// Smallest C with V(x,r)/C <= V(y,r) <= C V(x,r) whenever dist(x,y) <= r.
  double volume_comparability() const;

  /// Point indices sorted by distance from x (ties by index).
  const std::vector<int>& order_from(int x) const { return order_[x]; }
  /// Distances matching order_from(x).
  const std::vector<double>& dists_from(int x) const { return sorted_dists_[x]; }

  void save(std::ostream& os) const;
  static Space load(std::istream& is);
  void save_file(const std::string& path) const;
  static Space load_file(const std::string& path);

private:
  Space() = default;
  void finalize();

  int n_ = 0;
  Mat dist_;
  Vec mu_;
  double total_mass_ = 0.0;
  double diameter_ = 0.0;
  double min_pos_dist_ = 0.0;
  std::vector<double> realized_radii_;
  std::vector<std::vector<int>> order_;
  std::vector<std::vector<double>> sorted_dists_;
};

}  // namespace smlab
