#ifndef SGLOC_REGISTRATION_HPP
#define SGLOC_REGISTRATION_HPP

#include <span>
#include <vector>

#include "sgloc/pose.hpp"

namespace sgloc {

struct GncParams {
  double truncation = 1.0;  // c-bar, m
  double mu_factor = 1.4;
  int max_iterations = 100;
  double cost_tolerance = 1e-6;
  double degeneracy_threshold = 0.1;  // m, on the second singular value
};

enum class GncStop { CostConverged, WeightsBinary, MaxIterations, TooFewInliers };

struct RegistrationResult {
  Posed pose;      // re-solved over the binary inliers
  Posed gnc_pose;  // last GNC iterate
  std::vector<double> weights;
  std::size_t inlier_count = 0;
  bool converged = false;
  bool degenerate = false;
  int iterations = 0;
  GncStop stop = GncStop::MaxIterations;
  /// sum_i min(r_i, c-bar) at the accepted pose after each outer iteration.
  std::vector<double> truncated_costs;
};

/// Pose minimizing sum_i w_i |map_i - R query_i - t|^2 with det R = +1.
/// Throws Error with fewer than 3 positively weighted pairs.
Posed weightedProcrustes(std::span<const Vec3d> query, std::span<const Vec3d> map,
                         std::span<const double> weights);

Posed procrustes(std::span<const Vec3d> query, std::span<const Vec3d> map);

/// Graduated non-convexity over the truncated least squares objective.
RegistrationResult gncTlsRegister(std::span<const Vec3d> query, std::span<const Vec3d> map,
                                  const GncParams& params = {});

/// sum_i min(|map_i - R query_i - t|, c).
double truncatedCost(std::span<const Vec3d> query, std::span<const Vec3d> map, const Posed& pose,
                     double truncation);

/// True when the points are too close to a line for rotation to be observable:
/// second singular value of the centered 3xN matrix below `threshold`.
bool isDegenerate(std::span<const Vec3d> points, double threshold = 0.1);

}  // namespace sgloc

#endif  // SGLOC_REGISTRATION_HPP
