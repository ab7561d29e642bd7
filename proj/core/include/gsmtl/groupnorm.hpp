#pragma once

#include <Eigen/Core>

#include <utility>
#include <vector>

#include "gsmtl/types.hpp"

namespace gsmtl {

/// Scaled intersection of per-group Euclidean balls:
///   x in t*B  <=>  ||x_G||_2 <= t for every group G.
/// This is the dual-norm ball of the latent group norm.
struct GroupBallSpec {
    GroupStructure groups;
    double radius = 1.0;  // t > 0
};

/// A decomposition x = sum_G w_G with each w_G supported on its group.
/// `parts` stores full-length vectors (zero outside the group); `value` is
/// sum_G ||w_G||_2, an upper bound on the group norm that is tight at the
/// returned tolerance.
struct GroupNormDecomposition {
    std::vector<Eigen::VectorXd> parts;
    double value = 0.0;
};

/// Thrown when the overlapping group-norm solve exhausts its iteration cap.
/// Carries the best (feasible) value found and the residual duality gap.
class GroupNormConvergenceError : public ConvergenceError {
public:
    GroupNormConvergenceError(const std::string& msg, double best_value, double gap)
        : ConvergenceError(msg), best_value(best_value), gap(gap) {}
    double best_value;
    double gap;
};

/// Thrown when the cyclic projection exhausts max_sweeps. Carries the last
/// iterate and the last sweep's max coordinate change.
class ProjectionConvergenceError : public ConvergenceError {
public:
    ProjectionConvergenceError(const std::string& msg, Eigen::VectorXd last_iterate,
                               double residual)
        : ConvergenceError(msg), last_iterate(std::move(last_iterate)), residual(residual) {}
    Eigen::VectorXd last_iterate;
    double residual;
};

/// Latent group norm: the minimum of sum_G ||w_G||_2 over decompositions
/// x = sum_G w_G with w_G supported on G.
///
/// Disjoint groups have the exact closed form sum_G ||x_G||_2. Overlapping
/// groups are solved by an exact-penalty splitting (ADMM) on the
/// decomposition variables: alternate a closed-form projection onto the
/// reconstruction constraint with a per-group block soft-threshold. The
/// returned parts always reconstruct x exactly; iteration stops once the
/// certified duality gap and the splitting residual fall below tol.
std::pair<double, GroupNormDecomposition> group_norm(const Eigen::VectorXd& x,
                                                     const GroupStructure& groups, double tol,
                                                     int max_iter = 200000);

/// Euclidean projection onto t*B for pairwise-disjoint groups: each block is
/// left alone inside its ball and rescaled to radius t outside.
Eigen::VectorXd project_disjoint(const Eigen::VectorXd& x, const GroupBallSpec& spec);

enum class IntersectionMethod {
    Dykstra,         // cyclic projections with correction terms; converges to the projection
    AveragedCyclic,  // averaged cyclic scheme z <- x/(j+1) + j/(j+1) * clamp(z); kept for comparison
};

/// Euclidean projection onto t*B, overlaps allowed. The default is Dykstra's
/// algorithm (plain cyclic projections reach a point of the intersection but
/// not the nearest one). Terminates when the largest per-projection change in
/// one full sweep is <= tol.
Eigen::VectorXd project_intersection(const Eigen::VectorXd& x, const GroupBallSpec& spec,
                                     double tol, int max_sweeps,
                                     IntersectionMethod method = IntersectionMethod::Dykstra);

/// Proximal operator of t * ||.||_G via the identity prox_tg(x) = x - proj_{tB}(x).
Eigen::VectorXd prox_group_norm(const Eigen::VectorXd& x, const GroupStructure& groups, double t,
                                double tol, int max_sweeps = 20000,
                                IntersectionMethod method = IntersectionMethod::Dykstra);

}  // namespace gsmtl
