#pragma once

#include <cstdint>
#include <utility>

#include "gsmtl/types.hpp"

namespace gsmtl {

struct StepControls {
    double backtracking_factor = 0.5;  // step shrink under the quadratic upper-bound test
    double initial_step = 1.0;
};

enum class LStepMethod {
    Auto,               // direct when d*k <= 2000, else conjugate gradient
    Direct,             // dense normal equations in vec(L)
    ConjugateGradient,  // matrix-free CG in matrix space
};

struct LStepControls {
    LStepMethod method = LStepMethod::Auto;
    double cg_tol = 1e-10;
    int cg_max_iter = 10000;
};

enum class Acceleration { None, Momentum };

struct SolverConfig {
    HyperParams hp;
    StepControls s_step;
    LStepControls l_step;
    Acceleration acceleration = Acceleration::None;
    std::uint64_t seed = 0;

    // tolerances for the prox projections and the group-norm evaluations
    // used in objective bookkeeping
    double projection_tol = 1e-10;
    int projection_max_sweeps = 20000;
    double norm_eval_tol = 1e-12;
    int norm_eval_max_iter = 200000;
};

/// Independent per-task fits: ridge (closed form) for regression,
/// l2-regularized logistic regression by gradient descent for
/// classification. Returns the stacked d x T weight matrix.
Eigen::MatrixXd stl_weights(const MultiTaskDataset& data, double reg, double tol = 1e-8,
                            int max_iter = 1000);

/// Initialization: fit each task independently (regularization 1e-3), stack
/// the weights into W, and take the top-k SVD W ~ U_k Sigma_k V_k'. Returns
/// L = U_k and S = Sigma_k V_k', so L*S is the best rank-k approximation of
/// W. Columns of U are sign-canonicalized so the result is invariant to task
/// permutation.
LatentModel init_L(const MultiTaskDataset& data, const HyperParams& hp);

/// Proximal-gradient minimization of the data loss plus mu * sum of row
/// group norms, with L fixed. Backtracking line search from
/// s_step.initial_step; each row of the gradient step is shrunk by the
/// group-norm prox with weight mu*step. The objective with fixed L never
/// increases across the call.
Eigen::MatrixXd solve_S_step(const Eigen::MatrixXd& L, const Eigen::MatrixXd& S_init,
                             const MultiTaskDataset& data, const GroupStructure& groups,
                             const SolverConfig& config);

/// Minimizes data loss + lambda * ||L||_F^2 with S fixed. Regression solves
/// the normal equations in vec(L) (direct or CG); classification runs
/// backtracking gradient descent to hp.inner_tol on the gradient norm.
Eigen::MatrixXd solve_L_step(const Eigen::MatrixXd& L_init, const Eigen::MatrixXd& S,
                             const MultiTaskDataset& data, const SolverConfig& config);

/// Alternating minimization: init_L, then S-step / L-step rounds until
/// max(relative change of L, of S) <= hp.outer_tol or the iteration cap.
/// Records the objective after every round; throws InvariantError if the
/// trace ever increases beyond 1e-9 relative.
std::pair<LatentModel, FitReport> fit(const MultiTaskDataset& data, const GroupStructure& groups,
                                      const SolverConfig& config);

}  // namespace gsmtl
