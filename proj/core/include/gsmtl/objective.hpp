#pragma once

#include "gsmtl/groupnorm.hpp"
#include "gsmtl/types.hpp"

namespace gsmtl {

/// Linear prediction for one task: (S.col(task))' L' x. For classification
/// the sign is the class decision and sigmoid() of the score its probability.
/// `task` is a 0-based task index.
double predict(const LatentModel& model, int task, const Eigen::VectorXd& x);

/// Full objective: data loss + mu * sum of row group norms of S + lambda * ||L||_F^2.
/// The row group norms use the closed form for disjoint groups and the
/// certified decomposition solve otherwise (accuracy norm_tol, relative).
double objective(const LatentModel& model, const MultiTaskDataset& data,
                 const GroupStructure& groups, const HyperParams& hp, double norm_tol = 1e-12);

/// Gradient of the data-loss term with respect to S (k x T). The group-norm
/// penalty is handled by the prox, not here. Column t depends only on task
/// t's data.
Eigen::MatrixXd grad_S(const LatentModel& model, const MultiTaskDataset& data);

/// Gradient with respect to L of data loss + lambda * ||L||_F^2 (d x k).
Eigen::MatrixXd grad_L(const LatentModel& model, const MultiTaskDataset& data, double lambda);

}  // namespace gsmtl
