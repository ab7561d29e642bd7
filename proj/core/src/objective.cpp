#include "gsmtl/objective.hpp"

#include <cmath>

#include "gsmtl/losses.hpp"

namespace gsmtl {

namespace {

void check_model_data(const LatentModel& model, const MultiTaskDataset& data) {
    if (model.dim() != data.dim())
        throw DimensionError("model expects d=" + std::to_string(model.dim()) +
                             " features but dataset has d=" + std::to_string(data.dim()));
    if (model.task_count() != data.task_count())
        throw DimensionError("model covers " + std::to_string(model.task_count()) +
                             " tasks but dataset has " + std::to_string(data.task_count()));
}

}  // namespace

double predict(const LatentModel& model, int task, const Eigen::VectorXd& x) {
    if (task < 0 || task >= model.task_count())
        throw DimensionError("task index " + std::to_string(task) + " outside [0, " +
                             std::to_string(model.task_count()) + ")");
    if (x.size() != model.dim())
        throw DimensionError("x has length " + std::to_string(x.size()) + ", expected d=" +
                             std::to_string(model.dim()));
    return model.S.col(task).dot(model.L.transpose() * x);
}

double objective(const LatentModel& model, const MultiTaskDataset& data,
                 const GroupStructure& groups, const HyperParams& hp, double norm_tol) {
    check_model_data(model, data);
    if (groups.task_count() != data.task_count())
        throw DimensionError("groups cover " + std::to_string(groups.task_count()) +
                             " tasks but dataset has " + std::to_string(data.task_count()));

    double total = 0.0;
    for (int t = 0; t < data.task_count(); ++t) {
        const Task& task = data.task(t);
        const Eigen::VectorXd z = task.X * (model.L * model.S.col(t));
        for (Eigen::Index i = 0; i < z.size(); ++i)
            total += loss_value(data.kind(), z[i], task.y[i]);
    }
    if (hp.mu > 0.0) {
        for (Eigen::Index r = 0; r < model.S.rows(); ++r) {
            const Eigen::VectorXd row = model.S.row(r).transpose();
            total += hp.mu * group_norm(row, groups, norm_tol).first;
        }
    }
    if (hp.lambda > 0.0) total += hp.lambda * model.L.squaredNorm();
    return total;
}

Eigen::MatrixXd grad_S(const LatentModel& model, const MultiTaskDataset& data) {
    check_model_data(model, data);
    const Eigen::Index k = model.latent_count();
    Eigen::MatrixXd grad(k, data.task_count());
    for (int t = 0; t < data.task_count(); ++t) {
        const Task& task = data.task(t);
        const Eigen::MatrixXd U = task.X * model.L;  // n_t x k
        const Eigen::VectorXd z = U * model.S.col(t);
        Eigen::VectorXd r(z.size());
        for (Eigen::Index i = 0; i < z.size(); ++i) {
            r[i] = loss_derivative(data.kind(), z[i], task.y[i]);
            if (!std::isfinite(r[i]))
                throw DataError("non-finite gradient contribution at task " + std::to_string(t) +
                                " sample " + std::to_string(i));
        }
        grad.col(t) = U.transpose() * r;
    }
    return grad;
}

Eigen::MatrixXd grad_L(const LatentModel& model, const MultiTaskDataset& data, double lambda) {
    check_model_data(model, data);
    Eigen::MatrixXd grad = 2.0 * lambda * model.L;
    for (int t = 0; t < data.task_count(); ++t) {
        const Task& task = data.task(t);
        const Eigen::VectorXd z = task.X * (model.L * model.S.col(t));
        Eigen::VectorXd r(z.size());
        for (Eigen::Index i = 0; i < z.size(); ++i) {
            r[i] = loss_derivative(data.kind(), z[i], task.y[i]);
            if (!std::isfinite(r[i]))
                throw DataError("non-finite gradient contribution at task " + std::to_string(t) +
                                " sample " + std::to_string(i));
        }
        grad.noalias() += (task.X.transpose() * r) * model.S.col(t).transpose();
    }
    return grad;
}

}  // namespace gsmtl
