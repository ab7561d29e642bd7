#pragma once

#include <Eigen/Core>

#include <string>
#include <vector>

#include "gsmtl/errors.hpp"

namespace gsmtl {

enum class ProblemKind { Regression, BinaryClassification };

const char* to_string(ProblemKind kind);
ProblemKind problem_kind_from_string(const std::string& name);

/// One supervised task: a design matrix (n_t x d) and its label vector (n_t).
struct Task {
    Eigen::MatrixXd X;
    Eigen::VectorXd y;
};

/// T tasks over a shared feature space. Construction validates that every
/// task has the same feature count, at least one sample, and (for binary
/// classification) labels in {-1, +1}.
class MultiTaskDataset {
public:
    MultiTaskDataset(std::vector<Task> tasks, ProblemKind kind);

    int task_count() const { return static_cast<int>(tasks_.size()); }
    Eigen::Index dim() const { return d_; }
    ProblemKind kind() const { return kind_; }
    const Task& task(int t) const { return tasks_.at(static_cast<std::size_t>(t)); }
    const std::vector<Task>& tasks() const { return tasks_; }
    Eigen::Index total_samples() const;

private:
    std::vector<Task> tasks_;
    Eigen::Index d_ = 0;
    ProblemKind kind_ = ProblemKind::Regression;
};

/// A set of g groups of task indices (0-based internally; file formats are
/// 1-based). Groups must be non-empty, in range, and jointly cover all
/// tasks; overlaps are allowed and detected at construction.
class GroupStructure {
public:
    GroupStructure(std::vector<std::vector<int>> groups, int task_count);

    static GroupStructure singletons(int task_count);
    static GroupStructure single_group(int task_count);

    int group_count() const { return static_cast<int>(groups_.size()); }
    int task_count() const { return task_count_; }
    const std::vector<int>& group(int j) const { return groups_.at(static_cast<std::size_t>(j)); }
    const std::vector<std::vector<int>>& groups() const { return groups_; }
    bool overlapping() const { return overlapping_; }

    /// Number of groups containing each index; >= 1 everywhere by the cover invariant.
    std::vector<int> multiplicity() const;

private:
    std::vector<std::vector<int>> groups_;
    int task_count_ = 0;
    bool overlapping_ = false;
};

/// Factored per-task weights: w^t = L * S.col(t).
struct LatentModel {
    Eigen::MatrixXd L;  // d x k
    Eigen::MatrixXd S;  // k x T

    Eigen::Index dim() const { return L.rows(); }
    Eigen::Index latent_count() const { return L.cols(); }
    Eigen::Index task_count() const { return S.cols(); }

    Eigen::VectorXd task_weights(int t) const { return L * S.col(t); }
    Eigen::MatrixXd weights() const { return L * S; }

    /// Throws on non-finite entries, k < 1, k > T, or L/S inner-dimension
    /// mismatch. k == T is legal but unusual; callers may surface a warning.
    void validate() const;
};

struct HyperParams {
    double mu = 0.0;      // weight on the row group norm of S
    double lambda = 0.0;  // weight on the squared Frobenius norm of L
    int k = 1;            // latent dimension
    double outer_tol = 1e-4;
    int outer_max_iter = 100;
    double inner_tol = 1e-8;
    int inner_max_iter = 1000;

    void validate() const;
};

struct FitReport {
    std::vector<double> objective_trace;  // one entry per outer iteration, including initial
    bool converged = false;
    int outer_iterations = 0;
    double wall_seconds = 0.0;
    std::vector<double> per_task_train_error;  // RMSE or 0/1 error depending on kind
    std::vector<std::string> notes;
};

}  // namespace gsmtl
