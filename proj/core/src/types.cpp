#include "gsmtl/types.hpp"

#include <algorithm>
#include <numeric>
#include <set>

namespace gsmtl {

const char* to_string(ProblemKind kind) {
    return kind == ProblemKind::Regression ? "regression" : "classification";
}

ProblemKind problem_kind_from_string(const std::string& name) {
    if (name == "regression") return ProblemKind::Regression;
    if (name == "classification" || name == "binary-classification")
        return ProblemKind::BinaryClassification;
    throw ConfigError("unknown problem kind '" + name + "' (expected regression or classification)");
}

MultiTaskDataset::MultiTaskDataset(std::vector<Task> tasks, ProblemKind kind)
    : tasks_(std::move(tasks)), kind_(kind) {
    if (tasks_.empty()) throw DataError("dataset must contain at least one task");
    d_ = tasks_.front().X.cols();
    if (d_ < 1) throw DataError("feature count must be at least 1");
    for (std::size_t t = 0; t < tasks_.size(); ++t) {
        const Task& task = tasks_[t];
        if (task.X.cols() != d_)
            throw DimensionError("task " + std::to_string(t) + " has " +
                                 std::to_string(task.X.cols()) + " features, expected d=" +
                                 std::to_string(d_));
        if (task.X.rows() < 1)
            throw DataError("task " + std::to_string(t) + " has no samples");
        if (task.y.size() != task.X.rows())
            throw DimensionError("task " + std::to_string(t) + " has " +
                                 std::to_string(task.y.size()) + " labels for " +
                                 std::to_string(task.X.rows()) + " samples");
        if (kind_ == ProblemKind::BinaryClassification) {
            for (Eigen::Index i = 0; i < task.y.size(); ++i) {
                const double v = task.y[i];
                if (v != 1.0 && v != -1.0)
                    throw DataError("task " + std::to_string(t) + " sample " + std::to_string(i) +
                                    ": classification label must be -1 or +1, got " +
                                    std::to_string(v));
            }
        }
    }
}

Eigen::Index MultiTaskDataset::total_samples() const {
    Eigen::Index n = 0;
    for (const Task& task : tasks_) n += task.X.rows();
    return n;
}

GroupStructure::GroupStructure(std::vector<std::vector<int>> groups, int task_count)
    : groups_(std::move(groups)), task_count_(task_count) {
    if (task_count_ < 1) throw ConfigError("group structure needs at least one task");
    if (groups_.empty()) throw ConfigError("group structure needs at least one group");
    std::vector<int> seen(static_cast<std::size_t>(task_count_), 0);
    for (std::size_t j = 0; j < groups_.size(); ++j) {
        auto& g = groups_[j];
        if (g.empty()) throw ConfigError("group " + std::to_string(j) + " is empty");
        std::sort(g.begin(), g.end());
        g.erase(std::unique(g.begin(), g.end()), g.end());
        for (int idx : g) {
            if (idx < 0 || idx >= task_count_)
                throw ConfigError("group " + std::to_string(j) + " contains index " +
                                  std::to_string(idx) + " outside [0, " +
                                  std::to_string(task_count_) + ")");
            ++seen[static_cast<std::size_t>(idx)];
        }
    }
    for (int t = 0; t < task_count_; ++t) {
        if (seen[static_cast<std::size_t>(t)] == 0)
            throw ConfigError("groups do not cover task " + std::to_string(t));
        if (seen[static_cast<std::size_t>(t)] > 1) overlapping_ = true;
    }
}

GroupStructure GroupStructure::singletons(int task_count) {
    std::vector<std::vector<int>> groups;
    groups.reserve(static_cast<std::size_t>(task_count));
    for (int t = 0; t < task_count; ++t) groups.push_back({t});
    return GroupStructure(std::move(groups), task_count);
}

GroupStructure GroupStructure::single_group(int task_count) {
    std::vector<int> all(static_cast<std::size_t>(task_count));
    std::iota(all.begin(), all.end(), 0);
    return GroupStructure({std::move(all)}, task_count);
}

std::vector<int> GroupStructure::multiplicity() const {
    std::vector<int> count(static_cast<std::size_t>(task_count_), 0);
    for (const auto& g : groups_)
        for (int idx : g) ++count[static_cast<std::size_t>(idx)];
    return count;
}

void LatentModel::validate() const {
    if (L.cols() != S.rows())
        throw DimensionError("L has " + std::to_string(L.cols()) + " columns but S has " +
                             std::to_string(S.rows()) + " rows");
    if (latent_count() < 1) throw ConfigError("latent dimension k must be at least 1");
    if (latent_count() > task_count())
        throw ConfigError("latent dimension k=" + std::to_string(latent_count()) +
                          " exceeds task count T=" + std::to_string(task_count()));
    if (!L.allFinite()) throw DataError("L contains non-finite entries");
    if (!S.allFinite()) throw DataError("S contains non-finite entries");
}

void HyperParams::validate() const {
    if (mu < 0.0) throw ConfigError("mu must be nonnegative");
    if (lambda < 0.0) throw ConfigError("lambda must be nonnegative");
    if (k < 1) throw ConfigError("k must be a positive integer");
    if (!(outer_tol > 0.0)) throw ConfigError("outer_tol must be positive");
    if (!(inner_tol > 0.0)) throw ConfigError("inner_tol must be positive");
    if (outer_max_iter < 1) throw ConfigError("outer_max_iter must be at least 1");
    if (inner_max_iter < 1) throw ConfigError("inner_max_iter must be at least 1");
}

}  // namespace gsmtl
