#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gsmtl/datagen.hpp"
#include "gsmtl/solver.hpp"
#include "gsmtl/types.hpp"

namespace gsmtl {

enum class MethodKind { STL, MTL_FEAT, GO_MTL, GS_MTL };

const char* to_string(MethodKind kind);
MethodKind method_kind_from_string(const std::string& name);

/// A method is a group-structure specialization of the shared objective:
/// GO-MTL uses singleton groups (l1 rows), MTL-FEAT one all-tasks group
/// (2,1 rows), GS-MTL the supplied groups; STL fits tasks independently.
struct MethodSpec {
    MethodKind kind = MethodKind::GS_MTL;
    std::optional<GroupStructure> groups;  // required for GS_MTL, ignored otherwise

    GroupStructure derive_groups(int task_count) const;
};

struct MethodFit {
    Eigen::MatrixXd W;  // d x T per-task weight columns
    std::optional<LatentModel> model;
    std::optional<FitReport> report;
};

MethodFit fit_method(const MethodSpec& spec, const MultiTaskDataset& data,
                     const SolverConfig& config);

/// Pooled test error across all samples of all tasks: RMSE for regression,
/// mean 0/1 error for classification (sign(0) counts as +1).
double evaluate(const Eigen::MatrixXd& W, const MultiTaskDataset& split, ProblemKind kind);

struct GridSearchSpec {
    std::vector<double> mu_grid;      // ascending
    std::vector<double> lambda_grid;  // ascending
    std::vector<int> k_grid;          // ascending

    /// Powers of 10 from 1e-5 to 1e1 for mu and lambda; k in {2, ceil(T/3), ceil(T/2)}.
    static GridSearchSpec defaults(int task_count);
};

struct GridCell {
    double mu = 0.0;
    double lambda = 0.0;
    int k = 1;
    double val_error = 0.0;
    bool failed = false;
    std::string note;
};

struct GridSearchResult {
    HyperParams best;
    double val_error = 0.0;
    double test_error = 0.0;
    std::vector<GridCell> cells;  // in evaluation order (mu, then lambda, then k ascending)
    std::optional<FitReport> refit_report;
};

/// Splits the data 60/20/20 with the given seed, fits every grid cell on
/// train, selects by validation error (ties: smallest mu, then lambda, then
/// k), refits on train, and reports the test error. Failed cells score +inf.
GridSearchResult grid_search(const MethodSpec& spec, const MultiTaskDataset& data,
                             const GroupStructure& groups, const GridSearchSpec& grid,
                             std::uint64_t seed, const SolverConfig& base);

struct BenchmarkInput {
    std::string name;
    MultiTaskDataset data;
    GroupStructure groups;
};

struct BenchmarkCell {
    double mean_error = 0.0;
    double std_error = 0.0;  // sample standard deviation over seeds
    std::vector<double> per_seed_error;
    std::vector<HyperParams> chosen;
};

struct BenchmarkTable {
    std::vector<std::string> dataset_names;
    std::vector<MethodKind> methods;
    std::vector<std::vector<BenchmarkCell>> cells;  // [method][dataset]
    std::vector<std::uint64_t> seeds;
    std::vector<std::string> notes;

    std::string to_text_table() const;
    std::string to_json_string() const;
};

BenchmarkTable run_benchmark(const std::vector<BenchmarkInput>& datasets,
                             const std::vector<MethodKind>& methods, const GridSearchSpec& grid,
                             const std::vector<std::uint64_t>& seeds, const SolverConfig& base);

/// Mean Jaccard similarity of binarized S-column supports (threshold
/// 1e-6 * max|S|) for task pairs within the same group vs across groups.
/// Groups must be disjoint; an all-zero S is an error.
std::pair<double, double> support_similarity(const Eigen::MatrixXd& S,
                                             const GroupStructure& groups);

}  // namespace gsmtl
