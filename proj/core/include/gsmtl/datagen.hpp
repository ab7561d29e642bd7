#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "gsmtl/types.hpp"

namespace gsmtl {

/// Configuration for the group-structured synthetic regression generator.
/// Features are drawn around uniformly sampled per-group cluster centers;
/// labels come from a planted model y = (L* S*[:,t])' x + noise whose S* rows
/// are each supported on a single task group.
struct Synthetic1Config {
    int m = 20;           // feature count
    int g = 3;            // group count (feature clusters and task groups)
    int T = 10;           // tasks
    int n_per_task = 20;  // samples per task
    double sigma = 0.1;       // feature noise std around the cluster center
    double label_noise = 0.1; // std of additive label noise
    int k_true = 3;           // planted latent dimension
    std::uint64_t seed = 0;
};

struct Synthetic1Output {
    MultiTaskDataset data;
    GroupStructure task_groups;  // the planted partition of tasks
    LatentModel truth;           // ground-truth L*, S*
};

Synthetic1Output gen_synthetic1(const Synthetic1Config& cfg);

struct TwoGroupOutput {
    MultiTaskDataset data;
    GroupStructure groups;
};

/// Binary classification surrogate with two disjoint task groups of sizes
/// ceil(T/2) and floor(T/2). Each group shares one unit weight vector (the
/// second orthogonal to the first); labels are sign(margin * w'x + noise)
/// with standard normal features and noise.
TwoGroupOutput gen_two_group_classification(int T, int d, int n_per_task, double margin,
                                            std::uint64_t seed);

struct CsvSchema {
    ProblemKind kind = ProblemKind::Regression;
};

/// Reads a dataset CSV with header `task_id,y,x1,...,xd`. Task ids must be
/// positive integers; distinct ids are remapped, in sorted order, to tasks
/// 1..T. Errors (ragged rows, non-numeric fields, bad labels) carry the
/// 1-based line number.
MultiTaskDataset load_csv(const std::filesystem::path& path, const CsvSchema& schema);

/// Inverse of load_csv for contiguous task ids: writes `task_id,y,x1,...,xd`
/// with 1-based ids and round-trip-exact doubles.
std::string dataset_to_csv(const MultiTaskDataset& data);
void export_csv(const MultiTaskDataset& data, const std::filesystem::path& path);

/// Groups file: one group per line, comma-separated 1-based task ids; `#`
/// starts a comment; blank lines are ignored.
GroupStructure load_groups(const std::filesystem::path& path, int task_count);
std::string groups_to_text(const GroupStructure& groups);
void export_groups(const GroupStructure& groups, const std::filesystem::path& path);

struct KMeansConfig {
    int g = 2;
    int max_iter = 100;
    int restarts = 10;
    std::uint64_t seed = 0;
};

/// Groups tasks by K-means over their mean feature vectors: D^2-weighted
/// seeding, Lloyd iterations, best of `restarts` runs by within-cluster
/// sum of squares. Always returns a disjoint cover of the tasks.
GroupStructure kmeans_groups(const MultiTaskDataset& data, const KMeansConfig& cfg);

struct SplitRatios {
    double train = 0.6;
    double val = 0.2;
    double test = 0.2;
};

struct DatasetSplit {
    MultiTaskDataset train;
    MultiTaskDataset val;
    MultiTaskDataset test;
};

/// Per-task shuffled split: train gets floor(train*n_t), val floor(val*n_t),
/// test the remainder. Every task needs at least 5 samples.
DatasetSplit split_dataset(const MultiTaskDataset& data, const SplitRatios& ratios,
                           std::uint64_t seed);

}  // namespace gsmtl
