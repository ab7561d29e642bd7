#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gsmtl/bench.hpp"
#include "gsmtl/datagen.hpp"
#include "gsmtl/types.hpp"

namespace gsmtl::cli {

/// Parsed run configuration. The file is flat `key = value` text grouped
/// into [sections]; `#` starts a comment. See the README for the schema.
struct RunConfig {
    enum class DatasetSource { Csv, Synthetic1, TwoGroup };
    enum class GroupsSource { File, KMeans, Singletons, AllTasks };

    DatasetSource dataset_source = DatasetSource::Synthetic1;
    std::filesystem::path csv_path;
    ProblemKind csv_kind = ProblemKind::Regression;
    Synthetic1Config synthetic1;
    struct TwoGroup {
        int tasks = 29;
        int d = 9;
        int n_per_task = 40;
        double margin = 10.0;
    } two_group;

    GroupsSource groups_source = GroupsSource::Singletons;
    std::filesystem::path groups_path;
    KMeansConfig kmeans;

    MethodKind method = MethodKind::GS_MTL;
    HyperParams hp;
    bool has_hyperparams = false;

    std::optional<GridSearchSpec> grid;  // empty entries fall back to defaults

    std::vector<MethodKind> bench_methods;
    std::vector<std::uint64_t> seeds;
    std::string dataset_name = "dataset";

    std::uint64_t seed = 0;
    std::filesystem::path out_dir = "out";
    bool verbose = false;

    std::filesystem::path smatrix_path;
    std::filesystem::path smatrix_groups_path;
};

RunConfig parse_run_config(const std::filesystem::path& path);

struct ResolvedDataset {
    MultiTaskDataset data;
    std::optional<GroupStructure> planted;  // generator-provided groups, if any
};

ResolvedDataset resolve_dataset(const RunConfig& cfg);
GroupStructure resolve_groups(const RunConfig& cfg, const MultiTaskDataset& data);

}  // namespace gsmtl::cli
