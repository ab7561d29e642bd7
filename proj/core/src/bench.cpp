#include "gsmtl/bench.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include <json.hpp>

namespace gsmtl {

const char* to_string(MethodKind kind) {
    switch (kind) {
        case MethodKind::STL: return "stl";
        case MethodKind::MTL_FEAT: return "mtl-feat";
        case MethodKind::GO_MTL: return "go-mtl";
        case MethodKind::GS_MTL: return "gs-mtl";
    }
    return "?";
}

MethodKind method_kind_from_string(const std::string& name) {
    if (name == "stl") return MethodKind::STL;
    if (name == "mtl-feat") return MethodKind::MTL_FEAT;
    if (name == "go-mtl") return MethodKind::GO_MTL;
    if (name == "gs-mtl") return MethodKind::GS_MTL;
    throw ConfigError("unknown method '" + name +
                      "' (expected stl, mtl-feat, go-mtl, or gs-mtl)");
}

GroupStructure MethodSpec::derive_groups(int task_count) const {
    switch (kind) {
        case MethodKind::GO_MTL: return GroupStructure::singletons(task_count);
        case MethodKind::MTL_FEAT: return GroupStructure::single_group(task_count);
        case MethodKind::GS_MTL:
            if (!groups) throw ConfigError("gs-mtl requires an explicit group structure");
            return *groups;
        case MethodKind::STL:
            throw ConfigError("stl does not use a group structure");
    }
    throw ConfigError("unknown method kind");
}

MethodFit fit_method(const MethodSpec& spec, const MultiTaskDataset& data,
                     const SolverConfig& config) {
    if (spec.kind == MethodKind::STL) {
        MethodFit out;
        out.W = stl_weights(data, config.hp.lambda, config.hp.inner_tol,
                            config.hp.inner_max_iter);
        return out;
    }
    const GroupStructure groups = spec.derive_groups(data.task_count());
    auto [model, report] = fit(data, groups, config);
    MethodFit out;
    out.W = model.weights();
    out.model = std::move(model);
    out.report = std::move(report);
    return out;
}

double evaluate(const Eigen::MatrixXd& W, const MultiTaskDataset& split, ProblemKind kind) {
    if (W.cols() != split.task_count())
        throw DimensionError("predictor has " + std::to_string(W.cols()) +
                             " columns but split has " + std::to_string(split.task_count()) +
                             " tasks");
    if (W.rows() != split.dim())
        throw DimensionError("predictor expects d=" + std::to_string(W.rows()) +
                             " but split has d=" + std::to_string(split.dim()));
    const Eigen::Index n = split.total_samples();
    if (n == 0) throw DataError("cannot evaluate on an empty split");

    double acc = 0.0;
    for (int t = 0; t < split.task_count(); ++t) {
        const Task& task = split.task(t);
        const Eigen::VectorXd z = task.X * W.col(t);
        if (kind == ProblemKind::Regression) {
            acc += (z - task.y).squaredNorm();
        } else {
            for (Eigen::Index i = 0; i < z.size(); ++i) {
                const double s = z[i] >= 0.0 ? 1.0 : -1.0;  // sign(0) counts as +1
                if (s != task.y[i]) acc += 1.0;
            }
        }
    }
    const double mean = acc / static_cast<double>(n);
    return kind == ProblemKind::Regression ? std::sqrt(mean) : mean;
}

GridSearchSpec GridSearchSpec::defaults(int task_count) {
    GridSearchSpec spec;
    for (int e = -5; e <= 1; ++e) {
        spec.mu_grid.push_back(std::pow(10.0, e));
        spec.lambda_grid.push_back(std::pow(10.0, e));
    }
    std::vector<int> ks = {2, static_cast<int>(std::ceil(task_count / 3.0)),
                           static_cast<int>(std::ceil(task_count / 2.0))};
    std::sort(ks.begin(), ks.end());
    ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
    for (int k : ks) spec.k_grid.push_back(std::max(1, k));
    return spec;
}

GridSearchResult grid_search(const MethodSpec& spec, const MultiTaskDataset& data,
                             const GroupStructure& groups, const GridSearchSpec& grid,
                             std::uint64_t seed, const SolverConfig& base) {
    if (grid.mu_grid.empty() || grid.lambda_grid.empty() || grid.k_grid.empty())
        throw ConfigError("grid_search requires non-empty grids");

    MethodSpec resolved = spec;
    if (spec.kind == MethodKind::GS_MTL && !resolved.groups) resolved.groups = groups;

    const DatasetSplit split = split_dataset(data, SplitRatios{}, seed);

    GridSearchResult result;
    double best_val = std::numeric_limits<double>::infinity();
    for (double mu : grid.mu_grid) {
        for (double lambda : grid.lambda_grid) {
            for (int k : grid.k_grid) {
                GridCell cell{mu, lambda, k, 0.0, false, ""};
                SolverConfig config = base;
                config.hp.mu = mu;
                config.hp.lambda = lambda;
                config.hp.k = k;
                config.seed = seed;
                try {
                    const MethodFit fitres = fit_method(resolved, split.train, config);
                    cell.val_error = evaluate(fitres.W, split.val, data.kind());
                } catch (const Error& e) {
                    cell.failed = true;
                    cell.val_error = std::numeric_limits<double>::infinity();
                    cell.note = e.what();
                }
                result.cells.push_back(cell);
                if (cell.val_error < best_val) {
                    best_val = cell.val_error;
                    result.best = config.hp;
                }
            }
        }
    }
    if (!std::isfinite(best_val))
        throw ConvergenceError("every grid cell failed during grid search");

    result.val_error = best_val;
    SolverConfig config = base;
    config.hp = result.best;
    config.seed = seed;
    const MethodFit refit = fit_method(resolved, split.train, config);
    result.test_error = evaluate(refit.W, split.test, data.kind());
    result.refit_report = refit.report;
    return result;
}

BenchmarkTable run_benchmark(const std::vector<BenchmarkInput>& datasets,
                             const std::vector<MethodKind>& methods, const GridSearchSpec& grid,
                             const std::vector<std::uint64_t>& seeds, const SolverConfig& base) {
    if (datasets.empty()) throw ConfigError("run_benchmark needs at least one dataset");
    if (methods.empty()) throw ConfigError("run_benchmark needs at least one method");
    if (seeds.empty()) throw ConfigError("run_benchmark needs at least one seed");

    BenchmarkTable table;
    table.methods = methods;
    table.seeds = seeds;
    for (const auto& ds : datasets) table.dataset_names.push_back(ds.name);

    table.cells.resize(methods.size());
    for (std::size_t m = 0; m < methods.size(); ++m) {
        table.cells[m].resize(datasets.size());
        for (std::size_t d = 0; d < datasets.size(); ++d) {
            BenchmarkCell& cell = table.cells[m][d];
            for (std::uint64_t seed : seeds) {
                MethodSpec spec{methods[m], std::nullopt};
                try {
                    const GridSearchResult res =
                        grid_search(spec, datasets[d].data, datasets[d].groups, grid, seed, base);
                    cell.per_seed_error.push_back(res.test_error);
                    cell.chosen.push_back(res.best);
                } catch (const Error& e) {
                    cell.per_seed_error.push_back(std::numeric_limits<double>::infinity());
                    cell.chosen.push_back(HyperParams{});
                    table.notes.push_back(std::string(to_string(methods[m])) + "/" +
                                          datasets[d].name + " seed " + std::to_string(seed) +
                                          ": " + e.what());
                }
            }
            double sum = 0.0;
            for (double v : cell.per_seed_error) sum += v;
            cell.mean_error = sum / static_cast<double>(cell.per_seed_error.size());
            if (cell.per_seed_error.size() > 1 && std::isfinite(cell.mean_error)) {
                double ss = 0.0;
                for (double v : cell.per_seed_error) {
                    const double delta = v - cell.mean_error;
                    ss += delta * delta;
                }
                cell.std_error =
                    std::sqrt(ss / static_cast<double>(cell.per_seed_error.size() - 1));
            }
        }
    }
    return table;
}

std::string BenchmarkTable::to_text_table() const {
    std::ostringstream out;
    out << std::left << std::setw(10) << "method";
    for (const auto& name : dataset_names) out << std::right << std::setw(22) << name;
    out << "\n";
    for (std::size_t m = 0; m < methods.size(); ++m) {
        out << std::left << std::setw(10) << to_string(methods[m]);
        for (std::size_t d = 0; d < dataset_names.size(); ++d) {
            std::ostringstream cell;
            if (std::isfinite(cells[m][d].mean_error)) {
                cell << std::fixed << std::setprecision(4) << cells[m][d].mean_error << " +- "
                     << std::setprecision(4) << cells[m][d].std_error;
            } else {
                cell << "inf";
            }
            out << std::right << std::setw(22) << cell.str();
        }
        out << "\n";
    }
    if (!notes.empty()) {
        out << "\nnotes:\n";
        for (const auto& n : notes) out << "  - " << n << "\n";
    }
    return out.str();
}

std::string BenchmarkTable::to_json_string() const {
    nlohmann::json root;
    root["datasets"] = dataset_names;
    std::vector<std::string> method_names;
    for (MethodKind m : methods) method_names.emplace_back(to_string(m));
    root["methods"] = method_names;
    root["seeds"] = seeds;
    nlohmann::json results = nlohmann::json::object();
    for (std::size_t m = 0; m < methods.size(); ++m) {
        nlohmann::json per_dataset = nlohmann::json::object();
        for (std::size_t d = 0; d < dataset_names.size(); ++d) {
            const BenchmarkCell& cell = cells[m][d];
            nlohmann::json jcell;
            jcell["mean_error"] = cell.mean_error;
            jcell["std_error"] = cell.std_error;
            jcell["per_seed_error"] = cell.per_seed_error;
            nlohmann::json chosen = nlohmann::json::array();
            for (const HyperParams& hp : cell.chosen)
                chosen.push_back({{"mu", hp.mu}, {"lambda", hp.lambda}, {"k", hp.k}});
            jcell["chosen"] = chosen;
            per_dataset[dataset_names[d]] = jcell;
        }
        results[method_names[m]] = per_dataset;
    }
    root["results"] = results;
    root["notes"] = notes;
    return root.dump(2) + "\n";
}

std::pair<double, double> support_similarity(const Eigen::MatrixXd& S,
                                             const GroupStructure& groups) {
    if (S.cols() != groups.task_count())
        throw DimensionError("S has " + std::to_string(S.cols()) + " columns but groups cover " +
                             std::to_string(groups.task_count()) + " tasks");
    if (groups.overlapping())
        throw ConfigError("support_similarity requires disjoint groups");
    if (!S.allFinite()) throw DataError("S contains non-finite entries");
    const double maxabs = S.cwiseAbs().maxCoeff();
    if (maxabs == 0.0) throw DataError("degenerate support: S is all zero");
    const double thresh = 1e-6 * maxabs;

    const Eigen::Index k = S.rows();
    const int T = static_cast<int>(S.cols());
    std::vector<std::vector<bool>> support(static_cast<std::size_t>(T),
                                           std::vector<bool>(static_cast<std::size_t>(k)));
    for (int t = 0; t < T; ++t)
        for (Eigen::Index r = 0; r < k; ++r)
            support[static_cast<std::size_t>(t)][static_cast<std::size_t>(r)] =
                std::abs(S(r, t)) > thresh;

    std::vector<int> group_of(static_cast<std::size_t>(T), -1);
    for (int j = 0; j < groups.group_count(); ++j)
        for (int t : groups.group(j)) group_of[static_cast<std::size_t>(t)] = j;

    auto jaccard = [&](int a, int b) {
        int inter = 0, uni = 0;
        for (Eigen::Index r = 0; r < k; ++r) {
            const bool va = support[static_cast<std::size_t>(a)][static_cast<std::size_t>(r)];
            const bool vb = support[static_cast<std::size_t>(b)][static_cast<std::size_t>(r)];
            if (va && vb) ++inter;
            if (va || vb) ++uni;
        }
        return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
    };

    double within = 0.0, across = 0.0;
    long n_within = 0, n_across = 0;
    for (int a = 0; a < T; ++a) {
        for (int b = a + 1; b < T; ++b) {
            const double j = jaccard(a, b);
            if (group_of[static_cast<std::size_t>(a)] == group_of[static_cast<std::size_t>(b)]) {
                within += j;
                ++n_within;
            } else {
                across += j;
                ++n_across;
            }
        }
    }
    return {n_within ? within / static_cast<double>(n_within) : 0.0,
            n_across ? across / static_cast<double>(n_across) : 0.0};
}

}  // namespace gsmtl
