#include "commands.hpp"

#include <cmath>
#include <cstdio>
#include <iostream>
#include <sstream>

#include "gsmtl/matrixio.hpp"
#include "gsmtl/objective.hpp"
#include "gsmtl/solver.hpp"

namespace gsmtl::cli {

namespace {

void note(const RunConfig& cfg, const std::string& msg) {
    if (cfg.verbose) std::cerr << "gsmtl: " << msg << "\n";
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string manifest_text(const RunConfig& cfg) {
    std::ostringstream out;
    out << "seed = " << cfg.seed << "\n";
    switch (cfg.dataset_source) {
        case RunConfig::DatasetSource::Synthetic1:
            out << "source = synthetic1\n";
            out << "m = " << cfg.synthetic1.m << "\n";
            out << "g = " << cfg.synthetic1.g << "\n";
            out << "tasks = " << cfg.synthetic1.T << "\n";
            out << "n-per-task = " << cfg.synthetic1.n_per_task << "\n";
            out << "sigma = " << format_double(cfg.synthetic1.sigma) << "\n";
            out << "label-noise = " << format_double(cfg.synthetic1.label_noise) << "\n";
            out << "k-true = " << cfg.synthetic1.k_true << "\n";
            break;
        case RunConfig::DatasetSource::TwoGroup:
            out << "source = two-group\n";
            out << "tasks = " << cfg.two_group.tasks << "\n";
            out << "d = " << cfg.two_group.d << "\n";
            out << "n-per-task = " << cfg.two_group.n_per_task << "\n";
            out << "margin = " << format_double(cfg.two_group.margin) << "\n";
            break;
        case RunConfig::DatasetSource::Csv:
            out << "source = csv\n";
            out << "path = " << cfg.csv_path.string() << "\n";
            break;
    }
    return out.str();
}

GridSearchSpec resolve_grid(const RunConfig& cfg, int task_count) {
    GridSearchSpec grid = GridSearchSpec::defaults(task_count);
    if (cfg.grid) {
        if (!cfg.grid->mu_grid.empty()) grid.mu_grid = cfg.grid->mu_grid;
        if (!cfg.grid->lambda_grid.empty()) grid.lambda_grid = cfg.grid->lambda_grid;
        if (!cfg.grid->k_grid.empty()) grid.k_grid = cfg.grid->k_grid;
    }
    return grid;
}

SolverConfig solver_config(const RunConfig& cfg) {
    SolverConfig config;
    config.hp = cfg.hp;
    config.seed = cfg.seed;
    return config;
}

}  // namespace

void cmd_generate(const RunConfig& cfg) {
    if (cfg.dataset_source == RunConfig::DatasetSource::Csv)
        throw ConfigError("[dataset] source = csv: nothing to generate");
    const ResolvedDataset resolved = resolve_dataset(cfg);
    note(cfg, "generated " + std::to_string(resolved.data.task_count()) + " tasks");

    atomic_write(cfg.out_dir / "dataset.csv", dataset_to_csv(resolved.data));
    if (resolved.planted)
        atomic_write(cfg.out_dir / "groups.txt", groups_to_text(*resolved.planted));
    atomic_write(cfg.out_dir / "manifest.txt", manifest_text(cfg));
    note(cfg, "wrote dataset.csv, groups.txt, manifest.txt to " + cfg.out_dir.string());
}

void cmd_fit(const RunConfig& cfg) {
    if (!cfg.has_hyperparams)
        throw ConfigError("fit requires a [hyperparams] section with mu, lambda, and k");
    const ResolvedDataset resolved = resolve_dataset(cfg);
    const GroupStructure groups = resolve_groups(cfg, resolved.data);
    const SolverConfig config = solver_config(cfg);

    if (cfg.method == MethodKind::STL) {
        const MethodFit fitres = fit_method({MethodKind::STL, std::nullopt}, resolved.data,
                                            config);
        atomic_write(cfg.out_dir / "W.csv", matrix_to_csv(fitres.W));
        std::ostringstream report;
        report << "method = stl\n"
               << "train-error = "
               << format_double(evaluate(fitres.W, resolved.data, resolved.data.kind())) << "\n";
        atomic_write(cfg.out_dir / "report.txt", report.str());
        note(cfg, "wrote W.csv and report.txt");
        return;
    }

    MethodSpec spec{cfg.method, std::nullopt};
    if (cfg.method == MethodKind::GS_MTL) spec.groups = groups;
    const MethodFit fitres = fit_method(spec, resolved.data, config);
    const LatentModel& model = *fitres.model;
    const FitReport& report = *fitres.report;

    atomic_write(cfg.out_dir / "L.csv", matrix_to_csv(model.L));
    atomic_write(cfg.out_dir / "S.csv", matrix_to_csv(model.S));

    std::ostringstream trace;
    trace << "iter,objective\n";
    for (std::size_t i = 0; i < report.objective_trace.size(); ++i)
        trace << i << ',' << format_double(report.objective_trace[i]) << "\n";
    atomic_write(cfg.out_dir / "trace.csv", trace.str());

    std::ostringstream summary;
    summary << "method = " << to_string(cfg.method) << "\n"
            << "converged = " << (report.converged ? "true" : "false") << "\n"
            << "outer-iterations = " << report.outer_iterations << "\n"
            << "wall-seconds = " << format_double(report.wall_seconds) << "\n"
            << "final-objective = " << format_double(report.objective_trace.back()) << "\n";
    for (std::size_t t = 0; t < report.per_task_train_error.size(); ++t)
        summary << "train-error-task-" << (t + 1) << " = "
                << format_double(report.per_task_train_error[t]) << "\n";
    for (const auto& n : report.notes) summary << "note = " << n << "\n";
    atomic_write(cfg.out_dir / "report.txt", summary.str());
    note(cfg, "wrote L.csv, S.csv, trace.csv, report.txt to " + cfg.out_dir.string());
}

void cmd_benchmark(const RunConfig& cfg) {
    const ResolvedDataset resolved = resolve_dataset(cfg);
    const GroupStructure groups = resolve_groups(cfg, resolved.data);

    std::vector<MethodKind> methods = cfg.bench_methods;
    if (methods.empty())
        methods = {MethodKind::STL, MethodKind::MTL_FEAT, MethodKind::GO_MTL,
                   MethodKind::GS_MTL};
    std::vector<std::uint64_t> seeds = cfg.seeds;
    if (seeds.empty()) seeds = {cfg.seed};

    std::vector<BenchmarkInput> datasets;
    datasets.push_back({cfg.dataset_name, resolved.data, groups});
    const GridSearchSpec grid = resolve_grid(cfg, resolved.data.task_count());
    SolverConfig base = solver_config(cfg);

    note(cfg, "running " + std::to_string(methods.size()) + " methods x " +
                  std::to_string(seeds.size()) + " seeds");
    const BenchmarkTable table = run_benchmark(datasets, methods, grid, seeds, base);
    atomic_write(cfg.out_dir / "report.json", table.to_json_string());
    atomic_write(cfg.out_dir / "report.txt", table.to_text_table());
    note(cfg, "wrote report.json and report.txt to " + cfg.out_dir.string());
}

void cmd_export_smatrix(const RunConfig& cfg) {
    if (cfg.smatrix_path.empty() || cfg.smatrix_groups_path.empty())
        throw ConfigError("export-smatrix requires [smatrix] with keys s and groups");
    if (!std::filesystem::exists(cfg.smatrix_path))
        throw ConfigError("S matrix file does not exist: " + cfg.smatrix_path.string());
    if (!std::filesystem::exists(cfg.smatrix_groups_path))
        throw ConfigError("groups file does not exist: " + cfg.smatrix_groups_path.string());

    const Eigen::MatrixXd S = load_matrix_csv(cfg.smatrix_path);
    const GroupStructure groups =
        load_groups(cfg.smatrix_groups_path, static_cast<int>(S.cols()));

    // tasks along x, latent rows along y; |S| scaled linearly to [0, 255]
    atomic_write(cfg.out_dir / "smatrix_abs.csv", matrix_to_csv(S.cwiseAbs()));
    atomic_write(cfg.out_dir / "smatrix.pgm", matrix_to_pgm(S));

    std::ostringstream stats;
    stats << "tasks = " << S.cols() << "\n"
          << "latent = " << S.rows() << "\n"
          << "max-abs = " << format_double(S.cwiseAbs().maxCoeff()) << "\n";
    if (S.cwiseAbs().maxCoeff() == 0.0) {
        std::cerr << "gsmtl: warning: S is all zero; image is blank and support statistics are "
                     "undefined\n";
        stats << "support-stats = unavailable (S is all zero)\n";
    } else {
        const auto [within, across] = support_similarity(S, groups);
        stats << "jaccard-within = " << format_double(within) << "\n"
              << "jaccard-across = " << format_double(across) << "\n"
              << "jaccard-gap = " << format_double(within - across) << "\n";
    }
    atomic_write(cfg.out_dir / "support_stats.txt", stats.str());
    note(cfg, "wrote smatrix_abs.csv, smatrix.pgm, support_stats.txt to " +
                  cfg.out_dir.string());
}

}  // namespace gsmtl::cli
