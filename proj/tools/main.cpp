#include <CLI11.hpp>

#include <iostream>

#include "commands.hpp"
#include "runconfig.hpp"

// Exit codes: 0 success, 2 usage, 3 config, 4 data, 5 convergence, 6 I/O.
namespace {

constexpr int kExitUsage = 2;
constexpr int kExitConfig = 3;
constexpr int kExitData = 4;
constexpr int kExitConvergence = 5;
constexpr int kExitIo = 6;

struct GlobalOpts {
    std::string config_path;
    std::string out_dir;
    std::string subcommand;
    long long seed = -1;
    bool has_seed = false;
    bool verbose = false;
};

int run(const GlobalOpts& opts) {
    using namespace gsmtl;
    try {
        cli::RunConfig cfg = cli::parse_run_config(opts.config_path);
        if (!opts.out_dir.empty()) cfg.out_dir = opts.out_dir;
        if (opts.has_seed) cfg.seed = static_cast<std::uint64_t>(opts.seed);
        cfg.verbose = opts.verbose;

        if (opts.subcommand == "generate")
            cli::cmd_generate(cfg);
        else if (opts.subcommand == "fit")
            cli::cmd_fit(cfg);
        else if (opts.subcommand == "benchmark")
            cli::cmd_benchmark(cfg);
        else
            cli::cmd_export_smatrix(cfg);
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "gsmtl: config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const DimensionError& e) {
        std::cerr << "gsmtl: config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const DataError& e) {
        std::cerr << "gsmtl: data error: " << e.what() << "\n";
        return kExitData;
    } catch (const ConvergenceError& e) {
        std::cerr << "gsmtl: convergence failure: " << e.what() << "\n";
        return kExitConvergence;
    } catch (const InvariantError& e) {
        std::cerr << "gsmtl: convergence failure: " << e.what() << "\n";
        return kExitConvergence;
    } catch (const IoError& e) {
        std::cerr << "gsmtl: i/o error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "gsmtl: error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"group-structured latent-subspace multi-task learning"};
    app.require_subcommand(1);

    GlobalOpts opts;
    for (const char* name : {"generate", "fit", "benchmark", "export-smatrix"}) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", opts.config_path, "run configuration file")->required();
        sub->add_option("--out", opts.out_dir, "output directory (overrides config)");
        sub->add_option("--seed", opts.seed, "seed (overrides config)");
        sub->add_flag("--verbose", opts.verbose, "progress output on stderr");
        sub->parse_complete_callback([&opts, name]() { opts.subcommand = name; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return kExitUsage;
    }
    // CLI11 leaves --seed untouched when absent; detect via count()
    for (CLI::App* sub : app.get_subcommands())
        if (sub->count("--seed") > 0) opts.has_seed = true;

    return run(opts);
}
