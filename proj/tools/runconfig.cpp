#include "runconfig.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace gsmtl::cli {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

using SectionMap = std::map<std::string, std::map<std::string, std::string>>;

SectionMap read_sections(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    SectionMap sections;
    std::string line, section;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string t = trim(line);
        if (t.empty()) continue;
        if (t.front() == '[') {
            if (t.back() != ']')
                throw ConfigError("config line " + std::to_string(line_no) +
                                  ": unterminated section header");
            section = trim(t.substr(1, t.size() - 2));
            if (section.empty())
                throw ConfigError("config line " + std::to_string(line_no) + ": empty section");
            sections[section];
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(line_no) +
                              ": expected key = value, got '" + t + "'");
        if (section.empty())
            throw ConfigError("config line " + std::to_string(line_no) +
                              ": key outside any [section]");
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ConfigError("config line " + std::to_string(line_no) + ": empty key or value");
        if (!sections[section].emplace(key, value).second)
            throw ConfigError("config line " + std::to_string(line_no) + ": duplicate key '" +
                              key + "' in [" + section + "]");
    }
    return sections;
}

// Accessor with per-section key whitelisting so typos fail loudly.
class Section {
public:
    Section(const SectionMap& all, std::string name, std::set<std::string> allowed)
        : name_(std::move(name)), allowed_(std::move(allowed)) {
        const auto it = all.find(name_);
        if (it != all.end()) entries_ = &it->second;
        if (entries_)
            for (const auto& [key, value] : *entries_)
                if (!allowed_.count(key))
                    throw ConfigError("unknown key '" + key + "' in [" + name_ + "]");
    }

    bool present() const { return entries_ != nullptr; }
    bool has(const std::string& key) const { return entries_ && entries_->count(key); }

    std::string str(const std::string& key) const {
        if (!has(key)) throw ConfigError("missing key '" + key + "' in [" + name_ + "]");
        return entries_->at(key);
    }
    std::string str_or(const std::string& key, const std::string& fallback) const {
        return has(key) ? entries_->at(key) : fallback;
    }

    double number(const std::string& key) const { return parse_number(str(key), key); }
    double number_or(const std::string& key, double fallback) const {
        return has(key) ? parse_number(str(key), key) : fallback;
    }
    int integer(const std::string& key) const { return parse_int(str(key), key); }
    int integer_or(const std::string& key, int fallback) const {
        return has(key) ? parse_int(str(key), key) : fallback;
    }
    std::uint64_t uinteger_or(const std::string& key, std::uint64_t fallback) const {
        if (!has(key)) return fallback;
        const std::string v = str(key);
        std::uint64_t out = 0;
        const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
        if (res.ec != std::errc() || res.ptr != v.data() + v.size())
            throw ConfigError("[" + name_ + "] " + key + ": expected unsigned integer, got '" +
                              v + "'");
        return out;
    }

    std::vector<std::string> list(const std::string& key) const {
        std::vector<std::string> out;
        std::istringstream in(str(key));
        std::string item;
        while (std::getline(in, item, ',')) {
            const std::string t = trim(item);
            if (!t.empty()) out.push_back(t);
        }
        if (out.empty()) throw ConfigError("[" + name_ + "] " + key + ": empty list");
        return out;
    }

private:
    double parse_number(const std::string& v, const std::string& key) const {
        double out = 0.0;
        const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
        if (res.ec != std::errc() || res.ptr != v.data() + v.size())
            throw ConfigError("[" + name_ + "] " + key + ": expected number, got '" + v + "'");
        return out;
    }
    int parse_int(const std::string& v, const std::string& key) const {
        int out = 0;
        const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
        if (res.ec != std::errc() || res.ptr != v.data() + v.size())
            throw ConfigError("[" + name_ + "] " + key + ": expected integer, got '" + v + "'");
        return out;
    }

    std::string name_;
    std::set<std::string> allowed_;
    const std::map<std::string, std::string>* entries_ = nullptr;
};

}  // namespace

RunConfig parse_run_config(const std::filesystem::path& path) {
    const SectionMap sections = read_sections(path);
    for (const auto& [name, entries] : sections) {
        static const std::set<std::string> known = {"dataset",    "groups", "method",
                                                    "hyperparams", "grid",   "benchmark",
                                                    "run",        "smatrix"};
        if (!known.count(name)) throw ConfigError("unknown section [" + name + "]");
    }

    RunConfig cfg;

    const Section run(sections, "run", {"seed", "out"});
    cfg.seed = run.uinteger_or("seed", 0);
    cfg.out_dir = run.str_or("out", "out");

    const Section dataset(sections, "dataset",
                          {"source", "path", "kind", "m", "g", "tasks", "n-per-task", "sigma",
                           "label-noise", "k-true", "d", "margin", "name"});
    if (!dataset.present()) throw ConfigError("config needs a [dataset] section");
    const std::string source = dataset.str("source");
    cfg.dataset_name = dataset.str_or("name", source);
    if (source == "csv") {
        cfg.dataset_source = RunConfig::DatasetSource::Csv;
        cfg.csv_path = dataset.str("path");
        cfg.csv_kind = problem_kind_from_string(dataset.str("kind"));
    } else if (source == "synthetic1") {
        cfg.dataset_source = RunConfig::DatasetSource::Synthetic1;
        cfg.synthetic1.m = dataset.integer_or("m", cfg.synthetic1.m);
        cfg.synthetic1.g = dataset.integer_or("g", cfg.synthetic1.g);
        cfg.synthetic1.T = dataset.integer_or("tasks", cfg.synthetic1.T);
        cfg.synthetic1.n_per_task = dataset.integer_or("n-per-task", cfg.synthetic1.n_per_task);
        cfg.synthetic1.sigma = dataset.number_or("sigma", cfg.synthetic1.sigma);
        cfg.synthetic1.label_noise = dataset.number_or("label-noise", cfg.synthetic1.label_noise);
        cfg.synthetic1.k_true = dataset.integer_or("k-true", cfg.synthetic1.k_true);
    } else if (source == "two-group") {
        cfg.dataset_source = RunConfig::DatasetSource::TwoGroup;
        cfg.two_group.tasks = dataset.integer_or("tasks", cfg.two_group.tasks);
        cfg.two_group.d = dataset.integer_or("d", cfg.two_group.d);
        cfg.two_group.n_per_task = dataset.integer_or("n-per-task", cfg.two_group.n_per_task);
        cfg.two_group.margin = dataset.number_or("margin", cfg.two_group.margin);
    } else {
        throw ConfigError("[dataset] source must be csv, synthetic1, or two-group, got '" +
                          source + "'");
    }

    const Section groups(sections, "groups", {"source", "path", "g", "restarts", "max-iter"});
    if (groups.present()) {
        const std::string gsrc = groups.str("source");
        if (gsrc == "file") {
            cfg.groups_source = RunConfig::GroupsSource::File;
            cfg.groups_path = groups.str("path");
        } else if (gsrc == "kmeans") {
            cfg.groups_source = RunConfig::GroupsSource::KMeans;
            cfg.kmeans.g = groups.integer("g");
            cfg.kmeans.restarts = groups.integer_or("restarts", cfg.kmeans.restarts);
            cfg.kmeans.max_iter = groups.integer_or("max-iter", cfg.kmeans.max_iter);
        } else if (gsrc == "singletons") {
            cfg.groups_source = RunConfig::GroupsSource::Singletons;
        } else if (gsrc == "all-tasks") {
            cfg.groups_source = RunConfig::GroupsSource::AllTasks;
        } else {
            throw ConfigError(
                "[groups] source must be file, kmeans, singletons, or all-tasks, got '" + gsrc +
                "'");
        }
    }

    const Section method(sections, "method", {"kind"});
    if (method.present()) cfg.method = method_kind_from_string(method.str("kind"));

    const Section hp(sections, "hyperparams",
                     {"mu", "lambda", "k", "outer-tol", "inner-tol", "outer-max-iter",
                      "inner-max-iter"});
    if (hp.present()) {
        cfg.has_hyperparams = true;
        cfg.hp.mu = hp.number("mu");
        cfg.hp.lambda = hp.number("lambda");
        cfg.hp.k = hp.integer("k");
        cfg.hp.outer_tol = hp.number_or("outer-tol", cfg.hp.outer_tol);
        cfg.hp.inner_tol = hp.number_or("inner-tol", cfg.hp.inner_tol);
        cfg.hp.outer_max_iter = hp.integer_or("outer-max-iter", cfg.hp.outer_max_iter);
        cfg.hp.inner_max_iter = hp.integer_or("inner-max-iter", cfg.hp.inner_max_iter);
        cfg.hp.validate();
    }

    const Section grid(sections, "grid", {"mu", "lambda", "k"});
    if (grid.present()) {
        GridSearchSpec spec;  // empty vectors mean "use defaults" downstream
        if (grid.has("mu"))
            for (const auto& v : grid.list("mu")) spec.mu_grid.push_back(std::stod(v));
        if (grid.has("lambda"))
            for (const auto& v : grid.list("lambda")) spec.lambda_grid.push_back(std::stod(v));
        if (grid.has("k"))
            for (const auto& v : grid.list("k")) spec.k_grid.push_back(std::stoi(v));
        std::sort(spec.mu_grid.begin(), spec.mu_grid.end());
        std::sort(spec.lambda_grid.begin(), spec.lambda_grid.end());
        std::sort(spec.k_grid.begin(), spec.k_grid.end());
        cfg.grid = std::move(spec);
    }

    const Section bench(sections, "benchmark", {"methods", "seeds"});
    if (bench.present()) {
        if (bench.has("methods"))
            for (const auto& m : bench.list("methods"))
                cfg.bench_methods.push_back(method_kind_from_string(m));
        if (bench.has("seeds"))
            for (const auto& s : bench.list("seeds"))
                cfg.seeds.push_back(static_cast<std::uint64_t>(std::stoull(s)));
    }

    const Section smatrix(sections, "smatrix", {"s", "groups"});
    if (smatrix.present()) {
        cfg.smatrix_path = smatrix.str("s");
        cfg.smatrix_groups_path = smatrix.str("groups");
    }

    return cfg;
}

ResolvedDataset resolve_dataset(const RunConfig& cfg) {
    switch (cfg.dataset_source) {
        case RunConfig::DatasetSource::Csv: {
            if (!std::filesystem::exists(cfg.csv_path))
                throw ConfigError("dataset file does not exist: " + cfg.csv_path.string());
            return {load_csv(cfg.csv_path, {cfg.csv_kind}), std::nullopt};
        }
        case RunConfig::DatasetSource::Synthetic1: {
            Synthetic1Config gen = cfg.synthetic1;
            gen.seed = cfg.seed;
            auto out = gen_synthetic1(gen);
            return {std::move(out.data), std::move(out.task_groups)};
        }
        case RunConfig::DatasetSource::TwoGroup: {
            auto out = gen_two_group_classification(cfg.two_group.tasks, cfg.two_group.d,
                                                    cfg.two_group.n_per_task,
                                                    cfg.two_group.margin, cfg.seed);
            return {std::move(out.data), std::move(out.groups)};
        }
    }
    throw ConfigError("unknown dataset source");
}

GroupStructure resolve_groups(const RunConfig& cfg, const MultiTaskDataset& data) {
    switch (cfg.groups_source) {
        case RunConfig::GroupsSource::File:
            if (!std::filesystem::exists(cfg.groups_path))
                throw ConfigError("groups file does not exist: " + cfg.groups_path.string());
            return load_groups(cfg.groups_path, data.task_count());
        case RunConfig::GroupsSource::KMeans: {
            KMeansConfig km = cfg.kmeans;
            km.seed = cfg.seed;
            return kmeans_groups(data, km);
        }
        case RunConfig::GroupsSource::Singletons:
            return GroupStructure::singletons(data.task_count());
        case RunConfig::GroupsSource::AllTasks:
            return GroupStructure::single_group(data.task_count());
    }
    throw ConfigError("unknown groups source");
}

}  // namespace gsmtl::cli
