#include "gsmtl/datagen.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

namespace gsmtl {

namespace {

// Contiguous near-equal partition of {0..n-1} into g blocks.
std::vector<std::vector<int>> contiguous_partition(int n, int g) {
    std::vector<std::vector<int>> blocks(static_cast<std::size_t>(g));
    for (int b = 0; b < g; ++b) {
        const int lo = static_cast<int>(static_cast<long>(b) * n / g);
        const int hi = static_cast<int>(static_cast<long>(b + 1) * n / g);
        for (int i = lo; i < hi; ++i) blocks[static_cast<std::size_t>(b)].push_back(i);
    }
    return blocks;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

double parse_double(const std::string& field, std::size_t line_no, const char* what) {
    double out = 0.0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    const auto res = std::from_chars(first, last, out);
    if (res.ec != std::errc() || res.ptr != last)
        throw DataError("line " + std::to_string(line_no) + ": non-numeric " + what + " '" +
                        field + "'");
    return out;
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(',', start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace

Synthetic1Output gen_synthetic1(const Synthetic1Config& cfg) {
    if (cfg.m < 1 || cfg.g < 1 || cfg.T < 1 || cfg.n_per_task < 1 || cfg.k_true < 1)
        throw ConfigError("synthetic1 counts must all be at least 1");
    if (cfg.sigma < 0.0 || cfg.label_noise < 0.0)
        throw ConfigError("synthetic1 noise levels must be nonnegative");
    if (cfg.g > cfg.m || cfg.g > cfg.T)
        throw ConfigError("synthetic1 needs g <= m and g <= T");

    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);

    // cluster centers, one per group
    Eigen::MatrixXd centers(cfg.m, cfg.g);
    for (int k = 0; k < cfg.g; ++k)
        for (int i = 0; i < cfg.m; ++i) centers(i, k) = unif(rng);

    const auto feature_groups = contiguous_partition(cfg.m, cfg.g);
    std::vector<std::vector<int>> owners(static_cast<std::size_t>(cfg.m));
    for (int k = 0; k < cfg.g; ++k)
        for (int i : feature_groups[static_cast<std::size_t>(k)])
            owners[static_cast<std::size_t>(i)].push_back(k);

    auto task_blocks = contiguous_partition(cfg.T, cfg.g);

    // planted model: latent row r serves task group (r mod g)
    Eigen::MatrixXd L_true(cfg.m, cfg.k_true);
    for (int r = 0; r < cfg.k_true; ++r)
        for (int i = 0; i < cfg.m; ++i) L_true(i, r) = normal(rng);
    Eigen::MatrixXd S_true = Eigen::MatrixXd::Zero(cfg.k_true, cfg.T);
    for (int r = 0; r < cfg.k_true; ++r)
        for (int t : task_blocks[static_cast<std::size_t>(r % cfg.g)]) S_true(r, t) = normal(rng);

    const Eigen::MatrixXd W_true = L_true * S_true;

    std::vector<Task> tasks;
    tasks.reserve(static_cast<std::size_t>(cfg.T));
    for (int t = 0; t < cfg.T; ++t) {
        Task task;
        task.X.resize(cfg.n_per_task, cfg.m);
        task.y.resize(cfg.n_per_task);
        for (int s = 0; s < cfg.n_per_task; ++s) {
            for (int i = 0; i < cfg.m; ++i) {
                const auto& own = owners[static_cast<std::size_t>(i)];
                int k = own.front();
                if (own.size() > 1) {
                    std::uniform_int_distribution<std::size_t> pick(0, own.size() - 1);
                    k = own[pick(rng)];
                }
                task.X(s, i) = centers(i, k) + cfg.sigma * normal(rng);
            }
            task.y[s] = W_true.col(t).dot(task.X.row(s).transpose()) +
                        cfg.label_noise * normal(rng);
        }
        tasks.push_back(std::move(task));
    }

    return Synthetic1Output{MultiTaskDataset(std::move(tasks), ProblemKind::Regression),
                            GroupStructure(std::move(task_blocks), cfg.T),
                            LatentModel{std::move(L_true), std::move(S_true)}};
}

TwoGroupOutput gen_two_group_classification(int T, int d, int n_per_task, double margin,
                                            std::uint64_t seed) {
    if (T < 2) throw ConfigError("two-group generator needs at least 2 tasks");
    if (d < 2 || n_per_task < 1) throw ConfigError("two-group generator needs d >= 2, n >= 1");

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);

    // The two groups respond to disjoint feature blocks (foliated vs barren
    // terrain react through different physics), and the second group's
    // signal is weaker: |w_A| = margin, |w_B| = 0.4 * margin against unit
    // label noise.
    const int half = d / 2;
    Eigen::VectorXd wa = Eigen::VectorXd::Zero(d), wb = Eigen::VectorXd::Zero(d);
    for (int i = 0; i < half; ++i) wa[i] = normal(rng);
    wa *= margin / wa.norm();
    for (int i = half; i < d; ++i) wb[i] = normal(rng);
    wb *= 0.4 * margin / wb.norm();

    const int first = (T + 1) / 2;
    std::vector<Task> tasks;
    tasks.reserve(static_cast<std::size_t>(T));
    for (int t = 0; t < T; ++t) {
        const Eigen::VectorXd& w = t < first ? wa : wb;
        Task task;
        task.X.resize(n_per_task, d);
        task.y.resize(n_per_task);
        for (int s = 0; s < n_per_task; ++s) {
            for (int i = 0; i < d; ++i) task.X(s, i) = normal(rng);
            const double score = w.dot(task.X.row(s).transpose()) + normal(rng);
            task.y[s] = score >= 0.0 ? 1.0 : -1.0;
        }
        tasks.push_back(std::move(task));
    }

    std::vector<int> ga(static_cast<std::size_t>(first)), gb(static_cast<std::size_t>(T - first));
    std::iota(ga.begin(), ga.end(), 0);
    std::iota(gb.begin(), gb.end(), first);
    return TwoGroupOutput{MultiTaskDataset(std::move(tasks), ProblemKind::BinaryClassification),
                          GroupStructure({std::move(ga), std::move(gb)}, T)};
}

MultiTaskDataset load_csv(const std::filesystem::path& path, const CsvSchema& schema) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open dataset file " + path.string());

    std::string line;
    if (!std::getline(in, line)) throw DataError(path.string() + ": empty file");
    std::size_t line_no = 1;
    const auto header = split_fields(trim(line));
    if (header.size() < 3 || header[0] != "task_id" || header[1] != "y")
        throw DataError("line 1: header must be task_id,y,x1,...,xd");
    const std::size_t d = header.size() - 2;
    for (std::size_t j = 0; j < d; ++j)
        if (header[j + 2] != "x" + std::to_string(j + 1))
            throw DataError("line 1: expected column x" + std::to_string(j + 1) + ", got '" +
                            header[j + 2] + "'");

    struct Row {
        double y;
        std::vector<double> x;
    };
    std::map<long, std::vector<Row>> by_task;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty()) continue;
        const auto fields = split_fields(t);
        if (fields.size() != d + 2)
            throw DataError("line " + std::to_string(line_no) + ": expected " +
                            std::to_string(d + 2) + " columns, got " +
                            std::to_string(fields.size()));
        long task_id = 0;
        {
            const auto res =
                std::from_chars(fields[0].data(), fields[0].data() + fields[0].size(), task_id);
            if (res.ec != std::errc() || res.ptr != fields[0].data() + fields[0].size() ||
                task_id < 1)
                throw DataError("line " + std::to_string(line_no) +
                                ": task_id must be a positive integer, got '" + fields[0] + "'");
        }
        Row row;
        row.y = parse_double(fields[1], line_no, "label");
        if (schema.kind == ProblemKind::BinaryClassification && row.y != 1.0 && row.y != -1.0)
            throw DataError("line " + std::to_string(line_no) +
                            ": classification label must be -1 or +1, got '" + fields[1] + "'");
        row.x.resize(d);
        for (std::size_t j = 0; j < d; ++j)
            row.x[j] = parse_double(fields[j + 2], line_no, "feature");
        by_task[task_id].push_back(std::move(row));
    }
    if (by_task.empty()) throw DataError(path.string() + ": no data rows");

    std::vector<Task> tasks;
    tasks.reserve(by_task.size());
    for (const auto& [id, rows] : by_task) {
        Task task;
        task.X.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(d));
        task.y.resize(static_cast<Eigen::Index>(rows.size()));
        for (std::size_t i = 0; i < rows.size(); ++i) {
            task.y[static_cast<Eigen::Index>(i)] = rows[i].y;
            for (std::size_t j = 0; j < d; ++j)
                task.X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i].x[j];
        }
        tasks.push_back(std::move(task));
    }
    return MultiTaskDataset(std::move(tasks), schema.kind);
}

std::string dataset_to_csv(const MultiTaskDataset& data) {
    std::ostringstream out;
    out << "task_id,y";
    for (Eigen::Index j = 0; j < data.dim(); ++j) out << ",x" << (j + 1);
    out << "\n";
    for (int t = 0; t < data.task_count(); ++t) {
        const Task& task = data.task(t);
        for (Eigen::Index i = 0; i < task.X.rows(); ++i) {
            out << (t + 1) << ',' << format_double(task.y[i]);
            for (Eigen::Index j = 0; j < task.X.cols(); ++j)
                out << ',' << format_double(task.X(i, j));
            out << "\n";
        }
    }
    return out.str();
}

void export_csv(const MultiTaskDataset& data, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write dataset file " + path.string());
    out << dataset_to_csv(data);
    if (!out) throw DataError("failed while writing " + path.string());
}

GroupStructure load_groups(const std::filesystem::path& path, int task_count) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open groups file " + path.string());
    std::vector<std::vector<int>> groups;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string t = trim(line);
        if (t.empty()) continue;
        std::vector<int> group;
        for (const auto& field : split_fields(t)) {
            const std::string f = trim(field);
            long id = 0;
            const auto res = std::from_chars(f.data(), f.data() + f.size(), id);
            if (res.ec != std::errc() || res.ptr != f.data() + f.size() || id < 1)
                throw DataError("line " + std::to_string(line_no) +
                                ": task id must be a positive integer, got '" + f + "'");
            group.push_back(static_cast<int>(id - 1));
        }
        groups.push_back(std::move(group));
    }
    return GroupStructure(std::move(groups), task_count);
}

std::string groups_to_text(const GroupStructure& groups) {
    std::ostringstream out;
    for (int j = 0; j < groups.group_count(); ++j) {
        const auto& g = groups.group(j);
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (i) out << ',';
            out << (g[i] + 1);
        }
        out << "\n";
    }
    return out.str();
}

void export_groups(const GroupStructure& groups, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write groups file " + path.string());
    out << groups_to_text(groups);
    if (!out) throw DataError("failed while writing " + path.string());
}

GroupStructure kmeans_groups(const MultiTaskDataset& data, const KMeansConfig& cfg) {
    const int T = data.task_count();
    if (cfg.g < 1) throw ConfigError("k-means needs g >= 1");
    if (cfg.g > T)
        throw ConfigError("k-means group count g=" + std::to_string(cfg.g) +
                          " exceeds task count T=" + std::to_string(T));

    Eigen::MatrixXd reps(data.dim(), T);  // one mean feature vector per task
    for (int t = 0; t < T; ++t) reps.col(t) = data.task(t).X.colwise().mean().transpose();

    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    std::vector<int> best_assign;
    double best_wcss = std::numeric_limits<double>::infinity();

    for (int restart = 0; restart < std::max(1, cfg.restarts); ++restart) {
        // D^2-weighted seeding
        Eigen::MatrixXd centers(data.dim(), cfg.g);
        std::uniform_int_distribution<int> pick_first(0, T - 1);
        centers.col(0) = reps.col(pick_first(rng));
        Eigen::VectorXd dist2(T);
        for (int c = 1; c < cfg.g; ++c) {
            for (int t = 0; t < T; ++t) {
                double best = std::numeric_limits<double>::infinity();
                for (int cc = 0; cc < c; ++cc)
                    best = std::min(best, (reps.col(t) - centers.col(cc)).squaredNorm());
                dist2[t] = best;
            }
            const double total = dist2.sum();
            int chosen = 0;
            if (total > 0.0) {
                const double u = unif(rng) * total;
                double acc = 0.0;
                for (int t = 0; t < T; ++t) {
                    acc += dist2[t];
                    if (u <= acc) {
                        chosen = t;
                        break;
                    }
                }
            }
            centers.col(c) = reps.col(chosen);
        }

        std::vector<int> assign(static_cast<std::size_t>(T), 0);
        for (int it = 0; it < cfg.max_iter; ++it) {
            bool changed = false;
            for (int t = 0; t < T; ++t) {
                int arg = 0;
                double best = std::numeric_limits<double>::infinity();
                for (int c = 0; c < cfg.g; ++c) {
                    const double d2 = (reps.col(t) - centers.col(c)).squaredNorm();
                    if (d2 < best) {
                        best = d2;
                        arg = c;
                    }
                }
                if (assign[static_cast<std::size_t>(t)] != arg) {
                    assign[static_cast<std::size_t>(t)] = arg;
                    changed = true;
                }
            }
            // recompute centers; refill an empty cluster from the worst-served task
            for (int c = 0; c < cfg.g; ++c) {
                Eigen::VectorXd sum = Eigen::VectorXd::Zero(data.dim());
                int count = 0;
                for (int t = 0; t < T; ++t)
                    if (assign[static_cast<std::size_t>(t)] == c) {
                        sum += reps.col(t);
                        ++count;
                    }
                if (count > 0) {
                    centers.col(c) = sum / count;
                } else {
                    int far = 0;
                    double far_d = -1.0;
                    for (int t = 0; t < T; ++t) {
                        const double d2 =
                            (reps.col(t) -
                             centers.col(assign[static_cast<std::size_t>(t)]))
                                .squaredNorm();
                        if (d2 > far_d) {
                            far_d = d2;
                            far = t;
                        }
                    }
                    assign[static_cast<std::size_t>(far)] = c;
                    centers.col(c) = reps.col(far);
                    changed = true;
                }
            }
            if (!changed && it > 0) break;
        }

        double wcss = 0.0;
        for (int t = 0; t < T; ++t)
            wcss += (reps.col(t) - centers.col(assign[static_cast<std::size_t>(t)])).squaredNorm();
        if (wcss < best_wcss) {
            best_wcss = wcss;
            best_assign = assign;
        }
    }

    std::vector<std::vector<int>> clusters(static_cast<std::size_t>(cfg.g));
    for (int t = 0; t < T; ++t)
        clusters[static_cast<std::size_t>(best_assign[static_cast<std::size_t>(t)])].push_back(t);
    std::vector<std::vector<int>> groups;
    for (auto& c : clusters)
        if (!c.empty()) groups.push_back(std::move(c));
    std::sort(groups.begin(), groups.end(),
              [](const auto& a, const auto& b) { return a.front() < b.front(); });
    return GroupStructure(std::move(groups), T);
}

DatasetSplit split_dataset(const MultiTaskDataset& data, const SplitRatios& ratios,
                           std::uint64_t seed) {
    if (ratios.train < 0.0 || ratios.val < 0.0 || ratios.test < 0.0 ||
        std::abs(ratios.train + ratios.val + ratios.test - 1.0) > 1e-9)
        throw ConfigError("split ratios must be nonnegative and sum to 1");

    std::mt19937_64 rng(seed);
    std::vector<Task> train, val, test;
    for (int t = 0; t < data.task_count(); ++t) {
        const Task& task = data.task(t);
        const Eigen::Index n = task.X.rows();
        if (n < 5)
            throw DataError("task " + std::to_string(t) + " has only " + std::to_string(n) +
                            " samples; splitting needs at least 5");
        std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
        std::iota(idx.begin(), idx.end(), 0);
        std::shuffle(idx.begin(), idx.end(), rng);

        const auto n_train =
            static_cast<Eigen::Index>(std::floor(ratios.train * static_cast<double>(n) + 1e-12));
        const auto n_val =
            static_cast<Eigen::Index>(std::floor(ratios.val * static_cast<double>(n) + 1e-12));

        auto take = [&](Eigen::Index lo, Eigen::Index hi) {
            Task part;
            part.X.resize(hi - lo, task.X.cols());
            part.y.resize(hi - lo);
            for (Eigen::Index i = lo; i < hi; ++i) {
                part.X.row(i - lo) = task.X.row(idx[static_cast<std::size_t>(i)]);
                part.y[i - lo] = task.y[idx[static_cast<std::size_t>(i)]];
            }
            return part;
        };
        train.push_back(take(0, n_train));
        val.push_back(take(n_train, n_train + n_val));
        test.push_back(take(n_train + n_val, n));
    }
    return DatasetSplit{MultiTaskDataset(std::move(train), data.kind()),
                        MultiTaskDataset(std::move(val), data.kind()),
                        MultiTaskDataset(std::move(test), data.kind())};
}

}  // namespace gsmtl
