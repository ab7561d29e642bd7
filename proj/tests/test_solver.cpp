#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/SVD>

#include <cmath>
#include <numeric>
#include <random>

#include "gsmtl/datagen.hpp"
#include "gsmtl/losses.hpp"
#include "gsmtl/objective.hpp"
#include "gsmtl/solver.hpp"
#include "support/oracles.hpp"

using namespace gsmtl;
namespace oracle = gsmtl::testing;

namespace {

MultiTaskDataset linear_regression_data(std::mt19937_64& rng, const Eigen::MatrixXd& W,
                                        int n_per_task, double noise) {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<Task> tasks;
    for (Eigen::Index t = 0; t < W.cols(); ++t) {
        Task task;
        task.X.resize(n_per_task, W.rows());
        task.y.resize(n_per_task);
        for (int i = 0; i < n_per_task; ++i) {
            for (Eigen::Index j = 0; j < W.rows(); ++j) task.X(i, j) = normal(rng);
            task.y[i] = W.col(t).dot(task.X.row(i).transpose()) + noise * normal(rng);
        }
        tasks.push_back(std::move(task));
    }
    return MultiTaskDataset(std::move(tasks), ProblemKind::Regression);
}

// Mirror of the unaccelerated S-step loop with an explicit elementwise
// soft-threshold prox, matching the solver's arithmetic (X*L cached, same
// backtracking test) so iterates coincide for singleton groups.
Eigen::MatrixXd s_step_soft_threshold_mirror(const Eigen::MatrixXd& L,
                                             const Eigen::MatrixXd& S_init,
                                             const MultiTaskDataset& data,
                                             const SolverConfig& config) {
    std::vector<Eigen::MatrixXd> U;
    for (int t = 0; t < data.task_count(); ++t) U.push_back(data.task(t).X * L);
    auto loss = [&](const Eigen::MatrixXd& S) {
        double total = 0.0;
        for (int t = 0; t < data.task_count(); ++t) {
            const Eigen::VectorXd z = U[static_cast<std::size_t>(t)] * S.col(t);
            for (Eigen::Index i = 0; i < z.size(); ++i)
                total += loss_value(data.kind(), z[i], data.task(t).y[i]);
        }
        return total;
    };
    auto grad = [&](const Eigen::MatrixXd& S) {
        Eigen::MatrixXd g(S.rows(), S.cols());
        for (int t = 0; t < data.task_count(); ++t) {
            const Eigen::VectorXd z = U[static_cast<std::size_t>(t)] * S.col(t);
            Eigen::VectorXd r(z.size());
            for (Eigen::Index i = 0; i < z.size(); ++i)
                r[i] = loss_derivative(data.kind(), z[i], data.task(t).y[i]);
            g.col(t) = U[static_cast<std::size_t>(t)].transpose() * r;
        }
        return g;
    };
    auto penalty = [&](const Eigen::MatrixXd& S) {
        double total = 0.0;
        for (Eigen::Index r = 0; r < S.rows(); ++r)
            for (Eigen::Index c = 0; c < S.cols(); ++c) total += std::sqrt(S(r, c) * S(r, c));
        return config.hp.mu * total;
    };
    auto soft = [](double v, double t) { return v > t ? v - t : (v < -t ? v + t : 0.0); };

    Eigen::MatrixXd S = S_init;
    double h_S = loss(S) + penalty(S);
    for (int it = 0; it < config.hp.inner_max_iter; ++it) {
        const Eigen::MatrixXd g = grad(S);
        const double f_base = loss(S);
        double step = config.s_step.initial_step;
        Eigen::MatrixXd S_new;
        for (int bt = 0; bt <= 60; ++bt) {
            const Eigen::MatrixXd C = S - step * g;
            S_new = C.unaryExpr(
                [&](double v) { return soft(v, config.hp.mu * step); });
            const double f_new = loss(S_new);
            const Eigen::MatrixXd diff = S_new - S;
            if (f_new <= f_base + g.cwiseProduct(diff).sum() + diff.squaredNorm() / (2.0 * step))
                break;
            step *= config.s_step.backtracking_factor;
        }
        const double h_new = loss(S_new) + penalty(S_new);
        if (h_new > h_S * (1.0 + 1e-12) + 1e-15) break;
        const double rel = (S_new - S).norm() / (1.0 + S.norm());
        S = S_new;
        h_S = h_new;
        if (rel <= config.hp.inner_tol) break;
    }
    return S;
}

}  // namespace

TEST_CASE("init_L: exact rank-1 recovery") {
    std::mt19937_64 rng(1);
    Eigen::VectorXd u = Eigen::VectorXd::Random(4).normalized();
    Eigen::VectorXd v = Eigen::VectorXd::Random(3);
    const Eigen::MatrixXd W = 2.0 * u * v.transpose();  // rank 1
    const auto data = linear_regression_data(rng, W, 30, 0.0);
    HyperParams hp;
    hp.k = 1;
    const LatentModel m = init_L(data, hp);
    // the STL weights approximate W up to the 1e-3 ridge, so L*S ~ W
    CHECK((m.L * m.S - W).norm() <= 1e-3 * W.norm());
    CHECK(m.L.cols() == 1);
}

TEST_CASE("init_L: orthonormal columns") {
    std::mt19937_64 rng(2);
    const auto data = oracle::random_dataset(rng, 5, 6, 12, ProblemKind::Regression);
    HyperParams hp;
    hp.k = 3;
    const LatentModel m = init_L(data, hp);
    const Eigen::MatrixXd gram = m.L.transpose() * m.L;
    CHECK((gram - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("init_L: Eckart-Young residual against an independent SVD") {
    std::mt19937_64 rng(3);
    for (int rep = 0; rep < 10; ++rep) {
        const int T = 4 + static_cast<int>(rng() % 4);
        const int d = 4 + static_cast<int>(rng() % 4);
        const int k = 1 + static_cast<int>(rng() % 3);
        const auto data = oracle::random_dataset(rng, T, d, 10, ProblemKind::Regression);
        HyperParams hp;
        hp.k = k;
        const LatentModel m = init_L(data, hp);

        const Eigen::MatrixXd W = stl_weights(data, 1e-3);
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(W);
        double tail = 0.0;
        for (Eigen::Index i = k; i < svd.singularValues().size(); ++i)
            tail += svd.singularValues()[i] * svd.singularValues()[i];
        CHECK(std::abs((m.L * m.S - W).norm() - std::sqrt(tail)) <= 1e-8);
    }
}

TEST_CASE("init_L: rejects all-zero features and oversized k") {
    Task t0;
    t0.X = Eigen::MatrixXd::Zero(3, 2);
    t0.y = Eigen::VectorXd::Ones(3);
    const MultiTaskDataset degenerate({t0}, ProblemKind::Regression);
    HyperParams hp;
    hp.k = 1;
    CHECK_THROWS_AS(init_L(degenerate, hp), DataError);

    std::mt19937_64 rng(4);
    const auto data = oracle::random_dataset(rng, 3, 2, 5, ProblemKind::Regression);
    hp.k = 3;  // min(d, T) = 2
    CHECK_THROWS_AS(init_L(data, hp), DimensionError);
}

TEST_CASE("solve_S_step: mu = 0 reaches the per-task least squares solution") {
    std::mt19937_64 rng(5);
    const auto data = oracle::random_dataset(rng, 3, 4, 20, ProblemKind::Regression);
    const Eigen::MatrixXd L = oracle::random_model(rng, 4, 2, 3).L;
    SolverConfig config;
    config.hp.mu = 0.0;
    config.hp.k = 2;
    config.hp.inner_tol = 1e-13;
    config.hp.inner_max_iter = 20000;
    const Eigen::MatrixXd S =
        solve_S_step(L, Eigen::MatrixXd::Zero(2, 3), data, GroupStructure::singletons(3), config);
    for (int t = 0; t < 3; ++t) {
        const Eigen::MatrixXd U = data.task(t).X * L;
        const Eigen::VectorXd resid =
            U.transpose() * U * S.col(t) - U.transpose() * data.task(t).y;
        CHECK(resid.norm() <= 1e-6);
    }
}

TEST_CASE("solve_S_step: huge mu annihilates S") {
    std::mt19937_64 rng(6);
    const auto data = oracle::random_dataset(rng, 4, 3, 8, ProblemKind::Regression);
    const auto m = oracle::random_model(rng, 3, 2, 4);
    const double gnorm = grad_S(LatentModel{m.L, Eigen::MatrixXd::Zero(2, 4)}, data).norm();
    SolverConfig config;
    config.hp.mu = 1e6 * std::max(1.0, gnorm);
    config.hp.k = 2;
    const Eigen::MatrixXd S =
        solve_S_step(m.L, m.S, data, GroupStructure::singletons(4), config);
    CHECK(S.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("solve_S_step: lasso instance matches coordinate descent in objective") {
    std::mt19937_64 rng(7);
    const int d = 5;
    std::normal_distribution<double> normal(0.0, 1.0);
    Task task;
    task.X.resize(30, d);
    task.y.resize(30);
    for (int i = 0; i < 30; ++i) {
        for (int j = 0; j < d; ++j) task.X(i, j) = normal(rng);
        task.y[i] = normal(rng);
    }
    const MultiTaskDataset data({task}, ProblemKind::Regression);
    const double mu = 0.7;
    SolverConfig config;
    config.hp.mu = mu;
    config.hp.k = d;
    config.hp.inner_tol = 1e-12;
    config.hp.inner_max_iter = 50000;
    const Eigen::MatrixXd S = solve_S_step(Eigen::MatrixXd::Identity(d, d),
                                           Eigen::MatrixXd::Zero(d, 1), data,
                                           GroupStructure::singletons(1), config);
    const Eigen::VectorXd w = oracle::coordinate_descent_lasso(task.X, task.y, mu);
    const double obj_impl = (task.X * S.col(0) - task.y).squaredNorm() + mu * S.cwiseAbs().sum();
    const double obj_oracle = (task.X * w - task.y).squaredNorm() + mu * w.cwiseAbs().sum();
    CHECK(obj_impl <= obj_oracle + 1e-5);
    CHECK(obj_impl >= obj_oracle - 1e-5);
}

TEST_CASE("solve_S_step: singleton groups walk the same iterates as explicit soft-thresholding") {
    std::mt19937_64 rng(8);
    for (int rep = 0; rep < 4; ++rep) {
        const int T = 2 + static_cast<int>(rng() % 3);
        const int d = 3 + static_cast<int>(rng() % 3);
        const int k = 1 + static_cast<int>(rng() % 2);
        const auto data = oracle::random_dataset(
            rng, T, d, 8, rep % 2 ? ProblemKind::Regression : ProblemKind::BinaryClassification);
        const auto m = oracle::random_model(rng, d, k, T);
        SolverConfig config;
        config.hp.mu = 0.3;
        config.hp.k = k;
        config.hp.inner_max_iter = 200;
        const Eigen::MatrixXd impl =
            solve_S_step(m.L, m.S, data, GroupStructure::singletons(T), config);
        const Eigen::MatrixXd mirror = s_step_soft_threshold_mirror(m.L, m.S, data, config);
        CHECK((impl - mirror).cwiseAbs().maxCoeff() <= 1e-12);
    }
}

TEST_CASE("solve_L_step: overwhelming lambda crushes L") {
    std::mt19937_64 rng(9);
    const auto data = oracle::random_dataset(rng, 3, 4, 10, ProblemKind::Regression);
    const auto m = oracle::random_model(rng, 4, 2, 3);
    SolverConfig config;
    config.hp.lambda = 1e8;
    config.hp.k = 2;
    const Eigen::MatrixXd L = solve_L_step(m.L, m.S, data, config);
    CHECK(L.norm() <= 1e-3);
}

TEST_CASE("solve_L_step: S = identity stacks per-task ridge solutions") {
    std::mt19937_64 rng(10);
    const int T = 3, d = 4;
    const auto data = oracle::random_dataset(rng, T, d, 15, ProblemKind::Regression);
    SolverConfig config;
    config.hp.lambda = 0.5;
    config.hp.k = T;
    const Eigen::MatrixXd L = solve_L_step(Eigen::MatrixXd::Zero(d, T),
                                           Eigen::MatrixXd::Identity(T, T), data, config);
    for (int t = 0; t < T; ++t) {
        const Eigen::VectorXd w = oracle::ridge_oracle(data.task(t).X, data.task(t).y, 0.5);
        CHECK((L.col(t) - w).cwiseAbs().maxCoeff() <= 1e-8);
    }
}

TEST_CASE("solve_L_step: normal-equations residual self-check") {
    std::mt19937_64 rng(11);
    const auto data = oracle::random_dataset(rng, 4, 5, 12, ProblemKind::Regression);
    const auto m = oracle::random_model(rng, 5, 3, 4);
    SolverConfig config;
    config.hp.lambda = 0.2;
    config.hp.k = 3;
    const Eigen::MatrixXd L = solve_L_step(m.L, m.S, data, config);

    // rebuild A vec(L) - b with independent loops
    const Eigen::Index dk = 15;
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(dk, dk);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(dk);
    for (int t = 0; t < 4; ++t) {
        const Task& task = data.task(t);
        for (Eigen::Index i = 0; i < task.X.rows(); ++i) {
            Eigen::VectorXd a(dk);
            for (Eigen::Index kk = 0; kk < 3; ++kk)
                a.segment(kk * 5, 5) = m.S(kk, t) * task.X.row(i).transpose();
            A += a * a.transpose();
            b += task.y[i] * a;
        }
    }
    A.diagonal().array() += 0.2;
    const Eigen::Map<const Eigen::VectorXd> vecL(L.data(), dk);
    CHECK((A * vecL - b).norm() <= 1e-8 * (1.0 + b.norm()));
}

TEST_CASE("solve_L_step: CG agrees with the direct solve") {
    std::mt19937_64 rng(12);
    const auto data = oracle::random_dataset(rng, 4, 6, 14, ProblemKind::Regression);
    const auto m = oracle::random_model(rng, 6, 2, 4);
    SolverConfig config;
    config.hp.lambda = 0.3;
    config.hp.k = 2;
    config.l_step.method = LStepMethod::Direct;
    const Eigen::MatrixXd direct = solve_L_step(m.L, m.S, data, config);
    config.l_step.method = LStepMethod::ConjugateGradient;
    const Eigen::MatrixXd cg = solve_L_step(m.L, m.S, data, config);
    CHECK((direct - cg).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("solve_L_step: rank-deficient system with lambda = 0 is rejected") {
    Task task;
    task.X = Eigen::MatrixXd::Ones(1, 2);  // one sample, two features
    task.y = Eigen::VectorXd::Ones(1);
    const MultiTaskDataset data({task}, ProblemKind::Regression);
    SolverConfig config;
    config.hp.lambda = 0.0;
    config.hp.k = 2;
    Eigen::MatrixXd S(2, 1);
    S << 1.0, 0.5;
    try {
        solve_L_step(Eigen::MatrixXd::Zero(2, 2), S, data, config);
        FAIL("expected DataError");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("lambda > 0") != std::string::npos);
    }
}

TEST_CASE("solve_L_step: classification gradient descent reduces the objective") {
    std::mt19937_64 rng(13);
    const auto data = oracle::random_dataset(rng, 3, 4, 20, ProblemKind::BinaryClassification);
    const auto m = oracle::random_model(rng, 4, 2, 3);
    SolverConfig config;
    config.hp.lambda = 0.1;
    config.hp.k = 2;
    config.hp.inner_max_iter = 300;
    const Eigen::MatrixXd L = solve_L_step(m.L, m.S, data, config);
    HyperParams hp = config.hp;
    hp.mu = 0.0;
    const GroupStructure g = GroupStructure::singletons(3);
    CHECK(objective(LatentModel{L, m.S}, data, g, hp) <=
          objective(LatentModel{m.L, m.S}, data, g, hp) + 1e-12);
}

TEST_CASE("fit: interpolation regime reaches near-zero training error") {
    std::mt19937_64 rng(14);
    const int d = 4, T = 3;
    Eigen::MatrixXd W(d, T);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (Eigen::Index i = 0; i < W.size(); ++i) W.data()[i] = normal(rng);
    const auto data = linear_regression_data(rng, W, 20, 0.0);
    SolverConfig config;
    config.hp.mu = 0.0;
    config.hp.lambda = 0.0;
    config.hp.k = T;
    config.hp.outer_max_iter = 50;
    const auto [model, report] = fit(data, GroupStructure::singletons(T), config);
    for (double err : report.per_task_train_error) CHECK(err <= 1e-6);
    CHECK(!report.notes.empty());  // k == T note present
}

TEST_CASE("fit: objective trace is non-increasing and deterministic") {
    std::mt19937_64 rng(15);
    for (int rep = 0; rep < 5; ++rep) {
        const int T = 3 + static_cast<int>(rng() % 3);
        const int d = 3 + static_cast<int>(rng() % 3);
        const auto kind = rep % 2 ? ProblemKind::Regression : ProblemKind::BinaryClassification;
        const auto data = oracle::random_dataset(rng, T, d, 10, kind);
        const auto groups = oracle::random_groups(rng, T, 3, rep % 2 == 0);
        SolverConfig config;
        config.hp.mu = 0.05;
        config.hp.lambda = 0.05;
        config.hp.k = std::min(2, std::min(d, T));
        config.hp.outer_max_iter = 25;
        const auto [model, report] = fit(data, groups, config);
        REQUIRE(report.objective_trace.size() >= 2);
        for (std::size_t i = 1; i < report.objective_trace.size(); ++i)
            CHECK(report.objective_trace[i] <=
                  report.objective_trace[i - 1] * (1.0 + 1e-9) + 1e-12);

        const auto [model2, report2] = fit(data, groups, config);
        CHECK(model2.S == model.S);
        CHECK(model2.L == model.L);
        CHECK(report2.objective_trace == report.objective_trace);
    }
}

TEST_CASE("fit: one extra alternating round barely moves a converged objective") {
    std::mt19937_64 rng(16);
    const auto data = oracle::random_dataset(rng, 4, 4, 12, ProblemKind::Regression);
    const GroupStructure groups({{0, 1}, {2, 3}}, 4);
    SolverConfig config;
    config.hp.mu = 0.1;
    config.hp.lambda = 0.1;
    config.hp.k = 2;
    config.hp.outer_tol = 1e-7;
    config.hp.outer_max_iter = 400;
    const auto [model, report] = fit(data, groups, config);
    REQUIRE(report.converged);
    const double obj = report.objective_trace.back();

    const Eigen::MatrixXd S2 = solve_S_step(model.L, model.S, data, groups, config);
    const Eigen::MatrixXd L2 = solve_L_step(model.L, S2, data, config);
    const double obj2 = objective(LatentModel{L2, S2}, data, groups, config.hp);
    CHECK(std::abs(obj2 - obj) <= 10.0 * config.hp.outer_tol * std::abs(obj));
}

TEST_CASE("fit: permuting tasks permutes S and preserves the trace") {
    std::mt19937_64 rng(17);
    Eigen::MatrixXd W(5, 4);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (Eigen::Index i = 0; i < W.size(); ++i) W.data()[i] = normal(rng);
    const auto data = linear_regression_data(rng, W, 16, 0.05);

    const std::vector<int> perm = {2, 0, 3, 1};  // old task t -> position perm[t]
    std::vector<Task> permuted_tasks(4);
    for (int t = 0; t < 4; ++t)
        permuted_tasks[static_cast<std::size_t>(perm[static_cast<std::size_t>(t)])] =
            data.task(t);
    const MultiTaskDataset permuted(std::move(permuted_tasks), ProblemKind::Regression);

    const GroupStructure groups({{0, 1}, {2, 3}}, 4);
    std::vector<std::vector<int>> pg;
    for (int j = 0; j < groups.group_count(); ++j) {
        std::vector<int> g;
        for (int t : groups.group(j)) g.push_back(perm[static_cast<std::size_t>(t)]);
        pg.push_back(std::move(g));
    }
    const GroupStructure permuted_groups(std::move(pg), 4);

    SolverConfig config;
    config.hp.mu = 0.2;
    config.hp.lambda = 0.1;
    config.hp.k = 2;
    config.hp.outer_max_iter = 40;
    const auto [model_a, report_a] = fit(data, groups, config);
    const auto [model_b, report_b] = fit(permuted, permuted_groups, config);

    REQUIRE(report_a.objective_trace.size() == report_b.objective_trace.size());
    for (std::size_t i = 0; i < report_a.objective_trace.size(); ++i)
        CHECK(report_a.objective_trace[i] ==
              doctest::Approx(report_b.objective_trace[i])
                  .epsilon(1e-9));
    for (int t = 0; t < 4; ++t)
        CHECK((model_a.S.col(t) -
               model_b.S.col(perm[static_cast<std::size_t>(t)]))
                  .cwiseAbs()
                  .maxCoeff() <= 1e-7);
}

TEST_CASE("fit: momentum variant also descends") {
    std::mt19937_64 rng(18);
    const auto data = oracle::random_dataset(rng, 4, 4, 10, ProblemKind::Regression);
    const GroupStructure groups({{0, 1}, {2, 3}}, 4);
    SolverConfig config;
    config.hp.mu = 0.2;
    config.hp.lambda = 0.05;
    config.hp.k = 2;
    config.hp.outer_max_iter = 20;
    config.acceleration = Acceleration::Momentum;
    const auto [model, report] = fit(data, groups, config);
    for (std::size_t i = 1; i < report.objective_trace.size(); ++i)
        CHECK(report.objective_trace[i] <= report.objective_trace[i - 1] * (1.0 + 1e-9) + 1e-12);
}

TEST_CASE("fit: planted synthetic recovery at zero label noise") {
    Synthetic1Config cfg;
    cfg.label_noise = 0.0;
    cfg.seed = 77;
    const auto out = gen_synthetic1(cfg);
    SolverConfig config;
    config.hp.mu = 1e-6;
    config.hp.lambda = 1e-6;
    config.hp.k = cfg.k_true;
    config.hp.outer_max_iter = 60;
    const auto [model, report] = fit(out.data, out.task_groups, config);
    double worst = 0.0;
    for (double err : report.per_task_train_error) worst = std::max(worst, err);
    CHECK(worst <= 1e-3);
}
