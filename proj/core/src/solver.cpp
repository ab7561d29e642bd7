#include "gsmtl/solver.hpp"

#include <Eigen/Cholesky>
#include <Eigen/SVD>

#include <chrono>
#include <cmath>
#include <limits>

#include "gsmtl/groupnorm.hpp"
#include "gsmtl/losses.hpp"
#include "gsmtl/objective.hpp"

namespace gsmtl {

namespace {

constexpr double kArmijoSlope = 1e-4;
constexpr int kMaxBacktracks = 60;
constexpr Eigen::Index kDirectSolveLimit = 2000;  // largest d*k solved densely

// Per-task products X_t * L, fixed for the duration of an S-step.
struct SCache {
    const MultiTaskDataset* data;
    std::vector<Eigen::MatrixXd> U;  // n_t x k each

    SCache(const MultiTaskDataset& d, const Eigen::MatrixXd& L) : data(&d) {
        U.reserve(static_cast<std::size_t>(d.task_count()));
        for (int t = 0; t < d.task_count(); ++t) U.push_back(d.task(t).X * L);
    }

    double loss(const Eigen::MatrixXd& S) const {
        double total = 0.0;
        for (int t = 0; t < data->task_count(); ++t) {
            const Eigen::VectorXd z = U[static_cast<std::size_t>(t)] * S.col(t);
            const Eigen::VectorXd& y = data->task(t).y;
            for (Eigen::Index i = 0; i < z.size(); ++i)
                total += loss_value(data->kind(), z[i], y[i]);
        }
        return total;
    }

    Eigen::MatrixXd gradient(const Eigen::MatrixXd& S) const {
        Eigen::MatrixXd g(S.rows(), S.cols());
        for (int t = 0; t < data->task_count(); ++t) {
            const Eigen::MatrixXd& Ut = U[static_cast<std::size_t>(t)];
            const Eigen::VectorXd z = Ut * S.col(t);
            const Eigen::VectorXd& y = data->task(t).y;
            Eigen::VectorXd r(z.size());
            for (Eigen::Index i = 0; i < z.size(); ++i) {
                r[i] = loss_derivative(data->kind(), z[i], y[i]);
                if (!std::isfinite(r[i]))
                    throw DataError("non-finite gradient contribution at task " +
                                    std::to_string(t) + " sample " + std::to_string(i));
            }
            g.col(t) = Ut.transpose() * r;
        }
        return g;
    }
};

// mu * sum of row group norms of S; closed form for disjoint groups.
double penalty_rows(const Eigen::MatrixXd& S, const GroupStructure& groups, double mu,
                    const SolverConfig& config) {
    if (mu == 0.0) return 0.0;
    double total = 0.0;
    for (Eigen::Index r = 0; r < S.rows(); ++r) {
        const Eigen::VectorXd row = S.row(r).transpose();
        total += group_norm(row, groups, config.norm_eval_tol, config.norm_eval_max_iter).first;
    }
    return mu * total;
}

// Row-wise prox of (weight * group norm) applied to C. Dykstra converges
// sublinearly on near-tangent ball geometry, so a sweep-cap overrun is not
// fatal here: the best iterate is used and the S-step's monotone guard
// rejects the step if the accuracy was not enough.
Eigen::MatrixXd prox_rows(const Eigen::MatrixXd& C, const GroupStructure& groups, double weight,
                          const SolverConfig& config) {
    if (weight <= 0.0) return C;
    Eigen::MatrixXd out(C.rows(), C.cols());
    for (Eigen::Index r = 0; r < C.rows(); ++r) {
        const Eigen::VectorXd row = C.row(r).transpose();
        try {
            out.row(r) = prox_group_norm(row, groups, weight, config.projection_tol,
                                         config.projection_max_sweeps)
                             .transpose();
        } catch (const ProjectionConvergenceError& e) {
            out.row(r) = (row - e.last_iterate).transpose();
        }
    }
    return out;
}

Eigen::VectorXd solve_logistic_task(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                    double reg, double tol, int max_iter) {
    Eigen::VectorXd w = Eigen::VectorXd::Zero(X.cols());
    auto value = [&](const Eigen::VectorXd& v) {
        const Eigen::VectorXd z = X * v;
        double f = reg * v.squaredNorm();
        for (Eigen::Index i = 0; i < z.size(); ++i)
            f += loss_value(ProblemKind::BinaryClassification, z[i], y[i]);
        return f;
    };
    double fw = value(w);
    for (int it = 0; it < max_iter; ++it) {
        const Eigen::VectorXd z = X * w;
        Eigen::VectorXd r(z.size());
        for (Eigen::Index i = 0; i < z.size(); ++i)
            r[i] = loss_derivative(ProblemKind::BinaryClassification, z[i], y[i]);
        const Eigen::VectorXd g = X.transpose() * r + 2.0 * reg * w;
        const double gnorm = g.norm();
        if (gnorm <= tol) break;
        double step = 1.0;
        for (int bt = 0; bt < kMaxBacktracks; ++bt) {
            const Eigen::VectorXd cand = w - step * g;
            const double fc = value(cand);
            if (fc <= fw - kArmijoSlope * step * gnorm * gnorm) {
                w = cand;
                fw = fc;
                break;
            }
            step *= 0.5;
        }
    }
    return w;
}

double relative_change(const Eigen::MatrixXd& next, const Eigen::MatrixXd& prev) {
    return (next - prev).norm() / (1.0 + prev.norm());
}

double train_error_task(const MultiTaskDataset& data, const LatentModel& model, int t) {
    const Task& task = data.task(t);
    const Eigen::VectorXd z = task.X * model.task_weights(t);
    if (data.kind() == ProblemKind::Regression) {
        return std::sqrt((z - task.y).squaredNorm() / static_cast<double>(z.size()));
    }
    Eigen::Index wrong = 0;
    for (Eigen::Index i = 0; i < z.size(); ++i) {
        const double s = z[i] >= 0.0 ? 1.0 : -1.0;  // sign(0) counts as +1
        if (s != task.y[i]) ++wrong;
    }
    return static_cast<double>(wrong) / static_cast<double>(z.size());
}

}  // namespace

Eigen::MatrixXd stl_weights(const MultiTaskDataset& data, double reg, double tol, int max_iter) {
    const Eigen::Index d = data.dim();
    Eigen::MatrixXd W(d, data.task_count());
    for (int t = 0; t < data.task_count(); ++t) {
        const Task& task = data.task(t);
        if (data.kind() == ProblemKind::Regression) {
            Eigen::MatrixXd A = task.X.transpose() * task.X;
            A.diagonal().array() += reg;
            const Eigen::VectorXd b = task.X.transpose() * task.y;
            W.col(t) = A.ldlt().solve(b);
        } else {
            W.col(t) = solve_logistic_task(task.X, task.y, reg, tol, max_iter);
        }
    }
    return W;
}

LatentModel init_L(const MultiTaskDataset& data, const HyperParams& hp) {
    hp.validate();
    const Eigen::Index d = data.dim();
    const Eigen::Index T = data.task_count();
    if (hp.k > std::min(d, T))
        throw DimensionError("k=" + std::to_string(hp.k) + " exceeds min(d, T)=" +
                             std::to_string(std::min(d, T)) + " required by the SVD init");

    bool any_nonzero = false;
    for (int t = 0; t < data.task_count() && !any_nonzero; ++t)
        any_nonzero = data.task(t).X.cwiseAbs().maxCoeff() > 0.0;
    if (!any_nonzero) throw DataError("degenerate data: all feature values are zero");

    const Eigen::MatrixXd W = stl_weights(data, 1e-3, hp.inner_tol, hp.inner_max_iter);
    Eigen::BDCSVD<Eigen::MatrixXd> svd(W, Eigen::ComputeThinU | Eigen::ComputeThinV);

    LatentModel model;
    model.L = svd.matrixU().leftCols(hp.k);
    model.S = svd.singularValues().head(hp.k).asDiagonal() *
              svd.matrixV().leftCols(hp.k).transpose();

    // Fix the SVD sign ambiguity from L alone so that permuting tasks cannot
    // flip column signs: make the largest-magnitude entry of each column
    // (first index on ties) positive.
    for (Eigen::Index j = 0; j < model.L.cols(); ++j) {
        Eigen::Index arg = 0;
        double best = -1.0;
        for (Eigen::Index i = 0; i < model.L.rows(); ++i) {
            const double a = std::abs(model.L(i, j));
            if (a > best) {
                best = a;
                arg = i;
            }
        }
        if (model.L(arg, j) < 0.0) {
            model.L.col(j) = -model.L.col(j);
            model.S.row(j) = -model.S.row(j);
        }
    }
    return model;
}

Eigen::MatrixXd solve_S_step(const Eigen::MatrixXd& L, const Eigen::MatrixXd& S_init,
                             const MultiTaskDataset& data, const GroupStructure& groups,
                             const SolverConfig& config) {
    if (L.rows() != data.dim())
        throw DimensionError("L has " + std::to_string(L.rows()) + " rows, expected d=" +
                             std::to_string(data.dim()));
    if (S_init.rows() != L.cols() || S_init.cols() != data.task_count())
        throw DimensionError("S_init must be k x T = " + std::to_string(L.cols()) + " x " +
                             std::to_string(data.task_count()));
    if (groups.task_count() != data.task_count())
        throw DimensionError("groups cover " + std::to_string(groups.task_count()) +
                             " tasks but dataset has " + std::to_string(data.task_count()));
    if (!(config.s_step.backtracking_factor > 0.0 && config.s_step.backtracking_factor < 1.0))
        throw ConfigError("backtracking_factor must lie in (0, 1)");
    if (!(config.s_step.initial_step > 0.0)) throw ConfigError("initial_step must be positive");

    const double mu = config.hp.mu;
    const SCache cache(data, L);

    Eigen::MatrixXd S = S_init;
    Eigen::MatrixXd S_prev = S;
    double h_S = cache.loss(S) + penalty_rows(S, groups, mu, config);
    double momentum_t = 1.0;

    for (int it = 0; it < config.hp.inner_max_iter; ++it) {
        bool accelerated = config.acceleration == Acceleration::Momentum && it > 0;
        Eigen::MatrixXd base;
        double momentum_t_next = momentum_t;
        if (accelerated) {
            momentum_t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum_t * momentum_t));
            const double beta = (momentum_t - 1.0) / momentum_t_next;
            base = S + beta * (S - S_prev);
        } else {
            base = S;
        }

        Eigen::MatrixXd S_new;
        double h_new = 0.0;
        for (int attempt = 0; attempt < 2; ++attempt) {
            const Eigen::MatrixXd g = cache.gradient(base);
            const double f_base = cache.loss(base);
            double step = config.s_step.initial_step;
            for (int bt = 0; bt <= kMaxBacktracks; ++bt) {
                S_new = prox_rows(base - step * g, groups, mu * step, config);
                const double f_new = cache.loss(S_new);
                const Eigen::MatrixXd diff = S_new - base;
                // quadratic upper-bound (sufficient decrease) test
                if (f_new <=
                    f_base + g.cwiseProduct(diff).sum() + diff.squaredNorm() / (2.0 * step))
                    break;
                step *= config.s_step.backtracking_factor;
            }
            h_new = cache.loss(S_new) + penalty_rows(S_new, groups, mu, config);
            if (h_new <= h_S * (1.0 + 1e-12) + 1e-15 || !accelerated) break;
            // monotone safeguard: discard the momentum extrapolation
            accelerated = false;
            base = S;
            momentum_t_next = 1.0;
        }

        if (h_new > h_S * (1.0 + 1e-12) + 1e-15) break;  // stationary at prox resolution

        const double rel = relative_change(S_new, S);
        S_prev = S;
        S = S_new;
        h_S = h_new;
        momentum_t = momentum_t_next;
        if (rel <= config.hp.inner_tol) break;
    }
    return S;
}

namespace {

Eigen::MatrixXd solve_L_regression(const Eigen::MatrixXd& L_init, const Eigen::MatrixXd& S,
                                   const MultiTaskDataset& data, const SolverConfig& config) {
    const Eigen::Index d = data.dim();
    const Eigen::Index k = S.rows();
    const double lambda = config.hp.lambda;

    Eigen::MatrixXd B(d, k);  // right-hand side sum_t X_t' y_t s_t'
    B.setZero();
    for (int t = 0; t < data.task_count(); ++t) {
        const Task& task = data.task(t);
        B.noalias() += (task.X.transpose() * task.y) * S.col(t).transpose();
    }

    LStepMethod method = config.l_step.method;
    if (method == LStepMethod::Auto)
        method = d * k <= kDirectSolveLimit ? LStepMethod::Direct : LStepMethod::ConjugateGradient;

    if (method == LStepMethod::Direct) {
        const Eigen::Index dk = d * k;
        Eigen::MatrixXd A = Eigen::MatrixXd::Zero(dk, dk);
        for (int t = 0; t < data.task_count(); ++t) {
            const Eigen::MatrixXd XtX = data.task(t).X.transpose() * data.task(t).X;
            const Eigen::VectorXd s = S.col(t);
            for (Eigen::Index a = 0; a < k; ++a)
                for (Eigen::Index b = 0; b < k; ++b)
                    A.block(a * d, b * d, d, d) += s[a] * s[b] * XtX;
        }
        A.diagonal().array() += lambda;
        const Eigen::Map<const Eigen::VectorXd> b(B.data(), dk);
        const auto ldlt = A.ldlt();
        const Eigen::VectorXd diag = ldlt.vectorD();
        if (lambda == 0.0 && diag.minCoeff() < 1e-12 * std::max(1.0, diag.maxCoeff()))
            throw DataError(
                "L-step normal equations are rank deficient with lambda = 0; set lambda > 0");
        const Eigen::VectorXd v = ldlt.solve(b);
        const double bnorm = b.norm();
        const double resid = (A * v - b).norm();
        if (!v.allFinite() || resid > 1e-6 * (1.0 + bnorm)) {
            if (lambda == 0.0)
                throw DataError(
                    "L-step normal equations are rank deficient with lambda = 0; "
                    "set lambda > 0");
            throw ConvergenceError("L-step direct solve failed (residual " +
                                   std::to_string(resid) + ")");
        }
        return Eigen::Map<const Eigen::MatrixXd>(v.data(), d, k);
    }

    // Matrix-free CG on A(L) = sum_t X_t'(X_t L s_t) s_t' + lambda L.
    auto apply = [&](const Eigen::MatrixXd& M) {
        Eigen::MatrixXd out = lambda * M;
        for (int t = 0; t < data.task_count(); ++t) {
            const Task& task = data.task(t);
            const Eigen::VectorXd z = task.X * (M * S.col(t));
            out.noalias() += (task.X.transpose() * z) * S.col(t).transpose();
        }
        return out;
    };
    Eigen::MatrixXd Lm = L_init;
    Eigen::MatrixXd r = B - apply(Lm);
    Eigen::MatrixXd p = r;
    double rs = r.squaredNorm();
    const double bnorm = std::max(B.norm(), 1e-300);
    for (int it = 0; it < config.l_step.cg_max_iter; ++it) {
        if (std::sqrt(rs) <= config.l_step.cg_tol * bnorm) break;
        const Eigen::MatrixXd Ap = apply(p);
        const double pAp = p.cwiseProduct(Ap).sum();
        if (pAp <= 0.0) {
            if (lambda == 0.0)
                throw DataError(
                    "L-step normal equations are rank deficient with lambda = 0; "
                    "set lambda > 0");
            throw ConvergenceError("L-step CG hit a non-positive curvature direction");
        }
        const double alpha = rs / pAp;
        Lm += alpha * p;
        r -= alpha * Ap;
        const double rs_new = r.squaredNorm();
        p = r + (rs_new / rs) * p;
        rs = rs_new;
    }
    return Lm;
}

Eigen::MatrixXd solve_L_classification(const Eigen::MatrixXd& L_init, const Eigen::MatrixXd& S,
                                       const MultiTaskDataset& data, const SolverConfig& config) {
    const double lambda = config.hp.lambda;
    LatentModel scratch{L_init, S};
    auto value = [&](const Eigen::MatrixXd& L) {
        double f = lambda * L.squaredNorm();
        for (int t = 0; t < data.task_count(); ++t) {
            const Task& task = data.task(t);
            const Eigen::VectorXd z = task.X * (L * S.col(t));
            for (Eigen::Index i = 0; i < z.size(); ++i)
                f += loss_value(data.kind(), z[i], task.y[i]);
        }
        return f;
    };
    Eigen::MatrixXd L = L_init;
    double fL = value(L);
    for (int it = 0; it < config.hp.inner_max_iter; ++it) {
        scratch.L = L;
        const Eigen::MatrixXd g = grad_L(scratch, data, lambda);
        const double gnorm = g.norm();
        if (gnorm <= config.hp.inner_tol) break;
        double step = 1.0;
        for (int bt = 0; bt < kMaxBacktracks; ++bt) {
            const Eigen::MatrixXd cand = L - step * g;
            const double fc = value(cand);
            if (fc <= fL - kArmijoSlope * step * gnorm * gnorm) {
                L = cand;
                fL = fc;
                break;
            }
            step *= 0.5;
        }
    }
    return L;
}

}  // namespace

Eigen::MatrixXd solve_L_step(const Eigen::MatrixXd& L_init, const Eigen::MatrixXd& S,
                             const MultiTaskDataset& data, const SolverConfig& config) {
    if (L_init.rows() != data.dim() || L_init.cols() != S.rows())
        throw DimensionError("L_init must be d x k = " + std::to_string(data.dim()) + " x " +
                             std::to_string(S.rows()));
    if (S.cols() != data.task_count())
        throw DimensionError("S has " + std::to_string(S.cols()) + " columns, expected T=" +
                             std::to_string(data.task_count()));
    if (data.kind() == ProblemKind::Regression)
        return solve_L_regression(L_init, S, data, config);
    return solve_L_classification(L_init, S, data, config);
}

std::pair<LatentModel, FitReport> fit(const MultiTaskDataset& data, const GroupStructure& groups,
                                      const SolverConfig& config) {
    config.hp.validate();
    if (groups.task_count() != data.task_count())
        throw DimensionError("groups cover " + std::to_string(groups.task_count()) +
                             " tasks but dataset has " + std::to_string(data.task_count()));

    const auto start = std::chrono::steady_clock::now();
    FitReport report;

    LatentModel model = init_L(data, config.hp);
    if (config.hp.k == data.task_count())
        report.notes.push_back("k equals the task count; the latent factorization is trivial");

    double obj = objective(model, data, groups, config.hp, config.norm_eval_tol);
    report.objective_trace.push_back(obj);

    for (int outer = 1; outer <= config.hp.outer_max_iter; ++outer) {
        const Eigen::MatrixXd S_new = solve_S_step(model.L, model.S, data, groups, config);
        const Eigen::MatrixXd L_new = solve_L_step(model.L, S_new, data, config);
        const double rel_S = relative_change(S_new, model.S);
        const double rel_L = relative_change(L_new, model.L);
        model.S = S_new;
        model.L = L_new;

        const double obj_new = objective(model, data, groups, config.hp, config.norm_eval_tol);
        report.objective_trace.push_back(obj_new);
        report.outer_iterations = outer;
        if (obj_new > obj * (1.0 + 1e-9) + 1e-12)
            throw InvariantError("objective increased from " + std::to_string(obj) + " to " +
                                 std::to_string(obj_new) + " at outer iteration " +
                                 std::to_string(outer));
        obj = obj_new;

        if (std::max(rel_S, rel_L) <= config.hp.outer_tol) {
            report.converged = true;
            report.notes.push_back("stopped: relative change of L and S below outer_tol");
            break;
        }
    }
    if (!report.converged)
        report.notes.push_back("stopped: outer_max_iter reached before outer_tol");

    for (int t = 0; t < data.task_count(); ++t)
        report.per_task_train_error.push_back(train_error_task(data, model, t));
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return {std::move(model), std::move(report)};
}

}  // namespace gsmtl
