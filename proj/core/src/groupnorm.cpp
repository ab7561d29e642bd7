#include "gsmtl/groupnorm.hpp"

#include <algorithm>
#include <cmath>

namespace gsmtl {

namespace {

void check_length(const Eigen::VectorXd& x, const GroupStructure& groups) {
    if (x.size() != groups.task_count())
        throw DimensionError("vector has length " + std::to_string(x.size()) +
                             " but groups cover " + std::to_string(groups.task_count()) +
                             " indices");
}

double block_norm(const Eigen::VectorXd& v, const std::vector<int>& g) {
    double s = 0.0;
    for (int i : g) s += v[i] * v[i];
    return std::sqrt(s);
}

// Scale the block to radius t if it lies outside the ball.
void clamp_block(Eigen::VectorXd& v, const std::vector<int>& g, double t) {
    const double n = block_norm(v, g);
    if (n > t) {
        const double s = t / n;
        for (int i : g) v[i] *= s;
    }
}

// max(0, 1 - kappa/||a||) * a, the prox of kappa*||.||_2.
Eigen::VectorXd block_soft_threshold(const Eigen::VectorXd& a, double kappa) {
    const double n = a.norm();
    if (n <= kappa) return Eigen::VectorXd::Zero(a.size());
    return (1.0 - kappa / n) * a;
}

}  // namespace

std::pair<double, GroupNormDecomposition> group_norm(const Eigen::VectorXd& x,
                                                     const GroupStructure& groups, double tol,
                                                     int max_iter) {
    check_length(x, groups);
    if (!(tol > 0.0)) throw ConfigError("group_norm tolerance must be positive");
    const int g = groups.group_count();
    const Eigen::Index n = x.size();

    GroupNormDecomposition dec;
    dec.parts.assign(static_cast<std::size_t>(g), Eigen::VectorXd::Zero(n));

    if (!groups.overlapping()) {
        double value = 0.0;
        for (int j = 0; j < g; ++j) {
            for (int i : groups.group(j)) dec.parts[static_cast<std::size_t>(j)][i] = x[i];
            value += block_norm(x, groups.group(j));
        }
        dec.value = value;
        return {value, std::move(dec)};
    }

    // ADMM on   min sum_j ||w_j||  s.t.  sum_j w_j = x,  w_j supported on G_j.
    // w-side: closed-form projection onto the reconstruction constraint
    // (divide the residual by the per-coordinate group multiplicity);
    // z-side: block soft-threshold. Stopping is certified: any feasible w
    // yields an upper bound, and a multiplier estimate scaled into the dual
    // ball yields the lower bound x'nu.
    const std::vector<int> mult = groups.multiplicity();
    Eigen::VectorXd inv_mult(n);
    for (Eigen::Index i = 0; i < n; ++i) inv_mult[i] = 1.0 / static_cast<double>(mult[i]);

    std::vector<Eigen::VectorXd> w(static_cast<std::size_t>(g)), z(static_cast<std::size_t>(g)),
        u(static_cast<std::size_t>(g));
    for (int j = 0; j < g; ++j) {
        const auto sz = static_cast<Eigen::Index>(groups.group(j).size());
        w[static_cast<std::size_t>(j)] = Eigen::VectorXd::Zero(sz);
        z[static_cast<std::size_t>(j)] = Eigen::VectorXd::Zero(sz);
        u[static_cast<std::size_t>(j)] = Eigen::VectorXd::Zero(sz);
    }

    const double rho = 1.0;
    const double scale = 1.0 + x.norm();
    double best_value = std::numeric_limits<double>::infinity();
    double best_gap = std::numeric_limits<double>::infinity();
    Eigen::VectorXd sum_v(n), nu(n);

    auto affine_project = [&](std::vector<Eigen::VectorXd>& out,
                              const std::vector<Eigen::VectorXd>& in) {
        sum_v.setZero();
        for (int j = 0; j < g; ++j) {
            const auto& grp = groups.group(j);
            for (std::size_t p = 0; p < grp.size(); ++p)
                sum_v[grp[p]] += in[static_cast<std::size_t>(j)][static_cast<Eigen::Index>(p)];
        }
        sum_v -= x;
        for (int j = 0; j < g; ++j) {
            const auto& grp = groups.group(j);
            for (std::size_t p = 0; p < grp.size(); ++p)
                out[static_cast<std::size_t>(j)][static_cast<Eigen::Index>(p)] =
                    in[static_cast<std::size_t>(j)][static_cast<Eigen::Index>(p)] -
                    sum_v[grp[p]] * inv_mult[grp[p]];
        }
    };

    std::vector<Eigen::VectorXd> v(static_cast<std::size_t>(g));
    for (int it = 0; it < max_iter; ++it) {
        for (int j = 0; j < g; ++j)
            v[static_cast<std::size_t>(j)] =
                z[static_cast<std::size_t>(j)] - u[static_cast<std::size_t>(j)];
        affine_project(w, v);

        double primal_res = 0.0;
        for (int j = 0; j < g; ++j) {
            auto& wj = w[static_cast<std::size_t>(j)];
            auto& zj = z[static_cast<std::size_t>(j)];
            auto& uj = u[static_cast<std::size_t>(j)];
            zj = block_soft_threshold(wj + uj, 1.0 / rho);
            uj += wj - zj;
            primal_res = std::max(primal_res, (wj - zj).lpNorm<Eigen::Infinity>());
        }

        if (it % 4 == 3 || it == max_iter - 1) {
            // upper bound from the (always feasible) w blocks
            double ub = 0.0;
            for (int j = 0; j < g; ++j) ub += w[static_cast<std::size_t>(j)].norm();
            // multiplier estimate: average rho*u over owners, then scale into the dual ball
            nu.setZero();
            for (int j = 0; j < g; ++j) {
                const auto& grp = groups.group(j);
                for (std::size_t p = 0; p < grp.size(); ++p)
                    nu[grp[p]] +=
                        rho * u[static_cast<std::size_t>(j)][static_cast<Eigen::Index>(p)];
            }
            for (Eigen::Index i = 0; i < n; ++i) nu[i] *= inv_mult[i];
            double max_block = 0.0;
            for (int j = 0; j < g; ++j)
                max_block = std::max(max_block, block_norm(nu, groups.group(j)));
            if (max_block > 1.0) nu /= max_block;
            const double lb = nu.dot(x);
            const double gap = ub - lb;
            if (ub < best_value) {
                best_value = ub;
                best_gap = gap;
            }
            if (gap <= tol * scale && primal_res <= tol * scale) {
                for (int j = 0; j < g; ++j) {
                    const auto& grp = groups.group(j);
                    auto& part = dec.parts[static_cast<std::size_t>(j)];
                    for (std::size_t p = 0; p < grp.size(); ++p)
                        part[grp[p]] =
                            w[static_cast<std::size_t>(j)][static_cast<Eigen::Index>(p)];
                }
                dec.value = ub;
                return {ub, std::move(dec)};
            }
        }
    }
    throw GroupNormConvergenceError(
        "group_norm did not converge within " + std::to_string(max_iter) +
            " iterations (best value " + std::to_string(best_value) + ", gap " +
            std::to_string(best_gap) + ")",
        best_value, best_gap);
}

Eigen::VectorXd project_disjoint(const Eigen::VectorXd& x, const GroupBallSpec& spec) {
    check_length(x, spec.groups);
    if (!(spec.radius > 0.0)) throw ConfigError("ball radius must be positive");
    if (spec.groups.overlapping())
        throw ConfigError("groups overlap; use project_intersection for overlapping groups");
    Eigen::VectorXd z = x;
    for (int j = 0; j < spec.groups.group_count(); ++j)
        clamp_block(z, spec.groups.group(j), spec.radius);
    return z;
}

Eigen::VectorXd project_intersection(const Eigen::VectorXd& x, const GroupBallSpec& spec,
                                     double tol, int max_sweeps, IntersectionMethod method) {
    check_length(x, spec.groups);
    if (!(spec.radius > 0.0)) throw ConfigError("ball radius must be positive");
    if (!(tol > 0.0)) throw ConfigError("projection tolerance must be positive");
    if (max_sweeps < 1) throw ConfigError("max_sweeps must be at least 1");
    const int g = spec.groups.group_count();
    const double t = spec.radius;

    if (method == IntersectionMethod::AveragedCyclic) {
        // z^(j+1) on G_{j mod g} is the average (1/(j+1)) x + (j/(j+1)) clamp(z^(j));
        // a zero (or interior) block is treated as already projected.
        Eigen::VectorXd z = Eigen::VectorXd::Zero(x.size());
        long j = 0;
        for (int sweep = 0; sweep < max_sweeps; ++sweep) {
            double change = 0.0;
            for (int c = 0; c < g; ++c, ++j) {
                const auto& grp = spec.groups.group(static_cast<int>(j % g));
                Eigen::VectorXd clamped = z;
                clamp_block(clamped, grp, t);
                const double a = 1.0 / static_cast<double>(j + 1);
                for (int i : grp) {
                    const double next = a * x[i] + (1.0 - a) * clamped[i];
                    change = std::max(change, std::abs(next - z[i]));
                    z[i] = next;
                }
            }
            if (change <= tol) return z;
        }
        double residual = 0.0;
        for (int c = 0; c < g; ++c)
            residual = std::max(residual, block_norm(z, spec.groups.group(c)) - t);
        throw ProjectionConvergenceError("averaged cyclic projection did not converge within " +
                                             std::to_string(max_sweeps) + " sweeps",
                                         std::move(z), residual);
    }

    // Dykstra: project cyclically onto each ball, carrying a correction term
    // per set so the limit is the Euclidean projection, not just a point of
    // the intersection.
    Eigen::VectorXd v = x;
    std::vector<Eigen::VectorXd> corr(static_cast<std::size_t>(g));
    for (int j = 0; j < g; ++j)
        corr[static_cast<std::size_t>(j)] =
            Eigen::VectorXd::Zero(static_cast<Eigen::Index>(spec.groups.group(j).size()));

    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double change = 0.0;
        for (int j = 0; j < g; ++j) {
            const auto& grp = spec.groups.group(j);
            auto& p = corr[static_cast<std::size_t>(j)];
            double norm2 = 0.0;
            for (std::size_t q = 0; q < grp.size(); ++q) {
                const double a = v[grp[q]] + p[static_cast<Eigen::Index>(q)];
                p[static_cast<Eigen::Index>(q)] = a;  // reuse as scratch for v+p
                norm2 += a * a;
            }
            const double norm = std::sqrt(norm2);
            const double s = norm > t ? t / norm : 1.0;
            for (std::size_t q = 0; q < grp.size(); ++q) {
                const double a = p[static_cast<Eigen::Index>(q)];
                const double b = s * a;  // projection of v+p onto this ball
                change = std::max(change, std::abs(b - v[grp[q]]));
                p[static_cast<Eigen::Index>(q)] = a - b;
                v[grp[q]] = b;
            }
        }
        if (change <= tol) return v;
    }
    double residual = 0.0;
    for (int j = 0; j < g; ++j)
        residual = std::max(residual, block_norm(v, spec.groups.group(j)) - t);
    throw ProjectionConvergenceError(
        "Dykstra projection did not converge within " + std::to_string(max_sweeps) + " sweeps",
        std::move(v), residual);
}

Eigen::VectorXd prox_group_norm(const Eigen::VectorXd& x, const GroupStructure& groups, double t,
                                double tol, int max_sweeps, IntersectionMethod method) {
    if (!(t > 0.0)) throw ConfigError("prox weight t must be positive");
    check_length(x, groups);
    if (!groups.overlapping()) {
        // disjoint groups: block soft-threshold, with the exact scalar form
        // sign(x)(|x| - t) for singleton blocks
        Eigen::VectorXd out = Eigen::VectorXd::Zero(x.size());
        for (int j = 0; j < groups.group_count(); ++j) {
            const auto& grp = groups.group(j);
            if (grp.size() == 1) {
                const double v = x[grp.front()];
                out[grp.front()] = v > t ? v - t : (v < -t ? v + t : 0.0);
                continue;
            }
            const double n = block_norm(x, grp);
            if (n > t) {
                const double s = 1.0 - t / n;
                for (int i : grp) out[i] = s * x[i];
            }
        }
        return out;
    }
    return x - project_intersection(x, GroupBallSpec{groups, t}, tol, max_sweeps, method);
}

}  // namespace gsmtl
