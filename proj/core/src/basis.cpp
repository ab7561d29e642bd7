#include "gsmtl/basis.hpp"

#include <cmath>

namespace gsmtl {

namespace {

void check_finite(const Eigen::MatrixXd& X, const char* what) {
    for (Eigen::Index i = 0; i < X.rows(); ++i)
        for (Eigen::Index j = 0; j < X.cols(); ++j)
            if (!std::isfinite(X(i, j)))
                throw DataError(std::string(what) + " produced a non-finite value at row " +
                                std::to_string(i) + ", column " + std::to_string(j));
}

}  // namespace

Eigen::MatrixXd basis_expand(const Eigen::MatrixXd& X, const BasisSpec& basis) {
    const Eigen::Index n = X.rows();
    const Eigen::Index d = X.cols();
    switch (basis.kind) {
        case BasisSpec::Kind::Identity:
            return X;
        case BasisSpec::Kind::PolynomialDegree2: {
            const Eigen::Index dp = d + d * (d + 1) / 2;
            Eigen::MatrixXd out(n, dp);
            out.leftCols(d) = X;
            Eigen::Index c = d;
            for (Eigen::Index i = 0; i < d; ++i)
                for (Eigen::Index j = i; j < d; ++j, ++c)
                    out.col(c) = X.col(i).cwiseProduct(X.col(j));
            check_finite(out, "degree-2 expansion");
            return out;
        }
        case BasisSpec::Kind::PerColumnMaps: {
            if (static_cast<Eigen::Index>(basis.column_maps.size()) != d)
                throw DimensionError("basis supplies " + std::to_string(basis.column_maps.size()) +
                                     " column maps for " + std::to_string(d) + " columns");
            Eigen::MatrixXd out(n, d);
            for (Eigen::Index j = 0; j < d; ++j) {
                const auto& f = basis.column_maps[static_cast<std::size_t>(j)];
                for (Eigen::Index i = 0; i < n; ++i) out(i, j) = f(X(i, j));
            }
            check_finite(out, "per-column map");
            return out;
        }
    }
    throw ConfigError("unknown basis kind");
}

}  // namespace gsmtl
