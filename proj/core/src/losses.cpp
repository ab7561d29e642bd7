#include "gsmtl/losses.hpp"

#include <cmath>

namespace gsmtl {

namespace {

void check_label(double y) {
    if (y != 1.0 && y != -1.0)
        throw DataError("classification label must be -1 or +1, got " + std::to_string(y));
}

}  // namespace

double loss_value(ProblemKind kind, double z, double y) {
    if (kind == ProblemKind::Regression) {
        const double r = z - y;
        return r * r;
    }
    check_label(y);
    // log(1 + exp(-m)) = log1p(exp(-|m|)) + max(0, -m), stable for large |m|
    const double m = y * z;
    return std::log1p(std::exp(-std::abs(m))) + std::max(0.0, -m);
}

double loss_derivative(ProblemKind kind, double z, double y) {
    if (kind == ProblemKind::Regression) return 2.0 * (z - y);
    check_label(y);
    // d/dz log(1 + exp(-y z)) = -y / (1 + exp(y z))
    const double m = y * z;
    if (m >= 0.0) {
        const double e = std::exp(-m);
        return -y * e / (1.0 + e);
    }
    return -y / (1.0 + std::exp(m));
}

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

}  // namespace gsmtl
