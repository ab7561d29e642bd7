#pragma once

#include "gsmtl/types.hpp"

namespace gsmtl {

/// Squared loss (z - y)^2 for regression; logistic loss log(1 + exp(-y*z))
/// for classification, evaluated in an overflow-safe form. Classification
/// labels must be -1 or +1.
double loss_value(ProblemKind kind, double z, double y);

/// Derivative of the loss in its prediction argument z.
double loss_derivative(ProblemKind kind, double z, double y);

/// 1 / (1 + exp(-z)), overflow-safe. Maps a classification score to a probability.
double sigmoid(double z);

}  // namespace gsmtl
