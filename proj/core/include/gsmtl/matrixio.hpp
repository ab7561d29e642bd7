#pragma once

#include <Eigen/Core>

#include <filesystem>
#include <string>

namespace gsmtl {

/// Matrix CSV: a `# rows=R cols=C` header line, then R comma-separated rows
/// with round-trip-exact doubles.
std::string matrix_to_csv(const Eigen::MatrixXd& M);
Eigen::MatrixXd matrix_from_csv_string(const std::string& text);
Eigen::MatrixXd load_matrix_csv(const std::filesystem::path& path);

/// Plain PGM (P2, max value 255): |M| scaled linearly so the largest entry
/// maps to 255. Columns run along x, rows along y. An all-zero matrix
/// produces an all-black image.
std::string matrix_to_pgm(const Eigen::MatrixXd& M);

/// Writes content to a temporary file in the target directory and renames it
/// into place, so interrupted runs never leave partial files with final names.
void atomic_write(const std::filesystem::path& path, const std::string& content);

}  // namespace gsmtl
