#include "gsmtl/matrixio.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "gsmtl/errors.hpp"

namespace gsmtl {

std::string matrix_to_csv(const Eigen::MatrixXd& M) {
    std::ostringstream out;
    out << "# rows=" << M.rows() << " cols=" << M.cols() << "\n";
    char buf[40];
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        for (Eigen::Index j = 0; j < M.cols(); ++j) {
            if (j) out << ',';
            std::snprintf(buf, sizeof(buf), "%.17g", M(i, j));
            out << buf;
        }
        out << "\n";
    }
    return out.str();
}

Eigen::MatrixXd matrix_from_csv_string(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw DataError("matrix CSV is empty");
    long rows = 0, cols = 0;
    if (std::sscanf(line.c_str(), "# rows=%ld cols=%ld", &rows, &cols) != 2 || rows < 0 ||
        cols < 0)
        throw DataError("matrix CSV must start with '# rows=R cols=C', got '" + line + "'");
    Eigen::MatrixXd M(rows, cols);
    for (long i = 0; i < rows; ++i) {
        if (!std::getline(in, line))
            throw DataError("matrix CSV ends after " + std::to_string(i) + " of " +
                            std::to_string(rows) + " rows");
        const char* p = line.data();
        const char* end = line.data() + line.size();
        for (long j = 0; j < cols; ++j) {
            double v = 0.0;
            const auto res = std::from_chars(p, end, v);
            if (res.ec != std::errc())
                throw DataError("matrix CSV row " + std::to_string(i + 1) +
                                ": cannot parse column " + std::to_string(j + 1));
            M(i, j) = v;
            p = res.ptr;
            if (j + 1 < cols) {
                if (p == end || *p != ',')
                    throw DataError("matrix CSV row " + std::to_string(i + 1) + ": expected " +
                                    std::to_string(cols) + " columns");
                ++p;
            }
        }
    }
    return M;
}

Eigen::MatrixXd load_matrix_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open matrix file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return matrix_from_csv_string(buf.str());
}

std::string matrix_to_pgm(const Eigen::MatrixXd& M) {
    const double maxabs = M.size() ? M.cwiseAbs().maxCoeff() : 0.0;
    std::ostringstream out;
    out << "P2\n" << M.cols() << " " << M.rows() << "\n255\n";
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        for (Eigen::Index j = 0; j < M.cols(); ++j) {
            int v = 0;
            if (maxabs > 0.0)
                v = static_cast<int>(std::lround(255.0 * std::abs(M(i, j)) / maxabs));
            out << (j ? " " : "") << v;
        }
        out << "\n";
    }
    return out.str();
}

void atomic_write(const std::filesystem::path& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path dir = path.parent_path().empty() ? fs::path(".") : path.parent_path();
    std::error_code ec;
    fs::create_directories(dir, ec);
    const fs::path tmp = dir / (path.filename().string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + tmp.string());
        out << content;
        if (!out) throw IoError("failed while writing " + tmp.string());
    }
    fs::rename(tmp, path, ec);
    if (ec) throw IoError("cannot move " + tmp.string() + " to " + path.string() + ": " +
                            ec.message());
}

}  // namespace gsmtl
