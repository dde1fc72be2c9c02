#include "cpband/io.hpp"

#include <cstdio>
#include <fstream>

namespace cpband {

std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

std::ofstream open_or_throw(const std::filesystem::path& path) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary);  // binary: no platform newline surprises
    if (!out) throw Error("cannot open output file: " + path.string());
    return out;
}

} // namespace

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
    std::vector<std::vector<std::string>> cells;
    cells.reserve(rows.size());
    for (const auto& row : rows) {
        std::vector<std::string> line;
        line.reserve(row.size());
        for (double v : row) line.push_back(format_g17(v));
        cells.push_back(std::move(line));
    }
    write_csv_rows(path, header, cells);
}

void write_csv_rows(const std::filesystem::path& path, const std::vector<std::string>& header,
                    const std::vector<std::vector<std::string>>& rows) {
    std::ofstream out = open_or_throw(path);
    for (std::size_t i = 0; i < header.size(); ++i) {
        out << (i ? "," : "") << header[i];
    }
    out << '\n';
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            out << (i ? "," : "") << row[i];
        }
        out << '\n';
    }
    if (!out) throw Error("write failed: " + path.string());
}

void write_matrix_market(const std::filesystem::path& path, const SparseMat& mat) {
    std::ofstream out = open_or_throw(path);
    out << "%%MatrixMarket matrix coordinate real general\n";
    out << mat.rows() << ' ' << mat.cols() << ' ' << mat.nonZeros() << '\n';
    for (Index r = 0; r < mat.outerSize(); ++r) {
        for (SparseMat::InnerIterator it(mat, r); it; ++it) {
            out << it.row() + 1 << ' ' << it.col() + 1 << ' ' << format_g17(it.value()) << '\n';
        }
    }
    if (!out) throw Error("write failed: " + path.string());
}

void write_matrix_market_diagonal(const std::filesystem::path& path, const Eigen::VectorXd& diag) {
    std::ofstream out = open_or_throw(path);
    out << "%%MatrixMarket matrix coordinate real general\n";
    const Index n = diag.size();
    out << n << ' ' << n << ' ' << n << '\n';
    for (Index i = 0; i < n; ++i) {
        out << i + 1 << ' ' << i + 1 << ' ' << format_g17(diag[i]) << '\n';
    }
    if (!out) throw Error("write failed: " + path.string());
}

} // namespace cpband
