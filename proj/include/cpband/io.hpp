#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "cpband/operators.hpp"

namespace cpband {

// Shortest representation that round-trips a double (17 significant digits);
// all CSV output goes through this so reruns are byte-identical.
std::string format_g17(double v);

// Writes a CSV table with the given header; every cell is format_g17'ed.
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

// Same, with preformatted cells (empty cells stay empty).
void write_csv_rows(const std::filesystem::path& path, const std::vector<std::string>& header,
                    const std::vector<std::vector<std::string>>& rows);

// Matrix Market coordinate format (1-based, general real).
void write_matrix_market(const std::filesystem::path& path, const SparseMat& mat);
void write_matrix_market_diagonal(const std::filesystem::path& path, const Eigen::VectorXd& diag);

} // namespace cpband
