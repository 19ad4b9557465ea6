#include "mgarch/panel.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace mgarch {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            cells.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    cells.push_back(cur);
    return cells;
}

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

}  // namespace

ReturnsPanel parse_panel_csv(const std::string& text, const LoadOptions& options) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw EmptyPanel("panel: empty input");
    ReturnsPanel panel;
    for (const auto& cell : split_csv_line(line)) panel.names.push_back(trim(cell));
    const std::size_t m = panel.names.size();
    if (m == 0) throw EmptyPanel("panel: header has no columns");

    const double nan = std::numeric_limits<double>::quiet_NaN();
    std::vector<std::vector<double>> rows;
    long line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != m)
            throw ParseError("panel: row " + std::to_string(line_no) + " has " +
                             std::to_string(cells.size()) + " cells, expected " + std::to_string(m));
        std::vector<double> row(m, nan);
        std::size_t missing = 0;
        for (std::size_t j = 0; j < m; ++j) {
            const std::string cell = trim(cells[j]);
            if (cell.empty()) {
                ++missing;
                continue;
            }
            try {
                std::size_t used = 0;
                row[j] = std::stod(cell, &used);
                if (used != cell.size()) throw std::invalid_argument(cell);
            } catch (...) {
                throw ParseError("panel: cannot parse cell at row " + std::to_string(line_no) +
                                 ", column " + std::to_string(j + 1));
            }
            if (!std::isfinite(row[j]))
                throw ParseError("panel: non-finite value at row " + std::to_string(line_no) +
                                 ", column " + std::to_string(j + 1));
        }
        if (missing == m) {
            if (options.missing == MissingPolicy::Error)
                throw ParseError("panel: fully missing row " + std::to_string(line_no));
            ++panel.dropped_rows;
            continue;
        }
        if (missing > 0) {
            if (options.missing == MissingPolicy::Error)
                throw ParseError("panel: missing cell in row " + std::to_string(line_no));
            for (std::size_t j = 0; j < m; ++j)
                if (std::isnan(row[j])) {
                    row[j] = 0.0;
                    ++panel.zero_filled;
                }
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw EmptyPanel("panel: no data rows");

    panel.y.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(m));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < m; ++j)
            panel.y(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    if (options.center)
        panel.y.rowwise() -= panel.y.colwise().mean();
    return panel;
}

ReturnsPanel load_panel(const std::string& path, const LoadOptions& options) {
    return parse_panel_csv(read_file(path), options);
}

std::string panel_to_csv(const MatrixXd& y, const std::vector<std::string>& names) {
    std::string out;
    for (Eigen::Index j = 0; j < y.cols(); ++j) {
        if (j) out += ',';
        out += (j < static_cast<Eigen::Index>(names.size())) ? names[static_cast<std::size_t>(j)]
                                                             : "y" + std::to_string(j + 1);
    }
    out += '\n';
    char buf[64];
    for (Eigen::Index i = 0; i < y.rows(); ++i) {
        for (Eigen::Index j = 0; j < y.cols(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", y(i, j));
            if (j) out += ',';
            out += buf;
        }
        out += '\n';
    }
    return out;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot open for writing: " + path);
    out << content;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace mgarch
