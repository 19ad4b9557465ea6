#pragma once

#include <string>
#include <vector>

#include "mgarch/types.hpp"

namespace mgarch {

struct ReturnsPanel {
    MatrixXd y;
    std::vector<std::string> names;
    long zero_filled = 0;   ///< cells missing in some but not all columns
    long dropped_rows = 0;  ///< rows missing in every column
};

enum class MissingPolicy {
    DropCommonZeroFill,  ///< drop all-missing rows, zero-fill the rest
    Error,               ///< any missing cell is an input error
};

struct LoadOptions {
    bool center = false;  ///< demean each column after missing handling
    MissingPolicy missing = MissingPolicy::DropCommonZeroFill;
};

/// Reads a CSV with a header row of series names and one row per period.
/// Empty cells are missing values. Throws ParseError with the offending
/// row/column, or EmptyPanel when nothing remains.
ReturnsPanel load_panel(const std::string& path, const LoadOptions& options = {});

/// Parses CSV text directly (used by the loader and the tests).
ReturnsPanel parse_panel_csv(const std::string& text, const LoadOptions& options = {});

/// Writes a panel in the same format with full double precision.
std::string panel_to_csv(const MatrixXd& y, const std::vector<std::string>& names = {});
void write_file(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

}  // namespace mgarch
