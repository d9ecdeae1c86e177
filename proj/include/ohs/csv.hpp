#pragma once

#include <string>
#include <vector>

namespace ohs {

/// Minimal CSV support for the fixed comma-separated formats this project
/// reads and writes. No quoting; parse errors carry 1-based line numbers.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    int column(const std::string& name) const;  // -1 when absent
};

/// Read a CSV file and require the exact header columns given (order and
/// count must match). Throws IoError with the offending line number.
CsvTable read_csv(const std::string& path, const std::vector<std::string>& expected_header);

/// Write rows with a header. Values are formatted with %.17g so re-runs
/// are byte-identical.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

std::string format_double(double x);

}  // namespace ohs
