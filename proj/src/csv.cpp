#include "ohs/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "ohs/errors.hpp"

namespace ohs {

namespace {

std::vector<std::string> split_commas(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

std::string strip(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace

int CsvTable::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return static_cast<int>(i);
    return -1;
}

CsvTable read_csv(const std::string& path, const std::vector<std::string>& expected_header) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open CSV file: " + path);

    CsvTable table;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string trimmed = strip(line);
        if (trimmed.empty()) continue;
        auto fields = split_commas(trimmed);
        if (lineno == 1) {
            for (auto& f : fields) f = strip(f);
            table.header = fields;
            if (!expected_header.empty() && table.header != expected_header) {
                std::string want;
                for (std::size_t i = 0; i < expected_header.size(); ++i)
                    want += (i ? "," : "") + expected_header[i];
                throw IoError(path + ": line 1: expected header `" + want + "`, got `" +
                              trimmed + "`");
            }
            continue;
        }
        if (fields.size() != table.header.size()) {
            throw IoError(path + ": line " + std::to_string(lineno) + ": expected " +
                          std::to_string(table.header.size()) + " fields, got " +
                          std::to_string(fields.size()));
        }
        std::vector<double> row(fields.size());
        for (std::size_t i = 0; i < fields.size(); ++i) {
            const std::string f = strip(fields[i]);
            char* end = nullptr;
            row[i] = std::strtod(f.c_str(), &end);
            if (end == f.c_str() || *end != '\0') {
                throw IoError(path + ": line " + std::to_string(lineno) +
                              ": not a number: `" + f + "`");
            }
        }
        table.rows.push_back(std::move(row));
    }
    if (table.header.empty()) throw IoError(path + ": line 1: missing header");
    return table;
}

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write CSV file: " + path);
    for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
    out << "\n";
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
            out << (i ? "," : "") << format_double(row[i]);
        out << "\n";
    }
}

}  // namespace ohs
