#pragma once

#include <string>
#include <vector>

#include "rotkit/representations.hpp"

namespace rotkit::io {

/// 17 significant digits, enough to round-trip a double exactly.
std::string format_double(double v);

/// Generic comma-separated table with a mandatory header row. Lines starting
/// with '#' are passed through as comments when reading.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> comments;

    int column(const std::string& name) const; // -1 when absent
};

CsvTable read_csv(const std::string& path);
void write_csv(const std::string& path, const CsvTable& table);

/// Representation sample file: `# rep=<tag> order=<field list>` then one row
/// of 17-significant-digit decimals per sample.
struct RepFile {
    RepKind kind = RepKind::quat;
    std::vector<std::vector<double>> rows;
};

RepFile read_rep_csv(const std::string& path);
void write_rep_csv(const std::string& path, RepKind kind,
                   const std::vector<std::vector<double>>& rows);

} // namespace rotkit::io
