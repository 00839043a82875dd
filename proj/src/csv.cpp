#include "rotkit/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "rotkit/errors.hpp"

namespace rotkit::io {

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

int CsvTable::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return static_cast<int>(i);
    return -1;
}

namespace {

std::vector<std::string> split_commas(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

} // namespace

CsvTable read_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw DataError("cannot open csv: " + path);
    CsvTable t;
    std::string line;
    bool have_header = false;
    long lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            t.comments.push_back(line);
            continue;
        }
        auto cells = split_commas(line);
        if (!have_header) {
            t.header = cells;
            have_header = true;
        } else {
            if (cells.size() != t.header.size())
                throw DataError("csv " + path + " line " + std::to_string(lineno) +
                                ": expected " + std::to_string(t.header.size()) +
                                " columns, got " + std::to_string(cells.size()));
            t.rows.push_back(std::move(cells));
        }
    }
    if (!have_header) throw DataError("csv " + path + ": missing header row");
    return t;
}

void write_csv(const std::string& path, const CsvTable& table) {
    std::ofstream f(path);
    if (!f) throw DataError("cannot write csv: " + path);
    for (const auto& c : table.comments) f << c << "\n";
    for (std::size_t i = 0; i < table.header.size(); ++i)
        f << (i ? "," : "") << table.header[i];
    f << "\n";
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
            f << (i ? "," : "") << row[i];
        f << "\n";
    }
}

RepFile read_rep_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw DataError("cannot open representation file: " + path);
    RepFile rf;
    std::string line;
    long lineno = 0;
    bool have_header = false;
    int dim = 0;
    while (std::getline(f, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            if (have_header) continue;
            // Parse `# rep=<tag> order=<fields>`.
            std::istringstream ss(line.substr(1));
            std::string tok;
            std::string tag;
            while (ss >> tok) {
                if (tok.rfind("rep=", 0) == 0) tag = tok.substr(4);
            }
            if (tag.empty())
                throw DataError(path + " line " + std::to_string(lineno) +
                                ": header lacks rep=<tag>");
            rf.kind = rep_kind_from_tag(tag);
            dim = rep_dim(rf.kind);
            have_header = true;
            continue;
        }
        if (!have_header)
            throw DataError(path + " line " + std::to_string(lineno) +
                            ": data before `# rep=...` header");
        auto cells = split_commas(line);
        if (static_cast<int>(cells.size()) != dim)
            throw DataError(path + " line " + std::to_string(lineno) + ": expected " +
                            std::to_string(dim) + " fields, got " +
                            std::to_string(cells.size()));
        std::vector<double> row(dim);
        for (int i = 0; i < dim; ++i) {
            try {
                std::size_t pos = 0;
                row[i] = std::stod(cells[i], &pos);
                if (pos != cells[i].size()) throw std::invalid_argument("trailing");
            } catch (const std::exception&) {
                throw DataError(path + " line " + std::to_string(lineno) +
                                ": bad number '" + cells[i] + "'");
            }
        }
        rf.rows.push_back(std::move(row));
    }
    if (!have_header)
        throw DataError(path + ": missing `# rep=<tag> order=...` header");
    return rf;
}

void write_rep_csv(const std::string& path, RepKind kind,
                   const std::vector<std::vector<double>>& rows) {
    std::ofstream f(path);
    if (!f) throw DataError("cannot write representation file: " + path);
    f << "# rep=" << rep_tag(kind) << " order=" << rep_field_order(kind) << "\n";
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
            f << (i ? "," : "") << format_double(row[i]);
        f << "\n";
    }
}

} // namespace rotkit::io
