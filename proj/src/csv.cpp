#include "kboost/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <vector>

namespace kboost {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream is(line);
    while (std::getline(is, cell, sep)) out.push_back(trim(cell));
    if (!line.empty() && line.back() == sep) out.push_back("");
    return out;
}

double parse_cell(const std::string& cell, const std::string& path, Index line,
                  const std::string& column) {
    double v = 0.0;
    const char* first = cell.data();
    const char* last = first + cell.size();
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) {
        std::ostringstream os;
        os << path << ":" << line << ": non-numeric cell \"" << cell << "\" in column \""
           << column << "\"";
        throw DataError(os.str());
    }
    return v;
}

}  // namespace

Index CsvTable::column(const std::string& name) const {
    Index found = -1;
    for (Index j = 0; j < static_cast<Index>(header.size()); ++j) {
        if (header[j] != name) continue;
        if (found >= 0) throw DataError("csv: column \"" + name + "\" appears more than once");
        found = j;
    }
    if (found < 0) throw DataError("csv: no column named \"" + name + "\"");
    return found;
}

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("csv: cannot open " + path);

    CsvTable table;
    std::string line;
    Index lineno = 0;
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const auto cells = split(line, ',');
        if (table.header.empty()) {
            table.header = cells;
            continue;
        }
        if (cells.size() != table.header.size()) {
            std::ostringstream os;
            os << path << ":" << lineno << ": expected " << table.header.size()
               << " cells, found " << cells.size();
            throw DataError(os.str());
        }
        std::vector<double> row(cells.size());
        for (size_t j = 0; j < cells.size(); ++j)
            row[j] = parse_cell(cells[j], path, lineno, table.header[j]);
        rows.push_back(std::move(row));
    }
    if (table.header.empty()) throw DataError("csv: " + path + " has no header row");

    table.values.resize(static_cast<Index>(rows.size()), static_cast<Index>(table.header.size()));
    for (Index i = 0; i < table.values.rows(); ++i)
        for (Index j = 0; j < table.values.cols(); ++j)
            table.values(i, j) = rows[static_cast<size_t>(i)][static_cast<size_t>(j)];
    return table;
}

ColumnSchema parse_schema(const std::string& text) {
    ColumnSchema schema;
    bool have_output = false;
    bool have_predictors = false;
    for (const auto& clause : split(text, ';')) {
        if (clause.empty()) continue;
        const auto eq = clause.find('=');
        if (eq == std::string::npos)
            throw ConfigError("schema: clause \"" + clause + "\" is not key=columns");
        const std::string key = trim(clause.substr(0, eq));
        const auto cols = split(clause.substr(eq + 1), ',');
        if (cols.empty() || cols[0].empty())
            throw ConfigError("schema: key \"" + key + "\" names no columns");
        if (key == "y" || key == "label") {
            if (have_output) throw ConfigError("schema: more than one output clause");
            if (cols.size() != 1) throw ConfigError("schema: " + key + " takes a single column");
            schema.output = cols[0];
            schema.labels = key == "label";
            have_output = true;
        } else if (key == "U" || key == "x") {
            if (have_predictors) throw ConfigError("schema: more than one predictor clause");
            (key == "U" ? schema.design : schema.inputs) = cols;
            have_predictors = true;
        } else {
            throw ConfigError("schema: unknown key \"" + key + "\" (expected y, label, U, or x)");
        }
    }
    if (!have_output) throw ConfigError("schema: missing y= or label= clause");
    if (!have_predictors) throw ConfigError("schema: missing U= or x= clause");
    return schema;
}

EstimationProblem ingest_csv(const CsvTable& table, const ColumnSchema& schema,
                             bool subtract_mean) {
    EstimationProblem p;
    p.labels = schema.labels;
    const Index n = table.values.rows();
    if (n == 0) throw DataError("csv: table has no data rows");

    p.y = table.values.col(table.column(schema.output));
    if (schema.labels) {
        for (Index i = 0; i < n; ++i)
            if (p.y[i] != 1.0 && p.y[i] != -1.0)
                throw DataError("csv: label column \"" + schema.output + "\" has a value other "
                                "than +-1 at data row " + std::to_string(i + 1));
    } else if (subtract_mean) {
        p.y.array() -= p.y.mean();
    }

    const auto& names = schema.design.empty() ? schema.inputs : schema.design;
    Matrix block(n, static_cast<Index>(names.size()));
    for (size_t j = 0; j < names.size(); ++j) {
        block.col(static_cast<Index>(j)) = table.values.col(table.column(names[j]));
        if (subtract_mean) block.col(static_cast<Index>(j)).array() -= block.col(static_cast<Index>(j)).mean();
    }
    (schema.design.empty() ? p.inputs : p.design) = std::move(block);
    return p;
}

}  // namespace kboost
