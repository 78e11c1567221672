#pragma once

#include <string>
#include <vector>

#include "kboost/common.hpp"

namespace kboost {

// Parsed rectangular file: every row has the same number of cells.
struct CsvTable {
    std::vector<std::string> header;
    Matrix values;  // numeric cells, row-major layout matches the file

    Index column(const std::string& name) const;  // throws DataError if absent
};

CsvTable read_csv(const std::string& path);

// Column mapping of the form "y=obs;U=u0,u1,u2" or "y=obs;x=x0,x1" or
// "label=cls;x=x0,x1". Exactly one output key and one input key.
struct ColumnSchema {
    std::string output;               // y or label column
    bool labels = false;              // output holds +-1 classes
    std::vector<std::string> design;  // U columns, empty when pointwise
    std::vector<std::string> inputs;  // x columns, empty when a design is given
};

ColumnSchema parse_schema(const std::string& text);

// Estimation-ready data pulled out of a table. Either the design matrix U is
// set (linear observation model) or the input points are (kernel methods).
struct EstimationProblem {
    Matrix design;
    Matrix inputs;
    Vector y;
    bool labels = false;
};

// subtract_mean de-trends every mapped numeric column (labels excluded).
EstimationProblem ingest_csv(const CsvTable& table, const ColumnSchema& schema,
                             bool subtract_mean = false);

}  // namespace kboost
