// CSV sample sets: training rows grow the decision tree, inference rows feed
// the cost benchmark. Labels are carried for accuracy reporting only — the
// compiler itself never reads them.
#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "nn2flow/model.hpp"
#include "nn2flow/util.hpp"

namespace nn2flow {

enum class DatasetRole { Train, Infer };

struct DatasetRow {
    std::vector<std::int64_t> x;
    int label = 0;
};

struct Dataset {
    std::vector<DatasetRow> rows;
    DatasetRole role = DatasetRole::Train;

    std::size_t size() const { return rows.size(); }
    bool empty() const { return rows.empty(); }
};

namespace detail {

inline std::int64_t parse_int_cell(const std::string& cell, std::size_t line_no) {
    std::size_t begin = cell.find_first_not_of(" \t\r");
    std::size_t end = cell.find_last_not_of(" \t\r");
    if (begin == std::string::npos)
        throw SchemaError("csv: line " + std::to_string(line_no) + ": empty cell");
    std::int64_t value = 0;
    auto [ptr, ec] = std::from_chars(cell.data() + begin, cell.data() + end + 1, value);
    if (ec != std::errc() || ptr != cell.data() + end + 1)
        throw SchemaError("csv: line " + std::to_string(line_no) + ": non-integer cell '" +
                          cell.substr(begin, end - begin + 1) + "'");
    return value;
}

}  // namespace detail

// Rows are input_dim feature columns then one label column, all integers.
// Every rejected row names its line number.
inline Dataset parse_csv(std::istream& in, const QuantizedMLP& net, DatasetRole role,
                         bool skip_header = false) {
    Dataset ds;
    ds.role = role;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (skip_header && line_no == 1) continue;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::vector<std::string> cells;
        std::size_t start = 0;
        while (true) {
            std::size_t comma = line.find(',', start);
            cells.push_back(line.substr(start, comma - start));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (static_cast<int>(cells.size()) != net.input_dim + 1)
            throw SchemaError("csv: line " + std::to_string(line_no) + ": expected " +
                              std::to_string(net.input_dim + 1) + " columns, got " +
                              std::to_string(cells.size()));
        DatasetRow row;
        for (int i = 0; i < net.input_dim; ++i) {
            std::int64_t v = detail::parse_int_cell(cells[static_cast<std::size_t>(i)], line_no);
            const auto& [lo, hi] = net.input_domain[static_cast<std::size_t>(i)];
            if (v < lo || v > hi)
                throw DomainError("csv: line " + std::to_string(line_no) + ": feature " +
                                  std::to_string(i) + " value " + std::to_string(v) +
                                  " outside domain [" + std::to_string(lo) + ", " +
                                  std::to_string(hi) + "]");
            row.x.push_back(v);
        }
        std::int64_t label = detail::parse_int_cell(cells.back(), line_no);
        if (label < 0 || label >= net.class_count())
            throw DomainError("csv: line " + std::to_string(line_no) + ": label " +
                              std::to_string(label) + " not a class index (classes: " +
                              std::to_string(net.class_count()) + ")");
        row.label = static_cast<int>(label);
        ds.rows.push_back(std::move(row));
    }
    return ds;
}

inline Dataset load_csv(const std::string& path, const QuantizedMLP& net, DatasetRole role,
                        bool skip_header = false) {
    std::ifstream in(path);
    if (!in) throw IoError("csv: cannot open '" + path + "'");
    return parse_csv(in, net, role, skip_header);
}

inline std::string write_csv(const Dataset& ds) {
    std::string out;
    for (const auto& row : ds.rows) {
        for (const auto& v : row.x) {
            out += std::to_string(v);
            out += ',';
        }
        out += std::to_string(row.label);
        out += '\n';
    }
    return out;
}

// Componentwise min/max of the observed features; a diagnostic for comparing
// data coverage against the declared domain.
inline std::vector<std::pair<std::int64_t, std::int64_t>> infer_input_box(const Dataset& ds) {
    if (ds.empty()) throw DomainError("infer_input_box: empty dataset");
    std::vector<std::pair<std::int64_t, std::int64_t>> box(
        ds.rows.front().x.size(),
        {std::numeric_limits<std::int64_t>::max(), std::numeric_limits<std::int64_t>::min()});
    for (const auto& row : ds.rows)
        for (std::size_t i = 0; i < row.x.size(); ++i) {
            box[i].first = std::min(box[i].first, row.x[i]);
            box[i].second = std::max(box[i].second, row.x[i]);
        }
    return box;
}

}  // namespace nn2flow
