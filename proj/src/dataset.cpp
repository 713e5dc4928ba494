#include "semiknock/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace semiknock {

void TabularDataset::validate() const {
    if (n() < 2) {
        throw std::invalid_argument("dataset needs at least 2 rows, got " + std::to_string(n()));
    }
    if (p() < 1) {
        throw std::invalid_argument("dataset needs at least 1 feature column");
    }
    if (response.size() != n()) {
        throw std::invalid_argument("response length does not match row count");
    }
    if (!inputs.allFinite() || !response.allFinite()) {
        throw std::invalid_argument("dataset contains non-finite entries");
    }
    if (!column_names.empty() && static_cast<Eigen::Index>(column_names.size()) != p()) {
        throw std::invalid_argument("column_names length does not match feature count");
    }
    if (task_kind == TaskKind::binary_classification) {
        for (Eigen::Index i = 0; i < n(); ++i) {
            if (response[i] != 0.0 && response[i] != 1.0) {
                throw std::invalid_argument("binary classification response must be in {0,1}");
            }
        }
    }
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        out.push_back(cell);
    }
    if (!line.empty() && line.back() == ',') {
        out.emplace_back();
    }
    return out;
}

double parse_cell(const std::string& cell, std::size_t row, const std::string& column) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(cell, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    // allow trailing whitespace only
    while (pos < cell.size() && std::isspace(static_cast<unsigned char>(cell[pos]))) {
        ++pos;
    }
    if (pos != cell.size() || cell.empty()) {
        throw std::invalid_argument("non-numeric cell '" + cell + "' in column '" + column +
                                    "', data row " + std::to_string(row));
    }
    return v;
}

}  // namespace

TabularDataset load_dataset(const std::string& path, const std::string& target_column) {
    std::ifstream in(path);
    if (!in) {
        throw std::invalid_argument("cannot open file: " + path);
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw std::invalid_argument("empty file: " + path);
    }
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    const std::vector<std::string> header = split_line(line);
    std::ptrdiff_t target_idx = -1;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == target_column) {
            target_idx = static_cast<std::ptrdiff_t>(i);
            break;
        }
    }
    if (target_idx < 0) {
        throw std::invalid_argument("target column '" + target_column + "' not found in " + path);
    }

    std::vector<std::vector<double>> rows;
    std::size_t row_number = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        ++row_number;
        const std::vector<std::string> cells = split_line(line);
        if (cells.size() != header.size()) {
            throw std::invalid_argument("row " + std::to_string(row_number) + " has " +
                                        std::to_string(cells.size()) + " cells, expected " +
                                        std::to_string(header.size()));
        }
        std::vector<double> vals(cells.size());
        for (std::size_t i = 0; i < cells.size(); ++i) {
            vals[i] = parse_cell(cells[i], row_number, header[i]);
        }
        rows.push_back(std::move(vals));
    }
    if (rows.size() < 2) {
        throw std::invalid_argument("dataset needs at least 2 rows, got " +
                                    std::to_string(rows.size()));
    }
    const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
    const Eigen::Index p = static_cast<Eigen::Index>(header.size()) - 1;
    if (p < 1) {
        throw std::invalid_argument("dataset needs at least 1 feature column");
    }

    TabularDataset data;
    data.inputs.resize(n, p);
    data.response.resize(n);
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (static_cast<std::ptrdiff_t>(i) != target_idx) {
            data.column_names.push_back(header[i]);
        }
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        Eigen::Index c = 0;
        for (std::size_t jj = 0; jj < rows[i].size(); ++jj) {
            if (static_cast<std::ptrdiff_t>(jj) == target_idx) {
                data.response[i] = rows[i][jj];
            } else {
                data.inputs(i, c++) = rows[i][jj];
            }
        }
    }

    std::set<double> distinct(data.response.begin(), data.response.end());
    if (distinct.size() < 2) {
        throw std::invalid_argument("target column '" + target_column + "' is constant");
    }
    if (distinct.size() == 2) {
        data.task_kind = TaskKind::binary_classification;
        const double lo = *distinct.begin();
        for (Eigen::Index i = 0; i < n; ++i) {
            data.response[i] = (data.response[i] == lo) ? 0.0 : 1.0;
        }
    } else {
        data.task_kind = TaskKind::regression;
    }
    data.validate();
    return data;
}

void save_dataset_csv(const TabularDataset& data, const std::string& target_name,
                      const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw std::invalid_argument("cannot open file for writing: " + path);
    }
    out.precision(17);
    for (Eigen::Index j = 0; j < data.p(); ++j) {
        const std::string name = data.column_names.empty() ? ("x" + std::to_string(j))
                                                           : data.column_names[j];
        out << name << ',';
    }
    out << target_name << '\n';
    for (Eigen::Index i = 0; i < data.n(); ++i) {
        for (Eigen::Index j = 0; j < data.p(); ++j) {
            out << data.inputs(i, j) << ',';
        }
        out << data.response[i] << '\n';
    }
}

}  // namespace semiknock
