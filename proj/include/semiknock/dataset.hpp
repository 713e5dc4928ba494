#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

namespace semiknock {

enum class TaskKind { regression, binary_classification };

// n x p design matrix with response vector. Immutable by convention
// after construction; safe to share across workers.
struct TabularDataset {
    Eigen::MatrixXd inputs;            // n rows, p columns
    Eigen::VectorXd response;          // length n
    std::vector<std::string> column_names;  // empty or length p
    TaskKind task_kind = TaskKind::regression;

    Eigen::Index n() const { return inputs.rows(); }
    Eigen::Index p() const { return inputs.cols(); }

    // throws std::invalid_argument on any violated invariant
    void validate() const;
};

// CSV with header row, comma delimiter, '.' decimal separator, UTF-8.
// Target column removed from inputs; task kind inferred: binary
// classification iff the target takes exactly two values, remapped to
// {0,1} by ascending order.
TabularDataset load_dataset(const std::string& path, const std::string& target_column);

void save_dataset_csv(const TabularDataset& data, const std::string& target_name,
                      const std::string& path);

}  // namespace semiknock
