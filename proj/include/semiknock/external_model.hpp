#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "semiknock/model.hpp"

namespace semiknock {

struct ExternalModelHandle {
    std::string executable_path;
    std::vector<std::string> startup_args;
    double request_timeout_seconds = 30.0;
};

// Bridge to an opaque pre-trained model served by a child process.
// Newline-delimited JSON over its standard streams:
//   {"type":"hello","n_features":p}        -> {"type":"ready"}
//   {"type":"predict","inputs":[[...],..]} -> {"type":"predictions","values":[...]}
//   {"type":"bye"}
// Sessions are strictly serial; use one session per worker for
// concurrent prediction.
class ExternalModel : public PredictiveModel {
public:
    ExternalModel(const ExternalModelHandle& handle, int n_features);
    ~ExternalModel() override;

    ExternalModel(const ExternalModel&) = delete;
    ExternalModel& operator=(const ExternalModel&) = delete;

    Eigen::VectorXd predict(const Eigen::MatrixXd& batch) const override;
    std::string name() const override { return "external:" + handle_.executable_path; }

private:
    void send_line(const std::string& line) const;
    std::string read_line() const;
    void shutdown();

    ExternalModelHandle handle_;
    int n_features_;
    int child_pid_ = -1;
    int to_child_ = -1;
    int from_child_ = -1;
    mutable std::string buffer_;
};

Eigen::VectorXd external_predict(ExternalModel& model, const Eigen::MatrixXd& batch);

}  // namespace semiknock
