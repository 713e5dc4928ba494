#pragma once

#include <Eigen/Dense>
#include <string>

#include "semiknock/model.hpp"

namespace semiknock {

enum class LossKind { squared_error, cross_entropy };

struct LossFunction {
    LossKind kind = LossKind::squared_error;
    double clamp_eps = 1e-12;  // probability floor for cross-entropy

    static LossFunction squared_error() { return {LossKind::squared_error, 0.0}; }
    static LossFunction cross_entropy(double eps = 1e-12) {
        return {LossKind::cross_entropy, eps};
    }

    double operator()(double prediction, double target) const;
};

LossFunction parse_loss(const std::string& name);
std::string loss_name(const LossFunction& loss);

// Per-sample losses: entry i = loss(model.predict(row i), response[i]).
Eigen::VectorXd evaluate_loss(const PredictiveModel& model, const LossFunction& loss,
                              const Eigen::MatrixXd& inputs, const Eigen::VectorXd& response);

}  // namespace semiknock
