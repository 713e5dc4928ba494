#include "semiknock/loss.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace semiknock {

double LossFunction::operator()(double prediction, double target) const {
    switch (kind) {
        case LossKind::squared_error: {
            const double d = prediction - target;
            return d * d;
        }
        case LossKind::cross_entropy: {
            const double u = std::clamp(prediction, clamp_eps, 1.0 - clamp_eps);
            return -(target * std::log(u) + (1.0 - target) * std::log(1.0 - u));
        }
    }
    throw std::logic_error("unknown loss kind");
}

LossFunction parse_loss(const std::string& name) {
    if (name == "squared_error") {
        return LossFunction::squared_error();
    }
    if (name == "cross_entropy") {
        return LossFunction::cross_entropy();
    }
    throw std::invalid_argument("unknown loss: " + name);
}

std::string loss_name(const LossFunction& loss) {
    return loss.kind == LossKind::squared_error ? "squared_error" : "cross_entropy";
}

Eigen::VectorXd evaluate_loss(const PredictiveModel& model, const LossFunction& loss,
                              const Eigen::MatrixXd& inputs, const Eigen::VectorXd& response) {
    if (inputs.rows() != response.size()) {
        throw std::invalid_argument("evaluate_loss: row count does not match response length");
    }
    const Eigen::VectorXd pred = model.predict(inputs);
    if (pred.size() != inputs.rows()) {
        throw std::runtime_error("model '" + model.name() + "' returned " +
                                 std::to_string(pred.size()) + " predictions for " +
                                 std::to_string(inputs.rows()) + " rows");
    }
    Eigen::VectorXd out(pred.size());
    for (Eigen::Index i = 0; i < pred.size(); ++i) {
        if (!std::isfinite(pred[i])) {
            throw std::runtime_error("non-finite prediction at row " + std::to_string(i));
        }
        out[i] = loss(pred[i], response[i]);
    }
    return out;
}

}  // namespace semiknock
