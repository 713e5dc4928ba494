#pragma once

#include <Eigen/Dense>
#include <memory>
#include <string>
#include <vector>

#include "semiknock/dataset.hpp"
#include "semiknock/model.hpp"
#include "semiknock/rng.hpp"

namespace semiknock {

enum class LinkKind { identity, logistic };

class LinearModel : public PredictiveModel {
public:
    LinearModel(Eigen::VectorXd coefficients, double intercept, LinkKind link)
        : coefficients_(std::move(coefficients)), intercept_(intercept), link_(link) {}

    Eigen::VectorXd predict(const Eigen::MatrixXd& batch) const override;
    std::string name() const override { return "linear"; }

    const Eigen::VectorXd& coefficients() const { return coefficients_; }
    double intercept() const { return intercept_; }
    LinkKind link() const { return link_; }

private:
    Eigen::VectorXd coefficients_;
    double intercept_;
    LinkKind link_;
};

struct Stump {
    Eigen::Index feature_index = 0;
    double split_value = 0.0;
    double left_value = 0.0;   // rows with x <= split
    double right_value = 0.0;  // rows with x > split
};

// Depth-1 gradient boosting on squared error. Piecewise constant per
// feature, so predictions are insensitive to perturbations within a cell.
class BoostedStumpsModel : public PredictiveModel {
public:
    BoostedStumpsModel(std::vector<Stump> stumps, double learning_rate, double base_value)
        : stumps_(std::move(stumps)), learning_rate_(learning_rate), base_value_(base_value) {}

    Eigen::VectorXd predict(const Eigen::MatrixXd& batch) const override;
    std::string name() const override { return "boosted_stumps"; }

    const std::vector<Stump>& stumps() const { return stumps_; }
    double learning_rate() const { return learning_rate_; }
    double base_value() const { return base_value_; }
    int rounds() const { return static_cast<int>(stumps_.size()); }

private:
    std::vector<Stump> stumps_;
    double learning_rate_;
    double base_value_;
};

// Ridge for regression targets, damped IRLS logistic for binary ones
// (max 100 iterations, gradient tolerance 1e-8).
LinearModel fit_linear(const TabularDataset& data, double ridge_lambda);

// Exhaustive best-split scan over midpoints of sorted unique values per
// feature; ties in gain broken by lowest feature index then lowest split.
BoostedStumpsModel fit_boosted_stumps(const TabularDataset& data, int rounds,
                                      double learning_rate);

double training_squared_loss(const BoostedStumpsModel& model, const TabularDataset& data);

}  // namespace semiknock
