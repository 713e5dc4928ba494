#pragma once

#include <Eigen/Dense>
#include <string>

namespace semiknock {

// Pre-trained black box. predict must be deterministic (identical batch
// gives identical output) and re-entrant; classification outputs are
// class-1 probabilities in (0, 1).
class PredictiveModel {
public:
    virtual ~PredictiveModel() = default;
    virtual Eigen::VectorXd predict(const Eigen::MatrixXd& batch) const = 0;
    virtual std::string name() const = 0;
};

}  // namespace semiknock
