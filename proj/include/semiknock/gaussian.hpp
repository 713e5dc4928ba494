#pragma once

#include <Eigen/Dense>

namespace semiknock {

// Multivariate normal with exact conditional means, used both as the
// oracle imputer in simulations and as a data generator building block.
struct GaussianOracle {
    Eigen::VectorXd mean;
    Eigen::MatrixXd covariance;

    // throws on asymmetric or non-positive-definite covariance
    void validate() const;

    Eigen::Index dim() const { return mean.size(); }
};

struct ConditionalMoments {
    double prediction = 0.0;
    double conditional_sd = 0.0;
};

// Exact Gaussian conditional mean and sd of coordinate target_index
// given all other coordinates:
//   mean_j + Cov_{j,-j} Cov_{-j,-j}^{-1} (x_{-j} - mean_{-j})
ConditionalMoments oracle_conditional_mean(const GaussianOracle& oracle,
                                           const Eigen::VectorXd& conditioning_values,
                                           Eigen::Index target_index);

// Precomputed linear form of the conditional mean above, for batched use.
struct ConditionalPredictor {
    Eigen::Index target_index = 0;
    Eigen::VectorXd weights;   // length dim-1, ordered by original index skipping target
    double offset = 0.0;
    double conditional_sd = 0.0;

    // rows hold all dim coordinates; the target column is ignored
    Eigen::VectorXd predict(const Eigen::MatrixXd& full_rows) const;
};

ConditionalPredictor make_conditional_predictor(const GaussianOracle& oracle,
                                                Eigen::Index target_index);

// AR(1) covariance: Sigma_ij = rho^|i-j|
Eigen::MatrixXd ar1_covariance(Eigen::Index p, double rho);

// Symmetric square root via eigendecomposition
Eigen::MatrixXd matrix_sqrt(const Eigen::MatrixXd& sym);

}  // namespace semiknock
