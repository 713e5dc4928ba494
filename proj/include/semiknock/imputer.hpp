#pragma once

#include <Eigen/Dense>

#include "semiknock/dataset.hpp"
#include "semiknock/gaussian.hpp"
#include "semiknock/ridge.hpp"

namespace semiknock {

// Per-row conditional-mean predictions for feature j and the matching
// residual pools. The common currency between imputers (estimated or
// oracle) and the semi-knockoff sampler.
struct ImputationColumns {
    Eigen::Index feature_index = 0;
    Eigen::VectorXd nu_predictions;   // E[X^j | X^-j] per row
    Eigen::VectorXd rho_predictions;  // E[X^j | X^-j, y] per row
    Eigen::VectorXd residuals_nu;
    Eigen::VectorXd residuals_rho;
};

// The two fitted regressions of one feature: nu on X^-j, rho on (X^-j, y).
struct ImputerPair {
    Eigen::Index feature_index = 0;
    RidgeImputer nu;
    RidgeImputer rho;
    Eigen::VectorXd residuals_nu;
    Eigen::VectorXd residuals_rho;

    ImputationColumns columns(const TabularDataset& data) const;
};

// Regressor matrix for feature j: the other columns, optionally with the
// response appended as the last column.
Eigen::MatrixXd imputer_regressors(const TabularDataset& data, Eigen::Index feature_index,
                                   RegressorSpec spec);

// Both regressions fitted on the full sample, residual pools populated.
ImputerPair fit_imputer_pair(const TabularDataset& data, Eigen::Index feature_index,
                             double lambda);

// Oracle imputation for simulated Gaussian data: x_oracle describes X,
// joint_oracle describes (X, y) with y as the last coordinate.
ImputationColumns oracle_imputation(const TabularDataset& data,
                                    const ConditionalPredictor& nu_predictor,
                                    const ConditionalPredictor& rho_predictor);

// ||theta-with-dropped-regressor (extended by 0) - theta-full||_2 on the
// ridge fit of targets against regressors.
double stability_probe(const Eigen::VectorXd& targets, const Eigen::MatrixXd& regressors,
                       Eigen::Index dropped_index, double lambda);

}  // namespace semiknock
