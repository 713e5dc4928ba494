#pragma once

#include <Eigen/Dense>
#include <vector>

namespace semiknock {

enum class RegressorSpec { without_response, with_response };

// Linear imputer fitted by the centered normal equations
//   (Xc'Xc/n + lambda I) theta = Xc'zc/n
// with an unpenalized intercept handled by centering.
struct RidgeImputer {
    Eigen::VectorXd coefficients;
    double intercept = 0.0;
    double lambda = 0.0;
    RegressorSpec regressor_spec = RegressorSpec::without_response;
    Eigen::VectorXd training_column_means;

    double predict_row(const Eigen::RowVectorXd& row) const {
        return intercept + (row.transpose() - training_column_means).dot(coefficients);
    }

    Eigen::VectorXd predict(const Eigen::MatrixXd& regressors) const;
};

// lambda = 0 requires an invertible Gram matrix; a rank-deficient system
// falls back to the minimum-norm solution with a warning on stderr.
RidgeImputer fit_ridge(const Eigen::VectorXd& targets, const Eigen::MatrixXd& regressors,
                       double lambda);

// Generalized cross-validation over a log grid, returns the best lambda.
double select_lambda_gcv(const Eigen::VectorXd& targets, const Eigen::MatrixXd& regressors,
                         const std::vector<double>& grid = {1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0});

}  // namespace semiknock
