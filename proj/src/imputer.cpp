#include "semiknock/imputer.hpp"

#include <stdexcept>

namespace semiknock {

Eigen::MatrixXd imputer_regressors(const TabularDataset& data, Eigen::Index feature_index,
                                   RegressorSpec spec) {
    const Eigen::Index n = data.n();
    const Eigen::Index p = data.p();
    if (feature_index < 0 || feature_index >= p) {
        throw std::invalid_argument("feature_index out of range");
    }
    const Eigen::Index extra = (spec == RegressorSpec::with_response) ? 1 : 0;
    Eigen::MatrixXd reg(n, p - 1 + extra);
    Eigen::Index c = 0;
    for (Eigen::Index j = 0; j < p; ++j) {
        if (j == feature_index) {
            continue;
        }
        reg.col(c++) = data.inputs.col(j);
    }
    if (extra) {
        reg.col(c) = data.response;
    }
    return reg;
}

ImputerPair fit_imputer_pair(const TabularDataset& data, Eigen::Index feature_index,
                             double lambda) {
    const Eigen::VectorXd target = data.inputs.col(feature_index);
    const Eigen::MatrixXd reg_nu = imputer_regressors(data, feature_index,
                                                      RegressorSpec::without_response);
    const Eigen::MatrixXd reg_rho = imputer_regressors(data, feature_index,
                                                       RegressorSpec::with_response);
    ImputerPair pair;
    pair.feature_index = feature_index;
    pair.nu = fit_ridge(target, reg_nu, lambda);
    pair.nu.regressor_spec = RegressorSpec::without_response;
    pair.rho = fit_ridge(target, reg_rho, lambda);
    pair.rho.regressor_spec = RegressorSpec::with_response;
    pair.residuals_nu = target - pair.nu.predict(reg_nu);
    pair.residuals_rho = target - pair.rho.predict(reg_rho);
    return pair;
}

ImputationColumns ImputerPair::columns(const TabularDataset& data) const {
    if (data.n() != residuals_nu.size()) {
        throw std::invalid_argument("imputer pair was fitted on a different sample size");
    }
    ImputationColumns cols;
    cols.feature_index = feature_index;
    cols.nu_predictions =
        nu.predict(imputer_regressors(data, feature_index, RegressorSpec::without_response));
    cols.rho_predictions =
        rho.predict(imputer_regressors(data, feature_index, RegressorSpec::with_response));
    cols.residuals_nu = residuals_nu;
    cols.residuals_rho = residuals_rho;
    return cols;
}

ImputationColumns oracle_imputation(const TabularDataset& data,
                                    const ConditionalPredictor& nu_predictor,
                                    const ConditionalPredictor& rho_predictor) {
    const Eigen::Index n = data.n();
    const Eigen::Index p = data.p();
    const Eigen::Index j = nu_predictor.target_index;
    if (rho_predictor.target_index != j) {
        throw std::invalid_argument("oracle predictors target different features");
    }
    if (nu_predictor.weights.size() != p - 1 || rho_predictor.weights.size() != p) {
        throw std::invalid_argument("oracle predictor dimensions do not match dataset");
    }
    Eigen::MatrixXd joint(n, p + 1);
    joint.leftCols(p) = data.inputs;
    joint.col(p) = data.response;

    ImputationColumns cols;
    cols.feature_index = j;
    cols.nu_predictions = nu_predictor.predict(data.inputs);
    cols.rho_predictions = rho_predictor.predict(joint);
    cols.residuals_nu = data.inputs.col(j) - cols.nu_predictions;
    cols.residuals_rho = data.inputs.col(j) - cols.rho_predictions;
    return cols;
}

double stability_probe(const Eigen::VectorXd& targets, const Eigen::MatrixXd& regressors,
                       Eigen::Index dropped_index, double lambda) {
    const Eigen::Index d = regressors.cols();
    if (dropped_index < 0 || dropped_index >= d) {
        throw std::invalid_argument("dropped_index out of range");
    }
    if (lambda <= 0.0) {
        throw std::invalid_argument("stability_probe requires lambda > 0");
    }
    const RidgeImputer full = fit_ridge(targets, regressors, lambda);

    Eigen::MatrixXd rest(regressors.rows(), d - 1);
    Eigen::Index c = 0;
    for (Eigen::Index j = 0; j < d; ++j) {
        if (j != dropped_index) {
            rest.col(c++) = regressors.col(j);
        }
    }
    const RidgeImputer restricted = fit_ridge(targets, rest, lambda);

    // restricted optimizer extended by 0 at the dropped coordinate
    Eigen::VectorXd extended = Eigen::VectorXd::Zero(d);
    c = 0;
    for (Eigen::Index j = 0; j < d; ++j) {
        if (j != dropped_index) {
            extended[j] = restricted.coefficients[c++];
        }
    }
    return (extended - full.coefficients).norm();
}

}  // namespace semiknock
