#include "semiknock/gaussian.hpp"

#include <cmath>
#include <stdexcept>

namespace semiknock {

void GaussianOracle::validate() const {
    const Eigen::Index d = mean.size();
    if (covariance.rows() != d || covariance.cols() != d) {
        throw std::invalid_argument("GaussianOracle: covariance shape mismatch");
    }
    if (!covariance.isApprox(covariance.transpose(), 1e-10)) {
        throw std::invalid_argument("GaussianOracle: covariance not symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(covariance);
    if (es.eigenvalues().minCoeff() <= 0.0) {
        throw std::invalid_argument("GaussianOracle: covariance not positive definite");
    }
}

ConditionalPredictor make_conditional_predictor(const GaussianOracle& oracle,
                                                Eigen::Index target_index) {
    const Eigen::Index d = oracle.dim();
    if (target_index < 0 || target_index >= d) {
        throw std::invalid_argument("target_index out of range");
    }
    oracle.validate();

    ConditionalPredictor pred;
    pred.target_index = target_index;
    if (d == 1) {
        pred.weights.resize(0);
        pred.offset = oracle.mean[0];
        pred.conditional_sd = std::sqrt(oracle.covariance(0, 0));
        return pred;
    }

    Eigen::MatrixXd cov_rest(d - 1, d - 1);
    Eigen::VectorXd cov_cross(d - 1);
    Eigen::VectorXd mean_rest(d - 1);
    Eigen::Index r = 0;
    for (Eigen::Index i = 0; i < d; ++i) {
        if (i == target_index) {
            continue;
        }
        cov_cross[r] = oracle.covariance(target_index, i);
        mean_rest[r] = oracle.mean[i];
        Eigen::Index c = 0;
        for (Eigen::Index k = 0; k < d; ++k) {
            if (k == target_index) {
                continue;
            }
            cov_rest(r, c++) = oracle.covariance(i, k);
        }
        ++r;
    }

    Eigen::LLT<Eigen::MatrixXd> llt(cov_rest);
    if (llt.info() != Eigen::Success) {
        throw std::invalid_argument("GaussianOracle: conditioning block not positive definite");
    }
    pred.weights = llt.solve(cov_cross);
    pred.offset = oracle.mean[target_index] - pred.weights.dot(mean_rest);
    const double var = oracle.covariance(target_index, target_index) -
                       pred.weights.dot(cov_cross);
    pred.conditional_sd = std::sqrt(std::max(var, 0.0));
    return pred;
}

Eigen::VectorXd ConditionalPredictor::predict(const Eigen::MatrixXd& full_rows) const {
    const Eigen::Index d = full_rows.cols();
    if (d != weights.size() + 1) {
        throw std::invalid_argument("ConditionalPredictor: column count mismatch");
    }
    Eigen::VectorXd out = Eigen::VectorXd::Constant(full_rows.rows(), offset);
    Eigen::Index w = 0;
    for (Eigen::Index k = 0; k < d; ++k) {
        if (k == target_index) {
            continue;
        }
        out += weights[w++] * full_rows.col(k);
    }
    return out;
}

ConditionalMoments oracle_conditional_mean(const GaussianOracle& oracle,
                                           const Eigen::VectorXd& conditioning_values,
                                           Eigen::Index target_index) {
    if (conditioning_values.size() != oracle.dim() - 1) {
        throw std::invalid_argument("conditioning must cover all other coordinates");
    }
    const ConditionalPredictor pred = make_conditional_predictor(oracle, target_index);
    ConditionalMoments out;
    out.prediction = pred.offset + pred.weights.dot(conditioning_values);
    out.conditional_sd = pred.conditional_sd;
    return out;
}

Eigen::MatrixXd ar1_covariance(Eigen::Index p, double rho) {
    if (std::abs(rho) >= 1.0) {
        throw std::invalid_argument("ar1_covariance requires |rho| < 1");
    }
    Eigen::MatrixXd cov(p, p);
    for (Eigen::Index i = 0; i < p; ++i) {
        for (Eigen::Index j = 0; j < p; ++j) {
            cov(i, j) = std::pow(rho, std::abs(static_cast<double>(i - j)));
        }
    }
    return cov;
}

Eigen::MatrixXd matrix_sqrt(const Eigen::MatrixXd& sym) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
    if (es.eigenvalues().minCoeff() < -1e-12) {
        throw std::invalid_argument("matrix_sqrt: negative eigenvalue");
    }
    return es.eigenvectors() *
           es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
           es.eigenvectors().transpose();
}

}  // namespace semiknock
