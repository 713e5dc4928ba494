#include "semiknock/ridge.hpp"

#include <algorithm>
#include <iostream>
#include <limits>
#include <stdexcept>

namespace semiknock {

Eigen::VectorXd RidgeImputer::predict(const Eigen::MatrixXd& regressors) const {
    if (regressors.cols() != coefficients.size()) {
        throw std::invalid_argument("predict: regressor count mismatch");
    }
    return ((regressors.rowwise() - training_column_means.transpose()) * coefficients).array() +
           intercept;
}

RidgeImputer fit_ridge(const Eigen::VectorXd& targets, const Eigen::MatrixXd& regressors,
                       double lambda) {
    const Eigen::Index n = targets.size();
    if (regressors.rows() != n) {
        throw std::invalid_argument("fit_ridge: row count mismatch");
    }
    if (lambda < 0.0) {
        throw std::invalid_argument("fit_ridge: lambda must be >= 0");
    }
    const Eigen::Index d = regressors.cols();

    RidgeImputer fit;
    fit.lambda = lambda;
    fit.intercept = targets.mean();
    fit.training_column_means = regressors.colwise().mean();
    if (d == 0) {
        fit.coefficients.resize(0);
        return fit;
    }

    const Eigen::MatrixXd xc = regressors.rowwise() - fit.training_column_means.transpose();
    const Eigen::VectorXd zc = targets.array() - fit.intercept;
    Eigen::MatrixXd gram = xc.transpose() * xc / static_cast<double>(n);
    const Eigen::VectorXd rhs = xc.transpose() * zc / static_cast<double>(n);
    gram.diagonal().array() += lambda;

    Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
    fit.coefficients = ldlt.solve(rhs);
    const double scale = std::max(1.0, rhs.lpNorm<Eigen::Infinity>());
    // iterative refinement to the normal-equation tolerance
    for (int pass = 0; pass < 4 && fit.coefficients.allFinite(); ++pass) {
        const Eigen::VectorXd r = rhs - gram * fit.coefficients;
        if (r.lpNorm<Eigen::Infinity>() <= 1e-10 * scale) {
            break;
        }
        fit.coefficients += ldlt.solve(r);
    }
    const double resid = (gram * fit.coefficients - rhs).lpNorm<Eigen::Infinity>();
    if (ldlt.info() != Eigen::Success || !fit.coefficients.allFinite() || resid > 1e-10 * scale) {
        if (lambda > 0.0) {
            throw std::runtime_error("fit_ridge: normal equations did not solve to tolerance");
        }
        std::cerr << "fit_ridge: singular Gram matrix at lambda=0, "
                     "using minimum-norm solution\n";
        Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(gram);
        fit.coefficients = cod.solve(rhs);
        if (!fit.coefficients.allFinite()) {
            throw std::runtime_error("fit_ridge: singular system at lambda=0");
        }
    }
    return fit;
}

double select_lambda_gcv(const Eigen::VectorXd& targets, const Eigen::MatrixXd& regressors,
                         const std::vector<double>& grid) {
    if (grid.empty()) {
        throw std::invalid_argument("select_lambda_gcv: empty grid");
    }
    const Eigen::Index n = targets.size();
    const Eigen::VectorXd means = regressors.colwise().mean();
    const Eigen::MatrixXd xc = regressors.rowwise() - means.transpose();
    const Eigen::VectorXd zc = targets.array() - targets.mean();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(xc.transpose() * xc /
                                                      static_cast<double>(n));
    const Eigen::VectorXd evals = es.eigenvalues();

    double best_lambda = grid.front();
    double best_score = std::numeric_limits<double>::infinity();
    for (double lambda : grid) {
        const RidgeImputer fit = fit_ridge(targets, regressors, lambda);
        const double rss = (zc - xc * fit.coefficients).squaredNorm();
        double df = 1.0;  // intercept
        for (Eigen::Index k = 0; k < evals.size(); ++k) {
            if (evals[k] > 0.0) {
                df += evals[k] / (evals[k] + lambda);
            }
        }
        const double denom = static_cast<double>(n) - df;
        if (denom <= 0.0) {
            continue;
        }
        const double score = static_cast<double>(n) * rss / (denom * denom);
        if (score < best_score) {
            best_score = score;
            best_lambda = lambda;
        }
    }
    return best_lambda;
}

}  // namespace semiknock
