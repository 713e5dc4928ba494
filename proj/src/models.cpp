#include "semiknock/models.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "semiknock/ridge.hpp"

namespace semiknock {

Eigen::VectorXd LinearModel::predict(const Eigen::MatrixXd& batch) const {
    if (batch.cols() != coefficients_.size()) {
        throw std::invalid_argument("LinearModel: feature count mismatch");
    }
    Eigen::VectorXd out = (batch * coefficients_).array() + intercept_;
    if (link_ == LinkKind::logistic) {
        out = out.unaryExpr([](double t) { return 1.0 / (1.0 + std::exp(-t)); });
    }
    return out;
}

Eigen::VectorXd BoostedStumpsModel::predict(const Eigen::MatrixXd& batch) const {
    Eigen::VectorXd out = Eigen::VectorXd::Constant(batch.rows(), base_value_);
    for (const Stump& s : stumps_) {
        if (s.feature_index >= batch.cols()) {
            throw std::invalid_argument("BoostedStumpsModel: feature count mismatch");
        }
        for (Eigen::Index i = 0; i < batch.rows(); ++i) {
            out[i] += learning_rate_ *
                      (batch(i, s.feature_index) <= s.split_value ? s.left_value : s.right_value);
        }
    }
    return out;
}

namespace {

LinearModel fit_logistic_irls(const TabularDataset& data, double lambda) {
    const Eigen::Index n = data.n();
    const Eigen::Index p = data.p();
    Eigen::MatrixXd design(n, p + 1);
    design.col(0).setOnes();
    design.rightCols(p) = data.inputs;
    const Eigen::VectorXd& y = data.response;

    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p + 1);
    const int max_iter = 100;
    const double grad_tol = 1e-8;

    auto objective = [&](const Eigen::VectorXd& b) {
        const Eigen::VectorXd eta = design * b;
        double obj = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            // log(1 + e^eta) - y*eta, numerically stable
            obj += std::max(eta[i], 0.0) + std::log1p(std::exp(-std::abs(eta[i]))) -
                   y[i] * eta[i];
        }
        return obj / static_cast<double>(n) + lambda * b.tail(p).squaredNorm();
    };

    int iter = 0;
    for (; iter < max_iter; ++iter) {
        const Eigen::VectorXd eta = design * beta;
        Eigen::VectorXd mu(n), w(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            mu[i] = 1.0 / (1.0 + std::exp(-eta[i]));
            w[i] = std::max(mu[i] * (1.0 - mu[i]), 1e-10);
        }
        Eigen::VectorXd grad = design.transpose() * (mu - y) / static_cast<double>(n);
        grad.tail(p) += 2.0 * lambda * beta.tail(p);
        if (grad.lpNorm<Eigen::Infinity>() < grad_tol) {
            break;
        }
        Eigen::MatrixXd hess =
            design.transpose() * w.asDiagonal() * design / static_cast<double>(n);
        hess.bottomRightCorner(p, p).diagonal().array() += 2.0 * lambda;
        const Eigen::VectorXd step = hess.ldlt().solve(grad);
        // damped Newton
        double t = 1.0;
        const double f0 = objective(beta);
        Eigen::VectorXd candidate = beta - t * step;
        int halvings = 0;
        while (objective(candidate) > f0 && halvings < 30) {
            t *= 0.5;
            candidate = beta - t * step;
            ++halvings;
        }
        if (halvings == 30) {
            break;
        }
        beta = candidate;
    }
    if (iter == max_iter) {
        throw std::runtime_error("fit_linear: logistic IRLS did not converge in " +
                                 std::to_string(max_iter) + " iterations");
    }
    if (lambda == 0.0) {
        // perfect separation: every fitted probability sits on its label
        const Eigen::VectorXd eta = design * beta;
        double worst = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            worst = std::max(worst, std::abs(1.0 / (1.0 + std::exp(-eta[i])) - y[i]));
        }
        if (worst < 1e-4) {
            throw std::runtime_error(
                "fit_linear: separation detected (unbounded coefficients); use ridge_lambda > 0");
        }
    }
    return LinearModel(beta.tail(p), beta[0], LinkKind::logistic);
}

}  // namespace

LinearModel fit_linear(const TabularDataset& data, double ridge_lambda) {
    data.validate();
    if (data.task_kind == TaskKind::binary_classification) {
        return fit_logistic_irls(data, ridge_lambda);
    }
    const RidgeImputer fit = fit_ridge(data.response, data.inputs, ridge_lambda);
    // fold the centering into a plain intercept
    const double intercept = fit.intercept - fit.coefficients.dot(fit.training_column_means);
    return LinearModel(fit.coefficients, intercept, LinkKind::identity);
}

BoostedStumpsModel fit_boosted_stumps(const TabularDataset& data, int rounds,
                                      double learning_rate) {
    data.validate();
    if (rounds < 1) {
        throw std::invalid_argument("fit_boosted_stumps: rounds must be >= 1");
    }
    if (!(learning_rate > 0.0 && learning_rate <= 1.0)) {
        throw std::invalid_argument("fit_boosted_stumps: learning_rate must be in (0, 1]");
    }
    const Eigen::Index n = data.n();
    const Eigen::Index p = data.p();
    const double base = data.response.mean();

    // constant response: nothing to fit beyond the base value
    if ((data.response.array() - data.response[0]).abs().maxCoeff() == 0.0) {
        return BoostedStumpsModel({}, learning_rate, base);
    }

    // per-feature sort orders, computed once
    std::vector<std::vector<Eigen::Index>> orders(static_cast<std::size_t>(p));
    for (Eigen::Index j = 0; j < p; ++j) {
        auto& ord = orders[static_cast<std::size_t>(j)];
        ord.resize(static_cast<std::size_t>(n));
        std::iota(ord.begin(), ord.end(), Eigen::Index{0});
        std::sort(ord.begin(), ord.end(), [&](Eigen::Index a, Eigen::Index b) {
            return data.inputs(a, j) < data.inputs(b, j);
        });
    }

    Eigen::VectorXd residual = data.response.array() - base;
    std::vector<Stump> stumps;
    stumps.reserve(static_cast<std::size_t>(rounds));

    for (int round = 0; round < rounds; ++round) {
        const double total_sum = residual.sum();
        Stump best;
        double best_gain = -1.0;
        for (Eigen::Index j = 0; j < p; ++j) {
            const auto& ord = orders[static_cast<std::size_t>(j)];
            double left_sum = 0.0;
            for (Eigen::Index k = 0; k + 1 < n; ++k) {
                left_sum += residual[ord[static_cast<std::size_t>(k)]];
                const double x_here = data.inputs(ord[static_cast<std::size_t>(k)], j);
                const double x_next = data.inputs(ord[static_cast<std::size_t>(k + 1)], j);
                if (x_here == x_next) {
                    continue;
                }
                const double n_left = static_cast<double>(k + 1);
                const double n_right = static_cast<double>(n - k - 1);
                const double right_sum = total_sum - left_sum;
                const double gain =
                    left_sum * left_sum / n_left + right_sum * right_sum / n_right;
                const double split = 0.5 * (x_here + x_next);
                if (gain > best_gain + 1e-15 ||
                    (std::abs(gain - best_gain) <= 1e-15 &&
                     (j < best.feature_index ||
                      (j == best.feature_index && split < best.split_value)))) {
                    best_gain = gain;
                    best.feature_index = j;
                    best.split_value = split;
                    best.left_value = left_sum / n_left;
                    best.right_value = right_sum / n_right;
                }
            }
        }
        if (best_gain < 0.0) {
            break;  // no valid split anywhere (all features constant)
        }
        for (Eigen::Index i = 0; i < n; ++i) {
            residual[i] -= learning_rate * (data.inputs(i, best.feature_index) <= best.split_value
                                                ? best.left_value
                                                : best.right_value);
        }
        stumps.push_back(best);
    }
    return BoostedStumpsModel(std::move(stumps), learning_rate, base);
}

double training_squared_loss(const BoostedStumpsModel& model, const TabularDataset& data) {
    return (model.predict(data.inputs) - data.response).squaredNorm() /
           static_cast<double>(data.n());
}

}  // namespace semiknock
