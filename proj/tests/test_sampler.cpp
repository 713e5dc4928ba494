#include <doctest.h>

#include <algorithm>
#include <set>

#include "semiknock/gaussian.hpp"
#include "semiknock/imputer.hpp"
#include "semiknock/rng.hpp"
#include "semiknock/sampler.hpp"

using namespace semiknock;

namespace {

TabularDataset small_gaussian(Eigen::Index n, Eigen::Index p, const RngStream& stream) {
    Rng gen(stream);
    TabularDataset data;
    data.inputs.resize(n, p);
    data.response.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        data.response[i] = gen.normal();
        for (Eigen::Index j = 0; j < p; ++j) {
            data.inputs(i, j) = gen.normal();
        }
    }
    return data;
}

}  // namespace

TEST_CASE("identity permutation reconstructs the original column") {
    const TabularDataset data = small_gaussian(30, 4, RngStream{1});
    const ImputationColumns cols = fit_imputer_pair(data, 2, 0.1).columns(data);
    // prediction + own residual cancels back to the original value
    for (Eigen::Index i = 0; i < data.n(); ++i) {
        CHECK(cols.nu_predictions[i] + cols.residuals_nu[i] ==
              doctest::Approx(data.inputs(i, 2)).epsilon(1e-12));
        CHECK(cols.rho_predictions[i] + cols.residuals_rho[i] ==
              doctest::Approx(data.inputs(i, 2)).epsilon(1e-12));
    }
}

TEST_CASE("draws only touch column j and keep permutations valid") {
    const TabularDataset data = small_gaussian(25, 5, RngStream{2});
    const ImputerPair pair = fit_imputer_pair(data, 3, 0.1);
    const SemiKnockoffDraw draw = draw_semi_knockoff(data, pair, RngStream{3});

    for (Eigen::Index j = 0; j < data.p(); ++j) {
        if (j == 3) {
            continue;
        }
        CHECK(draw.inputs_one.col(j) == data.inputs.col(j));
        CHECK(draw.inputs_two.col(j) == data.inputs.col(j));
    }
    auto sorted_one = draw.permutation_one;
    std::sort(sorted_one.begin(), sorted_one.end());
    for (std::size_t i = 0; i < sorted_one.size(); ++i) {
        CHECK(sorted_one[i] == i);
    }
}

TEST_CASE("residual multiset is conserved by every draw") {
    const TabularDataset data = small_gaussian(40, 4, RngStream{4});
    const ImputerPair pair = fit_imputer_pair(data, 1, 0.1);
    const ImputationColumns cols = pair.columns(data);
    const SemiKnockoffDraw draw = draw_semi_knockoff(data, pair, RngStream{5});

    std::vector<double> reconstructed;
    for (Eigen::Index i = 0; i < data.n(); ++i) {
        reconstructed.push_back(draw.inputs_one(i, 1) - cols.nu_predictions[i]);
    }
    std::vector<double> pool(cols.residuals_nu.begin(), cols.residuals_nu.end());
    std::sort(reconstructed.begin(), reconstructed.end());
    std::sort(pool.begin(), pool.end());
    for (std::size_t i = 0; i < pool.size(); ++i) {
        CHECK(reconstructed[i] == doctest::Approx(pool[i]).epsilon(1e-10));
    }
}

TEST_CASE("n = 2 enumerates exactly the original and swapped columns") {
    TabularDataset data;
    data.inputs.resize(2, 2);
    data.inputs << 1.0, 0.2, -1.0, 0.4;
    data.response.resize(2);
    data.response << 0.5, -0.5;
    const ImputerPair pair = fit_imputer_pair(data, 0, 0.5);
    const ImputationColumns cols = pair.columns(data);

    const Eigen::Vector2d original(data.inputs(0, 0), data.inputs(1, 0));
    const Eigen::Vector2d swapped(cols.nu_predictions[0] + cols.residuals_nu[1],
                                  cols.nu_predictions[1] + cols.residuals_nu[0]);
    bool saw_original = false;
    bool saw_swapped = false;
    for (int s = 0; s < 30; ++s) {
        const SemiKnockoffDraw draw =
            draw_semi_knockoff(data, pair, RngStream{static_cast<std::uint64_t>(s)});
        const Eigen::Vector2d col(draw.inputs_one(0, 0), draw.inputs_one(1, 0));
        if ((col - original).lpNorm<Eigen::Infinity>() < 1e-12) {
            saw_original = true;
        } else if ((col - swapped).lpNorm<Eigen::Infinity>() < 1e-12) {
            saw_swapped = true;
        } else {
            FAIL("draw produced a column outside the two possible permutations");
        }
    }
    CHECK(saw_original);
    CHECK(saw_swapped);
}

TEST_CASE("column mean of the perturbed column is preserved") {
    const TabularDataset data = small_gaussian(60, 3, RngStream{6});
    const ImputerPair pair = fit_imputer_pair(data, 0, 0.1);
    for (int s = 0; s < 5; ++s) {
        const SemiKnockoffDraw draw =
            draw_semi_knockoff(data, pair, RngStream{7}.child(static_cast<std::uint64_t>(s)));
        CHECK(draw.inputs_one.col(0).mean() ==
              doctest::Approx(data.inputs.col(0).mean()).epsilon(1e-8));
    }
}

TEST_CASE("draw_batch determinism and base case") {
    const TabularDataset data = small_gaussian(20, 3, RngStream{8});
    const ImputerPair pair = fit_imputer_pair(data, 1, 0.1);

    const auto batch1 = draw_batch(data, pair, RngStream{9}, 5);
    const auto batch2 = draw_batch(data, pair, RngStream{9}, 5);
    REQUIRE(batch1.size() == 5);
    for (std::size_t k = 0; k < 5; ++k) {
        CHECK(batch1[k].permutation_one == batch2[k].permutation_one);
        CHECK(batch1[k].permutation_two == batch2[k].permutation_two);
    }

    // k = 1 equals a single draw with the derived stream
    const auto single = draw_semi_knockoff(data, pair, RngStream{9}.child(0));
    const auto base = draw_batch(data, pair, RngStream{9}, 1);
    CHECK(base[0].permutation_one == single.permutation_one);
    CHECK(base[0].inputs_one == single.inputs_one);

    CHECK_THROWS_AS(draw_batch(data, pair, RngStream{9}, 0), std::invalid_argument);
}

TEST_CASE("batch permutations are pairwise distinct at n = 30") {
    const TabularDataset data = small_gaussian(30, 3, RngStream{10});
    const ImputerPair pair = fit_imputer_pair(data, 0, 0.1);
    for (int s = 0; s < 100; ++s) {
        const auto batch =
            draw_batch(data, pair, RngStream{11}.child(static_cast<std::uint64_t>(s)), 5);
        std::set<std::vector<std::size_t>> unique;
        for (const auto& d : batch) {
            unique.insert(d.permutation_one);
        }
        CHECK(unique.size() == 5);
    }
}

TEST_CASE("oracle draw with exact oracles on a null feature") {
    // X ~ N(0, I): nu is the zero function, residuals are the column itself
    const Eigen::Index n = 50;
    const Eigen::Index p = 3;
    const TabularDataset data = small_gaussian(n, p, RngStream{12});
    GaussianOracle x_oracle{Eigen::VectorXd::Zero(p), Eigen::MatrixXd::Identity(p, p)};
    GaussianOracle joint{Eigen::VectorXd::Zero(p + 1), Eigen::MatrixXd::Identity(p + 1, p + 1)};
    const auto nu = make_conditional_predictor(x_oracle, 0);
    const auto rho = make_conditional_predictor(joint, 0);

    const SemiKnockoffDraw draw = draw_oracle_semi_knockoff(data, nu, rho, RngStream{13});
    CHECK(draw.variant == DrawVariant::oracle);
    // the perturbed column is a permutation of the original one
    std::vector<double> a(data.inputs.col(0).begin(), data.inputs.col(0).end());
    std::vector<double> b(draw.inputs_one.col(0).begin(), draw.inputs_one.col(0).end());
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-12));
    }
}

TEST_CASE("conditioning on a strong signal shrinks oracle rho residuals") {
    // y = X^0 + small noise: E[X^0 | X^-0, y] tracks y closely
    const Eigen::Index n = 2000;
    const Eigen::Index p = 3;
    Rng gen(RngStream{14});
    TabularDataset data;
    data.inputs.resize(n, p);
    data.response.resize(n);
    const double noise_sd = 0.3;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < p; ++j) {
            data.inputs(i, j) = gen.normal();
        }
        data.response[i] = data.inputs(i, 0) + noise_sd * gen.normal();
    }
    GaussianOracle x_oracle{Eigen::VectorXd::Zero(p), Eigen::MatrixXd::Identity(p, p)};
    GaussianOracle joint;
    joint.mean = Eigen::VectorXd::Zero(p + 1);
    joint.covariance = Eigen::MatrixXd::Identity(p + 1, p + 1);
    joint.covariance(0, p) = joint.covariance(p, 0) = 1.0;
    joint.covariance(p, p) = 1.0 + noise_sd * noise_sd;

    const ImputationColumns cols = oracle_imputation(
        data, make_conditional_predictor(x_oracle, 0), make_conditional_predictor(joint, 0));
    const double var_nu = cols.residuals_nu.squaredNorm() / static_cast<double>(n);
    const double var_rho = cols.residuals_rho.squaredNorm() / static_cast<double>(n);
    CHECK(var_rho < var_nu);
}
