#include <doctest.h>

#include <cmath>

#include "semiknock/rng.hpp"
#include "semiknock/simbench.hpp"

using namespace semiknock;

namespace {

double correlation(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    const Eigen::VectorXd ac = a.array() - a.mean();
    const Eigen::VectorXd bc = b.array() - b.mean();
    return ac.dot(bc) / std::sqrt(ac.squaredNorm() * bc.squaredNorm());
}

Eigen::VectorXd vec(std::initializer_list<double> values) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(values.size()));
    Eigen::Index i = 0;
    for (double x : values) {
        v[i++] = x;
    }
    return v;
}

}  // namespace

TEST_CASE("setting names parse and round-trip") {
    for (SettingKind kind :
         {SettingKind::adjacent_support, SettingKind::masked_correlation,
          SettingKind::heavy_tails, SettingKind::dr_nonlinear, SettingKind::stability_blocks}) {
        CHECK(parse_setting(setting_name(kind)) == kind);
    }
    CHECK(parse_setting("adjacent") == SettingKind::adjacent_support);
    CHECK(parse_setting("dr") == SettingKind::dr_nonlinear);
    CHECK_THROWS_AS(parse_setting("bogus"), std::invalid_argument);
}

TEST_CASE("make_setting applies per-kind defaults") {
    const SyntheticSetting dr = make_setting(SettingKind::dr_nonlinear);
    CHECK(dr.correlation_rho == doctest::Approx(0.5));
    CHECK(dr.noise_sd == doctest::Approx(std::sqrt(0.5)));
    const SyntheticSetting masked = make_setting(SettingKind::masked_correlation);
    CHECK(masked.noise_sd == doctest::Approx(0.5));
    const SyntheticSetting adjacent = make_setting(SettingKind::adjacent_support);
    CHECK(adjacent.correlation_rho == doctest::Approx(0.6));
    CHECK(adjacent.noise_sd == doctest::Approx(1.0));
}

TEST_CASE("adjacent_support generation matches its description") {
    const SyntheticSetting setting = make_setting(SettingKind::adjacent_support, 4000, 10);
    const GeneratedData gen = generate(setting, RngStream{60});
    CHECK(gen.data.n() == 4000);
    CHECK(gen.data.p() == 10);

    // floor(0.25 * 10) leading coefficients in [1, 2)
    CHECK(gen.truth.important_count() == 2);
    REQUIRE(gen.truth.generating_coefficients.has_value());
    const Eigen::VectorXd& beta = *gen.truth.generating_coefficients;
    for (Eigen::Index j = 0; j < 2; ++j) {
        CHECK(gen.truth.important[static_cast<std::size_t>(j)]);
        CHECK(beta[j] >= 1.0);
        CHECK(beta[j] < 2.0);
    }
    CHECK(beta.tail(8).lpNorm<Eigen::Infinity>() == 0.0);

    // AR(1) neighbours at rho = 0.6
    CHECK(correlation(gen.data.inputs.col(0), gen.data.inputs.col(1)) ==
          doctest::Approx(0.6).epsilon(0.1));
    CHECK(std::abs(correlation(gen.data.inputs.col(0), gen.data.inputs.col(9))) < 0.1);

    // residual noise has unit standard deviation
    const Eigen::VectorXd resid = gen.data.response - gen.data.inputs * beta;
    CHECK(std::sqrt(resid.squaredNorm() / 4000.0) == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("masked_correlation plants a strongly correlated null neighbour") {
    const SyntheticSetting setting = make_setting(SettingKind::masked_correlation, 4000, 8);
    const GeneratedData gen = generate(setting, RngStream{61});
    CHECK(gen.truth.important_count() == 1);
    Eigen::Index l = -1;
    for (Eigen::Index j = 0; j < 8; ++j) {
        if (gen.truth.important[static_cast<std::size_t>(j)]) {
            l = j;
        }
    }
    REQUIRE(l >= 1);
    // X_{l-1} = X_l + 0.5 eps: corr = 1/sqrt(1.25)
    CHECK(correlation(gen.data.inputs.col(l - 1), gen.data.inputs.col(l)) ==
          doctest::Approx(1.0 / std::sqrt(1.25)).epsilon(0.05));
    CHECK(correlation(gen.data.response, gen.data.inputs.col(l)) > 0.85);
}

TEST_CASE("heavy_tails inputs have much fatter tails than Gaussian") {
    const SyntheticSetting setting = make_setting(SettingKind::heavy_tails, 3000, 6);
    const GeneratedData heavy = generate(setting, RngStream{62});
    const SyntheticSetting light_setting = make_setting(SettingKind::adjacent_support, 3000, 6);
    const GeneratedData light = generate(light_setting, RngStream{62});

    auto tail_fraction = [](const Eigen::MatrixXd& x) {
        double count = 0.0;
        for (Eigen::Index j = 0; j < x.cols(); ++j) {
            const Eigen::VectorXd col = x.col(j);
            const double sd = std::sqrt((col.array() - col.mean()).square().mean());
            count += (col.array().abs() > 4.0 * sd).count();
        }
        return count / static_cast<double>(x.size());
    };
    CHECK(tail_fraction(heavy.data.inputs) > 5.0 * tail_fraction(light.data.inputs) + 1e-4);
}

TEST_CASE("dr_nonlinear truth and validation") {
    const SyntheticSetting setting = make_setting(SettingKind::dr_nonlinear, 200, 10);
    const GeneratedData gen = generate(setting, RngStream{63});
    CHECK(gen.truth.important ==
          std::vector<bool>{false, true, true, true, true, false, false, false, false, false});

    SyntheticSetting too_small = make_setting(SettingKind::dr_nonlinear, 200, 4);
    CHECK_THROWS_AS(generate(too_small, RngStream{63}), std::invalid_argument);
}

TEST_CASE("stability_blocks uses aligned non-overlapping blocks of five") {
    const SyntheticSetting setting = make_setting(SettingKind::stability_blocks, 500, 50);
    const GeneratedData gen = generate(setting, RngStream{64});
    // floor(0.25 * 50 / 5) = 2 blocks of 5
    CHECK(gen.truth.important_count() == 10);
    for (Eigen::Index start = 0; start < 50; start += 5) {
        bool first = gen.truth.important[static_cast<std::size_t>(start)];
        for (Eigen::Index j = start; j < start + 5; ++j) {
            CHECK(gen.truth.important[static_cast<std::size_t>(j)] == first);
        }
    }
}

TEST_CASE("joint_gaussian_oracle on a one-feature problem") {
    SyntheticSetting setting = make_setting(SettingKind::adjacent_support, 100, 1);
    const GaussianOracle joint = joint_gaussian_oracle(setting, vec({2.0}), 1.0);
    CHECK(joint.covariance(0, 0) == doctest::Approx(1.0));
    CHECK(joint.covariance(0, 1) == doctest::Approx(2.0));
    CHECK(joint.covariance(1, 1) == doctest::Approx(5.0));

    const SyntheticSetting masked = make_setting(SettingKind::masked_correlation, 100, 4);
    CHECK_THROWS_AS(input_gaussian_oracle(masked), std::invalid_argument);
}

TEST_CASE("inject_correlated_null appends a standardized decoy") {
    const SyntheticSetting setting = make_setting(SettingKind::adjacent_support, 1000, 6);
    const GeneratedData gen = generate(setting, RngStream{65});
    const InjectedNull injected = inject_correlated_null(gen.data, 0.7, RngStream{66});

    CHECK(injected.injected_index == 6);
    CHECK(injected.data.p() == 7);
    CHECK(injected.data.inputs.leftCols(6) == gen.data.inputs);
    CHECK(injected.data.response == gen.data.response);

    const Eigen::VectorXd col = injected.data.inputs.col(6);
    CHECK(std::abs(col.mean()) < 1e-10);
    CHECK(col.squaredNorm() / 1000.0 == doctest::Approx(1.0).epsilon(1e-10));

    // realized correlation with the mean direction is near the target
    Eigen::VectorXd direction = Eigen::VectorXd::Zero(1000);
    for (Eigen::Index j = 0; j < 6; ++j) {
        const Eigen::VectorXd c = gen.data.inputs.col(j);
        const Eigen::VectorXd cc = c.array() - c.mean();
        direction += cc / std::sqrt(cc.squaredNorm() / 1000.0);
    }
    CHECK(correlation(col, direction) == doctest::Approx(0.7).epsilon(0.1));

    CHECK_THROWS_AS(inject_correlated_null(gen.data, 1.0, RngStream{66}),
                    std::invalid_argument);
}

TEST_CASE("metrics on a hand example") {
    GroundTruth truth;
    truth.important = {true, true, false, false, false};
    SelectionReport report;
    for (Eigen::Index j = 0; j < 5; ++j) {
        FeatureDecision d;
        d.feature_index = j;
        d.selected = (j == 0 || j == 2);
        report.decisions.push_back(d);
    }
    const MetricSet m = metrics(report, truth);
    CHECK(m.fdp == doctest::Approx(0.5));       // 1 false of 2 selected
    CHECK(m.power == doctest::Approx(0.5));     // 1 true of 2 important
    CHECK(m.type_I == doctest::Approx(1.0 / 3.0));

    // empty selection: fdp clamps to 0
    SelectionReport none;
    none.decisions.resize(5);
    for (Eigen::Index j = 0; j < 5; ++j) {
        none.decisions[static_cast<std::size_t>(j)].feature_index = j;
    }
    const MetricSet z = metrics(none, truth);
    CHECK(z.fdp == 0.0);
    CHECK(z.power == 0.0);
    CHECK(z.type_I == 0.0);
}

TEST_CASE("auc_from_scores hand examples") {
    GroundTruth truth;
    truth.important = {true, false, false};
    CHECK(auc_from_scores(vec({0.9, 0.1, 0.5}), truth) == doctest::Approx(1.0));
    CHECK(auc_from_scores(vec({0.1, 0.9, 0.5}), truth) == doctest::Approx(0.0));
    CHECK(auc_from_scores(vec({0.5, 0.5, 0.1}), truth) == doctest::Approx(0.75));

    GroundTruth all_null;
    all_null.important = {false, false};
    CHECK_THROWS_AS(auc_from_scores(vec({0.1, 0.2}), all_null), std::invalid_argument);
}

TEST_CASE("wasserstein_1d frozen examples and metric properties") {
    CHECK(wasserstein_1d(vec({1, 2, 3}), vec({1, 2, 3})) == 0.0);
    CHECK(wasserstein_1d(vec({0, 1}), vec({1, 2})) == doctest::Approx(1.0));
    CHECK(wasserstein_1d(vec({0, 0}), vec({0, 1})) == doctest::Approx(0.5));
    CHECK_THROWS_AS(wasserstein_1d(vec({1}), vec({1, 2})), std::invalid_argument);

    Rng gen(RngStream{67});
    for (int trial = 0; trial < 50; ++trial) {
        Eigen::VectorXd a(10), b(10), c(10);
        for (Eigen::Index i = 0; i < 10; ++i) {
            a[i] = gen.normal();
            b[i] = gen.normal();
            c[i] = gen.normal();
        }
        const double ab = wasserstein_1d(a, b);
        CHECK(ab == wasserstein_1d(b, a));
        CHECK(ab >= 0.0);
        CHECK(wasserstein_1d(a, c) <= ab + wasserstein_1d(b, c) + 1e-12);
        // translation shifts the distance by at most |delta| and exactly
        // |delta| against itself
        CHECK(wasserstein_1d(a, Eigen::VectorXd(a.array() + 1.5)) == doctest::Approx(1.5));
    }
}

TEST_CASE("run_replicated is deterministic and within metric bounds") {
    const SyntheticSetting setting = make_setting(SettingKind::adjacent_support, 120, 8);
    ExperimentConfig config;
    config.model = ModelSpec::linear;
    config.model_ridge_lambda = 0.1;
    config.run.method = SelectionMethod::knockoff_threshold;
    config.run.level = 0.2;
    config.run.lambda = 0.1;

    const ExperimentReport a = run_replicated(setting, config, 4, RngStream{68});
    const ExperimentReport b = run_replicated(setting, config, 4, RngStream{68});
    CHECK(a.replicate_count == 4);
    for (std::size_t r = 0; r < 4; ++r) {
        CHECK(a.per_replicate[r].fdp == b.per_replicate[r].fdp);
        CHECK(a.per_replicate[r].power == b.per_replicate[r].power);
        CHECK(a.per_replicate_auc[r] == b.per_replicate_auc[r]);
    }
    CHECK(a.fdr >= 0.0);
    CHECK(a.fdr <= 1.0);
    CHECK(a.power >= 0.0);
    CHECK(a.power <= 1.0);
    CHECK(a.auc >= 0.0);
    CHECK(a.auc <= 1.0);
    CHECK(a.configuration.find("adjacent_support") != std::string::npos);

    // worker count does not change results
    ExperimentConfig parallel = config;
    parallel.run.workers = 3;
    const ExperimentReport c = run_replicated(setting, parallel, 4, RngStream{68});
    for (std::size_t r = 0; r < 4; ++r) {
        CHECK(a.per_replicate[r].fdp == c.per_replicate[r].fdp);
        CHECK(a.per_replicate_auc[r] == c.per_replicate_auc[r]);
    }
}

TEST_CASE("double_robustness_probe produces paired samples of length n") {
    const SyntheticSetting setting = make_setting(SettingKind::dr_nonlinear, 150, 6);
    ExperimentConfig config;
    config.model = ModelSpec::boosted_stumps;
    config.boosting_rounds = 30;
    const DoubleRobustnessSample sample =
        double_robustness_probe(setting, config, 0.1, RngStream{69});
    CHECK(sample.estimated_vs_estimated.size() == 150);
    CHECK(sample.estimated_vs_oracle.size() == 150);

    const SyntheticSetting wrong = make_setting(SettingKind::adjacent_support, 150, 6);
    CHECK_THROWS_AS(double_robustness_probe(wrong, config, 0.1, RngStream{69}),
                    std::invalid_argument);
}
