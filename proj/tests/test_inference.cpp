#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "semiknock/imputer.hpp"
#include "semiknock/inference.hpp"
#include "semiknock/models.hpp"
#include "semiknock/rng.hpp"

using namespace semiknock;

namespace {

// Independent oracle: full 2^m enumeration of the signed-rank null.
double wilcoxon_brute_force(const Eigen::VectorXd& differences) {
    std::vector<double> abs_vals;
    std::vector<bool> positive;
    for (Eigen::Index i = 0; i < differences.size(); ++i) {
        if (differences[i] != 0.0) {
            abs_vals.push_back(std::abs(differences[i]));
            positive.push_back(differences[i] > 0.0);
        }
    }
    const std::size_t m = abs_vals.size();
    if (m == 0) {
        return 1.0;
    }
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return abs_vals[a] < abs_vals[b]; });
    std::vector<double> rank(m);
    std::size_t i = 0;
    while (i < m) {
        std::size_t j = i;
        while (j < m && abs_vals[order[j]] == abs_vals[order[i]]) {
            ++j;
        }
        const double avg = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t k = i; k < j; ++k) {
            rank[order[k]] = avg;
        }
        i = j;
    }
    double observed = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
        if (positive[k]) {
            observed += rank[k];
        }
    }
    std::size_t hits = 0;
    const std::size_t total = std::size_t{1} << m;
    for (std::size_t mask = 0; mask < total; ++mask) {
        double w = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
            if (mask & (std::size_t{1} << k)) {
                w += rank[k];
            }
        }
        if (w >= observed - 1e-12) {
            ++hits;
        }
    }
    return static_cast<double>(hits) / static_cast<double>(total);
}

double sign_test_brute_force(const Eigen::VectorXd& differences) {
    std::size_t m = 0;
    std::size_t pos = 0;
    for (Eigen::Index i = 0; i < differences.size(); ++i) {
        if (differences[i] != 0.0) {
            ++m;
            if (differences[i] > 0.0) {
                ++pos;
            }
        }
    }
    if (m == 0) {
        return 1.0;
    }
    std::size_t hits = 0;
    const std::size_t total = std::size_t{1} << m;
    for (std::size_t mask = 0; mask < total; ++mask) {
        if (static_cast<std::size_t>(std::popcount(mask)) >= pos) {
            ++hits;
        }
    }
    return static_cast<double>(hits) / static_cast<double>(total);
}

// Exhaustive-scan oracle over all candidate thresholds.
ThresholdResult threshold_brute_force(const Eigen::VectorXd& w, double q) {
    std::vector<double> candidates;
    for (Eigen::Index j = 0; j < w.size(); ++j) {
        if (w[j] != 0.0) {
            candidates.push_back(std::abs(w[j]));
        }
    }
    std::sort(candidates.begin(), candidates.end());
    ThresholdResult out;
    out.threshold = std::numeric_limits<double>::infinity();
    out.selected.assign(static_cast<std::size_t>(w.size()), false);
    for (double t : candidates) {
        int neg = 0;
        int pos = 0;
        for (Eigen::Index j = 0; j < w.size(); ++j) {
            neg += w[j] <= -t;
            pos += w[j] >= t;
        }
        if ((1.0 + neg) / std::max(pos, 1) <= q) {
            out.threshold = t;
            break;
        }
    }
    if (std::isfinite(out.threshold)) {
        for (Eigen::Index j = 0; j < w.size(); ++j) {
            out.selected[static_cast<std::size_t>(j)] = w[j] >= out.threshold;
        }
    }
    return out;
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

TEST_CASE("wilcoxon hand examples") {
    // ranks of |1.2|, |-0.4|, |2.1| are 2, 1, 3; W+ = 5; tail {5, 6} of 8
    CHECK(wilcoxon_signed_rank(vec({1.2, -0.4, 2.1})) == doctest::Approx(0.25));
    CHECK(wilcoxon_signed_rank(vec({1, 2, 3, 4, 5})) == doctest::Approx(1.0 / 32.0));
    CHECK(wilcoxon_signed_rank(vec({0, 0, 0})) == 1.0);
}

TEST_CASE("wilcoxon matches brute-force enumeration for m <= 12") {
    Rng gen(RngStream{20});
    for (int trial = 0; trial < 100; ++trial) {
        const Eigen::Index m = 1 + static_cast<Eigen::Index>(gen.uniform_int(12));
        Eigen::VectorXd d(m);
        for (Eigen::Index i = 0; i < m; ++i) {
            const double roll = gen.uniform();
            if (roll < 0.15) {
                d[i] = 0.0;  // exercise zero-dropping
            } else if (roll < 0.4) {
                // quantized values to force ties in |d|
                d[i] = (gen.uniform() < 0.5 ? -1.0 : 1.0) *
                       (1.0 + static_cast<double>(gen.uniform_int(3)));
            } else {
                d[i] = gen.normal();
            }
        }
        CHECK(wilcoxon_signed_rank(d) == doctest::Approx(wilcoxon_brute_force(d)).epsilon(1e-12));
    }
}

TEST_CASE("sign test hand examples and brute force") {
    Eigen::VectorXd ten_pos = Eigen::VectorXd::Ones(10);
    CHECK(sign_test(ten_pos) == doctest::Approx(std::pow(2.0, -10.0)));
    CHECK(sign_test(vec({1, 1, 1, 1, 1, -1, -1, -1, -1, -1})) ==
          doctest::Approx(0.623046875));
    CHECK(sign_test(vec({0.0, 0.0})) == 1.0);

    Rng gen(RngStream{21});
    for (int trial = 0; trial < 100; ++trial) {
        const Eigen::Index m = 1 + static_cast<Eigen::Index>(gen.uniform_int(12));
        Eigen::VectorXd d(m);
        for (Eigen::Index i = 0; i < m; ++i) {
            const double roll = gen.uniform();
            d[i] = roll < 0.1 ? 0.0 : gen.normal();
        }
        CHECK(sign_test(d) == doctest::Approx(sign_test_brute_force(d)).epsilon(1e-12));
    }
}

TEST_CASE("wilcoxon large-sample path is sane") {
    Rng gen(RngStream{22});
    Eigen::VectorXd d(200);
    for (Eigen::Index i = 0; i < 200; ++i) {
        d[i] = gen.normal();
    }
    const double p = wilcoxon_signed_rank(d);
    CHECK(p > 0.0);
    CHECK(p < 1.0);
    // strong positive shift is detected
    const double p_shift = wilcoxon_signed_rank(d.array() + 1.0);
    CHECK(p_shift < 1e-6);
}

TEST_CASE("sign test p-values are superuniform under symmetric nulls") {
    Rng gen(RngStream{23});
    const int replicates = 1000;
    const double alpha = 0.05;
    int rejections = 0;
    for (int r = 0; r < replicates; ++r) {
        Eigen::VectorXd d(30);
        for (Eigen::Index i = 0; i < 30; ++i) {
            d[i] = gen.normal();
        }
        if (sign_test(d) <= alpha) {
            ++rejections;
        }
    }
    const double rate = static_cast<double>(rejections) / replicates;
    CHECK(rate <= alpha + 3.0 * std::sqrt(alpha / replicates));
}

TEST_CASE("knockoff threshold hand examples") {
    const ThresholdResult a = knockoff_threshold(vec({3, 2, 1.5, -1}), 0.5);
    CHECK(a.threshold == doctest::Approx(1.5));
    CHECK(a.selected == std::vector<bool>{true, true, true, false});

    const ThresholdResult b = knockoff_threshold(vec({-1, -2, -0.5}), 0.5);
    CHECK(std::isinf(b.threshold));
    CHECK(std::none_of(b.selected.begin(), b.selected.end(), [](bool s) { return s; }));

    const ThresholdResult c = knockoff_threshold(vec({1.0}), 1.0);
    CHECK(c.threshold == doctest::Approx(1.0));
    CHECK(c.selected == std::vector<bool>{true});

    CHECK_THROWS_AS(knockoff_threshold(Eigen::VectorXd(), 0.5), std::invalid_argument);
}

TEST_CASE("knockoff threshold matches the exhaustive scan on random vectors") {
    Rng gen(RngStream{24});
    for (int trial = 0; trial < 1000; ++trial) {
        const Eigen::Index p = 1 + static_cast<Eigen::Index>(gen.uniform_int(100));
        Eigen::VectorXd w(p);
        for (Eigen::Index j = 0; j < p; ++j) {
            const double roll = gen.uniform();
            if (roll < 0.1) {
                w[j] = 0.0;
            } else if (roll < 0.55) {
                w[j] = std::abs(gen.normal());
            } else {
                w[j] = -std::abs(gen.normal());
            }
        }
        const double q = trial % 10 == 0 ? 1.0 : gen.uniform() * 0.999 + 1e-3;
        const ThresholdResult mine = knockoff_threshold(w, q);
        const ThresholdResult oracle = threshold_brute_force(w, q);
        CHECK(mine.threshold == oracle.threshold);
        CHECK(mine.selected == oracle.selected);
    }
}

TEST_CASE("knockoff selection is invariant under increasing odd transforms") {
    Rng gen(RngStream{25});
    for (int trial = 0; trial < 50; ++trial) {
        Eigen::VectorXd w(30);
        for (Eigen::Index j = 0; j < 30; ++j) {
            w[j] = gen.normal();
        }
        const double q = 0.2 + 0.6 * gen.uniform();
        const auto base = knockoff_threshold(w, q);
        // g(t) = t^3 + t, strictly increasing
        const Eigen::VectorXd transformed = w.unaryExpr([](double x) {
            const double a = std::abs(x);
            return (x < 0 ? -1.0 : 1.0) * (a * a * a + a);
        });
        const auto mapped = knockoff_threshold(transformed, q);
        CHECK(base.selected == mapped.selected);
    }
}

TEST_CASE("enlarging q never shrinks the selected set") {
    Rng gen(RngStream{26});
    Eigen::VectorXd w(40);
    for (Eigen::Index j = 0; j < 40; ++j) {
        w[j] = gen.normal();
    }
    std::size_t previous = 0;
    for (double q : {0.05, 0.1, 0.2, 0.4, 0.8, 1.0}) {
        const auto result = knockoff_threshold(w, q);
        const std::size_t count = static_cast<std::size_t>(
            std::count(result.selected.begin(), result.selected.end(), true));
        CHECK(count >= previous);
        previous = count;
    }
}

TEST_CASE("benjamini_hochberg hand examples") {
    const auto sel = benjamini_hochberg(vec({0.01, 0.04, 0.03, 0.2}), 0.05);
    CHECK(sel == std::vector<bool>{true, false, false, false});
    CHECK(benjamini_hochberg(Eigen::VectorXd::Zero(4), 0.05) ==
          std::vector<bool>(4, true));
    CHECK(benjamini_hochberg(Eigen::VectorXd::Ones(4), 0.05) ==
          std::vector<bool>(4, false));
}

TEST_CASE("paired losses: model ignoring feature j gives exact zeros") {
    Rng gen(RngStream{27});
    TabularDataset data;
    data.inputs.resize(30, 3);
    data.response.resize(30);
    for (Eigen::Index i = 0; i < 30; ++i) {
        data.response[i] = gen.normal();
        for (Eigen::Index j = 0; j < 3; ++j) {
            data.inputs(i, j) = gen.normal();
        }
    }
    Eigen::VectorXd coef(3);
    coef << 1.0, 0.0, -2.0;  // coefficient 0 on feature 1
    LinearModel model(coef, 0.0, LinkKind::identity);
    const ImputerPair pair = fit_imputer_pair(data, 1, 0.1);
    const auto draw = draw_semi_knockoff(data, pair, RngStream{28});
    const PairedLossSample sample =
        paired_losses(model, LossFunction::squared_error(), draw, data.response);
    CHECK(sample.differences.lpNorm<Eigen::Infinity>() == 0.0);
    CHECK(sample.statistic() == 0.0);
}

TEST_CASE("paired losses match a hand computation on n = 2") {
    TabularDataset data;
    data.inputs.resize(2, 1);
    data.inputs << 1.0, -1.0;
    data.response.resize(2);
    data.response << 0.0, 0.0;
    LinearModel model(Eigen::VectorXd::Ones(1), 0.0, LinkKind::identity);

    SemiKnockoffDraw draw;
    draw.feature_index = 0;
    // hand-specified perturbed columns
    draw.inputs_one = data.inputs;
    draw.inputs_one(0, 0) = 2.0;
    draw.inputs_one(1, 0) = -2.0;
    draw.inputs_two = data.inputs;
    draw.permutation_one = {1, 0};
    draw.permutation_two = {0, 1};

    const PairedLossSample sample =
        paired_losses(model, LossFunction::squared_error(), draw, data.response);
    CHECK(sample.differences[0] == doctest::Approx(4.0 - 1.0));
    CHECK(sample.differences[1] == doctest::Approx(4.0 - 1.0));
    CHECK(sample.statistic() == doctest::Approx(3.0));
}

TEST_CASE("run_semi_knockoffs with a constant model selects nothing") {
    Rng gen(RngStream{29});
    TabularDataset data;
    data.inputs.resize(25, 4);
    data.response.resize(25);
    for (Eigen::Index i = 0; i < 25; ++i) {
        data.response[i] = gen.normal();
        for (Eigen::Index j = 0; j < 4; ++j) {
            data.inputs(i, j) = gen.normal();
        }
    }
    LinearModel constant(Eigen::VectorXd::Zero(4), 1.5, LinkKind::identity);
    RunConfig config;
    config.method = SelectionMethod::knockoff_threshold;
    config.level = 0.2;
    const SelectionReport report = run_semi_knockoffs(
        data, constant, LossFunction::squared_error(), config, RngStream{30});
    CHECK(report.selected_indices().empty());
    REQUIRE(report.threshold.has_value());
    CHECK(std::isinf(*report.threshold));
    for (const auto& d : report.decisions) {
        CHECK(d.statistic == 0.0);
    }
}

TEST_CASE("run_semi_knockoffs is deterministic across worker counts") {
    Rng gen(RngStream{31});
    TabularDataset data;
    data.inputs.resize(60, 6);
    data.response.resize(60);
    for (Eigen::Index i = 0; i < 60; ++i) {
        for (Eigen::Index j = 0; j < 6; ++j) {
            data.inputs(i, j) = gen.normal();
        }
        data.response[i] = data.inputs(i, 0) + 0.5 * gen.normal();
    }
    const LinearModel model = fit_linear(data, 0.01);
    RunConfig config;
    config.method = SelectionMethod::wilcoxon;
    config.level = 0.05;
    config.permutations_per_feature = 3;

    config.workers = 1;
    const SelectionReport serial = run_semi_knockoffs(
        data, model, LossFunction::squared_error(), config, RngStream{32});
    config.workers = 4;
    const SelectionReport parallel = run_semi_knockoffs(
        data, model, LossFunction::squared_error(), config, RngStream{32});
    REQUIRE(serial.decisions.size() == parallel.decisions.size());
    for (std::size_t i = 0; i < serial.decisions.size(); ++i) {
        CHECK(serial.decisions[i].statistic == parallel.decisions[i].statistic);
        CHECK(*serial.decisions[i].p_value == *parallel.decisions[i].p_value);
        CHECK(serial.decisions[i].selected == parallel.decisions[i].selected);
    }
}

TEST_CASE("per-feature failures carry the feature index") {
    TabularDataset data;
    data.inputs.resize(10, 2);
    data.inputs.setRandom();
    data.response = Eigen::VectorXd::Zero(10);
    data.response[0] = 1.0;
    LinearModel model(Eigen::VectorXd::Ones(2), 0.0, LinkKind::identity);
    RunConfig config;
    config.method = SelectionMethod::wilcoxon;
    // an imputer factory that rejects feature 1
    const ImputerFactory broken = [](const TabularDataset& d, Eigen::Index j) {
        if (j == 1) {
            throw std::runtime_error("synthetic failure");
        }
        return fit_imputer_pair(d, j, 0.1).columns(d);
    };
    config.workers = 1;
    CHECK_THROWS_WITH_AS(
        run_semi_knockoffs(data, model, LossFunction::squared_error(), config, RngStream{33},
                           broken),
        doctest::Contains("feature 1"), std::runtime_error);
}
