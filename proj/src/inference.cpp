#include "semiknock/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "semiknock/parallel.hpp"

namespace semiknock {

SelectionMethod parse_method(const std::string& name) {
    if (name == "wilcoxon") return SelectionMethod::wilcoxon;
    if (name == "sign_test") return SelectionMethod::sign_test;
    if (name == "knockoff" || name == "knockoff_threshold") {
        return SelectionMethod::knockoff_threshold;
    }
    if (name == "bh" || name == "bh_on_wilcoxon") return SelectionMethod::bh_on_wilcoxon;
    throw std::invalid_argument("unknown method: " + name);
}

std::string method_name(SelectionMethod method) {
    switch (method) {
        case SelectionMethod::wilcoxon: return "wilcoxon";
        case SelectionMethod::sign_test: return "sign_test";
        case SelectionMethod::knockoff_threshold: return "knockoff_threshold";
        case SelectionMethod::bh_on_wilcoxon: return "bh_on_wilcoxon";
    }
    throw std::logic_error("unknown method");
}

std::vector<Eigen::Index> SelectionReport::selected_indices() const {
    std::vector<Eigen::Index> out;
    for (const auto& d : decisions) {
        if (d.selected) {
            out.push_back(d.feature_index);
        }
    }
    return out;
}

PairedLossSample paired_losses(const PredictiveModel& model, const LossFunction& loss,
                               const std::vector<SemiKnockoffDraw>& draws,
                               const Eigen::VectorXd& response) {
    if (draws.empty()) {
        throw std::invalid_argument("paired_losses: no draws");
    }
    const Eigen::Index n = response.size();
    PairedLossSample sample;
    sample.losses_one = Eigen::VectorXd::Zero(n);
    sample.losses_two = Eigen::VectorXd::Zero(n);
    for (const auto& draw : draws) {
        sample.losses_one += evaluate_loss(model, loss, draw.inputs_one, response);
        sample.losses_two += evaluate_loss(model, loss, draw.inputs_two, response);
    }
    sample.losses_one /= static_cast<double>(draws.size());
    sample.losses_two /= static_cast<double>(draws.size());
    sample.differences = sample.losses_one - sample.losses_two;
    return sample;
}

PairedLossSample paired_losses(const PredictiveModel& model, const LossFunction& loss,
                               const SemiKnockoffDraw& draw, const Eigen::VectorXd& response) {
    return paired_losses(model, loss, std::vector<SemiKnockoffDraw>{draw}, response);
}

namespace {

struct RankedDiffs {
    std::vector<double> ranks;      // average ranks of |d|, nonzero entries only
    std::vector<bool> positive;     // sign per ranked entry
    std::vector<std::size_t> ties;  // tie-group sizes
};

RankedDiffs rank_absolute(const Eigen::VectorXd& differences) {
    std::vector<double> abs_vals;
    std::vector<bool> signs;
    for (Eigen::Index i = 0; i < differences.size(); ++i) {
        const double d = differences[i];
        if (d != 0.0) {
            abs_vals.push_back(std::abs(d));
            signs.push_back(d > 0.0);
        }
    }
    const std::size_t m = abs_vals.size();
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return abs_vals[a] < abs_vals[b]; });

    RankedDiffs out;
    out.ranks.resize(m);
    out.positive.resize(m);
    std::size_t i = 0;
    while (i < m) {
        std::size_t j = i;
        while (j < m && abs_vals[order[j]] == abs_vals[order[i]]) {
            ++j;
        }
        const double avg = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t k = i; k < j; ++k) {
            out.ranks[order[k]] = avg;
            out.positive[order[k]] = signs[order[k]];
        }
        out.ties.push_back(j - i);
        i = j;
    }
    return out;
}

double normal_upper_tail(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

}  // namespace

double wilcoxon_signed_rank(const Eigen::VectorXd& differences) {
    if (differences.size() < 1) {
        throw std::invalid_argument("wilcoxon_signed_rank: empty input");
    }
    const RankedDiffs ranked = rank_absolute(differences);
    const std::size_t m = ranked.ranks.size();
    if (m == 0) {
        return 1.0;  // all differences zero
    }
    double w_plus = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        if (ranked.positive[i]) {
            w_plus += ranked.ranks[i];
        }
    }

    if (m <= 20) {
        // exact null distribution over doubled ranks (integers even with
        // average-rank ties)
        std::vector<long long> doubled(m);
        long long total = 0;
        for (std::size_t i = 0; i < m; ++i) {
            doubled[i] = std::llround(2.0 * ranked.ranks[i]);
            total += doubled[i];
        }
        std::vector<double> count(static_cast<std::size_t>(total) + 1, 0.0);
        count[0] = 1.0;
        long long reach = 0;
        for (std::size_t i = 0; i < m; ++i) {
            reach += doubled[i];
            for (long long s = reach; s >= doubled[i]; --s) {
                count[static_cast<std::size_t>(s)] +=
                    count[static_cast<std::size_t>(s - doubled[i])];
            }
        }
        const long long obs = std::llround(2.0 * w_plus);
        double tail = 0.0;
        for (long long s = obs; s <= total; ++s) {
            tail += count[static_cast<std::size_t>(s)];
        }
        return tail / std::pow(2.0, static_cast<double>(m));
    }

    const double md = static_cast<double>(m);
    const double mean = md * (md + 1.0) / 4.0;
    double var = md * (md + 1.0) * (2.0 * md + 1.0) / 24.0;
    for (std::size_t t : ranked.ties) {
        const double td = static_cast<double>(t);
        var -= (td * td * td - td) / 48.0;
    }
    if (var <= 0.0) {
        return 1.0;  // all entries tied at one value cancel out only if m small; guard
    }
    const double z = (w_plus - mean - 0.5) / std::sqrt(var);
    return std::clamp(normal_upper_tail(z), 0.0, 1.0);
}

double sign_test(const Eigen::VectorXd& differences) {
    if (differences.size() < 1) {
        throw std::invalid_argument("sign_test: empty input");
    }
    std::size_t m = 0;
    std::size_t positives = 0;
    for (Eigen::Index i = 0; i < differences.size(); ++i) {
        if (differences[i] != 0.0) {
            ++m;
            if (differences[i] > 0.0) {
                ++positives;
            }
        }
    }
    if (m == 0) {
        return 1.0;
    }
    if (m <= 62) {
        // exact integer arithmetic
        unsigned long long tail = 0;
        unsigned long long binom = 1;  // C(m, 0)
        std::vector<unsigned long long> row(m + 1);
        row[0] = 1;
        for (std::size_t i = 1; i <= m; ++i) {
            binom = binom * (m - i + 1) / i;
            row[i] = binom;
        }
        for (std::size_t i = positives; i <= m; ++i) {
            tail += row[i];
        }
        return static_cast<double>(tail) / std::pow(2.0, static_cast<double>(m));
    }
    const double log2m = static_cast<double>(m) * std::log(2.0);
    double p = 0.0;
    for (std::size_t i = positives; i <= m; ++i) {
        const double lc = std::lgamma(static_cast<double>(m) + 1.0) -
                          std::lgamma(static_cast<double>(i) + 1.0) -
                          std::lgamma(static_cast<double>(m - i) + 1.0);
        p += std::exp(lc - log2m);
    }
    return std::min(p, 1.0);
}

ThresholdResult knockoff_threshold(const Eigen::VectorXd& statistics, double q) {
    const Eigen::Index p = statistics.size();
    if (p == 0) {
        throw std::invalid_argument("knockoff_threshold: empty statistics");
    }
    if (!(q > 0.0 && q <= 1.0)) {
        throw std::invalid_argument("knockoff_threshold: q must be in (0, 1]");
    }
    if (!statistics.allFinite()) {
        throw std::invalid_argument("knockoff_threshold: non-finite statistic");
    }
    std::vector<double> candidates;
    for (Eigen::Index j = 0; j < p; ++j) {
        if (statistics[j] != 0.0) {
            candidates.push_back(std::abs(statistics[j]));
        }
    }
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

    ThresholdResult result;
    result.threshold = std::numeric_limits<double>::infinity();
    for (double t : candidates) {
        Eigen::Index neg = 0;
        Eigen::Index pos = 0;
        for (Eigen::Index j = 0; j < p; ++j) {
            if (statistics[j] <= -t) ++neg;
            if (statistics[j] >= t) ++pos;
        }
        const double ratio = (1.0 + static_cast<double>(neg)) /
                             static_cast<double>(std::max<Eigen::Index>(pos, 1));
        if (ratio <= q) {
            result.threshold = t;
            break;
        }
    }
    result.selected.resize(static_cast<std::size_t>(p), false);
    if (std::isfinite(result.threshold)) {
        for (Eigen::Index j = 0; j < p; ++j) {
            result.selected[static_cast<std::size_t>(j)] = statistics[j] >= result.threshold;
        }
    }
    return result;
}

std::vector<bool> benjamini_hochberg(const Eigen::VectorXd& p_values, double q) {
    const Eigen::Index p = p_values.size();
    for (Eigen::Index j = 0; j < p; ++j) {
        if (!(p_values[j] >= 0.0 && p_values[j] <= 1.0)) {
            throw std::invalid_argument("benjamini_hochberg: p-value outside [0, 1]");
        }
    }
    std::vector<double> sorted(p_values.begin(), p_values.end());
    std::sort(sorted.begin(), sorted.end());
    double critical = -1.0;
    for (Eigen::Index i = p; i >= 1; --i) {
        if (sorted[static_cast<std::size_t>(i - 1)] <=
            static_cast<double>(i) * q / static_cast<double>(p)) {
            critical = sorted[static_cast<std::size_t>(i - 1)];
            break;
        }
    }
    std::vector<bool> selected(static_cast<std::size_t>(p), false);
    if (critical >= 0.0) {
        for (Eigen::Index j = 0; j < p; ++j) {
            selected[static_cast<std::size_t>(j)] = p_values[j] <= critical;
        }
    }
    return selected;
}

ImputerFactory ridge_imputer_factory(double lambda) {
    return [lambda](const TabularDataset& data, Eigen::Index j) {
        return fit_imputer_pair(data, j, lambda).columns(data);
    };
}

SelectionReport run_semi_knockoffs(const TabularDataset& data, const PredictiveModel& model,
                                   const LossFunction& loss, const RunConfig& config,
                                   const RngStream& rng, const ImputerFactory& imputers) {
    data.validate();
    if (!(config.level > 0.0 && config.level <= 1.0)) {
        throw std::invalid_argument("level must be in (0, 1]");
    }
    if (config.permutations_per_feature < 1) {
        throw std::invalid_argument("permutations_per_feature must be >= 1");
    }
    const ImputerFactory factory =
        imputers ? imputers : ridge_imputer_factory(config.lambda);

    std::vector<Eigen::Index> features = config.features;
    if (features.empty()) {
        features.resize(static_cast<std::size_t>(data.p()));
        std::iota(features.begin(), features.end(), Eigen::Index{0});
    }
    const std::size_t count = features.size();

    std::vector<double> statistics(count, 0.0);
    std::vector<double> p_values(count, 1.0);
    const bool needs_p = config.method != SelectionMethod::knockoff_threshold;

    parallel_for(count, config.workers, [&](std::size_t idx) {
        const Eigen::Index j = features[idx];
        try {
            const ImputationColumns cols = factory(data, j);
            const auto draws =
                draw_batch_from_columns(data, cols, config.variant,
                                        rng.child(static_cast<std::uint64_t>(j)),
                                        config.permutations_per_feature);
            const PairedLossSample sample = paired_losses(model, loss, draws, data.response);
            statistics[idx] = sample.statistic();
            if (needs_p) {
                p_values[idx] = config.method == SelectionMethod::sign_test
                                    ? sign_test(sample.differences)
                                    : wilcoxon_signed_rank(sample.differences);
            }
        } catch (const std::exception& e) {
            throw std::runtime_error("feature " + std::to_string(j) + ": " + e.what());
        }
    });

    SelectionReport report;
    report.method = config.method;
    report.target_level = config.level;
    report.seed = rng.root_seed;
    report.decisions.resize(count);
    for (std::size_t idx = 0; idx < count; ++idx) {
        auto& d = report.decisions[idx];
        d.feature_index = features[idx];
        d.statistic = statistics[idx];
        d.method = config.method;
    }

    switch (config.method) {
        case SelectionMethod::knockoff_threshold: {
            const Eigen::VectorXd stats =
                Eigen::Map<const Eigen::VectorXd>(statistics.data(),
                                                  static_cast<Eigen::Index>(count));
            const ThresholdResult t = knockoff_threshold(stats, config.level);
            report.threshold = t.threshold;
            for (std::size_t idx = 0; idx < count; ++idx) {
                report.decisions[idx].selected = t.selected[idx];
            }
            break;
        }
        case SelectionMethod::bh_on_wilcoxon: {
            const Eigen::VectorXd pv =
                Eigen::Map<const Eigen::VectorXd>(p_values.data(),
                                                  static_cast<Eigen::Index>(count));
            const std::vector<bool> sel = benjamini_hochberg(pv, config.level);
            for (std::size_t idx = 0; idx < count; ++idx) {
                report.decisions[idx].p_value = p_values[idx];
                report.decisions[idx].selected = sel[idx];
            }
            break;
        }
        case SelectionMethod::wilcoxon:
        case SelectionMethod::sign_test: {
            for (std::size_t idx = 0; idx < count; ++idx) {
                report.decisions[idx].p_value = p_values[idx];
                report.decisions[idx].selected = p_values[idx] <= config.level;
            }
            break;
        }
    }
    return report;
}

}  // namespace semiknock
