#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "semiknock/dataset.hpp"
#include "semiknock/imputer.hpp"
#include "semiknock/loss.hpp"
#include "semiknock/rng.hpp"
#include "semiknock/sampler.hpp"

namespace semiknock {

enum class SelectionMethod { wilcoxon, sign_test, knockoff_threshold, bh_on_wilcoxon };

SelectionMethod parse_method(const std::string& name);
std::string method_name(SelectionMethod method);

struct PairedLossSample {
    Eigen::VectorXd losses_one;  // loss under the nu-side matrices
    Eigen::VectorXd losses_two;  // loss under the rho-side matrices
    Eigen::VectorXd differences;

    double statistic() const { return differences.size() ? differences.mean() : 0.0; }
};

struct FeatureDecision {
    Eigen::Index feature_index = 0;
    double statistic = 0.0;
    std::optional<double> p_value;
    bool selected = false;
    SelectionMethod method = SelectionMethod::wilcoxon;
};

struct SelectionReport {
    std::vector<FeatureDecision> decisions;
    std::optional<double> threshold;  // +infinity encoded as infinity
    double target_level = 0.0;
    SelectionMethod method = SelectionMethod::wilcoxon;
    std::uint64_t seed = 0;

    std::vector<Eigen::Index> selected_indices() const;
};

// Losses of the two perturbed matrices; for a batch of draws, losses are
// averaged per sample index across draws before differencing.
PairedLossSample paired_losses(const PredictiveModel& model, const LossFunction& loss,
                               const std::vector<SemiKnockoffDraw>& draws,
                               const Eigen::VectorXd& response);
PairedLossSample paired_losses(const PredictiveModel& model, const LossFunction& loss,
                               const SemiKnockoffDraw& draw, const Eigen::VectorXd& response);

// One-sided (greater) signed-rank test. Zeros dropped; average ranks for
// ties; exact null distribution for m <= 20, tie-corrected normal
// approximation with continuity correction beyond.
double wilcoxon_signed_rank(const Eigen::VectorXd& differences);

// One-sided (greater) sign test, exact binomial tail.
double sign_test(const Eigen::VectorXd& differences);

struct ThresholdResult {
    double threshold = 0.0;  // +infinity when no candidate qualifies
    std::vector<bool> selected;
};

// T_q = min { t in W : (1 + #{W <= -t}) / (#{W >= t} v 1) <= q } over the
// candidate set W = { |W_j| : W_j != 0 }; knockoff+ offset always on.
ThresholdResult knockoff_threshold(const Eigen::VectorXd& statistics, double q);

// Step-up procedure at level q; ties rejected together.
std::vector<bool> benjamini_hochberg(const Eigen::VectorXd& p_values, double q);

// Supplies imputation columns per feature: ridge-estimated by default,
// oracle-backed in simulations.
using ImputerFactory =
    std::function<ImputationColumns(const TabularDataset&, Eigen::Index)>;

ImputerFactory ridge_imputer_factory(double lambda);

struct RunConfig {
    double lambda = 0.1;
    double level = 0.05;  // q for selection methods, alpha for tests
    int permutations_per_feature = 1;
    SelectionMethod method = SelectionMethod::knockoff_threshold;
    int workers = 0;  // 0 = all hardware threads
    DrawVariant variant = DrawVariant::estimated;
    std::vector<Eigen::Index> features;  // empty = all
};

// The full per-feature pipeline: imputers, draws, paired losses, then the
// decision rule of config.method. Deterministic given rng, independent of
// the worker count.
SelectionReport run_semi_knockoffs(const TabularDataset& data, const PredictiveModel& model,
                                   const LossFunction& loss, const RunConfig& config,
                                   const RngStream& rng,
                                   const ImputerFactory& imputers = nullptr);

}  // namespace semiknock
