#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "semiknock/dataset.hpp"
#include "semiknock/gaussian.hpp"
#include "semiknock/inference.hpp"
#include "semiknock/models.hpp"
#include "semiknock/rng.hpp"

namespace semiknock {

enum class SettingKind {
    adjacent_support,
    masked_correlation,
    heavy_tails,
    dr_nonlinear,
    stability_blocks
};

SettingKind parse_setting(const std::string& name);
std::string setting_name(SettingKind kind);

struct SyntheticSetting {
    SettingKind kind = SettingKind::adjacent_support;
    Eigen::Index n = 300;
    Eigen::Index p = 50;
    double correlation_rho = 0.6;  // AR(1) base
    double noise_sd = 1.0;
    double sparsity = 0.25;  // fraction of important features

    void validate() const;
};

// Benchmark defaults per setting kind (n, p overridable afterwards).
SyntheticSetting make_setting(SettingKind kind, Eigen::Index n = 300, Eigen::Index p = 50);

struct GroundTruth {
    std::vector<bool> important;
    std::optional<Eigen::VectorXd> generating_coefficients;

    Eigen::Index important_count() const;
    Eigen::Index null_count() const { return static_cast<Eigen::Index>(important.size()) -
                                             important_count(); }
};

struct GeneratedData {
    TabularDataset data;
    GroundTruth truth;
};

GeneratedData generate(const SyntheticSetting& setting, const RngStream& rng);

// Gaussian description of the inputs; exact for the Gaussian-design
// settings, rejected for heavy_tails and masked_correlation.
GaussianOracle input_gaussian_oracle(const SyntheticSetting& setting);

// Joint (X, y) Gaussian with y last; exact when y is linear in X with
// Gaussian noise (adjacent_support, stability_blocks with known beta).
GaussianOracle joint_gaussian_oracle(const SyntheticSetting& setting,
                                     const Eigen::VectorXd& beta, double noise_sd);

// Oracle nu/rho imputation columns from the joint (X, y) Gaussian.
ImputerFactory oracle_imputer_factory(const GaussianOracle& joint);

struct InjectedNull {
    TabularDataset data;  // p + 1 columns, the new column appended last
    Eigen::Index injected_index = 0;
};

// Appends a standardized artificial feature: target_correlation times the
// standardized column-mean direction plus matched independent noise.
// Conditionally independent of the response given the originals.
InjectedNull inject_correlated_null(const TabularDataset& data, double target_correlation,
                                    const RngStream& rng);

struct MetricSet {
    double fdp = 0.0;
    double power = 0.0;
    double type_I = 0.0;
};

MetricSet metrics(const SelectionReport& decisions, const GroundTruth& truth);

// Mann-Whitney AUC of per-feature evidence scores against the truth
// labels; ties count one half.
double auc_from_scores(const Eigen::VectorXd& scores, const GroundTruth& truth);

// Exact empirical 1-Wasserstein distance for equal-size scalar samples.
double wasserstein_1d(const Eigen::VectorXd& sample_a, const Eigen::VectorXd& sample_b);

enum class ModelSpec { linear, boosted_stumps };

struct ExperimentConfig {
    RunConfig run;
    ModelSpec model = ModelSpec::boosted_stumps;
    double model_ridge_lambda = 0.1;
    int boosting_rounds = 200;
    double learning_rate = 0.1;
    bool oracle_imputers = false;
};

struct ExperimentReport {
    std::vector<MetricSet> per_replicate;
    std::vector<double> per_replicate_auc;
    double type_I_error = 0.0;
    double fdr = 0.0;
    double power = 0.0;
    double auc = 0.0;
    int replicate_count = 0;
    double runtime_seconds = 0.0;
    std::string configuration;
};

ExperimentReport run_replicated(const SyntheticSetting& setting, const ExperimentConfig& config,
                                int replicates, const RngStream& rng);

// ||theta-without-dropped (extended by 0) - theta-full|| on a fresh draw
// of the setting, probing the dropped feature of the imputer regression.
double stability_probe_replicate(const SyntheticSetting& setting, Eigen::Index dropped_index,
                                 double lambda, const RngStream& rng);

struct DoubleRobustnessSample {
    Eigen::VectorXd estimated_vs_estimated;  // blue
    Eigen::VectorXd estimated_vs_oracle;     // orange, shared permutation
};

DoubleRobustnessSample double_robustness_probe(const SyntheticSetting& setting,
                                               const ExperimentConfig& config, double lambda,
                                               const RngStream& rng);

struct SnapshotRow {
    Eigen::Index feature_index = 0;
    double statistic = 0.0;
    bool is_null = false;
};

struct ExchangeabilitySnapshot {
    std::vector<SnapshotRow> rows;
    double threshold = 0.0;
};

ExchangeabilitySnapshot exchangeability_snapshot(const SyntheticSetting& setting,
                                                 const ExperimentConfig& config,
                                                 const RngStream& rng);

}  // namespace semiknock
