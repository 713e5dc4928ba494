#include "semiknock/simbench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "semiknock/imputer.hpp"
#include "semiknock/parallel.hpp"

namespace semiknock {

SettingKind parse_setting(const std::string& name) {
    if (name == "adjacent" || name == "adjacent_support") return SettingKind::adjacent_support;
    if (name == "masked" || name == "masked_correlation") return SettingKind::masked_correlation;
    if (name == "heavy" || name == "heavy_tails") return SettingKind::heavy_tails;
    if (name == "dr" || name == "dr_nonlinear") return SettingKind::dr_nonlinear;
    if (name == "stability" || name == "stability_blocks") return SettingKind::stability_blocks;
    throw std::invalid_argument("unknown setting: " + name);
}

std::string setting_name(SettingKind kind) {
    switch (kind) {
        case SettingKind::adjacent_support: return "adjacent_support";
        case SettingKind::masked_correlation: return "masked_correlation";
        case SettingKind::heavy_tails: return "heavy_tails";
        case SettingKind::dr_nonlinear: return "dr_nonlinear";
        case SettingKind::stability_blocks: return "stability_blocks";
    }
    throw std::logic_error("unknown setting");
}

void SyntheticSetting::validate() const {
    if (n < 2 || p < 1) {
        throw std::invalid_argument("setting needs n >= 2 and p >= 1");
    }
    if (std::abs(correlation_rho) >= 1.0) {
        throw std::invalid_argument("correlation_rho must satisfy |rho| < 1");
    }
    if (noise_sd < 0.0 || sparsity < 0.0 || sparsity > 1.0) {
        throw std::invalid_argument("invalid noise_sd or sparsity");
    }
    if (kind == SettingKind::masked_correlation && p < 2) {
        throw std::invalid_argument("masked_correlation needs p >= 2");
    }
    if (kind == SettingKind::dr_nonlinear && p < 5) {
        throw std::invalid_argument("dr_nonlinear needs p >= 5");
    }
}

SyntheticSetting make_setting(SettingKind kind, Eigen::Index n, Eigen::Index p) {
    SyntheticSetting s;
    s.kind = kind;
    s.n = n;
    s.p = p;
    switch (kind) {
        case SettingKind::dr_nonlinear:
            s.correlation_rho = 0.5;
            s.noise_sd = std::sqrt(0.5);
            break;
        case SettingKind::masked_correlation:
            s.noise_sd = 0.5;
            break;
        default:
            break;
    }
    return s;
}

Eigen::Index GroundTruth::important_count() const {
    return static_cast<Eigen::Index>(
        std::count(important.begin(), important.end(), true));
}

namespace {

Eigen::MatrixXd gaussian_matrix(Rng& gen, Eigen::Index n, Eigen::Index p) {
    Eigen::MatrixXd z(n, p);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < p; ++j) {
            z(i, j) = gen.normal();
        }
    }
    return z;
}

double student_t3(Rng& gen) {
    const double num = gen.normal();
    double chi2 = 0.0;
    for (int k = 0; k < 3; ++k) {
        const double g = gen.normal();
        chi2 += g * g;
    }
    return num / std::sqrt(chi2 / 3.0);
}

Eigen::VectorXd adjacent_beta(Rng& gen, Eigen::Index p, double sparsity) {
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
    const Eigen::Index k = static_cast<Eigen::Index>(std::floor(sparsity * static_cast<double>(p)));
    for (Eigen::Index j = 0; j < k; ++j) {
        beta[j] = 1.0 + gen.uniform();
    }
    return beta;
}

}  // namespace

GeneratedData generate(const SyntheticSetting& setting, const RngStream& rng) {
    setting.validate();
    Rng gen(rng);
    const Eigen::Index n = setting.n;
    const Eigen::Index p = setting.p;

    GeneratedData out;
    out.truth.important.assign(static_cast<std::size_t>(p), false);

    const Eigen::MatrixXd sqrt_cov = matrix_sqrt(ar1_covariance(p, setting.correlation_rho));

    switch (setting.kind) {
        case SettingKind::adjacent_support:
        case SettingKind::heavy_tails: {
            Eigen::MatrixXd z(n, p);
            if (setting.kind == SettingKind::adjacent_support) {
                z = gaussian_matrix(gen, n, p);
            } else {
                for (Eigen::Index i = 0; i < n; ++i) {
                    for (Eigen::Index j = 0; j < p; ++j) {
                        z(i, j) = student_t3(gen);
                    }
                }
            }
            out.data.inputs = z * sqrt_cov;
            const Eigen::VectorXd beta = adjacent_beta(gen, p, setting.sparsity);
            out.data.response = out.data.inputs * beta;
            for (Eigen::Index i = 0; i < n; ++i) {
                out.data.response[i] += setting.noise_sd * gen.normal();
            }
            for (Eigen::Index j = 0; j < p; ++j) {
                out.truth.important[static_cast<std::size_t>(j)] = beta[j] != 0.0;
            }
            out.truth.generating_coefficients = beta;
            break;
        }
        case SettingKind::masked_correlation: {
            out.data.inputs = gaussian_matrix(gen, n, p) * sqrt_cov;
            const Eigen::Index l = 1 + static_cast<Eigen::Index>(
                                           gen.uniform_int(static_cast<std::uint64_t>(p - 1)));
            out.data.response.resize(n);
            for (Eigen::Index i = 0; i < n; ++i) {
                out.data.response[i] = out.data.inputs(i, l) + setting.noise_sd * gen.normal();
            }
            // overwrite l-1 as a correlated null copy of l
            for (Eigen::Index i = 0; i < n; ++i) {
                out.data.inputs(i, l - 1) =
                    out.data.inputs(i, l) + setting.noise_sd * gen.normal();
            }
            out.truth.important[static_cast<std::size_t>(l)] = true;
            Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
            beta[l] = 1.0;
            out.truth.generating_coefficients = beta;
            break;
        }
        case SettingKind::dr_nonlinear: {
            out.data.inputs = gaussian_matrix(gen, n, p) * sqrt_cov;
            out.data.response.resize(n);
            for (Eigen::Index i = 0; i < n; ++i) {
                const double x1 = out.data.inputs(i, 1);
                out.data.response[i] = 0.8 * x1 + 0.6 * out.data.inputs(i, 2) +
                                       0.4 * out.data.inputs(i, 3) +
                                       0.2 * out.data.inputs(i, 4) + std::sin(x1) +
                                       setting.noise_sd * gen.normal();
            }
            for (Eigen::Index j = 1; j <= 4; ++j) {
                out.truth.important[static_cast<std::size_t>(j)] = true;
            }
            break;
        }
        case SettingKind::stability_blocks: {
            out.data.inputs = gaussian_matrix(gen, n, p) * sqrt_cov;
            Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
            const Eigen::Index block = 5;
            const Eigen::Index n_blocks = std::max<Eigen::Index>(
                1, static_cast<Eigen::Index>(std::floor(setting.sparsity *
                                                        static_cast<double>(p) /
                                                        static_cast<double>(block))));
            // non-overlapping block starts sampled without replacement
            std::vector<Eigen::Index> slots;
            for (Eigen::Index s = 0; s + block <= p; s += block) {
                slots.push_back(s);
            }
            for (Eigen::Index b = 0; b < n_blocks && !slots.empty(); ++b) {
                const std::size_t pick =
                    static_cast<std::size_t>(gen.uniform_int(slots.size()));
                const Eigen::Index start = slots[pick];
                slots.erase(slots.begin() + static_cast<std::ptrdiff_t>(pick));
                for (Eigen::Index j = start; j < start + block; ++j) {
                    beta[j] = 1.0 + gen.uniform();
                    out.truth.important[static_cast<std::size_t>(j)] = true;
                }
            }
            const Eigen::VectorXd signal = out.data.inputs * beta;
            const double sd = signal.norm() / (2.0 * std::sqrt(static_cast<double>(n)));
            out.data.response.resize(n);
            for (Eigen::Index i = 0; i < n; ++i) {
                out.data.response[i] = signal[i] + sd * gen.normal();
            }
            out.truth.generating_coefficients = beta;
            break;
        }
    }
    out.data.task_kind = TaskKind::regression;
    out.data.validate();
    return out;
}

GaussianOracle input_gaussian_oracle(const SyntheticSetting& setting) {
    if (setting.kind == SettingKind::heavy_tails ||
        setting.kind == SettingKind::masked_correlation) {
        throw std::invalid_argument("input distribution of this setting is not Gaussian AR(1)");
    }
    GaussianOracle oracle;
    oracle.mean = Eigen::VectorXd::Zero(setting.p);
    oracle.covariance = ar1_covariance(setting.p, setting.correlation_rho);
    return oracle;
}

GaussianOracle joint_gaussian_oracle(const SyntheticSetting& setting,
                                     const Eigen::VectorXd& beta, double noise_sd) {
    const GaussianOracle x = input_gaussian_oracle(setting);
    if (beta.size() != setting.p) {
        throw std::invalid_argument("beta length must equal p");
    }
    const Eigen::Index p = setting.p;
    GaussianOracle joint;
    joint.mean = Eigen::VectorXd::Zero(p + 1);
    joint.covariance.resize(p + 1, p + 1);
    joint.covariance.topLeftCorner(p, p) = x.covariance;
    const Eigen::VectorXd cross = x.covariance * beta;
    joint.covariance.topRightCorner(p, 1) = cross;
    joint.covariance.bottomLeftCorner(1, p) = cross.transpose();
    joint.covariance(p, p) = beta.dot(cross) + noise_sd * noise_sd;
    return joint;
}

ImputerFactory oracle_imputer_factory(const GaussianOracle& joint) {
    const Eigen::Index p = joint.dim() - 1;
    if (p < 1) {
        throw std::invalid_argument("joint oracle must include at least one feature and y");
    }
    GaussianOracle x_only;
    x_only.mean = joint.mean.head(p);
    x_only.covariance = joint.covariance.topLeftCorner(p, p);

    auto predictors = std::make_shared<
        std::vector<std::pair<ConditionalPredictor, ConditionalPredictor>>>();
    predictors->reserve(static_cast<std::size_t>(p));
    for (Eigen::Index j = 0; j < p; ++j) {
        predictors->emplace_back(make_conditional_predictor(x_only, j),
                                 make_conditional_predictor(joint, j));
    }
    return [predictors](const TabularDataset& data, Eigen::Index j) {
        const auto& pair = predictors->at(static_cast<std::size_t>(j));
        return oracle_imputation(data, pair.first, pair.second);
    };
}

InjectedNull inject_correlated_null(const TabularDataset& data, double target_correlation,
                                    const RngStream& rng) {
    data.validate();
    if (std::abs(target_correlation) >= 1.0) {
        throw std::invalid_argument("target_correlation must satisfy |c| < 1");
    }
    const Eigen::Index n = data.n();
    const Eigen::Index p = data.p();

    auto standardize = [n](Eigen::VectorXd v) {
        const double mean = v.mean();
        v.array() -= mean;
        const double sd = std::sqrt(v.squaredNorm() / static_cast<double>(n));
        if (sd == 0.0) {
            throw std::invalid_argument("cannot standardize a constant column");
        }
        return Eigen::VectorXd(v / sd);
    };

    Eigen::VectorXd direction = Eigen::VectorXd::Zero(n);
    for (Eigen::Index j = 0; j < p; ++j) {
        direction += standardize(data.inputs.col(j));
    }
    direction /= static_cast<double>(p);
    direction = standardize(direction);

    Rng gen(rng);
    Eigen::VectorXd noise(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        noise[i] = gen.normal();
    }
    Eigen::VectorXd column = target_correlation * direction +
                             std::sqrt(1.0 - target_correlation * target_correlation) * noise;
    column = standardize(column);

    InjectedNull out;
    out.injected_index = p;
    out.data = data;
    out.data.inputs.conservativeResize(n, p + 1);
    out.data.inputs.col(p) = column;
    if (!out.data.column_names.empty()) {
        out.data.column_names.push_back("injected_null");
    }
    out.data.validate();
    return out;
}

MetricSet metrics(const SelectionReport& decisions, const GroundTruth& truth) {
    if (decisions.decisions.size() != truth.important.size()) {
        throw std::invalid_argument("metrics: decision and truth lengths differ");
    }
    Eigen::Index selected = 0;
    Eigen::Index false_sel = 0;
    Eigen::Index true_sel = 0;
    for (const auto& d : decisions.decisions) {
        if (!d.selected) {
            continue;
        }
        ++selected;
        if (truth.important[static_cast<std::size_t>(d.feature_index)]) {
            ++true_sel;
        } else {
            ++false_sel;
        }
    }
    MetricSet m;
    m.fdp = static_cast<double>(false_sel) /
            static_cast<double>(std::max<Eigen::Index>(1, selected));
    m.power = static_cast<double>(true_sel) /
              static_cast<double>(std::max<Eigen::Index>(1, truth.important_count()));
    m.type_I = static_cast<double>(false_sel) /
               static_cast<double>(std::max<Eigen::Index>(1, truth.null_count()));
    return m;
}

double auc_from_scores(const Eigen::VectorXd& scores, const GroundTruth& truth) {
    if (scores.size() != static_cast<Eigen::Index>(truth.important.size())) {
        throw std::invalid_argument("auc_from_scores: length mismatch");
    }
    double wins = 0.0;
    Eigen::Index pairs = 0;
    for (Eigen::Index a = 0; a < scores.size(); ++a) {
        if (!truth.important[static_cast<std::size_t>(a)]) {
            continue;
        }
        for (Eigen::Index b = 0; b < scores.size(); ++b) {
            if (truth.important[static_cast<std::size_t>(b)]) {
                continue;
            }
            ++pairs;
            if (scores[a] > scores[b]) {
                wins += 1.0;
            } else if (scores[a] == scores[b]) {
                wins += 0.5;
            }
        }
    }
    if (pairs == 0) {
        throw std::invalid_argument("auc_from_scores: need both important and null features");
    }
    return wins / static_cast<double>(pairs);
}

double wasserstein_1d(const Eigen::VectorXd& sample_a, const Eigen::VectorXd& sample_b) {
    if (sample_a.size() != sample_b.size()) {
        throw std::invalid_argument("wasserstein_1d: samples must have equal length");
    }
    std::vector<double> a(sample_a.begin(), sample_a.end());
    std::vector<double> b(sample_b.begin(), sample_b.end());
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        acc += std::abs(a[i] - b[i]);
    }
    return acc / static_cast<double>(a.size());
}

namespace {

std::unique_ptr<PredictiveModel> fit_model(const ExperimentConfig& config,
                                           const TabularDataset& data) {
    switch (config.model) {
        case ModelSpec::linear:
            return std::make_unique<LinearModel>(fit_linear(data, config.model_ridge_lambda));
        case ModelSpec::boosted_stumps:
            return std::make_unique<BoostedStumpsModel>(
                fit_boosted_stumps(data, config.boosting_rounds, config.learning_rate));
    }
    throw std::logic_error("unknown model spec");
}

ImputerFactory replicate_imputers(const ExperimentConfig& config,
                                  const SyntheticSetting& setting, const GroundTruth& truth) {
    if (!config.oracle_imputers) {
        return nullptr;  // run_semi_knockoffs defaults to ridge
    }
    if (!truth.generating_coefficients) {
        throw std::invalid_argument("oracle imputers need the generating coefficients");
    }
    return oracle_imputer_factory(
        joint_gaussian_oracle(setting, *truth.generating_coefficients, setting.noise_sd));
}

std::string describe(const SyntheticSetting& setting, const ExperimentConfig& config,
                     int replicates) {
    std::ostringstream os;
    os << "setting=" << setting_name(setting.kind) << " n=" << setting.n << " p=" << setting.p
       << " rho=" << setting.correlation_rho << " noise_sd=" << setting.noise_sd
       << " sparsity=" << setting.sparsity << " method=" << method_name(config.run.method)
       << " level=" << config.run.level << " lambda=" << config.run.lambda
       << " permutations=" << config.run.permutations_per_feature
       << " model=" << (config.model == ModelSpec::linear ? "linear" : "boosted_stumps")
       << " oracle_imputers=" << (config.oracle_imputers ? "true" : "false")
       << " replicates=" << replicates;
    return os.str();
}

}  // namespace

ExperimentReport run_replicated(const SyntheticSetting& setting, const ExperimentConfig& config,
                                int replicates, const RngStream& rng) {
    if (replicates < 1) {
        throw std::invalid_argument("run_replicated: replicates must be >= 1");
    }
    const auto start = std::chrono::steady_clock::now();

    ExperimentReport report;
    report.per_replicate.resize(static_cast<std::size_t>(replicates));
    report.per_replicate_auc.resize(static_cast<std::size_t>(replicates));
    report.replicate_count = replicates;
    report.configuration = describe(setting, config, replicates);

    parallel_for(static_cast<std::size_t>(replicates), config.run.workers, [&](std::size_t r) {
        const RngStream stream = rng.child(r);
        const GeneratedData gen = generate(setting, stream.child(0));
        const auto model = fit_model(config, gen.data);
        RunConfig run = config.run;
        run.workers = 1;  // replicate-level parallelism only
        const SelectionReport sel =
            run_semi_knockoffs(gen.data, *model, LossFunction::squared_error(), run,
                               stream.child(1),
                               replicate_imputers(config, setting, gen.truth));
        report.per_replicate[r] = metrics(sel, gen.truth);

        Eigen::VectorXd scores(static_cast<Eigen::Index>(sel.decisions.size()));
        for (std::size_t i = 0; i < sel.decisions.size(); ++i) {
            const auto& d = sel.decisions[i];
            scores[static_cast<Eigen::Index>(i)] =
                d.p_value ? 1.0 - *d.p_value : d.statistic;
        }
        const bool has_both = gen.truth.important_count() > 0 && gen.truth.null_count() > 0;
        report.per_replicate_auc[r] = has_both ? auc_from_scores(scores, gen.truth) : 0.5;
    });

    for (int r = 0; r < replicates; ++r) {
        report.fdr += report.per_replicate[static_cast<std::size_t>(r)].fdp;
        report.power += report.per_replicate[static_cast<std::size_t>(r)].power;
        report.type_I_error += report.per_replicate[static_cast<std::size_t>(r)].type_I;
        report.auc += report.per_replicate_auc[static_cast<std::size_t>(r)];
    }
    const double denom = static_cast<double>(replicates);
    report.fdr /= denom;
    report.power /= denom;
    report.type_I_error /= denom;
    report.auc /= denom;
    report.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

double stability_probe_replicate(const SyntheticSetting& setting, Eigen::Index dropped_index,
                                 double lambda, const RngStream& rng) {
    const GeneratedData gen = generate(setting, rng);
    return stability_probe(gen.data.response, gen.data.inputs, dropped_index, lambda);
}

DoubleRobustnessSample double_robustness_probe(const SyntheticSetting& setting,
                                               const ExperimentConfig& config, double lambda,
                                               const RngStream& rng) {
    if (setting.kind != SettingKind::dr_nonlinear) {
        throw std::invalid_argument("double_robustness_probe expects the dr_nonlinear setting");
    }
    const Eigen::Index j = 0;  // null coordinate under probe
    const GeneratedData gen = generate(setting, rng.child(0));
    const auto model = fit_model(config, gen.data);
    const LossFunction loss = LossFunction::squared_error();

    const ImputationColumns estimated =
        fit_imputer_pair(gen.data, j, lambda).columns(gen.data);

    // theoretical nu from the Gaussian inputs; exact since X is Gaussian
    const ConditionalPredictor oracle_nu =
        make_conditional_predictor(input_gaussian_oracle(setting), j);
    Eigen::VectorXd oracle_pred = oracle_nu.predict(gen.data.inputs);
    Eigen::VectorXd oracle_resid = gen.data.inputs.col(j) - oracle_pred;

    Rng gen_rng(rng.child(1));
    const auto perm_one = gen_rng.permutation(static_cast<std::size_t>(setting.n));
    const auto perm_two = gen_rng.permutation(static_cast<std::size_t>(setting.n));

    Eigen::MatrixXd x_est_one = gen.data.inputs;
    Eigen::MatrixXd x_est_two = gen.data.inputs;
    Eigen::MatrixXd x_oracle_one = gen.data.inputs;  // shares perm_one with x_est_one
    for (Eigen::Index i = 0; i < setting.n; ++i) {
        const auto p1 = static_cast<Eigen::Index>(perm_one[static_cast<std::size_t>(i)]);
        const auto p2 = static_cast<Eigen::Index>(perm_two[static_cast<std::size_t>(i)]);
        x_est_one(i, j) = estimated.nu_predictions[i] + estimated.residuals_nu[p1];
        x_est_two(i, j) = estimated.rho_predictions[i] + estimated.residuals_rho[p2];
        x_oracle_one(i, j) = oracle_pred[i] + oracle_resid[p1];
    }

    const Eigen::VectorXd loss_est_one =
        evaluate_loss(*model, loss, x_est_one, gen.data.response);
    const Eigen::VectorXd loss_est_two =
        evaluate_loss(*model, loss, x_est_two, gen.data.response);
    const Eigen::VectorXd loss_oracle_one =
        evaluate_loss(*model, loss, x_oracle_one, gen.data.response);

    DoubleRobustnessSample out;
    out.estimated_vs_estimated = loss_est_one - loss_est_two;
    out.estimated_vs_oracle = loss_est_one - loss_oracle_one;
    return out;
}

ExchangeabilitySnapshot exchangeability_snapshot(const SyntheticSetting& setting,
                                                 const ExperimentConfig& config,
                                                 const RngStream& rng) {
    const GeneratedData gen = generate(setting, rng.child(0));
    const auto model = fit_model(config, gen.data);
    RunConfig run = config.run;
    run.method = SelectionMethod::knockoff_threshold;
    const SelectionReport sel =
        run_semi_knockoffs(gen.data, *model, LossFunction::squared_error(), run, rng.child(1),
                           replicate_imputers(config, setting, gen.truth));
    ExchangeabilitySnapshot snap;
    snap.threshold = sel.threshold.value_or(std::numeric_limits<double>::infinity());
    for (const auto& d : sel.decisions) {
        snap.rows.push_back(
            {d.feature_index, d.statistic,
             !gen.truth.important[static_cast<std::size_t>(d.feature_index)]});
    }
    return snap;
}

}  // namespace semiknock
