#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdlib>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "semiknock/dataset.hpp"
#include "semiknock/external_model.hpp"
#include "semiknock/imputer.hpp"
#include "semiknock/inference.hpp"
#include "semiknock/models.hpp"
#include "semiknock/report_io.hpp"
#include "semiknock/simbench.hpp"

namespace sk = semiknock;
using nlohmann::ordered_json;

namespace {

constexpr int kExitInput = 2;
constexpr int kExitModel = 3;
constexpr int kExitNumeric = 4;

struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ModelError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CliConfig {
    std::string data_path;
    std::string target_column;
    std::string model_spec = "boosted_stumps";
    std::string loss_name = "squared_error";
    double lambda = 0.1;
    double level = 0.05;
    int permutations = 1;
    std::string method = "knockoff_threshold";
    std::uint64_t seed = 0;
    bool seed_given = false;
    std::string output_path;
    std::string output_format = "json";
    int workers = 0;
    // simulation flags
    std::string setting = "adjacent";
    long n = 300;
    long p = 50;
    int reps = 50;
    int rounds = 200;
    double learning_rate = 0.1;
    std::vector<long> feature_subset;
    std::vector<long> n_grid = {200, 800, 3200};
    int seeds = 20;
    double corr = 0.6;
    bool oracle_imputers = false;
};

std::uint64_t resolve_seed(const CliConfig& cfg) {
    if (cfg.seed_given) {
        return cfg.seed;
    }
    if (const char* env = std::getenv("SEMIKNOCK_SEED")) {
        return std::strtoull(env, nullptr, 10);
    }
    return 0;
}

std::unique_ptr<sk::PredictiveModel> build_model(const CliConfig& cfg,
                                                 const sk::TabularDataset& data) {
    try {
        if (cfg.model_spec == "linear") {
            return std::make_unique<sk::LinearModel>(sk::fit_linear(data, cfg.lambda));
        }
        if (cfg.model_spec == "boosted_stumps") {
            return std::make_unique<sk::BoostedStumpsModel>(
                sk::fit_boosted_stumps(data, cfg.rounds, cfg.learning_rate));
        }
        if (cfg.model_spec.rfind("external:", 0) == 0) {
            sk::ExternalModelHandle handle;
            handle.executable_path = cfg.model_spec.substr(9);
            return std::make_unique<sk::ExternalModel>(handle, static_cast<int>(data.p()));
        }
    } catch (const std::exception& e) {
        throw ModelError(e.what());
    }
    throw InputError("unknown model spec: " + cfg.model_spec +
                     " (expected linear, boosted_stumps, or external:<path>)");
}

ordered_json config_echo(const CliConfig& cfg, const std::string& subcommand,
                         std::uint64_t seed) {
    ordered_json j;
    j["subcommand"] = subcommand;
    j["data"] = cfg.data_path;
    j["target"] = cfg.target_column;
    j["model"] = cfg.model_spec;
    j["loss"] = cfg.loss_name;
    j["lambda"] = cfg.lambda;
    j["level"] = cfg.level;
    j["permutations"] = cfg.permutations;
    j["method"] = cfg.method;
    j["seed"] = seed;
    j["rounds"] = cfg.rounds;
    j["learning_rate"] = cfg.learning_rate;
    return j;
}

void write_output(const CliConfig& cfg, const ordered_json& json_doc, const std::string& csv) {
    if (cfg.output_path.empty()) {
        if (cfg.output_format == "csv") {
            std::cout << csv;
        } else {
            std::cout << json_doc.dump(2) << '\n';
        }
        return;
    }
    if (cfg.output_format == "csv") {
        sk::write_text_file(cfg.output_path, csv);
    } else {
        sk::write_text_file(cfg.output_path, json_doc.dump(2) + "\n");
    }
}

sk::RunConfig make_run_config(const CliConfig& cfg) {
    sk::RunConfig run;
    run.lambda = cfg.lambda;
    run.level = cfg.level;
    run.permutations_per_feature = cfg.permutations;
    run.method = sk::parse_method(cfg.method);
    run.workers = cfg.workers;
    for (long f : cfg.feature_subset) {
        run.features.push_back(static_cast<Eigen::Index>(f));
    }
    return run;
}

int cmd_select_or_test(const CliConfig& cfg, const std::string& subcommand) {
    const std::uint64_t seed = resolve_seed(cfg);
    sk::TabularDataset data;
    try {
        data = sk::load_dataset(cfg.data_path, cfg.target_column);
    } catch (const std::exception& e) {
        throw InputError(e.what());
    }
    const auto model = build_model(cfg, data);
    const sk::LossFunction loss = sk::parse_loss(cfg.loss_name);
    sk::RunConfig run = make_run_config(cfg);
    if (subcommand == "select" && run.method != sk::SelectionMethod::knockoff_threshold &&
        run.method != sk::SelectionMethod::bh_on_wilcoxon) {
        throw InputError("select requires --method knockoff_threshold or bh_on_wilcoxon");
    }
    if (subcommand == "test" && run.method != sk::SelectionMethod::wilcoxon &&
        run.method != sk::SelectionMethod::sign_test) {
        throw InputError("test requires --method wilcoxon or sign_test");
    }

    const sk::SelectionReport report = sk::run_semi_knockoffs(
        data, *model, loss, run, sk::RngStream(seed));

    ordered_json doc;
    doc["config"] = config_echo(cfg, subcommand, seed);
    doc["report"] = sk::selection_report_json(report, data.column_names);
    write_output(cfg, doc, sk::selection_report_csv(report, data.column_names));

    const std::size_t n_selected = report.selected_indices().size();
    std::cout << subcommand << ": " << n_selected << " of " << report.decisions.size()
              << " features selected";
    if (report.threshold) {
        if (std::isfinite(*report.threshold)) {
            std::cout << ", threshold " << *report.threshold;
        } else {
            std::cout << ", threshold +inf (empty selection)";
        }
    }
    std::cout << '\n';
    return 0;
}

sk::ExperimentConfig make_experiment_config(const CliConfig& cfg) {
    sk::ExperimentConfig exp;
    exp.run = make_run_config(cfg);
    exp.model = cfg.model_spec == "linear" ? sk::ModelSpec::linear
                                           : sk::ModelSpec::boosted_stumps;
    exp.model_ridge_lambda = cfg.lambda;
    exp.boosting_rounds = cfg.rounds;
    exp.learning_rate = cfg.learning_rate;
    exp.oracle_imputers = cfg.oracle_imputers;
    return exp;
}

int cmd_simulate(const CliConfig& cfg) {
    const std::uint64_t seed = resolve_seed(cfg);
    const sk::SyntheticSetting setting =
        sk::make_setting(sk::parse_setting(cfg.setting), cfg.n, cfg.p);
    const sk::ExperimentReport report = sk::run_replicated(
        setting, make_experiment_config(cfg), cfg.reps, sk::RngStream(seed));

    ordered_json doc;
    doc["config"] = config_echo(cfg, "simulate", seed);
    doc["config"]["setting"] = sk::setting_name(setting.kind);
    doc["config"]["n"] = cfg.n;
    doc["config"]["p"] = cfg.p;
    doc["config"]["reps"] = cfg.reps;
    doc["config"]["oracle_imputers"] = cfg.oracle_imputers;
    doc["report"] = sk::experiment_report_json(report);
    write_output(cfg, doc, sk::experiment_report_csv(report));
    std::cout << "simulate: mean FDP " << report.fdr << ", power " << report.power
              << ", type-I " << report.type_I_error << ", AUC " << report.auc << " over "
              << report.replicate_count << " replicates (" << report.runtime_seconds << "s)\n";
    return 0;
}

int cmd_stability(const CliConfig& cfg) {
    const std::uint64_t seed = resolve_seed(cfg);
    const sk::SyntheticSetting base =
        sk::make_setting(sk::SettingKind::stability_blocks, cfg.n, cfg.p);
    const Eigen::Index dropped =
        cfg.feature_subset.empty() ? base.p - 1
                                   : static_cast<Eigen::Index>(cfg.feature_subset.front());

    ordered_json doc;
    doc["config"] = config_echo(cfg, "stability", seed);
    doc["config"]["n_grid"] = cfg.n_grid;
    doc["config"]["seeds"] = cfg.seeds;
    doc["config"]["dropped_index"] = dropped;
    ordered_json results = ordered_json::array();
    std::ostringstream csv;
    csv.precision(17);
    csv << "n,seed,probe\n";
    for (std::size_t gi = 0; gi < cfg.n_grid.size(); ++gi) {
        sk::SyntheticSetting setting = base;
        setting.n = cfg.n_grid[gi];
        std::vector<double> probes;
        for (int s = 0; s < cfg.seeds; ++s) {
            const double v = sk::stability_probe_replicate(
                setting, dropped, cfg.lambda,
                sk::RngStream(seed).child(gi).child(static_cast<std::uint64_t>(s)));
            probes.push_back(v);
            csv << setting.n << ',' << s << ',' << v << '\n';
        }
        std::sort(probes.begin(), probes.end());
        const double median = probes[probes.size() / 2];
        ordered_json row;
        row["n"] = setting.n;
        row["median_probe"] = median;
        results.push_back(row);
        std::cout << "stability: n=" << setting.n << " median probe " << median << '\n';
    }
    doc["results"] = results;
    write_output(cfg, doc, csv.str());
    return 0;
}

int cmd_dr_check(const CliConfig& cfg) {
    const std::uint64_t seed = resolve_seed(cfg);
    sk::SyntheticSetting setting =
        sk::make_setting(sk::SettingKind::dr_nonlinear, cfg.n, std::max<long>(cfg.p, 5));
    sk::ExperimentConfig exp = make_experiment_config(cfg);

    ordered_json doc;
    doc["config"] = config_echo(cfg, "dr-check", seed);
    doc["config"]["n"] = setting.n;
    doc["config"]["p"] = setting.p;
    doc["config"]["seeds"] = cfg.seeds;
    doc["config"]["noise_variance"] = setting.noise_sd * setting.noise_sd;
    std::ostringstream csv;
    csv.precision(17);
    csv << "seed,sample,blue,orange\n";
    ordered_json results = ordered_json::array();
    for (int s = 0; s < cfg.seeds; ++s) {
        const sk::DoubleRobustnessSample probe = sk::double_robustness_probe(
            setting, exp, cfg.lambda, sk::RngStream(seed).child(static_cast<std::uint64_t>(s)));
        const auto& blue = probe.estimated_vs_estimated;
        const auto& orange = probe.estimated_vs_oracle;
        for (Eigen::Index i = 0; i < blue.size(); ++i) {
            csv << s << ',' << i << ',' << blue[i] << ',' << orange[i] << '\n';
        }
        const double blue_sd = std::sqrt(
            (blue.array() - blue.mean()).square().sum() / static_cast<double>(blue.size()));
        const double orange_sd =
            std::sqrt((orange.array() - orange.mean()).square().sum() /
                      static_cast<double>(orange.size()));
        ordered_json row;
        row["seed"] = s;
        row["blue_mean"] = blue.mean();
        row["blue_sd"] = blue_sd;
        row["orange_sd"] = orange_sd;
        results.push_back(row);
        std::cout << "dr-check: seed " << s << " sd(blue)=" << blue_sd
                  << " sd(orange)=" << orange_sd << '\n';
    }
    doc["results"] = results;
    write_output(cfg, doc, csv.str());
    return 0;
}

int cmd_inject_null(const CliConfig& cfg) {
    const std::uint64_t seed = resolve_seed(cfg);
    sk::TabularDataset data;
    try {
        data = sk::load_dataset(cfg.data_path, cfg.target_column);
    } catch (const std::exception& e) {
        throw InputError(e.what());
    }
    const sk::InjectedNull injected =
        sk::inject_correlated_null(data, cfg.corr, sk::RngStream(seed));
    const std::string out_csv =
        cfg.output_path.empty() ? "injected.csv" : cfg.output_path;
    sk::save_dataset_csv(injected.data, cfg.target_column, out_csv);

    ordered_json sidecar;
    sidecar["config"] = config_echo(cfg, "inject-null", seed);
    sidecar["config"]["corr"] = cfg.corr;
    sidecar["injected_index"] = injected.injected_index;
    sidecar["output_csv"] = out_csv;
    sk::write_text_file(out_csv + ".meta.json", sidecar.dump(2) + "\n");
    std::cout << "inject-null: wrote " << out_csv << " with injected column index "
              << injected.injected_index << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Semi-knockoff conditional independence testing and FDR-controlled selection"};
    app.require_subcommand(1);
    CliConfig cfg;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--lambda", cfg.lambda, "imputer ridge penalty")->check(CLI::NonNegativeNumber);
        sub->add_option("--level,--q,--alpha", cfg.level, "target FDR level q or test level alpha")
            ->check(CLI::Range(1e-12, 1.0));
        sub->add_option("--permutations", cfg.permutations, "residual permutations per feature")
            ->check(CLI::PositiveNumber);
        sub->add_option("--method", cfg.method,
                        "wilcoxon | sign_test | knockoff_threshold | bh_on_wilcoxon");
        sub->add_option("--seed", cfg.seed, "root seed (fallback: SEMIKNOCK_SEED)")
            ->each([&](const std::string&) { cfg.seed_given = true; });
        sub->add_option("--output", cfg.output_path, "output file (default: stdout)");
        sub->add_option("--format", cfg.output_format, "json | csv")
            ->check(CLI::IsMember({"json", "csv"}));
        sub->add_option("--workers", cfg.workers, "worker threads (0 = all)");
        sub->add_option("--model", cfg.model_spec, "linear | boosted_stumps | external:<path>");
        sub->add_option("--loss", cfg.loss_name, "squared_error | cross_entropy");
        sub->add_option("--rounds", cfg.rounds, "boosting rounds")->check(CLI::PositiveNumber);
        sub->add_option("--learning-rate", cfg.learning_rate, "boosting learning rate");
    };
    auto add_data = [&](CLI::App* sub) {
        sub->add_option("--data", cfg.data_path, "input CSV")->required();
        sub->add_option("--target", cfg.target_column, "target column name")->required();
    };

    CLI::App* select = app.add_subcommand("select", "FDR-controlled feature selection");
    add_data(select);
    add_common(select);

    CLI::App* test = app.add_subcommand("test", "per-feature conditional independence p-values");
    add_data(test);
    add_common(test);
    test->add_option("--feature", cfg.feature_subset, "restrict to these feature indices");

    CLI::App* simulate = app.add_subcommand("simulate", "Monte-Carlo benchmark experiments");
    add_common(simulate);
    simulate->add_option("--setting", cfg.setting, "adjacent | masked | heavy | dr | stability");
    simulate->add_option("--n", cfg.n, "samples per replicate")->check(CLI::PositiveNumber);
    simulate->add_option("--p", cfg.p, "features")->check(CLI::PositiveNumber);
    simulate->add_option("--reps", cfg.reps, "replicates")->check(CLI::PositiveNumber);
    simulate->add_flag("--oracle-imputers", cfg.oracle_imputers,
                       "use exact Gaussian conditional means instead of ridge fits");

    CLI::App* stability = app.add_subcommand("stability", "imputer coefficient stability probe");
    add_common(stability);
    stability->add_option("--n", cfg.n_grid, "sample sizes")->delimiter(',');
    stability->add_option("--p", cfg.p, "features")->check(CLI::PositiveNumber);
    stability->add_option("--seeds", cfg.seeds, "seeds per sample size")->check(CLI::PositiveNumber);
    stability->add_option("--feature", cfg.feature_subset, "dropped feature index");

    CLI::App* dr = app.add_subcommand("dr-check", "double-robustness concentration probe");
    add_common(dr);
    dr->add_option("--n", cfg.n, "samples")->check(CLI::PositiveNumber);
    dr->add_option("--p", cfg.p, "features")->check(CLI::PositiveNumber);
    dr->add_option("--seeds", cfg.seeds, "probe repetitions")->check(CLI::PositiveNumber);

    CLI::App* inject = app.add_subcommand("inject-null", "append a correlated artificial null");
    add_data(inject);
    add_common(inject);
    inject->add_option("--corr", cfg.corr, "target correlation of the injected column")
        ->check(CLI::Range(-0.999, 0.999));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : kExitInput;
    }

    try {
        if (select->parsed()) return cmd_select_or_test(cfg, "select");
        if (test->parsed()) return cmd_select_or_test(cfg, "test");
        if (simulate->parsed()) return cmd_simulate(cfg);
        if (stability->parsed()) return cmd_stability(cfg);
        if (dr->parsed()) return cmd_dr_check(cfg);
        if (inject->parsed()) return cmd_inject_null(cfg);
    } catch (const InputError& e) {
        std::cerr << "error (input): " << e.what() << '\n';
        return kExitInput;
    } catch (const ModelError& e) {
        std::cerr << "error (model): " << e.what() << '\n';
        return kExitModel;
    } catch (const std::exception& e) {
        std::cerr << "error (numeric): " << e.what() << '\n';
        return kExitNumeric;
    }
    return kExitInput;
}
