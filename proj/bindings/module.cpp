#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "semiknock/dataset.hpp"
#include "semiknock/imputer.hpp"
#include "semiknock/inference.hpp"
#include "semiknock/models.hpp"
#include "semiknock/report_io.hpp"
#include "semiknock/simbench.hpp"

namespace py = pybind11;
namespace sk = semiknock;

namespace {

sk::TabularDataset make_dataset(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& response,
                                bool classification) {
    sk::TabularDataset d;
    d.inputs = inputs;
    d.response = response;
    d.task_kind = classification ? sk::TaskKind::binary_classification
                                 : sk::TaskKind::regression;
    d.validate();
    return d;
}

py::dict report_to_dict(const sk::SelectionReport& report) {
    py::dict out;
    out["method"] = sk::method_name(report.method);
    out["level"] = report.target_level;
    out["seed"] = report.seed;
    if (report.threshold) {
        out["threshold"] = *report.threshold;
    } else {
        out["threshold"] = py::none();
    }
    py::list features;
    for (const auto& d : report.decisions) {
        py::dict f;
        f["index"] = d.feature_index;
        f["statistic"] = d.statistic;
        f["p_value"] = d.p_value ? py::cast(*d.p_value) : py::none();
        f["selected"] = d.selected;
        features.append(std::move(f));
    }
    out["features"] = std::move(features);
    return out;
}

}  // namespace

PYBIND11_MODULE(_semiknock, m) {
    m.doc() = "Semi-knockoff conditional independence testing";

    m.def("wilcoxon_signed_rank", &sk::wilcoxon_signed_rank, py::arg("differences"),
          "One-sided (greater) signed-rank p-value; exact for m <= 20 nonzero entries.");
    m.def("sign_test", &sk::sign_test, py::arg("differences"),
          "One-sided (greater) exact sign-test p-value.");
    m.def(
        "knockoff_threshold",
        [](const Eigen::VectorXd& statistics, double q) {
            const sk::ThresholdResult t = sk::knockoff_threshold(statistics, q);
            return py::make_tuple(t.threshold, t.selected);
        },
        py::arg("statistics"), py::arg("q"),
        "Data-dependent knockoff+ threshold; returns (threshold, selected flags).");
    m.def("benjamini_hochberg", &sk::benjamini_hochberg, py::arg("p_values"), py::arg("q"));
    m.def("wasserstein_1d", &sk::wasserstein_1d, py::arg("sample_a"), py::arg("sample_b"));

    m.def(
        "fit_ridge",
        [](const Eigen::VectorXd& targets, const Eigen::MatrixXd& regressors, double lam) {
            const sk::RidgeImputer fit = sk::fit_ridge(targets, regressors, lam);
            py::dict out;
            out["coefficients"] = fit.coefficients;
            out["intercept"] = fit.intercept;
            out["training_column_means"] = fit.training_column_means;
            return out;
        },
        py::arg("targets"), py::arg("regressors"), py::arg("lambda_"));

    m.def(
        "run_semi_knockoffs",
        [](const Eigen::MatrixXd& inputs, const Eigen::VectorXd& response,
           const std::string& method, double level, double lambda_, int permutations,
           const std::string& model, int rounds, double learning_rate, std::uint64_t seed,
           bool classification, const std::string& loss) {
            const sk::TabularDataset data = make_dataset(inputs, response, classification);
            std::unique_ptr<sk::PredictiveModel> m_hat;
            if (model == "linear") {
                m_hat = std::make_unique<sk::LinearModel>(sk::fit_linear(data, lambda_));
            } else if (model == "boosted_stumps") {
                m_hat = std::make_unique<sk::BoostedStumpsModel>(
                    sk::fit_boosted_stumps(data, rounds, learning_rate));
            } else {
                throw std::invalid_argument("model must be linear or boosted_stumps");
            }
            sk::RunConfig run;
            run.method = sk::parse_method(method);
            run.level = level;
            run.lambda = lambda_;
            run.permutations_per_feature = permutations;
            const sk::SelectionReport report = sk::run_semi_knockoffs(
                data, *m_hat, sk::parse_loss(loss), run, sk::RngStream(seed));
            return report_to_dict(report);
        },
        py::arg("inputs"), py::arg("response"), py::arg("method") = "knockoff_threshold",
        py::arg("level") = 0.2, py::arg("lambda_") = 0.1, py::arg("permutations") = 1,
        py::arg("model") = "boosted_stumps", py::arg("rounds") = 200,
        py::arg("learning_rate") = 0.1, py::arg("seed") = 0,
        py::arg("classification") = false, py::arg("loss") = "squared_error",
        "Full per-feature pipeline on an in-memory dataset; returns a report dict.");

    m.def(
        "generate",
        [](const std::string& setting, long n, long p, std::uint64_t seed) {
            const sk::SyntheticSetting s =
                sk::make_setting(sk::parse_setting(setting), n, p);
            const sk::GeneratedData gen = sk::generate(s, sk::RngStream(seed));
            return py::make_tuple(gen.data.inputs, gen.data.response, gen.truth.important);
        },
        py::arg("setting"), py::arg("n"), py::arg("p"), py::arg("seed") = 0,
        "Synthetic benchmark data; returns (inputs, response, important flags).");

    m.def(
        "inject_correlated_null",
        [](const Eigen::MatrixXd& inputs, const Eigen::VectorXd& response, double corr,
           std::uint64_t seed, bool classification) {
            const sk::InjectedNull out = sk::inject_correlated_null(
                make_dataset(inputs, response, classification), corr, sk::RngStream(seed));
            return py::make_tuple(out.data.inputs, out.injected_index);
        },
        py::arg("inputs"), py::arg("response"), py::arg("target_correlation"),
        py::arg("seed") = 0, py::arg("classification") = false);
}
