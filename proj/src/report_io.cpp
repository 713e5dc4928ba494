#include "semiknock/report_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace semiknock {

using nlohmann::ordered_json;

nlohmann::ordered_json selection_report_json(const SelectionReport& report,
                                             const std::vector<std::string>& column_names) {
    ordered_json j;
    j["method"] = method_name(report.method);
    j["level"] = report.target_level;
    j["seed"] = report.seed;
    if (report.threshold && std::isfinite(*report.threshold)) {
        j["threshold"] = *report.threshold;
        j["no_threshold"] = false;
    } else if (report.threshold) {
        j["threshold"] = nullptr;
        j["no_threshold"] = true;
    } else {
        j["threshold"] = nullptr;
    }
    ordered_json features = ordered_json::array();
    for (const auto& d : report.decisions) {
        ordered_json f;
        f["index"] = d.feature_index;
        const std::size_t idx = static_cast<std::size_t>(d.feature_index);
        f["name"] = idx < column_names.size() ? ordered_json(column_names[idx])
                                              : ordered_json(nullptr);
        f["statistic"] = d.statistic;
        f["p_value"] = d.p_value ? ordered_json(*d.p_value) : ordered_json(nullptr);
        f["selected"] = d.selected;
        features.push_back(std::move(f));
    }
    j["features"] = std::move(features);
    return j;
}

std::string selection_report_csv(const SelectionReport& report,
                                 const std::vector<std::string>& column_names) {
    std::ostringstream os;
    os.precision(17);
    os << "index,name,statistic,p_value,selected\n";
    for (const auto& d : report.decisions) {
        const std::size_t idx = static_cast<std::size_t>(d.feature_index);
        os << d.feature_index << ','
           << (idx < column_names.size() ? column_names[idx] : "") << ',' << d.statistic << ',';
        if (d.p_value) {
            os << *d.p_value;
        }
        os << ',' << (d.selected ? "true" : "false") << '\n';
    }
    return os.str();
}

nlohmann::ordered_json experiment_report_json(const ExperimentReport& report) {
    ordered_json j;
    j["configuration"] = report.configuration;
    j["replicate_count"] = report.replicate_count;
    j["type_I_error"] = report.type_I_error;
    j["fdr"] = report.fdr;
    j["power"] = report.power;
    j["auc"] = report.auc;
    // runtime deliberately not serialized: output files must be
    // byte-identical across reruns of the same config
    ordered_json reps = ordered_json::array();
    for (std::size_t r = 0; r < report.per_replicate.size(); ++r) {
        ordered_json rep;
        rep["replicate"] = r;
        rep["fdp"] = report.per_replicate[r].fdp;
        rep["power"] = report.per_replicate[r].power;
        rep["type_I"] = report.per_replicate[r].type_I;
        rep["auc"] = report.per_replicate_auc[r];
        reps.push_back(std::move(rep));
    }
    j["replicates"] = std::move(reps);
    return j;
}

std::string experiment_report_csv(const ExperimentReport& report) {
    std::ostringstream os;
    os.precision(17);
    os << "replicate,metric,value\n";
    for (std::size_t r = 0; r < report.per_replicate.size(); ++r) {
        os << r << ",fdp," << report.per_replicate[r].fdp << '\n';
        os << r << ",power," << report.per_replicate[r].power << '\n';
        os << r << ",type_I," << report.per_replicate[r].type_I << '\n';
        os << r << ",auc," << report.per_replicate_auc[r] << '\n';
    }
    return os.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot open output file: " + path);
    }
    out << content;
}

}  // namespace semiknock
