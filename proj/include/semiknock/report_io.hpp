#pragma once

#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "semiknock/inference.hpp"
#include "semiknock/simbench.hpp"

namespace semiknock {

// Stable key order (ordered_json) so identical runs produce identical bytes.
nlohmann::ordered_json selection_report_json(const SelectionReport& report,
                                             const std::vector<std::string>& column_names);

std::string selection_report_csv(const SelectionReport& report,
                                 const std::vector<std::string>& column_names);

nlohmann::ordered_json experiment_report_json(const ExperimentReport& report);

// Tidy CSV: one row per replicate per metric.
std::string experiment_report_csv(const ExperimentReport& report);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace semiknock
