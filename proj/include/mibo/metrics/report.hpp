#pragma once

#include <string>
#include <vector>

#include "mibo/metrics/kfold.hpp"

namespace mibo::metrics {

// Keys in fixed order: method, seeds, folds, metrics[{name, mean, std, values}].
// Numbers are written with 17 significant digits.
std::string report_to_json(const EvalReport& report);
EvalReport report_from_json(const std::string& text);

// One row per report, one "mean ± std" column per metric name.
std::string render_table(const std::vector<EvalReport>& reports);

}  // namespace mibo::metrics
