#pragma once

#include <string>
#include <vector>

#include "mmrnn/baselines.hpp"
#include "mmrnn/metrics.hpp"

namespace mmrnn {

// {"pixel_acc":..,"class_acc":..,"mean_iou":..,"per_class_iou":[.. or null]}
std::string metrics_json(const MetricSummary& summary);

// {"rows":[{"kind":"SINGLE_C","pixel_acc":..,...}, ...]}, pretty-printed.
std::string ablation_json(const std::vector<AblationRow>& rows);

}  // namespace mmrnn
