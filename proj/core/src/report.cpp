#include "mmrnn/report.hpp"

#include "json.hpp"

namespace mmrnn {
namespace {

void fill(nlohmann::ordered_json& j, const MetricSummary& s) {
  j["pixel_acc"] = s.pixel_acc;
  j["class_acc"] = s.class_acc;
  j["mean_iou"] = s.mean_iou;
  auto per_class = nlohmann::ordered_json::array();
  for (const auto& iou : s.per_class_iou) {
    per_class.push_back(iou ? nlohmann::ordered_json(*iou) : nlohmann::ordered_json(nullptr));
  }
  j["per_class_iou"] = std::move(per_class);
}

}  // namespace

std::string metrics_json(const MetricSummary& summary) {
  nlohmann::ordered_json j;
  fill(j, summary);
  return j.dump();
}

std::string ablation_json(const std::vector<AblationRow>& rows) {
  nlohmann::ordered_json report;
  auto arr = nlohmann::ordered_json::array();
  for (const auto& row : rows) {
    nlohmann::ordered_json j;
    j["kind"] = std::string(to_string(row.kind));
    fill(j, row.metrics);
    arr.push_back(std::move(j));
  }
  report["rows"] = std::move(arr);
  return report.dump(2);
}

}  // namespace mmrnn
