#include "mmrnn/metrics.hpp"

#include <stdexcept>
#include <string>

namespace mmrnn {

ConfusionMatrix::ConfusionMatrix(int num_classes)
    : classes_(num_classes), counts_(static_cast<std::size_t>(num_classes) * num_classes, 0) {
  if (num_classes < 1) throw std::invalid_argument("ConfusionMatrix: need at least one class");
}

void ConfusionMatrix::add(int truth, int predicted) {
  if (truth < 0 || truth >= classes_ || predicted < 0 || predicted >= classes_) {
    throw std::out_of_range("ConfusionMatrix: label pair (" + std::to_string(truth) + "," +
                            std::to_string(predicted) + ") outside [0," + std::to_string(classes_) + ")");
  }
  ++counts_[static_cast<std::size_t>(truth) * classes_ + predicted];
  ++total_;
}

void ConfusionMatrix::accumulate(const LabelMap& predicted, const PatchGrid& truth) {
  if (predicted.height != truth.height() || predicted.width != truth.width()) {
    throw std::invalid_argument("ConfusionMatrix: prediction and truth shapes differ");
  }
  for (std::size_t k = 0; k < truth.cell_count(); ++k) {
    const int t = truth.labels()[k];
    if (t == kUnlabeled) continue;
    add(t, predicted.labels[k]);
  }
}

void ConfusionMatrix::merge(const ConfusionMatrix& other) {
  if (other.classes_ != classes_) throw std::invalid_argument("ConfusionMatrix: class counts differ");
  for (std::size_t k = 0; k < counts_.size(); ++k) counts_[k] += other.counts_[k];
  total_ += other.total_;
}

MetricSummary summarize(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw std::invalid_argument("summarize: empty confusion matrix");
  const int b = cm.num_classes();
  std::vector<std::uint64_t> row(b, 0), col(b, 0);
  std::uint64_t trace = 0;
  for (int t = 0; t < b; ++t) {
    for (int p = 0; p < b; ++p) {
      row[t] += cm.count(t, p);
      col[p] += cm.count(t, p);
    }
    trace += cm.count(t, t);
  }

  MetricSummary s;
  s.pixel_acc = static_cast<double>(trace) / static_cast<double>(cm.total());
  s.per_class_iou.resize(b);
  double recall_sum = 0.0, iou_sum = 0.0;
  int recall_n = 0, iou_n = 0;
  for (int k = 0; k < b; ++k) {
    const auto tp = static_cast<double>(cm.count(k, k));
    if (row[k] > 0) {
      recall_sum += tp / static_cast<double>(row[k]);
      ++recall_n;
    }
    const std::uint64_t uni = row[k] + col[k] - cm.count(k, k);
    if (uni > 0) {
      const double iou = tp / static_cast<double>(uni);
      s.per_class_iou[k] = iou;
      iou_sum += iou;
      ++iou_n;
    }
  }
  s.class_acc = recall_n > 0 ? recall_sum / recall_n : 0.0;
  s.mean_iou = iou_n > 0 ? iou_sum / iou_n : 0.0;
  return s;
}

}  // namespace mmrnn
