#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

namespace gridvec::eval {

struct LabeledBox {
  int class_id = 0;
  double cx = 0.0, cy = 0.0;
  double w = 0.0, h = 0.0;
  std::optional<double> confidence;  // predictions only
};

double iou(const LabeledBox& a, const LabeledBox& b);

struct MatchPair {
  int gt_index = 0;
  int pred_index = 0;
  double iou = 0.0;
};

struct MatchResult {
  std::vector<MatchPair> pairs;
  std::vector<int> missed_gt;        // gt indices with no match
  std::vector<int> unmatched_preds;  // pred indices with no match
};

// Greedy one-to-one matching: predictions in descending confidence (ties by
// input order) each take the highest-IoU unmatched ground-truth box of any
// class with IoU >= iou_min. Class agreement is judged afterward.
MatchResult match_detections(const std::vector<LabeledBox>& gt,
                             const std::vector<LabeledBox>& preds,
                             double iou_min = 0.5);

// (nc+1) x (nc+1); last row/column is background (missed / spurious).
// entries[p][g]: predicted class p against ground-truth class g.
struct ConfusionMatrix {
  int nc = 0;
  std::vector<std::int64_t> entries;  // row-major (nc+1)^2

  std::int64_t& at(int pred_class, int gt_class) {
    return entries[static_cast<std::size_t>(pred_class) * (nc + 1) + gt_class];
  }
  std::int64_t at(int pred_class, int gt_class) const {
    return entries[static_cast<std::size_t>(pred_class) * (nc + 1) + gt_class];
  }
  std::int64_t total() const;
};

ConfusionMatrix confusion_matrix(const MatchResult& m,
                                 const std::vector<LabeledBox>& gt,
                                 const std::vector<LabeledBox>& preds, int nc);

struct F1Point {
  double threshold = 0.0;
  std::vector<double> per_class_f1;
  double all_class_f1 = 0.0;  // micro-pooled over classes
};

struct F1Curve {
  std::vector<F1Point> points;  // thresholds strictly ascending
};

class EmptyCurve : public std::runtime_error {
public:
  explicit EmptyCurve(const std::string& what) : std::runtime_error(what) {}
};

std::vector<double> default_thresholds();  // 0.001 steps over [0,1]

F1Curve f1_confidence_curve(
    const std::vector<std::vector<LabeledBox>>& gt_by_image,
    const std::vector<std::vector<LabeledBox>>& preds_by_image, int nc,
    double iou_min, const std::vector<double>& thresholds);

struct PeakF1 {
  double confidence = 0.0;
  double f1 = 0.0;
};

// Maximum all-class F1; ties break toward the lowest threshold.
PeakF1 peak_f1(const F1Curve& curve);

}  // namespace gridvec::eval
