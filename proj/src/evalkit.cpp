#include "gridvec/evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace gridvec::eval {

double iou(const LabeledBox& a, const LabeledBox& b) {
  const double ax0 = a.cx - a.w / 2.0, ax1 = a.cx + a.w / 2.0;
  const double ay0 = a.cy - a.h / 2.0, ay1 = a.cy + a.h / 2.0;
  const double bx0 = b.cx - b.w / 2.0, bx1 = b.cx + b.w / 2.0;
  const double by0 = b.cy - b.h / 2.0, by1 = b.cy + b.h / 2.0;
  const double iw = std::min(ax1, bx1) - std::max(ax0, bx0);
  const double ih = std::min(ay1, by1) - std::max(ay0, by0);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  // Areas from the same edge coordinates as the intersection, so identical
  // boxes yield exactly 1.
  const double area_a = (ax1 - ax0) * (ay1 - ay0);
  const double area_b = (bx1 - bx0) * (by1 - by0);
  const double uni = area_a + area_b - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

MatchResult match_detections(const std::vector<LabeledBox>& gt,
                             const std::vector<LabeledBox>& preds,
                             double iou_min) {
  std::vector<int> order(preds.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&preds](int a, int b) {
    return preds[a].confidence.value_or(0.0) > preds[b].confidence.value_or(0.0);
  });

  MatchResult result;
  std::vector<bool> gt_taken(gt.size(), false);
  std::vector<bool> pred_matched(preds.size(), false);
  for (int pi : order) {
    int best_gt = -1;
    double best_iou = 0.0;
    for (std::size_t gi = 0; gi < gt.size(); ++gi) {
      if (gt_taken[gi]) continue;
      const double v = iou(gt[gi], preds[pi]);
      if (v >= iou_min && v > best_iou) {
        best_iou = v;
        best_gt = static_cast<int>(gi);
      }
    }
    if (best_gt >= 0) {
      gt_taken[best_gt] = true;
      pred_matched[pi] = true;
      result.pairs.push_back({best_gt, pi, best_iou});
    }
  }
  for (std::size_t gi = 0; gi < gt.size(); ++gi)
    if (!gt_taken[gi]) result.missed_gt.push_back(static_cast<int>(gi));
  for (std::size_t pi = 0; pi < preds.size(); ++pi)
    if (!pred_matched[pi]) result.unmatched_preds.push_back(static_cast<int>(pi));
  return result;
}

std::int64_t ConfusionMatrix::total() const {
  std::int64_t sum = 0;
  for (auto e : entries) sum += e;
  return sum;
}

ConfusionMatrix confusion_matrix(const MatchResult& m,
                                 const std::vector<LabeledBox>& gt,
                                 const std::vector<LabeledBox>& preds, int nc) {
  ConfusionMatrix cm;
  cm.nc = nc;
  cm.entries.assign(static_cast<std::size_t>(nc + 1) * (nc + 1), 0);
  for (const auto& pair : m.pairs)
    ++cm.at(preds[pair.pred_index].class_id, gt[pair.gt_index].class_id);
  for (int gi : m.missed_gt) ++cm.at(nc, gt[gi].class_id);
  for (int pi : m.unmatched_preds) ++cm.at(preds[pi].class_id, nc);
  return cm;
}

std::vector<double> default_thresholds() {
  std::vector<double> t;
  t.reserve(1001);
  for (int i = 0; i <= 1000; ++i) t.push_back(i / 1000.0);
  return t;
}

F1Curve f1_confidence_curve(
    const std::vector<std::vector<LabeledBox>>& gt_by_image,
    const std::vector<std::vector<LabeledBox>>& preds_by_image, int nc,
    double iou_min, const std::vector<double>& thresholds) {
  F1Curve curve;
  curve.points.reserve(thresholds.size());
  for (double t : thresholds) {
    std::vector<std::int64_t> tp(nc, 0), fp(nc, 0), fn(nc, 0);
    for (std::size_t img = 0; img < gt_by_image.size(); ++img) {
      const auto& gt = gt_by_image[img];
      std::vector<LabeledBox> preds;
      for (const auto& p : preds_by_image[img])
        if (p.confidence.value_or(1.0) >= t) preds.push_back(p);

      const MatchResult m = match_detections(gt, preds, iou_min);
      std::vector<bool> gt_tp(gt.size(), false);
      for (const auto& pair : m.pairs) {
        const int pc = preds[pair.pred_index].class_id;
        const int gc = gt[pair.gt_index].class_id;
        if (pc == gc) {
          ++tp[pc];
          gt_tp[pair.gt_index] = true;
        } else {
          // Cross-class match: spurious for the predicted class, missed for
          // the ground-truth class.
          ++fp[pc];
        }
      }
      for (int pi : m.unmatched_preds) ++fp[preds[pi].class_id];
      for (std::size_t gi = 0; gi < gt.size(); ++gi)
        if (!gt_tp[gi]) ++fn[gt[gi].class_id];
    }

    F1Point point;
    point.threshold = t;
    point.per_class_f1.resize(nc);
    std::int64_t tp_all = 0, fp_all = 0, fn_all = 0;
    for (int c = 0; c < nc; ++c) {
      const double p_den = static_cast<double>(tp[c] + fp[c]);
      const double r_den = static_cast<double>(tp[c] + fn[c]);
      const double precision = p_den > 0 ? tp[c] / p_den : 0.0;
      const double recall = r_den > 0 ? tp[c] / r_den : 0.0;
      point.per_class_f1[c] = (precision + recall) > 0.0
                                  ? 2.0 * precision * recall /
                                        (precision + recall)
                                  : 0.0;
      tp_all += tp[c];
      fp_all += fp[c];
      fn_all += fn[c];
    }
    const double p_den = static_cast<double>(tp_all + fp_all);
    const double r_den = static_cast<double>(tp_all + fn_all);
    const double precision = p_den > 0 ? tp_all / p_den : 0.0;
    const double recall = r_den > 0 ? tp_all / r_den : 0.0;
    point.all_class_f1 = (precision + recall) > 0.0
                             ? 2.0 * precision * recall / (precision + recall)
                             : 0.0;
    curve.points.push_back(std::move(point));
  }
  return curve;
}

PeakF1 peak_f1(const F1Curve& curve) {
  if (curve.points.empty()) throw EmptyCurve("curve has no points");
  const F1Point* best = &curve.points.front();
  for (const auto& p : curve.points)
    if (p.all_class_f1 > best->all_class_f1) best = &p;
  return {best->threshold, best->all_class_f1};
}

}  // namespace gridvec::eval
