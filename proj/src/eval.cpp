#include "boxrefine/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>

namespace boxrefine {

namespace {

std::vector<int> score_order(std::span<const Prediction> predictions) {
    std::vector<int> order(predictions.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return predictions[a].score > predictions[b].score;
    });
    return order;
}

constexpr int kThresholdCount = 10;

// 0.50:0.05:0.95 built from integer percents; keeps thresholds comparable
// against IoU values that are themselves short ratios.
double iou_threshold(int k) { return static_cast<double>(50 + 5 * k) / 100.0; }

enum class Flag { tp, fp, ignored };

struct RankedFlag {
    double score = 0.0;
    Flag flag = Flag::fp;
};

// Greedy per-scene matching with ignore handling: a prediction prefers the
// best valid (in-bucket) truth; failing that it may absorb into an ignored
// truth and drops out of the ranking.
void flag_scene(std::span<const Prediction> preds, const std::vector<int>& pred_idx,
                std::span<const GroundTruth> truths, const std::vector<int>& truth_idx,
                const std::vector<bool>& truth_ignored, double threshold,
                std::vector<RankedFlag>& out) {
    std::vector<bool> taken(truth_idx.size(), false);

    std::vector<int> order(pred_idx.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return preds[pred_idx[a]].score > preds[pred_idx[b]].score;
    });

    for (int o : order) {
        const Prediction& p = preds[pred_idx[o]];
        int best_valid = -1, best_ignored = -1;
        double best_valid_iou = 0.0, best_ignored_iou = 0.0;
        for (std::size_t j = 0; j < truth_idx.size(); ++j) {
            if (taken[j]) {
                continue;
            }
            const double v = iou(p.box, truths[truth_idx[j]].box);
            if (v < threshold) {
                continue;
            }
            if (truth_ignored[j]) {
                if (best_ignored < 0 || v > best_ignored_iou) {
                    best_ignored = static_cast<int>(j);
                    best_ignored_iou = v;
                }
            } else if (best_valid < 0 || v > best_valid_iou) {
                best_valid = static_cast<int>(j);
                best_valid_iou = v;
            }
        }
        if (best_valid >= 0) {
            taken[best_valid] = true;
            out.push_back({p.score, Flag::tp});
        } else if (best_ignored >= 0) {
            taken[best_ignored] = true;
            out.push_back({p.score, Flag::ignored});
        } else {
            out.push_back({p.score, Flag::fp});
        }
    }
}

// 101-point interpolated AP from pooled ranked flags.
double interpolated_ap(std::vector<RankedFlag>& ranked, std::size_t n_positive) {
    if (n_positive == 0) {
        return -1.0;  // undefined for this class/bucket
    }
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const RankedFlag& a, const RankedFlag& b) { return a.score > b.score; });

    std::vector<double> precision, recall;
    std::size_t tp = 0, fp = 0;
    for (const RankedFlag& r : ranked) {
        if (r.flag == Flag::ignored) {
            continue;
        }
        (r.flag == Flag::tp ? tp : fp) += 1;
        precision.push_back(static_cast<double>(tp) / (tp + fp));
        recall.push_back(static_cast<double>(tp) / n_positive);
    }
    // Monotone precision envelope from the right.
    for (std::size_t i = precision.size(); i-- > 1;) {
        precision[i - 1] = std::max(precision[i - 1], precision[i]);
    }
    double total = 0.0;
    std::size_t j = 0;
    for (int r = 0; r <= 100; ++r) {
        const double level = static_cast<double>(r) / 100.0;
        while (j < recall.size() && recall[j] < level) {
            ++j;
        }
        if (j < recall.size()) {
            total += precision[j];
        }
    }
    return total / 101.0;
}

struct Bucket {
    double min_area = 0.0;
    double max_area = 0.0;
};

}  // namespace

MatchResult match(std::span<const Prediction> predictions, std::span<const GroundTruth> truths,
                  double iou_threshold) {
    MatchResult out;
    std::vector<bool> taken(truths.size(), false);
    for (int i : score_order(predictions)) {
        int best = -1;
        double best_iou = 0.0;
        for (std::size_t j = 0; j < truths.size(); ++j) {
            if (taken[j]) {
                continue;
            }
            const double v = iou(predictions[i].box, truths[j].box);
            if (v >= iou_threshold && (best < 0 || v > best_iou)) {
                best = static_cast<int>(j);
                best_iou = v;
            }
        }
        if (best >= 0) {
            taken[best] = true;
            out.pairs.push_back({i, best, best_iou});
        } else {
            out.unmatched_predictions.push_back(i);
        }
    }
    for (std::size_t j = 0; j < truths.size(); ++j) {
        if (!taken[j]) {
            out.unmatched_truths.push_back(static_cast<int>(j));
        }
    }
    return out;
}

ApReport average_precision(std::span<const Prediction> predictions,
                           std::span<const GroundTruth> truths, const ApParams& params) {
    if (truths.empty()) {
        throw EmptyCorpus("cannot evaluate AP without ground truth");
    }

    const double scale = params.extent_w / 640.0;
    const double s2 = 32.0 * 32.0 * scale * scale;
    const double s3 = 96.0 * 96.0 * scale * scale;
    const double inf = std::numeric_limits<double>::infinity();
    const Bucket buckets[4] = {{0.0, inf}, {0.0, s2}, {s2, s3}, {s3, inf}};

    // Group indices by class, then by scene; cap detections per scene+class.
    std::set<int> class_ids;
    for (const GroundTruth& g : truths) {
        class_ids.insert(g.class_id);
    }
    std::map<std::pair<int, int>, std::vector<int>> preds_by;   // (class, scene) -> pred idx
    std::map<std::pair<int, int>, std::vector<int>> truths_by;  // (class, scene) -> truth idx
    std::set<int> scenes;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        preds_by[{predictions[i].class_id, predictions[i].scene_id}].push_back(
            static_cast<int>(i));
        scenes.insert(predictions[i].scene_id);
    }
    for (std::size_t j = 0; j < truths.size(); ++j) {
        truths_by[{truths[j].class_id, truths[j].scene_id}].push_back(static_cast<int>(j));
        scenes.insert(truths[j].scene_id);
    }
    for (auto& [key, idx] : preds_by) {
        if (static_cast<int>(idx.size()) > params.max_detections) {
            std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
                return predictions[a].score > predictions[b].score;
            });
            idx.resize(params.max_detections);
        }
    }

    // ap_sums[bucket][threshold] accumulates per-class AP; counts mirror it.
    double ap_sums[4][kThresholdCount] = {};
    int ap_counts[4][kThresholdCount] = {};

    for (int cls : class_ids) {
        for (int b = 0; b < 4; ++b) {
            // Per-scene ignore marks for this bucket.
            for (int k = 0; k < kThresholdCount; ++k) {
                const double thr = iou_threshold(k);
                std::vector<RankedFlag> ranked;
                std::size_t n_positive = 0;
                for (int scene : scenes) {
                    auto t_it = truths_by.find({cls, scene});
                    auto p_it = preds_by.find({cls, scene});
                    static const std::vector<int> kNone;
                    const std::vector<int>& t_idx = t_it == truths_by.end() ? kNone : t_it->second;
                    const std::vector<int>& p_idx = p_it == preds_by.end() ? kNone : p_it->second;
                    std::vector<bool> ignored(t_idx.size(), false);
                    for (std::size_t j = 0; j < t_idx.size(); ++j) {
                        const double area = truths[t_idx[j]].box.area();
                        ignored[j] = area < buckets[b].min_area || area >= buckets[b].max_area;
                        if (!ignored[j]) {
                            ++n_positive;
                        }
                    }
                    flag_scene(predictions, p_idx, truths, t_idx, ignored, thr, ranked);
                }
                const double ap = interpolated_ap(ranked, n_positive);
                if (ap >= 0.0) {
                    ap_sums[b][k] += ap;
                    ap_counts[b][k] += 1;
                }
            }
        }
    }

    const auto mean_over = [&](int bucket, int threshold_first, int threshold_last) {
        double total = 0.0;
        int n = 0;
        for (int k = threshold_first; k <= threshold_last; ++k) {
            total += ap_sums[bucket][k];
            n += ap_counts[bucket][k];
        }
        return n == 0 ? 0.0 : total / n;
    };

    ApReport report;
    report.ap = mean_over(0, 0, kThresholdCount - 1);
    report.ap50 = mean_over(0, 0, 0);
    report.ap75 = mean_over(0, 5, 5);
    report.ap_s = mean_over(1, 0, kThresholdCount - 1);
    report.ap_m = mean_over(2, 0, kThresholdCount - 1);
    report.ap_l = mean_over(3, 0, kThresholdCount - 1);

    // Edge MAE over pairs matched at IoU 0.5, within scene and class.
    double abs_sum = 0.0;
    std::size_t edge_count = 0;
    for (int cls : class_ids) {
        for (int scene : scenes) {
            auto t_it = truths_by.find({cls, scene});
            auto p_it = preds_by.find({cls, scene});
            if (t_it == truths_by.end() || p_it == preds_by.end()) {
                continue;
            }
            std::vector<Prediction> p_pool;
            std::vector<GroundTruth> t_pool;
            for (int i : p_it->second) {
                p_pool.push_back(predictions[i]);
            }
            for (int j : t_it->second) {
                t_pool.push_back(truths[j]);
            }
            const MatchResult m = match(p_pool, t_pool, 0.5);
            for (const MatchResult::Pair& pair : m.pairs) {
                const Box& p = p_pool[pair.prediction].box;
                const Box& t = t_pool[pair.truth].box;
                abs_sum += std::abs(p.l() - t.l()) + std::abs(p.r() - t.r()) +
                           std::abs(p.t() - t.t()) + std::abs(p.b() - t.b());
                edge_count += 4;
            }
        }
    }
    report.edge_mae = edge_count == 0 ? 0.0 : abs_sum / edge_count;
    return report;
}

EdgeErrorStats edge_error(std::span<const Prediction> predictions,
                          std::span<const GroundTruth> truths, const MatchResult& matching) {
    EdgeErrorStats out;
    std::vector<double> errors;
    errors.reserve(matching.pairs.size() * 4);
    for (const MatchResult::Pair& pair : matching.pairs) {
        const Box& p = predictions[pair.prediction].box;
        const Box& t = truths[pair.truth].box;
        errors.push_back(std::abs(p.l() - t.l()));
        errors.push_back(std::abs(p.r() - t.r()));
        errors.push_back(std::abs(p.t() - t.t()));
        errors.push_back(std::abs(p.b() - t.b()));
    }
    out.pair_count = matching.pairs.size();
    if (errors.empty()) {
        return out;
    }
    out.mean = std::accumulate(errors.begin(), errors.end(), 0.0) / errors.size();
    std::sort(errors.begin(), errors.end());
    const std::size_t n = errors.size();
    out.median = n % 2 == 1 ? errors[n / 2] : (errors[n / 2 - 1] + errors[n / 2]) / 2.0;
    const std::size_t rank = static_cast<std::size_t>(std::ceil(0.95 * n));
    out.p95 = errors[std::min(n - 1, rank == 0 ? 0 : rank - 1)];
    return out;
}

}  // namespace boxrefine
