#pragma once

#include <span>
#include <vector>

#include "boxrefine/geometry.hpp"

namespace boxrefine {

struct Prediction {
    Box box;
    int class_id = 0;
    double score = 1.0;
    int scene_id = 0;
};

struct GroundTruth {
    Box box;
    int class_id = 0;
    int scene_id = 0;
};

// Greedy score-order matching within one pool of predictions and truths.
// Each prediction, visited in descending score (ties broken by input
// index), takes the highest-IoU unmatched truth with IoU >= threshold.
struct MatchResult {
    struct Pair {
        int prediction = 0;
        int truth = 0;
        double iou = 0.0;
    };
    std::vector<Pair> pairs;
    std::vector<int> unmatched_predictions;
    std::vector<int> unmatched_truths;
};

MatchResult match(std::span<const Prediction> predictions, std::span<const GroundTruth> truths,
                  double iou_threshold);

// COCO-style report. AP values are fractions in [0,1]; tables elsewhere
// print them x100. Size buckets are computed on truth areas with the
// standard 32^2 / 96^2 pixel thresholds scaled by (extent_w / 640)^2, so a
// jointly rescaled corpus keeps its bucket membership.
struct ApReport {
    double ap = 0.0;    // mean over IoU thresholds 0.50:0.05:0.95
    double ap50 = 0.0;
    double ap75 = 0.0;
    double ap_s = 0.0;  // truth area <  32^2 (scaled)
    double ap_m = 0.0;  // 32^2 .. 96^2
    double ap_l = 0.0;  // > 96^2
    double edge_mae = 0.0;  // mean |edge error| over pairs matched at IoU 0.5, pixels
};

struct ApParams {
    int max_detections = 100;  // per scene and class, kept by descending score
    double extent_w = 640.0;   // reference width 640 fixes the bucket scale
};

// Precision-recall with 101-point interpolation, averaged over classes
// that carry ground truth. Throws EmptyCorpus when truths is empty.
ApReport average_precision(std::span<const Prediction> predictions,
                           std::span<const GroundTruth> truths,
                           const ApParams& params = ApParams{});

// Pooled per-edge absolute errors (|dl|,|dr|,|dt|,|db| of every matched
// pair). p95 uses the nearest-rank convention.
struct EdgeErrorStats {
    double mean = 0.0;
    double median = 0.0;
    double p95 = 0.0;
    std::size_t pair_count = 0;
};

EdgeErrorStats edge_error(std::span<const Prediction> predictions,
                          std::span<const GroundTruth> truths, const MatchResult& matching);

}  // namespace boxrefine
