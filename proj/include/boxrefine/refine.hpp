#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "boxrefine/boundary_map.hpp"
#include "boxrefine/estimator.hpp"
#include "boxrefine/geometry.hpp"

namespace boxrefine {

// One detector output: the previous localization result plus the boundary
// probability map predicted over it. map.proposal() must equal proposal.
struct Detection {
    Box proposal;
    int class_id = 0;
    double score = 1.0;
    BoundaryMap map;
};

// Refinement result. fallback means the pipeline found no usable boundary
// evidence (or a degenerate fine box) and returned the proposal untouched.
// coarse_box is the pixel-snapped pre-fine box, kept for diagnostics.
struct RefinedDetection {
    Box box;
    bool fallback = false;
    Box coarse_box;
};

struct Thresholds {
    double binarize = 1e-4;
    double fine = 0.0;
};

enum class Axis { horizontal, vertical };

// Affine correspondence between map-pixel coordinates [0,S] and the image-
// space proposal region. pos=0 maps to the low proposal face, pos=S to the
// high face, both exactly.
double map_to_image(double pos, Axis axis, const Box& proposal, int side);
double image_to_map(double coord, Axis axis, const Box& proposal, int side);

RefinedDetection refine_one(const Detection& d, const EstimatorFn& f,
                            const Thresholds& thresholds = Thresholds{});
RefinedDetection refine_one(const Detection& d, const EstimatorFn& f,
                            const Thresholds& thresholds, const ScoringMatrix& matrix);

struct BatchIssue {
    std::size_t index = 0;
    std::string message;
};

// Elementwise refine_one, order preserving. The parallelism hint changes
// wall time only, never results. Elements that throw (malformed detections)
// come back as fallback and are reported in issues with their index.
std::vector<RefinedDetection> refine_batch(std::span<const Detection> detections,
                                           const EstimatorFn& f,
                                           const Thresholds& thresholds = Thresholds{},
                                           int parallelism = 1,
                                           std::vector<BatchIssue>* issues = nullptr);

}  // namespace boxrefine
