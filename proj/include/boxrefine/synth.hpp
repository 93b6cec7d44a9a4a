#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "boxrefine/boundary_map.hpp"
#include "boxrefine/geometry.hpp"
#include "boxrefine/refine.hpp"

namespace boxrefine {

// Boundary-transition profile: maps the object-covered fraction c of a map
// pixel to the rendered value. Each builtin is the inverse of one builtin
// estimator, so the matched pair decodes renderings exactly:
//   coverage        g(c) = c                 <-> linear
//   sqrt            g(c) = sqrt(c)           <-> exponential
//   exp-transition  g(c) = (e^c-1)/(e-1)     <-> logarithmic
class RenderProfile {
public:
    static RenderProfile builtin(std::string_view name);
    static RenderProfile custom(std::string name, std::function<double(double)> g);

    double operator()(double c) const { return g_(c); }
    const std::string& name() const { return name_; }

private:
    RenderProfile(std::string name, std::function<double(double)> g)
        : name_(std::move(name)), g_(std::move(g)) {}

    std::string name_;
    std::function<double(double)> g_;
};

// Ground truth for one synthetic scene.
struct SceneTruth {
    std::vector<Box> truth_boxes;
    std::vector<int> class_ids;
    double extent_w = 0.0;
    double extent_h = 0.0;
    std::uint64_t seed = 0;
};

struct NoiseSpec {
    double gaussian_sigma = 0.0;
    std::uint64_t seed = 0;
};

// Renders the truth box into channel class_id of an S x S x cls map over
// the proposal region. Pixel values are g(covered fraction), with the
// covered fraction computed in closed form as the product of per-axis 1-D
// overlaps. Throws NoOverlap when truth does not intersect the proposal.
BoundaryMap render_map(const Box& truth, const Box& proposal, int side, int classes,
                       int class_id, const RenderProfile& profile);

// Adds iid Gaussian noise (clamped to [0,1]); sigma=0 returns the input
// bit-identically. Deterministic per seed.
BoundaryMap add_noise(const BoundaryMap& map, const NoiseSpec& spec);

// Perturbs each edge independently by uniform [-magnitude, +magnitude] map
// pixels (one map pixel = box extent / side on that axis). Resamples on a
// degenerate result, up to 100 retries, then throws JitterFailed.
Box jitter_proposal(const Box& truth, double magnitude, std::uint64_t seed, int side = 28);

struct CorpusConfig {
    int n_scenes = 10;
    int boxes_per_scene = 2;
    int side = 28;
    int classes = 80;
    std::string profile = "coverage";
    double noise_sigma = 0.0;
    double jitter = 0.0;      // map pixels
    double expand = 0.0;      // map pixels of outward proposal expansion before jitter
    std::uint64_t seed = 0;
    double extent_w = 640.0;
    double extent_h = 640.0;
    double box_min = 48.0;    // truth box side range, image pixels
    double box_max = 256.0;
    double score_min = 0.5;   // detection scores uniform in [score_min, 1]
    int distractors = 0;      // extra same-channel objects per map (no exactness claims)

    void validate() const;
};

struct Corpus {
    std::vector<Detection> detections;  // scene-major, box order within scene
    std::vector<SceneTruth> scenes;     // scenes[i] pairs with its detections in order
};

// Reproducible synthetic corpus. Every random draw comes from streams
// derived as mix_seed(config.seed, k) with k = global detection ordinal *
// 4 + {0:box, 1:jitter, 2:noise, 3:score}, so generation order and
// parallelism cannot change the output.
Corpus generate_corpus(const CorpusConfig& config);

}  // namespace boxrefine
