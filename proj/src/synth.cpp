#include "boxrefine/synth.hpp"

#include <algorithm>
#include <cmath>

#include "boxrefine/random.hpp"

namespace boxrefine {

namespace {

// Validation for profiles: endpoints and strict monotonicity on the probe
// grid. No slope cap here; sqrt is a perfectly good rendering profile even
// though it is rejected as an estimator.
void check_profile(const std::string& name, const std::function<double(double)>& g) {
    constexpr int kGrid = 1024;
    if (std::abs(g(0.0)) > 1e-12 || std::abs(g(1.0) - 1.0) > 1e-12) {
        throw InvalidProfile("profile '" + name + "' must pass through (0,0) and (1,1)");
    }
    double prev = g(0.0);
    for (int i = 1; i < kGrid; ++i) {
        const double c = static_cast<double>(i) / (kGrid - 1);
        const double y = g(c);
        if (!std::isfinite(y) || !(y > prev)) {
            throw InvalidProfile("profile '" + name + "' is not strictly increasing at c=" +
                                 std::to_string(c));
        }
        prev = y;
    }
}

// Covered length of [lo, hi) within the unit-pitch cell [cell, cell+1),
// both in map coordinates, as a fraction of the cell.
double overlap_1d(double lo, double hi, double cell) {
    const double a = std::max(lo, cell);
    const double b = std::min(hi, cell + 1.0);
    return std::max(0.0, b - a);
}

void render_into(std::vector<float>& values, const Box& truth, const Box& proposal, int side,
                 int classes, int class_id, const RenderProfile& profile) {
    const double lm = image_to_map(truth.l(), Axis::horizontal, proposal, side);
    const double rm = image_to_map(truth.r(), Axis::horizontal, proposal, side);
    const double tm = image_to_map(truth.t(), Axis::vertical, proposal, side);
    const double bm = image_to_map(truth.b(), Axis::vertical, proposal, side);

    std::vector<double> cover_x(side), cover_y(side);
    for (int i = 0; i < side; ++i) {
        cover_x[i] = overlap_1d(lm, rm, i);
        cover_y[i] = overlap_1d(tm, bm, i);
    }
    for (int row = 0; row < side; ++row) {
        if (cover_y[row] == 0.0) {
            continue;
        }
        for (int col = 0; col < side; ++col) {
            const double coverage = cover_x[col] * cover_y[row];
            if (coverage == 0.0) {
                continue;
            }
            const double v = std::clamp(profile(coverage), 0.0, 1.0);
            std::size_t idx = (static_cast<std::size_t>(row) * side + col) * classes + class_id;
            values[idx] = std::max(values[idx], static_cast<float>(v));
        }
    }
}

}  // namespace

RenderProfile RenderProfile::builtin(std::string_view name) {
    std::function<double(double)> g;
    if (name == "coverage") {
        g = [](double c) { return c; };
    } else if (name == "sqrt") {
        g = [](double c) { return std::sqrt(c); };
    } else if (name == "exp-transition") {
        g = [](double c) { return std::expm1(c) / std::expm1(1.0); };
    } else {
        throw InvalidProfile("unknown render profile '" + std::string(name) +
                             "' (expected coverage, sqrt or exp-transition)");
    }
    return custom(std::string(name), std::move(g));
}

RenderProfile RenderProfile::custom(std::string name, std::function<double(double)> g) {
    check_profile(name, g);
    return RenderProfile(std::move(name), std::move(g));
}

BoundaryMap render_map(const Box& truth, const Box& proposal, int side, int classes,
                       int class_id, const RenderProfile& profile) {
    if (class_id < 0 || class_id >= classes) {
        throw ClassOutOfRange("class_id " + std::to_string(class_id) + " outside [0, " +
                              std::to_string(classes) + ")");
    }
    if (iou(truth, proposal) == 0.0) {
        throw NoOverlap("truth box " + to_string(truth) + " does not overlap proposal " +
                        to_string(proposal));
    }
    std::vector<float> values(static_cast<std::size_t>(side) * side * classes, 0.0f);
    render_into(values, truth, proposal, side, classes, class_id, profile);
    return BoundaryMap(side, classes, proposal, std::move(values));
}

BoundaryMap add_noise(const BoundaryMap& map, const NoiseSpec& spec) {
    if (spec.gaussian_sigma < 0.0) {
        throw ConfigError("noise sigma must be >= 0");
    }
    if (spec.gaussian_sigma == 0.0) {
        return map;
    }
    SplitMix64 rng(spec.seed);
    std::vector<float> values = map.values();
    for (float& v : values) {
        const double noisy = v + spec.gaussian_sigma * rng.next_gaussian();
        v = static_cast<float>(std::clamp(noisy, 0.0, 1.0));
    }
    return BoundaryMap(map.side(), map.classes(), map.proposal(), std::move(values));
}

Box jitter_proposal(const Box& truth, double magnitude, std::uint64_t seed, int side) {
    if (magnitude < 0.0) {
        throw ConfigError("jitter magnitude must be >= 0");
    }
    if (magnitude == 0.0) {
        return truth;
    }
    const double sx = truth.width() / side;
    const double sy = truth.height() / side;
    SplitMix64 rng(seed);
    for (int attempt = 0; attempt < 100; ++attempt) {
        const double l = truth.l() + rng.next_uniform(-magnitude, magnitude) * sx;
        const double r = truth.r() + rng.next_uniform(-magnitude, magnitude) * sx;
        const double t = truth.t() + rng.next_uniform(-magnitude, magnitude) * sy;
        const double b = truth.b() + rng.next_uniform(-magnitude, magnitude) * sy;
        if (l < r && t < b) {
            return Box(l, r, t, b);
        }
    }
    throw JitterFailed("no valid jittered proposal after 100 retries for " + to_string(truth));
}

void CorpusConfig::validate() const {
    if (n_scenes < 0 || boxes_per_scene < 1) {
        throw ConfigError("n_scenes must be >= 0 and boxes_per_scene >= 1");
    }
    if (side < 2 || classes < 1) {
        throw ConfigError("side must be >= 2 and classes >= 1");
    }
    if (noise_sigma < 0.0 || jitter < 0.0 || expand < 0.0 || distractors < 0) {
        throw ConfigError("noise_sigma, jitter, expand and distractors must be >= 0");
    }
    if (extent_w <= 0.0 || extent_h <= 0.0) {
        throw ConfigError("image extent must be positive");
    }
    if (!(box_min > 0.0) || !(box_max >= box_min)) {
        throw ConfigError("box size range must satisfy 0 < box_min <= box_max");
    }
    if (box_max > std::min(extent_w, extent_h)) {
        throw ConfigError("box_max exceeds the image extent");
    }
    if (score_min < 0.0 || score_min > 1.0) {
        throw ConfigError("score_min must lie in [0,1]");
    }
    RenderProfile::builtin(profile);  // throws on unknown names
}

Corpus generate_corpus(const CorpusConfig& config) {
    config.validate();
    const RenderProfile profile = RenderProfile::builtin(config.profile);

    Corpus out;
    out.scenes.reserve(config.n_scenes);
    out.detections.reserve(static_cast<std::size_t>(config.n_scenes) * config.boxes_per_scene);

    std::uint64_t ordinal = 0;
    for (int scene = 0; scene < config.n_scenes; ++scene) {
        SceneTruth truth;
        truth.extent_w = config.extent_w;
        truth.extent_h = config.extent_h;
        // scene records carry their own stream domain, disjoint from the
        // per-detection streams below
        truth.seed = mix_seed(config.seed ^ 0x5CEE5EEDULL, scene);

        for (int k = 0; k < config.boxes_per_scene; ++k, ++ordinal) {
            SplitMix64 box_rng(mix_seed(config.seed, 4 * ordinal + 0));
            const double w = box_rng.next_uniform(config.box_min, config.box_max);
            const double h = box_rng.next_uniform(config.box_min, config.box_max);
            const double l = box_rng.next_uniform(0.0, config.extent_w - w);
            const double t = box_rng.next_uniform(0.0, config.extent_h - h);
            const Box truth_box(l, l + w, t, t + h);
            const int class_id = static_cast<int>(box_rng.next_below(config.classes));

            Box proposal = truth_box;
            if (config.expand > 0.0) {
                const double ex = config.expand * truth_box.width() / config.side;
                const double ey = config.expand * truth_box.height() / config.side;
                proposal = Box(proposal.l() - ex, proposal.r() + ex, proposal.t() - ey,
                               proposal.b() + ey);
            }
            proposal = jitter_proposal(proposal, config.jitter,
                                       mix_seed(config.seed, 4 * ordinal + 1), config.side);

            BoundaryMap map =
                render_map(truth_box, proposal, config.side, config.classes, class_id, profile);
            if (config.distractors > 0) {
                std::vector<float> values = map.values();
                for (int dx = 0; dx < config.distractors; ++dx) {
                    const double dw = box_rng.next_uniform(0.1, 0.3) * truth_box.width();
                    const double dh = box_rng.next_uniform(0.1, 0.3) * truth_box.height();
                    const double dl = box_rng.next_uniform(proposal.l(), proposal.r() - dw);
                    const double dt = box_rng.next_uniform(proposal.t(), proposal.b() - dh);
                    render_into(values, Box(dl, dl + dw, dt, dt + dh), proposal, config.side,
                                config.classes, class_id, profile);
                }
                map = BoundaryMap(config.side, config.classes, proposal, std::move(values));
            }
            map = add_noise(map, NoiseSpec{config.noise_sigma,
                                           mix_seed(config.seed, 4 * ordinal + 2)});

            SplitMix64 score_rng(mix_seed(config.seed, 4 * ordinal + 3));
            const double score = score_rng.next_uniform(config.score_min, 1.0);

            truth.truth_boxes.push_back(truth_box);
            truth.class_ids.push_back(class_id);
            out.detections.push_back(Detection{proposal, class_id, score, std::move(map)});
        }
        out.scenes.push_back(std::move(truth));
    }
    return out;
}

}  // namespace boxrefine
