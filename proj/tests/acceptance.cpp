// Acceptance suite: every criterion prints one [PASS]/[FAIL] line and the
// binary exits non-zero when any fails. Runtime limits are enforced.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "boxrefine/boundary_map.hpp"
#include "boxrefine/estimator.hpp"
#include "boxrefine/eval.hpp"
#include "boxrefine/geometry.hpp"
#include "boxrefine/io.hpp"
#include "boxrefine/random.hpp"
#include "boxrefine/refine.hpp"
#include "boxrefine/synth.hpp"

using namespace boxrefine;
namespace fs = std::filesystem;

namespace {

struct Checker {
    std::vector<std::string> failures;

    void require(bool ok, const std::string& message) {
        if (!ok && failures.size() < 8) {
            failures.push_back(message);
        } else if (!ok) {
            failures.back() = "... more failures suppressed";
        }
    }
};

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

// ---------------------------------------------------------------- helpers

struct FirstLast {
    int first = -1;
    int last = -1;
};

FirstLast scan_first_last(const BinaryVector& v) {
    FirstLast out;
    for (int i = 0; i < static_cast<int>(v.size()); ++i) {
        if (v.bits[i]) {
            if (out.first < 0) {
                out.first = i;
            }
            out.last = i;
        }
    }
    return out;
}

BinaryVector bits_from_mask(std::uint32_t mask, int s) {
    BinaryVector v;
    v.bits.resize(s);
    for (int i = 0; i < s; ++i) {
        v.bits[i] = (mask >> i) & 1;
    }
    return v;
}

// Truth box in map coordinates with edge fractional parts in [0.05, 0.95]
// and a fully covered interior row and column, the regime in which
// rendering by pixel coverage is exactly invertible.
Box random_interior_truth(SplitMix64& rng, const Box& proposal, int s) {
    const int li = static_cast<int>(rng.next_below(s / 2 - 2));
    const int ti = static_cast<int>(rng.next_below(s / 2 - 2));
    const int ri = li + 3 + static_cast<int>(rng.next_below(s - li - 3));
    const int bi = ti + 3 + static_cast<int>(rng.next_below(s - ti - 3));
    const double lm = li + rng.next_uniform(0.05, 0.95);
    const double tm = ti + rng.next_uniform(0.05, 0.95);
    const double rm = ri - 1.0 + rng.next_uniform(0.05, 0.95);
    const double bm = bi - 1.0 + rng.next_uniform(0.05, 0.95);
    return Box(map_to_image(lm, Axis::horizontal, proposal, s),
               map_to_image(rm, Axis::horizontal, proposal, s),
               map_to_image(tm, Axis::vertical, proposal, s),
               map_to_image(bm, Axis::vertical, proposal, s));
}

double max_edge_error_map_px(const Box& truth, const Box& got, const Box& proposal, int s) {
    const double el = std::abs(image_to_map(got.l(), Axis::horizontal, proposal, s) -
                               image_to_map(truth.l(), Axis::horizontal, proposal, s));
    const double er = std::abs(image_to_map(got.r(), Axis::horizontal, proposal, s) -
                               image_to_map(truth.r(), Axis::horizontal, proposal, s));
    const double et = std::abs(image_to_map(got.t(), Axis::vertical, proposal, s) -
                               image_to_map(truth.t(), Axis::vertical, proposal, s));
    const double eb = std::abs(image_to_map(got.b(), Axis::vertical, proposal, s) -
                               image_to_map(truth.b(), Axis::vertical, proposal, s));
    return std::max(std::max(el, er), std::max(et, eb));
}

double mean_edge_error_map_px(const Box& truth, const Box& got, const Box& proposal, int s) {
    const double el = std::abs(image_to_map(got.l(), Axis::horizontal, proposal, s) -
                               image_to_map(truth.l(), Axis::horizontal, proposal, s));
    const double er = std::abs(image_to_map(got.r(), Axis::horizontal, proposal, s) -
                               image_to_map(truth.r(), Axis::horizontal, proposal, s));
    const double et = std::abs(image_to_map(got.t(), Axis::vertical, proposal, s) -
                               image_to_map(truth.t(), Axis::vertical, proposal, s));
    const double eb = std::abs(image_to_map(got.b(), Axis::vertical, proposal, s) -
                               image_to_map(truth.b(), Axis::vertical, proposal, s));
    return (el + er + et + eb) / 4.0;
}

int run_command(const std::string& command) {
    const int status = std::system(command.c_str());
    if (status == -1) {
        return -1;
    }
    return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) {
        return "<unreadable:" + p.string() + ">";
    }
    return std::string(std::istreambuf_iterator<char>(in), {});
}

std::map<std::string, double> read_kv_report(const fs::path& p) {
    std::map<std::string, double> out;
    std::istringstream in(slurp(p));
    std::string key;
    double value;
    while (in >> key >> value) {
        out[key] = value;
    }
    return out;
}

const char* cli_path() { return std::getenv("BOXREFINE_CLI"); }

// ------------------------------------------------------------- criteria

// Exhaustive matrix-vs-scan equivalence at S=12 plus 10,000 random vectors
// at S=28, zero mismatches allowed.
void criterion_coarse_equivalence(Checker& c) {
    const int s12 = 12;
    const ScoringMatrix m12(s12);
    for (std::uint32_t mask = 0; mask < (1u << s12); ++mask) {
        const BinaryVector v = bits_from_mask(mask, s12);
        const CoarseBoundary got = coarse_localize(v, m12);
        const FirstLast expected = scan_first_last(v);
        if (expected.first < 0) {
            c.require(!got.found, "mask " + std::to_string(mask) + ": expected found=false");
        } else {
            c.require(got.found && got.i_first == expected.first && got.i_last == expected.last,
                      "mask " + std::to_string(mask) + ": matrix pathway disagrees with scan");
        }
    }

    const int s28 = 28;
    const ScoringMatrix m28(s28);
    SplitMix64 rng(2024);
    for (int trial = 0; trial < 10000; ++trial) {
        const BinaryVector v = bits_from_mask(static_cast<std::uint32_t>(rng.next_u64()), s28);
        const CoarseBoundary got = coarse_localize(v, m28);
        const FirstLast expected = scan_first_last(v);
        if (expected.first < 0) {
            c.require(!got.found, "random trial " + std::to_string(trial));
        } else {
            c.require(got.found && got.i_first == expected.first && got.i_last == expected.last,
                      "random trial " + std::to_string(trial) + ": mismatch");
        }
    }
}

// For random contiguous vectors the activated product has exactly one
// entry equal to 1, located at the first positive index.
void criterion_single_activation(Checker& c) {
    const int s = 28;
    const ScoringMatrix m(s);
    SplitMix64 rng(2025);
    for (int trial = 0; trial < 10000; ++trial) {
        const int start = static_cast<int>(rng.next_below(s));
        const int len = 1 + static_cast<int>(rng.next_below(s - start));
        BinaryVector v;
        v.bits.assign(s, 0);
        for (int i = start; i < start + len; ++i) {
            v.bits[i] = 1;
        }
        const std::vector<double> activated = relu(m.product(v));
        int ones = 0;
        bool placed_right = true;
        for (int i = 0; i < s; ++i) {
            if (activated[i] == 1.0) {
                ++ones;
                placed_right = placed_right && i == start;
            }
        }
        c.require(ones == 1 && placed_right,
                  "trial " + std::to_string(trial) + ": start=" + std::to_string(start) +
                      " len=" + std::to_string(len) + " gave " + std::to_string(ones) +
                      " unit entries");
    }
}

// Noiseless matched-pair decoding recovers every edge within 1e-6 map px.
void criterion_exact_recovery(Checker& c) {
    struct Pair {
        const char* profile;
        const char* estimator;
    };
    const Pair pairs[] = {{"coverage", "linear"},
                          {"sqrt", "exponential"},
                          {"exp-transition", "logarithmic"}};
    const int s = 28;
    SplitMix64 rng(33);
    for (const Pair& pair : pairs) {
        const RenderProfile g = RenderProfile::builtin(pair.profile);
        const EstimatorFn f = EstimatorFn::builtin(pair.estimator);
        double worst = 0.0;
        for (int trial = 0; trial < 1000; ++trial) {
            const double pl = rng.next_uniform(0.0, 500.0);
            const double pt = rng.next_uniform(0.0, 500.0);
            const Box proposal(pl, pl + rng.next_uniform(30.0, 300.0), pt,
                               pt + rng.next_uniform(30.0, 300.0));
            const Box truth = random_interior_truth(rng, proposal, s);
            const BoundaryMap map = render_map(truth, proposal, s, 3, 1, g);
            const RefinedDetection out = refine_one({proposal, 1, 1.0, map}, f);
            if (out.fallback) {
                c.require(false, std::string(pair.profile) + " trial " +
                                     std::to_string(trial) + ": unexpected fallback");
                continue;
            }
            worst = std::max(worst, max_edge_error_map_px(truth, out.box, proposal, s));
        }
        c.require(worst <= 1e-6, std::string(pair.profile) + "/" + pair.estimator +
                                     ": max edge error " + fmt(worst) + " map px > 1e-6");
    }
}

// With jittered proposals and sigma=0.05 noise the refined boxes must beat
// the proposals by at least 0.05 mean IoU, and the per-edge MAE must order
// refined < coarse < proposal. Noisy maps need a mid-range binarize
// threshold: at 0.3 an exterior pixel needs a 6-sigma noise excursion to
// binarize as object, while boundary pixels above ~0.3 coverage survive.
void criterion_noise_improvement(Checker& c) {
    CorpusConfig config;
    config.n_scenes = 1000;
    config.boxes_per_scene = 1;
    config.side = 28;
    config.classes = 4;
    config.profile = "coverage";
    config.noise_sigma = 0.05;
    config.jitter = 2.0;
    config.box_min = 48;
    config.box_max = 256;
    config.seed = 4242;
    const Corpus corpus = generate_corpus(config);
    const std::vector<RefinedDetection> refined =
        refine_batch(corpus.detections, EstimatorFn::builtin("linear"), Thresholds{0.3, 0.0}, 4);

    double iou_proposal = 0.0, iou_coarse = 0.0, iou_refined = 0.0;
    double mae_proposal = 0.0, mae_coarse = 0.0, mae_refined = 0.0;
    std::size_t n = 0, fallbacks = 0;
    std::size_t det = 0;
    for (const SceneTruth& scene : corpus.scenes) {
        for (std::size_t k = 0; k < scene.truth_boxes.size(); ++k, ++det) {
            const Box& truth = scene.truth_boxes[k];
            const Box& proposal = corpus.detections[det].proposal;
            if (refined[det].fallback) {
                ++fallbacks;
                continue;
            }
            iou_proposal += iou(proposal, truth);
            iou_coarse += iou(refined[det].coarse_box, truth);
            iou_refined += iou(refined[det].box, truth);
            mae_proposal += mean_edge_error_map_px(truth, proposal, proposal, config.side);
            mae_coarse +=
                mean_edge_error_map_px(truth, refined[det].coarse_box, proposal, config.side);
            mae_refined += mean_edge_error_map_px(truth, refined[det].box, proposal, config.side);
            ++n;
        }
    }
    c.require(n > 900, "too many fallbacks under noise: " + std::to_string(fallbacks));
    iou_proposal /= n;
    iou_coarse /= n;
    iou_refined /= n;
    mae_proposal /= n;
    mae_coarse /= n;
    mae_refined /= n;

    c.require(iou_refined >= iou_proposal + 0.05,
              "mean IoU improvement " + fmt(iou_refined - iou_proposal) + " < 0.05 (refined " +
                  fmt(iou_refined) + ", proposal " + fmt(iou_proposal) + ")");
    c.require(iou_refined > iou_coarse && iou_coarse > iou_proposal,
              "IoU ordering violated: refined " + fmt(iou_refined) + ", coarse " +
                  fmt(iou_coarse) + ", proposal " + fmt(iou_proposal));
    c.require(mae_refined < mae_coarse && mae_coarse < mae_proposal,
              "edge MAE ordering violated: refined " + fmt(mae_refined) + ", coarse " +
                  fmt(mae_coarse) + ", proposal " + fmt(mae_proposal));
}

// compare-estimators must show each profile's matched estimator with the
// lowest edge MAE of its column.
void criterion_estimator_direction(Checker& c, const fs::path& dir) {
    const char* cli = cli_path();
    if (cli == nullptr) {
        c.require(false, "BOXREFINE_CLI not set");
        return;
    }
    const fs::path cfg_path = dir / "compare.cfg";
    {
        std::ofstream cfg(cfg_path);
        cfg << "n_scenes 150\nboxes_per_scene 2\nS 28\ncls 3\n"
            << "expand 3\njitter 1\nnoise_sigma 0\nseed 1234\n"
            << "box_min 48\nbox_max 256\n";
    }
    const fs::path report = dir / "compare_report.txt";
    const std::string cmd = std::string(cli) + " compare-estimators --config " +
                            cfg_path.string() + " --report " + report.string() + " > " +
                            (dir / "compare_stdout.txt").string();
    const int rc = run_command(cmd);
    c.require(rc == 0, "compare-estimators exited with " + std::to_string(rc));
    if (rc != 0) {
        return;
    }
    const std::map<std::string, double> kv = read_kv_report(report);
    const struct {
        const char* profile;
        const char* matched;
    } rows[] = {{"coverage", "linear"}, {"sqrt", "exponential"},
                {"exp-transition", "logarithmic"}};
    for (const auto& row : rows) {
        const char* estimators[] = {"linear", "exponential", "logarithmic"};
        std::string best;
        double best_mae = 0.0;
        for (const char* est : estimators) {
            const std::string key = std::string(row.profile) + "." + est + ".edge_mae_px";
            const auto it = kv.find(key);
            if (it == kv.end()) {
                c.require(false, "report missing key " + key);
                return;
            }
            if (best.empty() || it->second < best_mae) {
                best = est;
                best_mae = it->second;
            }
        }
        c.require(best == row.matched, std::string(row.profile) + ": lowest edge MAE was " +
                                           best + ", expected " + row.matched);
    }
}

// Golden AP, greedy-vs-exhaustive matching, and the perfect-prediction
// identity. Hand derivation of the golden values:
//   thresholds 0.50/0.55/0.60 -> AP 56/101; 0.65..0.95 -> AP 34/101
//   ap = (3*56 + 7*34) / (101*10) = 406/1010
void criterion_ap_harness(Checker& c) {
    const std::vector<GroundTruth> truths = {
        {Box(100, 110, 100, 110), 0, 0},
        {Box(0, 10, 0, 10), 0, 0},
        {Box(200, 220, 200, 220), 0, 0},
    };
    const std::vector<Prediction> preds = {
        {Box(100, 110, 100, 110), 0, 0.9, 0},
        {Box(300, 310, 300, 310), 0, 0.8, 0},
        {Box(0, 10, 0, 6.2), 0, 0.7, 0},
    };
    const ApReport golden = average_precision(preds, truths);
    c.require(std::abs(golden.ap50 - 56.0 / 101.0) <= 1e-9,
              "golden ap50 = " + fmt(golden.ap50) + ", expected 56/101");
    c.require(std::abs(golden.ap75 - 34.0 / 101.0) <= 1e-9,
              "golden ap75 = " + fmt(golden.ap75) + ", expected 34/101");
    c.require(std::abs(golden.ap - 406.0 / 1010.0) <= 1e-9,
              "golden ap = " + fmt(golden.ap) + ", expected 406/1010");

    // greedy matching count vs exhaustive assignment, 200 instances with up
    // to 5 boxes a side; truths separated so greedy optimality is provable
    SplitMix64 rng(77);
    const std::function<int(const std::vector<Prediction>&, const std::vector<GroundTruth>&,
                            std::size_t, std::vector<bool>&)>
        exhaustive = [&](const std::vector<Prediction>& ps, const std::vector<GroundTruth>& ts,
                         std::size_t next, std::vector<bool>& taken) -> int {
        if (next == ps.size()) {
            return 0;
        }
        int best = exhaustive(ps, ts, next + 1, taken);
        for (std::size_t j = 0; j < ts.size(); ++j) {
            if (taken[j] || iou(ps[next].box, ts[j].box) < 0.5) {
                continue;
            }
            taken[j] = true;
            best = std::max(best, 1 + exhaustive(ps, ts, next + 1, taken));
            taken[j] = false;
        }
        return best;
    };
    for (int instance = 0; instance < 200; ++instance) {
        std::vector<GroundTruth> ts;
        std::vector<Prediction> ps;
        const int n_truths = 1 + static_cast<int>(rng.next_below(5));
        std::vector<int> cells{0, 1, 2, 3, 4, 5, 6, 7, 8};
        for (int i = 0; i < n_truths; ++i) {
            const std::size_t pick = rng.next_below(cells.size());
            const int cell = cells[pick];
            cells.erase(cells.begin() + static_cast<std::ptrdiff_t>(pick));
            const double cx = (cell % 3) * 100.0 + rng.next_uniform(-5, 5);
            const double cy = (cell / 3) * 100.0 + rng.next_uniform(-5, 5);
            const double w = rng.next_uniform(40, 60);
            const double h = rng.next_uniform(40, 60);
            ts.push_back({Box(cx - w / 2, cx + w / 2, cy - h / 2, cy + h / 2), 0, 0});
        }
        for (const GroundTruth& t : ts) {
            const int copies = static_cast<int>(rng.next_below(3));
            for (int k = 0; k < copies && ps.size() < 5; ++k) {
                ps.push_back({Box(t.box.l() + rng.next_uniform(-10, 10),
                                  t.box.r() + rng.next_uniform(-10, 10),
                                  t.box.t() + rng.next_uniform(-10, 10),
                                  t.box.b() + rng.next_uniform(-10, 10)),
                              0, rng.next_unit(), 0});
            }
        }
        const MatchResult greedy = match(ps, ts, 0.5);
        std::vector<bool> taken(ts.size(), false);
        const int best = exhaustive(ps, ts, 0, taken);
        c.require(static_cast<int>(greedy.pairs.size()) == best,
                  "instance " + std::to_string(instance) + ": greedy " +
                      std::to_string(greedy.pairs.size()) + " vs exhaustive " +
                      std::to_string(best));
    }

    // perfect predictions
    std::vector<GroundTruth> ts;
    std::vector<Prediction> ps;
    SplitMix64 prng(78);
    for (int scene = 0; scene < 4; ++scene) {
        for (int k = 0; k < 5; ++k) {
            const double cx = prng.next_uniform(100, 500);
            const double cy = prng.next_uniform(100, 500);
            const double side = prng.next_uniform(10, 200);
            const Box b(cx - side / 2, cx + side / 2, cy - side / 2, cy + side / 2);
            ts.push_back({b, k % 2, scene});
            ps.push_back({b, k % 2, 1.0, scene});
        }
    }
    const ApReport perfect = average_precision(ps, ts);
    c.require(perfect.ap == 1.0 && perfect.ap50 == 1.0 && perfect.ap75 == 1.0,
              "perfect predictions gave ap=" + fmt(perfect.ap) + " ap50=" + fmt(perfect.ap50) +
                  " ap75=" + fmt(perfect.ap75));
}

// Representation properties: round-trip, single-edge independence, and the
// center-size coupling.
void criterion_representation(Checker& c) {
    SplitMix64 rng(88);
    for (int trial = 0; trial < 1000; ++trial) {
        const double l = rng.next_uniform(-500, 500);
        const double t = rng.next_uniform(-500, 500);
        const Box box(l, l + rng.next_uniform(0.01, 400), t, t + rng.next_uniform(0.01, 400));

        const Box back = center_size_to_edges(edges_to_center_size(box));
        c.require(std::abs(back.l() - box.l()) <= 1e-9 && std::abs(back.r() - box.r()) <= 1e-9 &&
                      std::abs(back.t() - box.t()) <= 1e-9 &&
                      std::abs(back.b() - box.b()) <= 1e-9,
                  "round-trip drift on trial " + std::to_string(trial));

        const double new_left = box.r() - rng.next_uniform(0.001, box.width());
        const Box moved = set_edge(box, Edge::left, new_left);
        c.require(moved.l() == new_left && moved.r() == box.r() && moved.t() == box.t() &&
                      moved.b() == box.b(),
                  "set_edge touched more than one field on trial " + std::to_string(trial));

        const double delta = rng.next_uniform(0.1, 10.0);
        CenterSizeBox cs = edges_to_center_size(box);
        cs.w += delta;
        const Box grown = center_size_to_edges(cs);
        c.require(std::abs(grown.l() - (box.l() - delta / 2)) <= 1e-9 &&
                      std::abs(grown.r() - (box.r() + delta / 2)) <= 1e-9,
                  "center-size coupling violated on trial " + std::to_string(trial));
    }
}

// synth -> refine -> eval through the CLI: byte-identical outputs across
// two runs and across parallelism 1 and 8.
void criterion_pipeline_determinism(Checker& c, const fs::path& dir) {
    const char* cli = cli_path();
    if (cli == nullptr) {
        c.require(false, "BOXREFINE_CLI not set");
        return;
    }
    const fs::path cfg_path = dir / "pipe.cfg";
    {
        std::ofstream cfg(cfg_path);
        cfg << "n_scenes 40\nboxes_per_scene 2\nS 28\ncls 4\n"
            << "noise_sigma 0.03\njitter 1.5\nseed 99\nbox_min 48\nbox_max 256\n";
    }
    const std::string base = std::string(cli);
    const fs::path null_out = dir / "pipe_stdout.txt";
    const auto run = [&](const std::string& args) {
        const int rc = run_command(base + " " + args + " > " + null_out.string());
        c.require(rc == 0, "pipeline step failed (" + args.substr(0, 40) + "...): rc=" +
                               std::to_string(rc));
        return rc == 0;
    };

    for (int round = 1; round <= 2; ++round) {
        const std::string n = std::to_string(round);
        if (!run("synth --config " + cfg_path.string() + " --out " + (dir / ("c" + n)).string() +
                 " --truth " + (dir / ("truth" + n + ".txt")).string())) {
            return;
        }
        if (!run("refine --in " + (dir / ("c" + n)).string() + " --out " +
                 (dir / ("boxes" + n + ".txt")).string() +
                 " --estimator linear --binarize-threshold 0.5 --parallelism 1")) {
            return;
        }
        if (!run("eval --pred " + (dir / ("boxes" + n + ".txt")).string() + " --truth " +
                 (dir / ("truth" + n + ".txt")).string() + " --report " +
                 (dir / ("report" + n + ".txt")).string())) {
            return;
        }
    }
    if (!run("refine --in " + (dir / "c1").string() + " --out " + (dir / "boxes8.txt").string() +
             " --estimator linear --binarize-threshold 0.5 --parallelism 8")) {
        return;
    }

    c.require(slurp(dir / "c1.json") == slurp(dir / "c2.json"), "manifests differ across runs");
    c.require(slurp(dir / "c1.maps") == slurp(dir / "c2.maps"), "blobs differ across runs");
    c.require(slurp(dir / "truth1.txt") == slurp(dir / "truth2.txt"), "truth files differ");
    c.require(slurp(dir / "boxes1.txt") == slurp(dir / "boxes2.txt"),
              "boxes differ across runs");
    c.require(slurp(dir / "boxes1.txt") == slurp(dir / "boxes8.txt"),
              "boxes differ across parallelism 1 vs 8");
    c.require(slurp(dir / "report1.txt") == slurp(dir / "report2.txt"), "reports differ");
}

// Bundle round-trip plus the specified error classes on corrupted inputs,
// without crashes.
void criterion_format_robustness(Checker& c, const fs::path& dir) {
    CorpusConfig config;
    config.n_scenes = 2;
    config.boxes_per_scene = 2;
    config.side = 8;
    config.classes = 3;
    config.noise_sigma = 0.05;
    config.jitter = 1.0;
    config.seed = 31337;
    const Corpus corpus = generate_corpus(config);
    write_bundle(corpus.detections, {640, 640}, dir / "rt");
    const LoadedBundle loaded = read_bundle(dir / "rt");
    bool lossless = loaded.detections.size() == corpus.detections.size();
    for (std::size_t i = 0; lossless && i < loaded.detections.size(); ++i) {
        lossless = loaded.detections[i].proposal == corpus.detections[i].proposal &&
                   loaded.detections[i].class_id == corpus.detections[i].class_id &&
                   loaded.detections[i].score == corpus.detections[i].score &&
                   loaded.detections[i].map.values() == corpus.detections[i].map.values();
    }
    c.require(lossless, "bundle round trip is not lossless");

    const std::string blob = slurp(dir / "rt.maps");
    const std::string manifest = slurp(dir / "rt.json");
    const auto spit = [](const fs::path& p, const std::string& bytes) {
        std::ofstream out(p, std::ios::binary | std::ios::trunc);
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    };

    // truncated blob
    spit(dir / "bad.json", manifest);
    spit(dir / "bad.maps", blob.substr(0, blob.size() / 2));
    try {
        read_bundle(dir / "bad");
        c.require(false, "truncated blob was accepted");
    } catch (const FormatError&) {
    } catch (const Error& e) {
        c.require(false, std::string("truncated blob: wrong class ") + e.error_class());
    }

    // wrong version
    std::string v2 = manifest;
    const auto vpos = v2.find("\"version\": 1");
    v2.replace(vpos, 12, "\"version\": 9");
    spit(dir / "bad.json", v2);
    spit(dir / "bad.maps", blob);
    try {
        read_bundle(dir / "bad");
        c.require(false, "wrong version was accepted");
    } catch (const VersionMismatch&) {
    } catch (const Error& e) {
        c.require(false, std::string("wrong version: wrong class ") + e.error_class());
    }

    // out-of-range value
    std::string hot = blob;
    hot[0] = 0x00;
    hot[1] = 0x00;
    hot[2] = static_cast<char>(0xC0);
    hot[3] = 0x3F;  // 1.5f little-endian
    spit(dir / "bad.json", manifest);
    spit(dir / "bad.maps", hot);
    try {
        read_bundle(dir / "bad");
        c.require(false, "out-of-range value was accepted");
    } catch (const ValueRangeError&) {
    } catch (const Error& e) {
        c.require(false, std::string("out-of-range value: wrong class ") + e.error_class());
    }

    // garbage manifest
    spit(dir / "bad.json", "]{[ definitely not json");
    spit(dir / "bad.maps", blob);
    try {
        read_bundle(dir / "bad");
        c.require(false, "garbage manifest was accepted");
    } catch (const FormatError&) {
    } catch (const Error& e) {
        c.require(false, std::string("garbage manifest: wrong class ") + e.error_class());
    }

    // CLI surfaces: an empty bundle refines to an empty boxes file with
    // exit 0; a bad estimator name is a usage error (exit 2)
    const char* cli = cli_path();
    if (cli == nullptr) {
        c.require(false, "BOXREFINE_CLI not set");
        return;
    }
    write_bundle({}, {640, 640}, dir / "empty");
    const int rc_empty =
        run_command(std::string(cli) + " refine --in " + (dir / "empty").string() + " --out " +
                    (dir / "empty_boxes.txt").string() + " --estimator linear");
    c.require(rc_empty == 0, "refine on the empty bundle exited " + std::to_string(rc_empty));
    std::size_t data_lines = 0;
    std::istringstream boxes(slurp(dir / "empty_boxes.txt"));
    std::string line;
    while (std::getline(boxes, line)) {
        if (!line.empty() && line[0] != '#') {
            ++data_lines;
        }
    }
    c.require(data_lines == 0, "empty bundle produced " + std::to_string(data_lines) + " boxes");

    const int rc_usage =
        run_command(std::string(cli) + " refine --in " + (dir / "empty").string() + " --out " +
                    (dir / "x.txt").string() + " --estimator cubic 2> " +
                    (dir / "usage_err.txt").string());
    c.require(rc_usage == 2, "unknown estimator exited " + std::to_string(rc_usage) +
                                 ", expected the UsageError code 2");
    c.require(slurp(dir / "usage_err.txt").find("UsageError") != std::string::npos,
              "stderr does not name UsageError");
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        double time_limit_s;
        std::function<void(Checker&, const fs::path&)> run;
    };

    const fs::path dir =
        fs::temp_directory_path() / ("boxrefine_acceptance_" + std::to_string(::getpid()));
    fs::create_directories(dir);

    const std::vector<Criterion> criteria = {
        {1, "coarse localization: matrix pathway == brute-force first/last scan", 10.0,
         [](Checker& c, const fs::path&) { criterion_coarse_equivalence(c); }},
        {2, "contiguous vectors activate to a single 1 at the first positive index", 5.0,
         [](Checker& c, const fs::path&) { criterion_single_activation(c); }},
        {3, "noiseless matched-pair decoding is exact to 1e-6 map px", 30.0,
         [](Checker& c, const fs::path&) { criterion_exact_recovery(c); }},
        {4, "noisy corpus: refined beats proposal by >= 0.05 IoU, MAE orders", 60.0,
         [](Checker& c, const fs::path&) { criterion_noise_improvement(c); }},
        {5, "compare-estimators grid: matched estimator has lowest edge MAE", 60.0,
         [](Checker& c, const fs::path& d) { criterion_estimator_direction(c, d); }},
        {6, "AP harness: golden AP, greedy == exhaustive, perfect -> 1", 60.0,
         [](Checker& c, const fs::path&) { criterion_ap_harness(c); }},
        {7, "box representation: round-trip, edge independence, coupling", 10.0,
         [](Checker& c, const fs::path&) { criterion_representation(c); }},
        {8, "pipeline determinism across runs and parallelism 1 vs 8", 120.0,
         [](Checker& c, const fs::path& d) { criterion_pipeline_determinism(c, d); }},
        {9, "bundle format: lossless round trip, typed errors on corruption", 30.0,
         [](Checker& c, const fs::path& d) { criterion_format_robustness(c, d); }},
    };

    int failed = 0;
    for (const Criterion& criterion : criteria) {
        Checker checker;
        const auto start = std::chrono::steady_clock::now();
        try {
            criterion.run(checker, dir);
        } catch (const std::exception& e) {
            checker.require(false, std::string("uncaught exception: ") + e.what());
        }
        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (elapsed > criterion.time_limit_s) {
            checker.require(false, "runtime " + fmt(elapsed) + "s exceeds " +
                                       fmt(criterion.time_limit_s) + "s");
        }
        if (checker.failures.empty()) {
            std::printf("[PASS] criterion %d: %s (%.2fs)\n", criterion.id, criterion.name,
                        elapsed);
        } else {
            ++failed;
            std::printf("[FAIL] criterion %d: %s (%.2fs)\n", criterion.id, criterion.name,
                        elapsed);
            for (const std::string& failure : checker.failures) {
                std::printf("       - %s\n", failure.c_str());
            }
        }
        std::fflush(stdout);
    }
    fs::remove_all(dir);
    if (failed > 0) {
        std::printf("%d of %zu criteria failed\n", failed, criteria.size());
        return 1;
    }
    std::printf("all %zu criteria passed\n", criteria.size());
    return 0;
}
