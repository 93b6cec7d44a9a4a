#include "boxrefine/refine.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <thread>

namespace boxrefine {

double map_to_image(double pos, Axis axis, const Box& proposal, int side) {
    const double lo = axis == Axis::horizontal ? proposal.l() : proposal.t();
    const double hi = axis == Axis::horizontal ? proposal.r() : proposal.b();
    // lerp keeps pos=0 and pos=side exact at the proposal faces.
    return std::lerp(lo, hi, pos / side);
}

double image_to_map(double coord, Axis axis, const Box& proposal, int side) {
    const double lo = axis == Axis::horizontal ? proposal.l() : proposal.t();
    const double hi = axis == Axis::horizontal ? proposal.r() : proposal.b();
    return (coord - lo) * side / (hi - lo);
}

RefinedDetection refine_one(const Detection& d, const EstimatorFn& f,
                            const Thresholds& thresholds) {
    return refine_one(d, f, thresholds, ScoringMatrix(d.map.side()));
}

RefinedDetection refine_one(const Detection& d, const EstimatorFn& f,
                            const Thresholds& thresholds, const ScoringMatrix& matrix) {
    const int s = d.map.side();
    if (!(d.map.proposal() == d.proposal)) {
        throw ConfigError("detection proposal " + to_string(d.proposal) +
                          " differs from its map's proposal " + to_string(d.map.proposal()));
    }
    const CompressedPair compressed = compress(d.map, d.class_id);
    const BinaryVector bits_lr = binarize(compressed.v_lr, thresholds.binarize);
    const BinaryVector bits_tb = binarize(compressed.v_tb, thresholds.binarize);
    const CoarseBoundary cols = coarse_localize(bits_lr, matrix);
    const CoarseBoundary rows = coarse_localize(bits_tb, matrix);

    if (!cols.found || !rows.found) {
        return RefinedDetection{d.proposal, true, d.proposal};
    }

    const Box coarse_box(
        map_to_image(cols.i_first, Axis::horizontal, d.proposal, s),
        map_to_image(cols.i_last + 1.0, Axis::horizontal, d.proposal, s),
        map_to_image(rows.i_first, Axis::vertical, d.proposal, s),
        map_to_image(rows.i_last + 1.0, Axis::vertical, d.proposal, s));

    // x for each edge is the compressed-vector value at its coarse index.
    const FineEdge left =
        fine_decode(cols.i_first, Side::low, compressed.v_lr[cols.i_first], f, thresholds.fine);
    const FineEdge right =
        fine_decode(cols.i_last, Side::high, compressed.v_lr[cols.i_last], f, thresholds.fine);
    const FineEdge top =
        fine_decode(rows.i_first, Side::low, compressed.v_tb[rows.i_first], f, thresholds.fine);
    const FineEdge bottom =
        fine_decode(rows.i_last, Side::high, compressed.v_tb[rows.i_last], f, thresholds.fine);

    const double l = map_to_image(left.position, Axis::horizontal, d.proposal, s);
    const double r = map_to_image(right.position, Axis::horizontal, d.proposal, s);
    const double t = map_to_image(top.position, Axis::vertical, d.proposal, s);
    const double b = map_to_image(bottom.position, Axis::vertical, d.proposal, s);

    if (!(l < r) || !(t < b)) {
        // Degenerate fine box (single-pixel evidence pointing inward).
        return RefinedDetection{d.proposal, true, coarse_box};
    }
    return RefinedDetection{Box(l, r, t, b), false, coarse_box};
}

std::vector<RefinedDetection> refine_batch(std::span<const Detection> detections,
                                           const EstimatorFn& f, const Thresholds& thresholds,
                                           int parallelism, std::vector<BatchIssue>* issues) {
    const std::size_t n = detections.size();
    std::vector<std::optional<RefinedDetection>> slots(n);
    std::vector<std::vector<BatchIssue>> worker_issues;

    // One shared matrix per distinct map side; read-only afterwards.
    std::map<int, ScoringMatrix> matrices;
    for (const Detection& d : detections) {
        matrices.try_emplace(d.map.side(), d.map.side());
    }

    const auto run_range = [&](std::size_t begin, std::size_t end,
                               std::vector<BatchIssue>& sink) {
        for (std::size_t i = begin; i < end; ++i) {
            const Detection& d = detections[i];
            try {
                slots[i] = refine_one(d, f, thresholds, matrices.at(d.map.side()));
            } catch (const std::exception& e) {
                slots[i] = RefinedDetection{d.proposal, true, d.proposal};
                sink.push_back({i, e.what()});
            }
        }
    };

    const int workers = std::clamp<int>(parallelism, 1, n == 0 ? 1 : static_cast<int>(n));
    worker_issues.resize(workers);
    if (workers <= 1) {
        run_range(0, n, worker_issues[0]);
    } else {
        std::vector<std::thread> threads;
        threads.reserve(workers);
        const std::size_t chunk = (n + workers - 1) / workers;
        for (int w = 0; w < workers; ++w) {
            const std::size_t begin = std::min(n, w * chunk);
            const std::size_t end = std::min(n, begin + chunk);
            threads.emplace_back(run_range, begin, end, std::ref(worker_issues[w]));
        }
        for (std::thread& th : threads) {
            th.join();
        }
    }

    if (issues != nullptr) {
        for (const auto& sink : worker_issues) {  // chunks are ascending, so index order holds
            issues->insert(issues->end(), sink.begin(), sink.end());
        }
    }
    std::vector<RefinedDetection> out;
    out.reserve(n);
    for (auto& slot : slots) {
        out.push_back(std::move(*slot));
    }
    return out;
}

}  // namespace boxrefine
