#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "boxrefine/eval.hpp"
#include "boxrefine/refine.hpp"
#include "boxrefine/synth.hpp"

namespace boxrefine {

// DetectionBundle on-disk format, version 1. A bundle <stem> is two files:
//
//   <stem>.json   manifest: version, S, cls, image extent, and one record
//                 per detection (proposal, class_id, score, map_offset).
//   <stem>.maps   blob: the S*S*cls map tensors as raw 32-bit little-endian
//                 IEEE-754 floats, row-major (row, column, class),
//                 concatenated in detection order at the stated offsets.
//
// Offsets are byte offsets into the blob and must be strictly increasing;
// the blob length must equal the sum of the per-detection tensor sizes.
// Values must lie in [0,1]; values within 1e-6 outside are clamped and
// counted, anything further out is a ValueRangeError.
inline constexpr int kBundleVersion = 1;

struct BundleExtent {
    double width = 640.0;
    double height = 640.0;
};

struct LoadedBundle {
    std::vector<Detection> detections;
    BundleExtent extent;
    std::size_t clamped_values = 0;  // values nudged back into [0,1] on load
};

void write_bundle(const std::vector<Detection>& detections, const BundleExtent& extent,
                  const std::filesystem::path& stem);
LoadedBundle read_bundle(const std::filesystem::path& stem);

// Line-oriented boxes file (refine output / eval prediction input):
//   detection-index class_id score l r t b fallback-flag
// '#' starts a comment line. Floating-point fields are written with 17
// significant digits so a read-back is value-exact.
struct BoxRecord {
    int index = 0;
    int class_id = 0;
    double score = 1.0;
    Box box;
    bool fallback = false;
};

void write_boxes_file(const std::vector<BoxRecord>& records, const std::filesystem::path& path);
std::vector<BoxRecord> read_boxes_file(const std::filesystem::path& path);

// Truth file (synth output / eval ground-truth input):
//   extent <w> <h>
//   truth <scene_id> <class_id> <l> <r> <t> <b>
// Truth records parallel the bundle's detection order.
struct TruthRecord {
    int scene_id = 0;
    int class_id = 0;
    Box box;
};

struct TruthFile {
    BundleExtent extent;
    std::vector<TruthRecord> records;
};

void write_truth_file(const Corpus& corpus, const std::filesystem::path& path);
void write_truth_file(const TruthFile& truth, const std::filesystem::path& path);
TruthFile read_truth_file(const std::filesystem::path& path);

// Reports are flat `key value` records, one per line.
void write_report(const std::vector<std::pair<std::string, std::string>>& rows,
                  const std::filesystem::path& path);

// Key-value config file: one `key value` pair per line, '#' comments.
// Unknown keys are ConfigErrors so typos never silently disappear.
CorpusConfig parse_corpus_config(const std::filesystem::path& path);

// Runtime knobs of the refine stage.
struct RunConfig {
    std::string estimator = "linear";
    double binarize_threshold = 1e-4;
    double fine_threshold = 0.0;
    int side = 28;
    int classes = 80;
    int parallelism = 1;

    void validate() const;
};

std::string format_double(double v);  // 17 significant digits, round-trip exact

}  // namespace boxrefine
