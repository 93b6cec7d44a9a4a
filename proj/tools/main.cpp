#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "boxrefine/eval.hpp"
#include "boxrefine/io.hpp"
#include "boxrefine/refine.hpp"
#include "boxrefine/synth.hpp"

namespace {

using namespace boxrefine;

// Pairs each prediction with its scene through the index-aligned truth
// records (refinement is order preserving, so record i describes box i).
struct EvalInputs {
    std::vector<Prediction> predictions;
    std::vector<GroundTruth> truths;
    BundleExtent extent;
    std::size_t fallback_count = 0;
};

EvalInputs load_eval_inputs(const std::filesystem::path& pred_path,
                            const std::filesystem::path& truth_path) {
    const std::vector<BoxRecord> boxes = read_boxes_file(pred_path);
    const TruthFile truth = read_truth_file(truth_path);
    EvalInputs out;
    out.extent = truth.extent;
    for (const BoxRecord& rec : boxes) {
        if (rec.index < 0 || rec.index >= static_cast<int>(truth.records.size())) {
            throw FormatError(pred_path.string() + ": detection index " +
                              std::to_string(rec.index) + " has no truth record (truth file has " +
                              std::to_string(truth.records.size()) + ")");
        }
        const TruthRecord& t = truth.records[rec.index];
        out.predictions.push_back({rec.box, rec.class_id, rec.score, t.scene_id});
        if (rec.fallback) {
            ++out.fallback_count;
        }
    }
    for (const TruthRecord& t : truth.records) {
        out.truths.push_back({t.box, t.class_id, t.scene_id});
    }
    return out;
}

std::vector<std::pair<std::string, std::string>> report_rows(const ApReport& report,
                                                             const EdgeErrorStats& stats,
                                                             std::size_t n_pred,
                                                             std::size_t n_truth,
                                                             std::size_t n_fallback) {
    return {
        {"n_predictions", std::to_string(n_pred)},
        {"n_truths", std::to_string(n_truth)},
        {"n_fallback", std::to_string(n_fallback)},
        {"ap", format_double(report.ap)},
        {"ap50", format_double(report.ap50)},
        {"ap75", format_double(report.ap75)},
        {"ap_s", format_double(report.ap_s)},
        {"ap_m", format_double(report.ap_m)},
        {"ap_l", format_double(report.ap_l)},
        {"edge_mae_px", format_double(report.edge_mae)},
        {"edge_median_px", format_double(stats.median)},
        {"edge_p95_px", format_double(stats.p95)},
        {"edge_pairs", std::to_string(stats.pair_count)},
    };
}

// tables carry AP x100, COCO style; the key-value reports keep fractions
void print_ap_table(const ApReport& report, const EdgeErrorStats& stats) {
    std::printf("%-8s %-8s %-8s %-8s %-8s %-8s %-12s\n", "AP", "AP50", "AP75", "APs", "APm",
                "APl", "edge MAE px");
    std::printf("%-8.2f %-8.2f %-8.2f %-8.2f %-8.2f %-8.2f %-12.6f\n", 100 * report.ap,
                100 * report.ap50, 100 * report.ap75, 100 * report.ap_s, 100 * report.ap_m,
                100 * report.ap_l, report.edge_mae);
    std::printf("edge error px: mean %.6f  median %.6f  p95 %.6f  (%zu matched pairs)\n",
                stats.mean, stats.median, stats.p95, stats.pair_count);
}

int run_synth(const std::string& config_path, const std::string& out_stem,
              const std::string& truth_path) {
    const CorpusConfig config = parse_corpus_config(config_path);
    const Corpus corpus = generate_corpus(config);
    write_bundle(corpus.detections, BundleExtent{config.extent_w, config.extent_h}, out_stem);
    write_truth_file(corpus, truth_path);
    std::printf("wrote %zu detections over %zu scenes to %s(.json/.maps), truth to %s\n",
                corpus.detections.size(), corpus.scenes.size(), out_stem.c_str(),
                truth_path.c_str());
    return 0;
}

int run_refine(const std::string& in_stem, const std::string& out_path, const RunConfig& run) {
    run.validate();
    const LoadedBundle bundle = read_bundle(in_stem);
    if (bundle.clamped_values > 0) {
        std::fprintf(stderr, "warning: clamped %zu map values into [0,1]\n",
                     bundle.clamped_values);
    }
    const EstimatorFn estimator = EstimatorFn::builtin(run.estimator);
    const Thresholds thresholds{run.binarize_threshold, run.fine_threshold};
    std::vector<BatchIssue> issues;
    const std::vector<RefinedDetection> refined =
        refine_batch(bundle.detections, estimator, thresholds, run.parallelism, &issues);
    for (const BatchIssue& issue : issues) {
        std::fprintf(stderr, "warning: detection %zu fell back: %s\n", issue.index,
                     issue.message.c_str());
    }
    std::vector<BoxRecord> records;
    records.reserve(refined.size());
    for (std::size_t i = 0; i < refined.size(); ++i) {
        records.push_back({static_cast<int>(i), bundle.detections[i].class_id,
                           bundle.detections[i].score, refined[i].box, refined[i].fallback});
    }
    write_boxes_file(records, out_path);
    return 0;
}

int run_eval(const std::string& pred_path, const std::string& truth_path,
             const std::string& report_path, int max_det) {
    const EvalInputs inputs = load_eval_inputs(pred_path, truth_path);
    ApParams params;
    params.max_detections = max_det;
    params.extent_w = inputs.extent.width;
    const ApReport report = average_precision(inputs.predictions, inputs.truths, params);
    const MatchResult matching = match(inputs.predictions, inputs.truths, 0.5);
    const EdgeErrorStats stats = edge_error(inputs.predictions, inputs.truths, matching);
    print_ap_table(report, stats);
    if (!report_path.empty()) {
        write_report(report_rows(report, stats, inputs.predictions.size(), inputs.truths.size(),
                                 inputs.fallback_count),
                     report_path);
    }
    return 0;
}

// Renders one corpus per profile, refines it with each estimator, and
// reports AP and edge MAE for every combination: the matched estimator
// should carry the lowest edge MAE of its column.
int run_compare(const std::string& config_path, const std::string& report_path) {
    static const char* kProfiles[] = {"coverage", "sqrt", "exp-transition"};
    static const char* kEstimators[] = {"linear", "exponential", "logarithmic"};

    CorpusConfig config = parse_corpus_config(config_path);
    std::vector<std::pair<std::string, std::string>> rows;
    std::printf("%-16s %-13s %-10s %-12s\n", "profile", "estimator", "AP", "edge_mae_px");
    for (const char* profile : kProfiles) {
        config.profile = profile;
        const Corpus corpus = generate_corpus(config);
        std::vector<GroundTruth> truths;
        for (std::size_t scene = 0; scene < corpus.scenes.size(); ++scene) {
            const SceneTruth& st = corpus.scenes[scene];
            for (std::size_t k = 0; k < st.truth_boxes.size(); ++k) {
                truths.push_back({st.truth_boxes[k], st.class_ids[k], static_cast<int>(scene)});
            }
        }
        for (const char* estimator_name : kEstimators) {
            const EstimatorFn estimator = EstimatorFn::builtin(estimator_name);
            const std::vector<RefinedDetection> refined =
                refine_batch(corpus.detections, estimator);
            std::vector<Prediction> predictions;
            for (std::size_t i = 0; i < refined.size(); ++i) {
                predictions.push_back({refined[i].box, corpus.detections[i].class_id,
                                       corpus.detections[i].score, truths[i].scene_id});
            }
            ApParams params;
            params.extent_w = config.extent_w;
            const ApReport report = average_precision(predictions, truths, params);
            std::printf("%-16s %-13s %-10.2f %-12.6f\n", profile, estimator_name,
                        100 * report.ap, report.edge_mae);
            const std::string key = std::string(profile) + "." + estimator_name;
            rows.emplace_back(key + ".ap", format_double(report.ap));
            rows.emplace_back(key + ".edge_mae_px", format_double(report.edge_mae));
        }
    }
    if (!report_path.empty()) {
        write_report(rows, report_path);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"boxrefine: sub-pixel bounding-box refinement from boundary probability maps"};
    app.require_subcommand(1);

    std::string config_path, out_stem, truth_path;
    auto* synth = app.add_subcommand("synth", "generate a synthetic detection corpus");
    synth->add_option("--config", config_path, "corpus config file")->required();
    synth->add_option("--out", out_stem, "output bundle stem (.json/.maps)")->required();
    synth->add_option("--truth", truth_path, "output truth file")->required();

    std::string in_stem, boxes_path;
    RunConfig run;
    auto* refine = app.add_subcommand("refine", "refine a detection bundle");
    refine->add_option("--in", in_stem, "input bundle stem")->required();
    refine->add_option("--out", boxes_path, "output boxes file")->required();
    refine->add_option("--estimator", run.estimator,
                       "boundary distribution function: linear|exponential|logarithmic");
    refine->add_option("--binarize-threshold", run.binarize_threshold,
                       "coarse binarization threshold");
    refine->add_option("--fine-threshold", run.fine_threshold, "fine decode snap threshold");
    refine->add_option("--parallelism", run.parallelism, "worker thread hint (results identical)");

    std::string pred_path, report_path;
    int max_det = 100;
    auto* eval = app.add_subcommand("eval", "score predictions against ground truth");
    eval->add_option("--pred", pred_path, "boxes file from refine")->required();
    eval->add_option("--truth", truth_path, "truth file from synth")->required();
    eval->add_option("--report", report_path, "key-value report output");
    eval->add_option("--max-det", max_det, "per scene+class detection cap");

    auto* compare = app.add_subcommand("compare-estimators",
                                       "AP / edge-MAE grid over profiles x estimators");
    compare->add_option("--config", config_path, "corpus config file")->required();
    compare->add_option("--report", report_path, "key-value report output");

    try {
        app.parse(argc, argv);
        if (synth->parsed()) {
            return run_synth(config_path, out_stem, truth_path);
        }
        if (refine->parsed()) {
            return run_refine(in_stem, boxes_path, run);
        }
        if (eval->parsed()) {
            return run_eval(pred_path, truth_path, report_path, max_det);
        }
        if (compare->parsed()) {
            return run_compare(config_path, report_path);
        }
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            return app.exit(e);  // --help
        }
        std::fprintf(stderr, "error: UsageError: %s\n", e.what());
        return 2;
    } catch (const boxrefine::UnknownEstimator& e) {
        std::fprintf(stderr, "error: UsageError: %s\n", e.what());
        return 2;
    } catch (const boxrefine::Error& e) {
        std::fprintf(stderr, "error: %s: %s\n", e.error_class().c_str(), e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: InternalError: %s\n", e.what());
        return 1;
    }
    return 0;
}
