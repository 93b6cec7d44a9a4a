#include "boxrefine/io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace boxrefine {

namespace {

using nlohmann::json;

std::filesystem::path manifest_path(const std::filesystem::path& stem) {
    std::filesystem::path p = stem;
    if (p.extension() == ".json") {
        return p;
    }
    p += ".json";
    return p;
}

std::filesystem::path blob_path(const std::filesystem::path& stem) {
    std::filesystem::path p = stem;
    if (p.extension() == ".json") {
        p.replace_extension();
    }
    p += ".maps";
    return p;
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open '" + path.string() + "' for writing");
    }
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw IoError("short write to '" + path.string() + "'");
    }
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open '" + path.string() + "' for reading");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return std::move(buf).str();
}

// float32 little-endian, independent of host endianness
void append_float_le(std::string& out, float v) {
    const auto bits = std::bit_cast<std::uint32_t>(v);
    out.push_back(static_cast<char>(bits & 0xFF));
    out.push_back(static_cast<char>((bits >> 8) & 0xFF));
    out.push_back(static_cast<char>((bits >> 16) & 0xFF));
    out.push_back(static_cast<char>((bits >> 24) & 0xFF));
}

float read_float_le(const std::string& blob, std::size_t offset) {
    std::uint32_t bits = 0;
    for (int i = 3; i >= 0; --i) {
        bits = (bits << 8) | static_cast<std::uint8_t>(blob[offset + i]);
    }
    return std::bit_cast<float>(bits);
}

json box_to_json(const Box& box) {
    return json{{"l", box.l()}, {"r", box.r()}, {"t", box.t()}, {"b", box.b()}};
}

Box box_from_json(const json& j, const std::string& where) {
    try {
        return Box(j.at("l").get<double>(), j.at("r").get<double>(), j.at("t").get<double>(),
                   j.at("b").get<double>());
    } catch (const DegenerateBox& e) {
        throw FormatError(where + ": " + e.what());
    } catch (const json::exception& e) {
        throw FormatError(where + ": " + e.what());
    }
}

double parse_double(const std::string& token, const std::string& where) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
    if (ec != std::errc{} || ptr != token.data() + token.size()) {
        throw FormatError(where + ": cannot parse '" + token + "' as a number");
    }
    return v;
}

long parse_long(const std::string& token, const std::string& where) {
    long v = 0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
    if (ec != std::errc{} || ptr != token.data() + token.size()) {
        throw FormatError(where + ": cannot parse '" + token + "' as an integer");
    }
    return v;
}

}  // namespace

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_bundle(const std::vector<Detection>& detections, const BundleExtent& extent,
                  const std::filesystem::path& stem) {
    int side = 0, classes = 0;
    if (!detections.empty()) {
        side = detections.front().map.side();
        classes = detections.front().map.classes();
    }
    json manifest;
    manifest["version"] = kBundleVersion;
    manifest["S"] = side;
    manifest["cls"] = classes;
    manifest["image_extent"] = json{{"width", extent.width}, {"height", extent.height}};
    manifest["detections"] = json::array();

    std::string blob;
    blob.reserve(detections.size() * static_cast<std::size_t>(side) * side * classes * 4);
    std::size_t offset = 0;
    for (const Detection& d : detections) {
        if (d.map.side() != side || d.map.classes() != classes) {
            throw MixedShapes("bundle requires uniform map shapes; got " +
                              std::to_string(d.map.side()) + "x" + std::to_string(d.map.side()) +
                              "x" + std::to_string(d.map.classes()) + " after " +
                              std::to_string(side) + "x" + std::to_string(side) + "x" +
                              std::to_string(classes));
        }
        manifest["detections"].push_back(json{{"proposal", box_to_json(d.proposal)},
                                              {"class_id", d.class_id},
                                              {"score", d.score},
                                              {"map_offset", offset}});
        for (float v : d.map.values()) {
            append_float_le(blob, v);
        }
        offset += d.map.values().size() * 4;
    }

    write_file(manifest_path(stem), manifest.dump(2) + "\n");
    write_file(blob_path(stem), blob);
}

LoadedBundle read_bundle(const std::filesystem::path& stem) {
    const std::filesystem::path mpath = manifest_path(stem);
    json manifest;
    try {
        manifest = json::parse(read_file(mpath));
    } catch (const json::exception& e) {
        throw FormatError("manifest '" + mpath.string() + "': " + e.what());
    }

    LoadedBundle out;
    try {
        const int version = manifest.at("version").get<int>();
        if (version != kBundleVersion) {
            throw VersionMismatch("bundle version " + std::to_string(version) +
                                  " unsupported (expected " + std::to_string(kBundleVersion) +
                                  ")");
        }
        const int side = manifest.at("S").get<int>();
        const int classes = manifest.at("cls").get<int>();
        out.extent.width = manifest.at("image_extent").at("width").get<double>();
        out.extent.height = manifest.at("image_extent").at("height").get<double>();
        const json& records = manifest.at("detections");
        if (!records.empty() && (side < 2 || classes < 1)) {
            throw FormatError("manifest declares S=" + std::to_string(side) + ", cls=" +
                              std::to_string(classes) + " for a non-empty bundle");
        }

        const std::string blob = read_file(blob_path(stem));
        const std::size_t unit = static_cast<std::size_t>(side) * side * classes * 4;
        const std::size_t expected = unit * records.size();
        if (blob.size() != expected) {
            throw FormatError("blob '" + blob_path(stem).string() + "' has " +
                              std::to_string(blob.size()) + " bytes, expected " +
                              std::to_string(expected));
        }

        std::size_t previous_offset = 0;
        for (std::size_t i = 0; i < records.size(); ++i) {
            const json& rec = records[i];
            const std::string where = "detection " + std::to_string(i);
            const std::size_t offset = rec.at("map_offset").get<std::size_t>();
            if (i > 0 && offset <= previous_offset) {
                throw FormatError(where + ": map_offset " + std::to_string(offset) +
                                  " not strictly increasing");
            }
            previous_offset = offset;
            if (offset + unit > blob.size()) {
                throw FormatError(where + ": map at offset " + std::to_string(offset) +
                                  " overruns blob of " + std::to_string(blob.size()) + " bytes");
            }
            const int class_id = rec.at("class_id").get<int>();
            if (class_id < 0 || class_id >= classes) {
                throw FormatError(where + ": class_id " + std::to_string(class_id) +
                                  " outside [0, " + std::to_string(classes) + ")");
            }
            const double score = rec.at("score").get<double>();
            if (!(score >= 0.0 && score <= 1.0)) {
                throw FormatError(where + ": score " + std::to_string(score) +
                                  " outside [0,1]");
            }
            const Box proposal = box_from_json(rec.at("proposal"), where);

            std::vector<float> values(unit / 4);
            for (std::size_t k = 0; k < values.size(); ++k) {
                float v = read_float_le(blob, offset + 4 * k);
                if (v < 0.0f) {
                    if (v < -1e-6f) {
                        throw ValueRangeError(where + ": map value " + std::to_string(v) +
                                              " at element " + std::to_string(k) +
                                              " (byte offset " + std::to_string(offset + 4 * k) +
                                              ") outside [0,1]");
                    }
                    v = 0.0f;
                    ++out.clamped_values;
                } else if (v > 1.0f || std::isnan(v)) {
                    if (!(v <= 1.0f + 1e-6f)) {
                        throw ValueRangeError(where + ": map value " + std::to_string(v) +
                                              " at element " + std::to_string(k) +
                                              " (byte offset " + std::to_string(offset + 4 * k) +
                                              ") outside [0,1]");
                    }
                    v = 1.0f;
                    ++out.clamped_values;
                }
                values[k] = v;
            }
            out.detections.push_back(Detection{
                proposal, class_id, score,
                BoundaryMap(side, classes, proposal, std::move(values))});
        }
    } catch (const json::exception& e) {
        throw FormatError("manifest '" + mpath.string() + "': " + e.what());
    }
    return out;
}

void write_boxes_file(const std::vector<BoxRecord>& records, const std::filesystem::path& path) {
    std::string out = "# boxes v1: index class_id score l r t b fallback\n";
    for (const BoxRecord& rec : records) {
        out += std::to_string(rec.index) + " " + std::to_string(rec.class_id) + " " +
               format_double(rec.score) + " " + format_double(rec.box.l()) + " " +
               format_double(rec.box.r()) + " " + format_double(rec.box.t()) + " " +
               format_double(rec.box.b()) + " " + (rec.fallback ? "1" : "0") + "\n";
    }
    write_file(path, out);
}

std::vector<BoxRecord> read_boxes_file(const std::filesystem::path& path) {
    std::istringstream in(read_file(path));
    std::vector<BoxRecord> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') {
            continue;
        }
        std::istringstream fields(line);
        std::string idx, cls, score, l, r, t, b, fb;
        if (!(fields >> idx >> cls >> score >> l >> r >> t >> b >> fb)) {
            throw FormatError(path.string() + ":" + std::to_string(line_no) +
                              ": expected 8 fields");
        }
        const std::string where = path.string() + ":" + std::to_string(line_no);
        BoxRecord rec{static_cast<int>(parse_long(idx, where)),
                      static_cast<int>(parse_long(cls, where)),
                      parse_double(score, where),
                      Box(parse_double(l, where), parse_double(r, where), parse_double(t, where),
                          parse_double(b, where)),
                      parse_long(fb, where) != 0};
        out.push_back(rec);
    }
    return out;
}

void write_truth_file(const Corpus& corpus, const std::filesystem::path& path) {
    TruthFile tf;
    if (!corpus.scenes.empty()) {
        tf.extent = {corpus.scenes.front().extent_w, corpus.scenes.front().extent_h};
    }
    for (std::size_t scene = 0; scene < corpus.scenes.size(); ++scene) {
        const SceneTruth& st = corpus.scenes[scene];
        for (std::size_t k = 0; k < st.truth_boxes.size(); ++k) {
            tf.records.push_back(
                {static_cast<int>(scene), st.class_ids[k], st.truth_boxes[k]});
        }
    }
    write_truth_file(tf, path);
}

void write_truth_file(const TruthFile& truth, const std::filesystem::path& path) {
    std::string out = "# truth v1\n";
    out += "extent " + format_double(truth.extent.width) + " " +
           format_double(truth.extent.height) + "\n";
    for (const TruthRecord& rec : truth.records) {
        out += "truth " + std::to_string(rec.scene_id) + " " + std::to_string(rec.class_id) +
               " " + format_double(rec.box.l()) + " " + format_double(rec.box.r()) + " " +
               format_double(rec.box.t()) + " " + format_double(rec.box.b()) + "\n";
    }
    write_file(path, out);
}

TruthFile read_truth_file(const std::filesystem::path& path) {
    std::istringstream in(read_file(path));
    TruthFile out;
    std::string line;
    std::size_t line_no = 0;
    bool saw_extent = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') {
            continue;
        }
        const std::string where = path.string() + ":" + std::to_string(line_no);
        std::istringstream fields(line);
        std::string tag;
        fields >> tag;
        if (tag == "extent") {
            std::string w, h;
            if (!(fields >> w >> h)) {
                throw FormatError(where + ": extent needs width and height");
            }
            out.extent = {parse_double(w, where), parse_double(h, where)};
            saw_extent = true;
        } else if (tag == "truth") {
            std::string scene, cls, l, r, t, b;
            if (!(fields >> scene >> cls >> l >> r >> t >> b)) {
                throw FormatError(where + ": truth needs scene, class and 4 edges");
            }
            out.records.push_back({static_cast<int>(parse_long(scene, where)),
                                   static_cast<int>(parse_long(cls, where)),
                                   Box(parse_double(l, where), parse_double(r, where),
                                       parse_double(t, where), parse_double(b, where))});
        } else {
            throw FormatError(where + ": unknown record '" + tag + "'");
        }
    }
    if (!saw_extent) {
        throw FormatError(path.string() + ": missing extent record");
    }
    return out;
}

void write_report(const std::vector<std::pair<std::string, std::string>>& rows,
                  const std::filesystem::path& path) {
    std::string out;
    for (const auto& [key, value] : rows) {
        out += key + " " + value + "\n";
    }
    write_file(path, out);
}

CorpusConfig parse_corpus_config(const std::filesystem::path& path) {
    std::istringstream in(read_file(path));
    CorpusConfig cfg;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') {
            continue;
        }
        std::istringstream fields(line);
        std::string key, value;
        if (!(fields >> key >> value)) {
            throw ConfigError(path.string() + ":" + std::to_string(line_no) +
                              ": expected 'key value'");
        }
        const std::string where = path.string() + ":" + std::to_string(line_no);
        try {
            if (key == "n_scenes") {
                cfg.n_scenes = static_cast<int>(parse_long(value, where));
            } else if (key == "boxes_per_scene") {
                cfg.boxes_per_scene = static_cast<int>(parse_long(value, where));
            } else if (key == "S") {
                cfg.side = static_cast<int>(parse_long(value, where));
            } else if (key == "cls") {
                cfg.classes = static_cast<int>(parse_long(value, where));
            } else if (key == "profile") {
                cfg.profile = value;
            } else if (key == "noise_sigma") {
                cfg.noise_sigma = parse_double(value, where);
            } else if (key == "jitter") {
                cfg.jitter = parse_double(value, where);
            } else if (key == "expand") {
                cfg.expand = parse_double(value, where);
            } else if (key == "seed") {
                cfg.seed = static_cast<std::uint64_t>(parse_long(value, where));
            } else if (key == "extent_w") {
                cfg.extent_w = parse_double(value, where);
            } else if (key == "extent_h") {
                cfg.extent_h = parse_double(value, where);
            } else if (key == "box_min") {
                cfg.box_min = parse_double(value, where);
            } else if (key == "box_max") {
                cfg.box_max = parse_double(value, where);
            } else if (key == "score_min") {
                cfg.score_min = parse_double(value, where);
            } else if (key == "distractors") {
                cfg.distractors = static_cast<int>(parse_long(value, where));
            } else {
                throw ConfigError(where + ": unknown key '" + key + "'");
            }
        } catch (const FormatError& e) {
            throw ConfigError(e.what());
        }
    }
    cfg.validate();
    return cfg;
}

void RunConfig::validate() const {
    if (binarize_threshold < 0.0 || fine_threshold < 0.0) {
        throw ConfigError("thresholds must be >= 0");
    }
    if (side < 2 || classes < 1) {
        throw ConfigError("side must be >= 2 and classes >= 1");
    }
    if (parallelism < 1) {
        throw ConfigError("parallelism must be >= 1");
    }
    EstimatorFn::builtin(estimator);  // throws UnknownEstimator on bad names
}

}  // namespace boxrefine
