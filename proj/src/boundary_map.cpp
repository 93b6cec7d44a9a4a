#include "boxrefine/boundary_map.hpp"

#include <algorithm>
#include <string>

namespace boxrefine {

namespace {

void check_shape(int side, int classes) {
    if (side < 2) {
        throw ConfigError("map side must be >= 2, got " + std::to_string(side));
    }
    if (classes < 1) {
        throw ConfigError("class count must be >= 1, got " + std::to_string(classes));
    }
}

}  // namespace

BoundaryMap::BoundaryMap(int side, int classes, const Box& proposal)
    : side_(side),
      classes_(classes),
      proposal_(proposal),
      values_(static_cast<std::size_t>(side) * side * classes, 0.0f) {
    check_shape(side, classes);
}

BoundaryMap::BoundaryMap(int side, int classes, const Box& proposal, std::vector<float> values)
    : side_(side), classes_(classes), proposal_(proposal), values_(std::move(values)) {
    check_shape(side, classes);
    const std::size_t expected = static_cast<std::size_t>(side) * side * classes;
    if (values_.size() != expected) {
        throw ConfigError("map tensor has " + std::to_string(values_.size()) +
                          " values, expected " + std::to_string(expected));
    }
    validate();
}

void BoundaryMap::validate() const {
    for (std::size_t i = 0; i < values_.size(); ++i) {
        const float v = values_[i];
        if (!(v >= 0.0f && v <= 1.0f)) {  // also rejects NaN
            throw ValueRangeError("map value " + std::to_string(v) + " at flat index " +
                                  std::to_string(i) + " outside [0,1]");
        }
    }
}

bool BinaryVector::any() const {
    return std::any_of(bits.begin(), bits.end(), [](std::uint8_t b) { return b != 0; });
}

CompressedPair compress(const BoundaryMap& map, int class_id) {
    if (class_id < 0 || class_id >= map.classes()) {
        throw ClassOutOfRange("class_id " + std::to_string(class_id) + " outside [0, " +
                              std::to_string(map.classes()) + ")");
    }
    const int s = map.side();
    CompressedPair out;
    out.v_lr.assign(s, 0.0);
    out.v_tb.assign(s, 0.0);
    for (int row = 0; row < s; ++row) {
        for (int col = 0; col < s; ++col) {
            const double v = map.at(row, col, class_id);
            out.v_lr[col] = std::max(out.v_lr[col], v);
            out.v_tb[row] = std::max(out.v_tb[row], v);
        }
    }
    return out;
}

BinaryVector binarize(const std::vector<double>& v, double threshold) {
    if (threshold < 0.0) {
        throw ConfigError("binarize threshold must be >= 0");
    }
    BinaryVector out;
    out.source_threshold = threshold;
    out.bits.resize(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        out.bits[i] = v[i] > threshold ? 1 : 0;
    }
    return out;
}

ScoringMatrix::ScoringMatrix(int side)
    : side_(side), entries_(static_cast<std::size_t>(side) * side, 0.0) {
    if (side < 2) {
        throw ConfigError("scoring matrix side must be >= 2");
    }
    for (int col = 0; col < side; ++col) {
        entries_[static_cast<std::size_t>(col) * side + col] = 1.0;
        if (col >= 1) {
            entries_[static_cast<std::size_t>(col - 1) * side + col] = -1.0;
        }
    }
}

std::vector<double> ScoringMatrix::product(const BinaryVector& v) const {
    std::vector<double> out(side_, 0.0);
    for (int col = 0; col < side_; ++col) {
        double acc = 0.0;
        for (int row = 0; row < side_; ++row) {
            acc += static_cast<double>(v.bits[row]) * entry(row, col);
        }
        out[col] = acc;
    }
    return out;
}

std::vector<double> ScoringMatrix::product_transposed(const BinaryVector& v) const {
    std::vector<double> out(side_, 0.0);
    for (int col = 0; col < side_; ++col) {
        double acc = 0.0;
        for (int row = 0; row < side_; ++row) {
            acc += static_cast<double>(v.bits[row]) * entry(col, row);
        }
        out[col] = acc;
    }
    return out;
}

std::vector<double> relu(std::vector<double> v) {
    for (double& x : v) {
        x = std::max(x, 0.0);
    }
    return v;
}

ScoringMatrix build_scoring_matrix(int side) { return ScoringMatrix(side); }

CoarseBoundary coarse_localize(const BinaryVector& v, const ScoringMatrix& matrix) {
    CoarseBoundary out;
    if (static_cast<int>(v.size()) != matrix.side()) {
        throw ConfigError("binary vector length " + std::to_string(v.size()) +
                          " does not match scoring matrix side " + std::to_string(matrix.side()));
    }
    const std::vector<double> forward = relu(matrix.product(v));
    const std::vector<double> backward = relu(matrix.product_transposed(v));

    int first = -1;
    for (int i = 0; i < matrix.side(); ++i) {
        if (forward[i] > 0.0) {
            first = i;
            break;
        }
    }
    if (first < 0) {
        return out;  // all zeros: found stays false
    }
    int last = first;
    for (int i = matrix.side() - 1; i >= 0; --i) {
        if (backward[i] > 0.0) {
            last = i;
            break;
        }
    }
    out.i_first = first;
    out.i_last = last;
    out.found = true;
    return out;
}

}  // namespace boxrefine
