#pragma once

#include <cstdint>
#include <vector>

#include "boxrefine/errors.hpp"
#include "boxrefine/geometry.hpp"

namespace boxrefine {

// Per-class boundary probability tensor over a proposal region.
// Values are stored row-major as (row, column, class) float32, matching the
// on-disk blob layout. Immutable after construction.
class BoundaryMap {
public:
    BoundaryMap(int side, int classes, const Box& proposal);  // zero-filled
    BoundaryMap(int side, int classes, const Box& proposal, std::vector<float> values);

    int side() const { return side_; }
    int classes() const { return classes_; }
    const Box& proposal() const { return proposal_; }
    const std::vector<float>& values() const { return values_; }

    float at(int row, int col, int class_id) const {
        return values_[index(row, col, class_id)];
    }

    std::size_t index(int row, int col, int class_id) const {
        return (static_cast<std::size_t>(row) * side_ + col) * classes_ + class_id;
    }

private:
    void validate() const;

    int side_;
    int classes_;
    Box proposal_;
    std::vector<float> values_;
};

// Row/column max compression of one class channel.
// v_lr[j] is the maximum of column j (drives the left/right edges),
// v_tb[i] the maximum of row i (drives top/bottom).
struct CompressedPair {
    std::vector<double> v_lr;
    std::vector<double> v_tb;
};

struct BinaryVector {
    std::vector<std::uint8_t> bits;
    double source_threshold = 1e-4;

    std::size_t size() const { return bits.size(); }
    bool any() const;
};

// Fixed scoring matrix: column i holds the forward-difference detector
// (entries[i][i] = 1, entries[i-1][i] = -1), so for a row vector v,
// (v * M)[i] = v[i] - v[i-1]. The transposed product gives the mirrored
// difference used for the high-coordinate boundary.
class ScoringMatrix {
public:
    explicit ScoringMatrix(int side);

    int side() const { return side_; }
    double entry(int row, int col) const { return entries_[static_cast<std::size_t>(row) * side_ + col]; }
    const std::vector<double>& entries() const { return entries_; }

    // v * M and v * M^T, as dense products.
    std::vector<double> product(const BinaryVector& v) const;
    std::vector<double> product_transposed(const BinaryVector& v) const;

private:
    int side_;
    std::vector<double> entries_;
};

// Coarse boundary indices: first and last positive elements of the
// binarized vector. found is false when the vector is all zeros.
struct CoarseBoundary {
    int i_first = 0;
    int i_last = 0;
    bool found = false;
};

CompressedPair compress(const BoundaryMap& map, int class_id);

BinaryVector binarize(const std::vector<double>& v, double threshold);

ScoringMatrix build_scoring_matrix(int side);

// Matrix pathway: i_first is the index of the first positive entry of
// ReLU(v * M), i_last the last positive entry of ReLU(v * M^T). Both equal
// the plain first/last positive index of v for every binary vector.
CoarseBoundary coarse_localize(const BinaryVector& v, const ScoringMatrix& matrix);

std::vector<double> relu(std::vector<double> v);

}  // namespace boxrefine
