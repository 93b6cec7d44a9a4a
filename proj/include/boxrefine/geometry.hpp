#pragma once

#include <string>

#include "boxrefine/errors.hpp"

namespace boxrefine {

// Axis-aligned rectangle in image coordinates, stored edge-wise.
// y grows downward, so t < b. Area uses closed-open extents: boxes that
// merely touch have zero intersection.
class Box {
public:
    Box(double l, double r, double t, double b);

    double l() const { return l_; }
    double r() const { return r_; }
    double t() const { return t_; }
    double b() const { return b_; }

    double width() const { return r_ - l_; }
    double height() const { return b_ - t_; }
    double area() const { return width() * height(); }

    bool operator==(const Box& other) const = default;

private:
    double l_, r_, t_, b_;
};

// Same rectangle expressed as center plus extents.
struct CenterSizeBox {
    double x, y, w, h;
};

enum class Edge { left, right, top, bottom };

CenterSizeBox edges_to_center_size(const Box& box);
Box center_size_to_edges(const CenterSizeBox& cs);

// Replaces exactly one edge; the other three coordinates are bit-identical
// to the input. Throws DegenerateBox if the result would violate l<r / t<b.
Box set_edge(const Box& box, Edge which, double value);

// Intersection over union in [0,1]; 0 for disjoint or touching boxes.
double iou(const Box& a, const Box& b);

std::string to_string(const Box& box);

}  // namespace boxrefine
