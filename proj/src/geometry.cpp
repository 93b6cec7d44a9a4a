#include "boxrefine/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace boxrefine {

Box::Box(double l, double r, double t, double b) : l_(l), r_(r), t_(t), b_(b) {
    if (!(std::isfinite(l) && std::isfinite(r) && std::isfinite(t) && std::isfinite(b))) {
        throw DegenerateBox("box coordinates must be finite: " + to_string(*this));
    }
    if (!(l < r) || !(t < b)) {
        throw DegenerateBox("box requires l < r and t < b: " + to_string(*this));
    }
}

CenterSizeBox edges_to_center_size(const Box& box) {
    return CenterSizeBox{(box.l() + box.r()) / 2.0, (box.t() + box.b()) / 2.0,
                         box.r() - box.l(), box.b() - box.t()};
}

Box center_size_to_edges(const CenterSizeBox& cs) {
    return Box(cs.x - cs.w / 2.0, cs.x + cs.w / 2.0, cs.y - cs.h / 2.0, cs.y + cs.h / 2.0);
}

Box set_edge(const Box& box, Edge which, double value) {
    switch (which) {
        case Edge::left:
            return Box(value, box.r(), box.t(), box.b());
        case Edge::right:
            return Box(box.l(), value, box.t(), box.b());
        case Edge::top:
            return Box(box.l(), box.r(), value, box.b());
        case Edge::bottom:
            return Box(box.l(), box.r(), box.t(), value);
    }
    throw DegenerateBox("unknown edge id");
}

double iou(const Box& a, const Box& b) {
    const double iw = std::min(a.r(), b.r()) - std::max(a.l(), b.l());
    const double ih = std::min(a.b(), b.b()) - std::max(a.t(), b.t());
    if (iw <= 0.0 || ih <= 0.0) {
        return 0.0;
    }
    const double inter = iw * ih;
    return inter / (a.area() + b.area() - inter);
}

std::string to_string(const Box& box) {
    std::ostringstream os;
    os << "(l=" << box.l() << ", r=" << box.r() << ", t=" << box.t() << ", b=" << box.b() << ")";
    return os.str();
}

}  // namespace boxrefine
