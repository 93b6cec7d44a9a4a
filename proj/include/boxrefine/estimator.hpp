#pragma once

#include <functional>
#include <string>
#include <string_view>

#include "boxrefine/errors.hpp"

namespace boxrefine {

// Gate parameters for boundary-distribution functions f:[0,1]->[0,1].
// f must pass through (0,0) and (1,1), be strictly increasing across the
// probe grid, and keep its derivative estimate under slope_cap everywhere
// (this is what rules out sqrt-like blowup at 0).
struct EstimatorGate {
    int grid_points = 1024;
    double endpoint_tolerance = 1e-12;
    double slope_cap = 100.0;
    double slope_probe_step = 1e-8;
};

struct EstimatorValidation {
    bool ok = true;
    std::string reason;      // first violated rule, empty when ok
    double grid_point = 0.0; // where it was violated
};

EstimatorValidation validate(const std::function<double(double)>& f,
                             const EstimatorGate& gate = EstimatorGate{});

// A named boundary-distribution function. Construction enforces the gate,
// so every live EstimatorFn satisfies the invariants.
class EstimatorFn {
public:
    // name in {linear, exponential, logarithmic}:
    //   linear       f(x) = x
    //   exponential  f(x) = x^2
    //   logarithmic  f(x) = ln((e-1)x + 1)
    static EstimatorFn builtin(std::string_view name);

    // User-supplied function; throws InvalidEstimator when the gate fails.
    static EstimatorFn custom(std::string name, std::function<double(double)> f,
                              const EstimatorGate& gate = EstimatorGate{});

    double operator()(double x) const { return f_(x); }
    const std::string& name() const { return name_; }

private:
    EstimatorFn(std::string name, std::function<double(double)> f)
        : name_(std::move(name)), f_(std::move(f)) {}

    std::string name_;
    std::function<double(double)> f_;
};

enum class Side { low, high };

// Sub-pixel edge inside one coarse map pixel [coarse_index, coarse_index+1].
struct FineEdge {
    double position = 0.0;  // map-pixel coordinates
    int coarse_index = 0;
    Side side = Side::low;
};

// Decodes the probability x at the coarse boundary pixel into a sub-pixel
// edge, under the area-coverage model (x = object-covered fraction of the
// pixel). x <= fine_threshold means no inward evidence: the edge snaps to
// the empty face of the pixel.
FineEdge fine_decode(int coarse_index, Side side, double x, const EstimatorFn& f,
                     double fine_threshold = 0.0);

}  // namespace boxrefine
