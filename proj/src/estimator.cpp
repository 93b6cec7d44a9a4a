#include "boxrefine/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace boxrefine {

namespace {

std::string format_at(const char* what, double x) {
    std::ostringstream os;
    os << what << " at x=" << x;
    return os.str();
}

}  // namespace

EstimatorValidation validate(const std::function<double(double)>& f, const EstimatorGate& gate) {
    EstimatorValidation out;
    const int n = gate.grid_points;

    const double f0 = f(0.0);
    if (!(std::abs(f0) <= gate.endpoint_tolerance)) {
        return {false, "f(0) != 0", 0.0};
    }
    const double f1 = f(1.0);
    if (!(std::abs(f1 - 1.0) <= gate.endpoint_tolerance)) {
        return {false, "f(1) != 1", 1.0};
    }

    double prev = f0;
    for (int i = 1; i < n; ++i) {
        const double x = static_cast<double>(i) / (n - 1);
        const double y = f(x);
        if (!std::isfinite(y)) {
            return {false, format_at("non-finite value", x), x};
        }
        if (!(y > prev)) {
            return {false, format_at("not strictly increasing", x), x};
        }
        prev = y;
    }

    // Derivative estimate at each grid point with a small one-sided probe.
    // The probe step is far below the grid pitch, so a sqrt-like infinite
    // slope at an endpoint is seen even though consecutive grid differences
    // would smooth it away.
    const double h = gate.slope_probe_step;
    for (int i = 0; i < n; ++i) {
        const double x = static_cast<double>(i) / (n - 1);
        double slope;
        if (x + h <= 1.0) {
            slope = (f(x + h) - f(x)) / h;
        } else {
            slope = (f(x) - f(x - h)) / h;
        }
        if (!(slope <= gate.slope_cap)) {
            return {false, format_at("slope cap exceeded", x), x};
        }
    }
    return out;
}

EstimatorFn EstimatorFn::builtin(std::string_view name) {
    std::function<double(double)> f;
    if (name == "linear") {
        f = [](double x) { return x; };
    } else if (name == "exponential") {
        f = [](double x) { return x * x; };
    } else if (name == "logarithmic") {
        // ln((e-1)x + 1) via log1p; composes to the identity against the
        // expm1-based rendering profile.
        f = [](double x) { return std::log1p(std::expm1(1.0) * x); };
    } else {
        throw UnknownEstimator("unknown estimator '" + std::string(name) +
                               "' (expected linear, exponential or logarithmic)");
    }
    return custom(std::string(name), std::move(f));
}

EstimatorFn EstimatorFn::custom(std::string name, std::function<double(double)> f,
                                const EstimatorGate& gate) {
    const EstimatorValidation check = validate(f, gate);
    if (!check.ok) {
        throw InvalidEstimator("estimator '" + name + "' rejected: " + check.reason);
    }
    return EstimatorFn(std::move(name), std::move(f));
}

FineEdge fine_decode(int coarse_index, Side side, double x, const EstimatorFn& f,
                     double fine_threshold) {
    FineEdge out;
    out.coarse_index = coarse_index;
    out.side = side;

    double position;
    if (x <= fine_threshold) {
        // No inward evidence: snap to the empty face of the pixel.
        position = coarse_index + (side == Side::low ? 1.0 : 0.0);
    } else if (side == Side::low) {
        position = (coarse_index + 1.0) - f(x);
    } else {
        position = coarse_index + f(x);
    }
    out.position = std::clamp(position, static_cast<double>(coarse_index),
                              static_cast<double>(coarse_index) + 1.0);
    return out;
}

}  // namespace boxrefine
