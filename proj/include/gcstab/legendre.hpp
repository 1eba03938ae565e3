#pragma once

#include <vector>

namespace gcstab {

/// Tensor-product sample grid; flattened index runs with the last axis fastest.
struct SampleGrid {
    std::vector<std::vector<double>> axes;
    std::size_t size() const;
    std::vector<double> point(std::size_t index) const;
};

/// Discrete transform g(y) = max over grid points x of (x·y − f(x)), computed
/// one axis at a time. Errors: kenergy.NotConvexSamples.
std::vector<double> legendre_transform(const SampleGrid& from, const std::vector<double>& f, const SampleGrid& to);

struct LegendreRoundTrip {
    std::vector<double> u;      // transform of f on `to`
    std::vector<double> back;   // transform of u on `from`
    double error = 0;           // max |back − f|
};
LegendreRoundTrip legendre_round_trip(const SampleGrid& from, const std::vector<double>& f, const SampleGrid& to);

}  // namespace gcstab
