#include "gcstab/legendre.hpp"

#include "gcstab/error.hpp"
#include "gcstab/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace gcstab {

std::size_t SampleGrid::size() const {
    std::size_t n = 1;
    for (const auto& a : axes) n *= a.size();
    return n;
}

std::vector<double> SampleGrid::point(std::size_t index) const {
    std::vector<double> p(axes.size());
    for (std::size_t d = axes.size(); d-- > 0;) {
        p[d] = axes[d][index % axes[d].size()];
        index /= axes[d].size();
    }
    return p;
}

namespace {

void check_convex(const SampleGrid& g, const std::vector<double>& f) {
    const std::size_t dims = g.axes.size();
    double scale = 0;
    for (double v : f) scale = std::max(scale, std::abs(v));
    const double tol = 1e-12 * std::max(1.0, scale);
    std::size_t stride = 1;
    for (std::size_t d = dims; d-- > 0;) {
        const auto& ax = g.axes[d];
        const std::size_t n = ax.size();
        for (std::size_t i = 0; i < f.size(); ++i) {
            std::size_t k = (i / stride) % n;
            if (k == 0 || k + 1 >= n) continue;
            double s0 = (f[i] - f[i - stride]) / (ax[k] - ax[k - 1]);
            double s1 = (f[i + stride] - f[i]) / (ax[k + 1] - ax[k]);
            if (s1 - s0 < -tol) throw Error("kenergy", "NotConvexSamples", "samples are not convex along an axis");
        }
        stride *= n;
    }
}

}  // namespace

std::vector<double> legendre_transform(const SampleGrid& from, const std::vector<double>& f, const SampleGrid& to) {
    const std::size_t dims = from.axes.size();
    if (to.axes.size() != dims || f.size() != from.size())
        throw Error("kenergy", "NotConvexSamples", "grid and sample sizes disagree");
    check_convex(from, f);
    // Replace axes one at a time, last axis first:
    // g(.., y_d, ..) = max over x_d of (x_d y_d + [partial sup over later axes] − ...).
    // With h the current table over (x_0..x_{d}, y_{d+1}..), the step is
    // h'(.., y_d, ..) = max_{x_d} (x_d y_d + h(.., x_d, ..)), starting from h = −f.
    std::vector<std::size_t> shape;
    for (const auto& a : from.axes) shape.push_back(a.size());
    std::vector<double> h(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) h[i] = -f[i];
    for (std::size_t d = dims; d-- > 0;) {
        std::size_t outer = 1, inner = 1;
        for (std::size_t k = 0; k < d; ++k) outer *= shape[k];
        for (std::size_t k = d + 1; k < dims; ++k) inner *= shape[k];
        const auto& xs = from.axes[d];
        const auto& ys = to.axes[d];
        std::vector<double> next(outer * ys.size() * inner);
        auto rows = parallel_map(outer, [&](std::size_t o) {
            std::vector<double> out(ys.size() * inner);
            for (std::size_t j = 0; j < ys.size(); ++j)
                for (std::size_t in = 0; in < inner; ++in) {
                    double best = -std::numeric_limits<double>::infinity();
                    for (std::size_t i = 0; i < xs.size(); ++i)
                        best = std::max(best, xs[i] * ys[j] + h[(o * xs.size() + i) * inner + in]);
                    out[j * inner + in] = best;
                }
            return out;
        });
        for (std::size_t o = 0; o < outer; ++o)
            std::copy(rows[o].begin(), rows[o].end(), next.begin() + static_cast<std::ptrdiff_t>(o * ys.size() * inner));
        h = std::move(next);
        shape[d] = ys.size();
    }
    return h;
}

LegendreRoundTrip legendre_round_trip(const SampleGrid& from, const std::vector<double>& f, const SampleGrid& to) {
    LegendreRoundTrip out;
    out.u = legendre_transform(from, f, to);
    out.back = legendre_transform(to, out.u, from);
    for (std::size_t i = 0; i < f.size(); ++i) out.error = std::max(out.error, std::abs(out.back[i] - f[i]));
    return out;
}

}  // namespace gcstab
