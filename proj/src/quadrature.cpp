#include "gcstab/quadrature.hpp"

#include "gcstab/error.hpp"

#include <cmath>
#include <numbers>
#include <utility>

namespace gcstab {

namespace {

// P_n(z) and P_n'(z) by the three-term recurrence.
std::pair<double, double> legendre(int n, double z) {
    double p0 = 1, p1 = z;
    for (int k = 2; k <= n; ++k) {
        double p2 = ((2 * k - 1) * z * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    if (n == 1) p0 = 1;
    return {p1, n * (z * p1 - p0) / (z * z - 1)};
}

}  // namespace

Rule1D gauss_legendre(int n) {
    if (n < 1) throw Error("quadrature", "BadOrder", "Gauss-Legendre needs at least one node");
    Rule1D r;
    r.x.resize(n);
    r.xc.resize(n);
    r.w.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        for (int it = 0; it < 100; ++it) {
            auto [p, dp] = legendre(n, z);
            double dz = p / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        double dp = legendre(n, z).second;
        double w = 1.0 / ((1 - z * z) * dp * dp);
        r.x[i] = 0.5 * (1 - z);
        r.xc[i] = 0.5 * (1 + z);
        r.x[n - 1 - i] = 0.5 * (1 + z);
        r.xc[n - 1 - i] = 0.5 * (1 - z);
        r.w[i] = r.w[n - 1 - i] = w;
    }
    return r;
}

Rule1D tanh_sinh(int level) {
    if (level < 0) throw Error("quadrature", "BadOrder", "tanh-sinh level must be nonnegative");
    const double h = std::ldexp(1.0, -level);
    const int N = static_cast<int>(std::ceil(4.0 / h));
    Rule1D r;
    for (int k = -N; k <= N; ++k) {
        double t = k * h;
        double u = 0.5 * std::numbers::pi * std::sinh(t);
        double x = 1 / (1 + std::exp(-2 * u));
        double xc = 1 / (1 + std::exp(2 * u));
        double ch = std::cosh(u);
        double w = 0.5 * h * 0.5 * std::numbers::pi * std::cosh(t) / (ch * ch);
        if (!(w > 1e-300) || !(x > 0) || !(xc > 0)) continue;
        r.x.push_back(x);
        r.xc.push_back(xc);
        r.w.push_back(w);
    }
    return r;
}

SimplexRule collapsed_rule(int dim, const Rule1D& r) {
    SimplexRule out;
    out.dim = dim;
    if (dim == 0) {
        out.bary = {{1.0}};
        out.w = {1.0};
        return out;
    }
    const std::size_t m = r.x.size();
    std::vector<std::size_t> idx(dim, 0);
    double fact = 1;
    for (int i = 2; i <= dim; ++i) fact *= i;
    while (true) {
        // λ_j = t_j ∏_{i<j}(1 − t_i) for j = 1..k, λ_0 = ∏(1 − t_i).
        std::vector<double> b(dim + 1);
        double rest = 1, w = fact;
        for (int j = 0; j < dim; ++j) {
            const std::size_t q = idx[j];
            b[j + 1] = rest * r.x[q];
            w *= r.w[q] * std::pow(r.xc[q], dim - 1 - j);
            rest *= r.xc[q];
        }
        b[0] = rest;
        out.bary.push_back(std::move(b));
        out.w.push_back(w);
        int j = dim - 1;
        while (j >= 0 && ++idx[j] == m) idx[j--] = 0;
        if (j < 0) break;
    }
    return out;
}

std::vector<QuadPoint> place(const SimplexRule& rule, const Simplex& s) {
    const double vol = simplex_volume(s).get_d();
    const std::size_t r = s[0].size();
    std::vector<std::vector<double>> v;
    for (const auto& p : s) v.push_back(to_double(p));
    std::vector<QuadPoint> out(rule.w.size());
    for (std::size_t q = 0; q < rule.w.size(); ++q) {
        auto& pt = out[q];
        pt.bary = rule.bary[q];
        pt.w = rule.w[q] * vol;
        pt.y.assign(r, 0.0);
        for (std::size_t j = 0; j < v.size(); ++j)
            for (std::size_t i = 0; i < r; ++i) pt.y[i] += pt.bary[j] * v[j][i];
    }
    return out;
}

}  // namespace gcstab
