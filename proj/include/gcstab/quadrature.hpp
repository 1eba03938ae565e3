#pragma once

#include "gcstab/polytope.hpp"

#include <vector>

namespace gcstab {

/// Nodes on [0,1] with their complements 1 − x (accurate near 1) and weights.
struct Rule1D {
    std::vector<double> x;
    std::vector<double> xc;
    std::vector<double> w;
};

/// n-point Gauss-Legendre on [0,1].
Rule1D gauss_legendre(int n);
/// Tanh-sinh on [0,1] with step 2^-level, truncated at |t| ≤ 4.
Rule1D tanh_sinh(int level);

/// Rule on the standard k-simplex in barycentric coordinates; weights sum to 1.
/// Every barycentric coordinate is a product of 1-D nodes and complements, so
/// small coordinates keep full relative accuracy.
struct SimplexRule {
    int dim = 0;
    std::vector<std::vector<double>> bary;
    std::vector<double> w;
};

/// Collapsed (Duffy) tensor rule built from a 1-D rule.
SimplexRule collapsed_rule(int dim, const Rule1D& r);

struct QuadPoint {
    std::vector<double> y;
    std::vector<double> bary;
    double w = 0;  // includes the simplex volume
};

/// Rule nodes mapped onto a full-dimensional simplex.
std::vector<QuadPoint> place(const SimplexRule& rule, const Simplex& s);

}  // namespace gcstab
