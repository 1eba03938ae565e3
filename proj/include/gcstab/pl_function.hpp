#pragma once

#include "gcstab/polytope.hpp"
#include "gcstab/rootdata.hpp"

#include <utility>
#include <vector>

namespace gcstab {

/// y ↦ w·y + b with w a covector.
struct AffinePiece {
    RVec w;
    Rational b;
    bool operator<(const AffinePiece& o) const { return w != o.w ? w < o.w : b < o.b; }
    bool operator==(const AffinePiece& o) const { return w == o.w && b == o.b; }
};

/// u(y) = max_k (w_k·y + b_k).
class PLConvexFunction {
public:
    PLConvexFunction() = default;
    explicit PLConvexFunction(std::vector<AffinePiece> pieces);

    /// The affine function y ↦ w·y + b.
    static PLConvexFunction affine(const RVec& w, const Rational& b = 0);
    /// l_v(y) = ⟨v, y⟩ for a weight v.
    static PLConvexFunction from_weight(const RootSystem& rs, const RVec& v);
    /// max over the Weyl orbit of the given pieces.
    static PLConvexFunction w_symmetrized(const RootSystem& rs, const std::vector<AffinePiece>& generators);

    const std::vector<AffinePiece>& pieces() const { return pieces_; }
    std::size_t rank() const { return pieces_.empty() ? 0 : pieces_[0].w.size(); }
    Rational value(const RVec& y) const;
    bool w_invariant() const { return w_invariant_; }
    /// Exact check u(g·y) = u(y) on the given sample points for every Weyl element.
    bool check_w_invariant(const RootSystem& rs, const std::vector<RVec>& samples) const;

    PLConvexFunction plus_affine(const RVec& w, const Rational& b) const;
    PLConvexFunction plus_constant(const Rational& c) const { return plus_affine(zeros(rank()), c); }

    /// Splits a simplex (full-dimensional or lying in a hyperplane) into the
    /// pieces' linearity regions. Returns (piece index, sub-simplex) pairs.
    /// Errors: criteria.NonConvexPieces when the regions fail to tile the simplex.
    std::vector<std::pair<std::size_t, Simplex>> regions(const Simplex& s) const;

private:
    std::vector<AffinePiece> pieces_;
    bool w_invariant_ = false;
};

}  // namespace gcstab
