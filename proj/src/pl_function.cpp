#include "gcstab/pl_function.hpp"

#include "gcstab/error.hpp"

#include <algorithm>
#include <set>

namespace gcstab {

PLConvexFunction::PLConvexFunction(std::vector<AffinePiece> pieces) : pieces_(std::move(pieces)) {
    if (pieces_.empty()) throw Error("criteria", "NonConvexPieces", "a PL function needs at least one piece");
    std::sort(pieces_.begin(), pieces_.end());
    pieces_.erase(std::unique(pieces_.begin(), pieces_.end()), pieces_.end());
    // A piece dominated by another with the same slope never attains the max.
    std::vector<AffinePiece> kept;
    for (const auto& p : pieces_) {
        if (!kept.empty() && kept.back().w == p.w)
            kept.back() = p;
        else
            kept.push_back(p);
    }
    pieces_ = std::move(kept);
}

PLConvexFunction PLConvexFunction::affine(const RVec& w, const Rational& b) {
    PLConvexFunction f({AffinePiece{w, b}});
    f.w_invariant_ = false;
    return f;
}

PLConvexFunction PLConvexFunction::from_weight(const RootSystem& rs, const RVec& v) {
    auto f = affine(rs.covector(v), 0);
    f.w_invariant_ = is_zero(rs.split(v).second);
    return f;
}

PLConvexFunction PLConvexFunction::w_symmetrized(const RootSystem& rs, const std::vector<AffinePiece>& generators) {
    std::set<AffinePiece> orbit;
    for (const auto& g : rs.weyl_group()) {
        RMat gt = g.transpose();
        for (const auto& p : generators) orbit.insert({gt * p.w, p.b});
    }
    PLConvexFunction f(std::vector<AffinePiece>(orbit.begin(), orbit.end()));
    f.w_invariant_ = true;
    return f;
}

Rational PLConvexFunction::value(const RVec& y) const {
    Rational best = dot(pieces_[0].w, y) + pieces_[0].b;
    for (std::size_t k = 1; k < pieces_.size(); ++k) {
        Rational v = dot(pieces_[k].w, y) + pieces_[k].b;
        if (v > best) best = v;
    }
    return best;
}

bool PLConvexFunction::check_w_invariant(const RootSystem& rs, const std::vector<RVec>& samples) const {
    for (const auto& g : rs.weyl_group())
        for (const auto& y : samples)
            if (value(g * y) != value(y)) return false;
    return true;
}

PLConvexFunction PLConvexFunction::plus_affine(const RVec& w, const Rational& b) const {
    std::vector<AffinePiece> shifted;
    for (const auto& p : pieces_) shifted.push_back({p.w + w, p.b + b});
    PLConvexFunction f(std::move(shifted));
    f.w_invariant_ = false;
    return f;
}

namespace {

// Measure of a simplex relative to the affine plane of `parent`, via the first
// coordinate projection on which the parent is nondegenerate.
struct PlaneMeasure {
    std::vector<std::size_t> coords;
    Rational operator()(const Simplex& s) const {
        const std::size_t k = coords.size();
        RMat m(k, k);
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = 0; j < k; ++j) m(i, j) = s[i + 1][coords[j]] - s[0][coords[j]];
        return abs(determinant(m));
    }
};

PlaneMeasure plane_measure(const Simplex& parent) {
    const std::size_t k = parent.size() - 1;
    const std::size_t r = parent[0].size();
    std::vector<std::size_t> idx(k);
    // Enumerate k-subsets of coordinates in lexicographic order.
    std::vector<bool> sel(r, false);
    std::fill(sel.begin(), sel.begin() + static_cast<long>(k), true);
    do {
        std::size_t t = 0;
        for (std::size_t i = 0; i < r; ++i)
            if (sel[i]) idx[t++] = i;
        PlaneMeasure pm{idx};
        if (sgn(pm(parent)) != 0) return pm;
    } while (std::prev_permutation(sel.begin(), sel.end()));
    throw Error("polyint", "DegenerateSimplex", "simplex has no nondegenerate projection");
}

}  // namespace

std::vector<std::pair<std::size_t, Simplex>> PLConvexFunction::regions(const Simplex& s) const {
    if (pieces_.size() == 1) return {{0, s}};
    const ConvexCell base = ConvexCell::from_simplex(s);
    std::vector<std::pair<std::size_t, Simplex>> out;
    for (std::size_t k = 0; k < pieces_.size(); ++k) {
        ConvexCell cell = base;
        for (std::size_t j = 0; j < pieces_.size() && !cell.empty(); ++j) {
            if (j == k) continue;
            Halfspace h{pieces_[k].w - pieces_[j].w, pieces_[k].b - pieces_[j].b};
            // On a lower-dimensional simplex two pieces can agree everywhere; the lower index keeps it.
            if (j < k && std::all_of(cell.vertices().begin(), cell.vertices().end(),
                                     [&](const RVec& y) { return sgn(h(y)) == 0; })) {
                cell = ConvexCell{};
                break;
            }
            cell = cell.cut(h);
        }
        for (auto& t : cell.triangulate()) out.emplace_back(k, std::move(t));
    }
    PlaneMeasure pm = plane_measure(s);
    Rational total = 0;
    for (const auto& [k, t] : out) total += pm(t);
    if (total != pm(s)) throw Error("criteria", "NonConvexPieces", "linearity regions do not tile the simplex");
    return out;
}

}  // namespace gcstab
