#include "gcstab/polytope.hpp"

#include "gcstab/error.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <set>

namespace gcstab {

namespace {

Rational factorial(int k) {
    Rational f = 1;
    for (int i = 2; i <= k; ++i) f *= i;
    return f;
}

// Affine functions (a, c) with a·v + c = 0 on every listed point.
std::vector<Halfspace> vanishing_functions(const std::vector<RVec>& pts, std::size_t r) {
    RMat m(pts.size(), r + 1);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        for (std::size_t j = 0; j < r; ++j) m(i, j) = pts[i][j];
        m(i, r) = 1;
    }
    std::vector<Halfspace> out;
    for (auto& v : nullspace(m)) {
        Rational c = v[r];
        v.pop_back();
        out.push_back({std::move(v), c});
    }
    return out;
}

void dedupe(std::vector<RVec>& pts) {
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
}

}  // namespace

ConvexCell ConvexCell::from_simplex(const Simplex& vertices) {
    ConvexCell cell;
    cell.r_ = vertices.at(0).size();
    const int k = static_cast<int>(vertices.size()) - 1;
    if (affine_dimension(vertices) != k) throw Error("polyint", "DegenerateSimplex", "simplex vertices are affinely dependent");
    cell.dim_ = k;
    cell.points_ = vertices;
    cell.equalities_ = vanishing_functions(vertices, cell.r_);
    for (int j = 0; j <= k; ++j) {
        std::vector<RVec> others;
        for (int i = 0; i <= k; ++i)
            if (i != j) others.push_back(vertices[i]);
        for (auto& h : vanishing_functions(others, cell.r_)) {
            Rational at = h(vertices[j]);
            if (sgn(at) == 0) continue;
            if (sgn(at) < 0) {
                h.a = Rational(-1) * h.a;
                h.c = -h.c;
            }
            cell.halfspaces_.push_back(std::move(h));
            break;
        }
    }
    dedupe(cell.points_);
    return cell;
}

ConvexCell ConvexCell::from_vertices(std::vector<RVec> vertices, std::vector<Halfspace> hs) {
    ConvexCell cell;
    cell.r_ = vertices.at(0).size();
    cell.points_ = std::move(vertices);
    cell.halfspaces_ = std::move(hs);
    cell.dim_ = affine_dimension(cell.points_);
    cell.equalities_ = vanishing_functions(cell.points_, cell.r_);
    dedupe(cell.points_);
    return cell;
}

void ConvexCell::prune() {
    dedupe(points_);
    std::vector<RVec> keep;
    for (const auto& p : points_) {
        std::vector<RVec> normals;
        for (const auto& e : equalities_) normals.push_back(e.a);
        for (const auto& h : halfspaces_)
            if (sgn(h(p)) == 0) normals.push_back(h.a);
        if (normals.size() >= r_ && rank(RMat::from_rows(normals, r_)) == r_) keep.push_back(p);
    }
    points_ = std::move(keep);
}

ConvexCell ConvexCell::cut(const Halfspace& h) const {
    if (empty()) return *this;
    std::vector<Rational> val;
    bool any_neg = false, any_pos = false;
    for (const auto& p : points_) {
        val.push_back(h(p));
        any_neg |= sgn(val.back()) < 0;
        any_pos |= sgn(val.back()) > 0;
    }
    if (!any_neg) return *this;
    if (!any_pos) return ConvexCell{};
    ConvexCell out;
    out.r_ = r_;
    out.equalities_ = equalities_;
    out.halfspaces_ = halfspaces_;
    out.halfspaces_.push_back(h);
    for (std::size_t i = 0; i < points_.size(); ++i)
        if (sgn(val[i]) >= 0) out.points_.push_back(points_[i]);
    for (std::size_t i = 0; i < points_.size(); ++i) {
        if (sgn(val[i]) <= 0) continue;
        for (std::size_t j = 0; j < points_.size(); ++j) {
            if (sgn(val[j]) >= 0) continue;
            Rational t = val[i] / (val[i] - val[j]);
            out.points_.push_back(points_[i] + t * (points_[j] - points_[i]));
        }
    }
    out.prune();
    out.dim_ = affine_dimension(out.points_);
    if (out.dim_ < dim_) return ConvexCell{};
    return out;
}

std::vector<Simplex> ConvexCell::triangulate() const {
    if (empty()) return {};
    return pulling_triangulation(points_, halfspaces_, dim_);
}

std::vector<Simplex> pulling_triangulation(const std::vector<RVec>& points, const std::vector<Halfspace>& faces,
                                           int dim, bool pull_lexmax) {
    if (points.empty()) return {};
    if (dim == 0) return {{points.front()}};
    if (static_cast<int>(points.size()) == dim + 1) return {points};
    const RVec apex = pull_lexmax ? *std::max_element(points.begin(), points.end())
                                  : *std::min_element(points.begin(), points.end());
    std::set<std::vector<RVec>> facets;
    for (const auto& h : faces) {
        if (sgn(h(apex)) == 0) continue;
        std::vector<RVec> tight;
        for (const auto& p : points)
            if (sgn(h(p)) == 0) tight.push_back(p);
        if (static_cast<int>(tight.size()) < dim) continue;
        if (affine_dimension(tight) != dim - 1) continue;
        std::sort(tight.begin(), tight.end());
        facets.insert(std::move(tight));
    }
    std::vector<Simplex> out;
    for (const auto& f : facets)
        for (auto& s : pulling_triangulation(f, faces, dim - 1, pull_lexmax)) {
            s.insert(s.begin(), apex);
            out.push_back(std::move(s));
        }
    return out;
}

namespace {

void for_each_subset(std::size_t m, std::size_t k, const std::function<void(const std::vector<std::size_t>&)>& fn) {
    std::vector<std::size_t> idx(k);
    std::iota(idx.begin(), idx.end(), 0);
    if (k > m) return;
    while (true) {
        fn(idx);
        std::size_t i = k;
        while (i > 0 && idx[i - 1] == m - k + i - 1) --i;
        if (i == 0) return;
        ++idx[i - 1];
        for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
}

std::vector<RVec> raw_vertices(const std::vector<Halfspace>& hs, std::size_t r) {
    std::set<RVec> found;
    for_each_subset(hs.size(), r, [&](const std::vector<std::size_t>& idx) {
        RMat a(r, r);
        RVec b(r);
        for (std::size_t i = 0; i < r; ++i) {
            for (std::size_t j = 0; j < r; ++j) a(i, j) = hs[idx[i]].a[j];
            b[i] = -hs[idx[i]].c;
        }
        auto y = solve(a, b);
        if (!y) return;
        for (const auto& h : hs)
            if (sgn(h(*y)) < 0) return;
        found.insert(*y);
    });
    return {found.begin(), found.end()};
}

}  // namespace

std::vector<RVec> enumerate_vertices(const std::vector<Halfspace>& hs, std::size_t r) {
    // Recession cone {d : a_k·d ≥ 0} boxed to [−1,1]^r; bounded iff its only vertex is 0.
    std::vector<Halfspace> rec;
    for (const auto& h : hs) rec.push_back({h.a, 0});
    for (std::size_t i = 0; i < r; ++i) {
        RVec e = zeros(r);
        e[i] = 1;
        rec.push_back({e, 1});
        rec.push_back({Rational(-1) * e, 1});
    }
    for (const auto& d : raw_vertices(rec, r))
        if (!is_zero(d)) throw Error("polyint", "Unbounded", "polytope is unbounded");
    auto v = raw_vertices(hs, r);
    if (v.empty()) throw Error("polyint", "Unbounded", "polytope has no vertices");
    return v;
}

std::vector<std::pair<std::size_t, std::size_t>> polytope_edges(const std::vector<RVec>& vertices,
                                                                const std::vector<Halfspace>& hs) {
    const std::size_t r = vertices.empty() ? 0 : vertices[0].size();
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (std::size_t i = 0; i < vertices.size(); ++i)
        for (std::size_t j = i + 1; j < vertices.size(); ++j) {
            std::vector<const Halfspace*> common;
            std::vector<RVec> normals;
            for (const auto& h : hs)
                if (sgn(h(vertices[i])) == 0 && sgn(h(vertices[j])) == 0) {
                    common.push_back(&h);
                    normals.push_back(h.a);
                }
            if (r > 1 && (normals.empty() || rank(RMat::from_rows(normals, r)) != r - 1)) continue;
            bool others = false;
            for (std::size_t k = 0; k < vertices.size() && !others; ++k) {
                if (k == i || k == j) continue;
                others = std::all_of(common.begin(), common.end(),
                                     [&](const Halfspace* h) { return sgn((*h)(vertices[k])) == 0; });
            }
            if (!others) out.emplace_back(i, j);
        }
    return out;
}

Rational simplex_volume(const Simplex& s) {
    const std::size_t k = s.size() - 1;
    RMat m(k, k);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) m(i, j) = s[i + 1][j] - s[0][j];
    return abs(determinant(m)) / factorial(static_cast<int>(k));
}

Rational facet_cone_mass(const Simplex& s) {
    const std::size_t r = s.size();
    return abs(determinant(RMat::from_rows(s, r))) / factorial(static_cast<int>(r) - 1);
}

Polytope::Polytope(std::vector<Facet> facets) : facets_(std::move(facets)) {
    if (facets_.empty()) throw Error("polyint", "Unbounded", "no facets given");
    r_ = facets_[0].u.size();
    if (r_ == 0) throw Error("polyint", "RankMismatch", "facet normals must be nonempty");
    std::set<RVec> normals;
    for (std::size_t k = 0; k < facets_.size(); ++k) {
        const auto& f = facets_[k];
        if (f.u.size() != r_) throw Error("polyint", "RankMismatch", "facet normals have inconsistent length");
        mpz_class g = 0;
        for (const auto& x : f.u) {
            if (x.get_den() != 1)
                throw Error("polyint", "NonPrimitiveNormal", "facet " + std::to_string(k) + " normal is not integral");
            mpz_class n = abs(x.get_num());
            mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), n.get_mpz_t());
        }
        if (g != 1)
            throw Error("polyint", "NonPrimitiveNormal", "facet " + std::to_string(k) + " normal is not primitive");
        if (sgn(f.lambda) <= 0)
            throw Error("polyint", "OriginNotInterior", "facet " + std::to_string(k) + " has lambda <= 0");
        if (!normals.insert(f.u).second)
            throw Error("polyint", "RedundantFacet", "facet " + std::to_string(k) + " repeats a normal");
    }
    vertices_ = enumerate_vertices(halfspaces(), r_);
    for (std::size_t k = 0; k < facets_.size(); ++k) {
        std::vector<RVec> tight;
        for (const auto& v : vertices_)
            if (sgn(facets_[k].l(v)) == 0) tight.push_back(v);
        if (affine_dimension(tight) != static_cast<int>(r_) - 1)
            throw Error("polyint", "RedundantFacet", "facet " + std::to_string(k) + " does not support a facet");
    }
    for (const auto& a : vertices_)
        for (const auto& b : vertices_) {
            double d = 0;
            for (std::size_t i = 0; i < r_; ++i) {
                double t = Rational(a[i] - b[i]).get_d();
                d += t * t;
            }
            diameter_ = std::max(diameter_, std::sqrt(d));
        }
}

std::vector<Halfspace> Polytope::halfspaces() const {
    std::vector<Halfspace> hs;
    for (const auto& f : facets_) hs.push_back({Rational(-1) * f.u, f.lambda});
    return hs;
}

std::vector<std::pair<std::size_t, Simplex>> ChamberPolytope::all_cone_simplices() const {
    std::vector<std::pair<std::size_t, Simplex>> out;
    for (std::size_t a = 0; a < outer_.size(); ++a)
        for (const auto& s : outer_[a].cone_simplices) out.emplace_back(a, s);
    return out;
}

std::optional<std::pair<std::size_t, std::size_t>> find_w_violation(const Polytope& p, const RootSystem& rs) {
    std::set<std::pair<RVec, Rational>> present;
    for (const auto& f : p.facets()) present.emplace(f.u, f.lambda);
    for (std::size_t g = 0; g < rs.weyl_group().size(); ++g) {
        RMat gt = rs.weyl_group()[g].transpose();
        for (std::size_t k = 0; k < p.facets().size(); ++k) {
            const auto& f = p.facets()[k];
            if (!present.count({gt * f.u, f.lambda})) return std::make_pair(k, g);
        }
    }
    return std::nullopt;
}

Polynomial weight_pi(const RootSystem& rs) {
    Polynomial pi = Polynomial::constant(rs.rank(), 1);
    for (const auto& a : rs.positive_roots()) {
        Polynomial l = Polynomial::linear(rs.covector(a));
        pi = pi * l * l;
    }
    return pi;
}

ChamberPolytope restrict_to_chamber(const Polytope& p, const RootSystem& rs) {
    if (p.rank() != rs.rank())
        throw Error("polyint", "RankMismatch",
                    "polytope rank " + std::to_string(p.rank()) + " != root system rank " + std::to_string(rs.rank()));
    if (auto bad = find_w_violation(p, rs))
        throw Error("polyint", "NotWInvariant",
                    "facet " + std::to_string(bad->first) + " is not mapped to a facet by Weyl element " +
                        std::to_string(bad->second));
    const std::size_t r = rs.rank();
    ChamberPolytope cp(p, rs);
    for (const auto& a : rs.simple_roots()) cp.walls_.push_back({rs.covector(a), 0});
    for (const auto& a : rs.positive_roots()) cp.root_cov_.push_back(rs.covector(a));
    cp.halfspaces_ = p.halfspaces();
    ConvexCell cell = ConvexCell::from_vertices(p.vertices(), cp.halfspaces_);
    for (const auto& w : cp.walls_) cell = cell.cut(w);
    cp.halfspaces_.insert(cp.halfspaces_.end(), cp.walls_.begin(), cp.walls_.end());
    cp.vertices_ = cell.vertices();
    cp.edges_ = polytope_edges(cp.vertices_, cp.halfspaces_);
    const RVec origin = zeros(r);
    for (std::size_t k = 0; k < p.facets().size(); ++k) {
        const auto& f = p.facets()[k];
        std::vector<RVec> tight;
        for (const auto& v : cp.vertices_)
            if (sgn(f.l(v)) == 0) tight.push_back(v);
        if (tight.empty() || affine_dimension(tight) != static_cast<int>(r) - 1) continue;
        OuterFacet of{k, f.u, f.lambda, tight, {}, {}};
        of.simplices = pulling_triangulation(tight, cp.halfspaces_, static_cast<int>(r) - 1);
        for (const auto& s : of.simplices) {
            Simplex c{origin};
            c.insert(c.end(), s.begin(), s.end());
            of.cone_simplices.push_back(std::move(c));
        }
        cp.outer_.push_back(std::move(of));
    }
    std::sort(cp.outer_.begin(), cp.outer_.end(),
              [](const OuterFacet& a, const OuterFacet& b) { return a.u < b.u; });
    cp.interior_ = pulling_triangulation(cp.vertices_, cp.halfspaces_, static_cast<int>(r), true);
    cp.pi_ = weight_pi(rs);
    return cp;
}

}  // namespace gcstab
