#pragma once

#include "gcstab/polynomial.hpp"
#include "gcstab/rational.hpp"
#include "gcstab/rootdata.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace gcstab {

/// a·y + c ≥ 0
struct Halfspace {
    RVec a;
    Rational c;
    Rational operator()(const RVec& y) const { return dot(a, y) + c; }
};

using Simplex = std::vector<RVec>;

/// Exact convex polytope of some affine dimension d ≤ r inside ℚ^r, kept in
/// both representations. The point list holds exactly the vertices.
class ConvexCell {
public:
    ConvexCell() = default;
    static ConvexCell from_simplex(const Simplex& vertices);
    /// Full-dimensional cell from its vertex set and a valid H-representation.
    static ConvexCell from_vertices(std::vector<RVec> vertices, std::vector<Halfspace> hs);

    std::size_t ambient_dim() const { return r_; }
    int dim() const { return dim_; }
    bool empty() const { return points_.empty(); }
    const std::vector<RVec>& vertices() const { return points_; }
    const std::vector<Halfspace>& halfspaces() const { return halfspaces_; }

    /// Intersection with {h ≥ 0}; returns an empty cell if the result loses dimension.
    ConvexCell cut(const Halfspace& h) const;
    std::vector<Simplex> triangulate() const;

private:
    std::size_t r_ = 0;
    int dim_ = -1;
    std::vector<RVec> points_;
    std::vector<Halfspace> halfspaces_;
    std::vector<Halfspace> equalities_;
    void prune();
};

/// Triangulation by recursive pulling from the lexicographically smallest
/// (or largest) vertex. `faces` must contain a supporting halfspace for every
/// facet of conv(points).
std::vector<Simplex> pulling_triangulation(const std::vector<RVec>& points, const std::vector<Halfspace>& faces,
                                           int dim, bool pull_lexmax = false);

/// Vertices of {a_k·y + c_k ≥ 0}; throws polyint.Unbounded if the set is unbounded.
std::vector<RVec> enumerate_vertices(const std::vector<Halfspace>& hs, std::size_t r);

/// Pairs of vertex indices spanning one-dimensional faces.
std::vector<std::pair<std::size_t, std::size_t>> polytope_edges(const std::vector<RVec>& vertices,
                                                                const std::vector<Halfspace>& hs);

/// k-volume of a k-simplex in ℚ^k (full dimensional): |det(v_i − v_0)|/k!.
Rational simplex_volume(const Simplex& s);
/// ⟨y,ν⟩dσ₀ mass of an (r−1)-simplex lying in a hyperplane not through 0:
/// |det[v_0,…,v_{r−1}]|/(r−1)!, which is r times the volume of its cone to the origin.
Rational facet_cone_mass(const Simplex& s);

struct Facet {
    RVec u;
    Rational lambda;
    /// l(y) = −u·y + λ
    Rational l(const RVec& y) const { return lambda - dot(u, y); }
};

/// The dilated polytope 2P = {l_Ã ≥ 0}.
class Polytope {
public:
    /// Validates lattice normals, origin interiority, boundedness and irredundancy.
    explicit Polytope(std::vector<Facet> facets);

    std::size_t rank() const { return r_; }
    const std::vector<Facet>& facets() const { return facets_; }
    const std::vector<RVec>& vertices() const { return vertices_; }
    std::vector<Halfspace> halfspaces() const;
    double diameter() const { return diameter_; }

private:
    std::size_t r_ = 0;
    std::vector<Facet> facets_;
    std::vector<RVec> vertices_;
    double diameter_ = 0;
};

struct OuterFacet {
    std::size_t facet_index;
    RVec u;
    Rational lambda;
    std::vector<RVec> vertices;
    std::vector<Simplex> simplices;       // (r−1)-simplices triangulating F_A
    std::vector<Simplex> cone_simplices;  // origin followed by a facet simplex
};

/// 2P₊ = 2P ∩ closed positive chamber, with the E_A/F_A decomposition.
class ChamberPolytope {
public:
    const Polytope& polytope() const { return polytope_; }
    const RootSystem& roots() const { return rs_; }
    std::size_t rank() const { return rs_.rank(); }
    const std::vector<RVec>& vertices() const { return vertices_; }
    const std::vector<Halfspace>& halfspaces() const { return halfspaces_; }
    const std::vector<std::pair<std::size_t, std::size_t>>& edges() const { return edges_; }
    const std::vector<OuterFacet>& outer_facets() const { return outer_; }
    /// Pulling triangulation of 2P₊, independent of the cone decomposition.
    const std::vector<Simplex>& interior_simplices() const { return interior_; }
    /// Every cone simplex, tagged with its outer facet.
    std::vector<std::pair<std::size_t, Simplex>> all_cone_simplices() const;
    const Polynomial& pi() const { return pi_; }
    /// Covectors of positive roots: α(y) = ⟨α, y⟩ = (Gα)·y.
    const std::vector<RVec>& root_covectors() const { return root_cov_; }
    const std::vector<Halfspace>& walls() const { return walls_; }

    friend ChamberPolytope restrict_to_chamber(const Polytope&, const RootSystem&);

private:
    ChamberPolytope(Polytope p, RootSystem rs) : polytope_(std::move(p)), rs_(std::move(rs)) {}
    Polytope polytope_;
    RootSystem rs_;
    std::vector<RVec> vertices_;
    std::vector<Halfspace> halfspaces_;
    std::vector<Halfspace> walls_;
    std::vector<std::pair<std::size_t, std::size_t>> edges_;
    std::vector<OuterFacet> outer_;
    std::vector<Simplex> interior_;
    Polynomial pi_;
    std::vector<RVec> root_cov_;
};

/// Errors: polyint.NotWInvariant, polyint.Unbounded, polyint.OriginNotInterior,
/// polyint.RankMismatch.
ChamberPolytope restrict_to_chamber(const Polytope& p, const RootSystem& rs);

/// Checks {(wᵀu, λ)} = {(u, λ)} for every Weyl element; returns the first offender.
std::optional<std::pair<std::size_t, std::size_t>> find_w_violation(const Polytope& p, const RootSystem& rs);

/// π(y) = ∏_{α∈Φ₊} ⟨α, y⟩².
Polynomial weight_pi(const RootSystem& rs);

}  // namespace gcstab
