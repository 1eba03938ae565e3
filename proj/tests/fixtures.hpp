#pragma once

// Small polytopes shared by the unit tests. The same data ships as JSON in corpus/.

#include "gcstab/polytope.hpp"
#include "gcstab/rootdata.hpp"

#include <string>
#include <vector>

namespace fixture {

using gcstab::Rational;
using gcstab::RMat;
using gcstab::RVec;

struct Case {
    std::string name;
    gcstab::RootSystem rs;
    std::vector<gcstab::Facet> facets;
    gcstab::ChamberPolytope chamber() const { return gcstab::restrict_to_chamber(gcstab::Polytope(facets), rs); }
};

inline RMat diag(std::initializer_list<Rational> d) {
    RMat m(d.size(), d.size());
    std::size_t i = 0;
    for (const auto& x : d) {
        m(i, i) = x;
        ++i;
    }
    return m;
}

inline gcstab::RootSystem torus(std::size_t r) { return gcstab::build_root_system(r, RMat::identity(r), {}); }

inline std::vector<gcstab::Facet> facets(std::initializer_list<std::pair<RVec, Rational>> list) {
    std::vector<gcstab::Facet> out;
    for (const auto& [u, l] : list) out.push_back({u, l});
    return out;
}

inline Case torus_square(Rational lambda = 2) {
    return {"torus_square", torus(2),
            facets({{RVec{1, 0}, lambda}, {RVec{-1, 0}, lambda}, {RVec{0, 1}, lambda}, {RVec{0, -1}, lambda}})};
}

inline Case torus_p2() {
    return {"torus_p2", torus(2), facets({{RVec{-1, 0}, 2}, {RVec{0, -1}, 2}, {RVec{1, 1}, 2}})};
}

inline Case torus_blowup() {
    return {"torus_blowup", torus(2),
            facets({{RVec{-1, 0}, 2}, {RVec{0, -1}, 2}, {RVec{1, 1}, 2}, {RVec{-1, -1}, 2}})};
}

inline Case torus_dp6() {
    return {"torus_dp6", torus(2),
            facets({{RVec{1, 0}, 2},
                    {RVec{-1, 0}, 2},
                    {RVec{0, 1}, 2},
                    {RVec{0, -1}, 2},
                    {RVec{1, 1}, 2},
                    {RVec{-1, -1}, 2}})};
}

inline gcstab::RootSystem a1_roots() { return gcstab::build_root_system(1, diag({Rational(1, 2)}), {RVec{2}}); }

inline Case a1_quadric(Rational lambda = 6) {
    return {"a1_quadric", a1_roots(), facets({{RVec{1}, lambda}, {RVec{-1}, lambda}})};
}

inline gcstab::RootSystem a1_torus_roots() {
    return gcstab::build_root_system(2, diag({Rational(1, 2), 1}), {RVec{2, 0}});
}

inline Case a1_torus() {
    return {"a1_torus", a1_torus_roots(),
            facets({{RVec{1, 0}, 6},
                    {RVec{-1, 0}, 6},
                    {RVec{0, 1}, 2},
                    {RVec{0, -1}, 2},
                    {RVec{1, 1}, 6},
                    {RVec{-1, 1}, 6}})};
}

inline gcstab::RootSystem a2_roots() {
    RMat g(2, 2);
    g(0, 0) = 2;
    g(0, 1) = -1;
    g(1, 0) = -1;
    g(1, 1) = 2;
    return gcstab::build_root_system(2, g, {RVec{1, 0}, RVec{0, 1}});
}

inline Case a2_hexagon() {
    return {"a2_hexagon", a2_roots(),
            facets({{RVec{1, 0}, 6},
                    {RVec{-1, 0}, 6},
                    {RVec{0, 1}, 6},
                    {RVec{0, -1}, 6},
                    {RVec{1, -1}, 6},
                    {RVec{-1, 1}, 6}})};
}

inline std::vector<Case> all() {
    return {torus_square(), torus_p2(), torus_blowup(), torus_dp6(), a1_quadric(), a1_torus(), a2_hexagon()};
}

}  // namespace fixture
