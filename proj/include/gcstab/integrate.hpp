#pragma once

#include "gcstab/polynomial.hpp"
#include "gcstab/polytope.hpp"

#include <vector>

namespace gcstab {

/// a·y + c
struct LinearForm {
    RVec a;
    Rational c;
    Rational operator()(const RVec& y) const { return dot(a, y) + c; }
};

/// coeff · ∏ factors
struct ProductTerm {
    Rational coeff;
    std::vector<LinearForm> factors;
};

/// Sum of products of affine forms. Polynomials, π and every integrand of the
/// linear functional fit this shape, and it converts to barycentric
/// coordinates without expanding in the ambient variables.
class Integrand {
public:
    Integrand() = default;
    static Integrand constant(const Rational& c);
    static Integrand from_polynomial(const Polynomial& p);
    static Integrand from_form(const LinearForm& f);

    const std::vector<ProductTerm>& terms() const { return terms_; }
    void add(ProductTerm t) { terms_.push_back(std::move(t)); }

    Integrand operator+(const Integrand& b) const;
    Integrand operator*(const Integrand& b) const;
    Integrand operator*(const LinearForm& f) const;
    Integrand scaled(const Rational& s) const;
    Rational evaluate(const RVec& y) const;

private:
    std::vector<ProductTerm> terms_;
};

/// ∏_{α∈Φ₊} α(y)² as a single product term.
Integrand pi_integrand(const ChamberPolytope& cp);
/// ρ·∇π = Σ_α 2⟨α,ρ⟩ α(y) ∏_{β≠α} β(y)².
Integrand rho_dpi_integrand(const ChamberPolytope& cp);

/// ∫ f over a k-simplex against a measure of total mass `mass` that is
/// uniform in barycentric coordinates.
Rational integrate_barycentric(const Integrand& f, const Simplex& s, const Rational& mass);
/// Lebesgue integral over a full-dimensional simplex.
Rational integrate_simplex(const Integrand& f, const Simplex& s);
/// ∫ f ⟨y,ν⟩ dσ₀ over an (r−1)-simplex in a facet hyperplane.
Rational integrate_facet_simplex(const Integrand& f, const Simplex& s);

enum class RegionKind { Chamber, Cone, Facet };
struct Region {
    RegionKind kind = RegionKind::Chamber;
    std::size_t facet = 0;  // index into outer_facets() for Cone/Facet
    static Region chamber() { return {RegionKind::Chamber, 0}; }
    static Region cone(std::size_t a) { return {RegionKind::Cone, a}; }
    static Region facet_of(std::size_t a) { return {RegionKind::Facet, a}; }
};

/// Exact integral over 2P₊ (dy), a cone E_A (dy) or an outer facet F_A (⟨y,ν_A⟩dσ₀).
/// Errors: polyint.RegionEmpty.
Rational integrate(const Integrand& f, const ChamberPolytope& cp, const Region& region);
Rational integrate(const Polynomial& f, const ChamberPolytope& cp, const Region& region);
/// Chamber integral over the pulling triangulation instead of the cones.
Rational integrate_chamber_pulling(const Integrand& f, const ChamberPolytope& cp);

/// Plain dσ₀ measure of F_A in floating point (irrational in general).
double facet_area(const ChamberPolytope& cp, std::size_t a);

}  // namespace gcstab
