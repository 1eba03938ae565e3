#include "gcstab/integrate.hpp"

#include "gcstab/error.hpp"

#include <cmath>
#include <map>

namespace gcstab {

Integrand Integrand::constant(const Rational& c) {
    Integrand f;
    f.add({c, {}});
    return f;
}

Integrand Integrand::from_form(const LinearForm& l) {
    Integrand f;
    f.add({1, {l}});
    return f;
}

Integrand Integrand::from_polynomial(const Polynomial& p) {
    Integrand f;
    const std::size_t r = p.nvars();
    for (const auto& [e, c] : p.terms()) {
        ProductTerm t{c, {}};
        for (std::size_t i = 0; i < r; ++i) {
            RVec a = zeros(r);
            a[i] = 1;
            for (int k = 0; k < e[i]; ++k) t.factors.push_back({a, 0});
        }
        f.add(std::move(t));
    }
    return f;
}

Integrand Integrand::operator+(const Integrand& b) const {
    Integrand r = *this;
    r.terms_.insert(r.terms_.end(), b.terms_.begin(), b.terms_.end());
    return r;
}

Integrand Integrand::operator*(const Integrand& b) const {
    Integrand r;
    for (const auto& x : terms_)
        for (const auto& y : b.terms_) {
            ProductTerm t{x.coeff * y.coeff, x.factors};
            t.factors.insert(t.factors.end(), y.factors.begin(), y.factors.end());
            r.terms_.push_back(std::move(t));
        }
    return r;
}

Integrand Integrand::operator*(const LinearForm& f) const {
    Integrand r = *this;
    for (auto& t : r.terms_) t.factors.push_back(f);
    return r;
}

Integrand Integrand::scaled(const Rational& s) const {
    Integrand r = *this;
    for (auto& t : r.terms_) t.coeff *= s;
    return r;
}

Rational Integrand::evaluate(const RVec& y) const {
    Rational s = 0;
    for (const auto& t : terms_) {
        Rational p = t.coeff;
        for (const auto& f : t.factors) p *= f(y);
        s += p;
    }
    return s;
}

Integrand pi_integrand(const ChamberPolytope& cp) {
    ProductTerm t{1, {}};
    for (const auto& a : cp.root_covectors()) {
        t.factors.push_back({a, 0});
        t.factors.push_back({a, 0});
    }
    Integrand f;
    f.add(std::move(t));
    return f;
}

Integrand rho_dpi_integrand(const ChamberPolytope& cp) {
    const auto& cov = cp.root_covectors();
    const RVec& rho = cp.roots().rho();
    Integrand f;
    for (std::size_t i = 0; i < cov.size(); ++i) {
        ProductTerm t{2 * dot(cov[i], rho), {}};
        if (sgn(t.coeff) == 0) continue;
        for (std::size_t j = 0; j < cov.size(); ++j) {
            t.factors.push_back({cov[j], 0});
            if (j != i) t.factors.push_back({cov[j], 0});
        }
        f.add(std::move(t));
    }
    return f;
}

namespace {

constexpr int kBits = 8;
constexpr std::uint64_t kMask = (1u << kBits) - 1;

const std::vector<mpz_class>& factorials() {
    static const std::vector<mpz_class> table = [] {
        std::vector<mpz_class> f(256);
        f[0] = 1;
        for (std::size_t i = 1; i < f.size(); ++i) f[i] = f[i - 1] * static_cast<unsigned long>(i);
        return f;
    }();
    return table;
}

// Dirichlet moment: ∫_Δ ∏λ_j^{a_j} / vol(Δ) = k! ∏ a_j! / (k + |a|)!.
Rational dirichlet_average(std::uint64_t key, std::size_t nb) {
    const auto& fact = factorials();
    const std::size_t k = nb - 1;
    mpz_class num = fact[k];
    std::size_t total = 0;
    for (std::size_t j = 0; j < nb; ++j) {
        std::size_t aj = (key >> (kBits * j)) & kMask;
        num *= fact[aj];
        total += aj;
    }
    if (k + total >= fact.size()) throw Error("polyint", "DegreeTooHigh", "integrand degree exceeds table");
    Rational q(num, fact[k + total]);
    q.canonicalize();
    return q;
}

}  // namespace

Rational integrate_barycentric(const Integrand& f, const Simplex& s, const Rational& mass) {
    const std::size_t nb = s.size();
    if (nb > 64 / kBits) throw Error("polyint", "DegreeTooHigh", "simplex dimension too large");
    Rational total = 0;
    std::map<std::uint64_t, Rational> poly, next;
    std::vector<Rational> vals(nb);
    for (const auto& term : f.terms()) {
        if (sgn(term.coeff) == 0) continue;
        poly.clear();
        poly[0] = term.coeff;
        for (const auto& lf : term.factors) {
            bool all_zero = true;
            for (std::size_t j = 0; j < nb; ++j) {
                vals[j] = lf(s[j]);
                all_zero &= sgn(vals[j]) == 0;
            }
            if (all_zero) {
                poly.clear();
                break;
            }
            next.clear();
            for (const auto& [key, c] : poly)
                for (std::size_t j = 0; j < nb; ++j) {
                    if (sgn(vals[j]) == 0) continue;
                    std::uint64_t k2 = key + (std::uint64_t{1} << (kBits * j));
                    auto it = next.find(k2);
                    if (it == next.end())
                        next.emplace(k2, c * vals[j]);
                    else
                        it->second += c * vals[j];
                }
            poly.swap(next);
        }
        for (const auto& [key, c] : poly) total += c * dirichlet_average(key, nb);
    }
    return total * mass;
}

Rational integrate_simplex(const Integrand& f, const Simplex& s) {
    return integrate_barycentric(f, s, simplex_volume(s));
}

Rational integrate_facet_simplex(const Integrand& f, const Simplex& s) {
    return integrate_barycentric(f, s, facet_cone_mass(s));
}

Rational integrate(const Integrand& f, const ChamberPolytope& cp, const Region& region) {
    Rational total = 0;
    bool any = false;
    auto check_index = [&](std::size_t a) {
        if (a >= cp.outer_facets().size())
            throw Error("polyint", "RegionEmpty", "no outer facet with index " + std::to_string(a));
    };
    switch (region.kind) {
        case RegionKind::Chamber:
            for (const auto& of : cp.outer_facets())
                for (const auto& s : of.cone_simplices) {
                    total += integrate_simplex(f, s);
                    any = true;
                }
            break;
        case RegionKind::Cone:
            check_index(region.facet);
            for (const auto& s : cp.outer_facets()[region.facet].cone_simplices) {
                total += integrate_simplex(f, s);
                any = true;
            }
            break;
        case RegionKind::Facet:
            check_index(region.facet);
            for (const auto& s : cp.outer_facets()[region.facet].simplices) {
                total += integrate_facet_simplex(f, s);
                any = true;
            }
            break;
    }
    if (!any) throw Error("polyint", "RegionEmpty", "region has no simplices");
    return total;
}

Rational integrate(const Polynomial& f, const ChamberPolytope& cp, const Region& region) {
    return integrate(Integrand::from_polynomial(f), cp, region);
}

Rational integrate_chamber_pulling(const Integrand& f, const ChamberPolytope& cp) {
    if (cp.interior_simplices().empty()) throw Error("polyint", "RegionEmpty", "chamber has no simplices");
    Rational total = 0;
    for (const auto& s : cp.interior_simplices()) total += integrate_simplex(f, s);
    return total;
}

double facet_area(const ChamberPolytope& cp, std::size_t a) {
    const auto& of = cp.outer_facets().at(a);
    Rational mass = 0;
    for (const auto& s : of.simplices) mass += facet_cone_mass(s);
    // ⟨y,ν⟩ = λ / |u|_* on the facet hyperplane, |u|_*² = uᵀG⁻¹u.
    RMat ginv = *inverse(cp.roots().gram());
    double dual = std::sqrt(dot(of.u, ginv * of.u).get_d());
    return mass.get_d() * dual / of.lambda.get_d();
}

}  // namespace gcstab
