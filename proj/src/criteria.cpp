#include "gcstab/criteria.hpp"

#include "gcstab/error.hpp"
#include "gcstab/parallel.hpp"

#include <algorithm>

namespace gcstab {

std::vector<Rational> lambdas(const ChamberPolytope& cp) {
    const RVec& rho = cp.roots().rho();
    std::vector<Rational> out;
    for (const auto& f : cp.outer_facets()) out.push_back(2 / f.lambda * (1 + 2 * dot(rho, f.u)));
    return out;
}

namespace {

LinearForm coordinate(std::size_t r, std::size_t i) {
    RVec a = zeros(r);
    a[i] = 1;
    return {a, 0};
}

Rational sum_in_order(const std::vector<Rational>& parts) {
    Rational s = 0;
    for (const auto& p : parts) s += p;
    return s;
}

}  // namespace

ChamberMoments chamber_moments(const ChamberPolytope& cp) {
    ChamberMoments m;
    const std::size_t r = cp.rank();
    m.n = cp.roots().n();
    m.Lambda = lambdas(cp);
    const Integrand pi = pi_integrand(cp);
    const std::size_t na = cp.outer_facets().size();
    m.V = 0;
    m.ypi = zeros(r);
    m.weighted_pi = 0;
    RVec weighted_y = zeros(r);
    for (std::size_t a = 0; a < na; ++a) {
        m.cone_pi.push_back(integrate(pi, cp, Region::cone(a)));
        RVec y(r);
        for (std::size_t i = 0; i < r; ++i) y[i] = integrate(pi * coordinate(r, i), cp, Region::cone(a));
        m.cone_ypi.push_back(y);
        m.V += m.cone_pi[a];
        m.ypi = m.ypi + y;
        m.weighted_pi += m.Lambda[a] * m.cone_pi[a];
        weighted_y = weighted_y + m.Lambda[a] * y;
    }
    if (sgn(m.V) == 0) throw Error("criteria", "ZeroVolume", "weighted volume of the chamber polytope is zero");
    if (sgn(m.weighted_pi) == 0)
        throw Error("criteria", "ZeroVolume", "Lambda-weighted volume of the chamber polytope is zero");
    m.bar = (1 / m.V) * m.ypi;
    m.bar_tilde = (1 / m.weighted_pi) * weighted_y;
    m.Sbar = Rational(static_cast<long>(m.n)) * m.weighted_pi / m.V;
    return m;
}

Rational sbar(const ChamberPolytope& cp) { return chamber_moments(cp).Sbar; }

Barycenters barycenters(const ChamberPolytope& cp) {
    auto m = chamber_moments(cp);
    return {m.bar, m.bar_tilde};
}

bool fano_normalized(const ChamberPolytope& cp) {
    const RVec& rho = cp.roots().rho();
    for (const auto& f : cp.outer_facets())
        if (f.lambda != 2 * (1 + 2 * dot(rho, f.u))) return false;
    return true;
}

RVec futaki_toric_vector(const ChamberPolytope& cp, const ChamberMoments& m) {
    Rational n = static_cast<long>(m.n);
    return cp.roots().split(m.bar_tilde - (n / (n + 1)) * m.bar).first;
}

Rational futaki(const ChamberPolytope& cp, const ChamberMoments& m, const RVec& v) {
    const auto& rs = cp.roots();
    if (!is_zero(rs.split(v).second))
        throw Error("criteria", "NotToricDirection", "futaki direction has a semisimple component");
    Rational n = static_cast<long>(m.n);
    RVec d = m.bar_tilde - (n / (n + 1)) * m.bar;
    return (n + 1) * m.weighted_pi * rs.inner(d, v) / m.V;
}

Rational linear_functional(const ChamberPolytope& cp, const ChamberMoments& m, const PLConvexFunction& u) {
    const Integrand pi = pi_integrand(cp);
    const RVec& rho = cp.roots().rho();
    const Rational n = static_cast<long>(m.n);
    const auto cones = cp.all_cone_simplices();
    auto parts = parallel_map(cones.size(), [&](std::size_t i) -> Rational {
        const auto& [a, s] = cones[i];
        const Rational& L = m.Lambda[a];
        Rational total = 0;
        for (const auto& [k, t] : u.regions(s)) {
            const auto& p = u.pieces()[k];
            // (Λ y − 4ρ)·w + (Λ n − S̄)(w·y + b)
            LinearForm f{(L + L * n - m.Sbar) * p.w, -4 * dot(rho, p.w) + (L * n - m.Sbar) * p.b};
            total += integrate_simplex(pi * f, t);
        }
        return total;
    });
    return sum_in_order(parts);
}

Rational linear_functional_boundary(const ChamberPolytope& cp, const ChamberMoments& m, const PLConvexFunction& u) {
    const Integrand pi = pi_integrand(cp);
    const Integrand rho_dpi = rho_dpi_integrand(cp);
    std::vector<std::pair<Rational, Simplex>> facet_jobs;
    for (const auto& of : cp.outer_facets())
        for (const auto& s : of.simplices) facet_jobs.emplace_back(2 / of.lambda, s);
    auto boundary = parallel_map(facet_jobs.size(), [&](std::size_t i) -> Rational {
        const auto& [coef, s] = facet_jobs[i];
        Rational total = 0;
        for (const auto& [k, t] : u.regions(s)) {
            const auto& p = u.pieces()[k];
            total += integrate_facet_simplex(pi * LinearForm{p.w, p.b}, t);
        }
        return coef * total;
    });
    const auto& interior = cp.interior_simplices();
    auto bulk = parallel_map(interior.size(), [&](std::size_t i) -> Rational {
        Rational total = 0;
        for (const auto& [k, t] : u.regions(interior[i])) {
            const auto& p = u.pieces()[k];
            LinearForm uf{p.w, p.b};
            total += integrate_simplex((pi.scaled(-m.Sbar) + rho_dpi.scaled(4)) * uf, t);
        }
        return total;
    });
    return sum_in_order(boundary) + sum_in_order(bulk);
}

Rational linear_functional_fano(const ChamberPolytope& cp, const PLConvexFunction& u) {
    const Integrand pi = pi_integrand(cp);
    const RVec& rho = cp.roots().rho();
    const auto cones = cp.all_cone_simplices();
    auto parts = parallel_map(cones.size(), [&](std::size_t i) -> Rational {
        Rational total = 0;
        for (const auto& [k, t] : u.regions(cones[i].second)) {
            const auto& p = u.pieces()[k];
            total += integrate_simplex(pi * LinearForm{p.w, -4 * dot(rho, p.w)}, t);
        }
        return total;
    });
    return sum_in_order(parts);
}

Rational linear_functional(const ChamberPolytope& cp, const ChamberMoments& m, const Polynomial& f) {
    const std::size_t r = cp.rank();
    const RVec& rho = cp.roots().rho();
    const Integrand pi = pi_integrand(cp);
    const Rational n = static_cast<long>(m.n);
    std::vector<Polynomial> grad;
    for (std::size_t i = 0; i < r; ++i) grad.push_back(f.derivative(i));
    Rational total = 0;
    for (std::size_t a = 0; a < cp.outer_facets().size(); ++a) {
        const Rational& L = m.Lambda[a];
        Polynomial g = (L * n - m.Sbar) * f;
        for (std::size_t i = 0; i < r; ++i) {
            RVec coef = zeros(r);
            coef[i] = L;
            g += Polynomial::linear(coef, -4 * rho[i]) * grad[i];
        }
        total += integrate(Integrand::from_polynomial(g) * pi, cp, Region::cone(a));
    }
    return total;
}

std::string to_string(KEVerdict v) {
    switch (v) {
        case KEVerdict::Yes: return "yes";
        case KEVerdict::No: return "no";
        default: return "not-applicable";
    }
}

std::string to_string(ProperVerdict v) { return v == ProperVerdict::Proper ? "yes" : "inconclusive"; }

std::optional<Destabilizer> destabilizer(const ChamberPolytope& cp, const ChamberMoments& m) {
    if (!fano_normalized(cp)) return std::nullopt;
    const auto& rs = cp.roots();
    const RVec d = m.bar - Rational(4) * rs.rho();
    auto cert = chamber_membership(rs, d, MembershipMode::InteriorXi);
    if (cert.member) return std::nullopt;
    auto [vt, vss] = rs.split(d);
    RVec coeffs = rs.simple_root_coefficients(vss);
    auto fw = rs.fundamental_weights();
    for (std::size_t i = 0; i < coeffs.size(); ++i) {
        if (sgn(coeffs[i]) > 0) continue;
        auto u = PLConvexFunction::w_symmetrized(rs, {AffinePiece{rs.covector(fw[i]), 0}});
        Rational L = linear_functional(cp, m, u);
        return Destabilizer{"fundamental-weight", i, fw[i], u, L};
    }
    // Only the toric component is off: ℒ(l_v) = V·|v|² along v = d_t, so use −l_v.
    RVec v = Rational(-1) * vt;
    auto u = PLConvexFunction::from_weight(rs, v);
    Rational L = linear_functional(cp, m, u);
    return Destabilizer{"toric", 0, v, u, L};
}

KEResult verdict_ke_fano(const ChamberPolytope& cp, const ChamberMoments& m) {
    KEResult out;
    const auto& rs = cp.roots();
    out.fano_normalized = fano_normalized(cp);
    out.bar_minus_4rho = m.bar - Rational(4) * rs.rho();
    out.certificate = chamber_membership(rs, out.bar_minus_4rho, MembershipMode::InteriorXi);
    if (!out.fano_normalized) return out;
    out.verdict = out.certificate.member ? KEVerdict::Yes : KEVerdict::No;
    if (!out.certificate.member) out.destabilizer = destabilizer(cp, m);
    return out;
}

ProperResult verdict_properness(const ChamberPolytope& cp, const ChamberMoments& m) {
    ProperResult out;
    const auto& rs = cp.roots();
    out.min_Lambda = *std::min_element(m.Lambda.begin(), m.Lambda.end());
    const RVec bt_ss = rs.split(m.bar_tilde).second;
    const RVec bar_ss = rs.split(m.bar).second;
    out.tildebar1 =
        chamber_membership(rs, out.min_Lambda * bt_ss - Rational(4) * rs.rho(), MembershipMode::InteriorXi).member;
    out.tildebar2 = chamber_membership(rs, bt_ss - bar_ss, MembershipMode::ClosureXi).member;
    out.barS_margin = Rational(static_cast<long>(m.n) + 1) * out.min_Lambda - m.Sbar;
    out.barS = sgn(out.barS_margin) > 0;
    out.futaki_vanishes = is_zero(futaki_toric_vector(cp, m));
    bool all = out.tildebar1 && out.tildebar2 && out.barS && out.futaki_vanishes;
    out.verdict = all ? ProperVerdict::Proper : ProperVerdict::Inconclusive;
    return out;
}

AnalysisReport analyze(const ChamberPolytope& cp) {
    AnalysisReport rep;
    rep.moments = chamber_moments(cp);
    rep.rho = cp.roots().rho();
    rep.fano_normalized = fano_normalized(cp);
    rep.futaki_toric_vector = futaki_toric_vector(cp, rep.moments);
    rep.futaki_vanishes = is_zero(rep.futaki_toric_vector);
    rep.ke = verdict_ke_fano(cp, rep.moments);
    rep.bar_condition = rep.ke.certificate.member;
    rep.proper = verdict_properness(cp, rep.moments);
    if (cp.roots().positive_roots().empty())
        rep.warnings.push_back(
            "no roots: Xi is taken to be {0}, so bar - 4rho in Xi reads bar = 0 and tildebar1 reads bar_tilde_ss = 0");
    if (!rep.fano_normalized) rep.warnings.push_back("polytope is not Fano-normalized: KE verdict not applicable");
    return rep;
}

}  // namespace gcstab
