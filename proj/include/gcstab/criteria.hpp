#pragma once

#include "gcstab/integrate.hpp"
#include "gcstab/pl_function.hpp"
#include "gcstab/polytope.hpp"
#include "gcstab/rootdata.hpp"

#include <optional>
#include <string>
#include <vector>

namespace gcstab {

/// Λ_A = (2/λ_A)(1 + 2ρ·u_A) for every outer facet, in outer-facet order.
std::vector<Rational> lambdas(const ChamberPolytope& cp);

/// Exact integrals every criterion is assembled from.
struct ChamberMoments {
    std::size_t n = 0;
    std::vector<Rational> Lambda;
    std::vector<Rational> cone_pi;   // ∫_{E_A} π
    std::vector<RVec> cone_ypi;      // ∫_{E_A} y π
    Rational V;                      // ∫_{2P₊} π
    RVec ypi;                        // ∫_{2P₊} y π
    Rational weighted_pi;            // Σ_A Λ_A ∫_{E_A} π
    Rational Sbar;
    RVec bar;
    RVec bar_tilde;
};

/// Errors: criteria.ZeroVolume.
ChamberMoments chamber_moments(const ChamberPolytope& cp);

/// S̄ = n Σ_A Λ_A ∫_{E_A}π / ∫_{2P₊}π.
Rational sbar(const ChamberPolytope& cp);

struct Barycenters {
    RVec bar;
    RVec bar_tilde;
};
Barycenters barycenters(const ChamberPolytope& cp);

/// λ_A = 2(1 + 2ρ·u_A) on every outer facet.
bool fano_normalized(const ChamberPolytope& cp);

/// 𝔞*_t-component of bar~ − n/(n+1)·bar.
RVec futaki_toric_vector(const ChamberPolytope& cp, const ChamberMoments& m);
/// F(v) = ℒ(l_v)/V for a toric weight v. Errors: criteria.NotToricDirection.
Rational futaki(const ChamberPolytope& cp, const ChamberMoments& m, const RVec& v);

/// ℒ(u) by integrating the cone form over every E_A region by region.
Rational linear_functional(const ChamberPolytope& cp, const ChamberMoments& m, const PLConvexFunction& u);
/// ℒ(u) through the boundary form:
/// Σ_A (2/λ_A) ∫_{F_A} ⟨y,ν⟩ u π dσ₀ − S̄ ∫ u π + 4 ∫ (ρ·∇π) u.
Rational linear_functional_boundary(const ChamberPolytope& cp, const ChamberMoments& m, const PLConvexFunction& u);
/// ∫_{2P₊} ⟨y − 4ρ, ∇u⟩ π, equal to ℒ(u) when the polytope is Fano-normalized.
Rational linear_functional_fano(const ChamberPolytope& cp, const PLConvexFunction& u);
/// ℒ(f) for a polynomial f, exact.
Rational linear_functional(const ChamberPolytope& cp, const ChamberMoments& m, const Polynomial& f);

struct Destabilizer {
    std::string kind;  // "fundamental-weight" or "toric"
    std::size_t index = 0;
    RVec direction;  // ϖ_i or the toric weight v
    PLConvexFunction u;
    Rational L;
};

enum class KEVerdict { Yes, No, NotApplicable };
std::string to_string(KEVerdict v);

struct KEResult {
    KEVerdict verdict = KEVerdict::NotApplicable;
    bool fano_normalized = false;
    RVec bar_minus_4rho;
    MembershipCertificate certificate;
    std::optional<Destabilizer> destabilizer;
};

KEResult verdict_ke_fano(const ChamberPolytope& cp, const ChamberMoments& m);

enum class ProperVerdict { Proper, Inconclusive };
std::string to_string(ProperVerdict v);

struct ProperResult {
    ProperVerdict verdict = ProperVerdict::Inconclusive;
    bool tildebar1 = false;
    bool tildebar2 = false;
    bool barS = false;
    bool futaki_vanishes = false;
    Rational min_Lambda;
    Rational barS_margin;  // (n+1)·min Λ − S̄
};

ProperResult verdict_properness(const ChamberPolytope& cp, const ChamberMoments& m);

/// W-invariant PL witness with ℒ ≤ 0 when bar − 4ρ ∉ Ξ (Fano-normalized input only).
std::optional<Destabilizer> destabilizer(const ChamberPolytope& cp, const ChamberMoments& m);

struct AnalysisReport {
    ChamberMoments moments;
    RVec rho;
    RVec futaki_toric_vector;
    bool fano_normalized = false;
    bool bar_condition = false;
    bool futaki_vanishes = false;
    KEResult ke;
    ProperResult proper;
    std::vector<std::string> warnings;
};

AnalysisReport analyze(const ChamberPolytope& cp);

}  // namespace gcstab
