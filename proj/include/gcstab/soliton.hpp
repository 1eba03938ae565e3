#pragma once

#include "gcstab/criteria.hpp"
#include "gcstab/quadrature.hpp"

#include <optional>
#include <string>
#include <vector>

namespace gcstab {

struct SolitonOptions {
    double tol = 1e-12;
    int max_iter = 100;
    /// Gauss-Legendre points per direction; 0 picks one from the degree of π.
    int order = 0;
    /// Starting coefficients along toric_covector_basis(); zero when absent.
    std::optional<std::vector<double>> start;
};

/// θ(y) = c·y + c0 with c a toric covector.
struct SolitonField {
    std::vector<double> c;       // covector, rank components
    std::vector<double> s;       // coordinates of c in toric_covector_basis()
    double c0 = 0;
    double normalization_residual = 0;  // |∫ θ π|
    double moment_residual = 0;         // max_v |⟨v, ∫ y e^θ π⟩| over the toric basis
    int iterations = 0;
    bool converged = false;
    std::vector<double> hessian_min_eigenvalue;  // one per Newton iterate
    int order = 0;
    double quadrature_error = 0;  // change of ∫ e^θ π under doubled order, relative
    double theta(const std::vector<double>& y) const;
};

/// Errors: none thrown; a non-converged run has converged = false and keeps
/// the best iterate.
SolitonField solve_soliton(const ChamberPolytope& cp, const ChamberMoments& m, const SolitonOptions& opt = {});

struct Estimate {
    double value = 0;
    double error = 0;
};

struct BarX {
    std::vector<double> value;
    double error = 0;  // max change under doubled order
};
BarX bar_X(const ChamberPolytope& cp, const SolitonField& S);

enum class SolitonVerdict { Yes, Marginal, No, NotApplicable };
std::string to_string(SolitonVerdict v);

struct SolitonVerdictResult {
    SolitonVerdict verdict = SolitonVerdict::NotApplicable;
    BarX bar_x;
    std::vector<double> coefficients;  // simple-root coefficients of (bar_X − 4ρ)_ss
    std::vector<double> toric;         // toric component of bar_X − 4ρ
    double margin = 0;                 // min coefficient, or −|toric| when roots are absent
    double tau = 0;                    // numeric threshold
};

SolitonVerdictResult verdict_soliton(const ChamberPolytope& cp, const SolitonField& S);

/// ℒ^X(u) = ∫ ⟨y − 4ρ, ∇u⟩ e^θ π by quadrature over the linearity regions.
Estimate modified_linear(const ChamberPolytope& cp, const SolitonField& S, const PLConvexFunction& u);

}  // namespace gcstab
