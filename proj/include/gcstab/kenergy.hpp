#pragma once

#include "gcstab/criteria.hpp"
#include "gcstab/polynomial.hpp"
#include "gcstab/soliton.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace gcstab {

/// Derivatives of a function of y, row-major flattened tensors.
struct Jet {
    int order = 0;
    double value = 0;
    std::vector<double> grad, hess, third, fourth;
    explicit Jet(std::size_t r = 0, int order = 2);
    void add(const Jet& o, double scale = 1);
};

/// u₀ = ½ Σ l log l over every facet of 2P.
class Guillemin {
public:
    explicit Guillemin(const Polytope& p);
    std::size_t rank() const { return r_; }
    std::size_t facets() const { return u_.size(); }
    const std::vector<std::vector<double>>& normals() const { return u_; }
    const std::vector<double>& lambdas() const { return lambda_; }
    /// Plain facet values λ − u·y.
    std::vector<double> l_values(const std::vector<double>& y) const;
    /// Jet from facet values (which may carry more accuracy than l_values).
    Jet jet(const std::vector<double>& l, int order) const;
    Jet jet_at(const std::vector<double>& y, int order) const { return jet(l_values(y), order); }

private:
    std::size_t r_ = 0;
    std::vector<std::vector<double>> u_;
    std::vector<double> lambda_;
};

/// χ(x) = −2 Σ log sinh α(x) for x in the open positive chamber of 𝔞.
class Chi {
public:
    explicit Chi(const RootSystem& rs);
    bool empty() const { return roots_.empty(); }
    /// Minimum of α(x) over positive roots (+∞ without roots).
    double min_root(const std::vector<double>& x) const;
    double value(const std::vector<double>& x) const;
    /// χ(x) + 4ρ·x, bounded as x → ∞ inside the chamber.
    double value_plus_4rho(const std::vector<double>& x) const;
    std::vector<double> grad(const std::vector<double>& x) const;
    /// ∇χ(x) + 4ρ, accurate for large α(x).
    std::vector<double> grad_plus_4rho(const std::vector<double>& x) const;
    std::vector<double> hess(const std::vector<double>& x) const;

private:
    std::size_t r_ = 0;
    std::vector<std::vector<double>> roots_;  // weight components
};

/// Shared polynomial basis with exact and compiled forms.
struct PolyBasis {
    std::vector<Polynomial> polys;
    std::vector<CompiledPolynomial> compiled;
    static std::shared_ptr<const PolyBasis> make(std::vector<Polynomial> polys, int max_order = 4);
};

/// W-invariant polynomials of degree min_degree..max_degree (Reynolds
/// operator on monomials, then an exact independent subset).
std::vector<Polynomial> invariant_basis(const RootSystem& rs, int max_degree, int min_degree = 2);

/// u = [u₀] + Σ c_k φ_k + a·y + b.
class SmoothCandidate {
public:
    SmoothCandidate() = default;
    static SmoothCandidate guillemin(const Polytope& p);
    /// A pure polynomial candidate (no Guillemin part).
    static SmoothCandidate polynomial(const Polynomial& p);
    static SmoothCandidate with_basis(std::optional<Guillemin> g, std::shared_ptr<const PolyBasis> basis,
                                      std::vector<double> coeffs);

    std::size_t rank() const { return r_; }
    const std::optional<Guillemin>& guillemin_part() const { return g_; }
    const std::shared_ptr<const PolyBasis>& basis() const { return basis_; }
    const std::vector<double>& coeffs() const { return coeffs_; }
    const std::vector<double>& affine_slope() const { return a_; }
    double affine_offset() const { return b_; }

    SmoothCandidate with_coeffs(std::vector<double> c) const;
    SmoothCandidate plus_affine(const std::vector<double>& a, double b) const;
    SmoothCandidate plus_constant(double b) const { return plus_affine(std::vector<double>(r_, 0.0), b); }

    /// Polynomial and affine part only.
    Jet smooth_jet(const std::vector<double>& y, int order) const;
    /// Full jet; `l` are facet values for the Guillemin part (computed from y when empty).
    Jet jet(const std::vector<double>& y, int order, const std::vector<double>& l = {}) const;

private:
    std::size_t r_ = 0;
    std::optional<Guillemin> g_;
    std::shared_ptr<const PolyBasis> basis_;
    std::vector<double> coeffs_;
    std::vector<double> a_;
    double b_ = 0;
};

struct KEnergyOptions {
    int level = 0;                    // tanh-sinh level on cone simplices; 0 picks one from the rank
    double wall_margin = 1e-6;        // times the polytope diameter
    double max_dropped_fraction = 0.01;
};

/// Quadrature nodes on the cone simplices of 2P₊ with accurate facet and wall values.
class KEnergyNodes {
public:
    KEnergyNodes(const ChamberPolytope& cp, int level, double wall_margin);
    struct Node {
        std::size_t cone;
        std::vector<double> y, l;
        double w;   // quadrature weight times π(y)
        bool near_wall;
    };
    const std::vector<Node>& nodes() const { return nodes_; }
    double total_mass() const { return total_; }

private:
    std::vector<Node> nodes_;
    double total_ = 0;
};

struct NValue {
    double value = 0;
    double error = 0;
    double dropped_fraction = 0;
};

/// 𝒩(u) = −∫ log det ∇²u π + ∫ [χ(∇u) + 4ρ·∇u] π.
/// Errors: kenergy.ChamberViolation, kenergy.NotConvexAtNodes.
NValue nonlinear_N(const ChamberPolytope& cp, const SmoothCandidate& u, const KEnergyOptions& opt = {});

struct KValue {
    double L = 0, N = 0, K = 0;
    double error = 0;
    double dropped_fraction = 0;
};

/// 𝒦 = ℒ + 𝒩. ℒ of the polynomial part is exact; the Guillemin part uses quadrature.
KValue kenergy_value(const ChamberPolytope& cp, const ChamberMoments& m, const SmoothCandidate& u,
                     const KEnergyOptions& opt = {});

/// 𝒦^X = ℒ^X + 𝒩^X with weight e^θ π, by quadrature throughout.
KValue modified_kenergy_value(const ChamberPolytope& cp, const ChamberMoments& m, const SolitonField& S,
                              const SmoothCandidate& u, const KEnergyOptions& opt = {});

/// d/dε 𝒩(u + εf) at ε = 0: −∫ u^{ij} f_ij π + ∫ (χ_i(∇u) + 4ρ_i) f_i π.
double nonlinear_N_variation(const ChamberPolytope& cp, const SmoothCandidate& u, const Polynomial& f,
                             const KEnergyOptions& opt = {});

/// The five terms of the scalar curvature in Legendre coordinates; S is their sum.
struct ScalarCurvature {
    double S = 0;
    double abreu = 0;       // −u^{ij}_{,ij}
    double mixed = 0;       // −2 u^{ij}_{,j} π_i/π
    double pi_term = 0;     // −u^{ij} π_ij/π
    double chi_hess = 0;    // −u_ik χ_ik(∇u)
    double chi_grad = 0;    // −χ_i(∇u) π_i/π
};

/// Errors: kenergy.WallTooClose, kenergy.SingularHessian.
ScalarCurvature scalar_curvature_at(const ChamberPolytope& cp, const SmoothCandidate& u, const std::vector<double>& y);

struct QDiagnostic {
    double direct = 0;    // −χ_i π_i/π − χ_ik u₀_ik − u₀^{ij} π_ij/π at ∇u₀
    double expanded = 0;  // sum of the I_α and I_{α,β} terms
};
/// Errors: kenergy.WallTooClose.
QDiagnostic q_diagnostic(const ChamberPolytope& cp, const std::vector<double>& y);

/// Inverse Hessian of u and its first derivatives at y: U (r×r) and dU (r×r×r, dU[(i r + j) r + k] = ∂_k U^{ij}).
struct InverseHessian {
    std::vector<double> U, dU;
};
InverseHessian inverse_hessian(const SmoothCandidate& u, const std::vector<double>& y);

struct MinimizeOptions {
    int degree = 2;
    int max_iter = 60;
    double tol = 1e-6;
    KEnergyOptions quad;
};

struct TraceEntry {
    int iter = 0;
    double K = 0;
    double grad_norm = 0;
    double step = 0;
};

struct MinimizeResult {
    SmoothCandidate u;        // normalized
    KValue value;             // best iterate before normalization
    KValue normalized_value;  // value of u
    KValue initial;           // value of u₀
    std::vector<TraceEntry> trace;
    bool converged = false;
    std::string note;
};

/// BFGS over the coefficients of u = u₀ + Σ c_k φ_k with φ_k W-invariant of
/// degree 2..d, then the normalization min ũ = ũ(O) = 0. A finite-dimensional
/// surrogate: the result is a local minimizer in that family.
/// Errors: kenergy.BarrierBreach (u₀ itself not admissible), kenergy.NoDescent.
MinimizeResult minimize_kenergy(const ChamberPolytope& cp, const ChamberMoments& m, const MinimizeOptions& opt = {});

/// ũ = u − ∇u(O)·y − u(O).
SmoothCandidate normalize(const SmoothCandidate& u);

int default_level(std::size_t rank);

}  // namespace gcstab
