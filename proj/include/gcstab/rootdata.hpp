#pragma once

#include "gcstab/rational.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace gcstab {

/// Root datum of a reductive group in a single rational chart on the weight
/// space. Weights (roots, rho, barycenters) are column vectors; the scalar
/// product is y^T G z. Covectors (facet normals, gradients of functions of y)
/// pair with weights through the plain coordinate sum.
class RootSystem {
public:
    std::size_t rank() const { return rank_; }
    const RMat& gram() const { return gram_; }
    const std::vector<RVec>& simple_roots() const { return simple_; }
    const std::vector<RVec>& positive_roots() const { return positive_; }
    const RVec& rho() const { return rho_; }
    const std::vector<RMat>& weyl_group() const { return weyl_; }
    const std::vector<RVec>& ss_basis() const { return simple_; }
    const std::vector<RVec>& t_basis() const { return t_basis_; }
    const std::string& cartan_type() const { return cartan_type_; }

    /// Complex dimension of the group: r + 2|Φ₊|.
    std::size_t n() const { return rank_ + 2 * positive_.size(); }
    std::size_t semisimple_rank() const { return simple_.size(); }
    std::size_t toric_rank() const { return rank_ - simple_.size(); }

    Rational inner(const RVec& a, const RVec& b) const;
    /// G·v: the covector y ↦ ⟨v, y⟩.
    RVec covector(const RVec& v) const;
    /// Reflection in the i-th simple root, acting on weights.
    RMat simple_reflection(std::size_t i) const;
    RMat reflection(const RVec& alpha) const;

    /// Decomposes v = v_t + v_ss with v_ss in span(Φ₊) and v_t gram-orthogonal to it.
    std::pair<RVec, RVec> split(const RVec& v) const;
    /// Coefficients c with v_ss = Σ c_i α_(i).
    RVec simple_root_coefficients(const RVec& v) const;
    /// ϖ_i in span(Φ₊) with 2⟨ϖ_i, α_(j)⟩ / |α_(j)|² = δ_ij.
    std::vector<RVec> fundamental_weights() const;
    /// Basis of covectors c with α·c = 0 for every root (the toric directions of 𝔞).
    std::vector<RVec> toric_covector_basis() const;
    RVec dominant_representative(const RVec& v) const;

    friend RootSystem build_root_system(std::size_t, const RMat&, const std::vector<RVec>&, std::size_t);
    friend RootSystem cartan_root_system(const std::string&, std::size_t);

private:
    std::size_t rank_ = 0;
    RMat gram_;
    std::vector<RVec> simple_;
    std::vector<RVec> positive_;
    RVec rho_;
    std::vector<RMat> weyl_;
    std::vector<RVec> t_basis_;
    std::string cartan_type_;
    RMat simple_gram_inverse_;  // inverse of (⟨α_i, α_j⟩)
};

inline constexpr std::size_t kDefaultWeylCap = 1000000;

/// Errors: rootdata.DegenerateGram, rootdata.DependentSimpleRoots,
/// rootdata.NonCrystallographic, rootdata.WeylGroupTooLarge.
RootSystem build_root_system(std::size_t rank, const RMat& gram, const std::vector<RVec>& simple_roots,
                             std::size_t weyl_cap = kDefaultWeylCap);

/// Root system of a Cartan type ("A2", "B3", "G2", ...) with long roots of
/// squared length 2, extended by `toric_rank` gram-orthonormal toric directions.
/// Simple roots are the first coordinate vectors.
RootSystem cartan_root_system(const std::string& type, std::size_t toric_rank = 0);

/// Order of the Weyl group of an irreducible Cartan type by the product formula.
std::size_t weyl_order_formula(const std::string& type);

enum class MembershipMode { InteriorXi, ClosureXi, Dominant };

struct MembershipCertificate {
    bool member = false;
    MembershipMode mode = MembershipMode::InteriorXi;
    /// Simple-root coefficients (Xi modes) or pairings ⟨v, α⟩ over Φ₊ (dominant mode).
    RVec coefficients;
    RVec toric_component;
    std::optional<std::size_t> violated_index;
    std::string reason;
};

MembershipCertificate chamber_membership(const RootSystem& rs, const RVec& v, MembershipMode mode);

}  // namespace gcstab
