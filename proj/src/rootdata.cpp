#include "gcstab/rootdata.hpp"

#include "gcstab/error.hpp"

#include <algorithm>
#include <deque>
#include <set>

namespace gcstab {

Rational RootSystem::inner(const RVec& a, const RVec& b) const { return dot(a, gram_ * b); }

RVec RootSystem::covector(const RVec& v) const { return gram_ * v; }

RMat RootSystem::reflection(const RVec& alpha) const {
    // s(y) = y - 2⟨α,y⟩/⟨α,α⟩ α
    RVec ga = covector(alpha);
    Rational f = Rational(2) / dot(alpha, ga);
    RMat s = RMat::identity(rank_);
    for (std::size_t i = 0; i < rank_; ++i)
        for (std::size_t j = 0; j < rank_; ++j) s(i, j) -= f * alpha[i] * ga[j];
    return s;
}

RMat RootSystem::simple_reflection(std::size_t i) const { return reflection(simple_.at(i)); }

RVec RootSystem::simple_root_coefficients(const RVec& v) const {
    const std::size_t k = simple_.size();
    RVec pairings(k);
    for (std::size_t i = 0; i < k; ++i) pairings[i] = inner(simple_[i], v);
    return k == 0 ? RVec{} : simple_gram_inverse_ * pairings;
}

std::pair<RVec, RVec> RootSystem::split(const RVec& v) const {
    RVec c = simple_root_coefficients(v);
    RVec ss = zeros(rank_);
    for (std::size_t i = 0; i < c.size(); ++i) ss = ss + c[i] * simple_[i];
    return {v - ss, ss};
}

std::vector<RVec> RootSystem::fundamental_weights() const {
    const std::size_t k = simple_.size();
    std::vector<RVec> out;
    for (std::size_t i = 0; i < k; ++i) {
        RVec rhs = zeros(k);
        rhs[i] = inner(simple_[i], simple_[i]) / 2;
        RVec c = simple_gram_inverse_ * rhs;
        RVec w = zeros(rank_);
        for (std::size_t j = 0; j < k; ++j) w = w + c[j] * simple_[j];
        out.push_back(std::move(w));
    }
    return out;
}

std::vector<RVec> RootSystem::toric_covector_basis() const {
    if (simple_.empty()) {
        std::vector<RVec> basis;
        for (std::size_t i = 0; i < rank_; ++i) {
            RVec e = zeros(rank_);
            e[i] = 1;
            basis.push_back(e);
        }
        return basis;
    }
    return nullspace(RMat::from_rows(simple_, rank_));
}

RVec RootSystem::dominant_representative(const RVec& v) const {
    RVec cur = v;
    for (bool changed = true; changed;) {
        changed = false;
        for (std::size_t i = 0; i < simple_.size(); ++i) {
            if (sgn(inner(cur, simple_[i])) < 0) {
                cur = simple_reflection(i) * cur;
                changed = true;
            }
        }
    }
    return cur;
}

namespace {

bool positive_definite(const RMat& g) {
    for (std::size_t k = 1; k <= g.rows(); ++k) {
        RMat minor(k, k);
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = 0; j < k; ++j) minor(i, j) = g(i, j);
        if (sgn(determinant(minor)) <= 0) return false;
    }
    return true;
}

}  // namespace

RootSystem build_root_system(std::size_t rank, const RMat& gram, const std::vector<RVec>& simple_roots,
                             std::size_t weyl_cap) {
    if (rank == 0) throw Error("rootdata", "DegenerateGram", "rank must be positive");
    if (gram.rows() != rank || gram.cols() != rank)
        throw Error("rootdata", "DegenerateGram", "gram must be rank x rank");
    for (std::size_t i = 0; i < rank; ++i)
        for (std::size_t j = 0; j < i; ++j)
            if (gram(i, j) != gram(j, i)) throw Error("rootdata", "DegenerateGram", "gram is not symmetric");
    if (!positive_definite(gram)) throw Error("rootdata", "DegenerateGram", "gram is not positive definite");
    for (const auto& a : simple_roots)
        if (a.size() != rank) throw Error("rootdata", "DependentSimpleRoots", "simple root has wrong length");
    RootSystem rs;
    rs.rank_ = rank;
    rs.gram_ = gram;
    rs.simple_ = simple_roots;
    const std::size_t k = simple_roots.size();
    if (k > 0 && gcstab::rank(RMat::from_rows(simple_roots, rank)) != k)
        throw Error("rootdata", "DependentSimpleRoots", "simple roots are linearly dependent");

    RMat b(k, k);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) b(i, j) = rs.inner(simple_roots[i], simple_roots[j]);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) {
            if (i == j) continue;
            Rational a = 2 * b(i, j) / b(j, j);
            if (a.get_den() != 1 || sgn(a) > 0)
                throw Error("rootdata", "NonCrystallographic",
                            "Cartan entry (" + std::to_string(i) + "," + std::to_string(j) + ") = " + a.get_str());
        }
    if (k > 0) rs.simple_gram_inverse_ = *inverse(b);

    // Weyl group by breadth-first closure under left multiplication by generators.
    std::vector<RMat> gens;
    for (std::size_t i = 0; i < k; ++i) gens.push_back(rs.simple_reflection(i));
    std::set<RMat> seen;
    std::deque<RMat> queue;
    RMat id = RMat::identity(rank);
    seen.insert(id);
    queue.push_back(id);
    rs.weyl_.push_back(id);
    while (!queue.empty()) {
        RMat w = queue.front();
        queue.pop_front();
        for (const auto& s : gens) {
            RMat sw = s * w;
            if (seen.insert(sw).second) {
                if (seen.size() > weyl_cap)
                    throw Error("rootdata", "WeylGroupTooLarge",
                                "Weyl group exceeds cap of " + std::to_string(weyl_cap) + " elements");
                rs.weyl_.push_back(sw);
                queue.push_back(sw);
            }
        }
    }

    // All roots are the orbit of the simple roots under simple reflections.
    std::set<RVec> roots(simple_roots.begin(), simple_roots.end());
    std::deque<RVec> rq(simple_roots.begin(), simple_roots.end());
    while (!rq.empty()) {
        RVec a = rq.front();
        rq.pop_front();
        for (const auto& s : gens) {
            RVec sa = s * a;
            if (roots.insert(sa).second) rq.push_back(sa);
        }
    }
    struct Keyed {
        Rational height;
        RVec coeffs;
        RVec root;
    };
    std::vector<Keyed> pos;
    for (const auto& a : roots) {
        RVec c = rs.simple_root_coefficients(a);
        if (std::all_of(c.begin(), c.end(), [](const Rational& x) { return sgn(x) >= 0; })) {
            Rational h = 0;
            for (const auto& x : c) h += x;
            pos.push_back({h, c, a});
        }
    }
    std::sort(pos.begin(), pos.end(), [](const Keyed& x, const Keyed& y) {
        if (x.height != y.height) return x.height < y.height;
        return std::lexicographical_compare(y.coeffs.begin(), y.coeffs.end(), x.coeffs.begin(), x.coeffs.end());
    });
    rs.rho_ = zeros(rank);
    for (const auto& p : pos) {
        rs.positive_.push_back(p.root);
        rs.rho_ = rs.rho_ + p.root;
    }
    rs.rho_ = Rational(1, 2) * rs.rho_;

    if (k == 0) {
        rs.t_basis_ = rs.toric_covector_basis();
    } else {
        std::vector<RVec> rows;
        for (const auto& a : simple_roots) rows.push_back(rs.covector(a));
        rs.t_basis_ = nullspace(RMat::from_rows(rows, rank));
    }
    return rs;
}

namespace {

struct CartanSpec {
    char letter;
    std::size_t n;
};

CartanSpec parse_type(const std::string& type) {
    if (type.size() < 2) throw Error("rootdata", "UnknownCartanType", "bad Cartan type '" + type + "'");
    char letter = type[0];
    std::size_t n = 0;
    try {
        n = std::stoul(type.substr(1));
    } catch (...) {
        throw Error("rootdata", "UnknownCartanType", "bad Cartan type '" + type + "'");
    }
    bool ok = (letter == 'A' && n >= 1) || (letter == 'B' && n >= 2) || (letter == 'C' && n >= 2) ||
              (letter == 'D' && n >= 3) || (letter == 'G' && n == 2);
    if (!ok) throw Error("rootdata", "UnknownCartanType", "unsupported Cartan type '" + type + "'");
    return {letter, n};
}

}  // namespace

std::size_t weyl_order_formula(const std::string& type) {
    auto [letter, n] = parse_type(type);
    std::size_t fact = 1;
    for (std::size_t i = 2; i <= n; ++i) fact *= i;
    switch (letter) {
        case 'A': return fact * (n + 1);
        case 'B':
        case 'C': return fact << n;
        case 'D': return fact << (n - 1);
        default: return 12;
    }
}

RootSystem cartan_root_system(const std::string& type, std::size_t toric_rank) {
    auto [letter, n] = parse_type(type);
    // Squared lengths of the simple roots and inner products along the Dynkin diagram.
    std::vector<Rational> len2(n, Rational(2));
    if (letter == 'B') len2[n - 1] = 1;
    if (letter == 'C')
        for (std::size_t i = 0; i + 1 < n; ++i) len2[i] = 1;
    if (letter == 'G') len2[0] = Rational(2, 3);
    RMat b(n, n);
    for (std::size_t i = 0; i < n; ++i) b(i, i) = len2[i];
    auto link = [&](std::size_t i, std::size_t j, const Rational& v) {
        b(i, j) = v;
        b(j, i) = v;
    };
    if (letter == 'G') {
        link(0, 1, Rational(-1));
    } else if (letter == 'D') {
        for (std::size_t i = 0; i + 2 < n; ++i) link(i, i + 1, Rational(-1));
        link(n - 3, n - 1, Rational(-1));
    } else {
        // A_{ij} = -1 on the chain; ⟨α_i, α_j⟩ = -min(len²)/2 for simply-laced links,
        // and -1 on the double bond of B/C.
        for (std::size_t i = 0; i + 1 < n; ++i) {
            Rational m = std::min(len2[i], len2[i + 1]);
            link(i, i + 1, -m / 2 * (len2[i] == len2[i + 1] ? 1 : 2));
        }
    }
    const std::size_t r = n + toric_rank;
    RMat gram(r, r);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) gram(i, j) = b(i, j);
    for (std::size_t i = n; i < r; ++i) gram(i, i) = 1;
    std::vector<RVec> simple;
    for (std::size_t i = 0; i < n; ++i) {
        RVec e = zeros(r);
        e[i] = 1;
        simple.push_back(e);
    }
    RootSystem rs = build_root_system(r, gram, simple);
    rs.cartan_type_ = type;
    return rs;
}

MembershipCertificate chamber_membership(const RootSystem& rs, const RVec& v, MembershipMode mode) {
    MembershipCertificate cert;
    cert.mode = mode;
    if (mode == MembershipMode::Dominant) {
        cert.member = true;
        for (std::size_t i = 0; i < rs.positive_roots().size(); ++i) {
            Rational p = rs.inner(v, rs.positive_roots()[i]);
            cert.coefficients.push_back(p);
            if (sgn(p) < 0 && cert.member) {
                cert.member = false;
                cert.violated_index = i;
                cert.reason = "negative pairing with positive root " + std::to_string(i);
            }
        }
        return cert;
    }
    auto [vt, vss] = rs.split(v);
    cert.toric_component = vt;
    cert.coefficients = rs.simple_root_coefficients(vss);
    cert.member = true;
    for (std::size_t i = 0; i < cert.coefficients.size(); ++i) {
        int s = sgn(cert.coefficients[i]);
        bool bad = mode == MembershipMode::InteriorXi ? s <= 0 : s < 0;
        if (bad) {
            cert.member = false;
            cert.violated_index = i;
            cert.reason = "simple-root coefficient " + std::to_string(i) + " = " + cert.coefficients[i].get_str();
            break;
        }
    }
    if (cert.member && !is_zero(vt)) {
        cert.member = false;
        cert.reason = "nonzero toric component";
    }
    return cert;
}

}  // namespace gcstab
