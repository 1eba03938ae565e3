#include "gcstab/kenergy.hpp"

#include "gcstab/error.hpp"
#include "gcstab/integrate.hpp"
#include "gcstab/parallel.hpp"
#include "gcstab/quadrature.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

namespace gcstab {

namespace {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

Error kerr(const std::string& code, const std::string& msg) { return Error("kenergy", code, msg); }

std::string point_string(const std::vector<double>& y) {
    std::ostringstream s;
    s.precision(6);
    s << "(";
    for (std::size_t i = 0; i < y.size(); ++i) s << (i ? ", " : "") << y[i];
    s << ")";
    return s.str();
}

double dotd(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double det_small(std::size_t k, const std::vector<double>& m) {
    // m is k×k row-major
    switch (k) {
        case 0: return 1;
        case 1: return m[0];
        case 2: return m[0] * m[3] - m[1] * m[2];
        case 3:
            return m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) +
                   m[2] * (m[3] * m[7] - m[4] * m[6]);
        default: {
            Mat a(k, k);
            for (std::size_t i = 0; i < k; ++i)
                for (std::size_t j = 0; j < k; ++j) a(i, j) = m[i * k + j];
            return a.determinant();
        }
    }
}

template <class F>
void for_each_subset(std::size_t m, std::size_t k, F&& f) {
    std::vector<std::size_t> idx(k);
    for (std::size_t i = 0; i < k; ++i) idx[i] = i;
    if (k > m) return;
    while (true) {
        f(idx);
        if (k == 0) return;
        std::size_t i = k;
        while (i > 0 && idx[i - 1] == m - k + i - 1) --i;
        if (i == 0) return;
        ++idx[i - 1];
        for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
}

struct HessianFactor {
    double logdet = 0;
    std::vector<double> H;    // r×r
    std::vector<double> inv;  // r×r
    bool pd = false;
};

// H = Σ a_j v_j v_jᵀ. Facets close to zero are kept as separate rank-one
// terms; everything else is merged and split by eigenvectors. Determinant and
// adjugate then come from Cauchy-Binet sums whose dominant terms are positive.
HessianFactor factor_hessian(std::size_t r, const std::vector<double>& smooth_hess, const Guillemin* g,
                             const std::vector<double>& l) {
    HessianFactor out;
    Mat F(r, r);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < r; ++j) F(i, j) = smooth_hess[i * r + j];
    std::vector<std::vector<double>> vecs;
    std::vector<double> coef;
    if (g) {
        for (std::size_t k = 0; k < g->facets(); ++k) {
            const auto& u = g->normals()[k];
            double c = 0.5 / l[k];
            if (l[k] < 1e-3 * g->lambdas()[k]) {
                vecs.push_back(u);
                coef.push_back(c);
            } else {
                for (std::size_t i = 0; i < r; ++i)
                    for (std::size_t j = 0; j < r; ++j) F(i, j) += c * u[i] * u[j];
            }
        }
    }
    Eigen::SelfAdjointEigenSolver<Mat> es(F);
    for (std::size_t e = 0; e < r; ++e) {
        double mu = es.eigenvalues()(e);
        if (mu == 0) continue;
        std::vector<double> v(r);
        for (std::size_t i = 0; i < r; ++i) v[i] = es.eigenvectors()(i, e);
        vecs.push_back(std::move(v));
        coef.push_back(mu);
    }
    const std::size_t m = vecs.size();
    out.H.assign(r * r, 0.0);
    for (std::size_t t = 0; t < m; ++t)
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < r; ++j) out.H[i * r + j] += coef[t] * vecs[t][i] * vecs[t][j];

    double det = 0;
    std::vector<double> sub(r * r);
    for_each_subset(m, r, [&](const std::vector<std::size_t>& S) {
        double p = 1;
        for (std::size_t s = 0; s < r; ++s) {
            p *= coef[S[s]];
            for (std::size_t i = 0; i < r; ++i) sub[i * r + s] = vecs[S[s]][i];
        }
        double d = det_small(r, sub);
        det += p * d * d;
    });
    // adj(H)_{ij} = (−1)^{i+j} det H[without row j, without col i]
    std::vector<double> adj(r * r, 0.0);
    if (r == 1) {
        adj[0] = 1;
    } else {
        std::vector<double> sa((r - 1) * (r - 1)), sb((r - 1) * (r - 1));
        for_each_subset(m, r - 1, [&](const std::vector<std::size_t>& S) {
            double p = 1;
            for (std::size_t s : S) p *= coef[s];
            std::vector<double> minors(r);
            for (std::size_t drop = 0; drop < r; ++drop) {
                std::size_t row = 0;
                for (std::size_t i = 0; i < r; ++i) {
                    if (i == drop) continue;
                    for (std::size_t s = 0; s < r - 1; ++s) sa[row * (r - 1) + s] = vecs[S[s]][i];
                    ++row;
                }
                minors[drop] = det_small(r - 1, sa);
            }
            for (std::size_t i = 0; i < r; ++i)
                for (std::size_t j = 0; j < r; ++j) {
                    double sign = ((i + j) % 2) ? -1.0 : 1.0;
                    adj[i * r + j] += sign * p * minors[i] * minors[j];
                }
        });
    }
    if (r <= 3) {
        out.pd = det > 0;
        for (std::size_t i = 0; i < r; ++i) out.pd = out.pd && out.H[i * r + i] > 0 && adj[i * r + i] > 0;
    } else {
        Mat H(r, r);
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < r; ++j) H(i, j) = out.H[i * r + j];
        out.pd = det > 0 && H.llt().info() == Eigen::Success;
    }
    if (!out.pd) return out;
    out.logdet = std::log(det);
    out.inv.resize(r * r);
    for (std::size_t i = 0; i < r * r; ++i) out.inv[i] = adj[i] / det;
    return out;
}

struct RootData {
    std::vector<std::vector<double>> hat;  // covectors α̂
    std::vector<double> hat_norm;
    std::vector<double> rho;
};

RootData root_data(const ChamberPolytope& cp) {
    RootData d;
    for (const auto& a : cp.root_covectors()) {
        d.hat.push_back(to_double(a));
        d.hat_norm.push_back(std::sqrt(dotd(d.hat.back(), d.hat.back())));
    }
    d.rho = to_double(cp.roots().rho());
    return d;
}

// π_i/π and π_ij/π from the root values α(y).
void pi_log_derivatives(const RootData& rd, const std::vector<double>& ay, std::size_t r, std::vector<double>& p,
                        std::vector<double>& P) {
    p.assign(r, 0.0);
    P.assign(r * r, 0.0);
    for (std::size_t a = 0; a < rd.hat.size(); ++a)
        for (std::size_t i = 0; i < r; ++i) p[i] += 2 * rd.hat[a][i] / ay[a];
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < r; ++j) {
            double s = p[i] * p[j];
            for (std::size_t a = 0; a < rd.hat.size(); ++a) s -= 2 * rd.hat[a][i] * rd.hat[a][j] / (ay[a] * ay[a]);
            P[i * r + j] = s;
        }
}

// Checks the wall and facet margins at y; returns the root values α(y).
std::vector<double> checked_root_values(const ChamberPolytope& cp, const RootData& rd, const std::vector<double>& y) {
    const double delta = 1e-6 * cp.polytope().diameter();
    std::vector<double> ay;
    for (std::size_t a = 0; a < rd.hat.size(); ++a) {
        ay.push_back(dotd(rd.hat[a], y));
        if (ay.back() < delta * rd.hat_norm[a])
            throw kerr("WallTooClose", "point " + point_string(y) + " is within the wall margin");
    }
    for (const auto& f : cp.polytope().facets()) {
        double l = to_double(f.lambda) - dotd(to_double(f.u), y);
        if (l <= 0) throw kerr("WallTooClose", "point " + point_string(y) + " is not inside 2P");
    }
    return ay;
}

struct EvalSpec {
    bool L_guillemin_only = true;  // ℒ integrand from the Guillemin part only
    const SolitonField* soliton = nullptr;
    const std::vector<CompiledPolynomial>* variations = nullptr;
    double max_dropped = 0.01;
};

struct EvalResult {
    double L = 0, N = 0;
    double dropped = 0;
    std::vector<double> dN;
};

EvalResult evaluate(const ChamberPolytope& cp, const std::vector<double>& Lambda, double Sbar,
                    const KEnergyNodes& nodes, const SmoothCandidate& u, const EvalSpec& spec) {
    const std::size_t r = cp.rank();
    const double n = static_cast<double>(cp.roots().n());
    const Chi chi(cp.roots());
    const auto rho = to_double(cp.roots().rho());
    const auto& g = u.guillemin_part();
    const auto& all = nodes.nodes();
    const std::size_t nv = spec.variations ? spec.variations->size() : 0;
    constexpr std::size_t chunk = 1024;
    const std::size_t nchunks = (all.size() + chunk - 1) / chunk;

    struct Partial {
        long double L = 0, N = 0, dropped = 0;
        std::vector<long double> dN;
    };
    auto parts = parallel_map(nchunks, [&](std::size_t c) -> Partial {
        Partial p;
        p.dN.assign(nv, 0.0L);
        std::vector<double> gv(r), hv(r * r);
        for (std::size_t q = c * chunk; q < std::min(all.size(), (c + 1) * chunk); ++q) {
            const auto& nd = all[q];
            if (nd.near_wall) {
                p.dropped += nd.w;
                continue;
            }
            Jet sm = u.smooth_jet(nd.y, 2);
            Jet full = sm;
            Jet gj(r, 2);
            if (g) {
                gj = g->jet(nd.l, 2);
                full.add(gj);
            }
            const auto& x = full.grad;
            if (!chi.empty() && !(chi.min_root(x) > 0)) {
                p.dropped += nd.w;
                continue;
            }
            auto fac = factor_hessian(r, sm.hess, g ? &*g : nullptr, nd.l);
            if (!fac.pd) throw kerr("NotConvexAtNodes", "Hessian not positive definite at " + point_string(nd.y));
            double w = nd.w;
            if (spec.soliton) w *= std::exp(spec.soliton->theta(nd.y));
            double chi_part = chi.empty() ? 0.0 : chi.value_plus_4rho(x);
            p.N += w * (-fac.logdet + chi_part);
            const Jet& lj = spec.L_guillemin_only ? gj : full;
            if (!spec.L_guillemin_only || g) {
                double Lam = Lambda[nd.cone];
                p.L += w * (Lam * dotd(nd.y, lj.grad) - 4 * dotd(rho, lj.grad) + (Lam * n - Sbar) * lj.value);
            }
            if (nv) {
                auto cg = chi.empty() ? std::vector<double>(r, 0.0) : chi.grad_plus_4rho(x);
                for (std::size_t k = 0; k < nv; ++k) {
                    const auto& f = (*spec.variations)[k];
                    f.gradient(nd.y.data(), gv.data());
                    f.hessian(nd.y.data(), hv.data());
                    double s = 0;
                    for (std::size_t i = 0; i < r * r; ++i) s -= fac.inv[i] * hv[i];
                    for (std::size_t i = 0; i < r; ++i) s += cg[i] * gv[i];
                    p.dN[k] += w * s;
                }
            }
        }
        return p;
    });
    long double L = 0, N = 0, dropped = 0;
    std::vector<long double> dN(nv, 0.0L);
    for (const auto& p : parts) {
        L += p.L;
        N += p.N;
        dropped += p.dropped;
        for (std::size_t k = 0; k < nv; ++k) dN[k] += p.dN[k];
    }
    EvalResult out;
    out.L = static_cast<double>(L);
    out.N = static_cast<double>(N);
    out.dropped = nodes.total_mass() > 0 ? static_cast<double>(dropped) / nodes.total_mass() : 0.0;
    for (auto v : dN) out.dN.push_back(static_cast<double>(v));
    if (out.dropped > spec.max_dropped) {
        std::ostringstream s;
        s << "dropped mass fraction " << out.dropped << " exceeds " << spec.max_dropped;
        throw kerr("ChamberViolation", s.str());
    }
    return out;
}

std::vector<double> lambdas_d(const ChamberMoments& m) {
    std::vector<double> out;
    for (const auto& x : m.Lambda) out.push_back(to_double(x));
    return out;
}

// ℒ of the polynomial and affine parts, exactly per basis element.
double polynomial_L(const ChamberPolytope& cp, const ChamberMoments& m, const SmoothCandidate& u) {
    const std::size_t r = cp.rank();
    double s = 0;
    if (u.basis())
        for (std::size_t k = 0; k < u.coeffs().size(); ++k)
            if (u.coeffs()[k] != 0) s += u.coeffs()[k] * to_double(linear_functional(cp, m, u.basis()->polys[k]));
    for (std::size_t i = 0; i < r; ++i)
        if (u.affine_slope()[i] != 0)
            s += u.affine_slope()[i] * to_double(linear_functional(cp, m, Polynomial::variable(r, i)));
    if (u.affine_offset() != 0)
        s += u.affine_offset() * to_double(linear_functional(cp, m, Polynomial::constant(r, 1)));
    return s;
}

}  // namespace

int default_level(std::size_t rank) { return rank <= 1 ? 5 : (rank == 2 ? 3 : 2); }

Jet::Jet(std::size_t r, int ord) : order(ord), grad(r, 0.0), hess(r * r, 0.0) {
    if (ord >= 3) third.assign(r * r * r, 0.0);
    if (ord >= 4) fourth.assign(r * r * r * r, 0.0);
}

void Jet::add(const Jet& o, double s) {
    value += s * o.value;
    for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += s * o.grad[i];
    for (std::size_t i = 0; i < hess.size(); ++i) hess[i] += s * o.hess[i];
    for (std::size_t i = 0; i < std::min(third.size(), o.third.size()); ++i) third[i] += s * o.third[i];
    for (std::size_t i = 0; i < std::min(fourth.size(), o.fourth.size()); ++i) fourth[i] += s * o.fourth[i];
}

Guillemin::Guillemin(const Polytope& p) : r_(p.rank()) {
    for (const auto& f : p.facets()) {
        u_.push_back(to_double(f.u));
        lambda_.push_back(to_double(f.lambda));
    }
}

std::vector<double> Guillemin::l_values(const std::vector<double>& y) const {
    std::vector<double> l(u_.size());
    for (std::size_t k = 0; k < u_.size(); ++k) l[k] = lambda_[k] - dotd(u_[k], y);
    return l;
}

Jet Guillemin::jet(const std::vector<double>& l, int order) const {
    const std::size_t r = r_;
    Jet j(r, order);
    for (std::size_t k = 0; k < u_.size(); ++k) {
        const auto& u = u_[k];
        const double lk = l[k];
        const double lg = std::log(lk);
        j.value += lk > 0 ? 0.5 * lk * lg : 0.0;
        for (std::size_t i = 0; i < r; ++i) j.grad[i] -= 0.5 * (lg + 1) * u[i];
        const double h = 0.5 / lk;
        for (std::size_t a = 0; a < r; ++a)
            for (std::size_t b = 0; b < r; ++b) j.hess[a * r + b] += h * u[a] * u[b];
        if (order >= 3) {
            const double t = 0.5 / (lk * lk);
            for (std::size_t a = 0; a < r; ++a)
                for (std::size_t b = 0; b < r; ++b)
                    for (std::size_t c = 0; c < r; ++c) j.third[(a * r + b) * r + c] += t * u[a] * u[b] * u[c];
        }
        if (order >= 4) {
            const double f = 1.0 / (lk * lk * lk);
            for (std::size_t a = 0; a < r; ++a)
                for (std::size_t b = 0; b < r; ++b)
                    for (std::size_t c = 0; c < r; ++c)
                        for (std::size_t d = 0; d < r; ++d)
                            j.fourth[((a * r + b) * r + c) * r + d] += f * u[a] * u[b] * u[c] * u[d];
        }
    }
    return j;
}

Chi::Chi(const RootSystem& rs) : r_(rs.rank()) {
    for (const auto& a : rs.positive_roots()) roots_.push_back(to_double(a));
}

double Chi::min_root(const std::vector<double>& x) const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& a : roots_) m = std::min(m, dotd(a, x));
    return m;
}

double Chi::value(const std::vector<double>& x) const {
    double s = 0;
    for (const auto& a : roots_) {
        double t = dotd(a, x);
        // log sinh t = t + log(1 − e^{−2t}) − log 2
        s -= 2 * (t + std::log(-std::expm1(-2 * t)) - std::log(2.0));
    }
    return s;
}

double Chi::value_plus_4rho(const std::vector<double>& x) const {
    double s = 0;
    for (const auto& a : roots_) {
        double t = dotd(a, x);
        s += -2 * std::log(-std::expm1(-2 * t)) + 2 * std::log(2.0);
    }
    return s;
}

std::vector<double> Chi::grad(const std::vector<double>& x) const {
    std::vector<double> g(r_, 0.0);
    for (const auto& a : roots_) {
        double c = 1 / std::tanh(dotd(a, x));
        for (std::size_t i = 0; i < r_; ++i) g[i] -= 2 * a[i] * c;
    }
    return g;
}

std::vector<double> Chi::grad_plus_4rho(const std::vector<double>& x) const {
    std::vector<double> g(r_, 0.0);
    for (const auto& a : roots_) {
        double c = 1 / std::expm1(2 * dotd(a, x));
        for (std::size_t i = 0; i < r_; ++i) g[i] -= 4 * a[i] * c;
    }
    return g;
}

std::vector<double> Chi::hess(const std::vector<double>& x) const {
    std::vector<double> h(r_ * r_, 0.0);
    for (const auto& a : roots_) {
        double s = std::sinh(dotd(a, x));
        double c = 2 / (s * s);
        for (std::size_t i = 0; i < r_; ++i)
            for (std::size_t k = 0; k < r_; ++k) h[i * r_ + k] += c * a[i] * a[k];
    }
    return h;
}

std::shared_ptr<const PolyBasis> PolyBasis::make(std::vector<Polynomial> polys, int max_order) {
    auto b = std::make_shared<PolyBasis>();
    for (const auto& p : polys) b->compiled.emplace_back(p, max_order);
    b->polys = std::move(polys);
    return b;
}

std::vector<Polynomial> invariant_basis(const RootSystem& rs, int max_degree, int min_degree) {
    const std::size_t r = rs.rank();
    std::vector<Polynomial> out;
    std::map<Polynomial::Exponents, std::map<Polynomial::Exponents, Rational>> pivots;  // pivot → reduced row
    const RVec zero = zeros(r);
    for (int d = std::max(0, min_degree); d <= max_degree; ++d) {
        std::vector<Polynomial::Exponents> monos;
        Polynomial::Exponents e(r, 0);
        std::function<void(std::size_t, int)> gen = [&](std::size_t i, int left) {
            if (i + 1 == r) {
                e[i] = left;
                monos.push_back(e);
                return;
            }
            for (int k = left; k >= 0; --k) {
                e[i] = k;
                gen(i + 1, left - k);
            }
        };
        if (r > 0) gen(0, d);
        for (const auto& mono : monos) {
            Polynomial m = Polynomial::monomial(mono);
            Polynomial sym(r);
            for (const auto& g : rs.weyl_group()) sym += m.compose_linear(g, zero);
            auto row = sym.terms();
            for (const auto& [piv, prow] : pivots) {
                auto it = row.find(piv);
                if (it == row.end()) continue;
                Rational f = it->second / prow.at(piv);
                for (const auto& [k, v] : prow) {
                    row[k] -= f * v;
                    if (sgn(row[k]) == 0) row.erase(k);
                }
            }
            if (row.empty()) continue;
            pivots[row.begin()->first] = row;
            out.push_back(sym);
        }
    }
    return out;
}

SmoothCandidate SmoothCandidate::guillemin(const Polytope& p) {
    SmoothCandidate c;
    c.r_ = p.rank();
    c.g_ = Guillemin(p);
    c.a_.assign(c.r_, 0.0);
    return c;
}

SmoothCandidate SmoothCandidate::polynomial(const Polynomial& p) {
    SmoothCandidate c;
    c.r_ = p.nvars();
    c.basis_ = PolyBasis::make({p});
    c.coeffs_ = {1.0};
    c.a_.assign(c.r_, 0.0);
    return c;
}

SmoothCandidate SmoothCandidate::with_basis(std::optional<Guillemin> g, std::shared_ptr<const PolyBasis> basis,
                                            std::vector<double> coeffs) {
    SmoothCandidate c;
    c.r_ = g ? g->rank() : (basis && !basis->polys.empty() ? basis->polys[0].nvars() : 0);
    c.g_ = std::move(g);
    c.basis_ = std::move(basis);
    c.coeffs_ = std::move(coeffs);
    c.a_.assign(c.r_, 0.0);
    return c;
}

SmoothCandidate SmoothCandidate::with_coeffs(std::vector<double> c) const {
    SmoothCandidate out = *this;
    out.coeffs_ = std::move(c);
    return out;
}

SmoothCandidate SmoothCandidate::plus_affine(const std::vector<double>& a, double b) const {
    SmoothCandidate out = *this;
    for (std::size_t i = 0; i < r_; ++i) out.a_[i] += a[i];
    out.b_ += b;
    return out;
}

Jet SmoothCandidate::smooth_jet(const std::vector<double>& y, int order) const {
    const std::size_t r = r_;
    Jet j(r, order);
    j.value = b_ + dotd(a_, y);
    for (std::size_t i = 0; i < r; ++i) j.grad[i] = a_[i];
    if (!basis_) return j;
    std::vector<double> g(r), h(r * r), t(order >= 3 ? r * r * r : 0), f(order >= 4 ? r * r * r * r : 0);
    for (std::size_t k = 0; k < coeffs_.size(); ++k) {
        const double c = coeffs_[k];
        if (c == 0) continue;
        const auto& p = basis_->compiled[k];
        j.value += c * p.value(y.data());
        p.gradient(y.data(), g.data());
        p.hessian(y.data(), h.data());
        for (std::size_t i = 0; i < r; ++i) j.grad[i] += c * g[i];
        for (std::size_t i = 0; i < r * r; ++i) j.hess[i] += c * h[i];
        if (order >= 3) {
            p.third(y.data(), t.data());
            for (std::size_t i = 0; i < t.size(); ++i) j.third[i] += c * t[i];
        }
        if (order >= 4) {
            p.fourth(y.data(), f.data());
            for (std::size_t i = 0; i < f.size(); ++i) j.fourth[i] += c * f[i];
        }
    }
    return j;
}

Jet SmoothCandidate::jet(const std::vector<double>& y, int order, const std::vector<double>& l) const {
    Jet j = smooth_jet(y, order);
    if (g_) j.add(g_->jet(l.empty() ? g_->l_values(y) : l, order));
    return j;
}

KEnergyNodes::KEnergyNodes(const ChamberPolytope& cp, int level, double wall_margin) {
    const std::size_t r = cp.rank();
    const auto rule = collapsed_rule(static_cast<int>(r), tanh_sinh(level));
    const auto rd = root_data(cp);
    const auto& facets = cp.polytope().facets();
    const double delta = wall_margin * cp.polytope().diameter();
    const auto cones = cp.all_cone_simplices();
    auto per = parallel_map(cones.size(), [&](std::size_t s) {
        const auto& [cone, simplex] = cones[s];
        const double vol = to_double(simplex_volume(simplex));
        std::vector<std::vector<double>> v, lv, av;
        for (const auto& p : simplex) {
            v.push_back(to_double(p));
            std::vector<double> l, a;
            for (const auto& f : facets) l.push_back(to_double(f.l(p)));
            for (const auto& c : cp.root_covectors()) a.push_back(to_double(dot(c, p)));
            lv.push_back(std::move(l));
            av.push_back(std::move(a));
        }
        std::vector<Node> out;
        out.reserve(rule.w.size());
        for (std::size_t q = 0; q < rule.w.size(); ++q) {
            const auto& b = rule.bary[q];
            Node nd;
            nd.cone = cone;
            nd.y.assign(r, 0.0);
            nd.l.assign(facets.size(), 0.0);
            std::vector<double> ay(rd.hat.size(), 0.0);
            for (std::size_t j = 0; j < b.size(); ++j) {
                for (std::size_t i = 0; i < r; ++i) nd.y[i] += b[j] * v[j][i];
                for (std::size_t k = 0; k < facets.size(); ++k) nd.l[k] += b[j] * lv[j][k];
                for (std::size_t a = 0; a < ay.size(); ++a) ay[a] += b[j] * av[j][a];
            }
            double pi = 1;
            nd.near_wall = false;
            for (std::size_t a = 0; a < ay.size(); ++a) {
                pi *= ay[a] * ay[a];
                if (ay[a] < delta * rd.hat_norm[a]) nd.near_wall = true;
            }
            nd.w = rule.w[q] * vol * pi;
            out.push_back(std::move(nd));
        }
        return out;
    });
    for (auto& p : per)
        for (auto& nd : p) {
            total_ += nd.w;
            nodes_.push_back(std::move(nd));
        }
}

NValue nonlinear_N(const ChamberPolytope& cp, const SmoothCandidate& u, const KEnergyOptions& opt) {
    const int level = opt.level > 0 ? opt.level : default_level(cp.rank());
    EvalSpec spec;
    spec.max_dropped = opt.max_dropped_fraction;
    std::vector<double> Lambda(cp.outer_facets().size(), 0.0);
    NValue out;
    double coarse = 0;
    for (int lv : {level, level + 1}) {
        KEnergyNodes nodes(cp, lv, opt.wall_margin);
        auto e = evaluate(cp, Lambda, 0, nodes, u, spec);
        if (lv == level) coarse = e.N;
        out.value = e.N;
        out.dropped_fraction = e.dropped;
    }
    out.error = std::abs(out.value - coarse);
    return out;
}

KValue kenergy_value(const ChamberPolytope& cp, const ChamberMoments& m, const SmoothCandidate& u,
                     const KEnergyOptions& opt) {
    const int level = opt.level > 0 ? opt.level : default_level(cp.rank());
    EvalSpec spec;
    spec.max_dropped = opt.max_dropped_fraction;
    const auto Lambda = lambdas_d(m);
    const double Sbar = to_double(m.Sbar);
    const double Lpoly = polynomial_L(cp, m, u);
    KValue out;
    double coarse = 0;
    for (int lv : {level, level + 1}) {
        KEnergyNodes nodes(cp, lv, opt.wall_margin);
        auto e = evaluate(cp, Lambda, Sbar, nodes, u, spec);
        out.L = e.L + Lpoly;
        out.N = e.N;
        out.K = out.L + out.N;
        out.dropped_fraction = e.dropped;
        if (lv == level) coarse = out.K;
    }
    out.error = std::abs(out.K - coarse);
    return out;
}

KValue modified_kenergy_value(const ChamberPolytope& cp, const ChamberMoments& m, const SolitonField& S,
                              const SmoothCandidate& u, const KEnergyOptions& opt) {
    const int level = opt.level > 0 ? opt.level : default_level(cp.rank());
    EvalSpec spec;
    spec.max_dropped = opt.max_dropped_fraction;
    spec.L_guillemin_only = false;
    spec.soliton = &S;
    const auto Lambda = lambdas_d(m);
    const double Sbar = to_double(m.Sbar);
    KValue out;
    double coarse = 0;
    for (int lv : {level, level + 1}) {
        KEnergyNodes nodes(cp, lv, opt.wall_margin);
        auto e = evaluate(cp, Lambda, Sbar, nodes, u, spec);
        out.L = e.L;
        out.N = e.N;
        out.K = e.L + e.N;
        out.dropped_fraction = e.dropped;
        if (lv == level) coarse = out.K;
    }
    out.error = std::abs(out.K - coarse);
    return out;
}

double nonlinear_N_variation(const ChamberPolytope& cp, const SmoothCandidate& u, const Polynomial& f,
                             const KEnergyOptions& opt) {
    const int level = opt.level > 0 ? opt.level : default_level(cp.rank());
    std::vector<CompiledPolynomial> fs{CompiledPolynomial(f, 2)};
    EvalSpec spec;
    spec.max_dropped = opt.max_dropped_fraction;
    spec.variations = &fs;
    std::vector<double> Lambda(cp.outer_facets().size(), 0.0);
    KEnergyNodes nodes(cp, level + 1, opt.wall_margin);
    return evaluate(cp, Lambda, 0, nodes, u, spec).dN[0];
}

InverseHessian inverse_hessian(const SmoothCandidate& u, const std::vector<double>& y) {
    const std::size_t r = u.rank();
    const auto& g = u.guillemin_part();
    std::vector<double> l = g ? g->l_values(y) : std::vector<double>{};
    Jet sm = u.smooth_jet(y, 3);
    Jet full = sm;
    if (g) full.add(g->jet(l, 3));
    auto fac = factor_hessian(r, sm.hess, g ? &*g : nullptr, l);
    if (!fac.pd) throw kerr("SingularHessian", "Hessian not positive definite at " + point_string(y));
    InverseHessian out;
    out.U = fac.inv;
    out.dU.assign(r * r * r, 0.0);
    Mat U(r, r), A(r, r);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < r; ++j) U(i, j) = fac.inv[i * r + j];
    for (std::size_t k = 0; k < r; ++k) {
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < r; ++j) A(i, j) = full.third[(i * r + j) * r + k];
        Mat d = -U * A * U;
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < r; ++j) out.dU[(i * r + j) * r + k] = d(i, j);
    }
    return out;
}

ScalarCurvature scalar_curvature_at(const ChamberPolytope& cp, const SmoothCandidate& u, const std::vector<double>& y) {
    const std::size_t r = cp.rank();
    const auto rd = root_data(cp);
    const auto ay = checked_root_values(cp, rd, y);
    const auto& g = u.guillemin_part();
    std::vector<double> l = g ? g->l_values(y) : std::vector<double>{};
    Jet sm = u.smooth_jet(y, 4);
    Jet full = sm;
    if (g) full.add(g->jet(l, 4));
    auto fac = factor_hessian(r, sm.hess, g ? &*g : nullptr, l);
    if (!fac.pd) throw kerr("SingularHessian", "Hessian not positive definite at " + point_string(y));
    Mat U(r, r);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < r; ++j) U(i, j) = fac.inv[i * r + j];
    std::vector<Mat> A(r, Mat(r, r));
    for (std::size_t k = 0; k < r; ++k)
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < r; ++j) A[k](i, j) = full.third[(i * r + j) * r + k];
    std::vector<Mat> dU(r);
    for (std::size_t k = 0; k < r; ++k) dU[k] = -U * A[k] * U;

    std::vector<double> p, P;
    pi_log_derivatives(rd, ay, r, p, P);
    ScalarCurvature s;
    for (std::size_t k = 0; k < r; ++k)
        for (std::size_t m = 0; m < r; ++m) {
            Mat Akm(r, r);
            for (std::size_t i = 0; i < r; ++i)
                for (std::size_t j = 0; j < r; ++j) Akm(i, j) = full.fourth[((i * r + j) * r + k) * r + m];
            Mat d2 = U * A[k] * U * A[m] * U + U * A[m] * U * A[k] * U - U * Akm * U;
            s.abreu -= d2(k, m);
        }
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < r; ++j) {
            s.mixed -= 2 * dU[j](i, j) * p[i];
            s.pi_term -= U(i, j) * P[i * r + j];
        }
    const Chi chi(cp.roots());
    if (!chi.empty()) {
        const auto& x = full.grad;
        if (!(chi.min_root(x) > 0)) throw kerr("WallTooClose", "gradient leaves the chamber at " + point_string(y));
        auto cg = chi.grad(x);
        auto ch = chi.hess(x);
        for (std::size_t i = 0; i < r; ++i) {
            s.chi_grad -= cg[i] * p[i];
            for (std::size_t k = 0; k < r; ++k) s.chi_hess -= full.hess[i * r + k] * ch[i * r + k];
        }
    }
    s.S = s.abreu + s.mixed + s.pi_term + s.chi_hess + s.chi_grad;
    return s;
}

QDiagnostic q_diagnostic(const ChamberPolytope& cp, const std::vector<double>& y) {
    const std::size_t r = cp.rank();
    const auto rd = root_data(cp);
    const auto ay = checked_root_values(cp, rd, y);
    QDiagnostic q;
    if (rd.hat.empty()) return q;
    Guillemin g(cp.polytope());
    auto l = g.l_values(y);
    Jet j = g.jet(l, 2);
    std::vector<double> zero(r * r, 0.0);
    auto fac = factor_hessian(r, zero, &g, l);
    const auto& U = fac.inv;
    const Chi chi(cp.roots());
    const auto& x = j.grad;
    std::vector<double> p, P;
    pi_log_derivatives(rd, ay, r, p, P);
    auto cg = chi.grad(x);
    auto ch = chi.hess(x);
    for (std::size_t i = 0; i < r; ++i) {
        q.direct -= cg[i] * p[i];
        for (std::size_t k = 0; k < r; ++k) q.direct -= ch[i * r + k] * j.hess[i * r + k] + U[i * r + k] * P[i * r + k];
    }

    std::vector<std::vector<double>> roots;
    for (const auto& a : cp.roots().positive_roots()) roots.push_back(to_double(a));
    auto quad = [&](const std::vector<double>& a, const std::vector<double>& M, const std::vector<double>& b) {
        double s = 0;
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t k = 0; k < r; ++k) s += a[i] * M[i * r + k] * b[k];
        return s;
    };
    for (std::size_t a = 0; a < roots.size(); ++a) {
        double xa = dotd(roots[a], x);
        double cth = 1 / std::tanh(xa);
        double sh = std::sinh(xa);
        q.expanded += 4 * dotd(rd.hat[a], roots[a]) * cth / ay[a] - 2 * quad(roots[a], j.hess, roots[a]) / (sh * sh) -
                      2 * quad(rd.hat[a], U, rd.hat[a]) / (ay[a] * ay[a]);
        for (std::size_t b = 0; b < roots.size(); ++b) {
            if (a == b) continue;
            double xb = dotd(roots[b], x);
            double ab = dotd(rd.hat[a], roots[b]);
            q.expanded += 2 * (ab / std::tanh(xa) / ay[b] + ab / std::tanh(xb) / ay[a] -
                               2 * quad(rd.hat[a], U, rd.hat[b]) / (ay[a] * ay[b]));
        }
    }
    return q;
}

SmoothCandidate normalize(const SmoothCandidate& u) {
    std::vector<double> o(u.rank(), 0.0);
    Jet j = u.jet(o, 2);
    std::vector<double> a(u.rank());
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = -j.grad[i];
    return u.plus_affine(a, -j.value);
}

MinimizeResult minimize_kenergy(const ChamberPolytope& cp, const ChamberMoments& m, const MinimizeOptions& opt) {
    const int level = opt.quad.level > 0 ? opt.quad.level : default_level(cp.rank());
    auto basis = PolyBasis::make(invariant_basis(cp.roots(), opt.degree, 2), 4);
    const std::size_t K = basis->polys.size();
    std::vector<double> Lk(K);
    for (std::size_t k = 0; k < K; ++k) Lk[k] = to_double(linear_functional(cp, m, basis->polys[k]));
    const auto Lambda = lambdas_d(m);
    const double Sbar = to_double(m.Sbar);
    KEnergyNodes nodes(cp, level, opt.quad.wall_margin);
    std::vector<CompiledPolynomial> fs;
    for (const auto& p : basis->polys) fs.emplace_back(p, 2);
    EvalSpec spec;
    spec.max_dropped = opt.quad.max_dropped_fraction;
    spec.variations = &fs;
    const Guillemin g0(cp.polytope());
    auto candidate = [&](const std::vector<double>& c) { return SmoothCandidate::with_basis(g0, basis, c); };

    struct Point {
        std::vector<double> c;
        double K = 0;
        std::vector<double> grad;
    };
    auto eval = [&](const std::vector<double>& c) {
        auto e = evaluate(cp, Lambda, Sbar, nodes, candidate(c), spec);
        Point p{c, e.L + e.N, std::vector<double>(K)};
        for (std::size_t k = 0; k < K; ++k) {
            p.K += c[k] * Lk[k];
            p.grad[k] = Lk[k] + e.dN[k];
        }
        return p;
    };
    auto norm = [](const std::vector<double>& v) { return std::sqrt(dotd(v, v)); };

    MinimizeResult res;
    Point cur;
    try {
        cur = eval(std::vector<double>(K, 0.0));
    } catch (const Error& e) {
        throw kerr("BarrierBreach", std::string("the Guillemin function is not admissible: ") + e.what());
    }
    res.trace.push_back({0, cur.K, norm(cur.grad), 0});
    Mat Hinv = Mat::Identity(static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(K));
    bool scaled = false;
    for (int it = 1; it <= opt.max_iter; ++it) {
        if (norm(cur.grad) < opt.tol) {
            res.converged = true;
            break;
        }
        Vec gk = Eigen::Map<const Vec>(cur.grad.data(), static_cast<Eigen::Index>(K));
        Vec dir = -Hinv * gk;
        double slope = gk.dot(dir);
        if (!(slope < 0)) {
            Hinv.setIdentity();
            dir = -gk;
            slope = gk.dot(dir);
        }
        double t = 1;
        std::optional<Point> next;
        for (int b = 0; b < 60; ++b, t *= 0.5) {
            std::vector<double> c(K);
            for (std::size_t k = 0; k < K; ++k) c[k] = cur.c[k] + t * dir(static_cast<Eigen::Index>(k));
            try {
                auto p = eval(c);
                if (p.K <= cur.K + 1e-4 * t * slope) {
                    next = std::move(p);
                    break;
                }
            } catch (const Error&) {
                // outside the admissible set: shorten the step
            }
        }
        if (!next) {
            res.note = "kenergy.NoDescent: line search found no decrease at iteration " + std::to_string(it);
            break;
        }
        Vec s(K), yv(K);
        for (std::size_t k = 0; k < K; ++k) {
            s(static_cast<Eigen::Index>(k)) = next->c[k] - cur.c[k];
            yv(static_cast<Eigen::Index>(k)) = next->grad[k] - cur.grad[k];
        }
        double sy = s.dot(yv);
        if (sy > 1e-300) {
            if (!scaled) {
                Hinv *= sy / yv.dot(yv);
                scaled = true;
            }
            double rho = 1 / sy;
            Mat I = Mat::Identity(static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(K));
            Hinv = (I - rho * s * yv.transpose()) * Hinv * (I - rho * yv * s.transpose()) + rho * s * s.transpose();
        }
        cur = std::move(*next);
        res.trace.push_back({it, cur.K, norm(cur.grad), t});
    }
    if (!res.converged && norm(cur.grad) < opt.tol) res.converged = true;
    if (!res.converged && res.note.empty()) res.note = "iteration cap reached";
    auto best = candidate(cur.c);
    res.value = kenergy_value(cp, m, best, opt.quad);
    res.initial = kenergy_value(cp, m, candidate(std::vector<double>(K, 0.0)), opt.quad);
    res.u = normalize(best);
    res.normalized_value = kenergy_value(cp, m, res.u, opt.quad);
    return res;
}

}  // namespace gcstab
