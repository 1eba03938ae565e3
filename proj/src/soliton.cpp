#include "gcstab/soliton.hpp"

#include "gcstab/parallel.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace gcstab {

namespace {

constexpr std::size_t kChunk = 2048;

// Quadrature nodes over a list of simplices with the weight w·π(y) folded in.
struct Nodes {
    std::size_t r = 0;
    std::vector<double> y;  // flattened
    std::vector<double> pw;
    std::size_t size() const { return pw.size(); }
    const double* at(std::size_t k) const { return y.data() + k * r; }
};

double eval_pi(const std::vector<std::vector<double>>& roots, const double* y, std::size_t r) {
    double p = 1;
    for (const auto& a : roots) {
        double s = 0;
        for (std::size_t i = 0; i < r; ++i) s += a[i] * y[i];
        p *= s * s;
    }
    return p;
}

std::vector<std::vector<double>> root_covectors_d(const ChamberPolytope& cp) {
    std::vector<std::vector<double>> out;
    for (const auto& a : cp.root_covectors()) out.push_back(to_double(a));
    return out;
}

Nodes build_nodes(const ChamberPolytope& cp, const std::vector<Simplex>& simplices, int order) {
    Nodes n;
    n.r = cp.rank();
    const auto rule = collapsed_rule(static_cast<int>(n.r), gauss_legendre(order));
    const auto roots = root_covectors_d(cp);
    for (const auto& s : simplices)
        for (const auto& q : place(rule, s)) {
            n.y.insert(n.y.end(), q.y.begin(), q.y.end());
            n.pw.push_back(q.w * eval_pi(roots, q.y.data(), n.r));
        }
    return n;
}

int default_order(const ChamberPolytope& cp) {
    return std::max<int>(12, static_cast<int>(cp.roots().positive_roots().size()) + 12);
}

std::vector<std::vector<double>> toric_basis_d(const ChamberPolytope& cp) {
    std::vector<std::vector<double>> out;
    for (const auto& t : cp.roots().toric_covector_basis()) out.push_back(to_double(t));
    return out;
}

// Sums of e^{c·y}·π against 1, the toric coordinates and their products.
struct Sums {
    long double f = 0;
    std::vector<long double> g, H, y;  // toric gradient, toric Hessian, full first moment
};

Sums accumulate(const Nodes& nodes, const std::vector<double>& c, const std::vector<std::vector<double>>& T) {
    const std::size_t r = nodes.r, t = T.size();
    const std::size_t chunks = (nodes.size() + kChunk - 1) / kChunk;
    auto parts = parallel_map(chunks, [&](std::size_t ch) -> Sums {
        Sums s;
        s.g.assign(t, 0);
        s.H.assign(t * t, 0);
        s.y.assign(r, 0);
        std::vector<long double> ty(t);
        const std::size_t end = std::min(nodes.size(), (ch + 1) * kChunk);
        for (std::size_t k = ch * kChunk; k < end; ++k) {
            const double* y = nodes.at(k);
            long double th = 0;
            for (std::size_t i = 0; i < r; ++i) th += static_cast<long double>(c[i]) * y[i];
            long double e = nodes.pw[k] * std::exp(th);
            s.f += e;
            for (std::size_t i = 0; i < r; ++i) s.y[i] += e * y[i];
            for (std::size_t a = 0; a < t; ++a) {
                ty[a] = 0;
                for (std::size_t i = 0; i < r; ++i) ty[a] += static_cast<long double>(T[a][i]) * y[i];
                s.g[a] += e * ty[a];
            }
            for (std::size_t a = 0; a < t; ++a)
                for (std::size_t b = 0; b < t; ++b) s.H[a * t + b] += e * ty[a] * ty[b];
        }
        return s;
    });
    Sums total;
    total.g.assign(t, 0);
    total.H.assign(t * t, 0);
    total.y.assign(r, 0);
    for (const auto& p : parts) {
        total.f += p.f;
        for (std::size_t a = 0; a < t; ++a) total.g[a] += p.g[a];
        for (std::size_t a = 0; a < t * t; ++a) total.H[a] += p.H[a];
        for (std::size_t i = 0; i < r; ++i) total.y[i] += p.y[i];
    }
    return total;
}

std::vector<double> combine(const std::vector<std::vector<double>>& T, const std::vector<double>& s, std::size_t r) {
    std::vector<double> c(r, 0.0);
    for (std::size_t a = 0; a < T.size(); ++a)
        for (std::size_t i = 0; i < r; ++i) c[i] += s[a] * T[a][i];
    return c;
}

long double grad_norm(const Sums& s) {
    long double n = 0;
    for (auto x : s.g) n += x * x;
    return std::sqrt(n);
}

double max_abs(const std::vector<long double>& v, long double scale) {
    long double m = 0;
    for (auto x : v) m = std::max(m, std::fabs(x * scale));
    return static_cast<double>(m);
}

}  // namespace

double SolitonField::theta(const std::vector<double>& y) const {
    double t = c0;
    for (std::size_t i = 0; i < c.size(); ++i) t += c[i] * y[i];
    return t;
}

SolitonField solve_soliton(const ChamberPolytope& cp, const ChamberMoments& m, const SolitonOptions& opt) {
    const std::size_t r = cp.rank();
    const auto T = toric_basis_d(cp);
    const std::size_t t = T.size();
    SolitonField S;
    S.order = opt.order > 0 ? opt.order : default_order(cp);
    const Nodes nodes = build_nodes(cp, cp.interior_simplices(), S.order);
    const auto bar = to_double(m.bar);
    const auto ypi = to_double(m.ypi);
    const double V = m.V.get_d();

    std::vector<double> s = opt.start.value_or(std::vector<double>(t, 0.0));
    s.resize(t, 0.0);
    auto finish = [&](const std::vector<double>& sv, const Sums& sum) {
        S.s = sv;
        S.c = combine(T, sv, r);
        S.c0 = 0;
        for (std::size_t i = 0; i < r; ++i) S.c0 -= S.c[i] * bar[i];
        long double norm = static_cast<long double>(S.c0) * V;
        for (std::size_t i = 0; i < r; ++i) norm += static_cast<long double>(S.c[i]) * ypi[i];
        S.normalization_residual = static_cast<double>(std::fabs(norm));
        S.moment_residual = max_abs(sum.g, std::exp(static_cast<long double>(S.c0)));
        if (std::all_of(S.c.begin(), S.c.end(), [](double x) { return x == 0.0; })) {
            // θ ≡ 0: the moments are the exact polynomial integrals ∫ y π
            std::vector<long double> g(t, 0);
            for (std::size_t a = 0; a < t; ++a)
                for (std::size_t i = 0; i < r; ++i) g[a] += static_cast<long double>(T[a][i]) * ypi[i];
            S.moment_residual = max_abs(g, 1);
        }
    };

    Sums cur = accumulate(nodes, combine(T, s, r), T);
    finish(s, cur);
    double best = S.moment_residual;
    std::vector<double> best_s = s;
    if (t == 0) {
        S.converged = true;
    } else {
        for (int it = 0; it < opt.max_iter; ++it) {
            Eigen::MatrixXd H(t, t);
            Eigen::VectorXd g(t);
            for (std::size_t a = 0; a < t; ++a) {
                g(a) = static_cast<double>(cur.g[a]);
                for (std::size_t b = 0; b < t; ++b) H(a, b) = static_cast<double>(cur.H[a * t + b]);
            }
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(H, Eigen::EigenvaluesOnly);
            S.hessian_min_eigenvalue.push_back(eig.eigenvalues()(0));
            if (S.moment_residual <= opt.tol) {
                S.converged = true;
                break;
            }
            Eigen::VectorXd d = H.ldlt().solve(-g);
            // Damped step: Armijo backtracking on the convex objective.
            double step = 1;
            const long double slope = g.dot(d);
            std::vector<double> trial(t);
            Sums next;
            bool moved = false;
            for (int k = 0; k < 60; ++k) {
                for (std::size_t a = 0; a < t; ++a) trial[a] = s[a] + step * d(a);
                next = accumulate(nodes, combine(T, trial, r), T);
                // Near the minimum the decrease in f drops below its rounding noise;
                // a smaller gradient is then the usable signal.
                if (next.f <= cur.f + 1e-4L * step * slope || grad_norm(next) < grad_norm(cur)) {
                    moved = true;
                    break;
                }
                step *= 0.5;
            }
            S.iterations = it + 1;
            if (!moved) break;  // stalled at rounding level
            s = trial;
            cur = next;
            finish(s, cur);
            if (S.moment_residual < best) {
                best = S.moment_residual;
                best_s = s;
            }
        }
        if (!S.converged && S.moment_residual <= opt.tol) S.converged = true;
        if (!S.converged) {
            s = best_s;
            cur = accumulate(nodes, combine(T, s, r), T);
            finish(s, cur);
        }
    }
    // Quadrature error: ∫ e^θ π at the doubled order.
    const Nodes fine = build_nodes(cp, cp.interior_simplices(), 2 * S.order);
    long double z1 = accumulate(nodes, S.c, T).f, z2 = accumulate(fine, S.c, T).f;
    S.quadrature_error = static_cast<double>(std::fabs(z1 - z2) / std::fabs(z2));
    return S;
}

BarX bar_X(const ChamberPolytope& cp, const SolitonField& S) {
    const std::size_t r = cp.rank();
    BarX out;
    std::vector<double> coarse;
    for (int level = 0; level < 2; ++level) {
        const int order = (S.order > 0 ? S.order : default_order(cp)) * (level + 1);
        auto sum = accumulate(build_nodes(cp, cp.interior_simplices(), order), S.c, {});
        std::vector<double> b(r);
        for (std::size_t i = 0; i < r; ++i) b[i] = static_cast<double>(sum.y[i] / sum.f);
        if (level == 0) {
            coarse = b;
        } else {
            out.value = b;
            for (std::size_t i = 0; i < r; ++i) out.error = std::max(out.error, std::abs(b[i] - coarse[i]));
        }
    }
    return out;
}

std::string to_string(SolitonVerdict v) {
    switch (v) {
        case SolitonVerdict::Yes: return "yes";
        case SolitonVerdict::Marginal: return "marginal";
        case SolitonVerdict::No: return "no";
        default: return "not-applicable";
    }
}

SolitonVerdictResult verdict_soliton(const ChamberPolytope& cp, const SolitonField& S) {
    SolitonVerdictResult out;
    const auto& rs = cp.roots();
    out.bar_x = bar_X(cp, S);
    RVec d(cp.rank());
    const auto rho4 = to_double(Rational(4) * rs.rho());
    double scale = 1;
    for (std::size_t i = 0; i < d.size(); ++i) {
        d[i] = Rational(out.bar_x.value[i] - rho4[i]);
        scale = std::max({scale, std::abs(out.bar_x.value[i]), std::abs(rho4[i])});
    }
    auto [dt, dss] = rs.split(d);
    out.toric = to_double(dt);
    out.coefficients = to_double(rs.simple_root_coefficients(dss));
    out.tau = std::max(10 * out.bar_x.error, 1e-9 * scale);
    if (!fano_normalized(cp)) return out;
    double toric_norm = 0;
    for (double x : out.toric) toric_norm = std::max(toric_norm, std::abs(x));
    if (out.coefficients.empty()) {
        out.margin = -toric_norm;
        out.verdict = toric_norm <= out.tau ? SolitonVerdict::Yes : SolitonVerdict::No;
        return out;
    }
    out.margin = *std::min_element(out.coefficients.begin(), out.coefficients.end());
    if (toric_norm > out.tau || out.margin < -out.tau)
        out.verdict = SolitonVerdict::No;
    else if (out.margin > out.tau)
        out.verdict = SolitonVerdict::Yes;
    else
        out.verdict = SolitonVerdict::Marginal;
    return out;
}

Estimate modified_linear(const ChamberPolytope& cp, const SolitonField& S, const PLConvexFunction& u) {
    const std::size_t r = cp.rank();
    const auto rho4 = to_double(Rational(4) * cp.roots().rho());
    const auto roots = root_covectors_d(cp);
    const auto cones = cp.all_cone_simplices();
    // One job per (cone simplex, region); regions are sliced once and reused at both orders.
    struct Job {
        std::vector<double> w;
        Simplex s;
    };
    std::vector<Job> jobs;
    for (const auto& [a, s] : cones)
        for (auto& [k, t] : u.regions(s)) jobs.push_back({to_double(u.pieces()[k].w), std::move(t)});
    double values[2];
    for (int level = 0; level < 2; ++level) {
        const int order = (S.order > 0 ? S.order : default_order(cp)) * (level + 1);
        const auto rule = collapsed_rule(static_cast<int>(r), gauss_legendre(order));
        auto parts = parallel_map(jobs.size(), [&](std::size_t j) -> long double {
            long double acc = 0;
            for (const auto& q : place(rule, jobs[j].s)) {
                long double pair = 0;
                for (std::size_t i = 0; i < r; ++i) pair += jobs[j].w[i] * (q.y[i] - rho4[i]);
                acc += q.w * eval_pi(roots, q.y.data(), r) * std::exp(static_cast<long double>(S.theta(q.y))) * pair;
            }
            return acc;
        });
        long double total = 0;
        for (auto p : parts) total += p;
        values[level] = static_cast<double>(total);
    }
    return {values[1], std::abs(values[1] - values[0])};
}

}  // namespace gcstab
