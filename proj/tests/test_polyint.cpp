#include "catch_amalgamated.hpp"

#include "fixtures.hpp"
#include "gcstab/error.hpp"
#include "gcstab/integrate.hpp"
#include "oracles.hpp"

#include <random>

using namespace gcstab;
using Q = Rational;

namespace {

std::string error_tag(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.tag();
    }
    return "none";
}

Q cone_volume_sum(const ChamberPolytope& cp) {
    Q v = 0;
    for (std::size_t a = 0; a < cp.outer_facets().size(); ++a) v += integrate(Integrand::constant(1), cp, Region::cone(a));
    return v;
}

Polynomial random_polynomial(std::size_t r, int degree, std::mt19937& gen) {
    std::uniform_int_distribution<int> c(-5, 5);
    Polynomial p(r);
    std::vector<int> e(r, 0);
    std::function<void(std::size_t, int)> rec = [&](std::size_t i, int left) {
        if (i + 1 == r) {
            for (int k = 0; k <= left; ++k) {
                e[i] = k;
                p.add_term(e, oracle::frac(c(gen), 1 + static_cast<long>(gen() % 3)));
            }
            return;
        }
        for (int k = 0; k <= left; ++k) {
            e[i] = k;
            rec(i + 1, left - k);
        }
    };
    rec(0, degree);
    return p;
}

}  // namespace

TEST_CASE("restrict_to_chamber: torus square") {
    auto cp = fixture::torus_square(1).chamber();
    REQUIRE(cp.outer_facets().size() == 4);
    REQUIRE(cp.all_cone_simplices().size() == 4);
    REQUIRE(cone_volume_sum(cp) == 4);
    REQUIRE(cp.vertices().size() == 4);
    REQUIRE(cp.edges().size() == 4);
}

TEST_CASE("restrict_to_chamber: A1 quadric") {
    auto cp = fixture::a1_quadric().chamber();
    REQUIRE(cp.vertices() == (std::vector<RVec>{RVec{0}, RVec{6}}));
    REQUIRE(cp.outer_facets().size() == 1);
    REQUIRE(cp.outer_facets()[0].vertices == std::vector<RVec>{RVec{6}});
    REQUIRE(cp.outer_facets()[0].cone_simplices.size() == 1);
    REQUIRE(cone_volume_sum(cp) == 6);
}

TEST_CASE("restrict_to_chamber: A2 sector area") {
    auto cp = fixture::a2_hexagon().chamber();
    REQUIRE(cp.vertices().size() == 4);
    Q area = oracle::shoelace({RVec{0, 0}, RVec{6, 3}, RVec{6, 6}, RVec{3, 6}});
    REQUIRE(cone_volume_sum(cp) == area);
    REQUIRE(integrate_chamber_pulling(Integrand::constant(1), cp) == area);
    REQUIRE(cp.outer_facets().size() == 2);
}

TEST_CASE("weight polynomial") {
    REQUIRE(weight_pi(fixture::torus(2)) == Polynomial::constant(2, 1));
    auto p1 = weight_pi(fixture::a1_roots());
    REQUIRE(p1 == Polynomial::monomial({2}));

    auto rs = fixture::a2_roots();
    auto pi = weight_pi(rs);
    REQUIRE(pi.degree() == 6);
    REQUIRE(pi.is_homogeneous());
    std::mt19937 gen(3);
    std::uniform_int_distribution<int> d(-40, 40);
    for (int t = 0; t < 100; ++t) {
        RVec y{oracle::frac(d(gen), 7), oracle::frac(d(gen), 3)};
        Q direct = 1;
        for (const auto& a : oracle::reflection_closure(rs.gram(), rs.simple_roots()).positive_roots) {
            Q v = oracle::gram_pair(rs.gram(), a, y);
            direct *= v * v;
        }
        REQUIRE(pi.evaluate(y) == direct);
        for (const auto& w : rs.weyl_group()) REQUIRE(pi.evaluate(w * y) == direct);
    }
    // Double zero on each wall: π and its gradient vanish there.
    for (const auto& a : rs.positive_roots()) {
        RMat g = rs.gram();
        RVec along{-(g * a)[1], (g * a)[0]};
        for (int k = 1; k <= 5; ++k) {
            RVec y = oracle::frac(k, 2) * along;
            REQUIRE(pi.evaluate(y) == 0);
            for (std::size_t i = 0; i < 2; ++i) REQUIRE(pi.derivative(i).evaluate(y) == 0);
        }
    }
}

TEST_CASE("exact simplex integrals") {
    Simplex std2{RVec{0, 0}, RVec{1, 0}, RVec{0, 1}};
    REQUIRE(integrate_simplex(Integrand::constant(1), std2) == Q(1, 2));
    auto xy = Polynomial::monomial({1, 1});
    REQUIRE(integrate_simplex(Integrand::from_polynomial(xy), std2) == Q(1, 24));
    // Dirichlet oracle ∫_0^1 x (1−x)²/2 dx.
    REQUIRE(oracle::power_integral({{Q(1, 2), 1}, {Q(-1), 2}, {Q(1, 2), 3}}, 0, 1) == Q(1, 24));

    auto cp = fixture::a1_quadric().chamber();
    auto pi = cp.pi();
    REQUIRE(integrate(pi, cp, Region::chamber()) == 72);
    REQUIRE(integrate(Polynomial::variable(1, 0) * pi, cp, Region::chamber()) == 324);
    REQUIRE(oracle::power_integral({{1, 2}}, 0, 6) == 72);
    REQUIRE(oracle::power_integral({{1, 3}}, 0, 6) == 324);
}

TEST_CASE("simplex integration matches expansion in ambient monomials") {
    std::mt19937 gen(5);
    for (int t = 0; t < 10; ++t) {
        auto p = random_polynomial(2, 4, gen);
        // Unit-square corner triangle pushed by an affine map; compare with
        // Fubini on the standard simplex after pulling back.
        Simplex s{RVec{1, 2}, RVec{4, 3}, RVec{2, 6}};
        RMat m(2, 2);
        for (int i = 0; i < 2; ++i) {
            m(i, 0) = s[1][i] - s[0][i];
            m(i, 1) = s[2][i] - s[0][i];
        }
        auto pulled = p.compose_linear(m, s[0]);
        // ∫_{std simplex} x^a y^b = a! b! / (a+b+2)!
        Q ref = 0;
        for (const auto& [e, c] : pulled.terms()) {
            Q num = 1, den = 1;
            for (int i = 2; i <= e[0]; ++i) num *= i;
            for (int i = 2; i <= e[1]; ++i) num *= i;
            for (int i = 2; i <= e[0] + e[1] + 2; ++i) den *= i;
            ref += c * num / den;
        }
        ref *= abs(determinant(m));
        REQUIRE(integrate_simplex(Integrand::from_polynomial(p), s) == ref);
    }
}

TEST_CASE("divergence identity on every outer facet") {
    for (const auto& c : fixture::all()) {
        auto cp = c.chamber();
        auto pi = pi_integrand(cp);
        const int n = static_cast<int>(cp.roots().n());
        for (std::size_t a = 0; a < cp.outer_facets().size(); ++a) {
            INFO(c.name << " facet " << a);
            REQUIRE(integrate(pi, cp, Region::facet_of(a)) == n * integrate(pi, cp, Region::cone(a)));
        }
    }
}

TEST_CASE("triangulation independence") {
    std::mt19937 gen(9);
    for (const auto& c : fixture::all()) {
        auto cp = c.chamber();
        auto f = Integrand::from_polynomial(random_polynomial(cp.rank(), 3, gen)) * pi_integrand(cp);
        INFO(c.name);
        REQUIRE(integrate(f, cp, Region::chamber()) == integrate_chamber_pulling(f, cp));
    }
}

TEST_CASE("W-equivariance of integrals") {
    std::mt19937 gen(13);
    for (const auto& c : {fixture::a1_quadric(), fixture::a1_torus(), fixture::a2_hexagon()}) {
        auto cp = c.chamber();
        Polytope p(c.facets);
        auto full = ConvexCell::from_vertices(p.vertices(), p.halfspaces()).triangulate();
        auto f = random_polynomial(cp.rank(), 3, gen);
        Q whole = 0;
        for (const auto& s : full) whole += integrate_simplex(Integrand::from_polynomial(f), s);
        Q sum = 0;
        for (const auto& w : cp.roots().weyl_group())
            sum += integrate(f.compose_linear(w, zeros(cp.rank())), cp, Region::chamber());
        INFO(c.name);
        REQUIRE(whole == sum);
    }
}

TEST_CASE("Monte-Carlo cross-check of the weighted volume") {
    for (const auto& c : fixture::all()) {
        auto cp = c.chamber();
        const double exact = integrate(cp.pi(), cp, Region::chamber()).get_d();
        const std::size_t r = cp.rank();
        std::vector<double> lo(r, 1e300), hi(r, -1e300);
        for (const auto& v : cp.vertices())
            for (std::size_t i = 0; i < r; ++i) {
                lo[i] = std::min(lo[i], v[i].get_d());
                hi[i] = std::max(hi[i], v[i].get_d());
            }
        std::vector<std::pair<std::vector<double>, double>> hs;
        for (const auto& h : cp.halfspaces()) hs.emplace_back(to_double(h.a), h.c.get_d());
        CompiledPolynomial pi(cp.pi(), 0);
        auto inside = [&](const std::vector<double>& x) {
            for (const auto& [a, c0] : hs) {
                double s = c0;
                for (std::size_t i = 0; i < r; ++i) s += a[i] * x[i];
                if (s < 0) return false;
            }
            return true;
        };
        double mc = oracle::monte_carlo(inside, [&](const std::vector<double>& x) { return pi.value(x.data()); }, lo,
                                        hi, 1000000, 2024);
        INFO(c.name << " exact " << exact << " mc " << mc);
        REQUIRE(std::abs(mc - exact) < 0.01 * exact);
    }
}

TEST_CASE("polytope validation errors") {
    using fixture::facets;
    REQUIRE(error_tag([] { Polytope(facets({{RVec{1, 0}, 1}, {RVec{0, 1}, 1}})); }) == "polyint.Unbounded");
    REQUIRE(error_tag([] { Polytope(facets({{RVec{1}, 1}, {RVec{-1}, 0}})); }) == "polyint.OriginNotInterior");
    REQUIRE(error_tag([] { Polytope(facets({{RVec{2}, 1}, {RVec{-1}, 1}})); }) == "polyint.NonPrimitiveNormal");
    REQUIRE(error_tag([] { Polytope(facets({{RVec{Q(1, 2)}, 1}, {RVec{-1}, 1}})); }) == "polyint.NonPrimitiveNormal");
    REQUIRE(error_tag([] {
        Polytope(facets({{RVec{1, 0}, 1}, {RVec{-1, 0}, 1}, {RVec{0, 1}, 1}, {RVec{0, -1}, 1}, {RVec{1, 1}, 5}}));
    }) == "polyint.RedundantFacet");
    REQUIRE(error_tag([] {
        restrict_to_chamber(Polytope(fixture::facets({{RVec{1}, 6}, {RVec{-1}, 4}})), fixture::a1_roots());
    }) == "polyint.NotWInvariant");
    REQUIRE(error_tag([] { restrict_to_chamber(Polytope(fixture::a1_quadric().facets), fixture::torus(2)); }) ==
            "polyint.RankMismatch");
}
