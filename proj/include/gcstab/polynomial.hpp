#pragma once

#include "gcstab/rational.hpp"

#include <map>
#include <vector>

namespace gcstab {

/// Sparse multivariate polynomial with exact rational coefficients.
class Polynomial {
public:
    using Exponents = std::vector<int>;

    Polynomial() = default;
    explicit Polynomial(std::size_t nvars) : nvars_(nvars) {}

    static Polynomial constant(std::size_t nvars, const Rational& c);
    static Polynomial variable(std::size_t nvars, std::size_t i);
    /// a·y + c
    static Polynomial linear(const RVec& a, const Rational& c = 0);
    static Polynomial monomial(const Exponents& e, const Rational& c = 1);

    std::size_t nvars() const { return nvars_; }
    const std::map<Exponents, Rational>& terms() const { return terms_; }
    int degree() const;
    bool is_zero() const { return terms_.empty(); }
    bool is_homogeneous() const;
    Rational coefficient(const Exponents& e) const;

    void add_term(const Exponents& e, const Rational& c);

    Polynomial operator+(const Polynomial& b) const;
    Polynomial operator-(const Polynomial& b) const;
    Polynomial operator*(const Polynomial& b) const;
    Polynomial operator-() const;
    Polynomial& operator+=(const Polynomial& b);
    bool operator==(const Polynomial& b) const { return nvars_ == b.nvars_ && terms_ == b.terms_; }

    Polynomial derivative(std::size_t i) const;
    Rational evaluate(const RVec& y) const;
    double evaluate(const double* y) const;
    /// g(z) = f(M z + b), M is nvars × m.
    Polynomial compose_linear(const RMat& m, const RVec& b) const;

private:
    std::size_t nvars_ = 0;
    std::map<Exponents, Rational> terms_;
};

Polynomial operator*(const Rational& s, const Polynomial& p);
Polynomial pow(const Polynomial& p, int k);

/// Double-precision evaluator with cached derivative tables up to order 4.
class CompiledPolynomial {
public:
    CompiledPolynomial() = default;
    explicit CompiledPolynomial(const Polynomial& p, int max_order = 2);

    std::size_t nvars() const { return nvars_; }
    int max_order() const { return max_order_; }
    double value(const double* y) const;
    void gradient(const double* y, double* g) const;
    /// Row-major r×r.
    void hessian(const double* y, double* h) const;
    /// Flattened r^3 and r^4 tensors.
    void third(const double* y, double* t) const;
    void fourth(const double* y, double* t) const;

private:
    struct Term {
        double c;
        std::vector<int> e;
    };
    using Flat = std::vector<Term>;
    static Flat flatten(const Polynomial& p);
    double eval(const Flat& f, const double* y) const;

    std::size_t nvars_ = 0;
    int max_order_ = 0;
    int max_exp_ = 0;
    Flat f_;
    std::vector<Flat> d1_, d2_, d3_, d4_;
};

}  // namespace gcstab
