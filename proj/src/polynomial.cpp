#include "gcstab/polynomial.hpp"

#include <algorithm>
#include <stdexcept>

namespace gcstab {

Polynomial Polynomial::constant(std::size_t nvars, const Rational& c) {
    Polynomial p(nvars);
    p.add_term(Exponents(nvars, 0), c);
    return p;
}

Polynomial Polynomial::variable(std::size_t nvars, std::size_t i) {
    Exponents e(nvars, 0);
    e.at(i) = 1;
    Polynomial p(nvars);
    p.add_term(e, 1);
    return p;
}

Polynomial Polynomial::linear(const RVec& a, const Rational& c) {
    Polynomial p = constant(a.size(), c);
    for (std::size_t i = 0; i < a.size(); ++i) {
        Exponents e(a.size(), 0);
        e[i] = 1;
        p.add_term(e, a[i]);
    }
    return p;
}

Polynomial Polynomial::monomial(const Exponents& e, const Rational& c) {
    Polynomial p(e.size());
    p.add_term(e, c);
    return p;
}

int Polynomial::degree() const {
    int d = -1;
    for (const auto& [e, c] : terms_) {
        int s = 0;
        for (int x : e) s += x;
        d = std::max(d, s);
    }
    return d;
}

bool Polynomial::is_homogeneous() const {
    int d = -1;
    for (const auto& [e, c] : terms_) {
        int s = 0;
        for (int x : e) s += x;
        if (d >= 0 && s != d) return false;
        d = s;
    }
    return true;
}

Rational Polynomial::coefficient(const Exponents& e) const {
    auto it = terms_.find(e);
    return it == terms_.end() ? Rational(0) : it->second;
}

void Polynomial::add_term(const Exponents& e, const Rational& c) {
    if (e.size() != nvars_) throw std::invalid_argument("polynomial: exponent length mismatch");
    if (sgn(c) == 0) return;
    auto [it, inserted] = terms_.emplace(e, c);
    if (!inserted) {
        it->second += c;
        if (sgn(it->second) == 0) terms_.erase(it);
    }
}

Polynomial Polynomial::operator+(const Polynomial& b) const {
    Polynomial r = *this;
    r += b;
    return r;
}

Polynomial& Polynomial::operator+=(const Polynomial& b) {
    if (nvars_ == 0 && terms_.empty()) nvars_ = b.nvars_;
    for (const auto& [e, c] : b.terms_) add_term(e, c);
    return *this;
}

Polynomial Polynomial::operator-() const {
    Polynomial r(nvars_);
    for (const auto& [e, c] : terms_) r.terms_.emplace(e, -c);
    return r;
}

Polynomial Polynomial::operator-(const Polynomial& b) const { return *this + (-b); }

Polynomial Polynomial::operator*(const Polynomial& b) const {
    Polynomial r(std::max(nvars_, b.nvars_));
    Exponents e(r.nvars_);
    for (const auto& [ea, ca] : terms_)
        for (const auto& [eb, cb] : b.terms_) {
            for (std::size_t i = 0; i < e.size(); ++i) e[i] = ea[i] + eb[i];
            r.add_term(e, ca * cb);
        }
    return r;
}

Polynomial operator*(const Rational& s, const Polynomial& p) {
    Polynomial r(p.nvars());
    for (const auto& [e, c] : p.terms()) r.add_term(e, s * c);
    return r;
}

Polynomial pow(const Polynomial& p, int k) {
    Polynomial r = Polynomial::constant(p.nvars(), 1);
    for (int i = 0; i < k; ++i) r = r * p;
    return r;
}

Polynomial Polynomial::derivative(std::size_t i) const {
    Polynomial r(nvars_);
    for (const auto& [e, c] : terms_) {
        if (e[i] == 0) continue;
        Exponents d = e;
        --d[i];
        r.add_term(d, c * e[i]);
    }
    return r;
}

Rational Polynomial::evaluate(const RVec& y) const {
    Rational s = 0;
    for (const auto& [e, c] : terms_) {
        Rational t = c;
        for (std::size_t i = 0; i < nvars_; ++i)
            for (int k = 0; k < e[i]; ++k) t *= y[i];
        s += t;
    }
    return s;
}

double Polynomial::evaluate(const double* y) const {
    double s = 0;
    for (const auto& [e, c] : terms_) {
        double t = c.get_d();
        for (std::size_t i = 0; i < nvars_; ++i)
            for (int k = 0; k < e[i]; ++k) t *= y[i];
        s += t;
    }
    return s;
}

Polynomial Polynomial::compose_linear(const RMat& m, const RVec& b) const {
    const std::size_t out = m.cols();
    std::vector<Polynomial> images;
    for (std::size_t i = 0; i < nvars_; ++i) images.push_back(Polynomial::linear(m.row(i), b[i]));
    // Powers of each image are reused across monomials.
    std::vector<std::vector<Polynomial>> powers(nvars_);
    Polynomial r(out);
    for (const auto& [e, c] : terms_) {
        Polynomial t = Polynomial::constant(out, c);
        for (std::size_t i = 0; i < nvars_; ++i) {
            auto& pw = powers[i];
            if (pw.empty()) pw.push_back(Polynomial::constant(out, 1));
            while (static_cast<int>(pw.size()) <= e[i]) pw.push_back(pw.back() * images[i]);
            if (e[i] > 0) t = t * pw[e[i]];
        }
        r += t;
    }
    return r;
}

CompiledPolynomial::Flat CompiledPolynomial::flatten(const Polynomial& p) {
    Flat f;
    for (const auto& [e, c] : p.terms()) f.push_back({c.get_d(), e});
    return f;
}

CompiledPolynomial::CompiledPolynomial(const Polynomial& p, int max_order)
    : nvars_(p.nvars()), max_order_(max_order), f_(flatten(p)) {
    for (const auto& [e, c] : p.terms())
        for (int x : e) max_exp_ = std::max(max_exp_, x);
    const std::size_t r = nvars_;
    std::vector<Polynomial> g, h, t;
    if (max_order >= 1)
        for (std::size_t i = 0; i < r; ++i) {
            g.push_back(p.derivative(i));
            d1_.push_back(flatten(g.back()));
        }
    if (max_order >= 2)
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < r; ++j) {
                h.push_back(g[i].derivative(j));
                d2_.push_back(flatten(h.back()));
            }
    if (max_order >= 3)
        for (std::size_t ij = 0; ij < r * r; ++ij)
            for (std::size_t k = 0; k < r; ++k) {
                t.push_back(h[ij].derivative(k));
                d3_.push_back(flatten(t.back()));
            }
    if (max_order >= 4)
        for (std::size_t ijk = 0; ijk < r * r * r; ++ijk)
            for (std::size_t m = 0; m < r; ++m) d4_.push_back(flatten(t[ijk].derivative(m)));
}

double CompiledPolynomial::eval(const Flat& f, const double* y) const {
    double s = 0;
    for (const auto& term : f) {
        double t = term.c;
        for (std::size_t i = 0; i < nvars_; ++i)
            for (int k = 0; k < term.e[i]; ++k) t *= y[i];
        s += t;
    }
    return s;
}

double CompiledPolynomial::value(const double* y) const { return eval(f_, y); }

void CompiledPolynomial::gradient(const double* y, double* g) const {
    for (std::size_t i = 0; i < nvars_; ++i) g[i] = i < d1_.size() ? eval(d1_[i], y) : 0.0;
}

void CompiledPolynomial::hessian(const double* y, double* h) const {
    if (max_order_ < 2) throw std::logic_error("compiled polynomial: hessian not prepared");
    for (std::size_t i = 0; i < d2_.size(); ++i) h[i] = eval(d2_[i], y);
}

void CompiledPolynomial::third(const double* y, double* t) const {
    if (max_order_ < 3) throw std::logic_error("compiled polynomial: third derivatives not prepared");
    for (std::size_t i = 0; i < d3_.size(); ++i) t[i] = eval(d3_[i], y);
}

void CompiledPolynomial::fourth(const double* y, double* t) const {
    if (max_order_ < 4) throw std::logic_error("compiled polynomial: fourth derivatives not prepared");
    for (std::size_t i = 0; i < d4_.size(); ++i) t[i] = eval(d4_[i], y);
}

}  // namespace gcstab
