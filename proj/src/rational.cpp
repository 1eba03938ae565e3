#include "gcstab/rational.hpp"

#include "gcstab/error.hpp"

#include <algorithm>
#include <cctype>

namespace gcstab {

Rational parse_rational(const std::string& s) {
    std::string t;
    for (char c : s)
        if (c != ' ') t.push_back(c);
    if (t.empty()) throw Error("input", "BadRational", "empty rational string");
    Rational q;
    bool ok = true;
    for (std::size_t i = 0; i < t.size(); ++i) {
        char c = t[i];
        bool sign_ok = (c == '-' || c == '+') && (i == 0 || t[i - 1] == '/');
        if (!(std::isdigit(static_cast<unsigned char>(c)) || c == '/' || sign_ok)) ok = false;
    }
    if (!ok || std::count(t.begin(), t.end(), '/') > 1 || t.front() == '/' || t.back() == '/')
        throw Error("input", "BadRational", "not a rational: '" + s + "'");
    if (t.front() == '+') t.erase(t.begin());
    if (q.set_str(t, 10) != 0) throw Error("input", "BadRational", "not a rational: '" + s + "'");
    if (q.get_den() == 0) throw Error("input", "BadRational", "zero denominator: '" + s + "'");
    q.canonicalize();
    return q;
}

std::string to_string(const Rational& q) { return q.get_str(); }
double to_double(const Rational& q) { return q.get_d(); }

RVec zeros(std::size_t n) { return RVec(n, Rational(0)); }

RVec operator+(const RVec& a, const RVec& b) {
    RVec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
    return r;
}

RVec operator-(const RVec& a, const RVec& b) {
    RVec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
    return r;
}

RVec operator*(const Rational& s, const RVec& a) {
    RVec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = s * a[i];
    return r;
}

Rational dot(const RVec& a, const RVec& b) {
    Rational s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

bool is_zero(const RVec& a) {
    return std::all_of(a.begin(), a.end(), [](const Rational& x) { return sgn(x) == 0; });
}

std::vector<double> to_double(const RVec& v) {
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) r[i] = v[i].get_d();
    return r;
}

std::vector<std::string> to_strings(const RVec& v) {
    std::vector<std::string> r;
    r.reserve(v.size());
    for (const auto& x : v) r.push_back(x.get_str());
    return r;
}

RMat RMat::identity(std::size_t n) {
    RMat m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1;
    return m;
}

RMat RMat::from_rows(const std::vector<RVec>& rows, std::size_t cols) {
    RMat m(rows.size(), cols);
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < cols; ++j) m(i, j) = rows[i][j];
    return m;
}

RMat RMat::from_columns(const std::vector<RVec>& cols, std::size_t rows) {
    RMat m(rows, cols.size());
    for (std::size_t j = 0; j < cols.size(); ++j)
        for (std::size_t i = 0; i < rows; ++i) m(i, j) = cols[j][i];
    return m;
}

RVec RMat::row(std::size_t i) const {
    return RVec(a_.begin() + static_cast<long>(i * cols_), a_.begin() + static_cast<long>((i + 1) * cols_));
}

RVec RMat::col(std::size_t j) const {
    RVec c(rows_);
    for (std::size_t i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
    return c;
}

RMat RMat::transpose() const {
    RMat t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
}

RVec RMat::operator*(const RVec& v) const {
    RVec r(rows_, Rational(0));
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) r[i] += (*this)(i, j) * v[j];
    return r;
}

RMat RMat::operator*(const RMat& b) const {
    RMat r(rows_, b.cols_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t k = 0; k < cols_; ++k) {
            if (sgn((*this)(i, k)) == 0) continue;
            for (std::size_t j = 0; j < b.cols_; ++j) r(i, j) += (*this)(i, k) * b(k, j);
        }
    return r;
}

bool RMat::operator==(const RMat& b) const {
    return rows_ == b.rows_ && cols_ == b.cols_ && a_ == b.a_;
}

bool RMat::operator<(const RMat& b) const {
    return std::lexicographical_compare(a_.begin(), a_.end(), b.a_.begin(), b.a_.end());
}

namespace {

// In-place reduced row echelon form; returns pivot columns.
std::vector<std::size_t> rref(RMat& m) {
    std::vector<std::size_t> pivots;
    std::size_t r = 0;
    for (std::size_t c = 0; c < m.cols() && r < m.rows(); ++c) {
        std::size_t p = r;
        while (p < m.rows() && sgn(m(p, c)) == 0) ++p;
        if (p == m.rows()) continue;
        if (p != r)
            for (std::size_t j = 0; j < m.cols(); ++j) std::swap(m(p, j), m(r, j));
        Rational inv = 1 / m(r, c);
        for (std::size_t j = c; j < m.cols(); ++j) m(r, j) *= inv;
        for (std::size_t i = 0; i < m.rows(); ++i) {
            if (i == r || sgn(m(i, c)) == 0) continue;
            Rational f = m(i, c);
            for (std::size_t j = c; j < m.cols(); ++j) m(i, j) -= f * m(r, j);
        }
        pivots.push_back(c);
        ++r;
    }
    return pivots;
}

}  // namespace

std::size_t rank(RMat m) { return rref(m).size(); }

Rational determinant(RMat m) {
    const std::size_t n = m.rows();
    Rational det = 1;
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t p = c;
        while (p < n && sgn(m(p, c)) == 0) ++p;
        if (p == n) return 0;
        if (p != c) {
            for (std::size_t j = 0; j < n; ++j) std::swap(m(p, j), m(c, j));
            det = -det;
        }
        det *= m(c, c);
        for (std::size_t i = c + 1; i < n; ++i) {
            if (sgn(m(i, c)) == 0) continue;
            Rational f = m(i, c) / m(c, c);
            for (std::size_t j = c; j < n; ++j) m(i, j) -= f * m(c, j);
        }
    }
    return det;
}

std::optional<RVec> solve(RMat a, RVec b) {
    const std::size_t n = a.rows();
    RMat aug(n, n + 1);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) aug(i, j) = a(i, j);
        aug(i, n) = b[i];
    }
    auto piv = rref(aug);
    if (piv.size() < n || piv.back() >= n) return std::nullopt;
    RVec x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = aug(i, n);
    return x;
}

std::optional<RMat> inverse(const RMat& m) {
    const std::size_t n = m.rows();
    RMat aug(n, 2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) aug(i, j) = m(i, j);
        aug(i, n + i) = 1;
    }
    auto piv = rref(aug);
    if (piv.size() < n || piv.back() >= n) return std::nullopt;
    RMat inv(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) inv(i, j) = aug(i, n + j);
    return inv;
}

std::vector<RVec> nullspace(RMat m) {
    auto piv = rref(m);
    std::vector<bool> is_pivot(m.cols(), false);
    for (auto p : piv) is_pivot[p] = true;
    std::vector<RVec> basis;
    for (std::size_t free = 0; free < m.cols(); ++free) {
        if (is_pivot[free]) continue;
        RVec v = zeros(m.cols());
        v[free] = 1;
        for (std::size_t r = 0; r < piv.size(); ++r) v[piv[r]] = -m(r, free);
        basis.push_back(std::move(v));
    }
    return basis;
}

int affine_dimension(const std::vector<RVec>& pts) {
    if (pts.empty()) return -1;
    if (pts.size() == 1) return 0;
    std::vector<RVec> diffs;
    for (std::size_t i = 1; i < pts.size(); ++i) diffs.push_back(pts[i] - pts[0]);
    return static_cast<int>(rank(RMat::from_rows(diffs, pts[0].size())));
}

}  // namespace gcstab
