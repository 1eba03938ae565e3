#pragma once

#include <gmpxx.h>

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace gcstab {

using Rational = mpq_class;
using RVec = std::vector<Rational>;

/// Parses "p/q", "p" or a decimal-free integer string into a canonical rational.
Rational parse_rational(const std::string& s);
std::string to_string(const Rational& q);
double to_double(const Rational& q);

RVec zeros(std::size_t n);
RVec operator+(const RVec& a, const RVec& b);
RVec operator-(const RVec& a, const RVec& b);
RVec operator*(const Rational& s, const RVec& a);
Rational dot(const RVec& a, const RVec& b);
bool is_zero(const RVec& a);
std::vector<double> to_double(const RVec& v);
std::vector<std::string> to_strings(const RVec& v);

/// Dense row-major rational matrix. Sizes here never exceed a handful of rows.
class RMat {
public:
    RMat() = default;
    RMat(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), a_(rows * cols) {}

    static RMat identity(std::size_t n);
    static RMat from_rows(const std::vector<RVec>& rows, std::size_t cols);
    static RMat from_columns(const std::vector<RVec>& cols, std::size_t rows);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    Rational& operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
    const Rational& operator()(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }

    RVec row(std::size_t i) const;
    RVec col(std::size_t j) const;
    RMat transpose() const;
    RVec operator*(const RVec& v) const;
    RMat operator*(const RMat& b) const;
    bool operator==(const RMat& b) const;
    bool operator<(const RMat& b) const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<Rational> a_;
};

std::size_t rank(RMat m);
Rational determinant(RMat m);
/// Unique solution of a square nonsingular system, or nullopt when singular.
std::optional<RVec> solve(RMat a, RVec b);
std::optional<RMat> inverse(const RMat& m);
/// Basis of {x : m x = 0}.
std::vector<RVec> nullspace(RMat m);
/// Affine dimension of a finite point set (-1 for the empty set).
int affine_dimension(const std::vector<RVec>& pts);

}  // namespace gcstab
