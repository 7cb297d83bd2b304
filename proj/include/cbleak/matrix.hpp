#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace cbleak {

// Dense row-major matrix of 64-bit floats.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), v_(rows * cols, 0.0) {}

    static Matrix from_values(std::size_t rows, std::size_t cols, std::vector<double> values);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return v_.size(); }

    double& operator()(std::size_t i, std::size_t j) { return v_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return v_[i * cols_ + j]; }

    double* row(std::size_t i) { return v_.data() + i * cols_; }
    const double* row(std::size_t i) const { return v_.data() + i * cols_; }
    std::span<double> row_span(std::size_t i) { return {row(i), cols_}; }
    std::span<const double> row_span(std::size_t i) const { return {row(i), cols_}; }

    double* data() { return v_.data(); }
    const double* data() const { return v_.data(); }
    const std::vector<double>& values() const { return v_; }

    bool all_finite() const;

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> v_;
};

// C(m,n) = A(m,k) * B(n,k)^T  (rows of A dotted with rows of B)
Matrix gemm_nt(const Matrix& a, const Matrix& b);

// C(m,n) = A(m,k) * B(k,n)
Matrix gemm_nn(const Matrix& a, const Matrix& b);

// C(m,n) = A(k,m)^T * B(k,n)
Matrix gemm_tn(const Matrix& a, const Matrix& b);

Matrix hstack(const Matrix& a, const Matrix& b);
Matrix take_rows(const Matrix& m, std::span<const std::size_t> idx);

// m(i, :) += v for every row i
void add_row_vector(Matrix& m, std::span<const double> v);

}  // namespace cbleak
