#include "cbleak/matrix.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

#include "cbleak/kernels.hpp"

namespace cbleak {

Matrix Matrix::from_values(std::size_t rows, std::size_t cols, std::vector<double> values) {
    if (values.size() != rows * cols) {
        throw std::invalid_argument("Matrix::from_values: value count does not match rows*cols");
    }
    Matrix m;
    m.rows_ = rows;
    m.cols_ = cols;
    m.v_ = std::move(values);
    return m;
}

bool Matrix::all_finite() const {
    for (double x : v_) {
        if (!std::isfinite(x)) {
            return false;
        }
    }
    return true;
}

Matrix gemm_nt(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.cols()) {
        throw std::invalid_argument("gemm_nt: inner dimensions differ");
    }
    Matrix c(a.rows(), b.rows());
    const std::size_t k = a.cols();
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double* ai = a.row(i);
        double* ci = c.row(i);
        for (std::size_t j = 0; j < b.rows(); ++j) {
            ci[j] = kernels::dot(ai, b.row(j), k);
        }
    }
    return c;
}

Matrix gemm_nn(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) {
        throw std::invalid_argument("gemm_nn: inner dimensions differ");
    }
    Matrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double* ai = a.row(i);
        double* ci = c.row(i);
        for (std::size_t t = 0; t < a.cols(); ++t) {
            kernels::axpy(ai[t], b.row(t), ci, b.cols());
        }
    }
    return c;
}

Matrix gemm_tn(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows()) {
        throw std::invalid_argument("gemm_tn: outer dimensions differ");
    }
    Matrix c(a.cols(), b.cols());
    for (std::size_t t = 0; t < a.rows(); ++t) {
        const double* at = a.row(t);
        const double* bt = b.row(t);
        for (std::size_t i = 0; i < a.cols(); ++i) {
            kernels::axpy(at[i], bt, c.row(i), b.cols());
        }
    }
    return c;
}

Matrix hstack(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows()) {
        throw std::invalid_argument("hstack: row counts differ");
    }
    Matrix c(a.rows(), a.cols() + b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double* ci = c.row(i);
        const double* ai = a.row(i);
        const double* bi = b.row(i);
        for (std::size_t j = 0; j < a.cols(); ++j) {
            ci[j] = ai[j];
        }
        for (std::size_t j = 0; j < b.cols(); ++j) {
            ci[a.cols() + j] = bi[j];
        }
    }
    return c;
}

Matrix take_rows(const Matrix& m, std::span<const std::size_t> idx) {
    Matrix out(idx.size(), m.cols());
    for (std::size_t i = 0; i < idx.size(); ++i) {
        if (idx[i] >= m.rows()) {
            throw std::invalid_argument("take_rows: index out of range");
        }
        const double* src = m.row(idx[i]);
        double* dst = out.row(i);
        for (std::size_t j = 0; j < m.cols(); ++j) {
            dst[j] = src[j];
        }
    }
    return out;
}

void add_row_vector(Matrix& m, std::span<const double> v) {
    if (v.size() != m.cols()) {
        throw std::invalid_argument("add_row_vector: length does not match cols");
    }
    for (std::size_t i = 0; i < m.rows(); ++i) {
        kernels::axpy(1.0, v.data(), m.row(i), m.cols());
    }
}

}  // namespace cbleak
