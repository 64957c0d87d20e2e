#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "homogcl/common.hpp"

namespace homogcl {

// Row-major dense matrix of 64-bit reals.
class DenseMatrix {
public:
    DenseMatrix() = default;
    DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static DenseMatrix from_rows(std::vector<std::vector<double>> rows) {
        if (rows.empty()) return {};
        DenseMatrix m(rows.size(), rows.front().size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].size() != m.cols_) fail<DataError>("ragged rows in matrix literal");
            std::copy(rows[i].begin(), rows[i].end(), m.row(i).begin());
        }
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    const double& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
    std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    bool same_shape(const DenseMatrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

    bool all_finite() const {
        for (double x : data_)
            if (!std::isfinite(x)) return false;
        return true;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

inline void require_same_shape(const DenseMatrix& a, const DenseMatrix& b, const char* op) {
    if (!a.same_shape(b))
        fail<DataError>(op, ": shape mismatch (", a.rows(), "x", a.cols(), " vs ", b.rows(), "x",
                        b.cols(), ")");
}

// CSR sparse matrix; column indices sorted within each row.
struct CsrMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::size_t> row_ptr;  // size rows + 1
    std::vector<std::size_t> col_idx;
    std::vector<double> values;

    std::size_t nnz() const { return values.size(); }

    static CsrMatrix from_coo(std::size_t rows, std::size_t cols,
                              std::vector<std::tuple<std::size_t, std::size_t, double>> coo) {
        std::sort(coo.begin(), coo.end(), [](const auto& a, const auto& b) {
            return std::get<0>(a) != std::get<0>(b) ? std::get<0>(a) < std::get<0>(b)
                                                    : std::get<1>(a) < std::get<1>(b);
        });
        CsrMatrix m;
        m.rows = rows;
        m.cols = cols;
        m.row_ptr.assign(rows + 1, 0);
        m.col_idx.reserve(coo.size());
        m.values.reserve(coo.size());
        for (const auto& [i, j, v] : coo) {
            if (i >= rows || j >= cols) fail<DataError>("coo entry out of range");
            m.row_ptr[i + 1]++;
            m.col_idx.push_back(j);
            m.values.push_back(v);
        }
        for (std::size_t i = 0; i < rows; ++i) m.row_ptr[i + 1] += m.row_ptr[i];
        return m;
    }

    DenseMatrix to_dense() const {
        DenseMatrix d(rows, cols);
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t e = row_ptr[i]; e < row_ptr[i + 1]; ++e) d(i, col_idx[e]) = values[e];
        return d;
    }
};

inline CsrMatrix csr_identity(std::size_t n) {
    CsrMatrix m;
    m.rows = m.cols = n;
    m.row_ptr.resize(n + 1);
    m.col_idx.resize(n);
    m.values.assign(n, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
        m.row_ptr[i] = i;
        m.col_idx[i] = i;
    }
    m.row_ptr[n] = n;
    return m;
}

// ---- dense kernels ----

inline DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols() != b.rows())
        fail<DataError>("matmul: inner dimensions disagree (", a.cols(), " vs ", b.rows(), ")");
    DenseMatrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double* ci = &c(i, 0);
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            const double* bk = &b(k, 0);
            for (std::size_t j = 0; j < b.cols(); ++j) ci[j] += aik * bk[j];
        }
    }
    return c;
}

// a * b^T without materializing the transpose.
inline DenseMatrix matmul_nt(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols() != b.cols())
        fail<DataError>("matmul_nt: inner dimensions disagree (", a.cols(), " vs ", b.cols(), ")");
    DenseMatrix c(a.rows(), b.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double* ai = &a(i, 0);
        for (std::size_t j = 0; j < b.rows(); ++j) {
            const double* bj = &b(j, 0);
            double s = 0.0;
            for (std::size_t k = 0; k < a.cols(); ++k) s += ai[k] * bj[k];
            c(i, j) = s;
        }
    }
    return c;
}

// a^T * b.
inline DenseMatrix matmul_tn(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.rows() != b.rows())
        fail<DataError>("matmul_tn: inner dimensions disagree (", a.rows(), " vs ", b.rows(), ")");
    DenseMatrix c(a.cols(), b.cols());
    for (std::size_t k = 0; k < a.rows(); ++k) {
        const double* ak = &a(k, 0);
        const double* bk = &b(k, 0);
        for (std::size_t i = 0; i < a.cols(); ++i) {
            const double aki = ak[i];
            if (aki == 0.0) continue;
            double* ci = &c(i, 0);
            for (std::size_t j = 0; j < b.cols(); ++j) ci[j] += aki * bk[j];
        }
    }
    return c;
}

inline DenseMatrix transpose(const DenseMatrix& a) {
    DenseMatrix t(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
    return t;
}

// CSR * dense, single-threaded for a fixed accumulation order.
inline DenseMatrix spmm(const CsrMatrix& a, const DenseMatrix& b) {
    if (a.cols != b.rows())
        fail<DataError>("spmm: inner dimensions disagree (", a.cols, " vs ", b.rows(), ")");
    DenseMatrix c(a.rows, b.cols());
    for (std::size_t i = 0; i < a.rows; ++i) {
        double* ci = &c(i, 0);
        for (std::size_t e = a.row_ptr[i]; e < a.row_ptr[i + 1]; ++e) {
            const double v = a.values[e];
            const double* bk = &b(a.col_idx[e], 0);
            for (std::size_t j = 0; j < b.cols(); ++j) ci[j] += v * bk[j];
        }
    }
    return c;
}

// CSR^T * dense (used by reverse mode; equals spmm for symmetric matrices
// but is computed explicitly so no symmetry assumption leaks in).
inline DenseMatrix spmm_t(const CsrMatrix& a, const DenseMatrix& b) {
    if (a.rows != b.rows())
        fail<DataError>("spmm_t: inner dimensions disagree (", a.rows, " vs ", b.rows(), ")");
    DenseMatrix c(a.cols, b.cols());
    for (std::size_t i = 0; i < a.rows; ++i) {
        const double* bi = &b(i, 0);
        for (std::size_t e = a.row_ptr[i]; e < a.row_ptr[i + 1]; ++e) {
            const double v = a.values[e];
            double* cj = &c(a.col_idx[e], 0);
            for (std::size_t j = 0; j < b.cols(); ++j) cj[j] += v * bi[j];
        }
    }
    return c;
}

template <typename F>
DenseMatrix map(const DenseMatrix& a, F&& f) {
    DenseMatrix c = a;
    for (double& x : c.data()) x = f(x);
    return c;
}

template <typename F>
DenseMatrix zip(const DenseMatrix& a, const DenseMatrix& b, const char* op, F&& f) {
    require_same_shape(a, b, op);
    DenseMatrix c = a;
    for (std::size_t i = 0; i < c.size(); ++i) c.data()[i] = f(a.data()[i], b.data()[i]);
    return c;
}

inline DenseMatrix add(const DenseMatrix& a, const DenseMatrix& b) {
    return zip(a, b, "add", [](double x, double y) { return x + y; });
}
inline DenseMatrix sub(const DenseMatrix& a, const DenseMatrix& b) {
    return zip(a, b, "sub", [](double x, double y) { return x - y; });
}
inline DenseMatrix mul(const DenseMatrix& a, const DenseMatrix& b) {
    return zip(a, b, "mul", [](double x, double y) { return x * y; });
}
inline DenseMatrix scalar_mul(const DenseMatrix& a, double s) {
    return map(a, [s](double x) { return s * x; });
}
inline DenseMatrix scalar_add(const DenseMatrix& a, double s) {
    return map(a, [s](double x) { return s + x; });
}
inline DenseMatrix relu(const DenseMatrix& a) {
    return map(a, [](double x) { return x > 0.0 ? x : 0.0; });
}

inline DenseMatrix row_sums(const DenseMatrix& a) {
    DenseMatrix c(a.rows(), 1);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double s = 0.0;
        for (double x : a.row(i)) s += x;
        c(i, 0) = s;
    }
    return c;
}

inline DenseMatrix col_sums(const DenseMatrix& a) {
    DenseMatrix c(1, a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) c(0, j) += a(i, j);
    return c;
}

inline double sum_all(const DenseMatrix& a) {
    double s = 0.0;
    for (double x : a.data()) s += x;
    return s;
}

inline double row_norm2(const DenseMatrix& a, std::size_t i) {
    double s = 0.0;
    for (double x : a.row(i)) s += x * x;
    return std::sqrt(s);
}

// Rows of unit L2 norm; zero rows map to zero rows.
inline DenseMatrix row_l2_normalize(const DenseMatrix& a) {
    DenseMatrix c = a;
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double n = row_norm2(a, i);
        if (n == 0.0) continue;
        for (double& x : c.row(i)) x /= n;
    }
    return c;
}

inline DenseMatrix gather_rows(const DenseMatrix& a, const std::vector<std::size_t>& idx) {
    DenseMatrix c(idx.size(), a.cols());
    for (std::size_t i = 0; i < idx.size(); ++i) {
        if (idx[i] >= a.rows()) fail<DataError>("gather_rows: index out of range");
        std::copy(a.row(idx[i]).begin(), a.row(idx[i]).end(), c.row(i).begin());
    }
    return c;
}

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double cosine_sim(std::span<const double> u, std::span<const double> v) {
    const double nu = std::sqrt(dot(u, u));
    const double nv = std::sqrt(dot(v, v));
    if (nu == 0.0 || nv == 0.0) return 0.0;
    return dot(u, v) / (nu * nv);
}

// ---- text import/export: first line "rows cols", then row-major reals ----

inline void save_dense(const DenseMatrix& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) fail<IoError>("cannot open for writing: ", path);
    out << m.rows() << " " << m.cols() << "\n";
    out << std::setprecision(17);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            if (j) out << " ";
            out << m(i, j);
        }
        out << "\n";
    }
    if (!out) fail<IoError>("write failed: ", path);
}

inline DenseMatrix load_dense(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail<IoError>("cannot open: ", path);
    std::size_t rows = 0, cols = 0;
    if (!(in >> rows >> cols)) fail<DataError>(path, ": expected 'rows cols' header");
    DenseMatrix m(rows, cols);
    for (std::size_t i = 0; i < rows * cols; ++i) {
        if (!(in >> m.data()[i])) fail<DataError>(path, ": truncated matrix body");
    }
    if (!m.all_finite()) fail<DataError>(path, ": non-finite matrix entry");
    return m;
}

}  // namespace homogcl
