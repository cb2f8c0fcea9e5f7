#include "leach/sparse.hpp"

#include "leach/errors.hpp"

#include <algorithm>
#include <cmath>

namespace leach {

double dot(std::span<const double> a, std::span<const double> b)
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double norm_inf(std::span<const double> a)
{
    double m = 0.0;
    for (double v : a) m = std::max(m, std::abs(v));
    return m;
}

SparseMatrix SparseMatrix::from_triplets(std::size_t rows, std::size_t cols, std::vector<Triplet> entries)
{
    std::sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });

    SparseMatrix m;
    m.cols_ = cols;
    m.row_ptr_.assign(rows + 1, 0);
    m.col_.reserve(entries.size());
    m.values_.reserve(entries.size());

    std::size_t e = 0;
    for (std::size_t r = 0; r < rows; ++r) {
        while (e < entries.size() && entries[e].row == r) {
            const std::size_t c = entries[e].col;
            if (c >= cols) throw InvalidInput("sparse: column index out of range");
            double v = 0.0;
            while (e < entries.size() && entries[e].row == r && entries[e].col == c) v += entries[e++].value;
            m.col_.push_back(c);
            m.values_.push_back(v);
        }
        m.row_ptr_[r + 1] = m.col_.size();
    }
    if (e != entries.size()) throw InvalidInput("sparse: row index out of range");
    return m;
}

SparseMatrix SparseMatrix::from_csr(std::size_t rows, std::size_t cols, std::vector<std::size_t> row_ptr,
                                    std::vector<std::size_t> col, std::vector<double> values)
{
    if (row_ptr.size() != rows + 1 || row_ptr.front() != 0 || row_ptr.back() != col.size() ||
        col.size() != values.size())
        throw InvalidInput("sparse: inconsistent CSR arrays");
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k)
            if (col[k] >= cols || (k > row_ptr[r] && col[k] <= col[k - 1]))
                throw InvalidInput("sparse: CSR columns out of range or unsorted");
    SparseMatrix m;
    m.cols_ = cols;
    m.row_ptr_ = std::move(row_ptr);
    m.col_ = std::move(col);
    m.values_ = std::move(values);
    return m;
}

void SparseMatrix::multiply(std::span<const double> x, std::span<double> y) const
{
    const std::size_t nr = rows();
    for (std::size_t r = 0; r < nr; ++r) {
        double s = 0.0;
        for (std::size_t p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) s += values_[p] * x[col_[p]];
        y[r] = s;
    }
}

std::vector<double> SparseMatrix::diagonal() const
{
    std::vector<double> d(rows(), 0.0);
    for (std::size_t r = 0; r < rows(); ++r) d[r] = coeff(r, r);
    return d;
}

double SparseMatrix::coeff(std::size_t row, std::size_t col) const
{
    const auto first = col_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[row]);
    const auto last = col_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[row + 1]);
    const auto it = std::lower_bound(first, last, col);
    if (it == last || *it != col) return 0.0;
    return values_[static_cast<std::size_t>(it - col_.begin())];
}

double SparseMatrix::row_sum(std::size_t row) const
{
    double s = 0.0;
    for (std::size_t p = row_ptr_[row]; p < row_ptr_[row + 1]; ++p) s += values_[p];
    return s;
}

std::vector<std::vector<double>> orthonormalize(std::vector<std::vector<double>> basis)
{
    std::vector<std::vector<double>> out;
    for (auto& v : basis) {
        const double original = norm2(v);
        if (original == 0.0) continue;
        for (int pass = 0; pass < 2; ++pass) {
            for (const auto& q : out) {
                const double c = dot(v, q);
                for (std::size_t i = 0; i < v.size(); ++i) v[i] -= c * q[i];
            }
        }
        const double nv = norm2(v);
        if (nv <= 1e-12 * original) continue;
        for (double& x : v) x /= nv;
        out.push_back(std::move(v));
    }
    return out;
}

LinearOperator::LinearOperator(std::size_t dim, Apply apply, std::vector<double> diagonal,
                               std::vector<std::vector<double>> nullspace)
    : dim_(dim), apply_(std::move(apply)), diagonal_(std::move(diagonal)),
      nullspace_(orthonormalize(std::move(nullspace)))
{
    if (diagonal_.size() != dim_) throw InvalidInput("operator: diagonal size mismatch");
    for (const auto& v : nullspace_)
        if (v.size() != dim_) throw InvalidInput("operator: nullspace vector size mismatch");
}

LinearOperator LinearOperator::from_matrix(SparseMatrix matrix, std::vector<std::vector<double>> nullspace)
{
    if (matrix.rows() != matrix.cols()) throw InvalidInput("operator: matrix must be square");
    auto shared = std::make_shared<const SparseMatrix>(std::move(matrix));
    LinearOperator op(
        shared->rows(), [m = shared](std::span<const double> x, std::span<double> y) { m->multiply(x, y); },
        shared->diagonal(), std::move(nullspace));
    op.matrix_ = shared;
    return op;
}

std::vector<double> LinearOperator::operator()(std::span<const double> x) const
{
    std::vector<double> y(dim_);
    apply_(x, y);
    return y;
}

void LinearOperator::project_out_nullspace(std::span<double> x) const
{
    for (const auto& q : nullspace_) {
        const double c = dot(x, q);
        for (std::size_t i = 0; i < x.size(); ++i) x[i] -= c * q[i];
    }
}

}  // namespace leach
