#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace leach {

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
double norm_inf(std::span<const double> a);

struct Triplet {
    std::size_t row;
    std::size_t col;
    double value;
};

/// Compressed sparse row matrix. Built once from triplets, immutable afterwards.
class SparseMatrix {
public:
    SparseMatrix() = default;

    /// Duplicate (row, col) entries are summed; column order within a row is ascending.
    static SparseMatrix from_triplets(std::size_t rows, std::size_t cols, std::vector<Triplet> entries);
    /// Takes ownership of a ready CSR layout; columns must be ascending within each row.
    static SparseMatrix from_csr(std::size_t rows, std::size_t cols, std::vector<std::size_t> row_ptr,
                                 std::vector<std::size_t> col, std::vector<double> values);

    std::size_t rows() const noexcept { return row_ptr_.empty() ? 0 : row_ptr_.size() - 1; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t nnz() const noexcept { return values_.size(); }

    void multiply(std::span<const double> x, std::span<double> y) const;
    std::vector<double> diagonal() const;
    double coeff(std::size_t row, std::size_t col) const;
    double row_sum(std::size_t row) const;

    std::span<const std::size_t> row_ptr() const noexcept { return row_ptr_; }
    std::span<const std::size_t> col_index() const noexcept { return col_; }
    std::span<const double> values() const noexcept { return values_; }

private:
    std::size_t cols_ = 0;
    std::vector<std::size_t> row_ptr_;
    std::vector<std::size_t> col_;
    std::vector<double> values_;
};

/// Symmetric linear map y = A x with an optional (orthonormalized) nullspace basis.
///
/// The action is either an assembled SparseMatrix or an arbitrary callable
/// (used for Schur complements). The diagonal feeds the Jacobi preconditioner.
class LinearOperator {
public:
    using Apply = std::function<void(std::span<const double>, std::span<double>)>;

    LinearOperator() = default;
    LinearOperator(std::size_t dim, Apply apply, std::vector<double> diagonal,
                   std::vector<std::vector<double>> nullspace = {});

    static LinearOperator from_matrix(SparseMatrix matrix, std::vector<std::vector<double>> nullspace = {});

    std::size_t dim() const noexcept { return dim_; }
    void apply(std::span<const double> x, std::span<double> y) const { apply_(x, y); }
    std::vector<double> operator()(std::span<const double> x) const;

    const std::vector<double>& diagonal() const noexcept { return diagonal_; }
    const std::vector<std::vector<double>>& nullspace() const noexcept { return nullspace_; }
    /// Null when the operator is matrix-free.
    const SparseMatrix* matrix() const noexcept { return matrix_.get(); }

    /// x <- x - sum_k <x, v_k> v_k over the orthonormal nullspace basis.
    void project_out_nullspace(std::span<double> x) const;

private:
    std::size_t dim_ = 0;
    Apply apply_;
    std::vector<double> diagonal_;
    std::vector<std::vector<double>> nullspace_;
    std::shared_ptr<const SparseMatrix> matrix_;
};

/// Modified Gram-Schmidt; drops vectors that become numerically dependent.
std::vector<std::vector<double>> orthonormalize(std::vector<std::vector<double>> basis);

}  // namespace leach
