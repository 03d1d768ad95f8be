#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

namespace lopalt {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Index = Eigen::Index;

/* Matrix-free linear operator with adjoint. Operators are immutable after
 * construction; apply/adjoint_apply allocate their outputs and may be called
 * concurrently. */
class LinearOperator {
public:
    virtual ~LinearOperator() = default;

    Index rows() const { return rows_; }
    Index cols() const { return cols_; }

    /// y = A x, x of length cols().
    virtual Vec apply(const Vec& x) const = 0;
    /// x = A* y, y of length rows(). Real field, so A* = A^T.
    virtual Vec adjoint_apply(const Vec& y) const = 0;

    /// Closed-form spectral norm where one is known (difference operators).
    virtual std::optional<double> exact_operator_norm() const { return std::nullopt; }

protected:
    LinearOperator(Index rows, Index cols);

    void check_apply_dim(const Vec& x) const;
    void check_adjoint_dim(const Vec& y) const;

private:
    Index rows_;
    Index cols_;
};

using LinOpPtr = std::shared_ptr<const LinearOperator>;

class IdentityOp final : public LinearOperator {
public:
    explicit IdentityOp(Index n) : LinearOperator(n, n) {}
    Vec apply(const Vec& x) const override;
    Vec adjoint_apply(const Vec& y) const override;
    std::optional<double> exact_operator_norm() const override { return 1.0; }
};

class DenseOp final : public LinearOperator {
public:
    explicit DenseOp(Mat m) : LinearOperator(m.rows(), m.cols()), m_(std::move(m)) {}
    Vec apply(const Vec& x) const override;
    Vec adjoint_apply(const Vec& y) const override;
    const Mat& matrix() const { return m_; }

private:
    Mat m_;
};

/* First-order difference for 1D signals, shape (n-1) x n:
 * (Dx)_k = x_{k+1} - x_k. */
class Diff1DOp final : public LinearOperator {
public:
    explicit Diff1DOp(Index n);
    Vec apply(const Vec& x) const override;
    Vec adjoint_apply(const Vec& y) const override;
    // Largest singular value of D: eigenvalues of DD^T are 4 sin^2(k pi / 2n),
    // k = 1..n-1, so ||D|| = 2 sin((n-1) pi / 2n) < 2.
    std::optional<double> exact_operator_norm() const override;

private:
    Index n_;
};

/* Grid differences for an h x w image vectorized row-major: vertical
 * differences within columns, (h-1)*w of them, stacked above horizontal
 * differences within rows, h*(w-1) of them. */
class Diff2DOp final : public LinearOperator {
public:
    Diff2DOp(Index h, Index w);
    Vec apply(const Vec& x) const override;
    Vec adjoint_apply(const Vec& y) const override;
    std::optional<double> exact_operator_norm() const override;

    Index image_rows() const { return h_; }
    Index image_cols() const { return w_; }

private:
    Index h_;
    Index w_;
};

class BlockDiagOp final : public LinearOperator {
public:
    explicit BlockDiagOp(std::vector<LinOpPtr> blocks);
    Vec apply(const Vec& x) const override;
    Vec adjoint_apply(const Vec& y) const override;
    // Block diagonal: norm is the max over blocks, exact when all blocks are.
    std::optional<double> exact_operator_norm() const override;

private:
    static Index sum_rows(const std::vector<LinOpPtr>& blocks);
    static Index sum_cols(const std::vector<LinOpPtr>& blocks);
    std::vector<LinOpPtr> blocks_;
};

/* The stacked constraint operator
 *
 *       [ mu1 L   0      -mu1 I   0        0     ]
 *   H = [ mu2 R   0       0      -mu2 I    0     ]
 *       [ 0       mu3 D   0       0       -mu3 I ]
 *
 * acting on w = (x, sigma, u, v, eta). Hw = 0 encodes u = Lx, v = Rx,
 * eta = D sigma. */
class StackedConstraintOperator final : public LinearOperator {
public:
    StackedConstraintOperator(LinOpPtr L, LinOpPtr R, LinOpPtr D,
                              double mu1, double mu2, double mu3);

    Vec apply(const Vec& w) const override;
    Vec adjoint_apply(const Vec& r) const override;

    Index x_dim() const { return L_->cols(); }
    Index sigma_dim() const { return R_->rows(); }
    Index u_dim() const { return L_->rows(); }
    Index v_dim() const { return R_->rows(); }
    Index eta_dim() const { return D_->rows(); }

private:
    LinOpPtr L_, R_, D_;
    double mu1_, mu2_, mu3_;
};

LinOpPtr make_identity(Index n);
LinOpPtr make_dense(Mat m);
LinOpPtr make_diff_1d(Index n);
LinOpPtr make_diff_2d(Index h, Index w);
LinOpPtr make_block_diag(std::vector<LinOpPtr> blocks);

/// Materialize an operator by applying it to basis vectors.
Mat to_dense(const LinearOperator& op);

struct NormEstimate {
    double value = 0.0;
    bool converged = false;
    int iterations = 0;
};

/* Largest singular value. Uses the closed form when the operator provides
 * one, otherwise power iteration on A^T A with a seeded start vector. On
 * non-convergence the best estimate is returned with converged = false. */
NormEstimate operator_norm(const LinearOperator& op, double tol = 1e-10,
                           int max_iter = 20000, std::uint64_t seed = 0x5eed1234u);

/// Power iteration unconditionally (ignores any closed form).
NormEstimate power_iteration_norm(const LinearOperator& op, double tol = 1e-10,
                                  int max_iter = 20000, std::uint64_t seed = 0x5eed1234u);

}  // namespace lopalt
