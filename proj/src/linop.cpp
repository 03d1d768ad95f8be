#include "lopalt/linop.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

namespace lopalt {

LinearOperator::LinearOperator(Index rows, Index cols) : rows_(rows), cols_(cols) {
    if (rows < 1 || cols < 1)
        throw std::invalid_argument("LinearOperator: dimensions must be positive, got " +
                                    std::to_string(rows) + "x" + std::to_string(cols));
}

void LinearOperator::check_apply_dim(const Vec& x) const {
    if (x.size() != cols_)
        throw std::invalid_argument("apply: expected length " + std::to_string(cols_) +
                                    ", got " + std::to_string(x.size()));
}

void LinearOperator::check_adjoint_dim(const Vec& y) const {
    if (y.size() != rows_)
        throw std::invalid_argument("adjoint_apply: expected length " + std::to_string(rows_) +
                                    ", got " + std::to_string(y.size()));
}

Vec IdentityOp::apply(const Vec& x) const {
    check_apply_dim(x);
    return x;
}

Vec IdentityOp::adjoint_apply(const Vec& y) const {
    check_adjoint_dim(y);
    return y;
}

Vec DenseOp::apply(const Vec& x) const {
    check_apply_dim(x);
    return m_ * x;
}

Vec DenseOp::adjoint_apply(const Vec& y) const {
    check_adjoint_dim(y);
    return m_.transpose() * y;
}

Diff1DOp::Diff1DOp(Index n) : LinearOperator(n - 1, n), n_(n) {
    if (n < 2) throw std::invalid_argument("Diff1DOp: signal length must be >= 2");
}

Vec Diff1DOp::apply(const Vec& x) const {
    check_apply_dim(x);
    return x.tail(n_ - 1) - x.head(n_ - 1);
}

Vec Diff1DOp::adjoint_apply(const Vec& y) const {
    check_adjoint_dim(y);
    Vec out = Vec::Zero(n_);
    out.head(n_ - 1) -= y;
    out.tail(n_ - 1) += y;
    return out;
}

std::optional<double> Diff1DOp::exact_operator_norm() const {
    return 2.0 * std::sin(static_cast<double>(n_ - 1) * std::numbers::pi / (2.0 * static_cast<double>(n_)));
}

Diff2DOp::Diff2DOp(Index h, Index w)
    : LinearOperator((h - 1) * w + h * (w - 1), h * w), h_(h), w_(w) {
    if (h < 2 || w < 2) throw std::invalid_argument("Diff2DOp: image sides must be >= 2");
}

Vec Diff2DOp::apply(const Vec& x) const {
    check_apply_dim(x);
    const Index nv = (h_ - 1) * w_;
    Vec out(rows());
    for (Index i = 0; i + 1 < h_; ++i)
        for (Index j = 0; j < w_; ++j)
            out[i * w_ + j] = x[(i + 1) * w_ + j] - x[i * w_ + j];
    for (Index i = 0; i < h_; ++i)
        for (Index j = 0; j + 1 < w_; ++j)
            out[nv + i * (w_ - 1) + j] = x[i * w_ + j + 1] - x[i * w_ + j];
    return out;
}

Vec Diff2DOp::adjoint_apply(const Vec& y) const {
    check_adjoint_dim(y);
    const Index nv = (h_ - 1) * w_;
    Vec out = Vec::Zero(cols());
    for (Index i = 0; i + 1 < h_; ++i)
        for (Index j = 0; j < w_; ++j) {
            const double v = y[i * w_ + j];
            out[(i + 1) * w_ + j] += v;
            out[i * w_ + j] -= v;
        }
    for (Index i = 0; i < h_; ++i)
        for (Index j = 0; j + 1 < w_; ++j) {
            const double v = y[nv + i * (w_ - 1) + j];
            out[i * w_ + j + 1] += v;
            out[i * w_ + j] -= v;
        }
    return out;
}

std::optional<double> Diff2DOp::exact_operator_norm() const {
    // D^T D is the Kronecker sum of the 1D normal operators, so its largest
    // eigenvalue is the sum of the directional ones.
    const double pi = std::numbers::pi;
    const double ev = 4.0 * std::pow(std::sin(static_cast<double>(h_ - 1) * pi / (2.0 * static_cast<double>(h_))), 2);
    const double eh = 4.0 * std::pow(std::sin(static_cast<double>(w_ - 1) * pi / (2.0 * static_cast<double>(w_))), 2);
    return std::sqrt(ev + eh);
}

Index BlockDiagOp::sum_rows(const std::vector<LinOpPtr>& blocks) {
    Index r = 0;
    for (const auto& b : blocks) r += b->rows();
    return r;
}

Index BlockDiagOp::sum_cols(const std::vector<LinOpPtr>& blocks) {
    Index c = 0;
    for (const auto& b : blocks) c += b->cols();
    return c;
}

BlockDiagOp::BlockDiagOp(std::vector<LinOpPtr> blocks)
    : LinearOperator(sum_rows(blocks), sum_cols(blocks)), blocks_(std::move(blocks)) {
    for (const auto& b : blocks_)
        if (!b) throw std::invalid_argument("BlockDiagOp: null block");
}

Vec BlockDiagOp::apply(const Vec& x) const {
    check_apply_dim(x);
    Vec out(rows());
    Index ro = 0, co = 0;
    for (const auto& b : blocks_) {
        out.segment(ro, b->rows()) = b->apply(x.segment(co, b->cols()));
        ro += b->rows();
        co += b->cols();
    }
    return out;
}

Vec BlockDiagOp::adjoint_apply(const Vec& y) const {
    check_adjoint_dim(y);
    Vec out(cols());
    Index ro = 0, co = 0;
    for (const auto& b : blocks_) {
        out.segment(co, b->cols()) = b->adjoint_apply(y.segment(ro, b->rows()));
        ro += b->rows();
        co += b->cols();
    }
    return out;
}

std::optional<double> BlockDiagOp::exact_operator_norm() const {
    double m = 0.0;
    for (const auto& b : blocks_) {
        auto n = b->exact_operator_norm();
        if (!n) return std::nullopt;
        m = std::max(m, *n);
    }
    return m;
}

StackedConstraintOperator::StackedConstraintOperator(LinOpPtr L, LinOpPtr R, LinOpPtr D,
                                                     double mu1, double mu2, double mu3)
    : LinearOperator(L->rows() + R->rows() + D->rows(),
                     L->cols() + R->rows() + L->rows() + R->rows() + D->rows()),
      L_(std::move(L)), R_(std::move(R)), D_(std::move(D)), mu1_(mu1), mu2_(mu2), mu3_(mu3) {
    if (L_->cols() != R_->cols())
        throw std::invalid_argument("StackedConstraintOperator: L and R must share the signal space");
    if (D_->cols() != R_->rows())
        throw std::invalid_argument("StackedConstraintOperator: D must act on the feature space of R");
    if (mu1_ <= 0 || mu2_ <= 0 || mu3_ <= 0)
        throw std::invalid_argument("StackedConstraintOperator: scalings must be positive");
}

Vec StackedConstraintOperator::apply(const Vec& w) const {
    check_apply_dim(w);
    const Index N = x_dim(), K = sigma_dim(), J = u_dim(), M = eta_dim();
    const auto x = w.segment(0, N);
    const auto sigma = w.segment(N, K);
    const auto u = w.segment(N + K, J);
    const auto v = w.segment(N + K + J, K);
    const auto eta = w.segment(N + K + J + K, M);
    Vec out(rows());
    out.segment(0, J) = mu1_ * (L_->apply(x) - u);
    out.segment(J, K) = mu2_ * (R_->apply(x) - v);
    out.segment(J + K, M) = mu3_ * (D_->apply(sigma) - eta);
    return out;
}

Vec StackedConstraintOperator::adjoint_apply(const Vec& r) const {
    check_adjoint_dim(r);
    const Index N = x_dim(), K = sigma_dim(), J = u_dim(), M = eta_dim();
    const Vec r1 = r.segment(0, J);
    const Vec r2 = r.segment(J, K);
    const Vec r3 = r.segment(J + K, M);
    Vec out(cols());
    out.segment(0, N) = mu1_ * L_->adjoint_apply(r1) + mu2_ * R_->adjoint_apply(r2);
    out.segment(N, K) = mu3_ * D_->adjoint_apply(r3);
    out.segment(N + K, J) = -mu1_ * r1;
    out.segment(N + K + J, K) = -mu2_ * r2;
    out.segment(N + K + J + K, M) = -mu3_ * r3;
    return out;
}

LinOpPtr make_identity(Index n) { return std::make_shared<IdentityOp>(n); }
LinOpPtr make_dense(Mat m) { return std::make_shared<DenseOp>(std::move(m)); }
LinOpPtr make_diff_1d(Index n) { return std::make_shared<Diff1DOp>(n); }
LinOpPtr make_diff_2d(Index h, Index w) { return std::make_shared<Diff2DOp>(h, w); }
LinOpPtr make_block_diag(std::vector<LinOpPtr> blocks) {
    return std::make_shared<BlockDiagOp>(std::move(blocks));
}

Mat to_dense(const LinearOperator& op) {
    Mat m(op.rows(), op.cols());
    Vec e = Vec::Zero(op.cols());
    for (Index j = 0; j < op.cols(); ++j) {
        e[j] = 1.0;
        m.col(j) = op.apply(e);
        e[j] = 0.0;
    }
    return m;
}

NormEstimate power_iteration_norm(const LinearOperator& op, double tol, int max_iter,
                                  std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    Vec v(op.cols());
    for (Index i = 0; i < v.size(); ++i) v[i] = uni(rng);
    double nv = v.norm();
    if (nv == 0.0) v[0] = 1.0; else v /= nv;

    // Power iteration on A^T A; the Rayleigh quotient never overshoots the
    // true largest eigenvalue.
    double lambda = 0.0;
    for (int it = 1; it <= max_iter; ++it) {
        Vec w = op.adjoint_apply(op.apply(v));
        const double lambda_next = v.dot(w);
        const double nw = w.norm();
        if (nw == 0.0)
            return {0.0, true, it};  // v in the null space and A^T A v = 0
        v = w / nw;
        if (std::abs(lambda_next - lambda) <= tol * std::max(std::abs(lambda_next), 1e-300))
            return {std::sqrt(std::max(lambda_next, 0.0)), true, it};
        lambda = lambda_next;
    }
    return {std::sqrt(std::max(lambda, 0.0)), false, max_iter};
}

NormEstimate operator_norm(const LinearOperator& op, double tol, int max_iter,
                           std::uint64_t seed) {
    if (auto exact = op.exact_operator_norm())
        return {*exact, true, 0};
    return power_iteration_norm(op, tol, max_iter, seed);
}

}  // namespace lopalt
