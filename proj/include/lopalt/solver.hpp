#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lopalt/linop.hpp"

namespace lopalt {

enum class LossKind { Quadratic, Absolute };

/* Regularized reconstruction problem
 *
 *   min_x  f(Lx) + lambda * Psi_alpha(Rx)
 *
 * with f either 1/2 ||y - .||_2^2 or ||y - .||_1, and Psi_alpha the
 * block-sparsity penalty: the minimum of varphi(., sigma) over latent
 * sigma subject to ||D sigma||_1 <= alpha. alpha may be +inf (no
 * constraint; the penalty degenerates to the l1 norm). */
struct LopAltProblem {
    Vec y;
    LinOpPtr L;        // J x N observation operator
    LinOpPtr R;        // K x N feature transform
    LinOpPtr D_sigma;  // acts on sigma in R^K
    LossKind loss = LossKind::Quadratic;
    double lambda = 0.0;
    double alpha = std::numeric_limits<double>::infinity();

    Index signal_dim() const { return L->cols(); }
    Index feature_dim() const { return R->rows(); }
    Index obs_dim() const { return L->rows(); }

    void validate() const;
};

struct SolverParams {
    double tau1 = 1.0;
    double tau2 = 1.0;
    double mu1 = 1.0;
    double mu2 = 1.0;
    double mu3 = 1.0;
    int max_iter = 100000;
    double tol = 1e-6;            // on constraint residuals, relative to ||y||
    std::uint64_t seed = 0;       // start vector of any internal power iteration
    bool verify_condition = true; // re-check tau1*tau2*||H||^2 <= 1 inside solve()
};

/* Primal blocks w = (x, sigma, u, v, eta) and duals (r1, r2, r3) with their
 * increments. */
struct SolverState {
    Vec x, sigma, u, v, eta;
    Vec r1, r2, r3;
    Vec dr1, dr2, dr3;
};

enum class Termination { Converged, MaxIterations };

struct SolveReport {
    Vec x_hat;
    Vec sigma_hat;
    // f(Lx) + lambda * varphi(v, sigma), evaluated on the split variables
    // (finite along the whole iteration; same limit as varphi(Rx, sigma)).
    std::vector<double> objective_trace;
    // (||Lx - u||, ||Rx - v||, ||D sigma - eta||) per iteration.
    std::vector<std::array<double, 3>> residual_trace;
    int iterations = 0;
    bool converged = false;
    Termination termination = Termination::MaxIterations;
};

class DivergenceError : public std::runtime_error {
public:
    explicit DivergenceError(const std::string& what) : std::runtime_error(what) {}
};

class SingularTransformError : public std::runtime_error {
public:
    explicit SingularTransformError(const std::string& what) : std::runtime_error(what) {}
};

/* Scaling factors from the step-size analysis:
 *   mu3 = (tau1 tau2)^{-1/2} / sqrt(D_norm^2 + 1)
 *   mu1 = (tau1 tau2)^{-1/2} / sqrt(2 L_norm^2 + 1)
 *   mu2 = (tau1 tau2)^{-1/2} / sqrt(2 R_norm^2 + 1)
 * The mu1/mu2 bounds are heuristic, so the result must be validated with
 * check_convergence_condition before use. */
SolverParams derive_step_params(double L_norm, double R_norm, double D_norm,
                                double tau1, double tau2);

struct ConditionCheck {
    bool ok = false;
    double h_norm = 0.0;       // estimated ||H||_op
    bool norm_converged = false;
};

/// tau1 * tau2 * ||H||_op^2 <= 1 + 1e-6 with ||H|| measured by power iteration.
ConditionCheck check_convergence_condition(const LopAltProblem& problem,
                                           const SolverParams& params);

/* Full parameter derivation: operator norms, mu factors, then tau1 = tau2
 * chosen to put tau1*tau2*||H||^2 at tau_scale^2. If the check still fails
 * the mus are backed off by 0.9 until it passes. */
SolverParams make_default_params(const LopAltProblem& problem, double tau_scale = 0.99);

/// All-zeros start except sigma = 1 (keeps varphi off its domain boundary).
SolverState default_init(const LopAltProblem& problem);

/* One pass of the iteration, transcribed literally: tilde updates from
 * (r - tau2 dr), x pass-through, the three prox steps (the eta projection
 * is skipped identically when alpha = +inf), dr recomputed from the
 * incoming iterate, then the dual updates. Throws DivergenceError naming
 * the first non-finite block. */
SolverState lv_iterate(const SolverState& state, const LopAltProblem& problem,
                       const SolverParams& params);

/* Runs lv_iterate until all three constraint residuals fall below
 * tol * ||y|| or max_iter is hit. */
SolveReport solve(const LopAltProblem& problem, const SolverParams& params,
                  const std::optional<SolverState>& init = std::nullopt);

/* Psi_alpha(z): min over sigma of varphi(z, sigma) subject to
 * ||D_sigma sigma||_1 <= alpha. Exact (componentwise) for alpha = +inf,
 * otherwise solved iteratively to the requested diagnostic accuracy. */
double evaluate_penalty(const Vec& z, double alpha, const LinearOperator& D_sigma,
                        double tol = 1e-8);

/* TV baseline min_x 1/2 ||y - x||^2 + lambda ||Rx||_1 as the alpha = +inf
 * specialization of solve (quadratic loss, L = I). */
SolveReport tv_solve(const Vec& y, LinOpPtr R, double lambda, const SolverParams& params);

/* Exact minimizer of 1/2 ||y - x||^2 + lambda ||Dx||_1 for 1D signals by the
 * taut string construction, O(n). Used as a test oracle for tv_solve. */
Vec taut_string_tv_1d(const Vec& y, double lambda);

/* Rewrites the problem in z = Rx when R^T R is invertible:
 * L~ = L (R^T R)^{-1} R^T, feature transform becomes the identity.
 * Throws SingularTransformError when R^T R is numerically singular. */
LopAltProblem reduce_invertible(const LopAltProblem& problem, double rcond_threshold = 1e-10);

/// f(Lx) + lambda * Psi_alpha(Rx); penalty evaluated to penalty_tol.
double objective_value(const LopAltProblem& problem, const Vec& x, double penalty_tol = 1e-9);

}  // namespace lopalt
