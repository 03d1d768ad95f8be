#pragma once

#include <Eigen/Core>
#include <utility>

namespace lopalt {

using Vec = Eigen::VectorXd;

/* Scalar perspective term
 *
 *   phi(x, tau) = |x|^2 / (2 tau) + tau / 2   if tau > 0
 *               = 0                            if x = 0 and tau = 0
 *               = +inf                         otherwise.
 *
 * min over tau >= 0 recovers |x|, attained at tau = |x|. */
double phi(double x, double tau);

/// Sum of phi over components; +inf if any component is.
double varphi(const Vec& x, const Vec& sigma);

/// argmin_u tau * 1/2 ||y - u||^2 + 1/2 ||u - u_tilde||^2 = (u_tilde + tau y) / (1 + tau)
Vec prox_quadratic_loss(const Vec& u_tilde, const Vec& y, double tau);

/// argmin_u tau * ||y - u||_1 + 1/2 ||u - u_tilde||^2 = y + soft(u_tilde - y, tau)
Vec prox_absolute_loss(const Vec& u_tilde, const Vec& y, double tau);

double soft_threshold(double x, double t);
Vec soft_threshold(const Vec& x, double t);

/* Joint prox of gamma * phi:
 *
 *   argmin_{v, sigma}  1/2 (v - v_tilde)^2 + 1/2 (sigma - sigma_tilde)^2
 *                      + gamma * phi(v, sigma)
 *
 * Either the boundary point (0, 0) (with the v_tilde = 0 special case
 * (0, max(sigma_tilde - gamma/2, 0))), or the interior stationary point with
 * sigma the unique positive root of
 *
 *   (sigma - sigma_tilde + gamma/2)(sigma + gamma)^2 = gamma v_tilde^2 / 2
 *
 * and v = sigma v_tilde / (sigma + gamma); whichever has the smaller
 * objective. The root is located by safeguarded Newton to 1e-12. */
std::pair<double, double> prox_perspective(double v_tilde, double sigma_tilde, double gamma);

/// Componentwise prox_perspective.
std::pair<Vec, Vec> prox_perspective_vector(const Vec& v_tilde, const Vec& sigma_tilde,
                                            double gamma);

/* prox of gamma * phi(x, .) in the second argument only (x held fixed):
 * used when minimizing varphi over sigma alone. */
double prox_phi_sigma(double x, double sigma_tilde, double gamma);

/* Euclidean projection onto { eta : ||eta||_1 <= alpha } by the sorted
 * threshold rule: with rho = |eta| sorted descending and T the largest t
 * such that (sum_{n<=t} rho_n - alpha)/t < rho_t, the projection is
 * sign(eta_k) * max(|eta_k| - theta, 0), theta = (sum_{t<=T} rho_t - alpha)/T. */
Vec project_l1_ball(const Vec& eta, double alpha);

}  // namespace lopalt
