#include "lopalt/prox.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace lopalt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_same_length(const Vec& a, const Vec& b, const char* who) {
    if (a.size() != b.size())
        throw std::invalid_argument(std::string(who) + ": length mismatch " +
                                    std::to_string(a.size()) + " vs " + std::to_string(b.size()));
}

/* Unique positive root of f(s) = (s - s0)(s + c)^2 - rhs with rhs > 0 and
 * f(0) < 0. Safeguarded Newton kept inside a shrinking bisection bracket,
 * to 1e-12 absolute on the root. */
double cubic_root(double s0, double c, double rhs, double hi) {
    auto f = [&](double s) { return (s - s0) * (s + c) * (s + c) - rhs; };
    double lo = 0.0;
    while (f(hi) < 0.0) hi = 2.0 * hi + 1.0;
    double s = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        const double fs = f(s);
        if (fs >= 0.0) hi = s; else lo = s;
        if (hi - lo <= 1e-12) break;
        const double sc = s + c;
        const double d = sc * (sc + 2.0 * (s - s0));
        double next = (d != 0.0) ? s - fs / d : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - s) <= 1e-13) { s = next; break; }
        s = next;
    }
    return s;
}

}  // namespace

double phi(double x, double tau) {
    if (tau > 0.0) return x * x / (2.0 * tau) + tau / 2.0;
    if (x == 0.0 && tau == 0.0) return 0.0;
    return kInf;
}

double varphi(const Vec& x, const Vec& sigma) {
    check_same_length(x, sigma, "varphi");
    double s = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double p = phi(x[i], sigma[i]);
        if (p == kInf) return kInf;
        s += p;
    }
    return s;
}

Vec prox_quadratic_loss(const Vec& u_tilde, const Vec& y, double tau) {
    check_same_length(u_tilde, y, "prox_quadratic_loss");
    return (u_tilde + tau * y) / (1.0 + tau);
}

Vec prox_absolute_loss(const Vec& u_tilde, const Vec& y, double tau) {
    check_same_length(u_tilde, y, "prox_absolute_loss");
    return y + soft_threshold(u_tilde - y, tau);
}

double soft_threshold(double x, double t) {
    if (x > t) return x - t;
    if (x < -t) return x + t;
    return 0.0;
}

Vec soft_threshold(const Vec& x, double t) {
    Vec out(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) out[i] = soft_threshold(x[i], t);
    return out;
}

std::pair<double, double> prox_perspective(double v_tilde, double sigma_tilde, double gamma) {
    if (!(gamma > 0.0)) throw std::invalid_argument("prox_perspective: gamma must be positive");

    auto objective = [&](double v, double sigma) {
        const double p = phi(v, sigma);
        if (p == kInf) return kInf;
        const double dv = v - v_tilde, ds = sigma - sigma_tilde;
        return 0.5 * dv * dv + 0.5 * ds * ds + gamma * p;
    };

    double best_v = 0.0, best_sigma = 0.0;
    double best = objective(0.0, 0.0);

    // v = 0 branch: sigma minimizes 1/2 (sigma - sigma_tilde)^2 + gamma sigma / 2.
    const double sig0 = std::max(sigma_tilde - 0.5 * gamma, 0.0);
    if (sig0 > 0.0) {
        const double val = objective(0.0, sig0);
        if (val < best) { best = val; best_v = 0.0; best_sigma = sig0; }
    }

    // Interior stationary point: sigma > 0 root of
    // (sigma - sigma_tilde + gamma/2)(sigma + gamma)^2 = gamma v_tilde^2 / 2.
    const double rhs = 0.5 * gamma * v_tilde * v_tilde;
    const double at_zero = (0.5 * gamma - sigma_tilde) * gamma * gamma - rhs;
    if (at_zero < 0.0 && rhs > 0.0) {
        const double hi = std::max(sigma_tilde - 0.5 * gamma + v_tilde * v_tilde / (2.0 * gamma), 1e-300);
        const double sigma = cubic_root(sigma_tilde - 0.5 * gamma, gamma, rhs, hi);
        if (sigma > 0.0) {
            const double v = sigma * v_tilde / (sigma + gamma);
            const double val = objective(v, sigma);
            if (val < best) { best = val; best_v = v; best_sigma = sigma; }
        }
    }
    return {best_v, best_sigma};
}

std::pair<Vec, Vec> prox_perspective_vector(const Vec& v_tilde, const Vec& sigma_tilde,
                                            double gamma) {
    check_same_length(v_tilde, sigma_tilde, "prox_perspective_vector");
    Vec v(v_tilde.size()), sigma(v_tilde.size());
    for (Eigen::Index i = 0; i < v_tilde.size(); ++i) {
        auto [vi, si] = prox_perspective(v_tilde[i], sigma_tilde[i], gamma);
        v[i] = vi;
        sigma[i] = si;
    }
    return {std::move(v), std::move(sigma)};
}

double prox_phi_sigma(double x, double sigma_tilde, double gamma) {
    if (!(gamma > 0.0)) throw std::invalid_argument("prox_phi_sigma: gamma must be positive");
    if (x == 0.0) return std::max(sigma_tilde - 0.5 * gamma, 0.0);
    // (sigma - sigma_tilde + gamma/2) sigma^2 = gamma x^2 / 2 has a unique
    // positive root (the objective blows up as sigma -> 0+).
    const double rhs = 0.5 * gamma * x * x;
    double hi = std::max({sigma_tilde - 0.5 * gamma, std::abs(x), 1.0});
    return cubic_root(sigma_tilde - 0.5 * gamma, 0.0, rhs, hi);
}

Vec project_l1_ball(const Vec& eta, double alpha) {
    if (!(alpha >= 0.0)) throw std::invalid_argument("project_l1_ball: alpha must be >= 0");
    if (std::isinf(alpha) || eta.lpNorm<1>() <= alpha) return eta;
    if (alpha == 0.0) return Vec::Zero(eta.size());

    const Eigen::Index m = eta.size();
    std::vector<double> rho(static_cast<size_t>(m));
    for (Eigen::Index i = 0; i < m; ++i) rho[static_cast<size_t>(i)] = std::abs(eta[i]);
    std::sort(rho.begin(), rho.end(), std::greater<double>());

    // Largest t with (sum_{n<=t} rho_n - alpha) / t < rho_t.
    double prefix = 0.0, theta = 0.0;
    for (Eigen::Index t = 0; t < m; ++t) {
        prefix += rho[static_cast<size_t>(t)];
        const double cand = (prefix - alpha) / static_cast<double>(t + 1);
        if (cand < rho[static_cast<size_t>(t)]) theta = cand;
    }

    Vec out(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        const double a = std::max(std::abs(eta[i]) - theta, 0.0);
        out[i] = eta[i] >= 0.0 ? a : -a;
    }
    return out;
}

}  // namespace lopalt
