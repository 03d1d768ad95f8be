#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

namespace lopalt {

using Vec = Eigen::VectorXd;

/* The Cantor (devil's staircase) function sampled at t_k = k/(n-1),
 * k = 0..n-1. Ternary digits are extracted in exact integer arithmetic so
 * plateaus come out bitwise constant; below the 3^-depth resolution the
 * staircase is completed linearly, which keeps c(0) = 0 and c(1) = 1 exact.
 * Monotone non-decreasing; its first difference is block sparse. */
Vec cantor_signal(int n, int depth = 12);

/* y = x + eps with eps white Gaussian rescaled so that
 * 10 log10(||x||^2 / ||eps||^2) equals target_snr_db exactly.
 * Deterministic per seed. Throws on a zero signal. */
Vec add_awgn(const Vec& x, double target_snr_db, std::uint64_t seed);

/* 10 log10(||x||^2 / ||x - x_hat||^2), capped at 300 dB (the x_hat == x
 * sentinel). Throws on a zero reference. */
double snr_db(const Vec& x, const Vec& x_hat);

struct BlockPartition {
    // Indices where a new block begins; always starts at 0, strictly increasing.
    std::vector<int> boundaries;
    int block_count() const { return static_cast<int>(boundaries.size()); }
};

/* Block structure read off a latent vector: a boundary wherever the jump
 * |sigma_{k+1} - sigma_k| exceeds threshold * max(sigma). */
BlockPartition extract_blocks(const Vec& sigma, double threshold = 0.01);

}  // namespace lopalt
