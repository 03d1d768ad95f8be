#include "lopalt/signals.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace lopalt {

namespace {

// Cantor value of the rational p/q in [0, 1].
double cantor_value(std::int64_t p, std::int64_t q, int depth) {
    double value = 0.0;
    double scale = 0.5;
    for (int d = 0; d < depth; ++d) {
        p *= 3;
        // Clamp keeps t = 1 on the all-twos expansion.
        const std::int64_t digit = std::min<std::int64_t>(p / q, 2);
        p -= digit * q;
        if (digit == 1) return value + scale;
        if (digit == 2) value += scale;
        scale *= 0.5;
    }
    // Linear completion of the remaining fraction.
    return value + 2.0 * scale * static_cast<double>(p) / static_cast<double>(q);
}

}  // namespace

Vec cantor_signal(int n, int depth) {
    if (n < 2) throw std::invalid_argument("cantor_signal: n must be >= 2");
    if (depth < 1) throw std::invalid_argument("cantor_signal: depth must be >= 1");
    Vec out(n);
    for (int k = 0; k < n; ++k) out[k] = cantor_value(k, n - 1, depth);
    return out;
}

Vec add_awgn(const Vec& x, double target_snr_db, std::uint64_t seed) {
    const double nx = x.norm();
    if (nx == 0.0) throw std::invalid_argument("add_awgn: zero signal has no SNR");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Vec eps(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) eps[i] = gauss(rng);
    const double ne = eps.norm();
    if (ne == 0.0) return x;  // cannot happen for any practical length
    // Rescale the realized noise so the target SNR holds exactly.
    eps *= nx * std::pow(10.0, -target_snr_db / 20.0) / ne;
    return x + eps;
}

double snr_db(const Vec& x, const Vec& x_hat) {
    if (x.size() != x_hat.size())
        throw std::invalid_argument("snr_db: length mismatch");
    const double nx2 = x.squaredNorm();
    if (nx2 == 0.0) throw std::invalid_argument("snr_db: zero reference");
    const double err2 = (x - x_hat).squaredNorm();
    if (err2 == 0.0) return 300.0;
    return std::min(300.0, 10.0 * std::log10(nx2 / err2));
}

BlockPartition extract_blocks(const Vec& sigma, double threshold) {
    if (sigma.size() == 0) throw std::invalid_argument("extract_blocks: empty sigma");
    if (!(threshold > 0.0)) throw std::invalid_argument("extract_blocks: threshold must be > 0");
    const double jump = threshold * sigma.maxCoeff();
    BlockPartition part;
    part.boundaries.push_back(0);
    for (Eigen::Index k = 0; k + 1 < sigma.size(); ++k)
        if (std::abs(sigma[k + 1] - sigma[k]) > jump)
            part.boundaries.push_back(static_cast<int>(k + 1));
    return part;
}

}  // namespace lopalt
