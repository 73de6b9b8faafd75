#pragma once

#include <cstdint>

namespace qkd::keyrate {

/// Inputs of the finite-key secure-rate formula. The X term of the rate is
/// weighted by (1-q_a)(1-q_b), the Z term by q_a*q_b; with q_a == q_b the
/// weights reduce to the single-bias form (1-q)^2 and q^2.
struct KeyRateParams {
    double q_a = 0.5;   ///< Alice's probability of measuring in Z
    double q_b = 0.5;   ///< Bob's probability of measuring in Z
    double e_bx = 0.0;  ///< bit error rate in X
    double e_bz = 0.0;  ///< bit error rate in Z
    double f_x = 1.0;   ///< error correction inefficiency in X (>= 1)
    double f_z = 1.0;   ///< error correction inefficiency in Z (>= 1)
    double eps_x = 0.0; ///< deviation added to e_bz when bounding X-key phase error
    double eps_z = 0.0; ///< deviation added to e_bx when bounding Z-key phase error
};

struct EpsilonBudget {
    double p_eps_x = 0.0;
    double p_eps_z = 0.0;
    double total() const { return p_eps_x + p_eps_z; }
};

struct KeyRateResult {
    double rate = 0.0;       ///< max(R, 0); see `positive`
    double raw_rate = 0.0;   ///< R before flooring, may be negative
    double q_a_star = 0.0;
    double q_b_star = 0.0;
    double eps_x_star = 0.0;
    double eps_z_star = 0.0;
    double p_eps_x_star = 0.0;
    double p_eps_z_star = 0.0;
    bool positive = false;   ///< false when no bias gives R > 0
};

/// h2(x) = -x log2 x - (1-x) log2 (1-x), with 0 log 0 == 0.
/// Throws std::domain_error outside [0,1].
double binary_entropy(double x);

/// Upper bound on the probability that a phase error rate exceeds the
/// measured conjugate-basis bit error rate e by more than eps, from random
/// sampling over n bits: exp(-eps^2 n / (4 e (1-e))).
/// e == 0 degenerates: returns 0 for eps > 0 and 1 for eps == 0.
double sampling_bound(double eps, std::uint64_t n, double e);

/// Inverts sampling_bound: the deviation eps that achieves failure
/// probability `target` for n sampled bits at error rate e.
/// target >= 1 yields eps = 0.
double solve_epsilon(std::uint64_t n, double e, double target);

/// Finite-key secure rate in secure bits per raw bit. Entropy arguments
/// e + eps are clamped at 0.5. May be negative.
double key_rate(const KeyRateParams& params);

/// key_rate plus a flag telling whether any entropy argument was clamped.
struct RateDetail {
    double rate;
    bool clamped;
};
RateDetail key_rate_detail(const KeyRateParams& params);

struct OptimizeOptions {
    double q_min = 0.01;
    double q_max = 0.99;
    double grid_step = 0.005;    ///< coarse grid step in q
    bool optimize_split = true;  ///< co-optimize the p_eps_x / p_eps_z split
    int refine_iters = 60;       ///< golden-section refinement iterations
};

/// Maximizes the finite-key rate over a shared bias q (q_a == q_b == q).
/// n_xx = N (1-q)^2 and n_zz = N q^2 feed solve_epsilon with the failure
/// budget p_eps, split either evenly or optimally per `options`.
/// Coarse grid then golden-section refinement; ties between the mirrored
/// maxima go to q > 0.5.
KeyRateResult optimize_bias(std::uint64_t n_total, double e_bx, double e_bz,
                            double f_x, double f_z, double p_eps,
                            const OptimizeOptions& options = {});

/// Same objective over independent (q_a, q_b); coarse grid plus local
/// refinement.
KeyRateResult optimize_bias_asymmetric(std::uint64_t n_total, double e_bx, double e_bz,
                                       double f_x, double f_z, double p_eps,
                                       const OptimizeOptions& options = {});

/// Rate at a fixed (q_a, q_b) with epsilons solved from the implied counts.
/// This is the closed-form value a session with those settings should
/// approach. Returns the full detail including the solved epsilons.
KeyRateResult rate_at_bias(std::uint64_t n_total, double q_a, double q_b,
                           double e_bx, double e_bz, double f_x, double f_z,
                           double p_eps_x, double p_eps_z);

/// Final key length from exact counts and leak accounting:
/// m = max(0, floor(n_xx (1 - h2(e_bz+eps_x)) - leak_x
///               + n_zz (1 - h2(e_bx+eps_z)) - leak_z)).
std::uint64_t secure_length(std::uint64_t n_xx, std::uint64_t n_zz,
                            double e_bx, double e_bz,
                            double eps_x, double eps_z,
                            std::uint64_t leak_x, std::uint64_t leak_z);

} // namespace qkd::keyrate
