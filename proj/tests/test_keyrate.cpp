#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "qkd/keyrate.hpp"
#include "qkd/rng.hpp"

using namespace qkd::keyrate;

TEST_CASE("binary entropy reference points") {
    CHECK(binary_entropy(0.5) == doctest::Approx(1.0));
    CHECK(binary_entropy(0.0) == 0.0);
    CHECK(binary_entropy(1.0) == 0.0);
    // independent evaluation: h2(0.11) = 0.4999160 (calculator)
    CHECK(std::abs(binary_entropy(0.11) - 0.49992) < 1e-5);
    CHECK_THROWS_AS(binary_entropy(-0.1), std::domain_error);
    CHECK_THROWS_AS(binary_entropy(1.1), std::domain_error);
}

TEST_CASE("binary entropy symmetry and concavity") {
    qkd::Rng rng(11);
    for (int i = 0; i < 500; ++i) {
        const double x = rng.next_unit();
        CHECK(binary_entropy(x) == doctest::Approx(binary_entropy(1.0 - x)).epsilon(1e-12));
        CHECK(binary_entropy(x) <= 1.0 + 1e-12);
        const double y = rng.next_unit();
        const double mid = binary_entropy(0.5 * (x + y));
        CHECK(mid + 1e-12 >= 0.5 * (binary_entropy(x) + binary_entropy(y)));
    }
    // maximal only at one half
    CHECK(binary_entropy(0.499) < 1.0);
    CHECK(binary_entropy(0.501) < 1.0);
}

TEST_CASE("sampling bound worked values") {
    const double v = sampling_bound(0.01, 10000, 0.05);
    CHECK(v <= 0.0052);
    CHECK(v >= 0.0051);
    CHECK(v == doctest::Approx(0.0051789244).epsilon(1e-9));
    CHECK(sampling_bound(0.0, 10000, 0.05) == 1.0);
    CHECK(sampling_bound(0.02, 10000, 0.05) == doctest::Approx(7.1937986e-10).epsilon(1e-6));
    // degenerate error-free input
    CHECK(sampling_bound(0.01, 100, 0.0) == 0.0);
    CHECK(sampling_bound(0.0, 100, 0.0) == 1.0);
    CHECK_THROWS_AS(sampling_bound(0.01, 0, 0.05), std::invalid_argument);
    CHECK_THROWS_AS(sampling_bound(-1.0, 10, 0.05), std::domain_error);
    CHECK_THROWS_AS(sampling_bound(0.01, 10, 0.6), std::domain_error);
}

TEST_CASE("sampling bound is strictly decreasing in eps and n") {
    double prev = sampling_bound(0.001, 10000, 0.05);
    for (double eps = 0.002; eps < 0.05; eps += 0.001) {
        const double cur = sampling_bound(eps, 10000, 0.05);
        CHECK(cur < prev);
        prev = cur;
    }
    prev = sampling_bound(0.01, 1000, 0.05);
    for (std::uint64_t n = 2000; n <= 20000; n += 1000) {
        const double cur = sampling_bound(0.01, n, 0.05);
        CHECK(cur < prev);
        prev = cur;
    }
}

TEST_CASE("solve_epsilon inverts the bound") {
    CHECK(solve_epsilon(10000, 0.05, 0.0052) == doctest::Approx(0.01).epsilon(1e-2));
    CHECK(std::abs(solve_epsilon(10000, 0.05, 0.0052) - 0.0099961411) < 1e-9);
    // large n drives eps to zero
    CHECK(solve_epsilon(10000000000ULL, 0.05, 1e-6) < 1e-3);
    // closed form check
    const double expect = std::sqrt(4 * 0.054 * 0.946 * std::log(2e6) / 1e6);
    CHECK(solve_epsilon(1000000, 0.054, 5e-7) == doctest::Approx(expect).epsilon(1e-12));
    CHECK(solve_epsilon(100, 0.05, 1.0) == 0.0);
    CHECK_THROWS_AS(solve_epsilon(0, 0.05, 0.01), std::invalid_argument);

    qkd::Rng rng(22);
    for (int i = 0; i < 200; ++i) {
        const std::uint64_t n = 100 + rng.below(1000000);
        const double e = 0.01 + 0.49 * rng.next_unit();
        const double target = std::pow(10.0, -1.0 - 9.0 * rng.next_unit());
        const double eps = solve_epsilon(n, e, target);
        CHECK(sampling_bound(eps, n, e) == doctest::Approx(target).epsilon(1e-12));
    }
}

TEST_CASE("key rate boundary cases") {
    KeyRateParams p;
    p.q_a = p.q_b = 1.0;
    CHECK(key_rate(p) == doctest::Approx(1.0));
    p = KeyRateParams{};
    p.q_a = p.q_b = 0.5;
    CHECK(key_rate(p) == doctest::Approx(0.5));
}

TEST_CASE("key rate matches the asymptotic form at zero deviation") {
    qkd::Rng rng(33);
    for (int i = 0; i < 200; ++i) {
        KeyRateParams p;
        p.q_a = p.q_b = rng.next_unit();
        p.e_bx = 0.4 * rng.next_unit();
        p.e_bz = 0.4 * rng.next_unit();
        p.f_x = 1.0 + rng.next_unit();
        p.f_z = 1.0 + rng.next_unit();
        const double q = p.q_a;
        const double direct =
            (1 - q) * (1 - q) * (1 - p.f_x * binary_entropy(p.e_bx) - binary_entropy(p.e_bz)) +
            q * q * (1 - p.f_z * binary_entropy(p.e_bz) - binary_entropy(p.e_bx));
        CHECK(key_rate(p) == doctest::Approx(direct).epsilon(1e-12));
    }
}

TEST_CASE("key rate q <-> 1-q swap symmetry") {
    qkd::Rng rng(44);
    for (int i = 0; i < 200; ++i) {
        KeyRateParams p;
        p.q_a = p.q_b = rng.next_unit();
        p.e_bx = 0.3 * rng.next_unit();
        p.e_bz = 0.3 * rng.next_unit();
        p.f_x = 1.0 + rng.next_unit();
        p.f_z = 1.0 + rng.next_unit();
        p.eps_x = 0.05 * rng.next_unit();
        p.eps_z = 0.05 * rng.next_unit();
        KeyRateParams swapped;
        swapped.q_a = swapped.q_b = 1.0 - p.q_a;
        swapped.e_bx = p.e_bz;
        swapped.e_bz = p.e_bx;
        swapped.f_x = p.f_z;
        swapped.f_z = p.f_x;
        swapped.eps_x = p.eps_z;
        swapped.eps_z = p.eps_x;
        CHECK(key_rate(p) == doctest::Approx(key_rate(swapped)).epsilon(1e-12));
    }
}

TEST_CASE("entropy argument clamps at one half") {
    KeyRateParams p;
    p.q_a = p.q_b = 0.5;
    p.e_bx = 0.4;
    p.eps_z = 0.4; // e_bx + eps_z = 0.8 clamps to 0.5
    const auto d = key_rate_detail(p);
    CHECK(d.clamped);
    KeyRateParams q = p;
    q.eps_z = 0.1; // exactly 0.5, no clamp
    CHECK(key_rate(q) == doctest::Approx(d.rate).epsilon(1e-12));
    CHECK_FALSE(key_rate_detail(q).clamped);
}

TEST_CASE("optimizer: symmetric channel ties break to q > 0.5") {
    auto res = optimize_bias(1000000, 0.03, 0.03, 1.2, 1.2, 1e-6);
    CHECK(res.q_a_star > 0.5);
    // the mirrored bias gives the same rate
    const auto mirrored = rate_at_bias(1000000, 1.0 - res.q_a_star, 1.0 - res.q_b_star, 0.03,
                                       0.03, 1.2, 1.2, res.p_eps_z_star, res.p_eps_x_star);
    CHECK(mirrored.raw_rate == doctest::Approx(res.raw_rate).epsilon(1e-9));
}

TEST_CASE("optimizer: costlier X correction favors the Z-heavy maximum") {
    auto res = optimize_bias(1000000, 0.03, 0.03, 1.6, 1.1, 1e-6);
    CHECK(res.q_a_star > 0.5);
    const auto mirrored = rate_at_bias(1000000, 1.0 - res.q_a_star, 1.0 - res.q_a_star, 0.03,
                                       0.03, 1.6, 1.1, res.p_eps_x_star, res.p_eps_z_star);
    CHECK(res.raw_rate > mirrored.raw_rate + 1e-6);
}

TEST_CASE("optimizer output is monotone in the pair count") {
    double prev = -1.0;
    for (std::uint64_t n : {100000ULL, 1000000ULL, 10000000ULL, 100000000ULL}) {
        const auto res = optimize_bias(n, 0.054, 0.012, 1.31, 1.59, 1e-6);
        CHECK(res.rate >= prev - 1e-9);
        prev = res.rate;
    }
}

TEST_CASE("optimizer reports when no bias gives a positive rate") {
    const auto res = optimize_bias(1000, 0.25, 0.25, 2.0, 2.0, 1e-6);
    CHECK_FALSE(res.positive);
    CHECK(res.rate == 0.0);
    CHECK(res.raw_rate < 0.0);
}

TEST_CASE("asymmetric optimizer stays near the symmetric one on a symmetric channel") {
    const auto sym = optimize_bias(10000000, 0.054, 0.012, 1.31, 1.59, 1e-6);
    qkd::keyrate::OptimizeOptions opt;
    opt.grid_step = 0.02;
    const auto asym = optimize_bias_asymmetric(10000000, 0.054, 0.012, 1.31, 1.59, 1e-6, opt);
    CHECK(asym.rate >= sym.rate - 1e-6);
    CHECK(std::abs(asym.q_a_star - asym.q_b_star) < 0.1);
}

TEST_CASE("secure length worked cases and oracle") {
    CHECK(secure_length(0, 1000, 0.0, 0.0, 0.0, 0.0, 0, 0) == 1000);
    CHECK(secure_length(1000, 0, 0.0, 0.5, 0.0, 0.0, 0, 0) == 0);

    qkd::Rng rng(55);
    for (int i = 0; i < 300; ++i) {
        const std::uint64_t n_xx = rng.below(100000);
        const std::uint64_t n_zz = rng.below(2000000);
        const double e_bx = 0.2 * rng.next_unit();
        const double e_bz = 0.2 * rng.next_unit();
        const double eps_x = 0.05 * rng.next_unit();
        const double eps_z = 0.05 * rng.next_unit();
        const std::uint64_t leak_x = rng.below(n_xx + 1);
        const std::uint64_t leak_z = rng.below(n_zz + 1);
        const auto m = secure_length(n_xx, n_zz, e_bx, e_bz, eps_x, eps_z, leak_x, leak_z);
        const auto ref = oracles::secure_length_ref(n_xx, n_zz, e_bx, e_bz, eps_x, eps_z,
                                                    leak_x, leak_z);
        CHECK(std::abs(static_cast<long double>(m) - ref) <= 1.0L);
    }
}

TEST_CASE("secure length is monotone non-increasing in leaks and deviations") {
    const std::uint64_t base = secure_length(10000, 1000000, 0.054, 0.012, 0.001, 0.01, 500, 90000);
    CHECK(secure_length(10000, 1000000, 0.054, 0.012, 0.001, 0.01, 600, 90000) <= base);
    CHECK(secure_length(10000, 1000000, 0.054, 0.012, 0.001, 0.01, 500, 95000) <= base);
    CHECK(secure_length(10000, 1000000, 0.054, 0.012, 0.002, 0.01, 500, 90000) <= base);
    CHECK(secure_length(10000, 1000000, 0.054, 0.012, 0.001, 0.02, 500, 90000) <= base);
}
