// Acceptance suite: runs every criterion end to end and prints one
// PASS/FAIL line each. Exits nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <string>
#include <thread>
#include <vector>

#include "oracles.hpp"
#include "qkd/cascade.hpp"
#include "qkd/keyrate.hpp"
#include "qkd/privacy.hpp"
#include "qkd/session.hpp"
#include "qkd/sifting.hpp"
#include "qkd/source_sim.hpp"
#include "qkd/transport.hpp"

using namespace qkd;

namespace {

int failures = 0;
std::chrono::steady_clock::time_point t0;

void begin() { t0 = std::chrono::steady_clock::now(); }

void report(int idx, const std::string& name, bool ok, const std::string& detail) {
    const auto dt = std::chrono::duration_cast<std::chrono::milliseconds>(
                        std::chrono::steady_clock::now() - t0)
                        .count();
    std::printf("%s %d %s (%s) [%lld ms]\n", ok ? "PASS" : "FAIL", idx, name.c_str(),
                detail.c_str(), static_cast<long long>(dt));
    std::fflush(stdout);
    if (!ok) ++failures;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

struct BenchOutcome {
    double mean_revealed = 0.0;
    double f = 0.0;
    bool all_corrected = true;
};

BenchOutcome bench_cascade(std::size_t length, double qber, int runs, std::uint64_t seed) {
    Rng rng(derive_seed(seed, "bench"));
    std::vector<cascade::CascadeStats> all;
    BenchOutcome out;
    const std::size_t n_errors = static_cast<std::size_t>(std::llround(qber * double(length)));
    for (int run = 0; run < runs; ++run) {
        BitVec key_a = rng.random_bits(length);
        BitVec key_b = key_a;
        std::vector<std::uint32_t> pos(length);
        std::iota(pos.begin(), pos.end(), 0u);
        rng.shuffle(std::span<std::uint32_t>(pos));
        for (std::size_t i = 0; i < n_errors; ++i) key_b.flip(pos[i]);
        cascade::CascadeConfig cfg;
        cfg.shuffle_seed = derive_seed(seed, "shuffle", run);
        auto res = cascade::run_cascade(key_a, key_b, cfg, qber);
        if (!(res.corrected == key_a)) out.all_corrected = false;
        all.push_back(std::move(res.stats));
    }
    const auto agg = cascade::aggregate_stats(all);
    out.mean_revealed = double(agg.total_revealed()) / double(runs);
    out.f = agg.efficiency_f;
    return out;
}

session::SessionConfig table_session(double q_a, double q_b, std::uint64_t seed) {
    session::SessionConfig cfg;
    cfg.source.p_bx = 0.054;
    cfg.source.p_bz = 0.012;
    cfg.alice.q = q_a;
    cfg.bob.q = q_b;
    cfg.n_rounds = 1000000;
    cfg.seed = seed;
    cfg.qber_prior_x = 0.054;
    cfg.qber_prior_z = 0.012;
    return cfg;
}

} // namespace

int main() {
    // 1. Random-sampling bound worked example.
    begin();
    {
        const double v = keyrate::sampling_bound(0.01, 10000, 0.05);
        const bool ok = v <= 0.0052 && v >= 0.0051 && std::abs(v - 0.00518) < 5e-6;
        report(1, "sampling-bound-worked-example", ok, "value " + fmt(v));
    }

    // 2. Visibility mapping.
    begin();
    {
        const double ez = sim::visibility_to_error(0.996);
        const double ex = sim::visibility_to_error(0.924);
        const bool ok = std::abs(ez - 0.002) < 1e-12 && std::abs(ex - 0.038) < 1e-12;
        report(2, "visibility-mapping", ok, fmt(ez) + " / " + fmt(ex));
    }

    // 3. Residual-error bound constant.
    begin();
    {
        const double bound = std::pow(2.0, -40.0);
        const bool ok = std::abs(bound / 9.09e-13 - 1.0) < 0.005;
        report(3, "residual-bound-constant", ok, fmt(bound));
    }

    // 4. Optimal-bias band and curve shape.
    begin();
    {
        const auto best = keyrate::optimize_bias(30000000, 0.054, 0.012, 1.31, 1.59, 1e-6);
        bool ok = best.q_a_star >= 0.94 && best.q_a_star <= 0.99 && best.positive;

        // bimodal curve with the Z-heavy maximum strictly higher
        double low_peak = -1e9, high_peak = -1e9, valley = 1e9;
        for (double q = 0.01; q <= 0.99 + 1e-12; q += 0.005) {
            const double r = keyrate::rate_at_bias(30000000, q, q, 0.054, 0.012, 1.31, 1.59,
                                                   5e-7, 5e-7).raw_rate;
            if (q < 0.4) low_peak = std::max(low_peak, r);
            if (q > 0.6) high_peak = std::max(high_peak, r);
            if (q >= 0.4 && q <= 0.6) valley = std::min(valley, r);
        }
        ok = ok && low_peak > valley && high_peak > valley && high_peak > low_peak;
        report(4, "optimal-bias-band", ok,
               "q* " + fmt(best.q_a_star) + " peaks " + fmt(low_peak) + "/" + fmt(high_peak));
    }

    // 5. Sift-ratio reproduction for the four bias configurations.
    begin();
    {
        const double biases[4][2] = {
            {0.4570, 0.4752}, {0.5660, 0.6074}, {0.7398, 0.7606}, {0.8804, 0.9062}};
        const double observed[4] = {0.516, 0.529, 0.635, 0.813};
        bool ok = true;
        std::string detail;
        for (int i = 0; i < 4; ++i) {
            sim::SourceModel src;
            src.p_bx = 0.054;
            src.p_bz = 0.012;
            sim::StationModel alice, bob;
            alice.q = biases[i][0];
            bob.q = biases[i][1];
            sim::SessionSimulator simulator(src, alice, bob, 1000000,
                                            derive_seed(8800, "sift", i));
            const auto keys = sift::sift(simulator);
            const double measured =
                double(keys.n_xx + keys.n_zz) / double(keys.raw_rounds);
            const double formula = biases[i][0] * biases[i][1] +
                                   (1 - biases[i][0]) * (1 - biases[i][1]);
            ok = ok && std::abs(measured - formula) < 0.005 &&
                 std::abs(measured - observed[i]) < 0.03;
            detail += (i ? " " : "") + fmt(measured);
        }
        report(5, "sift-ratio-reproduction", ok, detail);
    }

    // 6. Reconciliation cost reproduction.
    begin();
    {
        const auto x = bench_cascade(1208, 0.054, 200, 4242);
        const auto z = bench_cascade(927, 0.012, 200, 2424);
        const bool sizes_ok = cascade::initial_block_size(0.054, 0.86, 1208) == 16 &&
                              cascade::initial_block_size(0.012, 0.86, 927) == 72;
        const bool x_ok = std::abs(x.mean_revealed - 490.8) <= 0.15 * 490.8 &&
                          std::abs(x.f - 1.31) <= 0.15 && x.all_corrected;
        const bool z_ok = std::abs(z.mean_revealed - 155.8) <= 0.20 * 155.8 &&
                          std::abs(z.f - 1.59) <= 0.20 && z.all_corrected;
        report(6, "cascade-efficiency-reproduction", sizes_ok && x_ok && z_ok,
               "X rev " + fmt(x.mean_revealed) + " f " + fmt(x.f) + "; Z rev " +
                   fmt(z.mean_revealed) + " f " + fmt(z.f));
    }

    // 7. Reconciliation correctness at scale.
    begin();
    {
        Rng rng(derive_seed(7777, "correctness"));
        const std::size_t n = 10000, n_errors = 500;
        std::size_t mismatches = 0;
        for (int run = 0; run < 10000; ++run) {
            BitVec key_a = rng.random_bits(n);
            BitVec key_b = key_a;
            std::vector<std::uint32_t> pos(n);
            std::iota(pos.begin(), pos.end(), 0u);
            rng.shuffle(std::span<std::uint32_t>(pos));
            for (std::size_t i = 0; i < n_errors; ++i) key_b.flip(pos[i]);
            cascade::CascadeConfig cfg;
            cfg.shuffle_seed = derive_seed(7777, "shuffle", run);
            const auto res = cascade::run_cascade(key_a, key_b, cfg, 0.05);
            if (!(res.corrected == key_a)) ++mismatches;
        }
        report(7, "cascade-correctness", mismatches == 0,
               std::to_string(mismatches) + " residual mismatches in 10000 runs");
    }

    // 8. End-to-end rate reproduction at reduced scale, checked against the
    // closed-form rate recomputed for this pair count.
    begin();
    std::vector<session::SessionPair> sessions;
    {
        const double biases[4][2] = {
            {0.4570, 0.4752}, {0.5660, 0.6074}, {0.7398, 0.7606}, {0.8804, 0.9062}};
        // independently derived closed-form targets at N = 1e6
        const double frozen[4] = {0.257988, 0.267696, 0.323817, 0.391801};
        bool ok = true;
        std::string detail;
        std::vector<double> measured;
        for (int i = 0; i < 4; ++i) {
            const auto target = keyrate::rate_at_bias(1000000, biases[i][0], biases[i][1],
                                                      0.054, 0.012, 1.31, 1.59, 5e-7, 5e-7);
            ok = ok && std::abs(target.raw_rate - frozen[i]) < 1e-4;
            auto cfg = table_session(biases[i][0], biases[i][1], derive_seed(909, "session", i));
            sessions.push_back(session::run_session(cfg));
            const double got = sessions.back().bob.report.secure_per_raw;
            measured.push_back(got);
            ok = ok && std::abs(got / target.raw_rate - 1.0) <= 0.10;
            detail += (i ? " " : "") + fmt(got) + "/" + fmt(target.raw_rate);
        }
        const double target_ratio =
            keyrate::rate_at_bias(1000000, 0.8804, 0.9062, 0.054, 0.012, 1.31, 1.59, 5e-7, 5e-7)
                .raw_rate /
            keyrate::rate_at_bias(1000000, 0.4570, 0.4752, 0.054, 0.012, 1.31, 1.59, 5e-7, 5e-7)
                .raw_rate;
        const double ratio = measured[3] / measured[0];
        ok = ok && std::abs(ratio - target_ratio) <= 0.15;
        report(8, "end-to-end-rate-reproduction", ok,
               detail + " ratio " + fmt(ratio) + " target " + fmt(target_ratio));
    }

    // 9. Property suite.
    begin();
    {
        bool ok = true;
        std::string why;
        auto require = [&](bool cond, const char* what) {
            if (!cond && ok) { ok = false; why = what; }
        };

        Rng rng(99);
        // entropy symmetry and concavity
        for (int i = 0; i < 100; ++i) {
            const double x = rng.next_unit(), y = rng.next_unit();
            require(std::abs(keyrate::binary_entropy(x) - keyrate::binary_entropy(1 - x)) < 1e-12,
                    "entropy symmetry");
            require(keyrate::binary_entropy(0.5 * (x + y)) + 1e-12 >=
                        0.5 * (keyrate::binary_entropy(x) + keyrate::binary_entropy(y)),
                    "entropy concavity");
        }
        // deviation solve round trip
        for (int i = 0; i < 100; ++i) {
            const std::uint64_t n = 100 + rng.below(10000000);
            const double e = 0.005 + 0.45 * rng.next_unit();
            const double target = std::pow(10.0, -1 - 8 * rng.next_unit());
            const double eps = keyrate::solve_epsilon(n, e, target);
            require(std::abs(keyrate::sampling_bound(eps, n, e) / target - 1.0) < 1e-12,
                    "solve/bound round trip");
        }
        // rate symmetry under the basis swap
        for (int i = 0; i < 100; ++i) {
            keyrate::KeyRateParams p;
            p.q_a = p.q_b = rng.next_unit();
            p.e_bx = 0.3 * rng.next_unit();
            p.e_bz = 0.3 * rng.next_unit();
            p.f_x = 1 + rng.next_unit();
            p.f_z = 1 + rng.next_unit();
            p.eps_x = 0.05 * rng.next_unit();
            p.eps_z = 0.05 * rng.next_unit();
            keyrate::KeyRateParams s;
            s.q_a = s.q_b = 1 - p.q_a;
            s.e_bx = p.e_bz; s.e_bz = p.e_bx;
            s.f_x = p.f_z; s.f_z = p.f_x;
            s.eps_x = p.eps_z; s.eps_z = p.eps_x;
            require(std::abs(keyrate::key_rate(p) - keyrate::key_rate(s)) < 1e-12,
                    "rate swap symmetry");
        }
        // two-universality at m = 8 within 3 sigma
        {
            const std::size_t n = 48, m = 8;
            const BitVec x = rng.random_bits(n);
            BitVec y = x;
            y.flip(5);
            int collisions = 0;
            const int seeds = 20000;
            for (int s = 0; s < seeds; ++s) {
                auto spec = privacy::HashSpec::from_rng(n, m, rng);
                if (privacy::pa_hash(x, spec) == privacy::pa_hash(y, spec)) ++collisions;
            }
            const double p = std::pow(2.0, -double(m));
            require(std::abs(collisions - p * seeds) <= 3.0 * std::sqrt(p * (1 - p) * seeds),
                    "two-universal collision bound");
        }
        // Toeplitz linearity
        {
            auto spec = privacy::HashSpec::from_rng(96, 40, rng);
            for (int i = 0; i < 50; ++i) {
                const BitVec a = rng.random_bits(96), b = rng.random_bits(96);
                BitVec ab(96);
                for (std::size_t k = 0; k < 96; ++k) ab.set(k, a.get(k) ^ b.get(k));
                const BitVec ha = privacy::pa_hash(a, spec), hb = privacy::pa_hash(b, spec);
                BitVec hab(40);
                for (std::size_t k = 0; k < 40; ++k) hab.set(k, ha.get(k) ^ hb.get(k));
                require(privacy::pa_hash(ab, spec) == hab, "Toeplitz linearity");
            }
        }
        // cross-party agreement and exact leak recount on the end-to-end runs
        for (const auto& s : sessions) {
            require(s.alice.final_key == s.bob.final_key, "cross-party final keys");
            require(s.alice.report.final_len == s.bob.report.final_len, "cross-party lengths");
            const auto rx = cascade::transcript_parity_bits(
                cascade::transcript_to_csv(s.bob.transcript_x));
            const auto rz = cascade::transcript_parity_bits(
                cascade::transcript_to_csv(s.bob.transcript_z));
            require(rx == s.bob.stats_x.total_revealed(), "leak recount X");
            require(rz == s.bob.stats_z.total_revealed(), "leak recount Z");
        }
        // determinism under fixed seeds across both transports
        {
            auto cfg = table_session(0.8, 0.82, 424242);
            cfg.n_rounds = 100000;
            const auto first = session::run_session(cfg);
            const auto second = session::run_session(cfg);
            require(first.bob.final_key == second.bob.final_key, "repeat determinism");

            session::PartyResult sa, sb;
            std::exception_ptr ea, eb;
            std::thread th_a([&] {
                try {
                    auto t = wire::SocketTransport::listen("127.0.0.1:36911");
                    session::run_party(session::Role::Alice, cfg, *t, sa);
                } catch (...) { ea = std::current_exception(); }
            });
            std::thread th_b([&] {
                try {
                    auto t = wire::SocketTransport::connect("127.0.0.1:36911");
                    session::run_party(session::Role::Bob, cfg, *t, sb);
                } catch (...) { eb = std::current_exception(); }
            });
            th_a.join();
            th_b.join();
            require(!ea && !eb, "socket transport run");
            if (!ea && !eb) {
                require(sb.final_key == first.bob.final_key, "cross-transport determinism");
                require(sa.final_key == sb.final_key, "cross-party keys over socket");
            }
        }
        report(9, "property-suite", ok, ok ? "all properties hold" : why);
    }

    std::printf("%s: %d of 9 criteria failed\n", failures == 0 ? "OK" : "FAILED", failures);
    return failures == 0 ? 0 : 1;
}
