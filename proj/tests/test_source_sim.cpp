#include <doctest.h>

#include <cmath>
#include <sstream>

#include "qkd/source_sim.hpp"

using namespace qkd;
using namespace qkd::sim;

namespace {

SourceModel channel_source(double p_bx, double p_bz) {
    SourceModel s;
    s.p_bx = p_bx;
    s.p_bz = p_bz;
    return s;
}

} // namespace

TEST_CASE("visibility to error probability") {
    CHECK(visibility_to_error(1.0) == 0.0);
    CHECK(visibility_to_error(0.996) == doctest::Approx(0.002).epsilon(1e-9));
    CHECK(visibility_to_error(0.924) == doctest::Approx(0.038).epsilon(1e-9));
    CHECK_THROWS_AS(visibility_to_error(1.5), std::domain_error);
    CHECK_THROWS_AS(visibility_to_error(-0.1), std::domain_error);
}

TEST_CASE("degenerate full bias keeps every surviving round in Z") {
    StationModel st;
    st.q = 1.0;
    SessionSimulator sim(channel_source(0.0, 0.0), st, st, 2000, 7);
    while (!sim.done()) {
        const auto r = sim.next();
        CHECK(r.alice_basis == Basis::Z);
        CHECK(r.bob_basis == Basis::Z);
    }
}

TEST_CASE("noiseless matched rounds agree") {
    StationModel st;
    SessionSimulator sim(channel_source(0.0, 0.0), st, st, 5000, 9);
    while (!sim.done()) {
        const auto r = sim.next();
        if (r.alice_basis == r.bob_basis && !r.accidental)
            CHECK(r.alice_bit == r.bob_bit);
    }
}

TEST_CASE("matched-basis error rate converges to the configured probability") {
    StationModel st;
    SessionSimulator sim(channel_source(0.054, 0.012), st, st, 1000000, 123);
    std::uint64_t xx = 0, xx_err = 0, zz = 0, zz_err = 0;
    while (!sim.done()) {
        const auto r = sim.next();
        if (r.alice_basis != r.bob_basis) continue;
        if (r.alice_basis == Basis::X) {
            ++xx;
            if (r.alice_bit != r.bob_bit) ++xx_err;
        } else {
            ++zz;
            if (r.alice_bit != r.bob_bit) ++zz_err;
        }
    }
    const double ex = double(xx_err) / double(xx);
    const double ez = double(zz_err) / double(zz);
    CHECK(std::abs(ex - 0.054) < 3.0 * std::sqrt(0.054 * 0.946 / double(xx)));
    CHECK(std::abs(ez - 0.012) < 3.0 * std::sqrt(0.012 * 0.988 / double(zz)));
}

TEST_CASE("station biases produce the expected both-Z fraction") {
    StationModel alice, bob;
    alice.q = 0.8804;
    bob.q = 0.9062;
    SessionSimulator sim(channel_source(0.054, 0.012), alice, bob, 1000000, 77);
    std::uint64_t both_z = 0;
    while (!sim.done()) {
        const auto r = sim.next();
        if (r.alice_basis == Basis::Z && r.bob_basis == Basis::Z) ++both_z;
    }
    const double p = 0.8804 * 0.9062; // 0.797819
    const double frac = double(both_z) / 1e6;
    CHECK(std::abs(frac - p) < 3.0 * std::sqrt(p * (1 - p) / 1e6));
}

TEST_CASE("basis choices are independent across the parties") {
    StationModel alice, bob;
    alice.q = 0.7398;
    bob.q = 0.7606;
    SessionSimulator sim(channel_source(0.05, 0.01), alice, bob, 1000000, 31);
    std::uint64_t table[2][2] = {{0, 0}, {0, 0}};
    while (!sim.done()) {
        const auto r = sim.next();
        table[r.alice_basis == Basis::Z][r.bob_basis == Basis::Z]++;
    }
    const double n = 1e6;
    double chi2 = 0.0;
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
            const double row = double(table[a][0] + table[a][1]);
            const double col = double(table[0][b] + table[1][b]);
            const double expect = row * col / n;
            const double diff = double(table[a][b]) - expect;
            chi2 += diff * diff / expect;
        }
    CHECK(chi2 < 10.828); // 1 dof at significance 1e-3
}

TEST_CASE("simulator rejects an empty session and replays identically") {
    StationModel st;
    CHECK_THROWS_AS(SessionSimulator(channel_source(0, 0), st, st, 0, 1), std::invalid_argument);

    SourceModel src = channel_source(0.05, 0.01);
    src.accidental_prob = 0.001;
    src.double_click_prob = 0.001;
    StationModel lossy;
    lossy.pre_attenuation = 0.8;
    SessionSimulator a(src, lossy, lossy, 3000, 42);
    SessionSimulator b(src, lossy, lossy, 3000, 42);
    std::ostringstream sa, sb;
    write_event_csv(sa, a);
    write_event_csv(sb, b);
    CHECK(sa.str() == sb.str());
    CHECK(sa.str() != "");
}

TEST_CASE("event record round trip and parse errors") {
    SourceModel src = channel_source(0.1, 0.02);
    src.accidental_prob = 0.01;
    src.double_click_prob = 0.01;
    StationModel lossy;
    lossy.pre_attenuation = 0.7;
    SessionSimulator sim(src, lossy, lossy, 500, 5);
    std::uint64_t line_no = 0;
    while (!sim.done()) {
        const auto r = sim.next();
        const auto back = from_csv_line(to_csv_line(r), ++line_no);
        CHECK(back.round_index == r.round_index);
        CHECK(back.alice_detected == r.alice_detected);
        CHECK(back.bob_detected == r.bob_detected);
        if (r.alice_detected) {
            CHECK(back.alice_basis == r.alice_basis);
            CHECK(back.alice_bit == r.alice_bit);
        }
        if (r.bob_detected) {
            CHECK(back.bob_basis == r.bob_basis);
            CHECK(back.bob_bit == r.bob_bit);
        }
        CHECK(back.accidental == r.accidental);
        CHECK(back.double_click == r.double_click);
    }

    CHECK_THROWS_WITH_AS(from_csv_line("17,Z,0,Z", 9),
                         doctest::Contains("line 9"), std::runtime_error);
    CHECK_THROWS_WITH_AS(from_csv_line("17,Q,0,Z,1,", 3),
                         doctest::Contains("bad basis"), std::runtime_error);
    CHECK_THROWS_WITH_AS(from_csv_line("x,Z,0,Z,1,", 4),
                         doctest::Contains("bad round index"), std::runtime_error);
}
