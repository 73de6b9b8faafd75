#pragma once

#include <cstdint>
#include <iosfwd>
#include <utility>
#include <vector>

#include "qkd/bitvec.hpp"
#include "qkd/source_sim.hpp"

namespace qkd::sift {

struct BiasConfig {
    double q_a = 0.5;
    double q_b = 0.5;
};

/// Per-basis aligned keys after basis reconciliation, with exact counts.
/// round_index_* keep the origin round of every sifted bit so error
/// positions can be mapped back onto the timeline.
struct SiftedKeys {
    BitVec x_bits_a, x_bits_b;
    BitVec z_bits_a, z_bits_b;
    std::uint64_t raw_rounds = 0;   ///< detected coincident rounds, basis mismatches included
    std::uint64_t n_xx = 0;
    std::uint64_t n_zz = 0;
    std::uint64_t mismatched = 0;   ///< coincident rounds with different bases
    std::uint64_t dropped = 0;      ///< coincident rounds dropped for double clicks
    std::vector<std::uint64_t> round_index_x;
    std::vector<std::uint64_t> round_index_z;

    void add_round(const sim::RoundOutcome& r);
};

/// Sifts a full simulated session.
SiftedKeys sift(sim::SessionSimulator& sim);

/// Sifts a replayed event dump (one CSV record per round).
SiftedKeys sift_csv(std::istream& events);

/// (total matched fraction, Z share of matched rounds):
/// q_a q_b + (1-q_a)(1-q_b) and q_a q_b / that total.
std::pair<double, double> expected_sift_fraction(const BiasConfig& bias);

} // namespace qkd::sift
