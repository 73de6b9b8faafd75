#include "qkd/sifting.hpp"

#include <istream>

namespace qkd::sift {

void SiftedKeys::add_round(const sim::RoundOutcome& r) {
    if (!r.coincident()) return;
    ++raw_rounds;
    if (r.double_click) { ++dropped; return; }
    if (r.alice_basis != r.bob_basis) { ++mismatched; return; }
    if (r.alice_basis == sim::Basis::X) {
        x_bits_a.push_back(r.alice_bit);
        x_bits_b.push_back(r.bob_bit);
        round_index_x.push_back(r.round_index);
        ++n_xx;
    } else {
        z_bits_a.push_back(r.alice_bit);
        z_bits_b.push_back(r.bob_bit);
        round_index_z.push_back(r.round_index);
        ++n_zz;
    }
}

SiftedKeys sift(sim::SessionSimulator& sim) {
    SiftedKeys keys;
    while (!sim.done()) keys.add_round(sim.next());
    return keys;
}

SiftedKeys sift_csv(std::istream& events) {
    SiftedKeys keys;
    std::string line;
    std::uint64_t line_number = 0;
    while (std::getline(events, line)) {
        ++line_number;
        if (line.empty() || line[0] == '#') continue;
        keys.add_round(sim::from_csv_line(line, line_number));
    }
    return keys;
}

std::pair<double, double> expected_sift_fraction(const BiasConfig& bias) {
    const double frac_total = bias.q_a * bias.q_b + (1.0 - bias.q_a) * (1.0 - bias.q_b);
    const double zz_share = frac_total > 0.0 ? bias.q_a * bias.q_b / frac_total : 0.0;
    return {frac_total, zz_share};
}

} // namespace qkd::sift
