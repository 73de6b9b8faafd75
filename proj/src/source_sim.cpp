#include "qkd/source_sim.hpp"

#include <charconv>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace qkd::sim {

namespace {

void check_prob(double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw std::domain_error(std::string(name) + " must lie in [0,1]");
    }
}

char basis_char(Basis b) { return b == Basis::Z ? 'Z' : 'X'; }

Basis parse_basis(const std::string& s, std::uint64_t line_number) {
    if (s == "Z") return Basis::Z;
    if (s == "X") return Basis::X;
    throw std::runtime_error("event record line " + std::to_string(line_number) +
                             ": bad basis '" + s + "'");
}

} // namespace

void SourceModel::validate() const {
    check_prob(p_bx, "p_bx");
    check_prob(p_bz, "p_bz");
    check_prob(accidental_prob, "accidental_prob");
    check_prob(double_click_prob, "double_click_prob");
    if (pair_rate < 0.0) throw std::domain_error("pair_rate must be >= 0");
}

void StationModel::validate() const {
    check_prob(q, "q");
    if (!(pre_attenuation > 0.0 && pre_attenuation <= 1.0))
        throw std::domain_error("pre_attenuation must lie in (0,1]");
}

double visibility_to_error(double visibility) {
    if (!(visibility >= 0.0 && visibility <= 1.0))
        throw std::domain_error("visibility must lie in [0,1]");
    return (1.0 - visibility) / 2.0;
}

RoundOutcome generate_round(const SourceModel& source, const StationModel& alice,
                            const StationModel& bob, std::uint64_t round_index, Rng& rng) {
    RoundOutcome r;
    r.round_index = round_index;
    r.alice_detected = rng.bernoulli(alice.pre_attenuation);
    r.bob_detected = rng.bernoulli(bob.pre_attenuation);
    r.alice_basis = rng.bernoulli(alice.q) ? Basis::Z : Basis::X;
    r.bob_basis = rng.bernoulli(bob.q) ? Basis::Z : Basis::X;
    r.accidental = rng.bernoulli(source.accidental_prob);
    r.double_click = rng.bernoulli(source.double_click_prob);

    r.alice_bit = rng.bernoulli(0.5) ? 1 : 0;
    if (r.accidental || r.alice_basis != r.bob_basis) {
        // Uncorrelated: accidental coincidence, or conjugate bases.
        r.bob_bit = rng.bernoulli(0.5) ? 1 : 0;
    } else {
        // The same per-basis probability serves as the bit-error source in
        // this basis and the phase disturbance seen from the other one.
        const double p_err = r.alice_basis == Basis::Z ? source.p_bz : source.p_bx;
        r.bob_bit = static_cast<std::uint8_t>(r.alice_bit ^ (rng.bernoulli(p_err) ? 1 : 0));
    }
    return r;
}

SessionSimulator::SessionSimulator(const SourceModel& source, const StationModel& alice,
                                   const StationModel& bob, std::uint64_t n_rounds,
                                   std::uint64_t seed)
    : source_(source), alice_(alice), bob_(bob), n_rounds_(n_rounds), rng_(seed) {
    if (n_rounds < 1) throw std::invalid_argument("SessionSimulator: n_rounds must be >= 1");
    source_.validate();
    alice_.validate();
    bob_.validate();
}

RoundOutcome SessionSimulator::next() {
    if (done()) throw std::logic_error("SessionSimulator: stream exhausted");
    return generate_round(source_, alice_, bob_, next_index_++, rng_);
}

std::string to_csv_line(const RoundOutcome& r) {
    std::string flags;
    auto add_flag = [&](const char* f) {
        if (!flags.empty()) flags += '|';
        flags += f;
    };
    if (r.lost()) add_flag("lost");
    if (r.accidental) add_flag("accidental");
    if (r.double_click) add_flag("double_click");

    std::string line = std::to_string(r.round_index);
    line += ',';
    line += r.alice_detected ? basis_char(r.alice_basis) : '-';
    line += ',';
    line += r.alice_detected ? char('0' + r.alice_bit) : '-';
    line += ',';
    line += r.bob_detected ? basis_char(r.bob_basis) : '-';
    line += ',';
    line += r.bob_detected ? char('0' + r.bob_bit) : '-';
    line += ',';
    line += flags;
    return line;
}

RoundOutcome from_csv_line(const std::string& line, std::uint64_t line_number) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') { fields.push_back(cur); cur.clear(); }
        else cur += c;
    }
    fields.push_back(cur);
    if (fields.size() != 6)
        throw std::runtime_error("event record line " + std::to_string(line_number) +
                                 ": expected 6 fields, got " + std::to_string(fields.size()));

    RoundOutcome r;
    auto& idx = fields[0];
    auto [p, ec] = std::from_chars(idx.data(), idx.data() + idx.size(), r.round_index);
    if (ec != std::errc{} || p != idx.data() + idx.size())
        throw std::runtime_error("event record line " + std::to_string(line_number) +
                                 ": bad round index '" + idx + "'");

    r.alice_detected = fields[1] != "-";
    r.bob_detected = fields[3] != "-";
    if (r.alice_detected) {
        r.alice_basis = parse_basis(fields[1], line_number);
        if (fields[2] != "0" && fields[2] != "1")
            throw std::runtime_error("event record line " + std::to_string(line_number) +
                                     " (round " + idx + "): bad bit '" + fields[2] + "'");
        r.alice_bit = fields[2] == "1";
    } else if (fields[2] != "-") {
        throw std::runtime_error("event record line " + std::to_string(line_number) +
                                 " (round " + idx + "): undetected station carries a bit");
    }
    if (r.bob_detected) {
        r.bob_basis = parse_basis(fields[3], line_number);
        if (fields[4] != "0" && fields[4] != "1")
            throw std::runtime_error("event record line " + std::to_string(line_number) +
                                     " (round " + idx + "): bad bit '" + fields[4] + "'");
        r.bob_bit = fields[4] == "1";
    } else if (fields[4] != "-") {
        throw std::runtime_error("event record line " + std::to_string(line_number) +
                                 " (round " + idx + "): undetected station carries a bit");
    }

    const std::string& flags = fields[5];
    std::string flag;
    std::stringstream fs(flags);
    while (std::getline(fs, flag, '|')) {
        if (flag == "lost") {
            if (!r.lost())
                throw std::runtime_error("event record line " + std::to_string(line_number) +
                                         " (round " + idx + "): lost flag with both stations detected");
        } else if (flag == "accidental") {
            r.accidental = true;
        } else if (flag == "double_click") {
            r.double_click = true;
        } else if (!flag.empty()) {
            throw std::runtime_error("event record line " + std::to_string(line_number) +
                                     " (round " + idx + "): unknown flag '" + flag + "'");
        }
    }
    return r;
}

void write_event_csv(std::ostream& out, SessionSimulator& sim) {
    while (!sim.done()) out << to_csv_line(sim.next()) << '\n';
}

} // namespace qkd::sim
