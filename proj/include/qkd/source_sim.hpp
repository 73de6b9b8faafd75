#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "qkd/rng.hpp"

namespace qkd::sim {

enum class Basis : std::uint8_t { Z = 0, X = 1 };

/// Entangled-pair source. The same per-basis error probability drives both
/// the bit errors measured in that basis and the phase disturbance seen by
/// the conjugate basis, so the generator is basis-independent by
/// construction.
struct SourceModel {
    double p_bx = 0.0;             ///< intrinsic bit-error probability, X basis
    double p_bz = 0.0;             ///< intrinsic bit-error probability, Z basis
    double pair_rate = 11000.0;    ///< pairs per second, timeline labeling only
    double accidental_prob = 0.0;  ///< round is an uncorrelated accidental
    double double_click_prob = 0.0;///< a station registers a double click

    void validate() const;
};

/// One measurement station: biased passive basis choice plus an overall
/// detection-efficiency factor (the attenuated beamsplitter arm is folded
/// into the basis probability; an absorbed photon becomes a lost round).
struct StationModel {
    double q = 0.5;              ///< probability of measuring in Z
    double pre_attenuation = 1.0;///< detection efficiency in (0, 1]

    void validate() const;
};

struct RoundOutcome {
    std::uint64_t round_index = 0;
    Basis alice_basis = Basis::Z;
    Basis bob_basis = Basis::Z;
    std::uint8_t alice_bit = 0;
    std::uint8_t bob_bit = 0;
    bool alice_detected = true;
    bool bob_detected = true;
    bool accidental = false;
    bool double_click = false;

    bool lost() const { return !alice_detected || !bob_detected; }
    /// Detected coincidence (counts toward the raw key, double clicks included).
    bool coincident() const { return alice_detected && bob_detected; }
};

/// (1 - V) / 2: polarization visibility to error probability.
double visibility_to_error(double visibility);

RoundOutcome generate_round(const SourceModel& source, const StationModel& alice,
                            const StationModel& bob, std::uint64_t round_index, Rng& rng);

/// Streaming generator over n_rounds; memory use is independent of length
/// and a fixed seed reproduces the stream bit for bit.
class SessionSimulator {
public:
    SessionSimulator(const SourceModel& source, const StationModel& alice,
                     const StationModel& bob, std::uint64_t n_rounds, std::uint64_t seed);

    bool done() const { return next_index_ >= n_rounds_; }
    RoundOutcome next();
    std::uint64_t n_rounds() const { return n_rounds_; }

private:
    SourceModel source_;
    StationModel alice_;
    StationModel bob_;
    std::uint64_t n_rounds_;
    std::uint64_t next_index_ = 0;
    Rng rng_;
};

/// CSV event record: round,alice_basis,alice_bit,bob_basis,bob_bit,flags.
/// Undetected stations write '-' for basis and bit; flags is a '|' joined
/// subset of {lost, accidental, double_click} or empty.
std::string to_csv_line(const RoundOutcome& r);
RoundOutcome from_csv_line(const std::string& line, std::uint64_t line_number);

void write_event_csv(std::ostream& out, SessionSimulator& sim);

} // namespace qkd::sim
