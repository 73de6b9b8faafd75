#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "qkd/bitvec.hpp"
#include "qkd/cascade.hpp"
#include "qkd/source_sim.hpp"
#include "qkd/transport.hpp"

namespace qkd::session {

struct SessionConfig {
    sim::SourceModel source;
    sim::StationModel alice;
    sim::StationModel bob;
    cascade::CascadeConfig cascade; ///< shuffle_seed is derived per basis/chunk from `seed`
    double p_eps = 1e-6;            ///< total phase-estimation failure budget
    double p_eps_split_x = 0.5;     ///< fraction of p_eps assigned to the X-key deviation
    std::uint64_t n_rounds = 1000000;
    std::uint64_t seed = 1;
    std::uint32_t announce_block = 100000; ///< rounds per basis announcement
    std::uint32_t work_block = 1000;       ///< sifted bits reconciled per cascade run
    std::uint32_t tag_len = 40;            ///< verification tag length per basis
    double qber_prior_x = 0.05;            ///< first-chunk block sizing prior
    double qber_prior_z = 0.05;
    std::uint32_t qber_window = 10000;     ///< rounds per QBER time-series bucket

    void validate() const;
};

struct SessionReport {
    double qber_x = 0.0, qber_z = 0.0;
    std::uint64_t raw_len = 0, sifted_len = 0, final_len = 0;
    std::uint64_t n_xx = 0, n_zz = 0;
    double secure_per_raw = 0.0;
    double eps_x = 0.0, eps_z = 0.0;
    std::uint64_t leak_x = 0, leak_z = 0; ///< parity bits plus the verification tag
    double f_x = 0.0, f_z = 0.0;          ///< measured reconciliation inefficiency
    double efficiency_ratio_vs_baseline = 0.0; ///< filled by compare runs
    std::uint64_t errors_x = 0, errors_z = 0;
    std::uint64_t mismatched = 0, dropped = 0;
    std::uint64_t seed = 0;
    std::string session_id;
};

struct QberWindow {
    std::uint64_t window_index = 0;
    double qber_x = 0.0, qber_z = 0.0;
    bool has_x = false, has_z = false; ///< a basis with no matched rounds is absent, not zero
};

struct PartyResult {
    SessionReport report;
    BitVec final_key;
    bool no_positive_rate = false;
    cascade::CascadeStats stats_x, stats_z; ///< aggregates; corrector side only
    std::vector<cascade::CascadeStats> chunks_x, chunks_z;
    cascade::Transcript transcript_x, transcript_z;
    std::vector<std::uint64_t> round_index_x, round_index_z; ///< origin round per sifted bit
    std::vector<std::uint64_t> error_rounds_x, error_rounds_z;
};

enum class Role { Alice, Bob };

class SessionAborted : public std::runtime_error {
public:
    SessionAborted(int code, const std::string& what)
        : std::runtime_error(what), exit_code(code) {}
    int exit_code; ///< 3 = protocol abort, 4 = verification failure
};

/// Runs one party's state machine to completion over the transport,
/// filling `out` progressively so transcripts survive an abort.
void run_party(Role role, const SessionConfig& cfg, wire::Transport& transport,
               PartyResult& out);

struct SessionPair {
    PartyResult alice;
    PartyResult bob;
};

/// Runs both parties concurrently over an in-process queue pair.
SessionPair run_session(const SessionConfig& cfg);

/// Per-window error rates reconstructed from the positions disclosed during
/// reconciliation; no additional disclosure. window must be >= 100 rounds.
std::vector<QberWindow> qber_timeseries(std::span<const std::uint64_t> round_index_x,
                                        std::span<const std::uint64_t> round_index_z,
                                        std::span<const std::uint64_t> error_rounds_x,
                                        std::span<const std::uint64_t> error_rounds_z,
                                        std::uint32_t window, std::uint64_t n_rounds);

std::vector<QberWindow> qber_timeseries(const PartyResult& r, std::uint32_t window,
                                        std::uint64_t n_rounds);

/// secure_per_raw of each report relative to the baseline entry.
/// Throws std::invalid_argument on fewer than two reports or a zero
/// baseline.
std::vector<double> compare_reports(const std::vector<SessionReport>& reports,
                                    std::size_t baseline_index);

} // namespace qkd::session
