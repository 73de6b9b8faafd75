#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "qkd/bitvec.hpp"
#include "qkd/rng.hpp"

namespace qkd::cascade {

struct CascadeConfig {
    int num_passes = 3;
    double block_constant = 0.86; ///< k1 = max(2, round(c / e)); doubles per pass
    int biconf_rounds = 40;       ///< s: consecutive clean confirmation rounds required
    std::uint64_t shuffle_seed = 0;
};

/// Everything revealed and corrected during one reconciliation run. The
/// error matrix is (num_passes + 1)^2: row p-1 holds corrections made while
/// processing pass p, row num_passes those made during confirmation;
/// column j-1 says the error was located via the pass-j shuffle structure,
/// and the last column marks confirmation-subset finds.
struct CascadeStats {
    std::vector<std::vector<std::uint64_t>> errors_per_pass_per_sequence;
    std::uint64_t bits_revealed_binary = 0;
    std::uint64_t bits_revealed_biconf = 0;
    std::uint64_t errors_corrected_binary = 0;
    std::uint64_t errors_corrected_biconf = 0;
    std::vector<std::size_t> block_sizes_per_pass;
    std::size_t key_length = 0;
    double qber_measured = 0.0;
    double efficiency_f = 0.0; ///< revealed / (key_length * h2(qber_measured))

    std::uint64_t total_revealed() const { return bits_revealed_binary + bits_revealed_biconf; }
    std::uint64_t total_corrected() const { return errors_corrected_binary + errors_corrected_biconf; }
};

/// One transcript line per message:
/// direction ('A' = responder to corrector, 'B' = corrector to responder),
/// pass being processed (0 = confirmation phase), sequence = shuffle
/// structure addressed (0 = confirmation subset), block id, and how many
/// parity bits the message carries (requests and seed announcements carry
/// none).
struct TranscriptRecord {
    char direction;
    std::uint32_t pass;
    std::uint32_t sequence;
    std::uint64_t block_id;
    std::uint32_t parity_bits;
};
using Transcript = std::vector<TranscriptRecord>;

std::string transcript_to_csv(const Transcript& t);
/// Sum of parity bits carried responder-to-corrector; the independent
/// recount that must equal CascadeStats::total_revealed().
std::uint64_t transcript_parity_bits(const std::string& csv);

/// k1 = max(2, round(c / e)), capped at the key length; e == 0 keys the
/// whole string as a single block.
std::size_t initial_block_size(double e, double c, std::size_t key_length);

/// Shuffle-and-partition view shared by both parties of a pass.
struct PassStructure {
    std::size_t n = 0;
    std::size_t block_size = 0;
    std::size_t num_blocks = 0;
    std::vector<std::uint32_t> perm; ///< pass position -> original index
    std::vector<std::uint32_t> inv;  ///< original index -> pass position

    static PassStructure build(std::size_t n, std::size_t block_size, std::uint64_t seed);
    std::pair<std::size_t, std::size_t> block_range(std::size_t b) const;
    std::size_t block_of_original(std::size_t orig) const { return inv[orig] / block_size; }
    std::size_t block_length(std::size_t b) const;
    bool key_parity(const BitVec& key, std::size_t lo, std::size_t hi) const;
};

/// Random confirmation subset: every position independently with
/// probability one half, derived from a shared seed.
struct SubsetStructure {
    BitVec mask;
    std::vector<std::uint32_t> indices;

    static SubsetStructure build(std::size_t n, std::uint64_t seed);
    void materialize();
    bool key_parity_interval(const BitVec& key, std::size_t lo, std::size_t hi);
};

/// Interval in a structure's ordering, [lo, hi).
struct Interval {
    std::uint32_t lo;
    std::uint32_t hi;
};

constexpr std::uint8_t kContextPass = 1;
constexpr std::uint8_t kContextSubset = 2;

/// The corrector's view of the conversation with the reference key holder.
class CascadeLink {
public:
    virtual ~CascadeLink() = default;
    virtual void shuffle_seed(std::uint32_t pass, std::uint64_t seed) = 0;
    virtual void subset_seed(std::uint32_t round, std::uint64_t seed) = 0;
    /// One request/response exchange; returns the reference parities, one
    /// bit per interval.
    virtual BitVec parities(std::uint8_t context, std::uint32_t structure,
                            std::uint32_t during_pass, std::uint64_t block_id,
                            const std::vector<Interval>& intervals) = 0;
    virtual void correction(std::uint32_t during_pass, std::uint32_t structure,
                            std::uint64_t orig_index) = 0;
};

/// Reference-side state: answers parity queries against an immutable key.
class Responder {
public:
    explicit Responder(BitVec key, const CascadeConfig& config);

    void on_shuffle_seed(std::uint32_t pass, std::uint64_t seed);
    void on_subset_seed(std::uint32_t round, std::uint64_t seed);
    BitVec on_parities(std::uint8_t context, std::uint32_t structure,
                       const std::vector<Interval>& intervals);
    void on_correction(std::uint32_t during_pass, std::uint32_t structure,
                       std::uint64_t orig_index);

    std::uint64_t corrections_seen() const { return corrections_seen_; }
    std::uint64_t parities_sent() const { return parities_sent_; }
    const BitVec& key() const { return key_; }

private:
    BitVec key_;
    CascadeConfig config_;
    std::vector<std::vector<std::uint32_t>> perms_; ///< one per announced pass
    std::uint32_t subset_round_ = 0;                ///< only the latest subset is live
    SubsetStructure subset_;
    std::uint64_t corrections_seen_ = 0;
    std::uint64_t parities_sent_ = 0;
};

/// In-process link: wires a Corrector directly to a Responder and logs the
/// same transcript the wire protocol would produce.
class LocalLink : public CascadeLink {
public:
    LocalLink(BitVec reference_key, const CascadeConfig& config)
        : responder_(std::move(reference_key), config) {}

    void shuffle_seed(std::uint32_t pass, std::uint64_t seed) override;
    void subset_seed(std::uint32_t round, std::uint64_t seed) override;
    BitVec parities(std::uint8_t context, std::uint32_t structure,
                    std::uint32_t during_pass, std::uint64_t block_id,
                    const std::vector<Interval>& intervals) override;
    void correction(std::uint32_t during_pass, std::uint32_t structure,
                    std::uint64_t orig_index) override;

    const Transcript& transcript() const { return transcript_; }
    const Responder& responder() const { return responder_; }

private:
    Responder responder_;
    Transcript transcript_;
};

/// Runs the multi-pass reconciliation with back-tracking and the
/// confirmation phase over `link`, correcting `key` in place against the
/// reference on the other side. `working_qber` sizes the first-pass blocks.
CascadeStats correct_key(BitVec& key, const CascadeConfig& config, double working_qber,
                         CascadeLink& link);

struct RunResult {
    BitVec corrected;
    CascadeStats stats;
    Transcript transcript;
};

/// Convenience wrapper for local runs: corrects key_b against key_a.
/// key_a is never modified.
RunResult run_cascade(const BitVec& key_a, const BitVec& key_b,
                      const CascadeConfig& config, double working_qber);

/// Bisection over a parity-mismatched block of two local bit strings:
/// returns the differing position and flips it in block_b. Bit count is
/// 1 + ceil(log2 k): the whole-block parity plus one per halving.
struct BinaryResult {
    std::size_t error_position;
    std::uint32_t bits_revealed;
};
BinaryResult binary_correct(const BitVec& block_a, BitVec& block_b);

/// Sums counters over per-chunk runs; block sizes become per-pass means and
/// qber/efficiency are recomputed from the totals.
CascadeStats aggregate_stats(const std::vector<CascadeStats>& runs);

/// Standalone confirmation phase over two local keys (no pass structures):
/// random-subset parity rounds with bisection on mismatch, restarting the
/// clean-round count after every correction.
struct BiconfResult {
    std::uint64_t bits_revealed = 0;
    std::uint64_t corrections = 0;
    std::uint64_t rounds_used = 0;
    std::uint64_t first_correction_round = 0; ///< 0 when no correction happened
};
BiconfResult biconf(const BitVec& key_a, BitVec& key_b, int s, std::uint64_t seed);

} // namespace qkd::cascade
