#include "qkd/cascade.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "qkd/keyrate.hpp"

namespace qkd::cascade {

namespace {

bool parity_over_perm(const BitVec& key, const std::vector<std::uint32_t>& perm,
                      std::size_t lo, std::size_t hi) {
    bool acc = false;
    for (std::size_t i = lo; i < hi; ++i) acc ^= key.get(perm[i]);
    return acc;
}

std::vector<std::uint32_t> build_perm(std::size_t n, std::uint64_t seed) {
    std::vector<std::uint32_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0u);
    Rng rng(seed);
    rng.shuffle(std::span<std::uint32_t>(perm));
    return perm;
}

} // namespace

std::string transcript_to_csv(const Transcript& t) {
    std::string out;
    out.reserve(t.size() * 16);
    for (const auto& r : t) {
        out += r.direction;
        out += ',';
        out += std::to_string(r.pass);
        out += ',';
        out += std::to_string(r.sequence);
        out += ',';
        out += std::to_string(r.block_id);
        out += ',';
        out += std::to_string(r.parity_bits);
        out += '\n';
    }
    return out;
}

std::uint64_t transcript_parity_bits(const std::string& csv) {
    std::uint64_t total = 0;
    std::stringstream ss(csv);
    std::string line;
    while (std::getline(ss, line)) {
        const auto pos = line.rfind(',');
        if (pos == std::string::npos) throw std::runtime_error("transcript: malformed line");
        std::uint32_t bits = 0;
        auto [p, ec] = std::from_chars(line.data() + pos + 1, line.data() + line.size(), bits);
        if (ec != std::errc{}) throw std::runtime_error("transcript: bad parity count");
        (void)p;
        total += bits;
    }
    return total;
}

std::size_t initial_block_size(double e, double c, std::size_t key_length) {
    if (key_length == 0) throw std::invalid_argument("initial_block_size: empty key");
    if (e < 0.0 || e > 0.5) throw std::domain_error("initial_block_size: e outside [0, 0.5]");
    if (e == 0.0) return key_length; // no expected errors: one block
    const auto k1 = static_cast<std::size_t>(std::max<long long>(2, std::llround(c / e)));
    return std::min(k1, std::max<std::size_t>(key_length, 1));
}

PassStructure PassStructure::build(std::size_t n, std::size_t block_size, std::uint64_t seed) {
    PassStructure s;
    s.n = n;
    s.block_size = std::max<std::size_t>(1, std::min(block_size, n));
    s.num_blocks = (n + s.block_size - 1) / s.block_size;
    s.perm = build_perm(n, seed);
    s.inv.resize(n);
    for (std::size_t i = 0; i < n; ++i) s.inv[s.perm[i]] = static_cast<std::uint32_t>(i);
    return s;
}

std::pair<std::size_t, std::size_t> PassStructure::block_range(std::size_t b) const {
    const std::size_t lo = b * block_size;
    return {lo, std::min(lo + block_size, n)};
}

std::size_t PassStructure::block_length(std::size_t b) const {
    auto [lo, hi] = block_range(b);
    return hi - lo;
}

bool PassStructure::key_parity(const BitVec& key, std::size_t lo, std::size_t hi) const {
    return parity_over_perm(key, perm, lo, hi);
}

SubsetStructure SubsetStructure::build(std::size_t n, std::uint64_t seed) {
    SubsetStructure s;
    Rng rng(seed);
    s.mask = rng.random_bits(n);
    return s;
}

void SubsetStructure::materialize() {
    if (!indices.empty() || mask.count_ones() == 0) return;
    indices.reserve(mask.count_ones());
    for (std::size_t i = 0; i < mask.size(); ++i)
        if (mask.get(i)) indices.push_back(static_cast<std::uint32_t>(i));
}

bool SubsetStructure::key_parity_interval(const BitVec& key, std::size_t lo, std::size_t hi) {
    materialize();
    return parity_over_perm(key, indices, lo, hi);
}

Responder::Responder(BitVec key, const CascadeConfig& config)
    : key_(std::move(key)), config_(config) {}

void Responder::on_shuffle_seed(std::uint32_t pass, std::uint64_t seed) {
    if (pass != static_cast<std::uint32_t>(perms_.size() + 1))
        throw std::runtime_error("cascade responder: shuffle seed for pass out of order");
    perms_.push_back(build_perm(key_.size(), seed));
}

void Responder::on_subset_seed(std::uint32_t round, std::uint64_t seed) {
    subset_round_ = round;
    subset_ = SubsetStructure::build(key_.size(), seed);
}

BitVec Responder::on_parities(std::uint8_t context, std::uint32_t structure,
                              const std::vector<Interval>& intervals) {
    BitVec out(intervals.size());
    if (context == kContextPass) {
        if (structure < 1 || structure > perms_.size())
            throw std::runtime_error("cascade responder: parity query for unknown pass");
        const auto& perm = perms_[structure - 1];
        for (std::size_t i = 0; i < intervals.size(); ++i) {
            if (intervals[i].hi > perm.size() || intervals[i].lo > intervals[i].hi)
                throw std::runtime_error("cascade responder: parity interval out of range");
            out.set(i, parity_over_perm(key_, perm, intervals[i].lo, intervals[i].hi));
        }
    } else if (context == kContextSubset) {
        if (structure != subset_round_)
            throw std::runtime_error("cascade responder: parity query for stale subset");
        const std::size_t subset_size = subset_.mask.count_ones();
        for (std::size_t i = 0; i < intervals.size(); ++i) {
            if (intervals[i].hi > subset_size || intervals[i].lo > intervals[i].hi)
                throw std::runtime_error("cascade responder: subset interval out of range");
            if (intervals[i].lo == 0 && intervals[i].hi == subset_size)
                out.set(i, key_.parity_masked(subset_.mask));
            else
                out.set(i, subset_.key_parity_interval(key_, intervals[i].lo, intervals[i].hi));
        }
    } else {
        throw std::runtime_error("cascade responder: unknown parity context");
    }
    parities_sent_ += intervals.size();
    return out;
}

void Responder::on_correction(std::uint32_t, std::uint32_t, std::uint64_t) {
    ++corrections_seen_;
}

void LocalLink::shuffle_seed(std::uint32_t pass, std::uint64_t seed) {
    transcript_.push_back({'B', pass, pass, 0, 0});
    responder_.on_shuffle_seed(pass, seed);
}

void LocalLink::subset_seed(std::uint32_t round, std::uint64_t seed) {
    transcript_.push_back({'B', 0, 0, round, 0});
    responder_.on_subset_seed(round, seed);
}

BitVec LocalLink::parities(std::uint8_t context, std::uint32_t structure,
                           std::uint32_t during_pass, std::uint64_t block_id,
                           const std::vector<Interval>& intervals) {
    const std::uint32_t seq = context == kContextPass ? structure : 0;
    transcript_.push_back({'B', during_pass, seq, block_id, 0});
    BitVec out = responder_.on_parities(context, structure, intervals);
    transcript_.push_back({'A', during_pass, seq, block_id,
                           static_cast<std::uint32_t>(intervals.size())});
    return out;
}

void LocalLink::correction(std::uint32_t during_pass, std::uint32_t structure,
                           std::uint64_t orig_index) {
    transcript_.push_back({'B', during_pass, structure, orig_index, 0});
    responder_.on_correction(during_pass, structure, orig_index);
}

namespace {

// Corrector-side state for one reconciliation run.
class Corrector {
public:
    Corrector(BitVec& key, const CascadeConfig& cfg, double working_qber, CascadeLink& link)
        : key_(key), cfg_(cfg), e_(working_qber), link_(link) {
        if (key_.size() == 0) throw std::invalid_argument("cascade: empty key");
        if (cfg_.num_passes < 1) throw std::invalid_argument("cascade: num_passes must be >= 1");
        if (cfg_.biconf_rounds < 1) throw std::invalid_argument("cascade: confirmation rounds must be >= 1");
        n_ = key_.size();
        stats_.key_length = n_;
        const std::size_t rows = static_cast<std::size_t>(cfg_.num_passes) + 1;
        stats_.errors_per_pass_per_sequence.assign(rows, std::vector<std::uint64_t>(rows, 0));
    }

    CascadeStats run() {
        std::size_t block_size = initial_block_size(e_, cfg_.block_constant, n_);
        for (int p = 1; p <= cfg_.num_passes; ++p) {
            run_pass(static_cast<std::uint32_t>(p), block_size);
            block_size = std::min(n_, block_size * 2);
        }
        run_confirmation();
        stats_.qber_measured = static_cast<double>(stats_.total_corrected()) / static_cast<double>(n_);
        const double shannon = stats_.qber_measured > 0.0
            ? static_cast<double>(n_) * keyrate::binary_entropy(stats_.qber_measured) : 0.0;
        stats_.efficiency_f = shannon > 0.0
            ? static_cast<double>(stats_.total_revealed()) / shannon : 0.0;
        return std::move(stats_);
    }

private:
    struct PassState {
        PassStructure s;
        std::vector<std::uint8_t> odd;
    };

    void run_pass(std::uint32_t p, std::size_t block_size) {
        const std::uint64_t seed = derive_seed(cfg_.shuffle_seed, "pass", p);
        link_.shuffle_seed(p, seed);
        PassState ps;
        ps.s = PassStructure::build(n_, block_size, seed);
        ps.odd.assign(ps.s.num_blocks, 0);
        passes_.push_back(std::move(ps));
        auto& cur = passes_.back();
        stats_.block_sizes_per_pass.push_back(cur.s.block_size);

        // Announce one parity per block; once the relative whole-key parity
        // is known (after the first batch) the last block is inferred.
        const std::size_t nb = cur.s.num_blocks;
        std::size_t ask = total_parity_known_ && nb >= 1 ? nb - 1 : nb;
        std::vector<Interval> intervals;
        intervals.reserve(ask);
        for (std::size_t b = 0; b < ask; ++b) {
            auto [lo, hi] = cur.s.block_range(b);
            intervals.push_back({static_cast<std::uint32_t>(lo), static_cast<std::uint32_t>(hi)});
        }
        int batch_xor = 0;
        if (ask > 0) {
            BitVec resp = link_.parities(kContextPass, p, p, 0, intervals);
            stats_.bits_revealed_binary += ask;
            for (std::size_t b = 0; b < ask; ++b) {
                const bool mine = cur.s.key_parity(key_, intervals[b].lo, intervals[b].hi);
                if (mine != resp.get(b)) {
                    mark_odd(p, b);
                    batch_xor ^= 1;
                }
            }
        }
        if (ask < nb) {
            if ((relative_total_ ^ batch_xor) & 1) mark_odd(p, nb - 1);
        } else {
            relative_total_ = batch_xor;
            total_parity_known_ = true;
        }
        drain(p);
    }

    void run_confirmation() {
        int consecutive = 0;
        std::uint32_t round = 0;
        while (consecutive < cfg_.biconf_rounds) {
            ++round;
            const std::uint64_t seed = derive_seed(cfg_.shuffle_seed, "confirm", round);
            link_.subset_seed(round, seed);
            SubsetStructure sub = SubsetStructure::build(n_, seed);
            const std::uint32_t subset_size = static_cast<std::uint32_t>(sub.mask.count_ones());
            const bool mine = key_.parity_masked(sub.mask);
            BitVec resp = link_.parities(kContextSubset, round, 0, round, {{0, subset_size}});
            stats_.bits_revealed_biconf += 1;
            if (resp.get(0) == mine) {
                ++consecutive;
                continue;
            }
            // Odd number of differences inside the subset: locate one.
            sub.materialize();
            std::size_t lo = 0, hi = sub.indices.size();
            while (hi - lo > 1) {
                const std::size_t mid = lo + (hi - lo + 1) / 2;
                BitVec r = link_.parities(kContextSubset, round, 0, round,
                                          {{static_cast<std::uint32_t>(lo),
                                            static_cast<std::uint32_t>(mid)}});
                stats_.bits_revealed_biconf += 1;
                const bool m = sub.key_parity_interval(key_, lo, mid);
                if (r.get(0) != m) hi = mid; else lo = mid;
            }
            apply_flip(sub.indices[lo], 0, 0, true);
            drain(0);
            consecutive = 0;
        }
    }

    void mark_odd(std::uint32_t pass, std::size_t block) {
        auto& ps = passes_[pass - 1];
        const auto entry = std::make_tuple(ps.s.block_length(block), pass, block);
        if (ps.odd[block]) {
            odd_set_.erase(entry);
            ps.odd[block] = 0;
        } else {
            odd_set_.insert(entry);
            ps.odd[block] = 1;
        }
    }

    void apply_flip(std::size_t orig, std::uint32_t during, std::uint32_t located_via,
                    bool subset_find) {
        key_.flip(orig);
        relative_total_ ^= 1;
        for (std::uint32_t p = 1; p <= passes_.size(); ++p)
            mark_odd(p, passes_[p - 1].s.block_of_original(orig));
        link_.correction(during, located_via, orig);
        const std::size_t last = static_cast<std::size_t>(cfg_.num_passes);
        const std::size_t row = during == 0 ? last : during - 1;
        const std::size_t col = subset_find ? last : located_via - 1;
        stats_.errors_per_pass_per_sequence[row][col] += 1;
        if (subset_find) ++stats_.errors_corrected_biconf;
        else ++stats_.errors_corrected_binary;
    }

    // Corrects odd blocks smallest first, cascading through all shuffle
    // structures built so far.
    void drain(std::uint32_t during) {
        while (!odd_set_.empty()) {
            const auto [len, j, b] = *odd_set_.begin();
            (void)len;
            const std::size_t orig = bisect_block(j, b, during);
            apply_flip(orig, during, j, false);
        }
    }

    std::size_t bisect_block(std::uint32_t j, std::size_t b, std::uint32_t during) {
        auto& ps = passes_[j - 1];
        auto [lo, hi] = ps.s.block_range(b);
        while (hi - lo > 1) {
            const std::size_t mid = lo + (hi - lo + 1) / 2;
            BitVec resp = link_.parities(kContextPass, j, during, b,
                                         {{static_cast<std::uint32_t>(lo),
                                           static_cast<std::uint32_t>(mid)}});
            stats_.bits_revealed_binary += 1;
            const bool mine = ps.s.key_parity(key_, lo, mid);
            if (resp.get(0) != mine) hi = mid; else lo = mid;
        }
        return ps.s.perm[lo];
    }

    BitVec& key_;
    CascadeConfig cfg_;
    double e_;
    CascadeLink& link_;
    std::size_t n_ = 0;
    CascadeStats stats_;
    std::vector<PassState> passes_;
    std::set<std::tuple<std::size_t, std::uint32_t, std::size_t>> odd_set_;
    bool total_parity_known_ = false;
    int relative_total_ = 0;
};

} // namespace

CascadeStats correct_key(BitVec& key, const CascadeConfig& config, double working_qber,
                         CascadeLink& link) {
    Corrector corrector(key, config, working_qber, link);
    return corrector.run();
}

RunResult run_cascade(const BitVec& key_a, const BitVec& key_b,
                      const CascadeConfig& config, double working_qber) {
    if (key_a.size() != key_b.size())
        throw std::invalid_argument("run_cascade: key length mismatch");
    LocalLink link(key_a, config);
    RunResult res;
    res.corrected = key_b;
    res.stats = correct_key(res.corrected, config, working_qber, link);
    res.transcript = link.transcript();
    return res;
}

CascadeStats aggregate_stats(const std::vector<CascadeStats>& runs) {
    CascadeStats agg;
    if (runs.empty()) return agg;
    const std::size_t rows = runs.front().errors_per_pass_per_sequence.size();
    agg.errors_per_pass_per_sequence.assign(rows, std::vector<std::uint64_t>(rows, 0));
    std::vector<double> size_sums;
    for (const auto& st : runs) {
        agg.bits_revealed_binary += st.bits_revealed_binary;
        agg.bits_revealed_biconf += st.bits_revealed_biconf;
        agg.errors_corrected_binary += st.errors_corrected_binary;
        agg.errors_corrected_biconf += st.errors_corrected_biconf;
        agg.key_length += st.key_length;
        for (std::size_t r = 0; r < rows && r < st.errors_per_pass_per_sequence.size(); ++r)
            for (std::size_t c = 0; c < rows && c < st.errors_per_pass_per_sequence[r].size(); ++c)
                agg.errors_per_pass_per_sequence[r][c] += st.errors_per_pass_per_sequence[r][c];
        if (size_sums.size() < st.block_sizes_per_pass.size())
            size_sums.resize(st.block_sizes_per_pass.size(), 0.0);
        for (std::size_t p = 0; p < st.block_sizes_per_pass.size(); ++p)
            size_sums[p] += static_cast<double>(st.block_sizes_per_pass[p]);
    }
    agg.block_sizes_per_pass.reserve(size_sums.size());
    for (double s : size_sums)
        agg.block_sizes_per_pass.push_back(
            static_cast<std::size_t>(std::llround(s / static_cast<double>(runs.size()))));
    if (agg.key_length > 0) {
        agg.qber_measured = static_cast<double>(agg.total_corrected())
                          / static_cast<double>(agg.key_length);
        const double shannon = agg.qber_measured > 0.0
            ? static_cast<double>(agg.key_length) * keyrate::binary_entropy(agg.qber_measured)
            : 0.0;
        agg.efficiency_f = shannon > 0.0
            ? static_cast<double>(agg.total_revealed()) / shannon : 0.0;
    }
    return agg;
}

BinaryResult binary_correct(const BitVec& block_a, BitVec& block_b) {
    if (block_a.size() != block_b.size() || block_a.empty())
        throw std::invalid_argument("binary_correct: blocks must be nonempty and equal length");
    if (block_a.parity_all() == block_b.parity_all())
        throw std::invalid_argument("binary_correct: blocks have matching parity");
    BinaryResult res{0, 1}; // the whole-block parity announcement
    std::size_t lo = 0, hi = block_a.size();
    while (hi - lo > 1) {
        const std::size_t mid = lo + (hi - lo + 1) / 2;
        res.bits_revealed += 1;
        if (block_a.parity_range(lo, mid) != block_b.parity_range(lo, mid)) hi = mid;
        else lo = mid;
    }
    res.error_position = lo;
    block_b.flip(lo);
    return res;
}

BiconfResult biconf(const BitVec& key_a, BitVec& key_b, int s, std::uint64_t seed) {
    if (key_a.size() != key_b.size())
        throw std::invalid_argument("biconf: key length mismatch");
    if (s < 1) throw std::invalid_argument("biconf: s must be >= 1");
    BiconfResult res;
    int consecutive = 0;
    std::uint32_t round = 0;
    while (consecutive < s) {
        ++round;
        SubsetStructure sub = SubsetStructure::build(key_a.size(), derive_seed(seed, "confirm", round));
        res.rounds_used = round;
        res.bits_revealed += 1;
        if (key_a.parity_masked(sub.mask) == key_b.parity_masked(sub.mask)) {
            ++consecutive;
            continue;
        }
        sub.materialize();
        std::size_t lo = 0, hi = sub.indices.size();
        while (hi - lo > 1) {
            const std::size_t mid = lo + (hi - lo + 1) / 2;
            res.bits_revealed += 1;
            if (sub.key_parity_interval(key_a, lo, mid) != sub.key_parity_interval(key_b, lo, mid))
                hi = mid;
            else
                lo = mid;
        }
        key_b.flip(sub.indices[lo]);
        ++res.corrections;
        if (res.first_correction_round == 0) res.first_correction_round = round;
        consecutive = 0;
    }
    return res;
}

} // namespace qkd::cascade
