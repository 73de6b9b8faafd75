#include "qkd/session.hpp"

#include <algorithm>
#include <cstdio>
#include <exception>
#include <memory>
#include <thread>
#include <utility>

#include "qkd/keyrate.hpp"
#include "qkd/privacy.hpp"

namespace qkd::session {

namespace {

constexpr std::uint8_t kBasisZ = 0;
constexpr std::uint8_t kBasisX = 1;

constexpr int kAbortProtocol = 3;
constexpr int kAbortVerification = 4;

std::string hex_id(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

[[noreturn]] void abort_session(wire::Transport& t, int code, const std::string& reason) {
    try {
        t.send(wire::Abort{static_cast<std::uint8_t>(code), reason}.encode());
    } catch (...) {
        // peer already gone; the local throw below still reports the cause
    }
    throw SessionAborted(code, reason);
}

wire::Message recv_checked(wire::Transport& t) {
    wire::Message m = t.recv();
    if (m.type == wire::kAbort) {
        const auto a = wire::Abort::decode(m);
        throw SessionAborted(a.code, "peer aborted: " + a.reason);
    }
    return m;
}

std::uint8_t own_code(const sim::RoundOutcome& r, Role role) {
    const bool detected = role == Role::Alice ? r.alice_detected : r.bob_detected;
    if (!detected) return wire::kCodeUndetected;
    if (r.double_click) return wire::kCodeDoubleClick;
    const sim::Basis b = role == Role::Alice ? r.alice_basis : r.bob_basis;
    return b == sim::Basis::Z ? wire::kCodeZ : wire::kCodeX;
}

BitVec compute_keep(const std::vector<std::uint8_t>& a_codes,
                    const std::vector<std::uint8_t>& b_codes) {
    BitVec keep(a_codes.size());
    for (std::size_t i = 0; i < a_codes.size(); ++i)
        keep.set(i, a_codes[i] <= 1 && b_codes[i] <= 1 && a_codes[i] == b_codes[i]);
    return keep;
}

const char* shuffle_label(std::uint8_t basis) {
    return basis == kBasisX ? "shuffle-x" : "shuffle-z";
}

/// Per-party sifted material plus bookkeeping counts.
struct PartyKeys {
    BitVec bits[2];                         ///< [kBasisZ], [kBasisX]
    std::vector<std::uint64_t> rounds[2];   ///< origin round per sifted bit
    std::uint64_t raw = 0;
    std::uint64_t mismatched = 0;
    std::uint64_t dropped = 0;
};

/// Distribution plus sifting: both parties walk the shared source stream,
/// exchange basis announcements per block, and keep matched rounds.
PartyKeys run_sifting(Role role, const SessionConfig& cfg, wire::Transport& t) {
    sim::SessionSimulator simulator(cfg.source, cfg.alice, cfg.bob, cfg.n_rounds,
                                    derive_seed(cfg.seed, "source"));
    PartyKeys keys;
    std::vector<std::uint8_t> my_codes, their_codes;
    std::vector<std::uint8_t> my_bits;
    for (std::uint64_t start = 0; start < cfg.n_rounds; start += cfg.announce_block) {
        const std::uint32_t count = static_cast<std::uint32_t>(
            std::min<std::uint64_t>(cfg.announce_block, cfg.n_rounds - start));
        my_codes.assign(count, 0);
        my_bits.assign(count, 0);
        for (std::uint32_t i = 0; i < count; ++i) {
            const sim::RoundOutcome r = simulator.next();
            my_codes[i] = own_code(r, role);
            my_bits[i] = role == Role::Alice ? r.alice_bit : r.bob_bit;
        }

        BitVec keep;
        if (role == Role::Alice) {
            t.send(wire::BasisAnnounce{start, my_codes}.encode());
            const auto theirs = wire::BasisAnnounce::decode(recv_checked(t));
            if (theirs.first_round != start || theirs.codes.size() != count)
                abort_session(t, kAbortProtocol, "basis announcement out of step");
            their_codes = theirs.codes;
            const auto ack = wire::SiftAck::decode(recv_checked(t));
            keep = compute_keep(my_codes, their_codes);
            if (ack.first_round != start || !(ack.keep == keep))
                abort_session(t, kAbortProtocol, "sift acknowledgement disagrees");
        } else {
            const auto theirs = wire::BasisAnnounce::decode(recv_checked(t));
            if (theirs.first_round != start || theirs.codes.size() != count)
                abort_session(t, kAbortProtocol, "basis announcement out of step");
            their_codes = theirs.codes;
            t.send(wire::BasisAnnounce{start, my_codes}.encode());
            keep = compute_keep(their_codes, my_codes);
            t.send(wire::SiftAck{start, keep}.encode());
        }

        const auto& a_codes = role == Role::Alice ? my_codes : their_codes;
        const auto& b_codes = role == Role::Alice ? their_codes : my_codes;
        for (std::uint32_t i = 0; i < count; ++i) {
            const std::uint8_t a = a_codes[i], b = b_codes[i];
            if (a == wire::kCodeUndetected || b == wire::kCodeUndetected) continue;
            ++keys.raw;
            if (a == wire::kCodeDoubleClick || b == wire::kCodeDoubleClick) {
                ++keys.dropped;
                continue;
            }
            if (a != b) {
                ++keys.mismatched;
                continue;
            }
            keys.bits[a].push_back(my_bits[i] != 0);
            keys.rounds[a].push_back(start + i);
        }
    }
    return keys;
}

/// Corrector-to-responder link over the wire protocol.
class WireLink : public cascade::CascadeLink {
public:
    WireLink(wire::Transport& t, std::uint8_t basis, std::uint32_t chunk,
             cascade::Transcript& transcript)
        : t_(t), basis_(basis), chunk_(chunk), transcript_(transcript) {}

    void shuffle_seed(std::uint32_t pass, std::uint64_t seed) override {
        transcript_.push_back({'B', pass, pass, 0, 0});
        t_.send(wire::ShuffleSeed{basis_, chunk_, cascade::kContextPass, pass, seed}.encode());
    }

    void subset_seed(std::uint32_t round, std::uint64_t seed) override {
        transcript_.push_back({'B', 0, 0, round, 0});
        t_.send(wire::ShuffleSeed{basis_, chunk_, cascade::kContextSubset, round, seed}.encode());
    }

    BitVec parities(std::uint8_t context, std::uint32_t structure, std::uint32_t during_pass,
                    std::uint64_t block_id, const std::vector<cascade::Interval>& intervals) override {
        const std::uint32_t seq = context == cascade::kContextPass ? structure : 0;
        transcript_.push_back({'B', during_pass, seq, block_id, 0});
        wire::ParityBatch req;
        req.kind = 0;
        req.basis = basis_;
        req.chunk = chunk_;
        req.context = context;
        req.structure = structure;
        req.during_pass = during_pass;
        req.block_id = block_id;
        req.intervals = intervals;
        t_.send(req.encode());
        const auto resp = wire::ParityBatch::decode(recv_checked(t_));
        if (resp.kind != 1 || resp.basis != basis_ || resp.chunk != chunk_ ||
            resp.context != context || resp.structure != structure ||
            resp.block_id != block_id || resp.parities.size() != intervals.size())
            throw SessionAborted(kAbortProtocol, "parity response does not match request");
        transcript_.push_back({'A', during_pass, seq, block_id,
                               static_cast<std::uint32_t>(intervals.size())});
        return resp.parities;
    }

    void correction(std::uint32_t during_pass, std::uint32_t structure,
                    std::uint64_t orig_index) override {
        transcript_.push_back({'B', during_pass, structure, orig_index, 0});
        t_.send(wire::CorrectionNotice{basis_, chunk_, during_pass, structure, orig_index}.encode());
    }

private:
    wire::Transport& t_;
    std::uint8_t basis_;
    std::uint32_t chunk_;
    cascade::Transcript& transcript_;
};

struct EcBasisOutcome {
    BitVec corrected;
    std::vector<cascade::CascadeStats> chunks;
    std::vector<std::uint64_t> error_positions; ///< basis-global sifted positions
};

/// Bob's side: reconciles one basis chunk by chunk, sizing each run with
/// the QBER measured on the previous chunk.
EcBasisOutcome bob_reconcile_basis(wire::Transport& t, const SessionConfig& cfg,
                                   std::uint8_t basis, const BitVec& key,
                                   cascade::Transcript& transcript) {
    EcBasisOutcome out;
    out.corrected = BitVec(key.size());
    double working_qber = basis == kBasisX ? cfg.qber_prior_x : cfg.qber_prior_z;
    const std::size_t n = key.size();
    const std::size_t wb = cfg.work_block;
    const std::size_t n_chunks = (n + wb - 1) / wb;
    for (std::size_t c = 0; c < n_chunks; ++c) {
        const std::size_t lo = c * wb, hi = std::min(n, lo + wb);
        BitVec chunk = key.slice(lo, hi);
        cascade::CascadeConfig ccfg = cfg.cascade;
        ccfg.shuffle_seed = derive_seed(cfg.seed, shuffle_label(basis), c);
        WireLink link(t, basis, static_cast<std::uint32_t>(c), transcript);
        cascade::CascadeStats stats = cascade::correct_key(chunk, ccfg, working_qber, link);
        working_qber = stats.qber_measured;
        for (std::size_t i = lo; i < hi; ++i) {
            const bool bit = chunk.get(i - lo);
            out.corrected.set(i, bit);
            if (bit != key.get(i)) out.error_positions.push_back(i);
        }
        out.chunks.push_back(std::move(stats));
    }
    return out;
}

/// Alice's side: answers reconciliation traffic reactively until every
/// nonempty basis has been verified.
struct AliceEcOutcome {
    std::uint64_t parities_sent[2] = {0, 0};
    std::vector<std::uint64_t> error_positions[2];
};

AliceEcOutcome alice_serve_reconciliation(wire::Transport& t, const SessionConfig& cfg,
                                          const PartyKeys& keys) {
    AliceEcOutcome out;
    const std::size_t wb = cfg.work_block;
    std::vector<std::unique_ptr<cascade::Responder>> responders[2];
    for (int b = 0; b < 2; ++b) {
        const std::size_t n = keys.bits[b].size();
        responders[b].resize(n ? (n + wb - 1) / wb : 0);
    }
    auto responder_for = [&](std::uint8_t basis, std::uint32_t chunk) -> cascade::Responder& {
        if (basis > 1 || chunk >= responders[basis].size())
            abort_session(t, kAbortProtocol, "reconciliation message for unknown chunk");
        auto& slot = responders[basis][chunk];
        if (!slot) {
            // chunks are reconciled strictly in order, so earlier state is done
            for (auto& old : responders[basis]) old.reset();
            const std::size_t lo = std::size_t{chunk} * wb;
            const std::size_t hi = std::min(keys.bits[basis].size(), lo + wb);
            slot = std::make_unique<cascade::Responder>(keys.bits[basis].slice(lo, hi),
                                                        cfg.cascade);
        }
        return *slot;
    };

    int pending = (keys.bits[kBasisX].size() > 0 ? 1 : 0) + (keys.bits[kBasisZ].size() > 0 ? 1 : 0);
    while (pending > 0) {
        wire::Message m = recv_checked(t);
        switch (m.type) {
        case wire::kShuffleSeed: {
            const auto ss = wire::ShuffleSeed::decode(m);
            auto& r = responder_for(ss.basis, ss.chunk);
            if (ss.context == cascade::kContextPass) r.on_shuffle_seed(ss.structure, ss.seed);
            else if (ss.context == cascade::kContextSubset) r.on_subset_seed(ss.structure, ss.seed);
            else abort_session(t, kAbortProtocol, "unknown shuffle context");
            break;
        }
        case wire::kParityBatch: {
            const auto req = wire::ParityBatch::decode(m);
            if (req.kind != 0) abort_session(t, kAbortProtocol, "unexpected parity response");
            auto& r = responder_for(req.basis, req.chunk);
            wire::ParityBatch resp = req;
            resp.kind = 1;
            resp.intervals.clear();
            try {
                resp.parities = r.on_parities(req.context, req.structure, req.intervals);
            } catch (const std::exception& e) {
                abort_session(t, kAbortProtocol, e.what());
            }
            out.parities_sent[req.basis] += req.intervals.size();
            t.send(resp.encode());
            break;
        }
        case wire::kCorrectionNotice: {
            const auto cn = wire::CorrectionNotice::decode(m);
            if (cn.basis > 1 || std::size_t{cn.chunk} * wb + cn.orig_index >= keys.bits[cn.basis].size())
                abort_session(t, kAbortProtocol, "correction notice out of range");
            out.error_positions[cn.basis].push_back(std::uint64_t{cn.chunk} * wb + cn.orig_index);
            break;
        }
        case wire::kVerifyTag: {
            const auto vt = wire::VerifyTag::decode(m);
            if (vt.basis > 1 || keys.bits[vt.basis].size() == 0)
                abort_session(t, kAbortProtocol, "verification for empty basis");
            const BitVec mine =
                privacy::verification_tag(keys.bits[vt.basis], vt.tag_seed, vt.tag.size());
            if (!(mine == vt.tag))
                abort_session(t, kAbortVerification,
                              std::string("verification failed in basis ") +
                                  (vt.basis == kBasisX ? "X" : "Z"));
            t.send(wire::VerifyTag{vt.basis, vt.tag_seed, mine}.encode());
            --pending;
            break;
        }
        default:
            abort_session(t, kAbortProtocol, "unexpected message during reconciliation");
        }
    }
    return out;
}

double eps_for(std::uint64_t n_conjugate, double e_conjugate, double p_target) {
    if (n_conjugate < 1) return 0.5; // nothing to sample: deviation unbounded
    if (e_conjugate <= 0.0) return 0.0;
    return keyrate::solve_epsilon(n_conjugate, e_conjugate, p_target);
}

} // namespace

void SessionConfig::validate() const {
    source.validate();
    alice.validate();
    bob.validate();
    if (n_rounds < 1) throw std::invalid_argument("n_rounds must be >= 1");
    if (!(p_eps > 0.0 && p_eps < 1.0)) throw std::invalid_argument("p_eps must lie in (0,1)");
    if (!(p_eps_split_x > 0.0 && p_eps_split_x < 1.0))
        throw std::invalid_argument("p_eps_split_x must lie in (0,1)");
    if (announce_block < 1) throw std::invalid_argument("announce_block must be >= 1");
    if (work_block < 2) throw std::invalid_argument("work_block must be >= 2");
    if (tag_len < 1 || tag_len > 64) throw std::invalid_argument("tag_len must lie in [1,64]");
    if (!(qber_prior_x >= 0.0 && qber_prior_x <= 0.5) ||
        !(qber_prior_z >= 0.0 && qber_prior_z <= 0.5))
        throw std::invalid_argument("qber priors must lie in [0, 0.5]");
    if (qber_window < 100) throw std::invalid_argument("qber_window must be >= 100");
    if (cascade.num_passes < 1) throw std::invalid_argument("num_passes must be >= 1");
    if (cascade.biconf_rounds < 1) throw std::invalid_argument("biconf rounds must be >= 1");
    if (!(cascade.block_constant > 0.0)) throw std::invalid_argument("block_constant must be > 0");
}

void run_party(Role role, const SessionConfig& cfg, wire::Transport& t, PartyResult& out) {
    cfg.validate();
    out = PartyResult{};
    out.report.seed = cfg.seed;
    out.report.session_id = hex_id(derive_seed(cfg.seed, "session-id"));

    // Distribution and sifting.
    PartyKeys keys = run_sifting(role, cfg, t);
    const std::uint64_t n_xx = keys.bits[kBasisX].size();
    const std::uint64_t n_zz = keys.bits[kBasisZ].size();
    out.round_index_x = keys.rounds[kBasisX];
    out.round_index_z = keys.rounds[kBasisZ];

    // Reconciliation, X first, then Z; then per-basis verification.
    BitVec corrected[2];
    std::uint64_t revealed[2] = {0, 0};
    std::vector<std::uint64_t> error_positions[2];
    if (role == Role::Bob) {
        for (std::uint8_t basis : {kBasisX, kBasisZ}) {
            corrected[basis] = keys.bits[basis];
            if (keys.bits[basis].size() == 0) continue;
            auto& transcript = basis == kBasisX ? out.transcript_x : out.transcript_z;
            EcBasisOutcome ec = bob_reconcile_basis(t, cfg, basis, keys.bits[basis], transcript);
            corrected[basis] = std::move(ec.corrected);
            error_positions[basis] = std::move(ec.error_positions);
            auto& chunks = basis == kBasisX ? out.chunks_x : out.chunks_z;
            chunks = std::move(ec.chunks);
            auto& agg = basis == kBasisX ? out.stats_x : out.stats_z;
            agg = cascade::aggregate_stats(chunks);
            revealed[basis] = agg.total_revealed();

            const std::uint64_t tag_seed = derive_seed(cfg.seed, "verify", basis);
            const BitVec tag = privacy::verification_tag(corrected[basis], tag_seed, cfg.tag_len);
            t.send(wire::VerifyTag{basis, tag_seed, tag}.encode());
            const auto reply = wire::VerifyTag::decode(recv_checked(t));
            if (reply.basis != basis || !(reply.tag == tag))
                abort_session(t, kAbortVerification, "verification reply disagrees");
        }
    } else {
        for (int b = 0; b < 2; ++b) corrected[b] = keys.bits[b];
        AliceEcOutcome ec = alice_serve_reconciliation(t, cfg, keys);
        for (int b = 0; b < 2; ++b) {
            revealed[b] = ec.parities_sent[b];
            error_positions[b] = std::move(ec.error_positions[b]);
            std::sort(error_positions[b].begin(), error_positions[b].end());
        }
    }

    // Shared post-reconciliation quantities.
    const std::uint64_t errors_x = error_positions[kBasisX].size();
    const std::uint64_t errors_z = error_positions[kBasisZ].size();
    const double e_bx = n_xx ? static_cast<double>(errors_x) / static_cast<double>(n_xx) : 0.0;
    const double e_bz = n_zz ? static_cast<double>(errors_z) / static_cast<double>(n_zz) : 0.0;
    const std::uint64_t leak_x = revealed[kBasisX] + (n_xx ? cfg.tag_len : 0);
    const std::uint64_t leak_z = revealed[kBasisZ] + (n_zz ? cfg.tag_len : 0);
    const double eps_x = eps_for(n_zz, e_bz, cfg.p_eps * cfg.p_eps_split_x);
    const double eps_z = eps_for(n_xx, e_bx, cfg.p_eps * (1.0 - cfg.p_eps_split_x));
    const std::uint64_t m =
        keyrate::secure_length(n_xx, n_zz, e_bx, e_bz, eps_x, eps_z, leak_x, leak_z);
    const std::uint64_t n_corrected = n_xx + n_zz;

    // Deferred privacy amplification, applied once over both bases.
    BitVec pa_seed;
    if (role == Role::Alice) {
        if (m > 0) {
            Rng rng(derive_seed(cfg.seed, "pa"));
            pa_seed = rng.random_bits(n_corrected + m - 1);
        }
        t.send(wire::HashSeed{m, pa_seed}.encode());
    } else {
        const auto hs = wire::HashSeed::decode(recv_checked(t));
        if (hs.final_len != m)
            abort_session(t, kAbortProtocol, "final key length disagrees");
        if (hs.seed_bits.size() != (m > 0 ? n_corrected + m - 1 : 0))
            abort_session(t, kAbortProtocol, "hash seed has wrong length");
        pa_seed = hs.seed_bits;
    }
    if (m > 0)
        out.final_key = privacy::amplify(corrected[kBasisX], corrected[kBasisZ], m, pa_seed);
    out.no_positive_rate = m == 0;

    // Final key confirmation.
    if (role == Role::Alice) {
        const std::uint64_t digest_seed = derive_seed(cfg.seed, "digest");
        const BitVec tag = privacy::verification_tag(out.final_key, digest_seed, cfg.tag_len);
        t.send(wire::FinalKeyDigest{digest_seed, tag}.encode());
        const auto reply = wire::FinalKeyDigest::decode(recv_checked(t));
        if (!(reply.tag == tag))
            abort_session(t, kAbortVerification, "final key digest disagrees");
    } else {
        const auto digest = wire::FinalKeyDigest::decode(recv_checked(t));
        const BitVec mine =
            privacy::verification_tag(out.final_key, digest.tag_seed, digest.tag.size());
        if (!(mine == digest.tag))
            abort_session(t, kAbortVerification, "final key digest disagrees");
        t.send(wire::FinalKeyDigest{digest.tag_seed, mine}.encode());
    }

    // Error rounds for the time series.
    for (std::uint64_t pos : error_positions[kBasisX])
        out.error_rounds_x.push_back(out.round_index_x[pos]);
    for (std::uint64_t pos : error_positions[kBasisZ])
        out.error_rounds_z.push_back(out.round_index_z[pos]);

    SessionReport& rep = out.report;
    rep.qber_x = e_bx;
    rep.qber_z = e_bz;
    rep.raw_len = keys.raw;
    rep.sifted_len = n_xx + n_zz;
    rep.final_len = m;
    rep.n_xx = n_xx;
    rep.n_zz = n_zz;
    rep.secure_per_raw = keys.raw ? static_cast<double>(m) / static_cast<double>(keys.raw) : 0.0;
    rep.eps_x = eps_x;
    rep.eps_z = eps_z;
    rep.leak_x = leak_x;
    rep.leak_z = leak_z;
    const double shannon_x = n_xx && e_bx > 0.0
        ? static_cast<double>(n_xx) * keyrate::binary_entropy(e_bx) : 0.0;
    const double shannon_z = n_zz && e_bz > 0.0
        ? static_cast<double>(n_zz) * keyrate::binary_entropy(e_bz) : 0.0;
    rep.f_x = shannon_x > 0.0 ? static_cast<double>(revealed[kBasisX]) / shannon_x : 0.0;
    rep.f_z = shannon_z > 0.0 ? static_cast<double>(revealed[kBasisZ]) / shannon_z : 0.0;
    rep.errors_x = errors_x;
    rep.errors_z = errors_z;
    rep.mismatched = keys.mismatched;
    rep.dropped = keys.dropped;
}

SessionPair run_session(const SessionConfig& cfg) {
    auto [ta, tb] = wire::QueueTransport::make_pair();
    SessionPair pair;
    std::exception_ptr ea, eb;
    std::thread alice_thread([&] {
        try {
            run_party(Role::Alice, cfg, *ta, pair.alice);
        } catch (...) {
            ea = std::current_exception();
            try { ta->send(wire::Abort{kAbortProtocol, "peer terminated"}.encode()); } catch (...) {}
        }
    });
    std::thread bob_thread([&] {
        try {
            run_party(Role::Bob, cfg, *tb, pair.bob);
        } catch (...) {
            eb = std::current_exception();
            try { tb->send(wire::Abort{kAbortProtocol, "peer terminated"}.encode()); } catch (...) {}
        }
    });
    alice_thread.join();
    bob_thread.join();
    if (eb) std::rethrow_exception(eb);
    if (ea) std::rethrow_exception(ea);
    return pair;
}

std::vector<QberWindow> qber_timeseries(std::span<const std::uint64_t> round_index_x,
                                        std::span<const std::uint64_t> round_index_z,
                                        std::span<const std::uint64_t> error_rounds_x,
                                        std::span<const std::uint64_t> error_rounds_z,
                                        std::uint32_t window, std::uint64_t n_rounds) {
    if (window < 100) throw std::invalid_argument("qber_timeseries: window must be >= 100");
    const std::uint64_t n_windows = (n_rounds + window - 1) / window;
    std::vector<std::uint64_t> bits_x(n_windows, 0), bits_z(n_windows, 0);
    std::vector<std::uint64_t> errs_x(n_windows, 0), errs_z(n_windows, 0);
    for (auto r : round_index_x) ++bits_x[r / window];
    for (auto r : round_index_z) ++bits_z[r / window];
    for (auto r : error_rounds_x) ++errs_x[r / window];
    for (auto r : error_rounds_z) ++errs_z[r / window];
    std::vector<QberWindow> out(n_windows);
    for (std::uint64_t w = 0; w < n_windows; ++w) {
        out[w].window_index = w;
        out[w].has_x = bits_x[w] > 0;
        out[w].has_z = bits_z[w] > 0;
        if (out[w].has_x)
            out[w].qber_x = static_cast<double>(errs_x[w]) / static_cast<double>(bits_x[w]);
        if (out[w].has_z)
            out[w].qber_z = static_cast<double>(errs_z[w]) / static_cast<double>(bits_z[w]);
    }
    return out;
}

std::vector<QberWindow> qber_timeseries(const PartyResult& r, std::uint32_t window,
                                        std::uint64_t n_rounds) {
    return qber_timeseries(r.round_index_x, r.round_index_z, r.error_rounds_x, r.error_rounds_z,
                           window, n_rounds);
}

std::vector<double> compare_reports(const std::vector<SessionReport>& reports,
                                    std::size_t baseline_index) {
    if (reports.size() < 2)
        throw std::invalid_argument("compare_reports: need at least two reports");
    if (baseline_index >= reports.size())
        throw std::invalid_argument("compare_reports: baseline index out of range");
    const double base = reports[baseline_index].secure_per_raw;
    if (base <= 0.0)
        throw std::invalid_argument("compare_reports: baseline has zero secure rate");
    std::vector<double> ratios;
    ratios.reserve(reports.size());
    for (const auto& r : reports) ratios.push_back(r.secure_per_raw / base);
    return ratios;
}

} // namespace qkd::session
