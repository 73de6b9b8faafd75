#include "qkd/wire.hpp"

namespace qkd::wire {

namespace {

void need(std::span<const std::uint8_t> in, std::size_t off, std::size_t n) {
    if (off + n > in.size()) throw ProtocolError("message payload truncated");
}

void expect_consumed(std::span<const std::uint8_t> in, std::size_t off) {
    if (off != in.size()) throw ProtocolError("message payload has trailing bytes");
}

void expect_type(const Message& m, std::uint8_t t) {
    if (m.type != t) throw ProtocolError("unexpected message type");
}

} // namespace

void put_u8(std::vector<std::uint8_t>& out, std::uint8_t v) { out.push_back(v); }

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 24));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
    put_u32(out, static_cast<std::uint32_t>(v >> 32));
    put_u32(out, static_cast<std::uint32_t>(v));
}

std::uint8_t get_u8(std::span<const std::uint8_t> in, std::size_t& off) {
    need(in, off, 1);
    return in[off++];
}

std::uint32_t get_u32(std::span<const std::uint8_t> in, std::size_t& off) {
    need(in, off, 4);
    std::uint32_t v = (std::uint32_t(in[off]) << 24) | (std::uint32_t(in[off + 1]) << 16) |
                      (std::uint32_t(in[off + 2]) << 8) | std::uint32_t(in[off + 3]);
    off += 4;
    return v;
}

std::uint64_t get_u64(std::span<const std::uint8_t> in, std::size_t& off) {
    const std::uint64_t hi = get_u32(in, off);
    return (hi << 32) | get_u32(in, off);
}

void put_bits(std::vector<std::uint8_t>& out, const BitVec& bits) {
    const auto bytes = bits.to_bytes_msb();
    out.insert(out.end(), bytes.begin(), bytes.end());
}

BitVec get_bits(std::span<const std::uint8_t> in, std::size_t& off, std::size_t nbits) {
    const std::size_t nbytes = (nbits + 7) / 8;
    need(in, off, nbytes);
    BitVec v = BitVec::from_bytes_msb(in.subspan(off, nbytes), nbits);
    off += nbytes;
    return v;
}

std::vector<std::uint8_t> encode_frame(const Message& m) {
    std::vector<std::uint8_t> out;
    out.reserve(5 + m.payload.size());
    put_u32(out, static_cast<std::uint32_t>(m.payload.size()));
    out.push_back(m.type);
    out.insert(out.end(), m.payload.begin(), m.payload.end());
    return out;
}

Message BasisAnnounce::encode() const {
    Message m;
    m.type = kBasisAnnounce;
    put_u64(m.payload, first_round);
    put_u32(m.payload, static_cast<std::uint32_t>(codes.size()));
    m.payload.reserve(m.payload.size() + (codes.size() + 3) / 4);
    std::uint8_t packed = 0;
    for (std::size_t i = 0; i < codes.size(); ++i) {
        packed |= static_cast<std::uint8_t>((codes[i] & 3) << (6 - 2 * (i % 4)));
        if (i % 4 == 3 || i + 1 == codes.size()) {
            m.payload.push_back(packed);
            packed = 0;
        }
    }
    return m;
}

BasisAnnounce BasisAnnounce::decode(const Message& m) {
    expect_type(m, kBasisAnnounce);
    std::size_t off = 0;
    BasisAnnounce a;
    a.first_round = get_u64(m.payload, off);
    const std::uint32_t count = get_u32(m.payload, off);
    need(m.payload, off, (count + 3) / 4);
    a.codes.resize(count);
    for (std::uint32_t i = 0; i < count; ++i)
        a.codes[i] = (m.payload[off + i / 4] >> (6 - 2 * (i % 4))) & 3;
    off += (count + 3) / 4;
    expect_consumed(m.payload, off);
    return a;
}

Message SiftAck::encode() const {
    Message m;
    m.type = kSiftAck;
    put_u64(m.payload, first_round);
    put_u32(m.payload, static_cast<std::uint32_t>(keep.size()));
    put_bits(m.payload, keep);
    return m;
}

SiftAck SiftAck::decode(const Message& m) {
    expect_type(m, kSiftAck);
    std::size_t off = 0;
    SiftAck a;
    a.first_round = get_u64(m.payload, off);
    const std::uint32_t count = get_u32(m.payload, off);
    a.keep = get_bits(m.payload, off, count);
    expect_consumed(m.payload, off);
    return a;
}

Message ShuffleSeed::encode() const {
    Message m;
    m.type = kShuffleSeed;
    put_u8(m.payload, basis);
    put_u32(m.payload, chunk);
    put_u8(m.payload, context);
    put_u32(m.payload, structure);
    put_u64(m.payload, seed);
    return m;
}

ShuffleSeed ShuffleSeed::decode(const Message& m) {
    expect_type(m, kShuffleSeed);
    std::size_t off = 0;
    ShuffleSeed s;
    s.basis = get_u8(m.payload, off);
    s.chunk = get_u32(m.payload, off);
    s.context = get_u8(m.payload, off);
    s.structure = get_u32(m.payload, off);
    s.seed = get_u64(m.payload, off);
    expect_consumed(m.payload, off);
    return s;
}

Message ParityBatch::encode() const {
    Message m;
    m.type = kParityBatch;
    put_u8(m.payload, kind);
    put_u8(m.payload, basis);
    put_u32(m.payload, chunk);
    put_u8(m.payload, context);
    put_u32(m.payload, structure);
    put_u32(m.payload, during_pass);
    put_u64(m.payload, block_id);
    if (kind == 0) {
        put_u32(m.payload, static_cast<std::uint32_t>(intervals.size()));
        for (const auto& iv : intervals) {
            put_u32(m.payload, iv.lo);
            put_u32(m.payload, iv.hi);
        }
    } else {
        put_u32(m.payload, static_cast<std::uint32_t>(parities.size()));
        put_bits(m.payload, parities);
    }
    return m;
}

ParityBatch ParityBatch::decode(const Message& m) {
    expect_type(m, kParityBatch);
    std::size_t off = 0;
    ParityBatch p;
    p.kind = get_u8(m.payload, off);
    p.basis = get_u8(m.payload, off);
    p.chunk = get_u32(m.payload, off);
    p.context = get_u8(m.payload, off);
    p.structure = get_u32(m.payload, off);
    p.during_pass = get_u32(m.payload, off);
    p.block_id = get_u64(m.payload, off);
    const std::uint32_t count = get_u32(m.payload, off);
    if (p.kind == 0) {
        p.intervals.reserve(count);
        for (std::uint32_t i = 0; i < count; ++i) {
            cascade::Interval iv{};
            iv.lo = get_u32(m.payload, off);
            iv.hi = get_u32(m.payload, off);
            p.intervals.push_back(iv);
        }
    } else if (p.kind == 1) {
        p.parities = get_bits(m.payload, off, count);
    } else {
        throw ProtocolError("parity batch: bad kind");
    }
    expect_consumed(m.payload, off);
    return p;
}

Message CorrectionNotice::encode() const {
    Message m;
    m.type = kCorrectionNotice;
    put_u8(m.payload, basis);
    put_u32(m.payload, chunk);
    put_u32(m.payload, during_pass);
    put_u32(m.payload, structure);
    put_u64(m.payload, orig_index);
    return m;
}

CorrectionNotice CorrectionNotice::decode(const Message& m) {
    expect_type(m, kCorrectionNotice);
    std::size_t off = 0;
    CorrectionNotice c;
    c.basis = get_u8(m.payload, off);
    c.chunk = get_u32(m.payload, off);
    c.during_pass = get_u32(m.payload, off);
    c.structure = get_u32(m.payload, off);
    c.orig_index = get_u64(m.payload, off);
    expect_consumed(m.payload, off);
    return c;
}

Message VerifyTag::encode() const {
    Message m;
    m.type = kVerifyTag;
    put_u8(m.payload, basis);
    put_u64(m.payload, tag_seed);
    put_u32(m.payload, static_cast<std::uint32_t>(tag.size()));
    put_bits(m.payload, tag);
    return m;
}

VerifyTag VerifyTag::decode(const Message& m) {
    expect_type(m, kVerifyTag);
    std::size_t off = 0;
    VerifyTag v;
    v.basis = get_u8(m.payload, off);
    v.tag_seed = get_u64(m.payload, off);
    const std::uint32_t len = get_u32(m.payload, off);
    v.tag = get_bits(m.payload, off, len);
    expect_consumed(m.payload, off);
    return v;
}

Message HashSeed::encode() const {
    Message m;
    m.type = kHashSeed;
    put_u64(m.payload, final_len);
    put_u64(m.payload, seed_bits.size());
    put_bits(m.payload, seed_bits);
    return m;
}

HashSeed HashSeed::decode(const Message& m) {
    expect_type(m, kHashSeed);
    std::size_t off = 0;
    HashSeed h;
    h.final_len = get_u64(m.payload, off);
    const std::uint64_t nbits = get_u64(m.payload, off);
    h.seed_bits = get_bits(m.payload, off, nbits);
    expect_consumed(m.payload, off);
    return h;
}

Message FinalKeyDigest::encode() const {
    Message m;
    m.type = kFinalKeyDigest;
    put_u64(m.payload, tag_seed);
    put_u32(m.payload, static_cast<std::uint32_t>(tag.size()));
    put_bits(m.payload, tag);
    return m;
}

FinalKeyDigest FinalKeyDigest::decode(const Message& m) {
    expect_type(m, kFinalKeyDigest);
    std::size_t off = 0;
    FinalKeyDigest d;
    d.tag_seed = get_u64(m.payload, off);
    const std::uint32_t len = get_u32(m.payload, off);
    d.tag = get_bits(m.payload, off, len);
    expect_consumed(m.payload, off);
    return d;
}

Message Abort::encode() const {
    Message m;
    m.type = kAbort;
    put_u8(m.payload, code);
    put_u32(m.payload, static_cast<std::uint32_t>(reason.size()));
    m.payload.insert(m.payload.end(), reason.begin(), reason.end());
    return m;
}

Abort Abort::decode(const Message& m) {
    expect_type(m, kAbort);
    std::size_t off = 0;
    Abort a;
    a.code = get_u8(m.payload, off);
    const std::uint32_t len = get_u32(m.payload, off);
    need(m.payload, off, len);
    a.reason.assign(m.payload.begin() + static_cast<std::ptrdiff_t>(off),
                    m.payload.begin() + static_cast<std::ptrdiff_t>(off + len));
    off += len;
    expect_consumed(m.payload, off);
    return a;
}

} // namespace qkd::wire
