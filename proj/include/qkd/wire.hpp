#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "qkd/bitvec.hpp"
#include "qkd/cascade.hpp"

namespace qkd::wire {

/// Framed classical-channel messages. Frame layout on byte streams:
/// 4-byte big-endian payload length, 1-byte message type, payload.
/// All multi-byte integers inside payloads are big-endian.
enum MsgType : std::uint8_t {
    kBasisAnnounce = 0x01,
    kSiftAck = 0x02,
    kShuffleSeed = 0x10,
    kParityBatch = 0x11,
    kCorrectionNotice = 0x12,
    kVerifyTag = 0x20,
    kHashSeed = 0x30,
    kFinalKeyDigest = 0x31,
    kAbort = 0x7F,
};

struct Message {
    std::uint8_t type = 0;
    std::vector<std::uint8_t> payload;
};

class ProtocolError : public std::runtime_error {
public:
    explicit ProtocolError(const std::string& what) : std::runtime_error(what) {}
};

// Big-endian primitives.
void put_u8(std::vector<std::uint8_t>& out, std::uint8_t v);
void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v);
void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v);
std::uint8_t get_u8(std::span<const std::uint8_t> in, std::size_t& off);
std::uint32_t get_u32(std::span<const std::uint8_t> in, std::size_t& off);
std::uint64_t get_u64(std::span<const std::uint8_t> in, std::size_t& off);
void put_bits(std::vector<std::uint8_t>& out, const BitVec& bits);
BitVec get_bits(std::span<const std::uint8_t> in, std::size_t& off, std::size_t nbits);

std::vector<std::uint8_t> encode_frame(const Message& m);

/// Per-round basis codes packed two bits each, first round in the two most
/// significant bits of the first byte.
enum BasisCode : std::uint8_t {
    kCodeZ = 0,
    kCodeX = 1,
    kCodeUndetected = 2,
    kCodeDoubleClick = 3,
};

struct BasisAnnounce {
    std::uint64_t first_round = 0;
    std::vector<std::uint8_t> codes; ///< one BasisCode per round

    Message encode() const;
    static BasisAnnounce decode(const Message& m);
};

struct SiftAck {
    std::uint64_t first_round = 0;
    BitVec keep; ///< one bit per round of the block

    Message encode() const;
    static SiftAck decode(const Message& m);
};

struct ShuffleSeed {
    std::uint8_t basis = 0; ///< 0 = Z, 1 = X
    std::uint32_t chunk = 0;
    std::uint8_t context = 0; ///< cascade::kContextPass or kContextSubset
    std::uint32_t structure = 0;
    std::uint64_t seed = 0;

    Message encode() const;
    static ShuffleSeed decode(const Message& m);
};

struct ParityBatch {
    std::uint8_t kind = 0; ///< 0 = request, 1 = response
    std::uint8_t basis = 0;
    std::uint32_t chunk = 0;
    std::uint8_t context = 0;
    std::uint32_t structure = 0;
    std::uint32_t during_pass = 0;
    std::uint64_t block_id = 0;
    std::vector<cascade::Interval> intervals; ///< request only
    BitVec parities;                          ///< response only

    Message encode() const;
    static ParityBatch decode(const Message& m);
};

struct CorrectionNotice {
    std::uint8_t basis = 0;
    std::uint32_t chunk = 0;
    std::uint32_t during_pass = 0;
    std::uint32_t structure = 0;
    std::uint64_t orig_index = 0;

    Message encode() const;
    static CorrectionNotice decode(const Message& m);
};

struct VerifyTag {
    std::uint8_t basis = 0;
    std::uint64_t tag_seed = 0;
    BitVec tag;

    Message encode() const;
    static VerifyTag decode(const Message& m);
};

struct HashSeed {
    std::uint64_t final_len = 0;
    BitVec seed_bits;

    Message encode() const;
    static HashSeed decode(const Message& m);
};

struct FinalKeyDigest {
    std::uint64_t tag_seed = 0;
    BitVec tag;

    Message encode() const;
    static FinalKeyDigest decode(const Message& m);
};

struct Abort {
    std::uint8_t code = 0; ///< 3 = protocol, 4 = verification
    std::string reason;

    Message encode() const;
    static Abort decode(const Message& m);
};

/// Ordered reliable message channel between the two parties.
class Transport {
public:
    virtual ~Transport() = default;
    virtual void send(const Message& m) = 0;
    virtual Message recv() = 0;
};

} // namespace qkd::wire
