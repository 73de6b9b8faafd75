#pragma once

#include <string>

#include <json.hpp>

#include "qkd/bitvec.hpp"
#include "qkd/session.hpp"

namespace qkd::report {

nlohmann::json to_json(const session::SessionReport& r);
session::SessionReport report_from_json(const nlohmann::json& j);

/// Final key file: text header (format tag, session id, seed, config
/// digest, bit count), a blank line, then the key packed
/// most-significant-bit-first.
void write_key_file(const std::string& path, const BitVec& key,
                    const std::string& session_id, std::uint64_t seed,
                    const std::string& config_digest);
BitVec read_key_file(const std::string& path);

} // namespace qkd::report
