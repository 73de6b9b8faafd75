#include "qkd/report.hpp"

#include <fstream>
#include <stdexcept>

namespace qkd::report {

using nlohmann::json;

json to_json(const session::SessionReport& r) {
    return json{
        {"session_id", r.session_id},
        {"seed", r.seed},
        {"qber_x", r.qber_x},
        {"qber_z", r.qber_z},
        {"raw_len", r.raw_len},
        {"sifted_len", r.sifted_len},
        {"final_len", r.final_len},
        {"n_xx", r.n_xx},
        {"n_zz", r.n_zz},
        {"secure_per_raw", r.secure_per_raw},
        {"eps_x", r.eps_x},
        {"eps_z", r.eps_z},
        {"leak_x", r.leak_x},
        {"leak_z", r.leak_z},
        {"f_x", r.f_x},
        {"f_z", r.f_z},
        {"efficiency_ratio_vs_baseline", r.efficiency_ratio_vs_baseline},
        {"errors_x", r.errors_x},
        {"errors_z", r.errors_z},
        {"mismatched", r.mismatched},
        {"dropped", r.dropped},
    };
}

session::SessionReport report_from_json(const json& j) {
    session::SessionReport r;
    r.session_id = j.at("session_id").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.qber_x = j.at("qber_x").get<double>();
    r.qber_z = j.at("qber_z").get<double>();
    r.raw_len = j.at("raw_len").get<std::uint64_t>();
    r.sifted_len = j.at("sifted_len").get<std::uint64_t>();
    r.final_len = j.at("final_len").get<std::uint64_t>();
    r.n_xx = j.at("n_xx").get<std::uint64_t>();
    r.n_zz = j.at("n_zz").get<std::uint64_t>();
    r.secure_per_raw = j.at("secure_per_raw").get<double>();
    r.eps_x = j.at("eps_x").get<double>();
    r.eps_z = j.at("eps_z").get<double>();
    r.leak_x = j.at("leak_x").get<std::uint64_t>();
    r.leak_z = j.at("leak_z").get<std::uint64_t>();
    r.f_x = j.at("f_x").get<double>();
    r.f_z = j.at("f_z").get<double>();
    r.efficiency_ratio_vs_baseline = j.at("efficiency_ratio_vs_baseline").get<double>();
    r.errors_x = j.at("errors_x").get<std::uint64_t>();
    r.errors_z = j.at("errors_z").get<std::uint64_t>();
    r.mismatched = j.at("mismatched").get<std::uint64_t>();
    r.dropped = j.at("dropped").get<std::uint64_t>();
    return r;
}

void write_key_file(const std::string& path, const BitVec& key,
                    const std::string& session_id, std::uint64_t seed,
                    const std::string& config_digest) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open key file for writing: " + path);
    out << "QKD-KEY 1\n"
        << "session_id " << session_id << '\n'
        << "seed " << seed << '\n'
        << "config_digest " << config_digest << '\n'
        << "bits " << key.size() << "\n\n";
    const auto bytes = key.to_bytes_msb();
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("short write to key file: " + path);
}

BitVec read_key_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open key file: " + path);
    std::string line;
    if (!std::getline(in, line) || line != "QKD-KEY 1")
        throw std::runtime_error("not a key file: " + path);
    std::size_t nbits = 0;
    bool have_bits = false;
    while (std::getline(in, line)) {
        if (line.empty()) break;
        if (line.rfind("bits ", 0) == 0) {
            nbits = std::stoull(line.substr(5));
            have_bits = true;
        }
    }
    if (!have_bits) throw std::runtime_error("key file missing bit count: " + path);
    std::vector<std::uint8_t> bytes((nbits + 7) / 8);
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (static_cast<std::size_t>(in.gcount()) != bytes.size())
        throw std::runtime_error("key file truncated: " + path);
    return BitVec::from_bytes_msb(bytes, nbits);
}

} // namespace qkd::report
