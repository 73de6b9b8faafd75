#include "qkd/config.hpp"

#include <charconv>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <vector>

namespace qkd::config {

namespace {

enum class ValueType { U64, U32, I32, Dbl, Bool, Str };

struct Entry {
    const char* section;
    const char* key;
    ValueType type;
    double lo = 0.0, hi = 0.0; ///< numeric range; lo == hi means unchecked
    std::function<void(RunConfig&, std::uint64_t, double, bool, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
};

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

template <typename T>
Entry num_entry(const char* sec, const char* key, ValueType t, double lo, double hi,
                T session::SessionConfig::* field) {
    Entry e{sec, key, t, lo, hi, nullptr, nullptr};
    e.set = [field, t](RunConfig& c, std::uint64_t u, double d, bool, const std::string&) {
        if constexpr (std::is_floating_point_v<T>) {
            c.session.*field = d;
            (void)u;
        } else {
            c.session.*field = static_cast<T>(t == ValueType::Dbl ? d : u);
        }
    };
    e.get = [field](const RunConfig& c) {
        if constexpr (std::is_floating_point_v<T>) return fmt_double(c.session.*field);
        else return std::to_string(c.session.*field);
    };
    return e;
}

const std::vector<Entry>& entries() {
    using SC = session::SessionConfig;
    static const std::vector<Entry> table = [] {
        std::vector<Entry> t;
        // [run]
        t.push_back(num_entry("run", "n_rounds", ValueType::U64, 1, 1e15, &SC::n_rounds));
        t.push_back(num_entry("run", "seed", ValueType::U64, 0, 0, &SC::seed));
        {
            Entry e{"run", "transport", ValueType::Str, 0, 0, nullptr, nullptr};
            e.set = [](RunConfig& c, std::uint64_t, double, bool, const std::string& s) {
                if (s != "inprocess" && s != "socket")
                    throw ConfigError("transport must be 'inprocess' or 'socket'");
                c.transport = s;
            };
            e.get = [](const RunConfig& c) { return c.transport; };
            t.push_back(e);
        }
        t.push_back(num_entry("run", "announce_block", ValueType::U32, 1, 1e9, &SC::announce_block));
        t.push_back(num_entry("run", "qber_window", ValueType::U32, 100, 1e9, &SC::qber_window));

        // [source]
        Entry e;
        auto src = [&](const char* key, double sim::SourceModel::* f, double lo, double hi) {
            Entry v{"source", key, ValueType::Dbl, lo, hi, nullptr, nullptr};
            v.set = [f](RunConfig& c, std::uint64_t, double d, bool, const std::string&) {
                c.session.source.*f = d;
            };
            v.get = [f](const RunConfig& c) { return fmt_double(c.session.source.*f); };
            return v;
        };
        t.push_back(src("p_bx", &sim::SourceModel::p_bx, 0, 1));
        t.push_back(src("p_bz", &sim::SourceModel::p_bz, 0, 1));
        t.push_back(src("pair_rate", &sim::SourceModel::pair_rate, 0, 1e12));
        t.push_back(src("accidental_prob", &sim::SourceModel::accidental_prob, 0, 1));
        t.push_back(src("double_click_prob", &sim::SourceModel::double_click_prob, 0, 1));

        // [alice] / [bob]
        auto station = [&](const char* sec, sim::StationModel SC::* st) {
            Entry q{sec, "q", ValueType::Dbl, 0, 1, nullptr, nullptr};
            q.set = [st](RunConfig& c, std::uint64_t, double d, bool, const std::string&) {
                (c.session.*st).q = d;
            };
            q.get = [st](const RunConfig& c) { return fmt_double((c.session.*st).q); };
            t.push_back(q);
            Entry a{sec, "pre_attenuation", ValueType::Dbl, 1e-9, 1, nullptr, nullptr};
            a.set = [st](RunConfig& c, std::uint64_t, double d, bool, const std::string&) {
                (c.session.*st).pre_attenuation = d;
            };
            a.get = [st](const RunConfig& c) { return fmt_double((c.session.*st).pre_attenuation); };
            t.push_back(a);
        };
        station("alice", &SC::alice);
        station("bob", &SC::bob);

        // [cascade]
        e = Entry{"cascade", "num_passes", ValueType::I32, 1, 16, nullptr, nullptr};
        e.set = [](RunConfig& c, std::uint64_t u, double, bool, const std::string&) {
            c.session.cascade.num_passes = static_cast<int>(u);
        };
        e.get = [](const RunConfig& c) { return std::to_string(c.session.cascade.num_passes); };
        t.push_back(e);
        e = Entry{"cascade", "block_constant", ValueType::Dbl, 1e-6, 1e6, nullptr, nullptr};
        e.set = [](RunConfig& c, std::uint64_t, double d, bool, const std::string&) {
            c.session.cascade.block_constant = d;
        };
        e.get = [](const RunConfig& c) { return fmt_double(c.session.cascade.block_constant); };
        t.push_back(e);
        e = Entry{"cascade", "s", ValueType::I32, 1, 4096, nullptr, nullptr};
        e.set = [](RunConfig& c, std::uint64_t u, double, bool, const std::string&) {
            c.session.cascade.biconf_rounds = static_cast<int>(u);
        };
        e.get = [](const RunConfig& c) { return std::to_string(c.session.cascade.biconf_rounds); };
        t.push_back(e);
        t.push_back(num_entry("cascade", "work_block", ValueType::U32, 2, 1e9, &SC::work_block));
        t.push_back(num_entry("cascade", "qber_prior_x", ValueType::Dbl, 0, 0.5, &SC::qber_prior_x));
        t.push_back(num_entry("cascade", "qber_prior_z", ValueType::Dbl, 0, 0.5, &SC::qber_prior_z));

        // [epsilon]
        t.push_back(num_entry("epsilon", "p_eps", ValueType::Dbl, 1e-30, 1, &SC::p_eps));
        t.push_back(num_entry("epsilon", "split_x", ValueType::Dbl, 0, 1, &SC::p_eps_split_x));

        // [privacy]
        t.push_back(num_entry("privacy", "tag_len", ValueType::U32, 1, 64, &SC::tag_len));

        // [optimize]
        auto opt_num = [&](const char* key, auto OptimizeParams::* f, ValueType vt, double lo,
                           double hi) {
            Entry v{"optimize", key, vt, lo, hi, nullptr, nullptr};
            v.set = [f, vt](RunConfig& c, std::uint64_t u, double d, bool, const std::string&) {
                using F = std::remove_reference_t<decltype(c.optimize.*f)>;
                if constexpr (std::is_floating_point_v<F>) c.optimize.*f = d;
                else c.optimize.*f = static_cast<F>(vt == ValueType::Dbl ? d : u);
            };
            v.get = [f](const RunConfig& c) {
                using F = std::remove_reference_t<decltype(c.optimize.*f)>;
                if constexpr (std::is_floating_point_v<F>) return fmt_double(c.optimize.*f);
                else return std::to_string(c.optimize.*f);
            };
            t.push_back(v);
        };
        opt_num("n_total", &OptimizeParams::n_total, ValueType::U64, 1, 1e15);
        opt_num("e_bx", &OptimizeParams::e_bx, ValueType::Dbl, 0, 0.5);
        opt_num("e_bz", &OptimizeParams::e_bz, ValueType::Dbl, 0, 0.5);
        opt_num("f_x", &OptimizeParams::f_x, ValueType::Dbl, 1, 10);
        opt_num("f_z", &OptimizeParams::f_z, ValueType::Dbl, 1, 10);
        opt_num("grid_step", &OptimizeParams::grid_step, ValueType::Dbl, 1e-5, 0.5);
        e = Entry{"optimize", "split_search", ValueType::Bool, 0, 0, nullptr, nullptr};
        e.set = [](RunConfig& c, std::uint64_t, double, bool b, const std::string&) {
            c.optimize.split_search = b;
        };
        e.get = [](const RunConfig& c) { return c.optimize.split_search ? "true" : "false"; };
        t.push_back(e);
        return t;
    }();
    return table;
}

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

} // namespace

RunConfig parse_config(const std::string& text, DefaultsPolicy policy,
                       const std::string& origin) {
    RunConfig cfg;
    std::set<std::string> seen;
    std::map<std::string, const Entry*> lookup;
    for (const auto& e : entries())
        lookup[std::string(e.section) + "." + e.key] = &e;

    std::istringstream in(text);
    std::string line, section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string s = trim(line);
        if (s.empty() || s[0] == '#' || s[0] == ';') continue;
        if (s.front() == '[') {
            if (s.back() != ']')
                throw ConfigError(origin + ":" + std::to_string(line_no) +
                                  ": malformed section header '" + s + "'");
            section = trim(s.substr(1, s.size() - 2));
            bool known = false;
            for (const auto& e : entries())
                if (section == e.section) { known = true; break; }
            if (!known)
                throw ConfigError(origin + ":" + std::to_string(line_no) +
                                  ": unknown section '" + section + "'");
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(line_no) +
                              ": expected key = value, got '" + s + "'");
        const std::string key = trim(s.substr(0, eq));
        const std::string value = trim(s.substr(eq + 1));
        if (section.empty())
            throw ConfigError(origin + ":" + std::to_string(line_no) +
                              ": key '" + key + "' appears before any section");
        const std::string full = section + "." + key;
        const auto it = lookup.find(full);
        if (it == lookup.end())
            throw ConfigError(origin + ":" + std::to_string(line_no) +
                              ": unknown key '" + full + "'");
        const Entry& e = *it->second;
        if (!seen.insert(full).second)
            throw ConfigError(origin + ":" + std::to_string(line_no) +
                              ": duplicate key '" + full + "'");

        std::uint64_t u = 0;
        double d = 0.0;
        bool b = false;
        try {
            switch (e.type) {
            case ValueType::U64:
            case ValueType::U32:
            case ValueType::I32: {
                std::size_t pos = 0;
                u = std::stoull(value, &pos);
                if (pos != value.size()) throw std::invalid_argument("trailing characters");
                d = static_cast<double>(u);
                break;
            }
            case ValueType::Dbl: {
                std::size_t pos = 0;
                d = std::stod(value, &pos);
                if (pos != value.size()) throw std::invalid_argument("trailing characters");
                break;
            }
            case ValueType::Bool:
                if (value == "true") b = true;
                else if (value == "false") b = false;
                else throw std::invalid_argument("expected true or false");
                break;
            case ValueType::Str:
                break;
            }
        } catch (const std::exception&) {
            throw ConfigError(origin + ":" + std::to_string(line_no) + ": key '" + full +
                              "' has a malformed value '" + value + "'");
        }
        if (e.type != ValueType::Bool && e.type != ValueType::Str && e.lo != e.hi &&
            !(d >= e.lo && d <= e.hi))
            throw ConfigError(origin + ":" + std::to_string(line_no) + ": key '" + full +
                              "' = " + value + " outside [" + fmt_double(e.lo) + ", " +
                              fmt_double(e.hi) + "]");
        try {
            e.set(cfg, u, d, b, value);
        } catch (const ConfigError& ce) {
            throw ConfigError(origin + ":" + std::to_string(line_no) + ": " + ce.what());
        }
    }

    if (policy == DefaultsPolicy::Require) {
        std::string missing;
        for (const auto& e : entries()) {
            const std::string full = std::string(e.section) + "." + e.key;
            if (!seen.count(full)) missing += missing.empty() ? full : ", " + full;
        }
        if (!missing.empty())
            throw ConfigError(origin + ": missing required keys: " + missing);
    }

    try {
        cfg.session.validate();
    } catch (const std::exception& ex) {
        throw ConfigError(origin + ": " + ex.what());
    }
    return cfg;
}

RunConfig load_config(const std::string& path, DefaultsPolicy policy) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), policy, path);
}

std::string serialize(const RunConfig& cfg) {
    std::string out;
    std::string section;
    for (const auto& e : entries()) {
        if (section != e.section) {
            if (!out.empty()) out += '\n';
            section = e.section;
            out += '[' + section + "]\n";
        }
        out += std::string(e.key) + " = " + e.get(cfg) + '\n';
    }
    return out;
}

std::uint64_t config_digest(const RunConfig& cfg) {
    const std::string s = serialize(cfg);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace qkd::config
