#include <cstdio>
#include <filesystem>
#include <iomanip>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qkd/config.hpp"
#include "qkd/keyrate.hpp"
#include "qkd/report.hpp"
#include "qkd/session.hpp"
#include "qkd/transport.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitConfig = 2;
constexpr int kExitProtocol = 3;
constexpr int kExitVerification = 4;

// Tracks files created by a subcommand so partial outputs vanish on failure.
class OutputSet {
public:
    std::ofstream open(const fs::path& p) {
        std::ofstream f(p, std::ios::binary);
        if (!f) throw std::runtime_error("cannot open output file " + p.string());
        paths_.push_back(p);
        return f;
    }
    void track(const fs::path& p) { paths_.push_back(p); }
    void commit() { paths_.clear(); }
    ~OutputSet() {
        for (const auto& p : paths_) {
            std::error_code ec;
            fs::remove(p, ec);
        }
    }

private:
    std::vector<fs::path> paths_;
};

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string provenance_line(const qkd::config::RunConfig& cfg) {
    return "# config_digest=" + hex64(qkd::config::config_digest(cfg)) +
           " seed=" + std::to_string(cfg.session.seed) + "\n";
}

void write_report_file(OutputSet& outputs, const fs::path& path,
                       const qkd::session::SessionReport& rep,
                       const qkd::config::RunConfig& cfg, const std::string& format) {
    if (format == "json") {
        json j = qkd::report::to_json(rep);
        j["config_digest"] = hex64(qkd::config::config_digest(cfg));
        j["config"] = qkd::config::serialize(cfg);
        auto f = outputs.open(path);
        f << j.dump(2) << '\n';
    } else {
        json j = qkd::report::to_json(rep);
        auto f = outputs.open(path);
        f << provenance_line(cfg);
        std::istringstream cfg_text(qkd::config::serialize(cfg));
        std::string line;
        while (std::getline(cfg_text, line)) f << "# " << line << '\n';
        std::string header, row;
        for (auto it = j.begin(); it != j.end(); ++it) {
            if (!header.empty()) { header += ','; row += ','; }
            header += it.key();
            row += it.value().is_string() ? it.value().get<std::string>() : it.value().dump();
        }
        f << header << '\n' << row << '\n';
    }
}

struct SimulateArgs {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> rounds;
    std::string out_dir = ".";
    std::string role = "both";
    std::string listen_addr;
    std::string connect_addr;
    std::string format = "json";
    bool dump_events = false;
};

int cmd_simulate(const SimulateArgs& args) {
    auto cfg = qkd::config::load_config(args.config_path);
    if (args.seed) cfg.session.seed = *args.seed;
    if (args.rounds) cfg.session.n_rounds = *args.rounds;
    cfg.session.validate();

    fs::create_directories(args.out_dir);
    OutputSet outputs;
    const fs::path dir(args.out_dir);

    if (args.dump_events) {
        qkd::sim::SessionSimulator sim(cfg.session.source, cfg.session.alice, cfg.session.bob,
                                       cfg.session.n_rounds,
                                       qkd::derive_seed(cfg.session.seed, "source"));
        auto f = outputs.open(dir / "events.csv");
        f << provenance_line(cfg);
        f << "round,alice_basis,alice_bit,bob_basis,bob_bit,flags\n";
        qkd::sim::write_event_csv(f, sim);
    }

    qkd::session::PartyResult result;       // the reported party
    qkd::session::PartyResult bob_result;   // corrector side, for transcripts
    bool have_bob = false;
    try {
        if (args.role == "both") {
            auto pair = qkd::session::run_session(cfg.session);
            if (!(pair.alice.final_key == pair.bob.final_key))
                throw qkd::session::SessionAborted(kExitVerification,
                                                   "final keys disagree between parties");
            result = pair.bob;
            bob_result = std::move(pair.bob);
            have_bob = true;
        } else {
            std::unique_ptr<qkd::wire::Transport> transport;
            if (!args.listen_addr.empty())
                transport = qkd::wire::SocketTransport::listen(args.listen_addr);
            else if (!args.connect_addr.empty())
                transport = qkd::wire::SocketTransport::connect(args.connect_addr);
            else
                throw qkd::config::ConfigError("role " + args.role +
                                               " needs --listen or --connect");
            const auto role = args.role == "alice" ? qkd::session::Role::Alice
                                                   : qkd::session::Role::Bob;
            qkd::session::PartyResult party;
            qkd::session::run_party(role, cfg.session, *transport, party);
            if (args.role == "bob") {
                bob_result = party;
                have_bob = true;
            }
            result = std::move(party);
        }
    } catch (const qkd::session::SessionAborted& e) {
        // keep whatever transcript material exists, then report the abort
        std::cerr << "session aborted: " << e.what() << '\n';
        return e.exit_code;
    }

    write_report_file(outputs, dir / "report.json", result.report, cfg, args.format);

    {
        auto series = qkd::session::qber_timeseries(result, cfg.session.qber_window,
                                                    cfg.session.n_rounds);
        auto f = outputs.open(dir / "qber_series.csv");
        f << std::setprecision(17);
        f << provenance_line(cfg);
        f << "window_index,qber_x,qber_z\n";
        for (const auto& w : series) {
            f << w.window_index << ',';
            if (w.has_x) f << w.qber_x;
            f << ',';
            if (w.has_z) f << w.qber_z;
            f << '\n';
        }
    }

    qkd::report::write_key_file((dir / "final_key.bin").string(), result.final_key,
                                result.report.session_id, cfg.session.seed,
                                hex64(qkd::config::config_digest(cfg)));
    outputs.track(dir / "final_key.bin");

    if (have_bob) {
        auto fx = outputs.open(dir / "transcript_x.csv");
        fx << provenance_line(cfg) << "direction,pass,sequence,block_id,parity_bits_count\n"
           << qkd::cascade::transcript_to_csv(bob_result.transcript_x);
        auto fz = outputs.open(dir / "transcript_z.csv");
        fz << provenance_line(cfg) << "direction,pass,sequence,block_id,parity_bits_count\n"
           << qkd::cascade::transcript_to_csv(bob_result.transcript_z);
    }

    if (result.no_positive_rate)
        std::cerr << "no positive rate: final key is empty\n";
    std::cout << "secure_per_raw " << result.report.secure_per_raw
              << " final_len " << result.report.final_len << '\n';
    outputs.commit();
    return kExitOk;
}

struct OptimizeArgs {
    std::string config_path;
    std::string out_dir = ".";
    bool grid2d = false;
};

int cmd_optimize(const OptimizeArgs& args) {
    auto cfg = qkd::config::load_config(args.config_path);
    const auto& op = cfg.optimize;
    qkd::keyrate::OptimizeOptions options;
    options.grid_step = op.grid_step;
    options.optimize_split = op.split_search;

    fs::create_directories(args.out_dir);
    OutputSet outputs;
    const fs::path dir(args.out_dir);

    const auto best = qkd::keyrate::optimize_bias(op.n_total, op.e_bx, op.e_bz, op.f_x, op.f_z,
                                                  cfg.session.p_eps, options);
    {
        auto f = outputs.open(dir / "bias_curve.csv");
        f << std::setprecision(17);
        f << provenance_line(cfg);
        f << "q,eps_x,eps_z,R\n";
        for (double q = options.q_min; q <= options.q_max + 1e-12; q += options.grid_step) {
            const double qq = std::min(q, options.q_max);
            const auto r = qkd::keyrate::rate_at_bias(
                op.n_total, qq, qq, op.e_bx, op.e_bz, op.f_x, op.f_z,
                cfg.session.p_eps * cfg.session.p_eps_split_x,
                cfg.session.p_eps * (1.0 - cfg.session.p_eps_split_x));
            f << qq << ',' << r.eps_x_star << ',' << r.eps_z_star << ',' << r.raw_rate << '\n';
        }
    }
    if (args.grid2d) {
        auto f = outputs.open(dir / "bias_grid.csv");
        f << std::setprecision(17);
        f << provenance_line(cfg);
        f << "q_a,q_b,R\n";
        const double step = std::max(options.grid_step, 0.01);
        for (double qa = options.q_min; qa <= options.q_max + 1e-12; qa += step)
            for (double qb = options.q_min; qb <= options.q_max + 1e-12; qb += step) {
                const auto r = qkd::keyrate::rate_at_bias(
                    op.n_total, std::min(qa, options.q_max), std::min(qb, options.q_max),
                    op.e_bx, op.e_bz, op.f_x, op.f_z,
                    cfg.session.p_eps * cfg.session.p_eps_split_x,
                    cfg.session.p_eps * (1.0 - cfg.session.p_eps_split_x));
                f << std::min(qa, options.q_max) << ',' << std::min(qb, options.q_max) << ','
                  << r.raw_rate << '\n';
            }
    }
    std::cout << "q_star " << best.q_a_star << " R " << best.rate << " eps_x " << best.eps_x_star
              << " eps_z " << best.eps_z_star << (best.positive ? "" : " (no positive rate)")
              << '\n';
    outputs.commit();
    return kExitOk;
}

struct KeyrateArgs {
    double q_a = 0.5, q_b = -1.0;
    double e_bx = 0.0, e_bz = 0.0;
    double f_x = 1.0, f_z = 1.0;
    double eps_x = 0.0, eps_z = 0.0;
    std::optional<std::uint64_t> n_total;
    double p_eps = 1e-6;
};

int cmd_keyrate(const KeyrateArgs& args) {
    const double q_b = args.q_b < 0.0 ? args.q_a : args.q_b;
    if (args.n_total) {
        const auto r = qkd::keyrate::rate_at_bias(*args.n_total, args.q_a, q_b, args.e_bx,
                                                  args.e_bz, args.f_x, args.f_z,
                                                  args.p_eps / 2.0, args.p_eps / 2.0);
        std::cout << "R " << r.raw_rate << " eps_x " << r.eps_x_star << " eps_z " << r.eps_z_star
                  << '\n';
    } else {
        qkd::keyrate::KeyRateParams p{args.q_a, q_b,   args.e_bx,  args.e_bz,
                                      args.f_x, args.f_z, args.eps_x, args.eps_z};
        std::cout << "R " << qkd::keyrate::key_rate(p) << '\n';
    }
    return kExitOk;
}

struct BenchArgs {
    std::string config_path;
    std::size_t length = 1208;
    double qber = 0.054;
    int runs = 200;
    std::uint64_t seed = 1;
    std::string out_dir = ".";
};

int cmd_cascade_bench(const BenchArgs& args) {
    qkd::config::RunConfig cfg;
    if (!args.config_path.empty()) cfg = qkd::config::load_config(args.config_path);
    cfg.session.seed = args.seed;

    fs::create_directories(args.out_dir);
    OutputSet outputs;
    const fs::path dir(args.out_dir);

    std::vector<qkd::cascade::CascadeStats> runs;
    qkd::Rng rng(qkd::derive_seed(args.seed, "bench"));
    const std::size_t n_errors =
        static_cast<std::size_t>(std::llround(args.qber * static_cast<double>(args.length)));
    for (int run = 0; run < args.runs; ++run) {
        qkd::BitVec key_a = rng.random_bits(args.length);
        qkd::BitVec key_b = key_a;
        std::vector<std::uint32_t> pos(args.length);
        for (std::size_t i = 0; i < args.length; ++i) pos[i] = static_cast<std::uint32_t>(i);
        rng.shuffle(std::span<std::uint32_t>(pos));
        for (std::size_t i = 0; i < n_errors; ++i) key_b.flip(pos[i]);
        auto ccfg = cfg.session.cascade;
        ccfg.shuffle_seed = qkd::derive_seed(args.seed, "bench-shuffle", static_cast<std::uint64_t>(run));
        auto res = qkd::cascade::run_cascade(key_a, key_b, ccfg, args.qber);
        if (!(res.corrected == key_a)) std::cerr << "run " << run << ": residual errors\n";
        runs.push_back(std::move(res.stats));
    }
    const auto agg = qkd::cascade::aggregate_stats(runs);
    const double nruns = static_cast<double>(args.runs);

    {
        auto f = outputs.open(dir / "block_sizes.csv");
        f << std::setprecision(17);
        f << provenance_line(cfg) << "pass,avg_block_size\n";
        for (std::size_t p = 0; p < agg.block_sizes_per_pass.size(); ++p)
            f << p + 1 << ',' << agg.block_sizes_per_pass[p] << '\n';
    }
    {
        auto f = outputs.open(dir / "errors_by_pass.csv");
        f << std::setprecision(17);
        f << provenance_line(cfg) << "pass,total";
        const std::size_t rows = agg.errors_per_pass_per_sequence.size();
        for (std::size_t c = 0; c < rows; ++c) f << ",seq" << c + 1;
        f << '\n';
        for (std::size_t r = 0; r < rows; ++r) {
            f << (r + 1 < rows ? std::to_string(r + 1) : std::string("confirm"));
            std::uint64_t total = 0;
            for (auto v : agg.errors_per_pass_per_sequence[r]) total += v;
            f << ',' << static_cast<double>(total) / nruns;
            for (auto v : agg.errors_per_pass_per_sequence[r])
                f << ',' << static_cast<double>(v) / nruns;
            f << '\n';
        }
    }
    {
        auto f = outputs.open(dir / "summary.csv");
        f << std::setprecision(17);
        f << provenance_line(cfg)
          << "runs,key_length,qber,errors_binary,errors_biconf,bits_binary,bits_biconf,"
             "bits_total,efficiency_f\n";
        f << args.runs << ',' << static_cast<double>(agg.key_length) / nruns << ','
          << agg.qber_measured << ',' << static_cast<double>(agg.errors_corrected_binary) / nruns
          << ',' << static_cast<double>(agg.errors_corrected_biconf) / nruns << ','
          << static_cast<double>(agg.bits_revealed_binary) / nruns << ','
          << static_cast<double>(agg.bits_revealed_biconf) / nruns << ','
          << static_cast<double>(agg.total_revealed()) / nruns << ',' << agg.efficiency_f << '\n';
    }
    std::cout << "revealed " << static_cast<double>(agg.total_revealed()) / nruns << " f "
              << agg.efficiency_f << '\n';
    outputs.commit();
    return kExitOk;
}

struct CompareArgs {
    std::vector<std::string> report_files;
    std::size_t baseline = 0;
    std::string out_dir = ".";
};

int cmd_compare(const CompareArgs& args) {
    std::vector<qkd::session::SessionReport> reports;
    for (const auto& path : args.report_files) {
        std::ifstream in(path);
        if (!in) throw qkd::config::ConfigError("cannot open report '" + path + "'");
        json j;
        in >> j;
        reports.push_back(qkd::report::report_from_json(j));
    }
    const auto ratios = qkd::session::compare_reports(reports, args.baseline);

    fs::create_directories(args.out_dir);
    OutputSet outputs;
    auto f = outputs.open(fs::path(args.out_dir) / "compare.csv");
    f << std::setprecision(17);
    f << "index,file,secure_per_raw,ratio\n";
    for (std::size_t i = 0; i < reports.size(); ++i) {
        f << i << ',' << args.report_files[i] << ',' << reports[i].secure_per_raw << ','
          << ratios[i] << '\n';
        std::cout << args.report_files[i] << " secure_per_raw " << reports[i].secure_per_raw
                  << " ratio " << ratios[i] << '\n';
    }
    outputs.commit();
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Biased-basis entangled QKD simulator and post-processing pipeline"};
    app.require_subcommand(1);

    SimulateArgs sim_args;
    auto* sim = app.add_subcommand("simulate", "Run a full two-party session");
    sim->add_option("--config", sim_args.config_path, "Config file")->required();
    sim->add_option("--seed", sim_args.seed, "Override run.seed");
    sim->add_option("--rounds", sim_args.rounds, "Override run.n_rounds");
    sim->add_option("--out", sim_args.out_dir, "Output directory");
    sim->add_option("--role", sim_args.role, "both | alice | bob")
        ->check(CLI::IsMember({"both", "alice", "bob"}));
    sim->add_option("--listen", sim_args.listen_addr, "host:port to accept the peer on");
    sim->add_option("--connect", sim_args.connect_addr, "host:port of the listening peer");
    sim->add_option("--format", sim_args.format, "Report format")
        ->check(CLI::IsMember({"json", "csv"}));
    sim->add_flag("--dump-events", sim_args.dump_events, "Also write the per-round event CSV");

    OptimizeArgs opt_args;
    auto* opt = app.add_subcommand("optimize-bias", "Sweep the bias and report the optimum");
    opt->add_option("--config", opt_args.config_path, "Config file")->required();
    opt->add_option("--out", opt_args.out_dir, "Output directory");
    opt->add_flag("--grid2d", opt_args.grid2d, "Also emit the (q_a, q_b, R) grid");

    KeyrateArgs kr_args;
    auto* kr = app.add_subcommand("keyrate", "Evaluate the secure rate formula");
    kr->add_option("--q", kr_args.q_a, "Shared Z-basis bias (or Alice's with --q-b)");
    kr->add_option("--q-b", kr_args.q_b, "Bob's Z-basis bias");
    kr->add_option("--e-bx", kr_args.e_bx, "Bit error rate in X");
    kr->add_option("--e-bz", kr_args.e_bz, "Bit error rate in Z");
    kr->add_option("--f-x", kr_args.f_x, "EC inefficiency in X");
    kr->add_option("--f-z", kr_args.f_z, "EC inefficiency in Z");
    kr->add_option("--eps-x", kr_args.eps_x, "X-key phase deviation");
    kr->add_option("--eps-z", kr_args.eps_z, "Z-key phase deviation");
    kr->add_option("--n-total", kr_args.n_total, "Solve deviations from this pair count");
    kr->add_option("--p-eps", kr_args.p_eps, "Failure budget when solving deviations");

    BenchArgs bench_args;
    auto* bench = app.add_subcommand("cascade-bench", "Measure reconciliation statistics");
    bench->add_option("--config", bench_args.config_path, "Config file (optional)");
    bench->add_option("--length", bench_args.length, "Key length in bits");
    bench->add_option("--qber", bench_args.qber, "Planted error rate");
    bench->add_option("--runs", bench_args.runs, "Number of runs to average");
    bench->add_option("--seed", bench_args.seed, "Bench seed");
    bench->add_option("--out", bench_args.out_dir, "Output directory");

    CompareArgs cmp_args;
    auto* cmp = app.add_subcommand("compare", "Compare session reports against a baseline");
    cmp->add_option("reports", cmp_args.report_files, "Report JSON files")->required();
    cmp->add_option("--baseline", cmp_args.baseline, "Baseline report index");
    cmp->add_option("--out", cmp_args.out_dir, "Output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (sim->parsed()) return cmd_simulate(sim_args);
        if (opt->parsed()) return cmd_optimize(opt_args);
        if (kr->parsed()) return cmd_keyrate(kr_args);
        if (bench->parsed()) return cmd_cascade_bench(bench_args);
        if (cmp->parsed()) return cmd_compare(cmp_args);
    } catch (const qkd::config::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const qkd::session::SessionAborted& e) {
        std::cerr << "session aborted: " << e.what() << '\n';
        return e.exit_code;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitProtocol;
    }
    return kExitUsage;
}
