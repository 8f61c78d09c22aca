// SPDX-License-Identifier: Apache-2.0
//
// relaydmt: tradeoff curves, oracle verification, outage and code
// simulations from the command line.

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "dmt/analytic.hpp"
#include "dmt/codes.hpp"
#include "dmt/csv.hpp"
#include "dmt/outage.hpp"
#include "dmt/verify.hpp"

namespace {

enum Exit : int {
    kOk = 0,
    kDiscrepancy = 1,
    kBadArgs = 2,
    kInsufficientData = 3,
};

struct UsageError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct Globals {
    std::uint64_t seed = 1;
    unsigned workers = std::max(1u, std::thread::hardware_concurrency());
    std::string config;
    std::string out;
};

struct FrameArgs {
    std::string protocol;
    int n = 2;
    std::optional<int> p, q;
};

struct SnrArgs {
    double min = 0.0, max = 20.0, step = 5.0;
    std::uint64_t trials = 100000;
};

// ---------------------------------------------------------------------------
// Config file: `key = value` per line, `#` starts a comment. Keys are flag
// names without the leading dashes. Command-line flags win.

std::string trim(const std::string& s)
{
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos)
        return {};
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::vector<std::pair<std::string, std::string>> read_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw UsageError("cannot open config file '" + path + "'");
    std::vector<std::pair<std::string, std::string>> kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        line = trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw UsageError(path + ":" + std::to_string(lineno) + ": expected 'key = value'");
        auto key = trim(line.substr(0, eq));
        auto value = trim(line.substr(eq + 1));
        if (key.empty())
            throw UsageError(path + ":" + std::to_string(lineno) + ": empty key");
        kv.emplace_back(std::move(key), std::move(value));
    }
    return kv;
}

void apply_config(const std::string& path, CLI::App& app, CLI::App& sub)
{
    for (const auto& [key, value] : read_config(path)) {
        if (key == "config")
            throw UsageError(path + ": 'config' cannot be set from a config file");
        CLI::Option* opt = sub.get_option_no_throw("--" + key);
        if (opt == nullptr)
            opt = app.get_option_no_throw("--" + key);
        if (opt == nullptr)
            throw UsageError(path + ": unknown key '" + key + "' for '" + sub.get_name() + "'");
        if (opt->count() > 0)
            continue;
        opt->add_result(value);
        try {
            opt->run_callback();
        } catch (const CLI::Error& e) {
            throw UsageError(path + ": bad value for '" + key + "': " + e.what());
        }
    }
}

// ---------------------------------------------------------------------------
// Validation helpers

void require(bool ok, const std::string& msg)
{
    if (!ok)
        throw UsageError(msg);
}

dmt::ProtocolSpec make_spec(const FrameArgs& f)
{
    require(!f.protocol.empty(), "--protocol is required");
    const auto kind = dmt::parse_protocol(f.protocol);
    int p = 1, q = 1;
    if (kind == dmt::ProtocolKind::Oaf) {
        p = f.n;
        q = f.n - 1;
    }
    dmt::ProtocolSpec s{kind, f.n, f.p.value_or(p), f.q.value_or(q)};
    s.validate();
    return s;
}

std::vector<double> snr_grid(const SnrArgs& a)
{
    require(std::isfinite(a.min) && std::isfinite(a.max), "SNR bounds must be finite");
    require(a.max >= a.min, "--snr-max must be >= --snr-min");
    require(a.step > 0.0 && std::isfinite(a.step), "--snr-step must be positive");
    require(a.trials >= 1, "--trials must be >= 1");
    const long count = std::lround(std::floor((a.max - a.min) / a.step + 1e-9));
    require(count < 10000, "too many SNR points");
    std::vector<double> out;
    for (long i = 0; i <= count; ++i)
        out.push_back(a.min + static_cast<double>(i) * a.step);
    return out;
}

struct Output {
    std::ofstream file;
    std::ostream* os = &std::cout;

    explicit Output(const std::string& path)
    {
        if (path.empty())
            return;
        file.open(path, std::ios::binary);
        if (!file)
            throw UsageError("cannot open output file '" + path + "'");
        os = &file;
    }
};

// ---------------------------------------------------------------------------
// Commands

struct DmtArgs {
    FrameArgs frame;
    bool all = false;
    double r_min = 0.0, r_max = 1.0, r_step = 0.01;
};

int cmd_dmt(const Globals& g, const DmtArgs& a)
{
    require(a.r_min >= 0.0 && a.r_max <= 1.0 && a.r_min <= a.r_max, "r range must satisfy 0 <= r-min <= r-max <= 1");
    require(a.r_step > 0.0 && a.r_step <= 1.0, "--r-step must lie in (0, 1]");
    std::vector<std::pair<std::string, dmt::PiecewiseLinearCurve>> curves;
    if (a.all) {
        require(a.frame.protocol.empty(), "--all and --protocol are mutually exclusive");
        require(a.frame.n >= 2, "--n must be >= 2");
        const int p = a.frame.p.value_or(1), q = a.frame.q.value_or(1);
        using K = dmt::ProtocolKind;
        for (auto k : {K::Miso, K::Oaf, K::Naf, K::NsdfFixed, K::NsdfVariable, K::OsdfFixed, K::OsdfVariable}) {
            dmt::ProtocolSpec s{k, a.frame.n, p, q};
            if (k == K::Oaf) {
                s.p = a.frame.n;
                s.q = a.frame.n - 1;
            }
            s.validate();
            curves.emplace_back(std::string(dmt::to_string(k)), dmt::dmt_curve(s));
        }
    } else {
        const auto s = make_spec(a.frame);
        curves.emplace_back("d", dmt::dmt_curve(s));
    }
    const int decimals = std::max(2, dmt::csv::decimals_for_step(a.r_step));
    Output out(g.out);
    auto& os = *out.os;
    os << 'r';
    for (const auto& c : curves)
        os << ',' << c.first;
    os << '\n';
    const long count = std::lround(std::floor((a.r_max - a.r_min) / a.r_step + 1e-9));
    for (long i = 0; i <= count; ++i) {
        const double r = std::min(a.r_min + static_cast<double>(i) * a.r_step, 1.0);
        os << dmt::csv::fixed(r, decimals);
        for (const auto& c : curves)
            os << ',' << dmt::csv::fixed(c.second.eval(r), decimals);
        os << '\n';
    }
    return kOk;
}

struct VerifyArgs {
    std::vector<int> ns{2, 3, 4};
    std::vector<std::string> pq;
    std::string protocol;
    std::optional<int> p, q;
    int samples = 101;
    bool perturb = false;
};

int cmd_verify(const Globals& g, const VerifyArgs& a)
{
    require(a.samples >= 2 && a.samples <= 100001, "--samples must lie in [2, 100001]");
    require(!a.ns.empty(), "--n list is empty");
    for (int n : a.ns)
        require(n >= 2 && n <= 8, "--n values must lie in [2, 8]");
    std::vector<std::pair<int, int>> frames;
    for (const auto& s : a.pq) {
        const auto colon = s.find(':');
        require(colon != std::string::npos, "--pq entries look like p:q, got '" + s + "'");
        try {
            frames.emplace_back(std::stoi(s.substr(0, colon)), std::stoi(s.substr(colon + 1)));
        } catch (const std::exception&) {
            throw UsageError("--pq entries look like p:q, got '" + s + "'");
        }
    }
    require(a.p.has_value() == a.q.has_value(), "--p and --q go together");
    if (a.p)
        frames.emplace_back(*a.p, *a.q);
    std::vector<dmt::ProtocolKind> kinds{dmt::ProtocolKind::Oaf, dmt::ProtocolKind::NsdfFixed,
                                         dmt::ProtocolKind::OsdfFixed};
    if (!a.protocol.empty()) {
        const auto k = dmt::parse_protocol(a.protocol);
        require(k == dmt::ProtocolKind::Oaf || k == dmt::ProtocolKind::NsdfFixed || k == dmt::ProtocolKind::OsdfFixed,
                "verify covers oaf, nsdf and osdf");
        kinds = {k};
    }
    std::vector<dmt::VerifyCase> cases;
    for (int n : a.ns) {
        const auto use = frames.empty() ? dmt::default_frames(n) : frames;
        for (auto [p, q] : use) {
            require(p >= 1 && q >= 1 && p >= q, "frames need p >= q >= 1");
            for (auto k : kinds)
                cases.push_back({k, n, p, q});
        }
    }
    const double tol = 1e-6;
    const auto res = dmt::verify_curves(cases, a.samples, a.perturb ? 1e-3 : 0.0);
    Output out(g.out);
    auto& os = *out.os;
    const auto& w = res.worst_case;
    os << "cases=" << res.cases << " samples=" << a.samples << '\n';
    os << "max_gap=" << dmt::csv::number(res.max_gap) << " tolerance=" << dmt::csv::number(tol) << '\n';
    os << "worst protocol=" << dmt::to_string(w.kind) << " n=" << w.n << " p=" << w.p << " q=" << w.q
       << " r=" << dmt::csv::number(res.worst_r) << " analytic=" << dmt::csv::number(res.analytic)
       << " oracle=" << dmt::csv::number(res.oracle) << '\n';
    if (res.intersection)
        os << "intersection r=" << dmt::csv::number(res.intersection->r)
           << " d=" << dmt::csv::number(res.intersection->d) << '\n';
    const bool ok = res.max_gap < tol;
    os << (ok ? "PASS" : "FAIL") << '\n';
    return ok ? kOk : kDiscrepancy;
}

// Rows first, then the fit or the reason there is none.
int finish_series(std::ostream& os, dmt::OutageSeries& s, bool fit, const char* what)
{
    dmt::write_csv_header(os);
    for (const auto& pt : s.points)
        dmt::write_csv_row(os, pt);
    if (!s.points.empty() && 10 * s.zero_points() > 3 * s.points.size())
        std::cerr << "relaydmt: warning: " << s.zero_points() << " of " << s.points.size() << " points saw no "
                  << what << "; raise --trials or lower the SNR range\n";
    if (!fit)
        return kOk;
    try {
        const auto f = dmt::estimate_exponent(s);
        s.fitted_exponent = f.slope;
        s.fit_stderr = f.std_error;
    } catch (const dmt::InsufficientData& e) {
        os.flush();
        std::cerr << "relaydmt: " << e.what() << '\n';
        return kInsufficientData;
    }
    dmt::write_csv_fit(os, s);
    return kOk;
}

struct OutageArgs {
    FrameArgs frame;
    double r = 0.0;
    double rate_offset = 0.0;
    SnrArgs snr;
    bool no_fit = false;
};

int cmd_outage(const Globals& g, const OutageArgs& a)
{
    const auto spec = make_spec(a.frame);
    require(a.r >= 0.0 && a.r <= 1.0, "--r must lie in [0, 1]");
    require(std::isfinite(a.rate_offset) && a.rate_offset >= 0.0, "--rate-offset must be >= 0");
    const auto snr = snr_grid(a.snr);
    require(spec.kind != dmt::ProtocolKind::NsdfVariable && spec.kind != dmt::ProtocolKind::OsdfVariable,
            "variable-ratio protocols have no single frame to simulate");
    require(spec.kind != dmt::ProtocolKind::Oaf || (spec.p == spec.n && spec.q == spec.n - 1),
            "oaf simulation uses p = n, q = n - 1");
    dmt::SimulationOptions opt;
    opt.master_seed = g.seed;
    opt.workers = g.workers;
    opt.rate_offset_bits = a.rate_offset;
    auto s = dmt::sweep_points(spec, dmt::MultiplexingGain(a.r), snr, a.snr.trials, opt);
    Output out(g.out);
    return finish_series(*out.os, s, !a.no_fit, "outage");
}

struct CodesimArgs {
    std::string code;
    FrameArgs frame;
    int M = 2;
    SnrArgs snr{14.0, 26.0, 4.0, 100000};
    std::string codebook_out;
    bool no_fit = false;
};

int cmd_codesim(const Globals& g, const CodesimArgs& a)
{
    require(a.code == "oaf-diag" || a.code == "naf", "--code must be oaf-diag or naf");
    require(a.M == 2 || a.M == 4 || a.M == 8 || a.M == 16, "--M must be 2, 4, 8 or 16");
    FrameArgs f = a.frame;
    if (f.protocol.empty())
        f.protocol = a.code == "naf" ? "naf" : "oaf";
    const auto spec = make_spec(f);
    const auto snr = snr_grid(a.snr);
    const auto code = a.code == "naf" ? dmt::naf_codebook(spec.n, a.M) : dmt::oaf_diagonal_codebook(spec.n, a.M);
    dmt::check_code_matches(spec, code);
    require(spec.kind != dmt::ProtocolKind::Oaf || (spec.p == spec.n && spec.q == spec.n - 1),
            "oaf-diag runs on the p = n, q = n - 1 frame");
    if (!a.codebook_out.empty()) {
        std::ofstream cb(a.codebook_out, std::ios::binary);
        if (!cb)
            throw UsageError("cannot open codebook file '" + a.codebook_out + "'");
        auto scaled = code;
        scaled.set_rho(dmt::db_to_linear(snr.front()));
        dmt::write_codebook_csv(cb, scaled);
    }
    dmt::SimulationOptions opt;
    opt.master_seed = g.seed;
    opt.workers = g.workers;
    auto s = dmt::simulate_wer(spec, code, snr, a.snr.trials, opt);
    s.fitted_exponent = std::numeric_limits<double>::quiet_NaN();
    Output out(g.out);
    return finish_series(*out.os, s, !a.no_fit, "word errors");
}

void add_frame_options(CLI::App* sub, FrameArgs& f)
{
    sub->add_option("--protocol", f.protocol,
                    "oaf | naf | nsdf (nsdf-fixed) | nsdf-variable | osdf (osdf-fixed) | osdf-variable | miso");
    sub->add_option("--n", f.n, "nodes: source plus relays")->capture_default_str();
    sub->add_option("--p", f.p, "broadcast phase length (oaf default n, others 1)");
    sub->add_option("--q", f.q, "relaying phase length (oaf default n-1, others 1)");
}

void add_snr_options(CLI::App* sub, SnrArgs& s)
{
    sub->add_option("--snr-min", s.min, "first SNR point in dB")->capture_default_str();
    sub->add_option("--snr-max", s.max, "last SNR point in dB")->capture_default_str();
    sub->add_option("--snr-step", s.step, "SNR spacing in dB")->capture_default_str();
    sub->add_option("--trials", s.trials, "trials per SNR point")->capture_default_str();
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Diversity-multiplexing tradeoff curves and relay-channel simulations"};
    app.name("relaydmt");
    app.require_subcommand(1);
    app.fallthrough();

    Globals g;
    app.add_option("--seed", g.seed, "master seed")->capture_default_str();
    app.add_option("--workers", g.workers, "worker threads for Monte Carlo commands");
    app.add_option("--config", g.config, "file of 'key = value' lines; flags override it");
    app.add_option("--out", g.out, "write output here instead of standard output");

    DmtArgs dmt_args;
    auto* dmt_cmd = app.add_subcommand("dmt", "tradeoff curve as r,d CSV");
    add_frame_options(dmt_cmd, dmt_args.frame);
    dmt_cmd->add_flag("--all", dmt_args.all, "one column per protocol");
    dmt_cmd->add_option("--r-min", dmt_args.r_min)->capture_default_str();
    dmt_cmd->add_option("--r-max", dmt_args.r_max)->capture_default_str();
    dmt_cmd->add_option("--r-step", dmt_args.r_step)->capture_default_str();

    VerifyArgs verify_args;
    auto* verify_cmd = app.add_subcommand("verify", "closed forms against the optimization oracle");
    verify_cmd->add_option("--n", verify_args.ns, "node counts")->delimiter(',')->capture_default_str();
    verify_cmd->add_option("--pq", verify_args.pq, "frames as p:q")->delimiter(',');
    verify_cmd->add_option("--protocol", verify_args.protocol, "restrict to oaf, nsdf or osdf");
    verify_cmd->add_option("--p", verify_args.p);
    verify_cmd->add_option("--q", verify_args.q);
    verify_cmd->add_option("--samples", verify_args.samples, "r-samples per curve")->capture_default_str();
    verify_cmd->add_flag("--perturb", verify_args.perturb, "shift the closed forms by 1e-3 (checker self-test)");

    OutageArgs outage_args;
    auto* outage_cmd = app.add_subcommand("outage", "Monte Carlo outage sweep with fitted exponent");
    add_frame_options(outage_cmd, outage_args.frame);
    outage_cmd->add_option("--r", outage_args.r, "multiplexing gain")->capture_default_str();
    outage_cmd->add_option("--rate-offset", outage_args.rate_offset, "bits added to r log2(rho)")->capture_default_str();
    add_snr_options(outage_cmd, outage_args.snr);
    outage_cmd->add_flag("--no-fit", outage_args.no_fit, "print the points only");

    CodesimArgs codesim_args;
    auto* codesim_cmd = app.add_subcommand("codesim", "word-error simulation of the space-time codes");
    codesim_cmd->add_option("--code", codesim_args.code, "oaf-diag | naf");
    add_frame_options(codesim_cmd, codesim_args.frame);
    codesim_cmd->add_option("--M", codesim_args.M, "QAM points per dimension")->capture_default_str();
    add_snr_options(codesim_cmd, codesim_args.snr);
    codesim_cmd->add_option("--codebook", codesim_args.codebook_out, "also write the scaled codebook CSV here");
    codesim_cmd->add_flag("--no-fit", codesim_args.no_fit, "print the points only");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "relaydmt: error: " << e.what() << '\n';
        return kBadArgs;
    }

    try {
        CLI::App* sub = app.get_subcommands().front();
        if (!g.config.empty())
            apply_config(g.config, app, *sub);
        require(g.workers >= 1 && g.workers <= 1024, "--workers must lie in [1, 1024]");
        if (sub == dmt_cmd)
            return cmd_dmt(g, dmt_args);
        if (sub == verify_cmd)
            return cmd_verify(g, verify_args);
        if (sub == outage_cmd)
            return cmd_outage(g, outage_args);
        return cmd_codesim(g, codesim_args);
    } catch (const std::exception& e) {
        std::cerr << "relaydmt: error: " << e.what() << '\n';
        return kBadArgs;
    }
}
