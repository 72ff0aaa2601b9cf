// SPDX-License-Identifier: Apache-2.0

#include "cogpilot/cli.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "cogpilot/experiments.hpp"

namespace cogpilot::cli {

namespace {

const char* kUsage =
    "usage: cogpilot <verb> --config PATH [options]\n"
    "\n"
    "verbs:\n"
    "  sweep      run the configured SNR sweep and write a report\n"
    "  allocate   print the chosen pilot-sharing set per allocator\n"
    "  validate   run the scenario invariant checks\n"
    "  oracle     compare Monte Carlo MSE against the analytic formulas\n"
    "\n"
    "options:\n"
    "  --config PATH       JSON scenario configuration (required)\n"
    "  --out PATH          output path, '-' for stdout (default '-')\n"
    "  --format csv|json   report format (default csv)\n"
    "  --set key=value     dotted-path config override, repeatable\n"
    "  --seed N            override the config seed\n"
    "  --trials N          override the config trial count\n";

}  // namespace

CliCommand parse_args(const std::vector<std::string>& argv) {
    if (argv.empty()) throw UsageError(std::string("missing verb\n") + kUsage);
    CliCommand cmd;
    cmd.verb = argv[0];
    if (cmd.verb != "sweep" && cmd.verb != "allocate" && cmd.verb != "validate" &&
        cmd.verb != "oracle")
        throw UsageError("unknown verb '" + cmd.verb + "'\n" + kUsage);

    auto value_of = [&](std::size_t& i, const std::string& flag) -> std::string {
        if (i + 1 >= argv.size()) throw UsageError("flag " + flag + " needs a value\n" + kUsage);
        return argv[++i];
    };
    for (std::size_t i = 1; i < argv.size(); ++i) {
        const std::string& a = argv[i];
        if (a == "--config") cmd.config_path = value_of(i, a);
        else if (a == "--out") cmd.output_path = value_of(i, a);
        else if (a == "--format") cmd.format = value_of(i, a);
        else if (a == "--set") cmd.overrides.push_back(value_of(i, a));
        else if (a == "--seed") cmd.seed = std::stoull(value_of(i, a));
        else if (a == "--trials") cmd.trials = std::stol(value_of(i, a));
        else throw UsageError("unknown flag '" + a + "'\n" + kUsage);
    }
    if (cmd.config_path.empty())
        throw UsageError(std::string("--config is required\n") + kUsage);
    if (cmd.format != "csv" && cmd.format != "json")
        throw UsageError("--format must be csv or json\n");
    return cmd;
}

namespace {

nlohmann::json load_config_json(const CliCommand& cmd) {
    std::ifstream f(cmd.config_path);
    if (!f) throw UsageError("cannot open config file: " + cmd.config_path);
    nlohmann::json j;
    try {
        f >> j;
    } catch (const nlohmann::json::exception& e) {
        throw UsageError("config parse error: " + std::string(e.what()));
    }
    for (const std::string& ov : cmd.overrides) {
        auto eq = ov.find('=');
        if (eq == std::string::npos)
            throw UsageError("--set expects key=value, got '" + ov + "'");
        std::string key = ov.substr(0, eq);
        std::string raw = ov.substr(eq + 1);
        for (auto& c : key)
            if (c == '.') c = '/';
        nlohmann::json value;
        try {
            value = nlohmann::json::parse(raw);
        } catch (const nlohmann::json::exception&) {
            value = raw;  // bare strings allowed unquoted
        }
        j[nlohmann::json::json_pointer("/" + key)] = value;
    }
    if (cmd.seed) j["seed"] = *cmd.seed;
    if (cmd.trials) j["trials"] = *cmd.trials;
    return j;
}

ScenarioConfig load_config(const CliCommand& cmd) {
    try {
        return config_from_json(load_config_json(cmd));
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    } catch (const nlohmann::json::exception& e) {
        throw UsageError("config error: " + std::string(e.what()));
    }
}

int do_sweep(const CliCommand& cmd, const ScenarioConfig& cfg, std::ostream& out) {
    MseReport report = sweep(cfg);
    ReportFormat fmt = cmd.format == "json" ? ReportFormat::JSON : ReportFormat::CSV;
    if (cmd.output_path == "-")
        write_report(report, out, fmt);
    else
        write_report(report, cmd.output_path, fmt);
    return kExitOk;
}

int do_allocate(const ScenarioConfig& cfg, std::ostream& out) {
    Rng rng(derive_seed(cfg.seed, 0xD201));
    Scenario scenario = build_scenario(cfg, rng);
    double noise_var = cfg.pilot_power() / std::pow(10.0, cfg.snr_grid_db.front() / 10.0);
    for (Allocator which : cfg.allocators) {
        Rng arng(derive_seed(cfg.seed, 0xA110C, 0, static_cast<int>(which)));
        Allocation a = run_allocator(scenario, cfg, which, noise_var, arng);
        out << to_string(which) << ": [";
        for (std::size_t i = 0; i < a.shared_set.size(); ++i)
            out << (i ? ", " : "") << a.shared_set[i];
        out << "]\n";
        for (std::size_t i = 0; i < a.diagnostics.size(); ++i)
            out << "  step " << (i + 1) << ": user " << a.diagnostics[i].user
                << " metric=" << a.diagnostics[i].metric << '\n';
        for (const auto& n : a.notes) out << "  note: " << n << '\n';
    }
    return kExitOk;
}

int do_validate(const ScenarioConfig& cfg, std::ostream& out) {
    Rng rng(derive_seed(cfg.seed, 0xD201));
    Scenario scenario = build_scenario(cfg, rng);
    int failures = 0;
    auto check = [&](bool ok, const std::string& what) {
        if (!ok) {
            ++failures;
            out << "FAIL: " << what << '\n';
        }
    };

    for (const auto& [key, cov] : scenario.users.covariances) {
        std::string who = "user " + std::to_string(key.first) +
                          (key.second == BaseStation::PBS ? " @PBS" : " @CBS");
        check(cov.is_hermitian(1e-12), who + " Hermitian");
        check(cov.is_psd(1e-10), who + " PSD");
        check((cov.entries.diagonal().array() - 1.0).abs().maxCoeff() == 0.0,
              who + " unit diagonal");
    }

    const auto& s = scenario.training;
    CMatrix gram = s.block.adjoint() * s.block -
                   s.total_power * CMatrix::Identity(s.num_antennas(), s.num_antennas());
    check(gram.norm() < 1e-10, "training matrix orthogonality");

    Rng crng(derive_seed(cfg.seed, 0xF00D));
    ChannelVector h =
        sample_channel(scenario.users.cov(0, BaseStation::PBS), crng);
    ReceivedBlock y = received_uplink(h, {}, s, 0.0, crng);
    check((matched_filter(y, s).entries - h.entries).norm() < 1e-12,
          "noiseless matched-filter round trip");

    if (failures == 0) {
        out << "all invariants hold (" << scenario.users.covariances.size()
            << " covariances checked)\n";
        return kExitOk;
    }
    out << failures << " invariant check(s) failed\n";
    return kExitNumerical;
}

int do_oracle(const ScenarioConfig& cfg, std::ostream& out) {
    Rng rng(derive_seed(cfg.seed, 0xD201));
    Scenario scenario = build_scenario(cfg, rng);
    const double snr_db = cfg.snr_grid_db.front();
    const double noise_var = cfg.pilot_power() / std::pow(10.0, snr_db / 10.0);
    const int eff_tau = static_cast<int>(std::lround(cfg.pilot_power()));

    Rng arng(derive_seed(cfg.seed, 0xA110C, 0, 0));
    Allocation allocation =
        run_allocator(scenario, cfg, cfg.allocators.front(), noise_var, arng);

    const UserSet& users = scenario.users;
    const auto& r_pp = users.cov(users.primary_user, BaseStation::PBS);
    const auto& r_ps = users.cov(users.primary_user, BaseStation::CBS);
    CMatrix sp_sum = CMatrix::Zero(scenario.num_antennas, scenario.num_antennas);
    CMatrix ss_sum = CMatrix::Zero(scenario.num_antennas, scenario.num_antennas);
    std::vector<CovarianceMatrix> targets;
    for (int jj : allocation.shared_set) {
        sp_sum += users.cov(jj, BaseStation::PBS).entries;
        ss_sum += users.cov(jj, BaseStation::CBS).entries;
        targets.push_back(users.cov(jj, BaseStation::CBS));
    }
    const CovarianceMatrix sp_total{sp_sum, 1.0};

    bool bad = false;
    for (EstimatorKind kind : cfg.estimators) {
        TrialEngine engine(scenario, allocation, kind, snr_db, cfg.cmmse);
        double sum_p = 0.0, sum_c = 0.0;
        for (long t = 0; t < cfg.trials; ++t) {
            Rng trng(derive_seed(cfg.seed, 0x04ac1e, static_cast<int>(kind), t));
            TrialResult r = engine.run(trng);
            sum_p += r.primary_sq_err;
            sum_c += r.cognitive_sq_err;
        }
        double emp_p = sum_p / cfg.trials;
        double emp_c = sum_c / cfg.trials;

        double ana_p;
        if (kind == EstimatorKind::MMSE) {
            ana_p = analytic_mse_primary(r_pp, sp_total, noise_var, eff_tau);
        } else if (kind == EstimatorKind::NMMSE) {
            ana_p = analytic_mse_of_filter(nmmse_filter(r_pp, noise_var, eff_tau), r_pp,
                                           sp_total, noise_var, eff_tau);
        } else {
            ana_p = analytic_mse_of_filter(
                cmmse_filter(r_pp, sp_total, noise_var, eff_tau, *cfg.cmmse), r_pp,
                sp_total, noise_var, eff_tau);
        }

        double ana_c = 0.0;
        if (kind == EstimatorKind::NMMSE) {
            for (int jj : allocation.shared_set) {
                const auto& r_ss = users.cov(jj, BaseStation::CBS);
                CovarianceMatrix interf{r_ps.entries + ss_sum - r_ss.entries, 1.0};
                ana_c += analytic_mse_of_filter(nmmse_filter(r_ss, noise_var, eff_tau),
                                                r_ss, interf, noise_var, eff_tau);
            }
        } else {
            ana_c = analytic_mse_cognitive(targets, r_ps, noise_var, eff_tau);
        }

        double rel_p = ana_p > 0.0 ? std::abs(emp_p - ana_p) / ana_p : 0.0;
        double rel_c = ana_c > 0.0 ? std::abs(emp_c - ana_c) / ana_c : 0.0;
        out << to_string(kind) << ": primary rel err=" << rel_p
            << " cognitive rel err=" << rel_c << " (trials=" << cfg.trials << ")\n";
        if (rel_p > 0.05 || rel_c > 0.05) bad = true;
    }
    if (bad) {
        out << "oracle mismatch beyond 5% relative\n";
        return kExitNumerical;
    }
    return kExitOk;
}

}  // namespace

int run(const CliCommand& cmd, std::ostream& out, std::ostream& err) {
    try {
        ScenarioConfig cfg = load_config(cmd);
        if (cmd.verb == "sweep") return do_sweep(cmd, cfg, out);
        if (cmd.verb == "allocate") return do_allocate(cfg, out);
        if (cmd.verb == "validate") return do_validate(cfg, out);
        if (cmd.verb == "oracle") return do_oracle(cfg, out);
        throw UsageError("unknown verb '" + cmd.verb + "'");
    } catch (const UsageError&) {
        throw;
    } catch (const ConvergenceError& e) {
        err << "convergence failure: " << e.what() << " (bracket [" << e.bracket_lo << ", "
            << e.bracket_hi << "])\n";
        return kExitNumerical;
    } catch (const NumericalDomainError& e) {
        err << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const std::runtime_error& e) {
        err << "error: " << e.what() << '\n';
        return kExitNumerical;
    }
}

int main_entry(int argc, const char* const* argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        CliCommand cmd = parse_args(args);
        return run(cmd, std::cout, std::cerr);
    } catch (const UsageError& e) {
        std::cerr << e.what() << '\n';
        return kExitUsage;
    }
}

}  // namespace cogpilot::cli
