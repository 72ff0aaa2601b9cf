// SPDX-License-Identifier: Apache-2.0

#include "cogpilot/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <ostream>
#include <thread>

namespace cogpilot {

namespace {

constexpr double kSectorSpanDeg = 120.0;

double deg2rad(double d) { return d * std::numbers::pi / 180.0; }

// Eigen-based square root factor with negative-eigenvalue clipping.
CMatrix sqrt_factor(const CovarianceMatrix& cov) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(cov.attenuation * cov.entries);
    const Eigen::VectorXd ev = es.eigenvalues();
    double lmax = std::max(ev.maxCoeff(), 0.0);
    if (ev.minCoeff() < -1e-8 * std::max(lmax, 1.0))
        throw NumericalDomainError("sqrt_factor: covariance is not PSD");
    CMatrix l = es.eigenvectors();
    for (Eigen::Index i = 0; i < ev.size(); ++i)
        l.col(i) *= std::sqrt(std::max(ev(i), 0.0));
    return l;
}

CovarianceMatrix scaled(const CovarianceMatrix& cov) {
    return CovarianceMatrix{cov.attenuation * cov.entries, 1.0};
}

}  // namespace

void ScenarioConfig::validate() const {
    if (num_antennas < 1) throw std::invalid_argument("config: M must be >= 1");
    if (num_cognitive_users < 1)
        throw std::invalid_argument("config: num_cognitive_users must be >= 1");
    if (reuse_count < 0 || reuse_count > num_cognitive_users)
        throw std::invalid_argument("config: reuse_count out of range");
    if (tau < 1) throw std::invalid_argument("config: tau must be >= 1");
    if (trials < 1) throw std::invalid_argument("config: trials must be >= 1");
    if (snr_grid_db.empty()) throw std::invalid_argument("config: snr_grid_db is empty");
    if (estimators.empty() || allocators.empty())
        throw std::invalid_argument("config: estimator/allocator lists are empty");
    if (workers < 1) throw std::invalid_argument("config: workers must be >= 1");
    if (num_groups < 2) throw std::invalid_argument("config: num_groups must be >= 2");
    if (sector_width_deg <= 0.0 || sector_width_deg > kSectorSpanDeg ||
        sector_overlap_deg < 0.0 || sector_overlap_deg > sector_width_deg)
        throw std::invalid_argument("config: sector packing infeasible");
    if (cmmse) cmmse->validate();
    if (std::find(estimators.begin(), estimators.end(), EstimatorKind::CMMSE) !=
            estimators.end() &&
        !cmmse)
        throw std::invalid_argument("config: CMMSE estimator requires a cmmse block");
}

std::string to_string(Allocator a) {
    switch (a) {
        case Allocator::RPA: return "RPA";
        case Allocator::MPA: return "MPA";
        case Allocator::HPA: return "HPA";
        case Allocator::UGPA: return "UGPA";
    }
    return "?";
}

std::string to_string(EstimatorKind e) {
    switch (e) {
        case EstimatorKind::NMMSE: return "NMMSE";
        case EstimatorKind::MMSE: return "MMSE";
        case EstimatorKind::CMMSE: return "CMMSE";
    }
    return "?";
}

std::string to_string(SpreadLaw law) {
    return law == SpreadLaw::UniformSpread ? "uniform" : "gaussian";
}

Allocator allocator_from_string(const std::string& s) {
    if (s == "RPA") return Allocator::RPA;
    if (s == "MPA") return Allocator::MPA;
    if (s == "HPA") return Allocator::HPA;
    if (s == "UGPA") return Allocator::UGPA;
    throw std::invalid_argument("unknown allocator: " + s);
}

EstimatorKind estimator_from_string(const std::string& s) {
    if (s == "NMMSE") return EstimatorKind::NMMSE;
    if (s == "MMSE") return EstimatorKind::MMSE;
    if (s == "CMMSE") return EstimatorKind::CMMSE;
    throw std::invalid_argument("unknown estimator: " + s);
}

SpreadLaw spread_law_from_string(const std::string& s) {
    if (s == "uniform") return SpreadLaw::UniformSpread;
    if (s == "gaussian") return SpreadLaw::GaussianSpread;
    throw std::invalid_argument("unknown spread_law: " + s);
}

nlohmann::json to_json(const ScenarioConfig& cfg) {
    nlohmann::json j;
    j["M"] = cfg.num_antennas;
    j["num_cognitive_users"] = cfg.num_cognitive_users;
    j["reuse_count"] = cfg.reuse_count;
    j["tau"] = cfg.tau;
    j["total_pilot_power"] = cfg.total_pilot_power;
    j["spread_law"] = to_string(cfg.spread_law);
    j["spacing"] = cfg.spacing;
    j["sector_width_deg"] = cfg.sector_width_deg;
    j["sector_overlap_deg"] = cfg.sector_overlap_deg;
    j["snr_grid_db"] = cfg.snr_grid_db;
    j["trials"] = cfg.trials;
    j["seed"] = cfg.seed;
    {
        nlohmann::json arr = nlohmann::json::array();
        for (auto e : cfg.estimators) arr.push_back(to_string(e));
        j["estimator"] = arr;
    }
    {
        nlohmann::json arr = nlohmann::json::array();
        for (auto a : cfg.allocators) arr.push_back(to_string(a));
        j["allocator"] = arr;
    }
    if (cfg.cmmse) {
        j["cmmse"] = {{"contamination_threshold", cfg.cmmse->contamination_threshold},
                      {"filter_power_budget", cfg.cmmse->filter_power_budget},
                      {"multiplier_tolerance", cfg.cmmse->multiplier_tolerance},
                      {"max_bisection_iters", cfg.cmmse->max_bisection_iters}};
    }
    j["mpa_zeta_th"] = cfg.mpa_zeta_th;
    j["hpa_delta_p"] = cfg.hpa_delta_p;
    j["fixed_drop"] = cfg.fixed_drop;
    j["workers"] = cfg.workers;
    j["num_groups"] = cfg.num_groups;
    j["max_group_rank"] = cfg.max_group_rank;
    return j;
}

ScenarioConfig config_from_json(const nlohmann::json& j) {
    ScenarioConfig cfg;
    auto names = [](const nlohmann::json& v) {
        std::vector<std::string> out;
        if (v.is_string()) {
            out.push_back(v.get<std::string>());
        } else {
            for (const auto& e : v) out.push_back(e.get<std::string>());
        }
        return out;
    };
    for (const auto& [key, value] : j.items()) {
        if (key == "M") cfg.num_antennas = value.get<int>();
        else if (key == "num_cognitive_users") cfg.num_cognitive_users = value.get<int>();
        else if (key == "reuse_count") cfg.reuse_count = value.get<int>();
        else if (key == "tau") cfg.tau = value.get<int>();
        else if (key == "total_pilot_power") cfg.total_pilot_power = value.get<double>();
        else if (key == "spread_law") cfg.spread_law = spread_law_from_string(value.get<std::string>());
        else if (key == "spacing") cfg.spacing = value.get<double>();
        else if (key == "sector_width_deg") cfg.sector_width_deg = value.get<double>();
        else if (key == "sector_overlap_deg") cfg.sector_overlap_deg = value.get<double>();
        else if (key == "snr_grid_db") cfg.snr_grid_db = value.get<std::vector<double>>();
        else if (key == "trials") cfg.trials = value.get<long>();
        else if (key == "seed") cfg.seed = value.get<std::uint64_t>();
        else if (key == "estimator") {
            cfg.estimators.clear();
            for (const auto& n : names(value)) cfg.estimators.push_back(estimator_from_string(n));
        } else if (key == "allocator") {
            cfg.allocators.clear();
            for (const auto& n : names(value)) cfg.allocators.push_back(allocator_from_string(n));
        } else if (key == "cmmse") {
            CmmseConfig c;
            c.contamination_threshold = value.at("contamination_threshold").get<double>();
            c.filter_power_budget = value.at("filter_power_budget").get<double>();
            if (value.contains("multiplier_tolerance"))
                c.multiplier_tolerance = value["multiplier_tolerance"].get<double>();
            if (value.contains("max_bisection_iters"))
                c.max_bisection_iters = value["max_bisection_iters"].get<int>();
            cfg.cmmse = c;
        }
        else if (key == "mpa_zeta_th") cfg.mpa_zeta_th = value.get<double>();
        else if (key == "hpa_delta_p") cfg.hpa_delta_p = value.get<double>();
        else if (key == "fixed_drop") cfg.fixed_drop = value.get<bool>();
        else if (key == "workers") cfg.workers = value.get<int>();
        else if (key == "num_groups") cfg.num_groups = value.get<int>();
        else if (key == "max_group_rank") cfg.max_group_rank = value.get<int>();
        else throw std::invalid_argument("config: unknown key '" + key + "'");
    }
    cfg.validate();
    return cfg;
}

Scenario build_scenario(const ScenarioConfig& cfg, Rng& rng) {
    cfg.validate();
    const double step_deg = cfg.sector_width_deg - cfg.sector_overlap_deg;
    const double half_width_rad = deg2rad(cfg.sector_width_deg / 2.0);
    const int total_users = cfg.num_cognitive_users + 1;

    Scenario sc;
    sc.num_antennas = cfg.num_antennas;
    sc.users.primary_user = 0;
    for (int u = 1; u <= cfg.num_cognitive_users; ++u)
        sc.users.cognitive_users.push_back(u);

    // One random assignment of users to consecutive sector slots (24
    // degree stride in the default geometry, wrapping around the 120
    // degree serving sector). The slot assignment encodes the users'
    // positions, so it is shared by both base stations; each station
    // sees the whole constellation through its own random offset.
    std::vector<int> order(total_users);
    for (int i = 0; i < total_users; ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);

    for (BaseStation bs : {BaseStation::PBS, BaseStation::CBS}) {
        std::uniform_real_distribution<double> u(-kSectorSpanDeg / 2.0, kSectorSpanDeg / 2.0);
        double start_deg = u(rng);

        for (int slot = 0; slot < total_users; ++slot) {
            double angle_deg = std::fmod(start_deg + kSectorSpanDeg / 2.0 + slot * step_deg,
                                         kSectorSpanDeg);
            if (angle_deg < 0.0) angle_deg += kSectorSpanDeg;
            angle_deg -= kSectorSpanDeg / 2.0;

            AngularProfile p;
            p.theta = deg2rad(angle_deg);
            p.spacing = cfg.spacing;
            p.law = cfg.spread_law;
            p.delta_omega = 2.0 * std::numbers::pi * cfg.spacing * std::cos(p.theta) *
                            half_width_rad;
            sc.users.covariances[{order[slot], bs}] =
                spread_covariance(p, cfg.num_antennas);
        }
    }

    sc.pilot = make_pilot(cfg.tau, cfg.pilot_power(), PilotKind::Constant);
    sc.training = training_matrix(sc.pilot, cfg.num_antennas);
    return sc;
}

TrialEngine::TrialEngine(const Scenario& scenario, const Allocation& allocation,
                         EstimatorKind kind, double snr_db,
                         const std::optional<CmmseConfig>& cmmse) {
    const UserSet& users = scenario.users;
    users.validate();
    num_antennas_ = scenario.num_antennas;
    pilot_power_ = scenario.pilot.total_power;
    noise_var_ = pilot_power_ / std::pow(10.0, snr_db / 10.0);
    // Estimator regularizers are written as sigma^2/tau with the default
    // unit-symbol-power pilot; with a general pilot the matched-filter
    // noise variance is sigma^2/P_t.
    const int eff_tau = static_cast<int>(std::lround(pilot_power_));

    const Eigen::Index m = num_antennas_;
    const auto& r_pp = users.cov(users.primary_user, BaseStation::PBS);
    const auto& r_ps = users.cov(users.primary_user, BaseStation::CBS);

    l_primary_ = sqrt_factor(r_pp);
    l_cross_ = sqrt_factor(r_ps);

    CMatrix sp_sum = CMatrix::Zero(m, m);
    CMatrix ss_sum = CMatrix::Zero(m, m);
    for (int j : allocation.shared_set) {
        const auto& r_sp = users.cov(j, BaseStation::PBS);
        const auto& r_ss = users.cov(j, BaseStation::CBS);
        l_contam_.push_back(sqrt_factor(r_sp));
        l_cognitive_.push_back(sqrt_factor(r_ss));
        sp_sum += r_sp.attenuation * r_sp.entries;
        ss_sum += r_ss.attenuation * r_ss.entries;
    }

    const CovarianceMatrix sp_total{sp_sum, 1.0};
    switch (kind) {
        case EstimatorKind::NMMSE:
            primary_filter_ = nmmse_filter(r_pp, noise_var_, eff_tau);
            break;
        case EstimatorKind::MMSE:
            primary_filter_ = mmse_filter(r_pp, sp_total, noise_var_, eff_tau);
            break;
        case EstimatorKind::CMMSE: {
            if (!cmmse) throw std::invalid_argument("TrialEngine: CMMSE needs a config");
            primary_filter_ = cmmse_filter(r_pp, sp_total, noise_var_, eff_tau, *cmmse);
            break;
        }
    }

    // CBS-side filters; the constrained variant protects the PBS only,
    // so the cognitive side falls back to the coordinated MMSE.
    for (std::size_t idx = 0; idx < allocation.shared_set.size(); ++idx) {
        int j = allocation.shared_set[idx];
        const auto& r_ss = users.cov(j, BaseStation::CBS);
        if (kind == EstimatorKind::NMMSE) {
            cognitive_filters_.push_back(nmmse_filter(r_ss, noise_var_, eff_tau));
        } else {
            CMatrix interf = r_ps.attenuation * r_ps.entries + ss_sum -
                             r_ss.attenuation * r_ss.entries;
            cognitive_filters_.push_back(
                mmse_filter(r_ss, CovarianceMatrix{interf, 1.0}, noise_var_, eff_tau));
        }
    }
}

TrialResult TrialEngine::run(Rng& rng) const {
    const Eigen::Index m = num_antennas_;
    const double mf_noise_sd = std::sqrt(noise_var_ / pilot_power_);

    TrialResult out;

    // PBS side, directly in the matched-filter domain.
    CVector h_pp = l_primary_ * standard_cn_vector(m, rng);
    CVector z_p = h_pp;
    for (const auto& l : l_contam_) z_p += l * standard_cn_vector(m, rng);
    z_p += mf_noise_sd * standard_cn_vector(m, rng);
    CVector est_p = estimate(primary_filter_, ChannelVector{z_p}).entries;
    out.primary_sq_err = (est_p - h_pp).squaredNorm();
    out.primary_norm_sq = h_pp.squaredNorm();

    // CBS side: one shared observation, per-user filters.
    CVector h_ps = l_cross_ * standard_cn_vector(m, rng);
    std::vector<CVector> h_ss;
    h_ss.reserve(l_cognitive_.size());
    CVector z_c = h_ps;
    for (const auto& l : l_cognitive_) {
        h_ss.push_back(l * standard_cn_vector(m, rng));
        z_c += h_ss.back();
    }
    z_c += mf_noise_sd * standard_cn_vector(m, rng);
    for (std::size_t i = 0; i < l_cognitive_.size(); ++i) {
        CVector est = cognitive_filters_[i].matrix * z_c;
        out.cognitive_sq_err += (est - h_ss[i]).squaredNorm();
        out.cognitive_norm_sq += h_ss[i].squaredNorm();
    }
    return out;
}

TrialResult run_trial(const Scenario& scenario, const Allocation& allocation,
                      EstimatorKind kind, double snr_db, Rng& rng,
                      const std::optional<CmmseConfig>& cmmse) {
    return TrialEngine(scenario, allocation, kind, snr_db, cmmse).run(rng);
}

Allocation run_allocator(const Scenario& scenario, const ScenarioConfig& cfg,
                         Allocator which, double noise_var, Rng& rng) {
    const int eff_tau = static_cast<int>(std::lround(cfg.pilot_power()));
    switch (which) {
        case Allocator::RPA:
            return allocate_rpa(scenario.users, cfg.reuse_count, rng);
        case Allocator::MPA:
            return allocate_mpa(scenario.users, cfg.reuse_count, cfg.mpa_zeta_th,
                                noise_var, eff_tau);
        case Allocator::HPA:
            return allocate_hpa(scenario.users, cfg.reuse_count, cfg.hpa_delta_p,
                                noise_var, eff_tau);
        case Allocator::UGPA: {
            // Virtual sectors: 2G candidate sector profiles across the
            // serving span, greedily thinned to G disjoint subspaces.
            const int g = cfg.num_groups;
            std::vector<AngularProfile> candidates;
            const double sector_deg = kSectorSpanDeg / g;
            for (int i = 0; i < 2 * g; ++i) {
                AngularProfile p;
                double center = -kSectorSpanDeg / 2.0 + (i + 0.5) * kSectorSpanDeg / (2.0 * g);
                p.theta = deg2rad(center);
                p.spacing = cfg.spacing;
                p.law = cfg.spread_law;
                p.delta_omega = 2.0 * std::numbers::pi * cfg.spacing * std::cos(p.theta) *
                                deg2rad(sector_deg / 2.0);
                candidates.push_back(p);
            }
            int rank = common_dominant_rank(scenario.users, 0.95, cfg.max_group_rank);
            auto subspaces = select_group_subspaces(candidates, cfg.num_antennas, g, rank);
            auto grouping = build_grouping(scenario.users, subspaces, subspaces, rank);
            return allocate_ugpa(scenario.users, grouping, cfg.reuse_count);
        }
    }
    throw std::invalid_argument("run_allocator: unknown allocator");
}

namespace {

struct Accumulated {
    double mean = 0.0;
    double stderr_of_mean = 0.0;
    long count = 0;
};

Accumulated reduce(const std::vector<double>& xs) {
    Accumulated a;
    a.count = static_cast<long>(xs.size());
    if (xs.empty()) return a;
    double sum = 0.0;
    for (double x : xs) sum += x;
    a.mean = sum / a.count;
    double ss = 0.0;
    for (double x : xs) ss += (x - a.mean) * (x - a.mean);
    double sd = a.count > 1 ? std::sqrt(ss / (a.count - 1)) : 0.0;
    a.stderr_of_mean = sd / std::sqrt(static_cast<double>(a.count));
    return a;
}

double to_db(double linear) { return 10.0 * std::log10(linear); }

// Delta-method standard error of 10*log10(mean).
double stderr_db(const Accumulated& a) {
    if (a.mean <= 0.0) return 0.0;
    return 10.0 / std::log(10.0) * a.stderr_of_mean / a.mean;
}

}  // namespace

MseReport sweep(const ScenarioConfig& cfg) {
    cfg.validate();

    MseReport report;
    report.provenance = {{"config", to_json(cfg)}, {"seed", cfg.seed}, {"version", kVersion}};

    Rng drop_rng(derive_seed(cfg.seed, 0xD201));
    Scenario fixed = build_scenario(cfg, drop_rng);

    for (std::size_t si = 0; si < cfg.snr_grid_db.size(); ++si) {
        const double snr_db = cfg.snr_grid_db[si];
        Scenario local;
        const Scenario* scenario = &fixed;
        if (!cfg.fixed_drop) {
            Rng r(derive_seed(cfg.seed, 0xD201, si + 1));
            local = build_scenario(cfg, r);
            scenario = &local;
        }
        const double noise_var = cfg.pilot_power() / std::pow(10.0, snr_db / 10.0);

        for (std::size_t ai = 0; ai < cfg.allocators.size(); ++ai) {
            Rng alloc_rng(derive_seed(cfg.seed, 0xA110C, si, ai));
            Allocation allocation =
                run_allocator(*scenario, cfg, cfg.allocators[ai], noise_var, alloc_rng);

            for (std::size_t ei = 0; ei < cfg.estimators.size(); ++ei) {
                TrialEngine engine(*scenario, allocation, cfg.estimators[ei], snr_db,
                                   cfg.cmmse);

                std::vector<TrialResult> results(cfg.trials);
                auto worker = [&](long begin, long end) {
                    for (long t = begin; t < end; ++t) {
                        Rng rng(derive_seed(cfg.seed, 0x7121A1 + si,
                                            ai * 16 + ei, static_cast<std::uint64_t>(t)));
                        results[t] = engine.run(rng);
                    }
                };
                const int nw = std::min<long>(cfg.workers, cfg.trials);
                if (nw <= 1) {
                    worker(0, cfg.trials);
                } else {
                    std::vector<std::thread> pool;
                    long chunk = (cfg.trials + nw - 1) / nw;
                    for (int w = 0; w < nw; ++w)
                        pool.emplace_back(worker, w * chunk,
                                          std::min<long>((w + 1) * chunk, cfg.trials));
                    for (auto& t : pool) t.join();
                }

                std::vector<double> ratio_p, ratio_c;
                ratio_p.reserve(results.size());
                for (const auto& r : results) {
                    if (r.primary_norm_sq > 0.0)
                        ratio_p.push_back(r.primary_sq_err / r.primary_norm_sq);
                    if (r.cognitive_norm_sq > 0.0)
                        ratio_c.push_back(r.cognitive_sq_err / r.cognitive_norm_sq);
                }
                Accumulated ap = reduce(ratio_p);
                Accumulated ac = reduce(ratio_c);

                MseCell cell;
                cell.snr_db = snr_db;
                cell.allocator = cfg.allocators[ai];
                cell.estimator = cfg.estimators[ei];
                cell.trials = cfg.trials;
                cell.primary_mse_db = ap.count > 0 ? to_db(ap.mean) : 0.0;
                cell.cognitive_mse_db = ac.count > 0 ? to_db(ac.mean) : 0.0;
                cell.stderr_primary = stderr_db(ap);
                cell.stderr_cognitive = stderr_db(ac);
                report.cells.push_back(cell);
            }
        }
    }
    return report;
}

namespace {

std::string fmt9(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", x);
    return buf;
}

}  // namespace

void write_report(const MseReport& report, std::ostream& out, ReportFormat format) {
    if (format == ReportFormat::CSV) {
        out << "snr_db,allocator,estimator,primary_mse_db,cognitive_mse_db,"
               "trials,stderr_primary,stderr_cognitive\n";
        for (const auto& c : report.cells) {
            out << fmt9(c.snr_db) << ',' << to_string(c.allocator) << ','
                << to_string(c.estimator) << ',' << fmt9(c.primary_mse_db) << ','
                << fmt9(c.cognitive_mse_db) << ',' << c.trials << ','
                << fmt9(c.stderr_primary) << ',' << fmt9(c.stderr_cognitive) << '\n';
        }
    } else {
        nlohmann::json j;
        j["provenance"] = report.provenance;
        j["cells"] = nlohmann::json::array();
        for (const auto& c : report.cells) {
            j["cells"].push_back({{"snr_db", c.snr_db},
                                  {"allocator", to_string(c.allocator)},
                                  {"estimator", to_string(c.estimator)},
                                  {"primary_mse_db", c.primary_mse_db},
                                  {"cognitive_mse_db", c.cognitive_mse_db},
                                  {"trials", c.trials},
                                  {"stderr_primary", c.stderr_primary},
                                  {"stderr_cognitive", c.stderr_cognitive}});
        }
        out << j.dump(2) << '\n';
    }
    if (!out) throw std::runtime_error("write_report: stream write failed");
}

void write_report(const MseReport& report, const std::string& path, ReportFormat format) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("write_report: cannot open " + path);
    write_report(report, f, format);
    if (!f) throw std::runtime_error("write_report: write failed for " + path);
}

}  // namespace cogpilot
