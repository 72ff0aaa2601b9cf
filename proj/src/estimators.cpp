// SPDX-License-Identifier: Apache-2.0

#include "cogpilot/estimators.hpp"

#include <cmath>

namespace cogpilot {

void CmmseConfig::validate() const {
    if (contamination_threshold <= 0.0 || filter_power_budget <= 0.0 ||
        multiplier_tolerance <= 0.0 || max_bisection_iters <= 0)
        throw std::invalid_argument("CmmseConfig: all fields must be positive");
}

namespace {

void check_dims(const CovarianceMatrix& a, const CovarianceMatrix& b, const char* who) {
    if (a.dim() != b.dim())
        throw std::invalid_argument(std::string(who) + ": covariance dimension mismatch");
}

// R_t (R_t + R_sum + reg I)^-1 via a Hermitian solve.
CMatrix wiener_matrix(const CMatrix& target, const CMatrix& interference, double reg) {
    const Eigen::Index m = target.rows();
    CMatrix a = target + interference + reg * CMatrix::Identity(m, m);
    return a.ldlt().solve(target.adjoint()).adjoint();
}

// tr(R_t - R_t^2 (R_t + R_sum + reg I)^-1), the MMSE error trace.
double error_trace(const CMatrix& target, const CMatrix& interference, double reg) {
    const Eigen::Index m = target.rows();
    CMatrix a = target + interference + reg * CMatrix::Identity(m, m);
    CMatrix x = a.ldlt().solve(target);  // A^-1 R_t
    return (target.trace() - (target * x).trace()).real();
}

double filter_power(const CMatrix& g) { return g.squaredNorm(); }

double raw_contamination(const CMatrix& g, const CMatrix& interference, int tau) {
    return static_cast<double>(tau) * (g * interference * g.adjoint()).trace().real();
}

}  // namespace

EstimatorFilter nmmse_filter(const CovarianceMatrix& target, double noise_var, int tau) {
    if (noise_var <= 0.0) throw std::invalid_argument("nmmse_filter: noise_var must be > 0");
    if (tau < 1) throw std::invalid_argument("nmmse_filter: tau must be >= 1");
    EstimatorFilter f;
    f.kind = EstimatorKind::NMMSE;
    f.matrix = wiener_matrix(target.attenuation * target.entries,
                             CMatrix::Zero(target.dim(), target.dim()), noise_var / tau);
    return f;
}

EstimatorFilter mmse_filter(const CovarianceMatrix& target,
                            const CovarianceMatrix& interference_sum,
                            double noise_var, int tau) {
    check_dims(target, interference_sum, "mmse_filter");
    if (noise_var <= 0.0) throw std::invalid_argument("mmse_filter: noise_var must be > 0");
    if (tau < 1) throw std::invalid_argument("mmse_filter: tau must be >= 1");
    EstimatorFilter f;
    f.kind = EstimatorKind::MMSE;
    f.matrix = wiener_matrix(target.attenuation * target.entries,
                             interference_sum.attenuation * interference_sum.entries,
                             noise_var / tau);
    return f;
}

EstimatorFilter cmmse_filter(const CovarianceMatrix& target,
                             const CovarianceMatrix& interference_sum,
                             double noise_var, int tau, const CmmseConfig& cfg) {
    check_dims(target, interference_sum, "cmmse_filter");
    if (noise_var <= 0.0) throw std::invalid_argument("cmmse_filter: noise_var must be > 0");
    if (tau < 1) throw std::invalid_argument("cmmse_filter: tau must be >= 1");
    cfg.validate();

    const Eigen::Index m = target.dim();
    const CMatrix rt = target.attenuation * target.entries;
    const CMatrix rs = interference_sum.attenuation * interference_sum.entries;
    const double cth = cfg.contamination_threshold;
    const double budget = cfg.filter_power_budget;
    const double zeta2_floor = 1e-8 * std::max(rt.trace().real(), 0.0) / static_cast<double>(m);

    bool floored = false;
    auto zeta2_of = [&](double z1) {
        double z2 = (static_cast<double>(m) * noise_var - 2.0 * cth * z1) /
                    (noise_var * tau * budget);
        if (z2 < zeta2_floor) {
            floored = true;
            return zeta2_floor;
        }
        return z2;
    };
    auto unscaled = [&](double z1) { return wiener_matrix(rt, z1 * rs, zeta2_of(z1)); };
    // Contamination of the power-normalized filter gamma * G0.
    auto scaled_contamination = [&](const CMatrix& g0) {
        double pw = filter_power(g0);
        if (pw == 0.0) return 0.0;
        return budget / pw * raw_contamination(g0, rs, tau);
    };

    auto finish = [&](double z1, const CMatrix& g0) {
        EstimatorFilter f;
        f.kind = EstimatorKind::CMMSE;
        f.zeta1 = z1;
        f.zeta2 = zeta2_of(z1);
        f.zeta2_floored = floored;
        double pw = filter_power(g0);
        f.gamma = pw > 0.0 ? std::sqrt(budget / pw) : 1.0;
        f.matrix = f.gamma * g0;
        return f;
    };

    CMatrix g0 = unscaled(0.0);
    if (scaled_contamination(g0) <= cth) return finish(0.0, g0);

    // Expand the upper bracket until it becomes feasible.
    double lo = 0.0;
    double hi = 1.0;
    CMatrix ghi = unscaled(hi);
    int doublings = 0;
    while (scaled_contamination(ghi) > cth) {
        if (++doublings > 64)
            throw ConvergenceError("cmmse_filter: no feasible multiplier found", lo, hi);
        lo = hi;
        hi *= 2.0;
        ghi = unscaled(hi);
    }

    int iters = 0;
    while (hi - lo > cfg.multiplier_tolerance * std::max(hi, 1.0)) {
        if (++iters > cfg.max_bisection_iters)
            throw ConvergenceError("cmmse_filter: bisection did not converge", lo, hi);
        double mid = 0.5 * (lo + hi);
        CMatrix gm = unscaled(mid);
        if (scaled_contamination(gm) <= cth) {
            hi = mid;
            ghi = std::move(gm);
        } else {
            lo = mid;
        }
    }
    return finish(hi, ghi);
}

ChannelVector estimate(const EstimatorFilter& g, const ChannelVector& z) {
    if (g.matrix.cols() != z.dim())
        throw std::invalid_argument("estimate: dimension mismatch");
    CVector h = g.matrix * z.entries;
    if (g.kind == EstimatorKind::CMMSE) h /= g.gamma;
    return ChannelVector{std::move(h)};
}

double analytic_mse_primary(const CovarianceMatrix& target,
                            const CovarianceMatrix& interference_sum,
                            double noise_var, int tau) {
    check_dims(target, interference_sum, "analytic_mse_primary");
    return error_trace(target.attenuation * target.entries,
                       interference_sum.attenuation * interference_sum.entries,
                       noise_var / tau);
}

double analytic_mse_cognitive(const std::vector<CovarianceMatrix>& targets,
                              const CovarianceMatrix& primary_cross,
                              double noise_var, int tau) {
    if (targets.empty()) return 0.0;
    const Eigen::Index m = primary_cross.dim();
    CMatrix pool = primary_cross.attenuation * primary_cross.entries;
    for (const auto& t : targets) {
        check_dims(t, primary_cross, "analytic_mse_cognitive");
        pool += t.attenuation * t.entries;
    }
    double total = 0.0;
    for (const auto& t : targets) {
        CMatrix rt = t.attenuation * t.entries;
        total += error_trace(rt, pool - rt, noise_var / tau);
    }
    return total;
}

double analytic_mse_cmmse(const CovarianceMatrix& target,
                          const CovarianceMatrix& interference_sum,
                          double zeta_star, double noise_var, int tau) {
    check_dims(target, interference_sum, "analytic_mse_cmmse");
    if (zeta_star < 0.0) throw std::invalid_argument("analytic_mse_cmmse: zeta_star < 0");
    return error_trace(target.attenuation * target.entries,
                       zeta_star * interference_sum.attenuation * interference_sum.entries,
                       noise_var / tau);
}

double analytic_mse_of_filter(const EstimatorFilter& g, const CovarianceMatrix& target,
                              const CovarianceMatrix& interference_sum,
                              double noise_var, int tau) {
    check_dims(target, interference_sum, "analytic_mse_of_filter");
    if (g.matrix.cols() != target.dim())
        throw std::invalid_argument("analytic_mse_of_filter: dimension mismatch");
    const Eigen::Index m = target.dim();
    CMatrix geff = g.matrix;
    if (g.kind == EstimatorKind::CMMSE) geff /= g.gamma;
    CMatrix rt = target.attenuation * target.entries;
    CMatrix a = rt + interference_sum.attenuation * interference_sum.entries +
                (noise_var / tau) * CMatrix::Identity(m, m);
    double mse = rt.trace().real();
    mse -= 2.0 * (geff * rt).trace().real();
    mse += (geff * a * geff.adjoint()).trace().real();
    return mse;
}

double contamination_level(const EstimatorFilter& g,
                           const CovarianceMatrix& interference_sum, int tau) {
    if (g.matrix.cols() != interference_sum.dim())
        throw std::invalid_argument("contamination_level: dimension mismatch");
    return raw_contamination(g.matrix,
                             interference_sum.attenuation * interference_sum.entries, tau);
}

}  // namespace cogpilot
