// SPDX-License-Identifier: Apache-2.0

#include "cogpilot/channel_model.hpp"

#include <cmath>
#include <numbers>

namespace cogpilot {

double AngularProfile::omega_bar() const {
    return 2.0 * std::numbers::pi * spacing * std::sin(theta);
}

void AngularProfile::validate() const {
    if (delta_omega < 0.0) throw std::invalid_argument("AngularProfile: delta_omega < 0");
    if (spacing <= 0.0) throw std::invalid_argument("AngularProfile: spacing <= 0");
    if (theta < -std::numbers::pi / 2 || theta > std::numbers::pi / 2)
        throw std::invalid_argument("AngularProfile: theta outside [-pi/2, pi/2]");
}

bool CovarianceMatrix::is_hermitian(double tol) const {
    return (entries - entries.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

bool CovarianceMatrix::is_psd(double tol) const {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(entries, Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();
    double lmax = std::max(ev.maxCoeff(), 0.0);
    return ev.minCoeff() >= -tol * std::max(lmax, 1.0);
}

CVector steering_vector(double omega, int num_antennas) {
    if (num_antennas < 1) throw std::invalid_argument("steering_vector: M must be >= 1");
    CVector a(num_antennas);
    for (int k = 0; k < num_antennas; ++k)
        a(k) = std::polar(1.0, -static_cast<double>(k) * omega);
    a(0) = 1.0;
    return a;
}

namespace {

double spread_correlation(int lag, const AngularProfile& p) {
    if (lag == 0) return 1.0;
    if (p.law == SpreadLaw::UniformSpread) {
        double x = static_cast<double>(lag) * p.delta_omega;
        return x == 0.0 ? 1.0 : std::sin(x) / x;
    }
    double x = static_cast<double>(lag) * p.sigma_omega();
    return std::exp(-0.5 * x * x);
}

}  // namespace

CovarianceMatrix spread_covariance(const AngularProfile& profile, int num_antennas) {
    profile.validate();
    if (num_antennas < 1) throw std::invalid_argument("spread_covariance: M must be >= 1");

    const CVector a = steering_vector(profile.omega_bar(), num_antennas);
    CMatrix r(num_antennas, num_antennas);
    for (int m = 0; m < num_antennas; ++m) {
        for (int n = 0; n < num_antennas; ++n) {
            r(m, n) = a(m) * std::conj(a(n)) * spread_correlation(m - n, profile);
        }
    }
    // Symmetrize away rounding asymmetry from the phase products.
    CovarianceMatrix cov{0.5 * (r + r.adjoint().eval()), 1.0};
    cov.entries.diagonal().setOnes();
    return cov;
}

ChannelVector sample_channel(const CovarianceMatrix& cov, Rng& rng) {
    const Eigen::Index m = cov.dim();
    Eigen::SelfAdjointEigenSolver<CMatrix> es(cov.attenuation * cov.entries);
    const Eigen::VectorXd ev = es.eigenvalues();
    double lmax = std::max(ev.maxCoeff(), 0.0);
    if (ev.minCoeff() < -1e-8 * std::max(lmax, 1.0))
        throw NumericalDomainError("sample_channel: covariance is not PSD");

    CVector scaled = standard_cn_vector(m, rng);
    for (Eigen::Index i = 0; i < m; ++i)
        scaled(i) *= std::sqrt(std::max(ev(i), 0.0));
    return ChannelVector{es.eigenvectors() * scaled};
}

ChannelVector multipath_channel(const AngularProfile& profile, int num_antennas,
                                int num_paths, Rng& rng) {
    profile.validate();
    if (num_antennas < 1) throw std::invalid_argument("multipath_channel: M must be >= 1");
    if (num_paths < 1) throw std::invalid_argument("multipath_channel: Q must be >= 1");

    const double wbar = profile.omega_bar();
    CVector h = CVector::Zero(num_antennas);
    const double gain_scale = 1.0 / std::sqrt(static_cast<double>(num_paths));
    for (int i = 0; i < num_paths; ++i) {
        cdouble gain = gain_scale * standard_cn(rng);
        double omega;
        if (profile.law == SpreadLaw::UniformSpread) {
            std::uniform_real_distribution<double> u(wbar - profile.delta_omega,
                                                     wbar + profile.delta_omega);
            omega = profile.delta_omega == 0.0 ? wbar : u(rng);
        } else {
            std::normal_distribution<double> n(wbar, profile.sigma_omega());
            omega = profile.sigma_omega() == 0.0 ? wbar : n(rng);
        }
        h += gain * steering_vector(omega, num_antennas);
    }
    return ChannelVector{std::move(h)};
}

double effective_rank_fraction(const CovarianceMatrix& cov, double energy_threshold) {
    if (energy_threshold <= 0.0 || energy_threshold >= 1.0)
        throw std::invalid_argument("effective_rank_fraction: threshold must be in (0,1)");
    Eigen::SelfAdjointEigenSolver<CMatrix> es(cov.entries, Eigen::EigenvaluesOnly);
    Eigen::VectorXd ev = es.eigenvalues().reverse();
    double total = ev.sum();
    if (total <= 0.0) return 0.0;
    double acc = 0.0;
    Eigen::Index k = 0;
    while (k < ev.size() && acc < energy_threshold * total) {
        acc += std::max(ev(k), 0.0);
        ++k;
    }
    return static_cast<double>(k) / static_cast<double>(ev.size());
}

}  // namespace cogpilot
