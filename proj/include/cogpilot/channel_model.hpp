// SPDX-License-Identifier: Apache-2.0
//
// Correlated ULA channel synthesis: steering vectors, angular-spread
// covariance matrices, Gaussian channel draws and a multipath sampler.
#pragma once

#include "cogpilot/types.hpp"

namespace cogpilot {

enum class SpreadLaw { GaussianSpread, UniformSpread };

// One user-to-BS link seen from the array: nominal angle of arrival,
// spread half-width in the electrical-angle (omega) domain, the spread
// law and the element spacing in wavelengths.
struct AngularProfile {
    double theta = 0.0;        // nominal angle of arrival, radians
    double delta_omega = 0.0;  // half-width of the omega-domain spread
    SpreadLaw law = SpreadLaw::UniformSpread;
    double spacing = 0.5;      // element spacing d in wavelengths

    // Gaussian law standard deviation; tied to delta_omega.
    double sigma_omega() const { return std::sqrt(3.0) * delta_omega; }
    // Electrical angle of the nominal direction.
    double omega_bar() const;

    void validate() const;
};

struct CovarianceMatrix {
    CMatrix entries;
    double attenuation = 1.0;

    Eigen::Index dim() const { return entries.rows(); }
    double trace_real() const { return entries.trace().real(); }

    bool is_hermitian(double tol = 1e-12) const;
    // All eigenvalues >= -tol * lambda_max.
    bool is_psd(double tol = 1e-10) const;
};

struct ChannelVector {
    CVector entries;
    Eigen::Index dim() const { return entries.size(); }
};

// a(omega), entry k = exp(-j k omega).
CVector steering_vector(double omega, int num_antennas);

// R = D_a B D_a^H with B from the profile's spread law. Unit diagonal,
// Hermitian PSD; delta_omega = 0 degenerates to the rank-1 a a^H.
CovarianceMatrix spread_covariance(const AngularProfile& profile, int num_antennas);

// Draw h ~ CN(0, attenuation * R) via an eigendecomposition square root
// with negative-eigenvalue clipping, so rank-deficient R samples fine.
ChannelVector sample_channel(const CovarianceMatrix& cov, Rng& rng);

// Sum of Q discrete paths, gains iid CN(0, 1/Q), angles drawn from the
// profile's law in the omega domain. Generative counterpart of
// spread_covariance.
ChannelVector multipath_channel(const AngularProfile& profile, int num_antennas,
                                int num_paths, Rng& rng);

// (smallest count of leading eigenvalues capturing energy_threshold of
// the trace) / M.
double effective_rank_fraction(const CovarianceMatrix& cov, double energy_threshold);

}  // namespace cogpilot
