// SPDX-License-Identifier: Apache-2.0
//
// MMSE-family channel estimators in the matched-filter domain, their
// analytic MSE traces, and the interference-constrained variant solved
// by a one-dimensional multiplier bisection.
#pragma once

#include "cogpilot/channel_model.hpp"
#include "cogpilot/types.hpp"

namespace cogpilot {

enum class EstimatorKind { NMMSE, MMSE, CMMSE };

struct EstimatorFilter {
    CMatrix matrix;       // M x M, applied to the matched-filter observation
    double gamma = 1.0;   // power-normalization scale (CMMSE only)
    double zeta1 = 0.0;   // contamination multiplier
    double zeta2 = 0.0;   // regularization multiplier
    bool zeta2_floored = false;
    EstimatorKind kind = EstimatorKind::MMSE;
};

struct CmmseConfig {
    double contamination_threshold = 1.0;  // C_th
    double filter_power_budget = 1.0;      // P in tr(G G^H) <= P
    double multiplier_tolerance = 1e-8;
    int max_bisection_iters = 200;

    void validate() const;
};

// Interference-blind filter R (R + (sigma^2/tau) I)^-1.
EstimatorFilter nmmse_filter(const CovarianceMatrix& target, double noise_var, int tau);

// Coordinated filter R_t (R_t + R_sum + (sigma^2/tau) I)^-1.
EstimatorFilter mmse_filter(const CovarianceMatrix& target,
                            const CovarianceMatrix& interference_sum,
                            double noise_var, int tau);

// Contamination-constrained filter: the multiplier family
// gamma * R_t (R_t + z1 R_sum + z2(z1) I)^-1 with z1 found by bisection
// against the contamination constraint and gamma normalizing the filter
// power to the budget.
EstimatorFilter cmmse_filter(const CovarianceMatrix& target,
                             const CovarianceMatrix& interference_sum,
                             double noise_var, int tau, const CmmseConfig& cfg);

// h_hat = G z (NMMSE/MMSE) or gamma^-1 G z (CMMSE).
ChannelVector estimate(const EstimatorFilter& g, const ChannelVector& z);

double analytic_mse_primary(const CovarianceMatrix& target,
                            const CovarianceMatrix& interference_sum,
                            double noise_var, int tau);

// Sum over pilot-sharing cognitive users of their per-user MSE traces.
double analytic_mse_cognitive(const std::vector<CovarianceMatrix>& targets,
                              const CovarianceMatrix& primary_cross,
                              double noise_var, int tau);

double analytic_mse_cmmse(const CovarianceMatrix& target,
                          const CovarianceMatrix& interference_sum,
                          double zeta_star, double noise_var, int tau);

// Exact MSE of an arbitrary filter under the contaminated observation
// model: tr(R_t) - 2 Re tr(G_eff R_t) + tr(G_eff A G_eff^H) with
// A = R_t + R_sum + (sigma^2/tau) I. Reduces to analytic_mse_primary
// when the filter is the matching Wiener solution.
double analytic_mse_of_filter(const EstimatorFilter& g, const CovarianceMatrix& target,
                              const CovarianceMatrix& interference_sum,
                              double noise_var, int tau);

// tau * tr(G R_sum G^H): interference power leaked through the filter,
// expressed in the matched-filter domain.
double contamination_level(const EstimatorFilter& g,
                           const CovarianceMatrix& interference_sum, int tau);

}  // namespace cogpilot
