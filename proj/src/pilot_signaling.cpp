// SPDX-License-Identifier: Apache-2.0

#include "cogpilot/pilot_signaling.hpp"

#include <cmath>
#include <numbers>

namespace cogpilot {

PilotSequence make_pilot(int tau, double total_power, PilotKind kind) {
    if (tau < 1) throw std::invalid_argument("make_pilot: tau must be >= 1");
    if (total_power <= 0.0) throw std::invalid_argument("make_pilot: total_power must be > 0");

    const double amp = std::sqrt(total_power / tau);
    CVector s(tau);
    for (int j = 0; j < tau; ++j) {
        if (kind == PilotKind::Constant) {
            s(j) = amp;
        } else {
            // Zadoff-Chu-like quadratic-phase chirp, unit modulus.
            double phase = std::numbers::pi * static_cast<double>(j) * (j + 1) / tau;
            s(j) = amp * std::polar(1.0, -phase);
        }
    }
    return PilotSequence{std::move(s), total_power};
}

TrainingMatrix training_matrix(const PilotSequence& s, int num_antennas) {
    if (num_antennas < 1) throw std::invalid_argument("training_matrix: M must be >= 1");
    const int tau = s.tau();
    CMatrix block = CMatrix::Zero(static_cast<Eigen::Index>(num_antennas) * tau, num_antennas);
    for (int j = 0; j < tau; ++j)
        block.block(static_cast<Eigen::Index>(j) * num_antennas, 0, num_antennas, num_antennas) =
            s.symbols(j) * CMatrix::Identity(num_antennas, num_antennas);
    return TrainingMatrix{std::move(block), s.total_power};
}

ReceivedBlock received_uplink(const ChannelVector& target,
                              const std::vector<ChannelVector>& contaminators,
                              const TrainingMatrix& s, double noise_var, Rng& rng) {
    const int m = s.num_antennas();
    if (target.dim() != m)
        throw std::invalid_argument("received_uplink: target dimension mismatch");
    if (noise_var < 0.0) throw std::invalid_argument("received_uplink: noise_var < 0");

    CVector sum = target.entries;
    for (const auto& c : contaminators) {
        if (c.dim() != m)
            throw std::invalid_argument("received_uplink: contaminator dimension mismatch");
        sum += c.entries;
    }
    CVector y = s.block * sum;
    if (noise_var > 0.0)
        y += std::sqrt(noise_var) * standard_cn_vector(y.size(), rng);
    return ReceivedBlock{std::move(y), noise_var};
}

ChannelVector matched_filter(const ReceivedBlock& y, const TrainingMatrix& s) {
    if (y.samples.size() != s.block.rows())
        throw std::invalid_argument("matched_filter: dimension mismatch");
    return ChannelVector{(s.block.adjoint() * y.samples) / s.total_power};
}

}  // namespace cogpilot
