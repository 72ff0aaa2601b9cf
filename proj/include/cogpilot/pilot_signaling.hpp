// SPDX-License-Identifier: Apache-2.0
//
// Pilot sequences, the Kronecker training matrix and the uplink
// training observation, plus compression to the matched-filter domain.
#pragma once

#include "cogpilot/channel_model.hpp"
#include "cogpilot/types.hpp"

namespace cogpilot {

enum class PilotKind { Constant, UnitModulusChirp };

struct PilotSequence {
    CVector symbols;      // length tau, each |s_j|^2 = total_power / tau
    double total_power = 1.0;

    int tau() const { return static_cast<int>(symbols.size()); }
};

struct TrainingMatrix {
    CMatrix block;        // (M*tau) x M, equals s (x) I_M
    double total_power = 1.0;

    int num_antennas() const { return static_cast<int>(block.cols()); }
    int tau() const { return static_cast<int>(block.rows() / block.cols()); }
};

struct ReceivedBlock {
    CVector samples;      // length M*tau
    double noise_var = 0.0;
};

PilotSequence make_pilot(int tau, double total_power, PilotKind kind);

// S = s (x) I_M; S^H S = total_power * I_M.
TrainingMatrix training_matrix(const PilotSequence& s, int num_antennas);

// y = S (target + sum of contaminators) + n, n iid CN(0, noise_var).
ReceivedBlock received_uplink(const ChannelVector& target,
                              const std::vector<ChannelVector>& contaminators,
                              const TrainingMatrix& s, double noise_var, Rng& rng);

// z = S^H y / P_t: the M-dimensional sufficient statistic. Effective
// noise on z is CN(0, (noise_var / P_t) I).
ChannelVector matched_filter(const ReceivedBlock& y, const TrainingMatrix& s);

}  // namespace cogpilot
