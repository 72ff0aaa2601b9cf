// SPDX-License-Identifier: Apache-2.0
//
// Subspace-overlap metrics, chordal-distance user grouping and the four
// pilot-allocation algorithms (RPA, MPA, HPA, UGPA).
#pragma once

#include <map>
#include <string>
#include <vector>

#include "cogpilot/channel_model.hpp"
#include "cogpilot/estimators.hpp"
#include "cogpilot/types.hpp"

namespace cogpilot {

enum class BaseStation { PBS, CBS };
enum class Allocator { RPA, MPA, HPA, UGPA };

struct UserSet {
    int primary_user = 0;
    std::vector<int> cognitive_users;
    // (user, base station) -> covariance of that link
    std::map<std::pair<int, BaseStation>, CovarianceMatrix> covariances;

    const CovarianceMatrix& cov(int user, BaseStation bs) const;
    void validate() const;
    Eigen::Index dim() const;
};

struct AllocationStep {
    int user = -1;
    double metric = 0.0;
};

struct Allocation {
    std::vector<int> shared_set;  // CUs assigned the PU's pilot, in pick order
    Allocator algorithm = Allocator::RPA;
    std::vector<AllocationStep> diagnostics;
    std::vector<std::string> notes;
};

struct GroupingResult {
    // group id -> cognitive users, per side
    std::map<int, std::vector<int>> groups_sp;
    std::map<int, std::vector<int>> groups_ss;
    std::vector<CMatrix> subspaces_sp;  // orthonormal M x r, indexed by group id
    std::vector<CMatrix> subspaces_ss;
    int rank = 1;
};

// tr(R_a R_b) / (tr(R_a) tr(R_b)), in [0,1] for unit-diagonal models.
double overlap_metric(const CovarianceMatrix& a, const CovarianceMatrix& b);

// Overlap of R_p with the sum of the interferers; empty list -> 0.
double aggregate_overlap(const CovarianceMatrix& p,
                         const std::vector<CovarianceMatrix>& interferers);

// ||U U^H - V V^H||_F^2 for orthonormal bases of equal rank.
double chordal_distance(const CMatrix& u, const CMatrix& v);

// Top-r eigenvectors by descending eigenvalue.
CMatrix dominant_eigenbasis(const CovarianceMatrix& cov, int rank);

// Greedy max-min chordal selection of G group subspaces from candidate
// sector profiles.
std::vector<CMatrix> select_group_subspaces(const std::vector<AngularProfile>& candidates,
                                            int num_antennas, int num_groups, int rank);

// Assign each user to the arg-min chordal distance group subspace.
std::map<int, int> group_users(const std::map<int, CMatrix>& user_bases,
                               const std::vector<CMatrix>& group_subspaces);

// Full two-sided grouping of the cognitive users.
GroupingResult build_grouping(const UserSet& users,
                              const std::vector<CMatrix>& subspaces_sp,
                              const std::vector<CMatrix>& subspaces_ss, int rank);

// Smallest rank capturing energy_fraction of the trace, over all of the
// set's covariances (common rank for equal-rank chordal comparisons).
int common_dominant_rank(const UserSet& users, double energy_fraction, int max_rank);

Allocation allocate_rpa(const UserSet& users, int reuse_count, Rng& rng);

Allocation allocate_mpa(const UserSet& users, int reuse_count, double zeta_th,
                        double noise_var, int tau);

Allocation allocate_hpa(const UserSet& users, int reuse_count, double delta_p,
                        double noise_var, int tau);

Allocation allocate_ugpa(const UserSet& users, const GroupingResult& grouping,
                         int reuse_count);

}  // namespace cogpilot
