// SPDX-License-Identifier: Apache-2.0

#include "cogpilot/allocation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cogpilot {

const CovarianceMatrix& UserSet::cov(int user, BaseStation bs) const {
    auto it = covariances.find({user, bs});
    if (it == covariances.end())
        throw std::invalid_argument("UserSet: missing covariance for user " +
                                    std::to_string(user));
    return it->second;
}

void UserSet::validate() const {
    cov(primary_user, BaseStation::PBS);
    cov(primary_user, BaseStation::CBS);
    for (int u : cognitive_users) {
        cov(u, BaseStation::PBS);
        cov(u, BaseStation::CBS);
    }
}

Eigen::Index UserSet::dim() const {
    return cov(primary_user, BaseStation::PBS).dim();
}

double overlap_metric(const CovarianceMatrix& a, const CovarianceMatrix& b) {
    if (a.dim() != b.dim())
        throw std::invalid_argument("overlap_metric: dimension mismatch");
    double ta = a.entries.trace().real();
    double tb = b.entries.trace().real();
    if (ta <= 0.0 || tb <= 0.0)
        throw std::domain_error("overlap_metric: zero-trace covariance");
    double num = (a.entries * b.entries).trace().real();
    return num / (ta * tb);
}

double aggregate_overlap(const CovarianceMatrix& p,
                         const std::vector<CovarianceMatrix>& interferers) {
    if (interferers.empty()) return 0.0;
    CovarianceMatrix sum{interferers.front().entries, 1.0};
    for (std::size_t i = 1; i < interferers.size(); ++i)
        sum.entries += interferers[i].entries;
    return overlap_metric(p, sum);
}

namespace {

void check_orthonormal(const CMatrix& u, const char* who) {
    CMatrix gram = u.adjoint() * u;
    gram -= CMatrix::Identity(u.cols(), u.cols());
    if (gram.cwiseAbs().maxCoeff() > 1e-8)
        throw std::invalid_argument(std::string(who) + ": basis is not orthonormal");
}

}  // namespace

double chordal_distance(const CMatrix& u, const CMatrix& v) {
    if (u.rows() != v.rows() || u.cols() != v.cols())
        throw std::invalid_argument("chordal_distance: shape mismatch");
    check_orthonormal(u, "chordal_distance");
    check_orthonormal(v, "chordal_distance");
    return (u * u.adjoint() - v * v.adjoint()).squaredNorm();
}

CMatrix dominant_eigenbasis(const CovarianceMatrix& cov, int rank) {
    const Eigen::Index m = cov.dim();
    if (rank < 1 || rank > m)
        throw std::invalid_argument("dominant_eigenbasis: rank out of range");
    Eigen::SelfAdjointEigenSolver<CMatrix> es(cov.entries);
    // Eigen returns ascending order; take the trailing columns reversed.
    CMatrix basis(m, rank);
    for (int k = 0; k < rank; ++k) basis.col(k) = es.eigenvectors().col(m - 1 - k);
    return basis;
}

std::vector<CMatrix> select_group_subspaces(const std::vector<AngularProfile>& candidates,
                                            int num_antennas, int num_groups, int rank) {
    if (num_groups < 1) throw std::invalid_argument("select_group_subspaces: G must be >= 1");
    if (static_cast<int>(candidates.size()) < num_groups)
        throw std::invalid_argument("select_group_subspaces: fewer candidates than groups");

    std::vector<CMatrix> bases;
    bases.reserve(candidates.size());
    for (const auto& p : candidates)
        bases.push_back(dominant_eigenbasis(spread_covariance(p, num_antennas), rank));

    std::vector<CMatrix> chosen{bases.front()};
    std::vector<bool> used(bases.size(), false);
    used[0] = true;
    while (static_cast<int>(chosen.size()) < num_groups) {
        int best = -1;
        double best_score = -1.0;
        for (std::size_t i = 0; i < bases.size(); ++i) {
            if (used[i]) continue;
            double score = std::numeric_limits<double>::max();
            for (const auto& c : chosen)
                score = std::min(score, chordal_distance(bases[i], c));
            if (score > best_score) {
                best_score = score;
                best = static_cast<int>(i);
            }
        }
        used[best] = true;
        chosen.push_back(bases[best]);
    }
    return chosen;
}

std::map<int, int> group_users(const std::map<int, CMatrix>& user_bases,
                               const std::vector<CMatrix>& group_subspaces) {
    if (group_subspaces.empty())
        throw std::invalid_argument("group_users: no group subspaces");
    std::map<int, int> assignment;
    for (const auto& [user, basis] : user_bases) {
        int best = 0;
        double best_d = std::numeric_limits<double>::max();
        for (std::size_t g = 0; g < group_subspaces.size(); ++g) {
            double d = chordal_distance(basis, group_subspaces[g]);
            if (d < best_d) {
                best_d = d;
                best = static_cast<int>(g);
            }
        }
        assignment[user] = best;
    }
    return assignment;
}

GroupingResult build_grouping(const UserSet& users,
                              const std::vector<CMatrix>& subspaces_sp,
                              const std::vector<CMatrix>& subspaces_ss, int rank) {
    users.validate();
    GroupingResult result;
    result.rank = rank;
    result.subspaces_sp = subspaces_sp;
    result.subspaces_ss = subspaces_ss;

    std::map<int, CMatrix> bases_sp, bases_ss;
    for (int u : users.cognitive_users) {
        bases_sp[u] = dominant_eigenbasis(users.cov(u, BaseStation::PBS), rank);
        bases_ss[u] = dominant_eigenbasis(users.cov(u, BaseStation::CBS), rank);
    }
    for (const auto& [u, g] : group_users(bases_sp, subspaces_sp)) result.groups_sp[g].push_back(u);
    for (const auto& [u, g] : group_users(bases_ss, subspaces_ss)) result.groups_ss[g].push_back(u);
    return result;
}

int common_dominant_rank(const UserSet& users, double energy_fraction, int max_rank) {
    users.validate();
    int r = 1;
    auto need = [&](const CovarianceMatrix& cov) {
        Eigen::SelfAdjointEigenSolver<CMatrix> es(cov.entries, Eigen::EigenvaluesOnly);
        Eigen::VectorXd ev = es.eigenvalues().reverse();
        double total = std::max(ev.sum(), 1e-300);
        double acc = 0.0;
        int k = 0;
        while (k < ev.size() && acc < energy_fraction * total) acc += std::max(ev(k++), 0.0);
        return std::max(k, 1);
    };
    for (const auto& [key, cov] : users.covariances) r = std::max(r, need(cov));
    return std::min({r, max_rank, static_cast<int>(users.dim())});
}

Allocation allocate_rpa(const UserSet& users, int reuse_count, Rng& rng) {
    users.validate();
    if (reuse_count < 0 || reuse_count > static_cast<int>(users.cognitive_users.size()))
        throw std::invalid_argument("allocate_rpa: reuse_count out of range");
    Allocation a;
    a.algorithm = Allocator::RPA;
    std::vector<int> pool = users.cognitive_users;
    std::sort(pool.begin(), pool.end());
    std::sample(pool.begin(), pool.end(), std::back_inserter(a.shared_set), reuse_count, rng);
    for (int u : a.shared_set) a.diagnostics.push_back({u, 0.0});
    return a;
}

Allocation allocate_mpa(const UserSet& users, int reuse_count, double zeta_th,
                        double noise_var, int tau) {
    users.validate();
    if (reuse_count < 1) throw std::invalid_argument("allocate_mpa: reuse_count must be >= 1");

    const auto& r_pp = users.cov(users.primary_user, BaseStation::PBS);
    const Eigen::Index m = r_pp.dim();

    Allocation a;
    a.algorithm = Allocator::MPA;

    // Phase 1: grow the candidate pool while the primary-side MSE stays
    // below the threshold; a candidate that would breach it is not
    // added. The pool may exceed reuse_count, phase 2 selects from it.
    std::vector<int> selected;
    std::vector<int> remaining = users.cognitive_users;
    CMatrix interf = CMatrix::Zero(m, m);
    while (!remaining.empty()) {
        int best = -1;
        double best_mse = std::numeric_limits<double>::max();
        for (int j : remaining) {
            CovarianceMatrix trial{
                interf + users.cov(j, BaseStation::PBS).attenuation *
                             users.cov(j, BaseStation::PBS).entries,
                1.0};
            double mse = analytic_mse_primary(r_pp, trial, noise_var, tau);
            if (mse < best_mse) {
                best_mse = mse;
                best = j;
            }
        }
        if (best_mse >= zeta_th) break;
        selected.push_back(best);
        interf += users.cov(best, BaseStation::PBS).attenuation *
                  users.cov(best, BaseStation::PBS).entries;
        remaining.erase(std::find(remaining.begin(), remaining.end(), best));
        a.diagnostics.push_back({best, best_mse});
    }

    // Phase 2: greedily select up to reuse_count users from the pool by
    // cognitive-side MSE, which accounts for their mutual contamination.
    const auto& r_ps = users.cov(users.primary_user, BaseStation::CBS);
    std::vector<int> ordered;
    std::vector<int> left = selected;
    while (!left.empty() && static_cast<int>(ordered.size()) < reuse_count) {
        int best = -1;
        double best_mse = std::numeric_limits<double>::max();
        for (int k : left) {
            std::vector<CovarianceMatrix> targets;
            for (int u : ordered) targets.push_back(users.cov(u, BaseStation::CBS));
            targets.push_back(users.cov(k, BaseStation::CBS));
            double mse = analytic_mse_cognitive(targets, r_ps, noise_var, tau);
            if (mse < best_mse) {
                best_mse = mse;
                best = k;
            }
        }
        ordered.push_back(best);
        left.erase(std::find(left.begin(), left.end(), best));
    }
    a.shared_set = std::move(ordered);
    return a;
}

Allocation allocate_hpa(const UserSet& users, int reuse_count, double delta_p,
                        double noise_var, int tau) {
    (void)noise_var;
    (void)tau;
    users.validate();
    if (delta_p < 0.0 || delta_p > 1.0)
        throw std::invalid_argument("allocate_hpa: delta_p must be in [0,1]");

    const auto& r_pp = users.cov(users.primary_user, BaseStation::PBS);

    Allocation a;
    a.algorithm = Allocator::HPA;

    // Phase 1: semi-orthogonality screen against the PU at PBS.
    std::vector<int> pool;
    for (int j : users.cognitive_users) {
        if (overlap_metric(r_pp, users.cov(j, BaseStation::PBS)) <= delta_p)
            pool.push_back(j);
    }

    // Phase 2: grow by minimum aggregate CBS-side overlap with the set.
    std::vector<int> selected;
    while (static_cast<int>(selected.size()) < reuse_count && !pool.empty()) {
        int best = -1;
        double best_score = std::numeric_limits<double>::max();
        for (int j : pool) {
            double score = 0.0;
            for (int i : selected)
                score += overlap_metric(users.cov(j, BaseStation::CBS),
                                        users.cov(i, BaseStation::CBS));
            if (score < best_score) {
                best_score = score;
                best = j;
            }
        }
        selected.push_back(best);
        pool.erase(std::find(pool.begin(), pool.end(), best));
        a.diagnostics.push_back({best, best_score});
    }
    a.shared_set = std::move(selected);
    return a;
}

Allocation allocate_ugpa(const UserSet& users, const GroupingResult& grouping,
                         int reuse_count) {
    users.validate();
    if (grouping.subspaces_sp.empty())
        throw std::invalid_argument("allocate_ugpa: empty grouping");

    Allocation a;
    a.algorithm = Allocator::UGPA;
    a.notes.push_back("selecting donor groups by maximum chordal distance from the PU group");

    const CMatrix pu_basis =
        dominant_eigenbasis(users.cov(users.primary_user, BaseStation::PBS), grouping.rank);

    int pu_group = 0;
    double best_d = std::numeric_limits<double>::max();
    for (std::size_t g = 0; g < grouping.subspaces_sp.size(); ++g) {
        double d = chordal_distance(pu_basis, grouping.subspaces_sp[g]);
        if (d < best_d) {
            best_d = d;
            pu_group = static_cast<int>(g);
        }
    }

    // Candidate groups sorted by descending distance from the PU group.
    std::vector<std::pair<double, std::vector<int>>> groups;
    for (std::size_t g = 0; g < grouping.subspaces_sp.size(); ++g) {
        if (static_cast<int>(g) == pu_group) continue;
        auto it = grouping.groups_sp.find(static_cast<int>(g));
        if (it == grouping.groups_sp.end() || it->second.empty()) continue;
        std::vector<int> members = it->second;
        std::sort(members.begin(), members.end());
        groups.emplace_back(
            chordal_distance(grouping.subspaces_sp[g], grouping.subspaces_sp[pu_group]),
            std::move(members));
    }
    std::stable_sort(groups.begin(), groups.end(),
                     [](const auto& x, const auto& y) { return x.first > y.first; });

    // One user per donor group per pass, farthest group first, so the
    // shared set spreads across distinct subspaces instead of draining
    // a single group.
    std::size_t cursor = 0;
    bool took = true;
    while (took && static_cast<int>(a.shared_set.size()) < reuse_count) {
        took = false;
        for (const auto& [distance, members] : groups) {
            if (cursor >= members.size()) continue;
            if (static_cast<int>(a.shared_set.size()) >= reuse_count) break;
            a.shared_set.push_back(members[cursor]);
            a.diagnostics.push_back({members[cursor], distance});
            took = true;
        }
        ++cursor;
    }
    return a;
}

}  // namespace cogpilot
