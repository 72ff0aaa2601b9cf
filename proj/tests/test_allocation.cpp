// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mc_oracle.hpp"

#include "cogpilot/allocation.hpp"

using namespace cogpilot;
using cogpilot::testing::random_psd;
using std::numbers::pi;

namespace {

CovarianceMatrix axis_projector(int m, int axis) {
    CMatrix r = CMatrix::Zero(m, m);
    r(axis, axis) = 1.0;
    return CovarianceMatrix{r, 1.0};
}

CMatrix axis_basis(int m, int axis) {
    CMatrix u = CMatrix::Zero(m, 1);
    u(axis, 0) = 1.0;
    return u;
}

// Small synthetic user set where link subspaces are axis projectors
// chosen per user; convenient for hand-checkable allocations.
UserSet axis_users(int m, const std::vector<std::pair<int, int>>& cu_axes, int pu_axis_pbs,
                   int pu_axis_cbs) {
    UserSet users;
    users.primary_user = 0;
    users.covariances[{0, BaseStation::PBS}] = axis_projector(m, pu_axis_pbs);
    users.covariances[{0, BaseStation::CBS}] = axis_projector(m, pu_axis_cbs);
    int id = 1;
    for (auto [pbs_axis, cbs_axis] : cu_axes) {
        users.cognitive_users.push_back(id);
        users.covariances[{id, BaseStation::PBS}] = axis_projector(m, pbs_axis);
        users.covariances[{id, BaseStation::CBS}] = axis_projector(m, cbs_axis);
        ++id;
    }
    return users;
}

}  // namespace

TEST_CASE("overlap metric closed forms") {
    auto p1 = axis_projector(3, 0);
    auto p2 = axis_projector(3, 1);
    CHECK(overlap_metric(p1, p1) == doctest::Approx(1.0));
    CHECK(overlap_metric(p1, p2) == doctest::Approx(0.0));

    CovarianceMatrix eye{CMatrix::Identity(2, 2), 1.0};
    CHECK(overlap_metric(eye, eye) == doctest::Approx(0.5));

    CovarianceMatrix zero{CMatrix::Zero(3, 3), 1.0};
    CHECK_THROWS_AS(overlap_metric(p1, zero), std::domain_error);
}

TEST_CASE("overlap metric range, symmetry and scale invariance") {
    Rng rng(41);
    for (int rep = 0; rep < 100; ++rep) {
        auto a = random_psd(4, rng, 2);
        auto b = random_psd(4, rng, 3);
        double v = overlap_metric(a, b);
        CHECK(v >= 0.0);
        CHECK(v <= 1.0 + 1e-12);
        CHECK(v == doctest::Approx(overlap_metric(b, a)).epsilon(1e-12));
        CovarianceMatrix scaled_b{3.7 * b.entries, 1.0};
        CHECK(v == doctest::Approx(overlap_metric(a, scaled_b)).epsilon(1e-12));
    }
}

TEST_CASE("aggregate overlap") {
    auto p = axis_projector(3, 0);
    auto q = axis_projector(3, 1);
    auto r = axis_projector(3, 2);
    CHECK(aggregate_overlap(p, {}) == 0.0);
    CHECK(aggregate_overlap(p, {q}) == doctest::Approx(overlap_metric(p, q)));
    CHECK(aggregate_overlap(p, {q, r}) == doctest::Approx(0.0));
    // duplicate interferers do not change the metric
    CHECK(aggregate_overlap(p, {q, q}) == doctest::Approx(aggregate_overlap(p, {q})));
}

TEST_CASE("chordal distance closed forms") {
    CMatrix e1 = axis_basis(2, 0);
    CMatrix e2 = axis_basis(2, 1);
    CHECK(chordal_distance(e1, e1) == doctest::Approx(0.0));
    CHECK(chordal_distance(e1, e2) == doctest::Approx(2.0));

    CMatrix mid(2, 1);
    mid << cdouble(1.0 / std::sqrt(2.0), 0.0), cdouble(1.0 / std::sqrt(2.0), 0.0);
    CHECK(chordal_distance(e1, mid) == doctest::Approx(1.0));

    CMatrix bad = 2.0 * e1;
    CHECK_THROWS_AS(chordal_distance(e1, bad), std::invalid_argument);
}

TEST_CASE("chordal distance pseudometric properties on random bases") {
    Rng rng(43);
    auto random_basis = [&](int m, int r) {
        CMatrix a(m, r);
        for (int j = 0; j < r; ++j) a.col(j) = standard_cn_vector(m, rng);
        Eigen::HouseholderQR<CMatrix> qr(a);
        return CMatrix(qr.householderQ() * CMatrix::Identity(m, r));
    };
    for (int rep = 0; rep < 100; ++rep) {
        CMatrix u = random_basis(5, 2), v = random_basis(5, 2), w = random_basis(5, 2);
        double duv = chordal_distance(u, v);
        CHECK(duv >= 0.0);
        CHECK(duv <= 2.0 * 2 + 1e-9);  // 2r bound
        CHECK(duv == doctest::Approx(chordal_distance(v, u)).epsilon(1e-10));
        // Frobenius triangle inequality on the projector map (distances
        // here are squared, so compare the square roots)
        CHECK(std::sqrt(duv) <=
              std::sqrt(chordal_distance(u, w)) + std::sqrt(chordal_distance(w, v)) + 1e-9);
    }
}

TEST_CASE("dominant eigenbasis") {
    CMatrix d = CMatrix::Zero(3, 3);
    d.diagonal() << 3.0, 2.0, 1.0;
    CMatrix u = dominant_eigenbasis(CovarianceMatrix{d, 1.0}, 2);
    // span{e1, e2}: projector matches
    CMatrix proj = u * u.adjoint();
    CMatrix expect = CMatrix::Zero(3, 3);
    expect(0, 0) = expect(1, 1) = 1.0;
    CHECK((proj - expect).cwiseAbs().maxCoeff() < 1e-12);

    Rng rng(47);
    CVector a = standard_cn_vector(4, rng);
    CovarianceMatrix rank1{a * a.adjoint(), 1.0};
    CMatrix b = dominant_eigenbasis(rank1, 1);
    CVector an = a / a.norm();
    CHECK((b * b.adjoint() - an * an.adjoint()).cwiseAbs().maxCoeff() < 1e-12);

    // top-r projector agrees with a full-decomposition oracle
    auto cov = random_psd(5, rng);
    CMatrix top = dominant_eigenbasis(cov, 3);
    Eigen::SelfAdjointEigenSolver<CMatrix> es(cov.entries);
    CMatrix oracle = es.eigenvectors().rightCols(3);
    CHECK(chordal_distance(top, oracle) < 1e-8);
}

TEST_CASE("select group subspaces") {
    std::vector<AngularProfile> candidates;
    for (double theta : {-0.9, -0.3, 0.3, 0.9}) {
        AngularProfile p;
        p.theta = theta;
        p.delta_omega = 0.2;
        candidates.push_back(p);
    }
    auto one = select_group_subspaces(candidates, 8, 1, 1);
    CHECK(one.size() == 1);
    CHECK(chordal_distance(one[0],
                           dominant_eigenbasis(spread_covariance(candidates[0], 8), 1)) <
          1e-10);

    CHECK_THROWS_AS(select_group_subspaces(candidates, 8, 5, 1), std::invalid_argument);

    // greedy beats random subsets on the min pairwise distance
    std::vector<AngularProfile> sectors;
    for (int i = 0; i < 8; ++i) {
        AngularProfile p;
        p.theta = -1.2 + 0.34 * i;
        p.delta_omega = 0.3;
        sectors.push_back(p);
    }
    auto chosen = select_group_subspaces(sectors, 16, 3, 2);
    auto min_pairwise = [](const std::vector<CMatrix>& set) {
        double best = 1e300;
        for (std::size_t i = 0; i < set.size(); ++i)
            for (std::size_t j = i + 1; j < set.size(); ++j)
                best = std::min(best, chordal_distance(set[i], set[j]));
        return best;
    };
    double greedy_score = min_pairwise(chosen);
    std::vector<CMatrix> bases;
    for (const auto& p : sectors)
        bases.push_back(dominant_eigenbasis(spread_covariance(p, 16), 2));
    Rng rng(53);
    std::uniform_int_distribution<int> pick(0, 7);
    for (int rep = 0; rep < 100; ++rep) {
        std::vector<int> idx;
        while (idx.size() < 3) {
            int c = pick(rng);
            if (std::find(idx.begin(), idx.end(), c) == idx.end()) idx.push_back(c);
        }
        std::vector<CMatrix> subset{bases[idx[0]], bases[idx[1]], bases[idx[2]]};
        CHECK(greedy_score >= min_pairwise(subset) - 1e-9);
    }
}

TEST_CASE("group users") {
    std::vector<CMatrix> groups{axis_basis(3, 0), axis_basis(3, 1)};

    std::map<int, CMatrix> bases;
    bases[7] = axis_basis(3, 1);  // exactly group 1
    CMatrix tilted(3, 1);
    tilted << cdouble(1.0, 0.0), cdouble(0.1, 0.0), cdouble(0.0, 0.0);
    tilted /= tilted.norm();
    bases[8] = tilted;  // closer to e1 -> group 0
    bases[9] = axis_basis(3, 2);

    auto assign = group_users(bases, groups);
    CHECK(assign.at(7) == 1);
    CHECK(assign.at(8) == 0);
    CHECK(assign.size() == 3);  // total: everyone lands in exactly one group
}

TEST_CASE("rpa sampling") {
    UserSet users = axis_users(4, {{0, 0}, {1, 1}, {2, 2}, {3, 3}, {0, 1}}, 0, 0);
    Rng rng(59);

    auto all = allocate_rpa(users, 5, rng);
    CHECK(all.shared_set.size() == 5);
    auto none = allocate_rpa(users, 0, rng);
    CHECK(none.shared_set.empty());
    CHECK_THROWS_AS(allocate_rpa(users, 6, rng), std::invalid_argument);

    std::map<int, int> freq;
    const int draws = 10000;
    for (int i = 0; i < draws; ++i) {
        auto a = allocate_rpa(users, 2, rng);
        CHECK(a.shared_set.size() == 2);
        for (int u : a.shared_set) freq[u]++;
    }
    for (int u = 1; u <= 5; ++u)
        CHECK(static_cast<double>(freq[u]) / draws == doctest::Approx(0.4).epsilon(0.05));
}

TEST_CASE("mpa prefers orthogonal users and honors the threshold") {
    // CU 1 orthogonal to the PU at PBS, CU 2 fully overlapping
    UserSet users = axis_users(3, {{1, 1}, {0, 2}}, 0, 0);
    const double noise_var = 0.1;
    const int tau = 2;

    auto a = allocate_mpa(users, 2, 1e9, noise_var, tau);
    REQUIRE(!a.shared_set.empty());
    CHECK(a.diagnostics.front().user == 1);

    // threshold below the no-CU floor: empty allocation
    double floor_mse = analytic_mse_primary(users.cov(0, BaseStation::PBS),
                                            CovarianceMatrix{CMatrix::Zero(3, 3), 1.0},
                                            noise_var, tau);
    auto empty = allocate_mpa(users, 2, floor_mse * 0.5, noise_var, tau);
    CHECK(empty.shared_set.empty());

    // loop invariant: returned set's primary MSE is below the threshold
    const double zeta_th = 0.9;
    auto b = allocate_mpa(users, 2, zeta_th, noise_var, tau);
    CMatrix interf = CMatrix::Zero(3, 3);
    for (int u : b.shared_set) interf += users.cov(u, BaseStation::PBS).entries;
    CHECK(analytic_mse_primary(users.cov(0, BaseStation::PBS),
                               CovarianceMatrix{interf, 1.0}, noise_var, tau) < zeta_th);
}

TEST_CASE("hpa pool screening and greedy phase") {
    // CUs 1,2 share the CBS axis 1; CU 3 is orthogonal to them at CBS.
    // All are orthogonal to the PU at PBS, so all pass the screen.
    UserSet users = axis_users(4, {{1, 1}, {2, 1}, {3, 2}}, 0, 0);

    auto full = allocate_hpa(users, 3, 1.0, 0.1, 2);
    CHECK(full.shared_set.size() == 3);

    // delta_p = 0 keeps only exactly-orthogonal CUs (all of them here);
    // adding an overlapping CU shrinks the pool
    UserSet mixed = axis_users(4, {{0, 1}, {1, 1}, {3, 2}}, 0, 0);
    auto strict = allocate_hpa(mixed, 3, 0.0, 0.1, 2);
    CHECK(std::find(strict.shared_set.begin(), strict.shared_set.end(), 1) ==
          strict.shared_set.end());
    CHECK(strict.shared_set.size() == 2);

    // first two greedy picks are a mutually-orthogonal pair
    auto two = allocate_hpa(users, 2, 1.0, 0.1, 2);
    REQUIRE(two.shared_set.size() == 2);
    CHECK(overlap_metric(users.cov(two.shared_set[0], BaseStation::CBS),
                         users.cov(two.shared_set[1], BaseStation::CBS)) ==
          doctest::Approx(0.0));
}

TEST_CASE("ugpa selects from distant groups") {
    // groups along axes e0, e1, e2; PU lives on e0
    UserSet users = axis_users(4, {{0, 0}, {1, 1}, {2, 2}}, 0, 0);
    GroupingResult grouping;
    grouping.rank = 1;
    grouping.subspaces_sp = {axis_basis(4, 0), axis_basis(4, 1), axis_basis(4, 2)};
    grouping.subspaces_ss = grouping.subspaces_sp;
    grouping.groups_sp = {{0, {1}}, {1, {2}}, {2, {3}}};
    grouping.groups_ss = grouping.groups_sp;

    auto a = allocate_ugpa(users, grouping, 2);
    CHECK(a.shared_set.size() == 2);
    // nobody from the PU's own group
    CHECK(std::find(a.shared_set.begin(), a.shared_set.end(), 1) == a.shared_set.end());

    // all users in the PU group -> empty allocation
    GroupingResult single;
    single.rank = 1;
    single.subspaces_sp = {axis_basis(4, 0), axis_basis(4, 1)};
    single.subspaces_ss = single.subspaces_sp;
    single.groups_sp = {{0, {1, 2, 3}}};
    single.groups_ss = single.groups_sp;
    auto empty = allocate_ugpa(users, single, 2);
    CHECK(empty.shared_set.empty());
}

TEST_CASE("ugpa prefers the orthogonal group over the adjacent one") {
    const int m = 8;
    AngularProfile pu, adjacent, orthogonal;
    pu.theta = 0.0;
    pu.delta_omega = 0.25;
    adjacent.theta = 0.12;
    adjacent.delta_omega = 0.25;
    orthogonal.theta = 1.1;
    orthogonal.delta_omega = 0.25;

    UserSet users;
    users.primary_user = 0;
    users.covariances[{0, BaseStation::PBS}] = spread_covariance(pu, m);
    users.covariances[{0, BaseStation::CBS}] = spread_covariance(pu, m);
    users.cognitive_users = {1, 2};
    users.covariances[{1, BaseStation::PBS}] = spread_covariance(adjacent, m);
    users.covariances[{1, BaseStation::CBS}] = spread_covariance(adjacent, m);
    users.covariances[{2, BaseStation::PBS}] = spread_covariance(orthogonal, m);
    users.covariances[{2, BaseStation::CBS}] = spread_covariance(orthogonal, m);

    const int rank = 2;
    GroupingResult grouping;
    grouping.rank = rank;
    grouping.subspaces_sp = {
        dominant_eigenbasis(spread_covariance(pu, m), rank),
        dominant_eigenbasis(spread_covariance(adjacent, m), rank),
        dominant_eigenbasis(spread_covariance(orthogonal, m), rank)};
    grouping.subspaces_ss = grouping.subspaces_sp;
    grouping.groups_sp = {{1, {1}}, {2, {2}}};
    grouping.groups_ss = grouping.groups_sp;

    auto a = allocate_ugpa(users, grouping, 1);
    REQUIRE(a.shared_set.size() == 1);
    CHECK(a.shared_set[0] == 2);
}

TEST_CASE("common dominant rank") {
    UserSet users = axis_users(4, {{0, 0}}, 1, 1);
    CHECK(common_dominant_rank(users, 0.95, 4) == 1);  // all rank-1 projectors

    AngularProfile wide;
    wide.theta = 0.0;
    wide.delta_omega = 1.2;
    users.covariances[{1, BaseStation::CBS}] = spread_covariance(wide, 4);
    int r = common_dominant_rank(users, 0.95, 3);
    CHECK(r >= 2);
    CHECK(r <= 3);
}
