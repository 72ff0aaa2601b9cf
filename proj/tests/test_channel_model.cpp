// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <numbers>

#include "cogpilot/channel_model.hpp"

using namespace cogpilot;
using std::numbers::pi;

namespace {

AngularProfile uniform_profile(double theta, double delta_omega, double spacing = 0.5) {
    AngularProfile p;
    p.theta = theta;
    p.delta_omega = delta_omega;
    p.law = SpreadLaw::UniformSpread;
    p.spacing = spacing;
    return p;
}

}  // namespace

TEST_CASE("steering vector closed-form entries") {
    CVector a = steering_vector(0.0, 3);
    for (int k = 0; k < 3; ++k) CHECK(std::abs(a(k) - cdouble(1.0, 0.0)) < 1e-15);

    a = steering_vector(pi, 4);
    for (int k = 0; k < 4; ++k)
        CHECK(std::abs(a(k) - cdouble(k % 2 == 0 ? 1.0 : -1.0, 0.0)) < 1e-14);

    a = steering_vector(pi / 2, 2);
    CHECK(std::abs(a(0) - cdouble(1.0, 0.0)) < 1e-15);
    CHECK(std::abs(a(1) - cdouble(0.0, -1.0)) < 1e-15);

    CHECK_THROWS_AS(steering_vector(1.0, 0), std::invalid_argument);
}

TEST_CASE("steering vector entries have unit magnitude") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    for (int rep = 0; rep < 50; ++rep) {
        CVector a = steering_vector(u(rng), 16);
        for (int k = 0; k < 16; ++k) CHECK(std::abs(std::abs(a(k)) - 1.0) < 1e-14);
    }
}

TEST_CASE("spread covariance correlation entries") {
    // uniform law, first off-diagonal
    auto cov = spread_covariance(uniform_profile(0.0, pi / 2), 4);
    CHECK(std::abs(cov.entries(1, 0)) == doctest::Approx(2.0 / pi).epsilon(1e-12));

    // gaussian law with unit sigma
    AngularProfile g;
    g.law = SpreadLaw::GaussianSpread;
    g.delta_omega = 1.0 / std::sqrt(3.0);  // sigma_omega = 1
    auto covg = spread_covariance(g, 4);
    CHECK(std::abs(covg.entries(1, 0)) == doctest::Approx(std::exp(-0.5)).epsilon(1e-12));
}

TEST_CASE("zero spread degenerates to rank-1 steering outer product") {
    auto cov = spread_covariance(uniform_profile(0.4, 0.0), 6);
    CVector a = steering_vector(uniform_profile(0.4, 0.0).omega_bar(), 6);
    CMatrix expect = a * a.adjoint();
    CHECK((cov.entries - expect).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(cov.trace_real() == doctest::Approx(6.0));

    Eigen::SelfAdjointEigenSolver<CMatrix> es(cov.entries, Eigen::EigenvaluesOnly);
    int rank = (es.eigenvalues().array() > 1e-9).count();
    CHECK(rank == 1);
}

TEST_CASE("spread covariance invariants over a parameter grid") {
    for (double theta : {-1.2, -0.3, 0.0, 0.7, 1.4}) {
        for (double dw : {0.0, 0.05, 0.4, 1.5}) {
            for (SpreadLaw law : {SpreadLaw::UniformSpread, SpreadLaw::GaussianSpread}) {
                AngularProfile p = uniform_profile(theta, dw);
                p.law = law;
                auto cov = spread_covariance(p, 12);
                CHECK(cov.is_hermitian(1e-12));
                CHECK(cov.is_psd(1e-10));
                CHECK((cov.entries.diagonal().array() - 1.0).abs().maxCoeff() == 0.0);
            }
        }
    }
}

TEST_CASE("sample_channel edge cases and determinism") {
    CovarianceMatrix zero{CMatrix::Zero(3, 3), 1.0};
    Rng rng(11);
    CHECK(sample_channel(zero, rng).entries.norm() == 0.0);

    Rng r1(42), r2(42);
    auto cov = spread_covariance(uniform_profile(0.2, 0.3), 5);
    CVector h1 = sample_channel(cov, r1).entries;
    CVector h2 = sample_channel(cov, r2).entries;
    CHECK((h1 - h2).norm() == 0.0);

    CovarianceMatrix bad{-CMatrix::Identity(3, 3), 1.0};
    Rng r3(1);
    CHECK_THROWS_AS(sample_channel(bad, r3), NumericalDomainError);
}

TEST_CASE("sample_channel matches its covariance empirically") {
    const int m = 4;
    const long n = 100000;

    SUBCASE("identity covariance, per-entry variance 1") {
        CovarianceMatrix eye{CMatrix::Identity(m, m), 1.0};
        Rng rng(101);
        Eigen::VectorXd var = Eigen::VectorXd::Zero(m);
        for (long t = 0; t < n; ++t) {
            CVector h = sample_channel(eye, rng).entries;
            for (int i = 0; i < m; ++i) var(i) += std::norm(h(i));
        }
        var /= static_cast<double>(n);
        for (int i = 0; i < m; ++i) CHECK(var(i) == doctest::Approx(1.0).epsilon(0.02));
    }

    SUBCASE("angular-spread covariance, entrywise match") {
        auto cov = spread_covariance(uniform_profile(0.5, 0.6), m);
        Rng rng(202);
        CMatrix emp = CMatrix::Zero(m, m);
        for (long t = 0; t < n; ++t) {
            CVector h = sample_channel(cov, rng).entries;
            emp += h * h.adjoint();
        }
        emp /= static_cast<double>(n);
        CHECK((emp - cov.entries).cwiseAbs().maxCoeff() < 0.02);
    }
}

TEST_CASE("multipath channel basics") {
    // deterministic single-path structure: all entries share |gamma|
    AngularProfile p = uniform_profile(0.3, 0.0);
    Rng rng(5);
    CVector h = multipath_channel(p, 4, 1, rng).entries;
    double mag = std::abs(h(0));
    for (int k = 1; k < 4; ++k) CHECK(std::abs(h(k)) == doctest::Approx(mag).epsilon(1e-12));

    CHECK_THROWS_AS(multipath_channel(p, 4, 0, rng), std::invalid_argument);

    // two fixed paths at omega = 0 with unit gains sum to [2, 2]
    CVector two = std::sqrt(2.0) *
                  (steering_vector(0.0, 2) + steering_vector(0.0, 2)) / std::sqrt(2.0);
    CHECK(std::abs(two(0) - cdouble(2.0, 0.0)) < 1e-15);
    CHECK(std::abs(two(1) - cdouble(2.0, 0.0)) < 1e-15);
}

TEST_CASE("multipath sampler agrees with the analytic covariance") {
    const int m = 6;
    const long n = 100000;
    for (SpreadLaw law : {SpreadLaw::UniformSpread, SpreadLaw::GaussianSpread}) {
        AngularProfile p = uniform_profile(0.4, 0.5);
        p.law = law;
        auto cov = spread_covariance(p, m);
        Rng rng(303);
        CMatrix emp = CMatrix::Zero(m, m);
        for (long t = 0; t < n; ++t) {
            CVector h = multipath_channel(p, m, 50, rng).entries;
            emp += h * h.adjoint();
        }
        emp /= static_cast<double>(n);
        CHECK((emp - cov.entries).cwiseAbs().maxCoeff() < 0.05);
    }
}

TEST_CASE("effective rank fraction") {
    CovarianceMatrix rank1{steering_vector(0.7, 8) * steering_vector(0.7, 8).adjoint(), 1.0};
    CHECK(effective_rank_fraction(rank1, 0.5) == doctest::Approx(1.0 / 8.0));

    CovarianceMatrix eye{CMatrix::Identity(8, 8), 1.0};
    CHECK(effective_rank_fraction(eye, 0.99) ==
          doctest::Approx(std::ceil(0.99 * 8.0) / 8.0));

    CHECK_THROWS_AS(effective_rank_fraction(eye, 1.5), std::invalid_argument);
}

TEST_CASE("asymptotic rank law at M = 64") {
    const int m = 64;
    // delta_omega here is the theta-domain half-width of the law the
    // rank bound is stated in.
    auto bound = [](double d, double theta, double dtheta) {
        return std::min(1.0, std::abs(d * std::sin(theta - dtheta) -
                                      d * std::sin(theta + dtheta)));
    };
    for (double d : {0.4, 0.5, 0.6}) {
        for (double theta : {0.0, 0.4, -0.6}) {
            for (double dtheta : {pi / 12, pi / 6, pi / 4}) {
                AngularProfile p;
                p.theta = theta;
                p.spacing = d;
                p.law = SpreadLaw::UniformSpread;
                // omega support of a theta-domain spread of [-dtheta, dtheta]
                p.delta_omega = pi * d *
                                std::abs(std::sin(theta + dtheta) - std::sin(theta - dtheta));
                auto cov = spread_covariance(p, m);
                double frac = effective_rank_fraction(cov, 0.95);
                CHECK(std::abs(frac - bound(d, theta, dtheta)) < 0.15);
            }
        }
    }
}
