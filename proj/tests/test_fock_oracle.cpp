#include <doctest.h>

#include <cmath>
#include <numbers>

#include <unsupported/Eigen/MatrixFunctions>

#include "entpulse/errors.hpp"
#include "entpulse/fock_oracle.hpp"
#include "entpulse/gaussian.hpp"

using namespace entpulse;
using namespace entpulse::fock;
using cplx = std::complex<double>;

namespace {

double t_pi(cplx chi1, cplx chi2) {
    return std::numbers::pi / std::sqrt(std::norm(chi2) - std::norm(chi1));
}

double max_abs(const Eigen::MatrixXcd& m) { return m.cwiseAbs().maxCoeff(); }

Eigen::MatrixXcd dense(const SparseHamiltonian& h) { return Eigen::MatrixXcd(h); }

double commutator_norm(const SparseHamiltonian& a, const SparseHamiltonian& b) {
    const Eigen::MatrixXcd da = dense(a), db = dense(b);
    return max_abs(da * db - db * da);
}

}  // namespace

TEST_CASE("Hamiltonian is Hermitian by construction") {
    const Dims d{5, 4, 6};
    const SparseHamiltonian h = hamiltonian_matrix(std::polar(0.7, 0.3), std::polar(1.9, -2.0), d);
    const Eigen::MatrixXcd m = dense(h);
    CHECK(max_abs(m - m.adjoint()) == 0.0);
    CHECK_THROWS_AS(hamiltonian_matrix({1, 0}, {2, 0}, {1, 4, 4}), InvalidParameter);
    CHECK_THROWS_AS(hamiltonian_matrix({1, 0}, {2, 0}, {4, 4, 1}), InvalidParameter);
}

TEST_CASE("conserved quantities") {
    const Dims d{5, 5, 5};
    const auto n1 = number_operator(d, 0), n2 = number_operator(d, 1), nb = number_operator(d, 2);
    const SparseHamiltonian h1 = hamiltonian_matrix({0.8, 0.2}, {0.0, 0.0}, d);
    const SparseHamiltonian h2 = hamiltonian_matrix({0.0, 0.0}, {1.3, -0.5}, d);
    const SparseHamiltonian h = hamiltonian_matrix({0.8, 0.2}, {1.3, -0.5}, d);
    CHECK(commutator_norm(h1, n2) == 0.0);
    CHECK(commutator_norm(h1, n1 - nb) == 0.0);
    CHECK(commutator_norm(h2, n2 + nb) == 0.0);
    CHECK(commutator_norm(h, n1 - n2 - nb) == 0.0);
    CHECK(commutator_norm(h1, n1) > 0.1);
    CHECK_THROWS_AS(number_operator(d, 3), InvalidParameter);
}

TEST_CASE("Krylov propagation against a dense exponential") {
    const Dims d{4, 5, 4};
    const cplx chi1 = std::polar(0.6, 0.5), chi2 = std::polar(1.1, 2.0);
    const SparseHamiltonian h = hamiltonian_matrix(chi1, chi2, d);
    Eigen::VectorXcd psi0 = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(d.size()));
    psi0(0) = 1.0;
    const double t = 0.9;
    const Eigen::MatrixXcd u = (cplx(0.0, -t) * dense(h)).exp();
    const Eigen::VectorXcd expected = u * psi0;
    PropagationOptions opts;
    opts.leakage_tolerance = 1.0;  // tiny space, only the propagator is under test
    opts.krylov_dim = 8;
    const Propagation p = propagate(FockState::vacuum(d), h, t, opts);
    CHECK((p.state.amplitudes() - expected).norm() < 1e-10);
    CHECK(p.steps >= 1);
}

TEST_CASE("propagation edge cases") {
    const Dims d{8, 8, 8};
    const SparseHamiltonian h = hamiltonian_matrix({1, 0}, {3, 0}, d);
    const FockState v = FockState::vacuum(d);
    CHECK(propagate(v, h, 0.0).state.amplitudes() == v.amplitudes());

    Eigen::VectorXcd twice = v.amplitudes() * 2.0;
    CHECK_THROWS_AS(propagate(FockState(d, twice), h, 0.1), InvalidParameter);
    CHECK_THROWS_AS(propagate(v, h, -1.0), InvalidParameter);
    CHECK_THROWS_AS(propagate(FockState::vacuum({8, 8, 7}), h, 0.1), DimensionMismatch);

    // r = 2 carries about 1.8 photons per cavity mode; three levels cannot hold that.
    const Dims small{3, 3, 3};
    CHECK_THROWS_AS(propagate(FockState::vacuum(small), hamiltonian_matrix({1, 0}, {2, 0}, small),
                              t_pi({1, 0}, {2, 0})),
                    TruncationError);
}

TEST_CASE("vacuum observables") {
    const Observables obs = observables(FockState::vacuum({6, 6, 6}));
    CHECK(obs.covariance.isApprox(Matrix::Identity(6, 6), 1e-15));
    CHECK(obs.mean.isZero(0.0));
    CHECK(obs.mean_photons.isZero(0.0));
    CHECK(obs.joint_distribution(0, 0) == 1.0);
    CHECK(obs.epr_variance(0.0, 0.0) == doctest::Approx(2.0));
}

TEST_CASE("r = 3 at T_pi on a 24^3 truncation") {
    const cplx chi1{1.0, 0.0}, chi2{3.0, 0.0};
    const Dims d{24, 24, 24};
    const Propagation p = propagate(FockState::vacuum(d), hamiltonian_matrix(chi1, chi2, d), t_pi(chi1, chi2));
    CHECK(std::abs(p.state.norm() - 1.0) < 1e-12);
    CHECK(p.max_leakage < 1e-9);
    const Observables obs = observables(p.state);
    CHECK(std::abs(obs.mean_photons(0) - 0.5625) < 1e-6);
    CHECK(std::abs(obs.mean_photons(1) - 0.5625) < 1e-6);
    CHECK(std::abs(obs.mean_photons(2)) < 1e-9);

    SUBCASE("photon pairs") {
        const double l = 2 * 3.0 / (1 + 9.0);
        double off = 0.0;
        const Matrix& jd = obs.joint_distribution;
        for (Eigen::Index i = 0; i < jd.rows(); ++i) {
            for (Eigen::Index j = 0; j < jd.cols(); ++j) {
                if (i != j) off += jd(i, j);
            }
        }
        CHECK(off < 1e-8);
        for (int n = 0; n < 8; ++n) {
            CHECK(jd(n, n) == doctest::Approx((1 - l * l) * std::pow(l, 2 * n)).epsilon(1e-7));
        }
    }
    SUBCASE("motion returns to its initial state") {
        const ComplexMatrix rho = reduced_density_matrix(p.state, 2);
        CHECK(rho.rows() == 24);
        CHECK(rho(0, 0).real() > 1.0 - 1e-8);
        CHECK(std::abs(rho.trace() - 1.0) < 1e-12);
    }
    SUBCASE("EPR variance") {
        CHECK(obs.epr_variance(0.0, 0.0) == doctest::Approx(0.5).epsilon(1e-6));
        CHECK(obs.epr_variance(std::numbers::pi / 2, -std::numbers::pi / 2) ==
              doctest::Approx(0.5).epsilon(1e-6));
    }
}

TEST_CASE("Gaussian engine agrees with the number basis") {
    struct Case {
        cplx chi1, chi2;
    };
    const Case cases[] = {
        {{1.0, 0.0}, {2.5, 0.0}},
        {{1.0, 0.0}, {3.0, 0.0}},
        {std::polar(1.0, 0.4), std::polar(3.0, -1.1)},
        {std::polar(1.0, -2.5), std::polar(2.5, 0.9)},
    };
    for (const auto& c : cases) {
        const double t = t_pi(c.chi1, c.chi2);
        const Dims d = suggested_dims(c.chi1, c.chi2);
        PropagationOptions opts;
        opts.leakage_tolerance = 1e-10;
        const Propagation p = propagate(FockState::vacuum(d), hamiltonian_matrix(c.chi1, c.chi2, d), t, opts);
        CHECK(p.max_leakage < 1e-10);
        const Observables obs = observables(p.state);

        const GaussianState g =
            evolve(vacuum(simultaneous_mode_labels()), dynamics_from_couplings(c.chi1, c.chi2, 0, false), t);
        CHECK((obs.covariance - g.cov()).cwiseAbs().maxCoeff() < 1e-6);
        for (int m = 0; m < 3; ++m) {
            CHECK(std::abs(obs.mean_photons(m) - mean_photons(g, simultaneous_mode_labels()[m])) < 1e-6);
        }
        const double beta = std::arg(c.chi1) + std::arg(c.chi2);
        CHECK(std::abs(obs.epr_variance(-beta / 2, -beta / 2) -
                       epr_variance(g, "cav1", "cav2", -beta / 2, -beta / 2)) < 1e-6);
    }
}

TEST_CASE("Gaussian engine agrees at an intermediate time") {
    const cplx chi1 = std::polar(1.0, 0.3), chi2 = std::polar(2.5, 1.2);
    const Dims d = suggested_dims(chi1, chi2);
    const double t = 0.37 * t_pi(chi1, chi2);
    PropagationOptions opts;
    opts.leakage_tolerance = 1e-8;
    const Observables obs = observables(propagate(FockState::vacuum(d), hamiltonian_matrix(chi1, chi2, d), t, opts).state);
    const GaussianState g =
        evolve(vacuum(simultaneous_mode_labels()), dynamics_from_couplings(chi1, chi2, 0, false), t);
    CHECK((obs.covariance - g.cov()).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("enlarging the truncation changes nothing") {
    const cplx chi1{1.0, 0.0}, chi2{3.0, 0.0};
    const double t = t_pi(chi1, chi2);
    const Dims d = suggested_dims(chi1, chi2);
    const Observables a = observables(propagate(FockState::vacuum(d), hamiltonian_matrix(chi1, chi2, d), t).state);
    const Dims d2{d.cav1 + 12, d.cav2 + 12, d.motion + 8};
    const Observables b = observables(propagate(FockState::vacuum(d2), hamiltonian_matrix(chi1, chi2, d2), t).state);
    CHECK((a.covariance - b.covariance).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((a.mean_photons - b.mean_photons).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(std::abs(a.epr_variance(0, 0) - b.epr_variance(0, 0)) < 1e-8);
}

TEST_CASE("suggested truncation") {
    const Dims d3 = suggested_dims({1, 0}, {3, 0});
    CHECK(d3.cav1 >= 8);
    CHECK(d3.cav1 == d3.cav2);
    const Dims d2 = suggested_dims({1, 0}, {2, 0});
    CHECK(d2.cav1 > d3.cav1);
    CHECK(d2.motion > d3.motion);
    // Without H1 nothing is created from vacuum.
    const Dims quiet = suggested_dims({0, 0}, {2, 0});
    CHECK(quiet.cav1 == 8);
    CHECK_THROWS_AS(suggested_dims({1, 0}, {3, 0}, 0.0), InvalidParameter);
}
