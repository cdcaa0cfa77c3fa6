#pragma once

#include <complex>
#include <cstddef>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "entpulse/gaussian.hpp"

namespace entpulse::fock {

// Brute-force reference simulator for H = H1 + H2 in a truncated number
// basis of (cav1, cav2, motion). Closed dynamics only. Intended for
// low-photon instances (r >= 2); the Gaussian engine covers the rest.

struct Dims {
    std::size_t cav1 = 0;
    std::size_t cav2 = 0;
    std::size_t motion = 0;

    std::size_t size() const noexcept { return cav1 * cav2 * motion; }
    Dims scaled(std::size_t factor) const { return {cav1 * factor, cav2 * factor, motion * factor}; }
};

using ComplexVector = Eigen::VectorXcd;
using SparseHamiltonian = Eigen::SparseMatrix<std::complex<double>, Eigen::RowMajor>;

class FockState {
public:
    FockState(Dims dims, ComplexVector amplitudes);

    static FockState vacuum(Dims dims);

    const Dims& dims() const noexcept { return dims_; }
    const ComplexVector& amplitudes() const noexcept { return amps_; }
    double norm() const { return amps_.norm(); }

    // Flat index of |n1, n2, nb>; motion is the fastest-running index.
    std::size_t index(std::size_t n1, std::size_t n2, std::size_t nb) const noexcept {
        return (n1 * dims_.cav2 + n2) * dims_.motion + nb;
    }

    // Largest population found in the top level of any single mode.
    double leakage() const;

private:
    Dims dims_;
    ComplexVector amps_;
};

// Matrix of (H1 + H2)/hbar with
//   H1/hbar = i chi1 a1^dagger b^dagger + h.c.
//   H2/hbar = i chi2 a2^dagger b        + h.c.
// Each hermitian-conjugate element is inserted explicitly, so the result is
// exactly Hermitian. Throws InvalidParameter when any dimension is < 2.
SparseHamiltonian hamiltonian_matrix(std::complex<double> chi1, std::complex<double> chi2,
                                     const Dims& dims);

// Diagonal number operators in the same basis.
SparseHamiltonian number_operator(const Dims& dims, int mode);

struct PropagationOptions {
    double tolerance = 1e-12;         // total Krylov error budget over the run
    int krylov_dim = 40;
    double leakage_tolerance = 1e-9;  // TruncationError above this
};

struct Propagation {
    FockState state;
    double max_leakage = 0.0;  // over the initial state and every step
    int steps = 0;
};

// |psi(t)> = exp(-i H t)|psi(0)> by adaptive Lanczos steps with full
// reorthogonalization; the small tridiagonal problem is diagonalized exactly.
Propagation propagate(const FockState& state, const SparseHamiltonian& h, double t,
                      const PropagationOptions& options = {});

FockState evolve_exact(const FockState& state, const SparseHamiltonian& h, double t,
                       const PropagationOptions& options = {});

struct Observables {
    Eigen::Vector3d mean_photons;  // (cav1, cav2, motion)
    Vector mean;                   // (X1, P1, X2, P2, Xb, Pb)
    Matrix covariance;             // 6 x 6, same convention as the Gaussian engine
    Matrix joint_distribution;     // P(n1, n2), rows n1, columns n2
    double leakage = 0.0;

    double epr_variance(double theta1, double theta2) const;
};

Observables observables(const FockState& state);

// Reduced density matrix of one mode (0 = cav1, 1 = cav2, 2 = motion).
ComplexMatrix reduced_density_matrix(const FockState& state, int mode);

// Per-mode truncation for a vacuum start under H1 + H2, chosen so that the
// thermal tail of the largest occupation reached during [0, T_pi] puts
// less than leakage_tolerance/10 into the top level. Requires |chi2| > |chi1|.
Dims suggested_dims(std::complex<double> chi1, std::complex<double> chi2,
                    double leakage_tolerance = 1e-10);

}  // namespace entpulse::fock
