#include "entpulse/fock_oracle.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>
#include <vector>

#include "entpulse/errors.hpp"

namespace entpulse::fock {

namespace {

using cplx = std::complex<double>;

std::array<std::size_t, 3> as_array(const Dims& d) { return {d.cav1, d.cav2, d.motion}; }

// Apply a (create = false) or a^dagger (create = true) of one mode.
ComplexVector apply_ladder(const FockState& s, int mode, bool create) {
    const auto d = as_array(s.dims());
    const auto& in = s.amplitudes();
    ComplexVector out = ComplexVector::Zero(in.size());
    for (std::size_t n1 = 0; n1 < d[0]; ++n1) {
        for (std::size_t n2 = 0; n2 < d[1]; ++n2) {
            for (std::size_t nb = 0; nb < d[2]; ++nb) {
                std::array<std::size_t, 3> n{n1, n2, nb};
                const auto src = static_cast<Eigen::Index>(s.index(n1, n2, nb));
                std::size_t& k = n[static_cast<std::size_t>(mode)];
                if (create) {
                    if (k + 1 >= d[static_cast<std::size_t>(mode)]) {
                        continue;
                    }
                    const double amp = std::sqrt(static_cast<double>(k + 1));
                    ++k;
                    out(static_cast<Eigen::Index>(s.index(n[0], n[1], n[2]))) += amp * in(src);
                } else {
                    if (k == 0) {
                        continue;
                    }
                    const double amp = std::sqrt(static_cast<double>(k));
                    --k;
                    out(static_cast<Eigen::Index>(s.index(n[0], n[1], n[2]))) += amp * in(src);
                }
            }
        }
    }
    return out;
}

// Lanczos basis for one step: orthonormal columns and the tridiagonal
// coefficients. `beta_next` is the residual norm used in the error estimate.
struct Krylov {
    ComplexMatrix basis;  // columns; only the first `size` are filled
    Eigen::Index size = 0;
    std::vector<double> alpha;
    std::vector<double> beta;
    double beta_next = 0.0;
    bool invariant = false;
};

Krylov build_krylov(const SparseHamiltonian& h, const ComplexVector& start, int max_dim) {
    Krylov k;
    k.basis.resize(start.size(), max_dim);
    k.basis.col(0) = start / start.norm();
    k.size = 1;
    ComplexVector w(start.size());
    for (int j = 0; j < max_dim; ++j) {
        w.noalias() = h * k.basis.col(j);
        const double a = k.basis.col(j).dot(w).real();
        k.alpha.push_back(a);
        // Two passes of block classical Gram-Schmidt against the whole basis.
        for (int pass = 0; pass < 2; ++pass) {
            const auto v = k.basis.leftCols(k.size);
            const ComplexVector proj = v.adjoint() * w;
            w.noalias() -= v * proj;
        }
        const double b = w.norm();
        if (b < 1e-13 * std::max(1.0, std::abs(a))) {
            k.invariant = true;
            k.beta_next = 0.0;
            return k;
        }
        if (j + 1 == max_dim) {
            k.beta_next = b;
            return k;
        }
        k.beta.push_back(b);
        k.basis.col(k.size++) = w / b;
    }
    return k;
}

struct TridiagonalExp {
    Eigen::VectorXd eigenvalues;
    Eigen::MatrixXd eigenvectors;

    explicit TridiagonalExp(const Krylov& k) {
        const auto m = static_cast<Eigen::Index>(k.alpha.size());
        Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
        for (Eigen::Index i = 0; i < m; ++i) {
            t(i, i) = k.alpha[static_cast<std::size_t>(i)];
            if (i + 1 < m) {
                t(i, i + 1) = t(i + 1, i) = k.beta[static_cast<std::size_t>(i)];
            }
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(t);
        eigenvalues = eig.eigenvalues();
        eigenvectors = eig.eigenvectors();
    }

    // exp(-i T tau) e_1
    Eigen::VectorXcd apply(double tau) const {
        const Eigen::VectorXd first = eigenvectors.row(0).transpose();
        Eigen::VectorXcd phase(eigenvalues.size());
        for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
            phase(i) = std::exp(cplx(0.0, -eigenvalues(i) * tau)) * first(i);
        }
        return eigenvectors.cast<cplx>() * phase;
    }
};

}  // namespace

FockState::FockState(Dims dims, ComplexVector amplitudes) : dims_(dims), amps_(std::move(amplitudes)) {
    if (dims_.cav1 == 0 || dims_.cav2 == 0 || dims_.motion == 0) {
        throw InvalidParameter("Fock dimensions must be positive");
    }
    if (static_cast<std::size_t>(amps_.size()) != dims_.size()) {
        throw DimensionMismatch("amplitude vector length does not match truncation dims");
    }
}

FockState FockState::vacuum(Dims dims) {
    ComplexVector amps = ComplexVector::Zero(static_cast<Eigen::Index>(dims.size()));
    amps(0) = 1.0;
    return FockState(dims, std::move(amps));
}

double FockState::leakage() const {
    const auto d = as_array(dims_);
    std::array<double, 3> top{0.0, 0.0, 0.0};
    for (std::size_t n1 = 0; n1 < d[0]; ++n1) {
        for (std::size_t n2 = 0; n2 < d[1]; ++n2) {
            for (std::size_t nb = 0; nb < d[2]; ++nb) {
                const double p = std::norm(amps_(static_cast<Eigen::Index>(index(n1, n2, nb))));
                if (n1 + 1 == d[0]) top[0] += p;
                if (n2 + 1 == d[1]) top[1] += p;
                if (nb + 1 == d[2]) top[2] += p;
            }
        }
    }
    return *std::max_element(top.begin(), top.end());
}

SparseHamiltonian hamiltonian_matrix(cplx chi1, cplx chi2, const Dims& dims) {
    if (dims.cav1 < 2 || dims.cav2 < 2 || dims.motion < 2) {
        throw InvalidParameter("every Fock truncation dimension must be >= 2");
    }
    const FockState shape = FockState::vacuum(dims);
    std::vector<Eigen::Triplet<cplx>> triplets;
    triplets.reserve(4 * dims.size());
    const cplx i{0.0, 1.0};

    auto add_pair = [&](std::size_t row, std::size_t col, cplx value) {
        triplets.emplace_back(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col), value);
        triplets.emplace_back(static_cast<Eigen::Index>(col), static_cast<Eigen::Index>(row),
                              std::conj(value));
    };

    for (std::size_t n1 = 0; n1 < dims.cav1; ++n1) {
        for (std::size_t n2 = 0; n2 < dims.cav2; ++n2) {
            for (std::size_t nb = 0; nb < dims.motion; ++nb) {
                const std::size_t from = shape.index(n1, n2, nb);
                // i chi1 a1^dagger b^dagger
                if (chi1 != cplx{} && n1 + 1 < dims.cav1 && nb + 1 < dims.motion) {
                    const double amp = std::sqrt(static_cast<double>((n1 + 1) * (nb + 1)));
                    add_pair(shape.index(n1 + 1, n2, nb + 1), from, i * chi1 * amp);
                }
                // i chi2 a2^dagger b
                if (chi2 != cplx{} && n2 + 1 < dims.cav2 && nb > 0) {
                    const double amp = std::sqrt(static_cast<double>((n2 + 1) * nb));
                    add_pair(shape.index(n1, n2 + 1, nb - 1), from, i * chi2 * amp);
                }
            }
        }
    }
    const auto n = static_cast<Eigen::Index>(dims.size());
    SparseHamiltonian h(n, n);
    h.setFromTriplets(triplets.begin(), triplets.end());
    return h;
}

SparseHamiltonian number_operator(const Dims& dims, int mode) {
    if (mode < 0 || mode > 2) {
        throw InvalidParameter("mode index must be 0, 1 or 2");
    }
    const FockState shape = FockState::vacuum(dims);
    std::vector<Eigen::Triplet<cplx>> triplets;
    for (std::size_t n1 = 0; n1 < dims.cav1; ++n1) {
        for (std::size_t n2 = 0; n2 < dims.cav2; ++n2) {
            for (std::size_t nb = 0; nb < dims.motion; ++nb) {
                const std::array<std::size_t, 3> n{n1, n2, nb};
                const auto k = static_cast<double>(n[static_cast<std::size_t>(mode)]);
                if (k != 0.0) {
                    const auto idx = static_cast<Eigen::Index>(shape.index(n1, n2, nb));
                    triplets.emplace_back(idx, idx, cplx{k, 0.0});
                }
            }
        }
    }
    const auto n = static_cast<Eigen::Index>(dims.size());
    SparseHamiltonian op(n, n);
    op.setFromTriplets(triplets.begin(), triplets.end());
    return op;
}

Propagation propagate(const FockState& state, const SparseHamiltonian& h, double t,
                      const PropagationOptions& options) {
    if (static_cast<std::size_t>(h.rows()) != state.dims().size() || h.rows() != h.cols()) {
        throw DimensionMismatch("Hamiltonian does not match the state dimension");
    }
    if (!std::isfinite(t) || t < 0.0) {
        throw InvalidParameter("evolution time must be finite and >= 0");
    }
    if (options.krylov_dim < 2) {
        throw InvalidParameter("Krylov dimension must be >= 2");
    }
    const double norm0 = state.norm();
    if (std::abs(norm0 - 1.0) > 1e-12) {
        throw InvalidParameter("initial Fock state must be normalized");
    }

    Propagation out{state, state.leakage(), 0};
    ComplexVector psi = state.amplitudes();
    double elapsed = 0.0;
    while (elapsed < t) {
        const double remaining = t - elapsed;
        const Krylov k = build_krylov(h, psi, options.krylov_dim);
        const TridiagonalExp texp(k);

        double tau = remaining;
        Eigen::VectorXcd c = texp.apply(tau);
        if (!k.invariant) {
            // A-posteriori estimate beta_m |e_m^T exp(-iT tau) e_1|; shrink tau
            // until the local error fits its share of the budget.
            auto error = [&](const Eigen::VectorXcd& coeffs) {
                return k.beta_next * std::abs(coeffs(coeffs.size() - 1));
            };
            int halvings = 0;
            while (error(c) > options.tolerance * tau / t) {
                tau *= 0.5;
                c = texp.apply(tau);
                if (++halvings > 60) {
                    throw Error("Krylov propagator failed to converge");
                }
            }
        }
        psi.noalias() = k.basis.leftCols(k.size) * c;
        elapsed = (tau == remaining) ? t : elapsed + tau;
        ++out.steps;

        const FockState current(state.dims(), psi);
        out.max_leakage = std::max(out.max_leakage, current.leakage());
        if (out.max_leakage > options.leakage_tolerance) {
            std::ostringstream msg;
            msg << "Fock truncation leakage " << out.max_leakage << " exceeds tolerance "
                << options.leakage_tolerance << "; increase the truncation dims";
            throw TruncationError(msg.str());
        }
    }
    out.state = FockState(state.dims(), std::move(psi));
    return out;
}

FockState evolve_exact(const FockState& state, const SparseHamiltonian& h, double t,
                       const PropagationOptions& options) {
    return propagate(state, h, t, options).state;
}

double Observables::epr_variance(double theta1, double theta2) const {
    Vector g = Vector::Zero(6);
    g(0) = std::cos(theta1);
    g(1) = -std::sin(theta1);
    g(2) = -std::cos(theta2);
    g(3) = std::sin(theta2);
    return g.dot(covariance * g);
}

Observables observables(const FockState& state) {
    // xi = (a1, a1^dagger, a2, a2^dagger, b, b^dagger) applied to |psi>.
    std::array<ComplexVector, 6> xi;
    for (int mode = 0; mode < 3; ++mode) {
        xi[static_cast<std::size_t>(2 * mode)] = apply_ladder(state, mode, false);
        xi[static_cast<std::size_t>(2 * mode + 1)] = apply_ladder(state, mode, true);
    }
    const auto& psi = state.amplitudes();

    // <xi_c xi_d> = <xi_c^dagger psi | xi_d psi>; the adjoint of entry c is c ^ 1.
    Eigen::Matrix<cplx, 6, 6> g;
    Eigen::Matrix<cplx, 6, 1> first;
    for (std::size_t c = 0; c < 6; ++c) {
        first(static_cast<Eigen::Index>(c)) = psi.dot(xi[c]);
        for (std::size_t d = 0; d < 6; ++d) {
            g(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(d)) = xi[c ^ 1].dot(xi[d]);
        }
    }

    // R = L xi with X = a + a^dagger, P = -i a + i a^dagger.
    Eigen::Matrix<cplx, 6, 6> l = Eigen::Matrix<cplx, 6, 6>::Zero();
    const cplx i{0.0, 1.0};
    for (Eigen::Index m = 0; m < 3; ++m) {
        l(2 * m, 2 * m) = 1.0;
        l(2 * m, 2 * m + 1) = 1.0;
        l(2 * m + 1, 2 * m) = -i;
        l(2 * m + 1, 2 * m + 1) = i;
    }
    const Eigen::Matrix<cplx, 6, 6> second = l * g * l.transpose();
    const Eigen::Matrix<cplx, 6, 1> mean = l * first;

    Observables obs;
    obs.mean = mean.real();
    obs.covariance = Matrix(6, 6);
    for (Eigen::Index a = 0; a < 6; ++a) {
        for (Eigen::Index b = 0; b < 6; ++b) {
            obs.covariance(a, b) =
                0.5 * (second(a, b) + second(b, a)).real() - obs.mean(a) * obs.mean(b);
        }
    }
    for (Eigen::Index m = 0; m < 3; ++m) {
        obs.mean_photons(m) = xi[static_cast<std::size_t>(2 * m)].squaredNorm();
    }

    const auto& d = state.dims();
    obs.joint_distribution = Matrix::Zero(static_cast<Eigen::Index>(d.cav1),
                                          static_cast<Eigen::Index>(d.cav2));
    for (std::size_t n1 = 0; n1 < d.cav1; ++n1) {
        for (std::size_t n2 = 0; n2 < d.cav2; ++n2) {
            double p = 0.0;
            for (std::size_t nb = 0; nb < d.motion; ++nb) {
                p += std::norm(psi(static_cast<Eigen::Index>(state.index(n1, n2, nb))));
            }
            obs.joint_distribution(static_cast<Eigen::Index>(n1), static_cast<Eigen::Index>(n2)) = p;
        }
    }
    obs.leakage = state.leakage();
    return obs;
}

ComplexMatrix reduced_density_matrix(const FockState& state, int mode) {
    if (mode < 0 || mode > 2) {
        throw InvalidParameter("mode index must be 0, 1 or 2");
    }
    const auto d = as_array(state.dims());
    const auto dm = static_cast<Eigen::Index>(d[static_cast<std::size_t>(mode)]);
    ComplexMatrix rho = ComplexMatrix::Zero(dm, dm);
    const auto& psi = state.amplitudes();
    // Index of the traced-out pair, packed as first * d_second + second.
    std::array<std::size_t, 2> others{};
    std::size_t w = 0;
    for (std::size_t k = 0; k < 3; ++k) {
        if (static_cast<int>(k) != mode) {
            others[w++] = k;
        }
    }
    for (std::size_t x = 0; x < d[others[0]]; ++x) {
        for (std::size_t y = 0; y < d[others[1]]; ++y) {
            for (Eigen::Index m = 0; m < dm; ++m) {
                for (Eigen::Index n = 0; n < dm; ++n) {
                    std::array<std::size_t, 3> im{}, in{};
                    im[others[0]] = in[others[0]] = x;
                    im[others[1]] = in[others[1]] = y;
                    im[static_cast<std::size_t>(mode)] = static_cast<std::size_t>(m);
                    in[static_cast<std::size_t>(mode)] = static_cast<std::size_t>(n);
                    rho(m, n) += psi(static_cast<Eigen::Index>(state.index(im[0], im[1], im[2]))) *
                                 std::conj(psi(static_cast<Eigen::Index>(
                                     state.index(in[0], in[1], in[2]))));
                }
            }
        }
    }
    return rho;
}

Dims suggested_dims(cplx chi1, cplx chi2, double leakage_tolerance) {
    const double a1 = std::norm(chi1);
    const double a2 = std::norm(chi2);
    if (!(a2 > a1)) {
        throw UndefinedPeriod("truncation heuristic needs |chi2| > |chi1|");
    }
    if (!(leakage_tolerance > 0.0 && leakage_tolerance < 1.0)) {
        throw InvalidParameter("leakage tolerance must lie in (0, 1)");
    }
    const double theta2 = a2 - a1;
    // Peak occupations of the closed-form vacuum-start solution over [0, T_pi]:
    // both cavity modes peak at T_pi, the motion at T_pi/2.
    const double n_cav = 4.0 * a1 * a2 / (theta2 * theta2);
    const double n_motion = a1 / theta2;

    // Thermal marginal: top-level population n^(d-1)/(n+1)^d.
    auto dim_for = [&](double n) -> std::size_t {
        const double target = leakage_tolerance / 10.0;
        if (n <= 0.0) {
            return 8;
        }
        const double ratio = n / (n + 1.0);
        const double d = 1.0 + (std::log(target * (n + 1.0))) / std::log(ratio);
        return std::max<std::size_t>(8, static_cast<std::size_t>(std::ceil(d)) + 1);
    };
    return {dim_for(n_cav), dim_for(n_cav), dim_for(n_motion)};
}

}  // namespace entpulse::fock
