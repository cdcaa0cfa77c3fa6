#include "entpulse/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <unsupported/Eigen/MatrixFunctions>

#include "entpulse/errors.hpp"

namespace entpulse {

namespace {

std::vector<std::string> default_labels(std::size_t n) {
    std::vector<std::string> labels;
    labels.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        labels.push_back("m" + std::to_string(i));
    }
    return labels;
}

Eigen::Index quad(std::size_t mode) { return static_cast<Eigen::Index>(2 * mode); }

std::vector<std::size_t> indices_of(const GaussianState& state,
                                    std::span<const std::string> labels) {
    std::vector<std::size_t> idx;
    idx.reserve(labels.size());
    for (const auto& label : labels) {
        idx.push_back(state.index_of(label));
    }
    return idx;
}

void require_disjoint(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b,
                      const char* what) {
    for (auto i : a) {
        if (std::find(b.begin(), b.end(), i) != b.end()) {
            throw InvalidParameter(std::string(what) + ": mode sets overlap");
        }
    }
}

}  // namespace

GaussianState::GaussianState(std::vector<std::string> labels, Vector mean, Matrix cov)
    : labels_(std::move(labels)), mean_(std::move(mean)), cov_(std::move(cov)) {
    const auto dim = static_cast<Eigen::Index>(2 * labels_.size());
    if (labels_.empty()) {
        throw InvalidParameter("Gaussian state needs at least one mode");
    }
    if (mean_.size() != dim || cov_.rows() != dim || cov_.cols() != dim) {
        throw DimensionMismatch("mean/covariance size does not match 2 x number of modes");
    }
    std::set<std::string> unique(labels_.begin(), labels_.end());
    if (unique.size() != labels_.size()) {
        throw InvalidParameter("mode labels must be unique");
    }
    if (!mean_.allFinite() || !cov_.allFinite()) {
        throw InvalidParameter("mean and covariance must be finite");
    }
    const double scale = std::max(1.0, cov_.cwiseAbs().maxCoeff());
    if ((cov_ - cov_.transpose()).cwiseAbs().maxCoeff() > symmetry_tolerance * scale) {
        throw InvalidParameter("covariance matrix is not symmetric");
    }
}

std::size_t GaussianState::index_of(const std::string& label) const {
    const auto it = std::find(labels_.begin(), labels_.end(), label);
    if (it == labels_.end()) {
        throw InvalidParameter("unknown mode label '" + label + "'");
    }
    return static_cast<std::size_t>(it - labels_.begin());
}

bool GaussianState::has_mode(const std::string& label) const {
    return std::find(labels_.begin(), labels_.end(), label) != labels_.end();
}

GaussianState GaussianState::reduced(std::span<const std::string> labels) const {
    const auto idx = indices_of(*this, labels);
    const auto n = static_cast<Eigen::Index>(idx.size());
    Vector mean(2 * n);
    Matrix cov(2 * n, 2 * n);
    for (Eigen::Index i = 0; i < n; ++i) {
        mean.segment<2>(2 * i) = mean_.segment<2>(quad(idx[i]));
        for (Eigen::Index j = 0; j < n; ++j) {
            cov.block<2, 2>(2 * i, 2 * j) = cov_.block<2, 2>(quad(idx[i]), quad(idx[j]));
        }
    }
    return GaussianState({labels.begin(), labels.end()}, std::move(mean), std::move(cov));
}

GaussianState GaussianState::reduced(std::initializer_list<std::string> labels) const {
    return reduced(std::span<const std::string>(labels.begin(), labels.size()));
}

GaussianState GaussianState::tensor(const GaussianState& other) const {
    const auto d1 = mean_.size();
    const auto d2 = other.mean_.size();
    Vector mean(d1 + d2);
    mean << mean_, other.mean_;
    Matrix cov = Matrix::Zero(d1 + d2, d1 + d2);
    cov.topLeftCorner(d1, d1) = cov_;
    cov.bottomRightCorner(d2, d2) = other.cov_;
    auto labels = labels_;
    labels.insert(labels.end(), other.labels_.begin(), other.labels_.end());
    return GaussianState(std::move(labels), std::move(mean), std::move(cov));
}

GaussianState GaussianState::relabeled(std::vector<std::string> labels) const {
    return GaussianState(std::move(labels), mean_, cov_);
}

GaussianState GaussianState::transformed(const Matrix& s) const {
    if (s.rows() != cov_.rows() || s.cols() != cov_.cols()) {
        throw DimensionMismatch("transformation size does not match state");
    }
    Matrix cov = s * cov_ * s.transpose();
    cov = 0.5 * (cov + cov.transpose()).eval();
    return GaussianState(labels_, s * mean_, std::move(cov));
}

GaussianState vacuum(std::size_t n_modes) {
    if (n_modes == 0) {
        throw InvalidParameter("vacuum needs at least one mode");
    }
    return vacuum(default_labels(n_modes));
}

GaussianState vacuum(std::vector<std::string> labels) {
    const auto dim = static_cast<Eigen::Index>(2 * labels.size());
    return GaussianState(std::move(labels), Vector::Zero(dim), Matrix::Identity(dim, dim));
}

GaussianState thermal(double nbar, std::string label) {
    if (!std::isfinite(nbar) || nbar < 0.0) {
        throw InvalidParameter("thermal occupation must be >= 0");
    }
    return GaussianState({std::move(label)}, Vector::Zero(2),
                         (2.0 * nbar + 1.0) * Matrix::Identity(2, 2));
}

double tmss_squeezing(double r) {
    if (!std::isfinite(r) || !(r > 0.0)) {
        throw InvalidParameter("squeezing ratio r must be positive");
    }
    if (r == 1.0) {
        throw InfiniteSqueezing("r = 1 corresponds to infinite squeezing");
    }
    if (r < 1.0) {
        r = 1.0 / r;
    }
    // sinh s = 2r/(r^2 - 1); asinh keeps full precision for large r.
    return std::asinh(2.0 * r / ((r - 1.0) * (r + 1.0)));
}

GaussianState tmss(double r, double beta, std::string label1, std::string label2) {
    const double s = tmss_squeezing(r);
    const double ch = std::cosh(2.0 * s);
    const double sh = std::sinh(2.0 * s);
    const double c = std::cos(beta);
    const double sn = std::sin(beta);

    // <a1 a2> = (sinh 2s / 2) e^{i beta}: <X1 X2> = sinh2s cos b, <P1 P2> = -sinh2s cos b,
    // <X1 P2> = <P1 X2> = sinh2s sin b.
    Matrix cov = Matrix::Zero(4, 4);
    cov.topLeftCorner<2, 2>() = ch * Matrix::Identity(2, 2);
    cov.bottomRightCorner<2, 2>() = ch * Matrix::Identity(2, 2);
    Eigen::Matrix2d cross;
    cross << sh * c, sh * sn, sh * sn, -sh * c;
    cov.topRightCorner<2, 2>() = cross;
    cov.bottomLeftCorner<2, 2>() = cross.transpose();
    return GaussianState({std::move(label1), std::move(label2)}, Vector::Zero(4), std::move(cov));
}

Matrix symplectic_form(std::size_t n_modes) {
    const auto dim = static_cast<Eigen::Index>(2 * n_modes);
    Matrix omega = Matrix::Zero(dim, dim);
    for (Eigen::Index k = 0; k < dim; k += 2) {
        omega(k, k + 1) = 1.0;
        omega(k + 1, k) = -1.0;
    }
    return omega;
}

Vector symplectic_eigenvalues(const Matrix& cov) {
    // Squeezed states reach ||V|| ~ 1e3 and more; the factorisation runs in
    // extended precision so that nu keeps its double-precision digits.
    using LMatrix = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
    const LMatrix v = cov.cast<long double>();
    const Eigen::LLT<LMatrix> llt(v);
    if (llt.info() != Eigen::Success) {
        throw InvalidState("covariance matrix is not positive definite");
    }
    const auto n = static_cast<std::size_t>(cov.rows() / 2);
    // With V = L L^T the skew matrix L^T Omega L has singular values nu_k, each twice.
    const LMatrix l = llt.matrixL();
    const LMatrix skew = l.transpose() * symplectic_form(n).cast<long double>() * l;
    const Eigen::JacobiSVD<LMatrix> svd(skew);
    Eigen::Matrix<long double, Eigen::Dynamic, 1> sv = svd.singularValues();
    std::sort(sv.data(), sv.data() + sv.size());
    Vector nu(static_cast<Eigen::Index>(n));
    for (Eigen::Index k = 0; k < nu.size(); ++k) {
        nu(k) = static_cast<double>(0.5L * (sv(2 * k) + sv(2 * k + 1)));
    }
    return nu;
}

bool is_physical(const GaussianState& state, double tolerance) {
    try {
        const double slack = tolerance * std::max(1.0, state.cov().norm());
        return symplectic_eigenvalues(state.cov()).minCoeff() >= 1.0 - slack;
    } catch (const InvalidState&) {
        return false;
    }
}

Matrix ladder_to_quadrature(const ComplexMatrix& u, const ComplexMatrix& v) {
    if (u.rows() != u.cols() || v.rows() != u.rows() || v.cols() != u.cols()) {
        throw DimensionMismatch("ladder coefficient matrices must be square and equal-sized");
    }
    const auto n = u.rows();
    const ComplexMatrix plus = u + v;
    const ComplexMatrix minus = u - v;
    Matrix out(2 * n, 2 * n);
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index k = 0; k < n; ++k) {
            out(2 * j, 2 * k) = plus(j, k).real();
            out(2 * j, 2 * k + 1) = -minus(j, k).imag();
            out(2 * j + 1, 2 * k) = plus(j, k).imag();
            out(2 * j + 1, 2 * k + 1) = minus(j, k).real();
        }
    }
    return out;
}

LinearDynamics dynamics_from_ladder(const ComplexMatrix& m, const ComplexMatrix& n,
                                    const Vector& decay_rates) {
    if (decay_rates.size() != m.rows()) {
        throw DimensionMismatch("one decay rate per mode required");
    }
    if ((decay_rates.array() < 0.0).any()) {
        throw InvalidParameter("decay rates must be >= 0");
    }
    LinearDynamics dyn;
    dyn.drift = ladder_to_quadrature(m, n);
    const auto dim = dyn.drift.rows();
    dyn.diffusion = Matrix::Zero(dim, dim);
    for (Eigen::Index j = 0; j < decay_rates.size(); ++j) {
        dyn.drift(2 * j, 2 * j) -= decay_rates(j);
        dyn.drift(2 * j + 1, 2 * j + 1) -= decay_rates(j);
        dyn.diffusion(2 * j, 2 * j) = 2.0 * decay_rates(j);
        dyn.diffusion(2 * j + 1, 2 * j + 1) = 2.0 * decay_rates(j);
    }
    return dyn;
}

LinearDynamics dynamics_from_couplings(std::complex<double> chi1, std::complex<double> chi2,
                                       double kappa, bool include_decay) {
    if (include_decay && !(kappa >= 0.0)) {
        throw InvalidParameter("kappa must be >= 0");
    }
    ComplexMatrix m = ComplexMatrix::Zero(3, 3);
    ComplexMatrix n = ComplexMatrix::Zero(3, 3);
    n(0, 2) = chi1;              // da1/dt = chi1 b^dagger
    m(1, 2) = chi2;              // da2/dt = chi2 b
    n(2, 0) = chi1;              // db/dt  = chi1 a1^dagger
    m(2, 1) = -std::conj(chi2);  //        - conj(chi2) a2
    const double k = include_decay ? kappa : 0.0;
    Vector decay(3);
    decay << k, k, 0.0;
    return dynamics_from_ladder(m, n, decay);
}

Propagator propagator(const LinearDynamics& dyn, double t) {
    const auto dim = dyn.drift.rows();
    if (dyn.drift.cols() != dim || dyn.diffusion.rows() != dim || dyn.diffusion.cols() != dim) {
        throw DimensionMismatch("drift and diffusion must be square and equal-sized");
    }
    if (!std::isfinite(t) || t < 0.0) {
        throw InvalidParameter("evolution time must be finite and >= 0");
    }
    Propagator out;
    if (t == 0.0) {
        out.transfer = Matrix::Identity(dim, dim);
        out.noise = Matrix::Zero(dim, dim);
        return out;
    }
    out.transfer = (dyn.drift * t).exp();
    if (dyn.diffusion.isZero(0.0)) {
        out.noise = Matrix::Zero(dim, dim);
        return out;
    }
    // exp([[A, D], [0, -A^T]] t) has upper-right block
    // G = int_0^t e^{A(t-s)} D e^{-A^T s} ds, and G e^{A^T t} is the noise integral.
    Matrix block = Matrix::Zero(2 * dim, 2 * dim);
    block.topLeftCorner(dim, dim) = dyn.drift;
    block.topRightCorner(dim, dim) = dyn.diffusion;
    block.bottomRightCorner(dim, dim) = -dyn.drift.transpose();
    const Matrix e = (block * t).exp();
    Matrix noise = e.topRightCorner(dim, dim) * out.transfer.transpose();
    out.noise = 0.5 * (noise + noise.transpose());
    return out;
}

GaussianState evolve(const GaussianState& state, const LinearDynamics& dyn, double t) {
    if (static_cast<std::size_t>(dyn.drift.rows()) != 2 * state.n_modes()) {
        throw DimensionMismatch("dynamics and state have different numbers of modes");
    }
    const Propagator p = propagator(dyn, t);
    Matrix cov = p.transfer * state.cov() * p.transfer.transpose() + p.noise;
    cov = 0.5 * (cov + cov.transpose()).eval();
    return GaussianState(state.labels(), p.transfer * state.mean(), std::move(cov));
}

Matrix bogoliubov_tpi(std::complex<double> chi1, std::complex<double> chi2) {
    const double abs1 = std::abs(chi1);
    const double abs2 = std::abs(chi2);
    if (!(abs2 > abs1)) {
        throw UndefinedPeriod("T_pi requires |chi2| > |chi1| (r > 1)");
    }
    const double theta2 = (abs2 - abs1) * (abs2 + abs1);
    const double u = (abs1 * abs1 + abs2 * abs2) / theta2;
    const std::complex<double> v = 2.0 * chi1 * chi2 / theta2;

    ComplexMatrix uu = ComplexMatrix::Zero(3, 3);
    ComplexMatrix vv = ComplexMatrix::Zero(3, 3);
    uu(0, 0) = u;
    vv(0, 1) = -v;
    vv(1, 0) = v;
    uu(1, 1) = -u;
    uu(2, 2) = -1.0;
    return ladder_to_quadrature(uu, vv);
}

double mean_photons(const GaussianState& state, const std::string& mode) {
    const auto k = quad(state.index_of(mode));
    const auto& m = state.mean();
    const auto& v = state.cov();
    return (v(k, k) + v(k + 1, k + 1) + m(k) * m(k) + m(k + 1) * m(k + 1) - 2.0) / 4.0;
}

double epr_variance(const GaussianState& state, const std::string& mode_i,
                    const std::string& mode_j, double theta_i, double theta_j) {
    const auto i = state.index_of(mode_i);
    const auto j = state.index_of(mode_j);
    if (i == j) {
        throw InvalidParameter("EPR variance needs two distinct modes");
    }
    Vector g = Vector::Zero(state.mean().size());
    g(quad(i)) = std::cos(theta_i);
    g(quad(i) + 1) = -std::sin(theta_i);
    g(quad(j)) = -std::cos(theta_j);
    g(quad(j) + 1) = std::sin(theta_j);
    return g.dot(state.cov() * g);
}

double log_negativity(const GaussianState& state, std::span<const std::string> part) {
    if (part.empty() || part.size() >= state.n_modes()) {
        throw InvalidParameter("partition must be a non-empty proper subset of the modes");
    }
    const auto idx = indices_of(state, part);
    if (std::set<std::size_t>(idx.begin(), idx.end()).size() != idx.size()) {
        throw InvalidParameter("partition lists a mode twice");
    }
    if (!is_physical(state)) {
        throw InvalidState("state violates the uncertainty relation");
    }
    // Partial transposition flips the sign of P on one side of the cut.
    Vector flip = Vector::Ones(state.mean().size());
    for (auto k : idx) {
        flip(quad(k) + 1) = -1.0;
    }
    const Matrix pt = flip.asDiagonal() * state.cov() * flip.asDiagonal();
    const Vector nu = symplectic_eigenvalues(pt);
    double en = 0.0;
    for (Eigen::Index k = 0; k < nu.size(); ++k) {
        if (nu(k) < 1.0) {
            en -= std::log(nu(k));
        }
    }
    return en;
}

double log_negativity(const GaussianState& state, std::initializer_list<std::string> part) {
    return log_negativity(state, std::span<const std::string>(part.begin(), part.size()));
}

double decorrelation_norm(const GaussianState& state, std::span<const std::string> block_a,
                          std::span<const std::string> block_b) {
    const auto a = indices_of(state, block_a);
    const auto b = indices_of(state, block_b);
    require_disjoint(a, b, "decorrelation_norm");
    double sum = 0.0;
    for (auto i : a) {
        for (auto j : b) {
            sum += state.cov().block<2, 2>(quad(i), quad(j)).squaredNorm();
        }
    }
    return std::sqrt(sum);
}

double decorrelation_norm(const GaussianState& state, std::initializer_list<std::string> block_a,
                          std::initializer_list<std::string> block_b) {
    return decorrelation_norm(state, std::span<const std::string>(block_a.begin(), block_a.size()),
                              std::span<const std::string>(block_b.begin(), block_b.size()));
}

}  // namespace entpulse
