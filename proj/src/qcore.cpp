#include "eprsim/qcore.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace eprsim {

namespace {

constexpr cplx I{0.0, 1.0};

void require(bool cond, const std::string& what) {
    if (!cond) {
        throw std::invalid_argument(what);
    }
}

bool power_of_two(Eigen::Index v) { return v > 0 && (v & (v - 1)) == 0; }

}  // namespace

PureState PureState::computational(int n_qubits, std::uint32_t basis_index) {
    require(n_qubits >= 1 && n_qubits <= 10, "PureState: unsupported qubit count");
    const Eigen::Index dim = Eigen::Index(1) << n_qubits;
    require(basis_index < static_cast<std::uint32_t>(dim),
            "PureState: basis index out of range");
    PureState s;
    s.n_qubits = n_qubits;
    s.amplitudes = CVec::Zero(dim);
    s.amplitudes(basis_index) = 1.0;
    return s;
}

PureState PureState::from_amplitudes(int n_qubits, const CVec& amps) {
    require(amps.size() == (Eigen::Index(1) << n_qubits),
            "PureState: amplitude length must be 2^n");
    PureState s;
    s.n_qubits = n_qubits;
    s.amplitudes = amps;
    require(s.norm_error() < 1e-9, "PureState: amplitudes not normalized");
    return s;
}

double PureState::norm_error() const {
    return std::abs(amplitudes.squaredNorm() - 1.0);
}

MixedState MixedState::from_pure(const PureState& psi) {
    MixedState m;
    m.n_qubits = psi.n_qubits;
    m.rho = psi.amplitudes * psi.amplitudes.adjoint();
    return m;
}

MixedState MixedState::from_density(int n_qubits, const CMat& rho) {
    require(rho.rows() == rho.cols(), "MixedState: matrix must be square");
    require(rho.rows() == (Eigen::Index(1) << n_qubits),
            "MixedState: dimension must be 2^n");
    MixedState m;
    m.n_qubits = n_qubits;
    m.rho = rho;
    m.check_invariants();
    return m;
}

MixedState MixedState::maximally_mixed(int n_qubits) {
    const Eigen::Index dim = Eigen::Index(1) << n_qubits;
    MixedState m;
    m.n_qubits = n_qubits;
    m.rho = CMat::Identity(dim, dim) / static_cast<double>(dim);
    return m;
}

double MixedState::hermiticity_error() const {
    return (rho - rho.adjoint()).cwiseAbs().maxCoeff();
}

double MixedState::trace_error() const { return std::abs(rho.trace().real() - 1.0) +
                                                std::abs(rho.trace().imag()); }

double MixedState::min_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<CMat> es(0.5 * (rho + rho.adjoint()),
                                           Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

void MixedState::check_invariants() const {
    require(hermiticity_error() < 1e-10, "MixedState: not Hermitian");
    require(trace_error() < 1e-10, "MixedState: trace != 1");
    require(min_eigenvalue() > -1e-10, "MixedState: negative eigenvalue");
}

Unitary Unitary::checked(const CMat& m) {
    require(m.rows() == m.cols(), "Unitary: matrix must be square");
    require(power_of_two(m.rows()), "Unitary: dimension must be a power of two");
    const CMat gram = m.adjoint() * m;
    const double err =
        (gram - CMat::Identity(m.rows(), m.cols())).cwiseAbs().maxCoeff();
    require(err < 1e-10, "Unitary: U^dag U != I");
    return Unitary{m.rows(), m};
}

Unitary Unitary::identity(Eigen::Index dim) {
    return Unitary{dim, CMat::Identity(dim, dim)};
}

CMat pauli(Axis axis) {
    CMat m(2, 2);
    switch (axis) {
        case Axis::x:
            m << 0, 1, 1, 0;
            break;
        case Axis::y:
            m << 0, -I, I, 0;
            break;
        case Axis::z:
            m << 1, 0, 0, -1;
            break;
    }
    return m;
}

Unitary rotation(Axis axis, double theta) {
    require(std::isfinite(theta), "rotation: angle must be finite");
    const double c = std::cos(theta / 2.0);
    const double s = std::sin(theta / 2.0);
    CMat m(2, 2);
    switch (axis) {
        case Axis::x:
            m << c, -I * s, -I * s, c;
            break;
        case Axis::y:
            m << c, -s, s, c;
            break;
        case Axis::z:
            m << c - I * s, 0, 0, c + I * s;
            break;
    }
    return Unitary{2, m};
}

Unitary embed(const Unitary& u, const std::vector<int>& targets, int n_qubits) {
    require(n_qubits >= 1 && n_qubits <= 10, "embed: unsupported qubit count");
    require(u.dim == (Eigen::Index(1) << targets.size()),
            "embed: unitary dimension does not match target count");
    std::vector<int> seen;
    for (int t : targets) {
        require(t >= 0 && t < n_qubits, "embed: target out of range");
        require(std::find(seen.begin(), seen.end(), t) == seen.end(),
                "embed: duplicate target");
        seen.push_back(t);
    }
    const Eigen::Index dim = Eigen::Index(1) << n_qubits;
    const int k = static_cast<int>(targets.size());
    CMat out = CMat::Zero(dim, dim);

    // Qubit q occupies bit (n-1-q); u's qubit j maps to targets[j].
    auto sub_index = [&](Eigen::Index full) {
        Eigen::Index sub = 0;
        for (int j = 0; j < k; ++j) {
            const int bit = n_qubits - 1 - targets[j];
            sub |= ((full >> bit) & 1) << (k - 1 - j);
        }
        return sub;
    };
    auto rest_mask = [&](Eigen::Index full) {
        Eigen::Index rest = full;
        for (int j = 0; j < k; ++j) {
            rest &= ~(Eigen::Index(1) << (n_qubits - 1 - targets[j]));
        }
        return rest;
    };
    auto with_sub = [&](Eigen::Index rest, Eigen::Index sub) {
        Eigen::Index full = rest;
        for (int j = 0; j < k; ++j) {
            const int bit = n_qubits - 1 - targets[j];
            full |= ((sub >> (k - 1 - j)) & 1) << bit;
        }
        return full;
    };

    for (Eigen::Index col = 0; col < dim; ++col) {
        const Eigen::Index rest = rest_mask(col);
        const Eigen::Index sub_col = sub_index(col);
        for (Eigen::Index sub_row = 0; sub_row < u.dim; ++sub_row) {
            const cplx v = u.matrix(sub_row, sub_col);
            if (v != 0.0) {
                out(with_sub(rest, sub_row), col) = v;
            }
        }
    }
    return Unitary{dim, out};
}

PureState apply(const Unitary& u, const PureState& s) {
    require(u.dim == s.dim(), "apply: dimension mismatch");
    PureState out;
    out.n_qubits = s.n_qubits;
    out.amplitudes = u.matrix * s.amplitudes;
    return out;
}

MixedState apply(const Unitary& u, const MixedState& s) {
    require(u.dim == s.dim(), "apply: dimension mismatch");
    MixedState out;
    out.n_qubits = s.n_qubits;
    out.rho = u.matrix * s.rho * u.matrix.adjoint();
    return out;
}

CMat sigma_theta(double theta) {
    return std::cos(theta) * pauli(Axis::z) + std::sin(theta) * pauli(Axis::x);
}

CMat sigma_theta_projector(double theta, int outcome) {
    require(outcome == 1 || outcome == -1, "projector: outcome must be +/-1");
    return 0.5 * (CMat::Identity(2, 2) + static_cast<double>(outcome) * sigma_theta(theta));
}

double outcome_probability(const MixedState& s, int qubit, double theta, int outcome) {
    require(qubit >= 0 && qubit < s.n_qubits, "measure: qubit out of range");
    // embed() only reads dim/matrix, so it works for projectors too.
    Unitary proj;
    proj.dim = 2;
    proj.matrix = sigma_theta_projector(theta, outcome);
    const Unitary embedded = embed(proj, {qubit}, s.n_qubits);
    return (embedded.matrix * s.rho).trace().real();
}

std::pair<MeasurementRecord, PureState> measure_qubit(const PureState& s, int qubit,
                                                      double theta,
                                                      rng::UniformSource& rng) {
    require(qubit >= 0 && qubit < s.n_qubits, "measure: qubit out of range");
    Unitary proj_plus;
    proj_plus.dim = 2;
    proj_plus.matrix = sigma_theta_projector(theta, +1);
    const Unitary p_plus = embed(proj_plus, {qubit}, s.n_qubits);

    const CVec projected = p_plus.matrix * s.amplitudes;
    const double p = projected.squaredNorm();
    const int outcome = (rng.next() < p) ? +1 : -1;

    PureState out;
    out.n_qubits = s.n_qubits;
    if (outcome == +1) {
        out.amplitudes = projected / std::sqrt(p);
    } else {
        const CVec rest = s.amplitudes - projected;
        out.amplitudes = rest / std::sqrt(std::max(1.0 - p, 1e-300));
    }
    return {MeasurementRecord{qubit, theta, outcome}, out};
}

std::pair<MeasurementRecord, MixedState> measure_qubit(const MixedState& s, int qubit,
                                                       double theta,
                                                       rng::UniformSource& rng) {
    const double p = outcome_probability(s, qubit, theta, +1);
    const int outcome = (rng.next() < p) ? +1 : -1;

    Unitary proj;
    proj.dim = 2;
    proj.matrix = sigma_theta_projector(theta, outcome);
    const Unitary embedded = embed(proj, {qubit}, s.n_qubits);
    const double norm = (outcome == +1) ? p : std::max(1.0 - p, 1e-300);

    MixedState out;
    out.n_qubits = s.n_qubits;
    out.rho = embedded.matrix * s.rho * embedded.matrix.adjoint() / norm;
    return {MeasurementRecord{qubit, theta, outcome}, out};
}

double expectation(const PureState& s, const CMat& observable) {
    require(observable.rows() == s.dim() && observable.cols() == s.dim(),
            "expectation: dimension mismatch");
    require(is_hermitian(observable), "expectation: observable not Hermitian");
    const cplx v = s.amplitudes.dot(observable * s.amplitudes);
    return v.real();
}

double expectation(const MixedState& s, const CMat& observable) {
    require(observable.rows() == s.dim() && observable.cols() == s.dim(),
            "expectation: dimension mismatch");
    require(is_hermitian(observable), "expectation: observable not Hermitian");
    return (observable * s.rho).trace().real();
}

PureState tensor(const PureState& a, const PureState& b) {
    PureState out;
    out.n_qubits = a.n_qubits + b.n_qubits;
    out.amplitudes = CVec(a.dim() * b.dim());
    for (Eigen::Index i = 0; i < a.dim(); ++i) {
        out.amplitudes.segment(i * b.dim(), b.dim()) = a.amplitudes(i) * b.amplitudes;
    }
    return out;
}

MixedState tensor(const MixedState& a, const MixedState& b) {
    MixedState out;
    out.n_qubits = a.n_qubits + b.n_qubits;
    out.rho = kron(a.rho, b.rho);
    return out;
}

MixedState partial_trace(const MixedState& s, const std::vector<int>& keep) {
    require(!keep.empty(), "partial_trace: keep set must be non-empty");
    std::vector<int> kept = keep;
    std::sort(kept.begin(), kept.end());
    require(std::unique(kept.begin(), kept.end()) == kept.end(),
            "partial_trace: duplicate kept qubit");
    for (int q : kept) {
        require(q >= 0 && q < s.n_qubits, "partial_trace: qubit out of range");
    }
    const int n = s.n_qubits;
    const int nk = static_cast<int>(kept.size());
    std::vector<int> traced;
    for (int q = 0; q < n; ++q) {
        if (!std::binary_search(kept.begin(), kept.end(), q)) {
            traced.push_back(q);
        }
    }
    const Eigen::Index dim_out = Eigen::Index(1) << nk;
    const Eigen::Index dim_tr = Eigen::Index(1) << traced.size();

    auto full_index = [&](Eigen::Index kept_bits, Eigen::Index traced_bits) {
        Eigen::Index full = 0;
        for (int j = 0; j < nk; ++j) {
            full |= ((kept_bits >> (nk - 1 - j)) & 1) << (n - 1 - kept[j]);
        }
        for (std::size_t j = 0; j < traced.size(); ++j) {
            full |= ((traced_bits >> (traced.size() - 1 - j)) & 1)
                    << (n - 1 - traced[j]);
        }
        return full;
    };

    MixedState out;
    out.n_qubits = nk;
    out.rho = CMat::Zero(dim_out, dim_out);
    for (Eigen::Index r = 0; r < dim_out; ++r) {
        for (Eigen::Index c = 0; c < dim_out; ++c) {
            cplx sum = 0.0;
            for (Eigen::Index t = 0; t < dim_tr; ++t) {
                sum += s.rho(full_index(r, t), full_index(c, t));
            }
            out.rho(r, c) = sum;
        }
    }
    return out;
}

CMat kron(const CMat& a, const CMat& b) {
    CMat out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

double phase_distance(const CMat& u, const CMat& v) {
    // The minimizing phase is arg tr(V^dag U); evaluating the difference
    // directly avoids the cancellation a norm-and-trace formula suffers
    // near zero distance.
    const cplx overlap = (v.adjoint() * u).trace();
    if (std::abs(overlap) == 0.0) {
        return std::sqrt(u.squaredNorm() + v.squaredNorm());
    }
    const cplx phase = overlap / std::abs(overlap);
    return (u - phase * v).norm();
}

bool is_hermitian(const CMat& m, double tol) {
    if (m.rows() != m.cols()) {
        return false;
    }
    return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

}  // namespace eprsim
