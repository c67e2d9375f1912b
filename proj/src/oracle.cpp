#include "srlaser/oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <random>

#include <Eigen/SparseLU>
#include <unsupported/Eigen/KroneckerProduct>

#include "srlaser/dicke.hpp"
#include "srlaser/error.hpp"

namespace srl::oracle {

namespace {

constexpr cplx kI{0.0, 1.0};

SparseOperator sparse_identity(int d) {
    SparseOperator m(d, d);
    m.setIdentity();
    return m;
}

SparseOperator kron(const SparseOperator& a, const SparseOperator& b) {
    SparseOperator out = Eigen::kroneckerProduct(a, b);
    return out;
}

SparseOperator ladder(int levels) {
    SparseOperator m(levels, levels);
    std::vector<Eigen::Triplet<cplx>> t;
    for (int k = 1; k < levels; ++k) t.emplace_back(k - 1, k, std::sqrt(static_cast<double>(k)));
    m.setFromTriplets(t.begin(), t.end());
    return m;
}

/// Embeds a single-site operator at position `site` of the ordered factor list.
SparseOperator embed(const std::vector<int>& dims, std::size_t site, const SparseOperator& op) {
    SparseOperator out = site == 0 ? op : sparse_identity(dims[0]);
    for (std::size_t k = 1; k < dims.size(); ++k) {
        out = kron(out, k == site ? op : sparse_identity(dims[k]));
    }
    return out;
}

std::vector<int> factor_dims(const Space& s) {
    std::vector<int> dims(static_cast<std::size_t>(s.n_atoms), 2);
    dims.push_back(s.n_max + 1);
    if (s.m_max) dims.push_back(*s.m_max + 1);
    return dims;
}

SparseOperator adjoint(const SparseOperator& m) { return m.adjoint(); }

double max_abs(const DenseOperator& m) { return m.cwiseAbs().maxCoeff(); }

/// Vector indices of the sector exc(ket) - exc(bra) = k.
std::vector<int> sector_indices(const Space& space, int k) {
    const auto exc = space.excitations();
    const int d = space.dim();
    std::vector<int> idx;
    for (int j = 0; j < d; ++j) {
        for (int i = 0; i < d; ++i) {
            if (exc[static_cast<std::size_t>(i)] - exc[static_cast<std::size_t>(j)] == k) {
                idx.push_back(i + d * j);
            }
        }
    }
    return idx;
}

SparseOperator restrict_to(const SparseOperator& full, const std::vector<int>& idx,
                           bool with_diagonal) {
    std::vector<int> map(static_cast<std::size_t>(full.rows()), -1);
    for (std::size_t k = 0; k < idx.size(); ++k) map[static_cast<std::size_t>(idx[k])] = static_cast<int>(k);
    std::vector<Eigen::Triplet<cplx>> t;
    for (int col = 0; col < full.outerSize(); ++col) {
        const int c = map[static_cast<std::size_t>(col)];
        if (c < 0) continue;
        for (SparseOperator::InnerIterator it(full, col); it; ++it) {
            const int r = map[static_cast<std::size_t>(it.row())];
            if (r >= 0) t.emplace_back(r, c, it.value());
        }
    }
    const int n = static_cast<int>(idx.size());
    if (with_diagonal) {
        for (int k = 0; k < n; ++k) t.emplace_back(k, k, cplx{0.0, 0.0});
    }
    SparseOperator out(n, n);
    out.setFromTriplets(t.begin(), t.end());
    out.makeCompressed();
    return out;
}

cplx expect(const SparseOperator& op, const DenseOperator& rho) {
    // Tr[op rho]
    return (op * rho).trace();
}

}  // namespace

int Space::dim() const {
    int d = (1 << n_atoms) * (n_max + 1);
    if (m_max) d *= *m_max + 1;
    return d;
}

std::vector<int> Space::excitations() const {
    const int fock = n_max + 1;
    const int filt = m_max ? *m_max + 1 : 1;
    std::vector<int> out(static_cast<std::size_t>(dim()));
    for (int idx = 0; idx < dim(); ++idx) {
        const int m = idx % filt;
        const int n = (idx / filt) % fock;
        const int atoms = idx / (filt * fock);
        out[static_cast<std::size_t>(idx)] = std::popcount(static_cast<unsigned>(atoms)) + n + m;
    }
    return out;
}

Operators build_operators(const Space& space) {
    if (space.n_atoms < 1 || space.n_max < 0 || (space.m_max && *space.m_max < 0)) {
        throw InputError("oracle: invalid space");
    }
    Operators ops;
    ops.space = space;
    const auto dims = factor_dims(space);
    const int d = space.dim();
    ops.identity = sparse_identity(d);

    // Atom basis |0> = ground, |1> = excited.
    SparseOperator sm(2, 2);
    sm.insert(0, 1) = 1.0;
    SparseOperator sz(2, 2);
    sz.insert(0, 0) = -1.0;
    sz.insert(1, 1) = 1.0;
    for (int i = 0; i < space.n_atoms; ++i) {
        ops.sigma_minus.push_back(embed(dims, static_cast<std::size_t>(i), sm));
        ops.sigma_z.push_back(embed(dims, static_cast<std::size_t>(i), sz));
    }
    ops.a = embed(dims, static_cast<std::size_t>(space.n_atoms), ladder(space.n_max + 1));
    if (space.m_max) {
        ops.f = embed(dims, static_cast<std::size_t>(space.n_atoms) + 1, ladder(*space.m_max + 1));
    }
    return ops;
}

Model build_model(const SystemParams& params, const Space& space,
                  const std::optional<FilterProbe>& probe) {
    params.validate();
    if (probe && !space.m_max) {
        throw InputError("oracle: filter probe needs a filter Fock space");
    }
    Model m;
    m.ops = build_operators(space);
    const auto& o = m.ops;
    const SparseOperator ad = adjoint(o.a);
    SparseOperator h = params.omega_c * (ad * o.a);
    for (int i = 0; i < space.n_atoms; ++i) {
        const auto& smi = o.sigma_minus[static_cast<std::size_t>(i)];
        const SparseOperator spi = adjoint(smi);
        h += (0.5 * params.omega_a) * o.sigma_z[static_cast<std::size_t>(i)];
        h += params.g * (ad * smi + o.a * spi);
    }
    if (params.kappa > 0.0) m.collapse.push_back(std::sqrt(params.kappa) * o.a);
    for (int i = 0; i < space.n_atoms; ++i) {
        const auto& smi = o.sigma_minus[static_cast<std::size_t>(i)];
        if (params.gamma > 0.0) m.collapse.push_back(std::sqrt(params.gamma) * smi);
        if (params.eta > 0.0) m.collapse.push_back(std::sqrt(params.eta) * adjoint(smi));
        if (params.chi > 0.0) {
            m.collapse.push_back(std::sqrt(params.chi / 2.0) * o.sigma_z[static_cast<std::size_t>(i)]);
        }
    }
    if (probe) {
        const SparseOperator fd = adjoint(o.f);
        h += probe->omega_f * (fd * o.f);
        h += probe->big_g * (ad * o.f + o.a * fd);
        m.collapse.push_back(std::sqrt(probe->beta) * o.f);
    }
    m.hamiltonian = h;
    return m;
}

SparseOperator build_liouvillian(const Model& model) {
    const int d = model.ops.space.dim();
    const std::int64_t d2 = static_cast<std::int64_t>(d) * d;
    if (d2 > kMaxLiouvilleDim) {
        throw InputError("oracle: Liouville dimension " + std::to_string(d2) +
                         " exceeds the memory budget");
    }
    const SparseOperator id = sparse_identity(d);
    const SparseOperator& h = model.hamiltonian;
    SparseOperator ht = h.transpose();
    SparseOperator l = -kI * (kron(id, h) - kron(ht, id));
    for (const auto& c : model.collapse) {
        const SparseOperator cdc = adjoint(c) * c;
        const SparseOperator cconj = c.conjugate();
        const SparseOperator cdct = cdc.transpose();
        l += kron(cconj, c);
        l -= 0.5 * kron(id, cdc);
        l -= 0.5 * kron(cdct, id);
    }
    l.makeCompressed();
    return l;
}

SparseOperator build_liouvillian(const SystemParams& params, int n_max) {
    if (n_max < 0) {
        throw InputError("oracle: n_max must be >= 0");
    }
    return build_liouvillian(build_model(params, Space{static_cast<int>(params.n_atoms), n_max, {}}));
}

DenseOperator apply_liouvillian(const Model& model, const DenseOperator& rho) {
    // rho X = (X+ rho+)+ keeps every product sparse-times-dense.
    const DenseOperator rho_dag = rho.adjoint();
    auto right = [&](const SparseOperator& x) -> DenseOperator {
        return (adjoint(x) * rho_dag).adjoint();
    };
    const auto& h = model.hamiltonian;
    DenseOperator out = -kI * (h * rho - right(h));
    for (const auto& c : model.collapse) {
        const SparseOperator cdc = adjoint(c) * c;
        const DenseOperator rho_cd = (c * rho_dag).adjoint();
        out += c * rho_cd;
        out -= 0.5 * (cdc * rho + right(cdc));
    }
    return out;
}

MomentState Moments::as_moment_state() const {
    return {photon_number, atom_photon, inversion, pair_corr};
}

ExtendedState Moments::as_extended_state() const {
    ExtendedState e;
    e.base = as_moment_state();
    e.filter_number = filter_number;
    e.cross_photon = cross_photon;
    e.cross_atom = cross_atom;
    return e;
}

Moments expectation_values(const Operators& ops, const DenseOperator& rho) {
    const int n_atoms = ops.space.n_atoms;
    if (rho.rows() != ops.space.dim() || rho.cols() != ops.space.dim()) {
        throw InputError("oracle: density matrix does not match the operator space");
    }
    Moments m;
    const SparseOperator ad = adjoint(ops.a);
    m.photon_number = expect(ad * ops.a, rho).real();
    for (int i = 0; i < n_atoms; ++i) {
        const auto& smi = ops.sigma_minus[static_cast<std::size_t>(i)];
        m.inversion_per_atom.push_back(expect(ops.sigma_z[static_cast<std::size_t>(i)], rho).real());
        m.atom_photon_per_atom.push_back(expect(ops.a * adjoint(smi), rho));
        for (int j = 0; j < n_atoms; ++j) {
            if (i == j) continue;
            m.pair_corr_per_pair.push_back(
                expect(adjoint(smi) * ops.sigma_minus[static_cast<std::size_t>(j)], rho));
        }
    }
    m.inversion = m.inversion_per_atom[0];
    m.atom_photon = m.atom_photon_per_atom[0];
    if (n_atoms >= 2) {
        m.pair_corr = m.pair_corr_per_pair[0];
        m.zz = expect(ops.sigma_z[0] * ops.sigma_z[1], rho).real();
    }
    // <J^2> = <Jx^2 + Jy^2 + Jz^2> with J = (1/2) sum sigma.
    SparseOperator jm = ops.sigma_minus[0];
    SparseOperator jz = 0.5 * ops.sigma_z[0];
    for (int i = 1; i < n_atoms; ++i) {
        jm += ops.sigma_minus[static_cast<std::size_t>(i)];
        jz += 0.5 * ops.sigma_z[static_cast<std::size_t>(i)];
    }
    const SparseOperator jp = adjoint(jm);
    const SparseOperator j2 = 0.5 * (jp * jm + jm * jp) + jz * jz;
    m.j_squared = expect(j2, rho).real();
    if (ops.space.m_max) {
        const SparseOperator fd = adjoint(ops.f);
        m.filter_number = expect(fd * ops.f, rho).real();
        m.cross_photon = expect(ops.a * fd, rho);
        m.cross_atom = expect(ops.sigma_minus[0] * fd, rho);
    }
    return m;
}

MomentDerivatives moment_derivatives(const Model& model, const DenseOperator& rho) {
    const auto& ops = model.ops;
    if (rho.rows() != ops.space.dim() || rho.cols() != ops.space.dim()) {
        throw InputError("moment_derivatives: density matrix does not match the model space");
    }
    const DenseOperator lr = apply_liouvillian(model, rho);
    const Moments m = expectation_values(ops, lr);
    MomentDerivatives d;
    d.photon_number = m.photon_number;
    d.atom_photon = m.atom_photon;
    d.inversion = m.inversion;
    d.pair_corr = m.pair_corr;
    d.filter_number = m.filter_number;
    d.cross_photon = m.cross_photon;
    d.cross_atom = m.cross_atom;
    return d;
}

Result steady_state_at_cutoff(const SystemParams& params, int n_max) {
    if (params.n_atoms > 6) {
        throw InputError("oracle: at most 6 atoms");
    }
    const Space space{static_cast<int>(params.n_atoms), n_max, {}};
    const Model model = build_model(params, space);
    const SparseOperator l = build_liouvillian(model);
    const int d = space.dim();

    const auto idx = sector_indices(space, 0);
    SparseOperator a = restrict_to(l, idx, true);
    const int n = static_cast<int>(idx.size());

    // Replace the row of rho(0,0) by the trace functional.
    std::vector<Eigen::Triplet<cplx>> t;
    int row0 = -1;
    for (int k = 0; k < n; ++k) {
        if (idx[static_cast<std::size_t>(k)] == 0) row0 = k;
    }
    for (int col = 0; col < a.outerSize(); ++col) {
        for (SparseOperator::InnerIterator it(a, col); it; ++it) {
            if (it.row() != row0) t.emplace_back(static_cast<int>(it.row()), col, it.value());
        }
    }
    for (int k = 0; k < n; ++k) {
        const int v = idx[static_cast<std::size_t>(k)];
        if (v % d == v / d) t.emplace_back(row0, k, cplx{1.0, 0.0});
    }
    SparseOperator sys(n, n);
    sys.setFromTriplets(t.begin(), t.end());
    sys.makeCompressed();
    Eigen::VectorXcd rhs_vec = Eigen::VectorXcd::Zero(n);
    rhs_vec[row0] = 1.0;

    Eigen::SparseLU<SparseOperator> lu;
    lu.compute(sys);
    if (lu.info() != Eigen::Success) {
        throw SolverError("oracle: steady-state system is singular");
    }
    const Eigen::VectorXcd x = lu.solve(rhs_vec);

    Result r;
    r.n_max = n_max;
    r.rho_ss = DenseOperator::Zero(d, d);
    for (int k = 0; k < n; ++k) {
        const int v = idx[static_cast<std::size_t>(k)];
        r.rho_ss(v % d, v / d) = x[k];
    }
    r.hermiticity_error = max_abs(r.rho_ss - r.rho_ss.adjoint());
    r.rho_ss = 0.5 * (r.rho_ss + r.rho_ss.adjoint()).eval();
    r.trace_error = std::abs(r.rho_ss.trace() - 1.0);
    r.residual = max_abs(apply_liouvillian(model, r.rho_ss));
    Eigen::SelfAdjointEigenSolver<DenseOperator> es(r.rho_ss, Eigen::EigenvaluesOnly);
    r.min_eigenvalue = es.eigenvalues().minCoeff();
    r.moments = expectation_values(model.ops, r.rho_ss);
    return r;
}

namespace {

double moment_drift(const Moments& a, const Moments& b) {
    auto rel = [](double x, double y) {
        return std::abs(x - y) / (std::max(std::abs(x), std::abs(y)) + 1e-12);
    };
    return std::max({rel(a.photon_number, b.photon_number),
                     rel(a.atom_photon.real(), b.atom_photon.real()),
                     rel(a.atom_photon.imag(), b.atom_photon.imag()), rel(a.inversion, b.inversion),
                     rel(a.pair_corr.real(), b.pair_corr.real()), rel(a.zz, b.zz),
                     rel(a.j_squared, b.j_squared)});
}

}  // namespace

Result oracle_steady_state(const SystemParams& params, int n_max) {
    if (n_max < 1) {
        throw InputError("oracle: n_max must be >= 1");
    }
    Result coarse = steady_state_at_cutoff(params, n_max);
    double drift = 0.0;
    for (int round = 0; round < 3; ++round) {
        Result fine = steady_state_at_cutoff(params, coarse.n_max + 2);
        drift = moment_drift(coarse.moments, fine.moments);
        fine.cutoff_drift = drift;
        if (drift < 1e-6) {
            return fine;
        }
        coarse = std::move(fine);
    }
    throw SolverError("oracle: photon cutoff not converged (relative drift " +
                          std::to_string(drift) + " at n_max = " + std::to_string(coarse.n_max) + ")",
                      drift);
}

DenseOperator propagate(const SparseOperator& liouvillian, const DenseOperator& rho0, double t) {
    const auto d = rho0.rows();
    if (liouvillian.rows() != d * d) {
        throw InputError("propagate: Liouvillian does not match the density matrix");
    }
    double norm1 = 0.0;
    for (int col = 0; col < liouvillian.outerSize(); ++col) {
        double s = 0.0;
        for (SparseOperator::InnerIterator it(liouvillian, col); it; ++it) s += std::abs(it.value());
        norm1 = std::max(norm1, s);
    }
    const int steps = std::max(1, static_cast<int>(std::ceil(norm1 * std::abs(t) / 0.5)));
    const double h = t / steps;
    Eigen::VectorXcd v = Eigen::Map<const Eigen::VectorXcd>(rho0.data(), d * d);
    for (int s = 0; s < steps; ++s) {
        Eigen::VectorXcd term = v;
        Eigen::VectorXcd acc = v;
        for (int k = 1; k < 60; ++k) {
            term = (h / k) * (liouvillian * term);
            acc += term;
            if (term.norm() <= 1e-17 * acc.norm()) break;
        }
        v = acc;
    }
    return Eigen::Map<const DenseOperator>(v.data(), d, d);
}

namespace {

struct RegressionSetup {
    Result ss;
    Model model;
    std::vector<int> idx;
    SparseOperator sector;  // L restricted to exc(ket) - exc(bra) = -1
    Eigen::VectorXcd source;  // vec(a rho_ss) on the sector
};

RegressionSetup regression_setup(const SystemParams& params, int n_max) {
    RegressionSetup r{oracle_steady_state(params, n_max), {}, {}, {}, {}};
    const Space space{static_cast<int>(params.n_atoms), r.ss.n_max, {}};
    r.model = build_model(params, space);
    const SparseOperator l = build_liouvillian(r.model);
    r.idx = sector_indices(space, -1);
    r.sector = restrict_to(l, r.idx, true);
    const DenseOperator a_rho = r.model.ops.a * r.ss.rho_ss;
    const int d = space.dim();
    r.source.resize(static_cast<Eigen::Index>(r.idx.size()));
    for (std::size_t k = 0; k < r.idx.size(); ++k) {
        const int v = r.idx[k];
        r.source[static_cast<Eigen::Index>(k)] = a_rho(v % d, v / d);
    }
    return r;
}

cplx trace_adag(const RegressionSetup& r, const Eigen::VectorXcd& y) {
    // Tr[a+ Y] = sum_ij conj(a_ij) Y_ij
    const int d = r.model.ops.space.dim();
    const SparseOperator& a = r.model.ops.a;
    DenseOperator big = DenseOperator::Zero(d, d);
    for (std::size_t k = 0; k < r.idx.size(); ++k) {
        const int v = r.idx[k];
        big(v % d, v / d) = y[static_cast<Eigen::Index>(k)];
    }
    return (adjoint(a) * big).trace();
}

}  // namespace

SpectrumScan oracle_spectrum(const SystemParams& params, int n_max,
                             std::span<const double> omega_grid) {
    const auto setup = regression_setup(params, n_max);
    const auto n = setup.sector.rows();
    SparseOperator base = -setup.sector;
    Eigen::SparseLU<SparseOperator> lu;
    lu.analyzePattern(base);

    SpectrumScan out;
    out.method = ScanMethod::quantum_regression;
    double peak = 0.0;
    for (double w : omega_grid) {
        SparseOperator m = base;
        for (Eigen::Index k = 0; k < n; ++k) m.coeffRef(k, k) += kI * w;
        lu.factorize(m);
        if (lu.info() != Eigen::Success) {
            throw SolverError("oracle_spectrum: resolvent is singular at omega = " +
                              std::to_string(w));
        }
        const Eigen::VectorXcd y = lu.solve(setup.source);
        const double s = trace_adag(setup, y).real();
        out.points.push_back({w, s});
        peak = std::max(peak, s);
    }
    if (peak > 0.0) {
        for (auto& p : out.points) p.intensity /= peak;
    } else {
        for (auto& p : out.points) p.intensity = 0.0;
    }
    return out;
}

std::vector<cplx> oracle_correlation(const SystemParams& params, int n_max,
                                     std::span<const double> taus) {
    const auto setup = regression_setup(params, n_max);
    std::vector<cplx> out;
    double prev = 0.0;
    Eigen::VectorXcd v = setup.source;
    // Propagate on the sector with the same Taylor scheme.
    double norm1 = 0.0;
    for (int col = 0; col < setup.sector.outerSize(); ++col) {
        double s = 0.0;
        for (SparseOperator::InnerIterator it(setup.sector, col); it; ++it) s += std::abs(it.value());
        norm1 = std::max(norm1, s);
    }
    for (double tau : taus) {
        const double dt = tau - prev;
        if (dt < 0.0) throw InputError("oracle_correlation: taus must be non-decreasing");
        const int steps = std::max(1, static_cast<int>(std::ceil(norm1 * dt / 0.5)));
        const double h = dt / steps;
        for (int s = 0; s < steps && dt > 0.0; ++s) {
            Eigen::VectorXcd term = v;
            Eigen::VectorXcd acc = v;
            for (int k = 1; k < 60; ++k) {
                term = (h / k) * (setup.sector * term);
                acc += term;
                if (term.norm() <= 1e-17 * acc.norm()) break;
            }
            v = acc;
        }
        prev = tau;
        out.push_back(trace_adag(setup, v));
    }
    return out;
}

DenseOperator random_product_state(const Space& space, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    auto random_density = [&](int dim, int support) {
        DenseOperator g = DenseOperator::Zero(dim, dim);
        for (int i = 0; i < support; ++i) {
            for (int j = 0; j < support; ++j) g(i, j) = cplx{normal(rng), normal(rng)};
        }
        DenseOperator rho = g * g.adjoint();
        return DenseOperator(rho / rho.trace());
    };
    const DenseOperator atom = random_density(2, 2);
    const DenseOperator cav = random_density(space.n_max + 1, std::max(1, space.n_max));
    DenseOperator rho = atom;
    for (int i = 1; i < space.n_atoms; ++i) {
        rho = Eigen::kroneckerProduct(rho, atom).eval();
    }
    rho = Eigen::kroneckerProduct(rho, cav).eval();
    if (space.m_max) {
        const DenseOperator filt = random_density(*space.m_max + 1, std::max(1, *space.m_max));
        rho = Eigen::kroneckerProduct(rho, filt).eval();
    }
    return rho;
}

std::vector<Check> run_checks(std::uint64_t seed) {
    std::vector<Check> out;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);

    auto rel_err = [](cplx got, cplx want, double floor) {
        return std::abs(got - want) / (std::abs(want) + floor);
    };

    // Derivative match of the moment equations on random product states.
    for (int n_atoms : {2, 3, 4}) {
        Check c{"derivative_match_N" + std::to_string(n_atoms), 0.0, 1e-10, true};
        for (int trial = 0; trial < 25; ++trial) {
            SystemParams p;
            p.n_atoms = n_atoms;
            p.kappa = 1.0;
            p.g = 0.05 + 0.5 * uni(rng);
            p.gamma = 0.5 * uni(rng);
            p.eta = 0.5 * uni(rng);
            p.chi = 0.2 * uni(rng);
            p.omega_a = uni(rng) - 0.5;
            p.omega_c = uni(rng) - 0.5;
            const Space space{n_atoms, 4, {}};
            const Model model = build_model(p, space);
            const DenseOperator rho = random_product_state(space, rng());
            const auto exact = moment_derivatives(model, rho);
            const auto approx = rhs(expectation_values(model.ops, rho).as_moment_state(), p);
            const double floor = 1e-6 * (p.kappa + p.gamma + p.eta + p.chi + p.g * n_atoms);
            c.max_error = std::max({c.max_error,
                                    rel_err(approx.photon_number, exact.photon_number, floor),
                                    rel_err(approx.atom_photon, exact.atom_photon, floor),
                                    rel_err(approx.inversion, exact.inversion, floor),
                                    rel_err(approx.pair_corr, exact.pair_corr, floor)});
        }
        c.pass = c.max_error <= c.tolerance;
        out.push_back(c);
    }

    // Filter-extended derivative match (N = 2).
    {
        Check c{"filter_derivative_match_N2", 0.0, 1e-10, true};
        for (int trial = 0; trial < 10; ++trial) {
            SystemParams p;
            p.n_atoms = 2;
            p.kappa = 1.0;
            p.g = 0.25;
            p.gamma = 0.01 + 0.1 * uni(rng);
            p.eta = 0.2 * uni(rng);
            p.chi = 0.05 * uni(rng);
            const FilterProbe probe{0.1 + 0.2 * uni(rng), 0.05 + 0.2 * uni(rng), uni(rng) - 0.5};
            const Space space{2, 3, 3};
            const Model model = build_model(p, space, probe);
            const DenseOperator rho = random_product_state(space, rng());
            const auto exact = moment_derivatives(model, rho);
            const auto approx =
                filter_rhs(expectation_values(model.ops, rho).as_extended_state(), p, probe);
            const double floor = 1e-6 * (p.kappa + p.g * 2 + probe.big_g + probe.beta);
            c.max_error = std::max({c.max_error,
                                    rel_err(approx.base.photon_number, exact.photon_number, floor),
                                    rel_err(approx.base.atom_photon, exact.atom_photon, floor),
                                    rel_err(approx.filter_number, exact.filter_number, floor),
                                    rel_err(approx.cross_photon, exact.cross_photon, floor),
                                    rel_err(approx.cross_atom, exact.cross_atom, floor)});
        }
        c.pass = c.max_error <= c.tolerance;
        out.push_back(c);
    }

    // Steady state: cumulant photon number against the exact N = 4 value.
    {
        SystemParams p;
        p.n_atoms = 4;
        p.kappa = 1.0;
        p.g = 0.25;
        p.gamma = 0.01;
        p.eta = 0.2;
        const auto exact = oracle_steady_state(p, 6);
        const auto approx = srl::steady_state(p);
        Check c{"steady_photon_number_N4", 0.0, 0.2, true};
        c.max_error = std::abs(approx.state.photon_number - exact.moments.photon_number) /
                      exact.moments.photon_number;
        c.pass = c.max_error <= c.tolerance;
        out.push_back(c);

        Check v{"oracle_state_validity_N4", 0.0, 1e-8, true};
        v.max_error = std::max({exact.trace_error, exact.hermiticity_error,
                                std::max(0.0, -exact.min_eigenvalue)});
        v.pass = exact.trace_error < 1e-10 && exact.hermiticity_error < 1e-10 &&
                 exact.min_eigenvalue >= -1e-8;
        out.push_back(v);
    }
    return out;
}

}  // namespace srl::oracle
