#pragma once

// Exact Tavis-Cummings model on Fock (x) Dicke space and its unitary
// evolution by spectral decomposition. This is the ground truth every
// approximation is compared against.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>

#include "tcsim/fock.hpp"
#include "tcsim/parallel.hpp"
#include "tcsim/spin.hpp"

namespace tcsim
{

/// Physical parameters in units with hbar = 1.
struct ModelParams
{
    double omega = 1.0;  ///< cavity mode frequency
    double delta = 1.0;  ///< atomic level splitting
    double g = 0.1;      ///< single-atom coupling
    std::size_t n_atoms = 1;

    bool resonant() const noexcept { return std::abs(omega - delta) <= 1e-14; }

    /// sqrt(N) g, the collective Rabi frequency.
    double collective_coupling() const noexcept { return std::sqrt(static_cast<double>(n_atoms)) * g; }
};

enum class Provenance
{
    exact,
    leading,
    corrected,
    closed_form
};

inline const char* to_string(Provenance p)
{
    switch (p)
    {
    case Provenance::exact: return "exact";
    case Provenance::leading: return "leading";
    case Provenance::corrected: return "corrected";
    case Provenance::closed_form: return "closed-form";
    }
    return "unknown";
}

/// Observable values on a time grid. values[k][i] is observable k at times[i].
struct TimeSeries
{
    std::vector<double> times;
    Provenance provenance = Provenance::exact;
    std::vector<std::string> names;
    std::vector<std::vector<double>> values;
    std::vector<double> norm_drift;  ///< | ||psi(t)|| - 1 | per time point
    double max_imaginary = 0.0;      ///< largest |Im <O>| seen for Hermitian observables

    const std::vector<double>& column(const std::string& name) const
    {
        const auto it = std::find(names.begin(), names.end(), name);
        if (it == names.end()) throw Error("TimeSeries: no observable named " + name);
        return values[static_cast<std::size_t>(it - names.begin())];
    }
};

inline bool strictly_increasing(const std::vector<double>& times)
{
    return std::adjacent_find(times.begin(), times.end(), std::greater_equal<>{}) == times.end();
}

/// n_points equally spaced times including both endpoints.
inline std::vector<double> linear_grid(double t_start, double t_end, std::size_t n_points)
{
    std::vector<double> t(n_points);
    const double step = n_points > 1 ? (t_end - t_start) / static_cast<double>(n_points - 1) : 0.0;
    for (std::size_t i = 0; i < n_points; ++i) t[i] = t_start + step * static_cast<double>(i);
    if (n_points > 1) t.back() = t_end;
    return t;
}

/// omega a^dagger a + Delta S_z + g (S_+ a + S_- a^dagger) on Fock (x) Dicke.
inline OperatorMatrix build_tc_hamiltonian(const ModelParams& params, const FockSpace& fock, const SpinSector& sector)
{
    if (sector.n_atoms != params.n_atoms)
    {
        throw SpaceMismatch("build_tc_hamiltonian: sector has " + std::to_string(sector.n_atoms) +
                            " atoms, parameters have " + std::to_string(params.n_atoms));
    }
    const auto mode = build_mode_operators(fock);
    const auto spin = build_spin_operators(sector);
    const auto id_f = identity(fock);
    const auto id_s = identity(sector.descriptor());

    OperatorMatrix h = params.omega * tensor(mode.number, id_s) + params.delta * tensor(id_f, spin.s_z) +
                       params.g * (tensor(mode.lower, spin.s_plus) + tensor(mode.raise, spin.s_minus));
    h.hermitian = true;
    return h;
}

/// Total excitation number a^dagger a + S_z + N/2, conserved by the rotating-wave Hamiltonian.
inline OperatorMatrix excitation_operator(const FockSpace& fock, const SpinSector& sector)
{
    const auto mode = build_mode_operators(fock);
    const auto spin = build_spin_operators(sector);
    const auto id_s = identity(sector.descriptor());
    return tensor(mode.number, id_s) + tensor(identity(fock), spin.s_z + sector.j() * id_s);
}

/// Ket |n> (x) |j,-j>.
inline KetVector fock_ground_state(const KetVector& field, const SpinSector& sector)
{
    return tensor(field, ground_dicke_state(sector));
}

/// Projector onto Fock levels >= cutoff - 1 of the first tensor factor.
inline OperatorMatrix top_fock_projector(const FockSpace& fock, const SpaceDescriptor& rest)
{
    const auto d = static_cast<Eigen::Index>(fock.dimension());
    Eigen::MatrixXcd p = Eigen::MatrixXcd::Zero(d, d);
    for (Eigen::Index n = std::max<Eigen::Index>(0, d - 2); n < d; ++n) p(n, n) = 1.0;
    return tensor(OperatorMatrix{std::move(p), fock.descriptor(), true}, identity(rest));
}

/// Diagonal sub-block of H on one eigenspace of a conserved charge.
struct SectorBlock
{
    double charge = 0.0;
    std::vector<Eigen::Index> indices;  ///< basis indices spanning the eigenspace
    Eigen::MatrixXcd hamiltonian;
};

/// Splits h into the eigenspaces of a diagonal conserved charge c.
inline std::vector<SectorBlock> sector_decompose(const OperatorMatrix& h, const OperatorMatrix& c)
{
    detail::require_same_space(h.space, c.space, "sector_decompose");
    const Eigen::MatrixXcd& ce = c.entries;
    const Eigen::Index d = ce.rows();
    const double off_diagonal = (ce - Eigen::MatrixXcd(ce.diagonal().asDiagonal())).cwiseAbs().maxCoeff();
    if (off_diagonal > 0.0)
    {
        throw Error("sector_decompose: conserved charge must be diagonal in the working basis");
    }

    // [h, c]_{ij} = h_ij (c_j - c_i) for diagonal c
    double defect = 0.0;
    for (Eigen::Index j = 0; j < d; ++j)
        for (Eigen::Index i = 0; i < d; ++i)
            defect = std::max(defect, std::abs(h.entries(i, j) * (ce(j, j) - ce(i, i))));
    if (defect > 1e-10)
    {
        throw NotCommuting("sector_decompose: ||[H, C]||_max = " + std::to_string(defect));
    }

    std::map<long long, SectorBlock> by_charge;
    for (Eigen::Index i = 0; i < d; ++i)
    {
        const double q = ce(i, i).real();
        // charges are compared after rounding to 1e-9
        const auto key = static_cast<long long>(std::llround(q * 1e9));
        auto& block = by_charge[key];
        block.charge = q;
        block.indices.push_back(i);
    }

    std::vector<SectorBlock> blocks;
    blocks.reserve(by_charge.size());
    for (auto& [key, block] : by_charge)
    {
        const auto n = static_cast<Eigen::Index>(block.indices.size());
        block.hamiltonian.resize(n, n);
        for (Eigen::Index a = 0; a < n; ++a)
            for (Eigen::Index b = 0; b < n; ++b)
                block.hamiltonian(a, b) = h.entries(block.indices[a], block.indices[b]);
        blocks.push_back(std::move(block));
    }
    return blocks;
}

/// exp(-i H t) through the eigen-decomposition of H, optionally block by
/// block over the eigenspaces of a conserved charge.
class SpectralPropagator
{
public:
    /// Diagonalizes the full matrix.
    explicit SpectralPropagator(const OperatorMatrix& h) : space_(h.space)
    {
        require_hermitian(h);
        Block block;
        diagonalize(h.entries, block);
        blocks_.push_back(std::move(block));
    }

    /// Diagonalizes each conserved-charge block separately.
    SpectralPropagator(const OperatorMatrix& h, const OperatorMatrix& charge) : space_(h.space)
    {
        require_hermitian(h);
        auto sectors = sector_decompose(h, charge);
        blocks_.resize(sectors.size());
        for (std::size_t k = 0; k < sectors.size(); ++k)
        {
            blocks_[k].indices = std::move(sectors[k].indices);
            diagonalize(sectors[k].hamiltonian, blocks_[k]);
        }
    }

    const SpaceDescriptor& space() const noexcept { return space_; }
    std::size_t block_count() const noexcept { return blocks_.size(); }
    double max_residual() const noexcept { return max_residual_; }

    /// All eigenvalues in ascending order.
    Eigen::VectorXd spectrum() const
    {
        std::vector<double> all;
        for (const auto& b : blocks_) all.insert(all.end(), b.values.data(), b.values.data() + b.values.size());
        std::sort(all.begin(), all.end());
        return Eigen::Map<Eigen::VectorXd>(all.data(), static_cast<Eigen::Index>(all.size()));
    }

    /// Eigen-coefficients of one initial state, reusable across many times.
    class Trajectory
    {
    public:
        KetVector at(double t) const
        {
            Eigen::VectorXcd out = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(owner_->space_.dimension()));
            for (std::size_t k = 0; k < owner_->blocks_.size(); ++k)
            {
                const auto& b = owner_->blocks_[k];
                Eigen::VectorXcd phased = coefficients_[k];
                for (Eigen::Index i = 0; i < phased.size(); ++i)
                    phased(i) *= std::exp(complex(0.0, -b.values(i) * t));
                const Eigen::VectorXcd local = b.vectors * phased;
                if (b.indices.empty())
                {
                    out = local;
                }
                else
                {
                    for (Eigen::Index i = 0; i < local.size(); ++i) out(b.indices[static_cast<std::size_t>(i)]) = local(i);
                }
            }
            return {std::move(out), owner_->space_};
        }

    private:
        friend class SpectralPropagator;
        const SpectralPropagator* owner_ = nullptr;
        std::vector<Eigen::VectorXcd> coefficients_;
    };

    Trajectory trajectory(const KetVector& psi0) const
    {
        detail::require_same_space(space_, psi0.space, "evolve");
        Trajectory tr;
        tr.owner_ = this;
        tr.coefficients_.reserve(blocks_.size());
        for (const auto& b : blocks_)
        {
            if (b.indices.empty())
            {
                tr.coefficients_.push_back(b.vectors.adjoint() * psi0.amplitudes);
            }
            else
            {
                Eigen::VectorXcd local(static_cast<Eigen::Index>(b.indices.size()));
                for (std::size_t i = 0; i < b.indices.size(); ++i)
                    local(static_cast<Eigen::Index>(i)) = psi0.amplitudes(b.indices[i]);
                tr.coefficients_.push_back(b.vectors.adjoint() * local);
            }
        }
        return tr;
    }

    KetVector evolve(const KetVector& psi0, double t) const { return trajectory(psi0).at(t); }

private:
    struct Block
    {
        std::vector<Eigen::Index> indices;  ///< empty means the whole space
        Eigen::VectorXd values;
        Eigen::MatrixXcd vectors;
    };

    static void require_hermitian(const OperatorMatrix& h)
    {
        if (!h.hermitian)
        {
            throw Error("SpectralPropagator: operator is not flagged Hermitian");
        }
    }

    void diagonalize(const Eigen::MatrixXcd& m, Block& block)
    {
        if (m.size() == 0) return;
        if (m.imag().cwiseAbs().maxCoeff() == 0.0)
        {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m.real());
            if (solver.info() != Eigen::Success)
            {
                throw DiagonalizationFailure("real symmetric eigensolver did not converge", residual_of(m, block));
            }
            block.values = solver.eigenvalues();
            block.vectors = solver.eigenvectors().cast<complex>();
        }
        else
        {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(m);
            if (solver.info() != Eigen::Success)
            {
                throw DiagonalizationFailure("Hermitian eigensolver did not converge", residual_of(m, block));
            }
            block.values = solver.eigenvalues();
            block.vectors = solver.eigenvectors();
        }
        const double r = residual_of(m, block);
        max_residual_ = std::max(max_residual_, r);
        if (!(r <= 1e-8 * std::max(1.0, m.cwiseAbs().maxCoeff()) * static_cast<double>(m.rows())))
        {
            throw DiagonalizationFailure("eigen-decomposition residual too large", r);
        }
    }

    static double residual_of(const Eigen::MatrixXcd& m, const Block& block)
    {
        if (block.vectors.size() == 0) return std::numeric_limits<double>::infinity();
        return (m * block.vectors - block.vectors * block.values.cast<complex>().asDiagonal()).cwiseAbs().maxCoeff();
    }

    SpaceDescriptor space_;
    std::vector<Block> blocks_;
    double max_residual_ = 0.0;
};

/// psi(t) = exp(-i H t) psi0.
inline KetVector evolve(const OperatorMatrix& h, const KetVector& psi0, double t)
{
    detail::require_same_space(h.space, psi0.space, "evolve");
    return SpectralPropagator(h).evolve(psi0, t);
}

struct NamedObservable
{
    std::string name;
    OperatorMatrix op;
};

/// Expectation values of every observable at every time, evaluated in parallel
/// over time points.
inline TimeSeries observable_series(const SpectralPropagator& propagator, const KetVector& psi0,
                                    const std::vector<NamedObservable>& observables, const std::vector<double>& times,
                                    std::size_t threads = 1)
{
    if (times.empty() || !strictly_increasing(times))
    {
        throw Error("observable_series: time grid must be non-empty and strictly increasing");
    }
    for (const auto& o : observables) detail::require_same_space(o.op.space, psi0.space, "observable_series");

    TimeSeries series;
    series.times = times;
    series.provenance = Provenance::exact;
    for (const auto& o : observables) series.names.push_back(o.name);
    series.values.assign(observables.size(), std::vector<double>(times.size(), 0.0));
    series.norm_drift.assign(times.size(), 0.0);
    std::vector<double> imag(times.size(), 0.0);

    std::vector<bool> diagonal;
    std::vector<Eigen::VectorXd> diag_entries;
    for (const auto& o : observables)
    {
        const Eigen::MatrixXcd& e = o.op.entries;
        const bool is_diag = (e - Eigen::MatrixXcd(e.diagonal().asDiagonal())).cwiseAbs().maxCoeff() == 0.0 &&
                             e.diagonal().imag().cwiseAbs().maxCoeff() == 0.0;
        diagonal.push_back(is_diag);
        diag_entries.push_back(is_diag ? Eigen::VectorXd(e.diagonal().real()) : Eigen::VectorXd());
    }

    const auto trajectory = propagator.trajectory(psi0);
    parallel_for(times.size(), threads, [&](std::size_t i) {
        const KetVector psi = trajectory.at(times[i]);
        series.norm_drift[i] = std::abs(psi.norm() - 1.0);
        const Eigen::VectorXd prob = psi.amplitudes.cwiseAbs2();
        for (std::size_t k = 0; k < observables.size(); ++k)
        {
            if (diagonal[k])
            {
                series.values[k][i] = prob.dot(diag_entries[k]);
            }
            else
            {
                const complex v = expectation(observables[k].op, psi);
                series.values[k][i] = v.real();
                if (observables[k].op.hermitian) imag[i] = std::max(imag[i], std::abs(v.imag()));
            }
        }
    });
    series.max_imaginary = *std::max_element(imag.begin(), imag.end());
    return series;
}

inline TimeSeries observable_series(const OperatorMatrix& h, const KetVector& psi0,
                                    const std::vector<NamedObservable>& observables, const std::vector<double>& times,
                                    std::size_t threads = 1)
{
    return observable_series(SpectralPropagator(h), psi0, observables, times, threads);
}

/// Warning text when a request exceeds the desk-scale envelope (N <= 64, cutoff <= 128).
inline std::optional<std::string> desk_scale_warning(const FockSpace& fock, const SpinSector& sector)
{
    if (sector.n_atoms <= 64 && fock.cutoff <= 128) return std::nullopt;
    const double dim = static_cast<double>(fock.dimension() * sector.dimension());
    const double dense_mb = dim * dim * 16.0 / (1024.0 * 1024.0);
    return "system beyond desk scale (N=" + std::to_string(sector.n_atoms) + ", cutoff=" + std::to_string(fock.cutoff) +
           "): dense Hamiltonian needs about " + std::to_string(static_cast<long long>(dense_mb)) + " MiB";
}

}  // namespace tcsim
