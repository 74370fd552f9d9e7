#pragma once

// Collective spin of N two-level atoms restricted to the symmetric sector
// j = N/2. Basis index k = m + j, so index 0 is m = -j (all atoms down).

#include <cmath>
#include <cstddef>

#include "tcsim/fock.hpp"

namespace tcsim
{

struct SpinSector
{
    std::size_t n_atoms = 1;

    double j() const noexcept { return 0.5 * static_cast<double>(n_atoms); }
    std::size_t dimension() const noexcept { return n_atoms + 1; }
    SpaceDescriptor descriptor() const { return SpaceDescriptor({dimension()}); }
    /// m value of basis index k
    double m(std::size_t k) const noexcept { return static_cast<double>(k) - j(); }
};

struct SpinOperators
{
    OperatorMatrix s_plus;
    OperatorMatrix s_minus;
    OperatorMatrix s_z;
};

inline SpinOperators build_spin_operators(const SpinSector& sector)
{
    const auto d = static_cast<Eigen::Index>(sector.dimension());
    const double j = sector.j();
    Eigen::MatrixXcd plus = Eigen::MatrixXcd::Zero(d, d);
    Eigen::MatrixXcd sz = Eigen::MatrixXcd::Zero(d, d);
    for (Eigen::Index k = 0; k < d; ++k)
    {
        const double m = sector.m(static_cast<std::size_t>(k));
        sz(k, k) = m;
        if (k + 1 < d)
        {
            plus(k + 1, k) = std::sqrt(j * (j + 1.0) - m * (m + 1.0));
        }
    }
    const auto desc = sector.descriptor();
    OperatorMatrix sp{std::move(plus), desc, false};
    return {sp, sp.adjoint(), OperatorMatrix{std::move(sz), desc, true}};
}

/// |j, -j>: every atom in its ground state.
inline KetVector ground_dicke_state(const SpinSector& sector) { return basis_ket(sector.descriptor(), 0); }

}  // namespace tcsim
