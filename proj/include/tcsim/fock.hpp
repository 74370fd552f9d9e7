#pragma once

// Truncated single-mode bosonic spaces, ladder operators, coherent states
// and the tensor-product plumbing shared by every other module.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>

#include "tcsim/errors.hpp"

namespace tcsim
{

using complex = std::complex<double>;

/// Absolute tolerance used for comparisons that have no formula-specific scale.
inline constexpr double default_tolerance = 1e-10;

/// Largest Poisson tail mass accepted when truncating a coherent state.
inline constexpr double coherent_tail_tolerance = 1e-10;

/// Ordered list of factor dimensions. The leftmost factor varies slowest in
/// the flattened index.
class SpaceDescriptor
{
public:
    SpaceDescriptor() = default;
    explicit SpaceDescriptor(std::vector<std::size_t> dims) : dims_(std::move(dims)) {}

    std::size_t dimension() const
    {
        return std::accumulate(dims_.begin(), dims_.end(), std::size_t{1}, std::multiplies<>{});
    }
    const std::vector<std::size_t>& factors() const noexcept { return dims_; }
    std::size_t rank() const noexcept { return dims_.size(); }

    friend bool operator==(const SpaceDescriptor&, const SpaceDescriptor&) = default;

    std::string to_string() const
    {
        std::string out;
        for (std::size_t i = 0; i < dims_.size(); ++i)
        {
            if (i != 0) out += "x";
            out += std::to_string(dims_[i]);
        }
        return out.empty() ? "scalar" : out;
    }

    friend SpaceDescriptor tensor(const SpaceDescriptor& a, const SpaceDescriptor& b)
    {
        std::vector<std::size_t> dims = a.dims_;
        dims.insert(dims.end(), b.dims_.begin(), b.dims_.end());
        return SpaceDescriptor(std::move(dims));
    }

private:
    std::vector<std::size_t> dims_;
};

/// Single bosonic mode keeping occupations 0..cutoff.
struct FockSpace
{
    std::size_t cutoff = 1;

    std::size_t dimension() const noexcept { return cutoff + 1; }
    SpaceDescriptor descriptor() const { return SpaceDescriptor({dimension()}); }
};

struct KetVector
{
    Eigen::VectorXcd amplitudes;
    SpaceDescriptor space;

    double norm() const { return amplitudes.norm(); }
    std::size_t dimension() const { return static_cast<std::size_t>(amplitudes.size()); }
};

struct OperatorMatrix
{
    Eigen::MatrixXcd entries;
    SpaceDescriptor space;
    bool hermitian = false;

    std::size_t dimension() const { return static_cast<std::size_t>(entries.rows()); }

    OperatorMatrix adjoint() const { return {entries.adjoint(), space, hermitian}; }

    /// max |M - M^dagger|
    double hermiticity_defect() const { return (entries - entries.adjoint()).cwiseAbs().maxCoeff(); }
};

namespace detail
{

inline void require_same_space(const SpaceDescriptor& a, const SpaceDescriptor& b, const char* where)
{
    if (!(a == b))
    {
        throw SpaceMismatch(std::string(where) + ": space " + a.to_string() + " does not match " +
                            b.to_string());
    }
}

}  // namespace detail

inline OperatorMatrix operator+(const OperatorMatrix& x, const OperatorMatrix& y)
{
    detail::require_same_space(x.space, y.space, "operator+");
    return {x.entries + y.entries, x.space, x.hermitian && y.hermitian};
}

inline OperatorMatrix operator-(const OperatorMatrix& x, const OperatorMatrix& y)
{
    detail::require_same_space(x.space, y.space, "operator-");
    return {x.entries - y.entries, x.space, x.hermitian && y.hermitian};
}

inline OperatorMatrix operator*(const OperatorMatrix& x, const OperatorMatrix& y)
{
    detail::require_same_space(x.space, y.space, "operator*");
    return {x.entries * y.entries, x.space, false};
}

inline OperatorMatrix operator*(double s, const OperatorMatrix& x) { return {s * x.entries, x.space, x.hermitian}; }

inline OperatorMatrix operator*(complex s, const OperatorMatrix& x)
{
    return {s * x.entries, x.space, x.hermitian && s.imag() == 0.0};
}

inline KetVector operator*(const OperatorMatrix& op, const KetVector& psi)
{
    detail::require_same_space(op.space, psi.space, "apply");
    return {op.entries * psi.amplitudes, psi.space};
}

inline OperatorMatrix commutator(const OperatorMatrix& x, const OperatorMatrix& y) { return x * y - y * x; }

inline OperatorMatrix identity(const SpaceDescriptor& space)
{
    const auto d = static_cast<Eigen::Index>(space.dimension());
    return {Eigen::MatrixXcd::Identity(d, d), space, true};
}

inline OperatorMatrix identity(const FockSpace& space) { return identity(space.descriptor()); }

/// Kronecker product of operators.
inline OperatorMatrix tensor(const OperatorMatrix& a, const OperatorMatrix& b)
{
    Eigen::MatrixXcd k = Eigen::kroneckerProduct(a.entries, b.entries);
    return {std::move(k), tensor(a.space, b.space), a.hermitian && b.hermitian};
}

/// Kronecker product of kets.
inline KetVector tensor(const KetVector& a, const KetVector& b)
{
    Eigen::VectorXcd k = Eigen::kroneckerProduct(a.amplitudes, b.amplitudes);
    return {std::move(k), tensor(a.space, b.space)};
}

/// <psi|M|psi>
inline complex expectation(const OperatorMatrix& op, const KetVector& psi)
{
    detail::require_same_space(op.space, psi.space, "expectation");
    return psi.amplitudes.dot(op.entries * psi.amplitudes);
}

/// <phi|psi>
inline complex overlap(const KetVector& phi, const KetVector& psi)
{
    detail::require_same_space(phi.space, psi.space, "overlap");
    return phi.amplitudes.dot(psi.amplitudes);
}

inline KetVector normalized(KetVector psi)
{
    psi.amplitudes /= psi.amplitudes.norm();
    return psi;
}

struct ModeOperators
{
    OperatorMatrix lower;
    OperatorMatrix raise;
    OperatorMatrix number;
};

inline ModeOperators build_mode_operators(const FockSpace& space)
{
    const auto d = static_cast<Eigen::Index>(space.dimension());
    Eigen::MatrixXcd lower = Eigen::MatrixXcd::Zero(d, d);
    Eigen::MatrixXcd number = Eigen::MatrixXcd::Zero(d, d);
    for (Eigen::Index n = 1; n < d; ++n)
    {
        lower(n - 1, n) = std::sqrt(static_cast<double>(n));
    }
    for (Eigen::Index n = 0; n < d; ++n)
    {
        number(n, n) = static_cast<double>(n);
    }
    const auto desc = space.descriptor();
    OperatorMatrix a{lower, desc, false};
    return {a, a.adjoint(), OperatorMatrix{std::move(number), desc, true}};
}

inline KetVector basis_ket(const SpaceDescriptor& space, std::size_t index)
{
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(space.dimension()));
    v(static_cast<Eigen::Index>(index)) = 1.0;
    return {std::move(v), space};
}

inline KetVector fock_ket(const FockSpace& space, std::size_t n) { return basis_ket(space.descriptor(), n); }

inline KetVector vacuum(const FockSpace& space) { return fock_ket(space, 0); }

/// Poisson tail sum_{n > cutoff} e^{-mean} mean^n / n!.
inline double poisson_tail_mass(double mean, std::size_t cutoff)
{
    if (mean <= 0.0) return 0.0;
    const double log_mean = std::log(mean);
    double tail = 0.0;
    for (std::size_t n = cutoff + 1;; ++n)
    {
        const double dn = static_cast<double>(n);
        const double term = std::exp(-mean + dn * log_mean - std::lgamma(dn + 1.0));
        tail += term;
        // terms decrease monotonically once n exceeds the mean
        if (dn > mean && term <= 1e-18 * std::max(tail, 1e-300)) break;
        if (term == 0.0 && dn > mean) break;
    }
    return tail;
}

/// Smallest cutoff whose Poisson tail mass is within `tolerance`.
inline std::size_t required_cutoff(double mean, double tolerance = coherent_tail_tolerance)
{
    std::size_t c = 0;
    while (poisson_tail_mass(mean, c) > tolerance) ++c;
    return c;
}

/// Default truncation rule ceil(|alpha|^2 + 8|alpha| + 10).
inline std::size_t default_cutoff(complex alpha)
{
    const double r = std::abs(alpha);
    return static_cast<std::size_t>(std::ceil(r * r + 8.0 * r + 10.0));
}

/// Truncated amplitudes e^{-|alpha|^2/2} alpha^n / sqrt(n!), before renormalization.
inline Eigen::VectorXcd coherent_amplitudes(complex alpha, const FockSpace& space)
{
    const auto d = static_cast<Eigen::Index>(space.dimension());
    Eigen::VectorXcd amp(d);
    amp(0) = std::exp(-0.5 * std::norm(alpha));
    for (Eigen::Index n = 1; n < d; ++n)
    {
        amp(n) = amp(n - 1) * alpha / std::sqrt(static_cast<double>(n));
    }
    return amp;
}

/// <alpha|beta> = exp(-|alpha|^2/2 - |beta|^2/2 + conj(alpha) beta) for untruncated coherent states.
inline complex coherent_overlap(complex alpha, complex beta)
{
    return std::exp(-0.5 * std::norm(alpha) - 0.5 * std::norm(beta) + std::conj(alpha) * beta);
}

/// Renormalized truncated coherent state. Throws CutoffTooSmall when the
/// discarded Poisson tail exceeds coherent_tail_tolerance.
inline KetVector coherent_state(complex alpha, const FockSpace& space)
{
    const double mean = std::norm(alpha);
    const double tail = poisson_tail_mass(mean, space.cutoff);
    if (tail > coherent_tail_tolerance)
    {
        throw CutoffTooSmall(space.cutoff, required_cutoff(mean), tail);
    }
    Eigen::VectorXcd amp = coherent_amplitudes(alpha, space);
    amp /= amp.norm();
    return {std::move(amp), space.descriptor()};
}

}  // namespace tcsim
