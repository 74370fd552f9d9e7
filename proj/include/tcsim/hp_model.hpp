#pragma once

// Holstein-Primakoff bosonization of the collective spin around the fully
// polarized state: the series H_0 + H_1 + ... on Fock_a (x) Fock_b, the
// normal modes c_{1,2} = (a +/- b)/sqrt(2) that diagonalize H_0, and the
// leading-order coherent-state dynamics in closed form.

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

#include "tcsim/exact.hpp"
#include "tcsim/fock.hpp"

namespace tcsim
{

using rational = boost::multiprecision::cpp_rational;

/// q_n with (1 - x)^{1/2} = 1 - sum_{n>=1} q_n x^n, exact.
inline rational binomial_sqrt_coefficient(int n)
{
    if (n < 1) throw OrderNegative("binomial_sqrt_coefficient: order must be >= 1, got " + std::to_string(n));
    rational q(1, 2);
    for (int k = 1; k < n; ++k)
    {
        q *= rational(2 * k - 1, 2 * k + 2);
    }
    return q;
}

/// Field mode a (left factor) and atomic HP mode b (right factor).
struct TwoModeSpace
{
    FockSpace a;
    FockSpace b;

    SpaceDescriptor descriptor() const { return tensor(a.descriptor(), b.descriptor()); }
    std::size_t dimension() const { return a.dimension() * b.dimension(); }
    Eigen::Index index(std::size_t na, std::size_t nb) const
    {
        return static_cast<Eigen::Index>(na * b.dimension() + nb);
    }
};

/// Highest total occupation on which truncated operator identities are asserted.
inline std::size_t safe_total_occupation(const TwoModeSpace& space)
{
    const std::size_t c = std::min(space.a.cutoff, space.b.cutoff);
    return c >= 2 ? c - 2 : 0;
}

struct TwoModeOperators
{
    OperatorMatrix a;
    OperatorMatrix b;
    OperatorMatrix n_a;
    OperatorMatrix n_b;
};

inline TwoModeOperators two_mode_operators(const TwoModeSpace& space)
{
    const auto ma = build_mode_operators(space.a);
    const auto mb = build_mode_operators(space.b);
    const auto ia = identity(space.a);
    const auto ib = identity(space.b);
    return {tensor(ma.lower, ib), tensor(ia, mb.lower), tensor(ma.number, ib), tensor(ia, mb.number)};
}

/// One order of the Holstein-Primakoff series.
struct HpTerm
{
    int order = 0;
    /// -q_n g / N^{n-1/2} for n >= 1; sqrt(N) g (the hopping amplitude) for n = 0.
    double coefficient = 0.0;
    OperatorMatrix matrix;
};

/// Constant -N omega / 2 carried by H_0.
inline double hp_constant(const ModelParams& params) { return -0.5 * static_cast<double>(params.n_atoms) * params.omega; }

/// Order-n term. n = 0 gives -N omega/2 + omega(a'a + b'b) + sqrt(N) g (a'b + b'a);
/// n >= 1 gives -q_n g / N^{n-1/2} (a' (b'b)^n b + h.c.).
inline HpTerm hp_term(int n, const ModelParams& params, const FockSpace& fock_a, const FockSpace& fock_b)
{
    if (n < 0) throw OrderNegative("hp_term: order must be >= 0, got " + std::to_string(n));
    const TwoModeSpace space{fock_a, fock_b};
    const auto d = static_cast<Eigen::Index>(space.dimension());
    const double big_n = static_cast<double>(params.n_atoms);
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(d, d);

    HpTerm term;
    term.order = n;
    if (n == 0)
    {
        term.coefficient = std::sqrt(big_n) * params.g;
        for (std::size_t na = 0; na <= fock_a.cutoff; ++na)
        {
            for (std::size_t nb = 0; nb <= fock_b.cutoff; ++nb)
            {
                const auto col = space.index(na, nb);
                m(col, col) = hp_constant(params) + params.omega * static_cast<double>(na + nb);
                // a' b |na, nb> = sqrt((na+1) nb) |na+1, nb-1>
                if (nb >= 1 && na < fock_a.cutoff)
                {
                    const double amp = term.coefficient * std::sqrt(static_cast<double>((na + 1) * nb));
                    m(space.index(na + 1, nb - 1), col) = amp;
                    m(col, space.index(na + 1, nb - 1)) = amp;
                }
            }
        }
    }
    else
    {
        term.coefficient = -binomial_sqrt_coefficient(n).convert_to<double>() * params.g /
                           std::pow(big_n, static_cast<double>(n) - 0.5);
        for (std::size_t na = 0; na < fock_a.cutoff; ++na)
        {
            for (std::size_t nb = 1; nb <= fock_b.cutoff; ++nb)
            {
                // a' (b'b)^n b |na, nb> = sqrt(na+1) (nb-1)^n sqrt(nb) |na+1, nb-1>
                const double amp = term.coefficient * std::sqrt(static_cast<double>(na + 1)) *
                                   std::pow(static_cast<double>(nb - 1), n) * std::sqrt(static_cast<double>(nb));
                m(space.index(na + 1, nb - 1), space.index(na, nb)) = amp;
                m(space.index(na, nb), space.index(na + 1, nb - 1)) = amp;
            }
        }
    }
    term.matrix = OperatorMatrix{std::move(m), space.descriptor(), true};
    return term;
}

/// Sum of hp_term over orders 0..max_order.
inline OperatorMatrix hp_hamiltonian(int max_order, const ModelParams& params, const TwoModeSpace& space)
{
    OperatorMatrix h = hp_term(0, params, space.a, space.b).matrix;
    for (int n = 1; n <= max_order; ++n) h = h + hp_term(n, params, space.a, space.b).matrix;
    h.hermitian = true;
    return h;
}

struct NormalModes
{
    OperatorMatrix c1;  ///< (a + b)/sqrt(2), frequency omega + sqrt(N) g
    OperatorMatrix c2;  ///< (a - b)/sqrt(2), frequency omega - sqrt(N) g
};

inline NormalModes normal_mode_operators(const FockSpace& fock_a, const FockSpace& fock_b)
{
    if (fock_a.cutoff != fock_b.cutoff)
    {
        throw CutoffMismatch("normal_mode_operators: cutoffs " + std::to_string(fock_a.cutoff) + " and " +
                             std::to_string(fock_b.cutoff) + " differ");
    }
    const auto ops = two_mode_operators({fock_a, fock_b});
    const double s = 1.0 / std::numbers::sqrt2;
    return {s * (ops.a + ops.b), s * (ops.a - ops.b)};
}

/// n1 (omega + sqrt(N) g) + n2 (omega - sqrt(N) g), constant omitted.
inline double leading_eigenvalue(std::size_t n1, std::size_t n2, const ModelParams& params)
{
    const double gc = params.collective_coupling();
    return static_cast<double>(n1) * (params.omega + gc) + static_cast<double>(n2) * (params.omega - gc);
}

/// (c1')^{n1} (c2')^{n2} |0,0> / sqrt(n1! n2!) in the (n_a, n_b) basis.
inline KetVector leading_eigenstate(std::size_t n1, std::size_t n2, const FockSpace& fock_a, const FockSpace& fock_b)
{
    const TwoModeSpace space{fock_a, fock_b};
    if (n1 + n2 > safe_total_occupation(space))
    {
        throw ThresholdExceeded("leading_eigenstate: n1 + n2 = " + std::to_string(n1 + n2) +
                                " exceeds the truncation-safe threshold " +
                                std::to_string(safe_total_occupation(space)));
    }
    const auto modes = normal_mode_operators(fock_a, fock_b);
    const Eigen::MatrixXcd c1_dag = modes.c1.entries.adjoint();
    const Eigen::MatrixXcd c2_dag = modes.c2.entries.adjoint();
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(space.dimension()));
    v(0) = 1.0;
    for (std::size_t k = 1; k <= n2; ++k) v = c2_dag * v / std::sqrt(static_cast<double>(k));
    for (std::size_t k = 1; k <= n1; ++k) v = c1_dag * v / std::sqrt(static_cast<double>(k));
    return {std::move(v), space.descriptor()};
}

namespace detail
{

inline void require_resonance(const ModelParams& params, const char* where)
{
    if (!params.resonant())
    {
        throw OffResonance(std::string(where) + ": closed forms require omega == delta (omega=" +
                           std::to_string(params.omega) + ", delta=" + std::to_string(params.delta) + ")");
    }
}

}  // namespace detail

/// Product of coherent states of the two normal modes.
struct NormalModeState
{
    complex label_plus;
    complex label_minus;
    ModelParams params;

    /// Field amplitude (label_plus + label_minus)/sqrt(2).
    complex field_amplitude() const { return (label_plus + label_minus) / std::numbers::sqrt2; }
    /// Atomic HP amplitude (label_plus - label_minus)/sqrt(2).
    complex atomic_amplitude() const { return (label_plus - label_minus) / std::numbers::sqrt2; }

    /// Two-mode ket in the (n_a, n_b) basis; throws CutoffTooSmall if either factor is under-resolved.
    KetVector materialize(const TwoModeSpace& space) const
    {
        return tensor(coherent_state(field_amplitude(), space.a), coherent_state(atomic_amplitude(), space.b));
    }
};

/// Leading-order image of |alpha> (x) |-N/2> at time t.
inline NormalModeState evolve_coherent_leading(complex alpha, const ModelParams& params, double t)
{
    detail::require_resonance(params, "evolve_coherent_leading");
    const complex half = alpha / std::numbers::sqrt2;
    const double gc = params.collective_coupling();
    return {half * std::exp(complex(0.0, -(params.omega + gc) * t)),
            half * std::exp(complex(0.0, -(params.omega - gc) * t)), params};
}

/// Eigenvalue of a on the evolved state: alpha e^{-i omega t} cos(sqrt(N) g t).
inline complex mode_amplitude(complex alpha, const ModelParams& params, double t)
{
    detail::require_resonance(params, "mode_amplitude");
    return alpha * std::exp(complex(0.0, -params.omega * t)) * std::cos(params.collective_coupling() * t);
}

/// |alpha|^2 cos^2(sqrt(N) g t)
inline double mean_photons_leading(complex alpha, const ModelParams& params, double t)
{
    detail::require_resonance(params, "mean_photons_leading");
    const double c = std::cos(params.collective_coupling() * t);
    return std::norm(alpha) * c * c;
}

/// Poissonian: equal to the mean.
inline double photon_variance_leading(complex alpha, const ModelParams& params, double t)
{
    detail::require_resonance(params, "photon_variance_leading");
    const double c = std::cos(params.collective_coupling() * t);
    return std::norm(alpha) * c * c;
}

/// <b'b> at leading order: |alpha|^2 sin^2(sqrt(N) g t).
inline double atomic_excitations_leading(complex alpha, const ModelParams& params, double t)
{
    detail::require_resonance(params, "atomic_excitations_leading");
    const double s = std::sin(params.collective_coupling() * t);
    return std::norm(alpha) * s * s;
}

/// Ratio above which the bosonization is reported as unreliable.
inline constexpr double hp_validity_threshold = 0.1;

/// max_t <b'b> / (N/2) = |alpha|^2 / (N/2).
inline double hp_validity(complex alpha, const ModelParams& params)
{
    return std::norm(alpha) / (0.5 * static_cast<double>(params.n_atoms));
}

}  // namespace tcsim
