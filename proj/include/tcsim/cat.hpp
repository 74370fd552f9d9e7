#pragma once

// Phase cat states N(|gamma e^{i phi}> + |gamma e^{-i phi}>) of the field,
// their leading-order evolution and the closed-form photon moments that
// collapse onto single-coherent-state statistics as Delta^2 grows.

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include "tcsim/hp_model.hpp"

namespace tcsim
{

struct CatSpec
{
    double gamma = 0.0;
    double phi = 0.0;

    /// Delta^2 = 2 gamma^2 sin^2 phi
    double delta_sq() const
    {
        const double s = std::sin(phi);
        return 2.0 * gamma * gamma * s * s;
    }

    /// gamma^2 sin(2 phi), the phase of the branch overlap
    double overlap_phase() const { return gamma * gamma * std::sin(2.0 * phi); }

    /// N^2 = 1 / (2 (1 + cos(gamma^2 sin 2phi) e^{-Delta^2}))
    double norm_sq() const { return 0.5 / (1.0 + std::cos(overlap_phase()) * std::exp(-delta_sq())); }

    complex branch(int sign) const { return std::polar(gamma, sign >= 0 ? phi : -phi); }
};

/// 1 / (2 (1 + Re<gamma e^{i phi}|gamma e^{-i phi}>)) from the coherent overlap identity.
inline double cat_norm_sq_from_overlap(const CatSpec& spec)
{
    return 0.5 / (1.0 + coherent_overlap(spec.branch(+1), spec.branch(-1)).real());
}

inline CatSpec cat_spec(double gamma, double phi)
{
    if (!(gamma >= 0.0)) throw Error("cat_spec: gamma must be >= 0, got " + std::to_string(gamma));
    CatSpec spec{gamma, phi};
    const double closed = spec.norm_sq();
    const double direct = cat_norm_sq_from_overlap(spec);
    if (std::abs(closed - direct) > 1e-12 * std::max(1.0, std::abs(direct)))
    {
        throw Error("cat_spec: normalization cross-check failed (" + std::to_string(closed) + " vs " +
                    std::to_string(direct) + ")");
    }
    return spec;
}

/// Renormalized truncated cat state of a single mode.
inline KetVector cat_state(const CatSpec& spec, const FockSpace& fock)
{
    KetVector sum = coherent_state(spec.branch(+1), fock);
    sum.amplitudes += coherent_state(spec.branch(-1), fock).amplitudes;
    return normalized(std::move(sum));
}

/// | N^2 ||v||^2 - 1 | with v the truncated, un-renormalized branch sum.
inline double cat_norm_deviation(const CatSpec& spec, const FockSpace& fock)
{
    const Eigen::VectorXcd v = coherent_amplitudes(spec.branch(+1), fock) + coherent_amplitudes(spec.branch(-1), fock);
    return std::abs(spec.norm_sq() * v.squaredNorm() - 1.0);
}

/// Leading-order evolved cat: two branches, each a product of normal-mode coherent states.
struct EvolvedCat
{
    std::array<NormalModeState, 2> branches;  ///< [0] carries +phi, [1] carries -phi
    CatSpec spec;
    ModelParams params;

    KetVector materialize(const TwoModeSpace& space) const
    {
        KetVector psi = branches[0].materialize(space);
        psi.amplitudes += branches[1].materialize(space).amplitudes;
        return normalized(std::move(psi));
    }
};

inline EvolvedCat evolve_cat_leading(const CatSpec& spec, const ModelParams& params, double t)
{
    detail::require_resonance(params, "evolve_cat_leading");
    const double half = spec.gamma / std::numbers::sqrt2;
    const double gc = params.collective_coupling();
    EvolvedCat out{{}, spec, params};
    for (int k = 0; k < 2; ++k)
    {
        const double sign = k == 0 ? 1.0 : -1.0;
        out.branches[static_cast<std::size_t>(k)] =
            NormalModeState{std::polar(half, -((params.omega + gc) * t - sign * spec.phi)),
                            std::polar(half, -((params.omega - gc) * t - sign * spec.phi)), params};
    }
    return out;
}

namespace detail
{

/// (1 + cos(k phi + gamma^2 sin 2phi) e^{-Delta^2}) / (1 + cos(gamma^2 sin 2phi) e^{-Delta^2})
inline double fringe_ratio(const CatSpec& spec, double k)
{
    const double damping = std::exp(-spec.delta_sq());
    const double x = spec.overlap_phase();
    return (1.0 + std::cos(k * spec.phi + x) * damping) / (1.0 + std::cos(x) * damping);
}

/// fringe_ratio - 1 without the cancellation
inline double fringe_excess(const CatSpec& spec, double k)
{
    const double damping = std::exp(-spec.delta_sq());
    const double x = spec.overlap_phase();
    return (std::cos(k * spec.phi + x) - std::cos(x)) * damping / (1.0 + std::cos(x) * damping);
}

}  // namespace detail

/// gamma^2 cos^2(sqrt(N) g t): the single-coherent-state photon number.
inline double single_mean_photons(double gamma, const ModelParams& params, double t)
{
    return mean_photons_leading(gamma, params, t);
}

/// <n^2> = <n>^2 + <n> for a single coherent state.
inline double single_second_moment(double gamma, const ModelParams& params, double t)
{
    const double n = single_mean_photons(gamma, params, t);
    return n * n + n;
}

inline double cat_mean_photons(const CatSpec& spec, const ModelParams& params, double t)
{
    detail::require_resonance(params, "cat_mean_photons");
    return single_mean_photons(spec.gamma, params, t) * detail::fringe_ratio(spec, 2.0);
}

/// <a'a a'a> on the evolved cat.
inline double cat_second_moment(const CatSpec& spec, const ModelParams& params, double t)
{
    detail::require_resonance(params, "cat_second_moment");
    const double n = single_mean_photons(spec.gamma, params, t);
    return n * n * detail::fringe_ratio(spec, 4.0) + n * detail::fringe_ratio(spec, 2.0);
}

/// Denominator floor of decoherence_metric.
inline constexpr double decoherence_floor = 1e-12;

/// max of the relative deviations of the cat's first and second photon moments
/// from the single-coherent-state values.
inline double decoherence_metric(const CatSpec& spec, const ModelParams& params, double t)
{
    detail::require_resonance(params, "decoherence_metric");
    // differences are formed analytically; near the bound they sit far below one ulp of the moments
    const double n = single_mean_photons(spec.gamma, params, t);
    const double e2 = detail::fringe_excess(spec, 2.0);
    const double e4 = detail::fringe_excess(spec, 4.0);
    const double d1 = std::abs(n * e2) / std::max(n, decoherence_floor);
    const double d2 = std::abs(n * n * e4 + n * e2) / std::max(n * n + n, decoherence_floor);
    return std::max(d1, d2);
}

/// Analytic ceiling 2 e^{-Delta^2} / (1 - e^{-Delta^2}) of decoherence_metric.
inline double decoherence_bound(const CatSpec& spec)
{
    const double e = std::exp(-spec.delta_sq());
    return 2.0 * e / (1.0 - e);
}

}  // namespace tcsim
