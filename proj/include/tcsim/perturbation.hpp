#pragma once

// First-order Rayleigh-Schroedinger corrections from the quartic H_1 term:
// H_1 in the normal-mode basis, level shifts, eigenstate corrections and the
// Poisson-weighted double sums for the photon number.
//
// Two readings are kept side by side wherever the printed closed forms and
// the operator algebra disagree; the numeric oracle decides which one holds.

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "tcsim/hp_model.hpp"

namespace tcsim
{

/// -g/(4 sqrt N) [ n1^2 - n2^2 + n2 - n1 - (n1 - n2)(c1'c2 + c2'c1) + c1'c2 - c2'c1 ],
/// n_i = c_i'c_i, assembled from the truncated normal-mode matrices.
inline OperatorMatrix h1_normal_mode(const ModelParams& params, const TwoModeSpace& space)
{
    const auto modes = normal_mode_operators(space.a, space.b);
    const auto c1d = modes.c1.adjoint();
    const auto c2d = modes.c2.adjoint();
    const auto n1 = c1d * modes.c1;
    const auto n2 = c2d * modes.c2;
    const auto hop = c1d * modes.c2 + c2d * modes.c1;
    const auto bracket = n1 * n1 - n2 * n2 + n2 - n1 - (n1 - n2) * hop + c1d * modes.c2 - c2d * modes.c1;
    const double pref = -params.g / (4.0 * std::sqrt(static_cast<double>(params.n_atoms)));
    OperatorMatrix h = pref * bracket;
    h.hermitian = h.hermiticity_defect() <= 1e-12;
    return h;
}

/// -g/(4 sqrt N) (n1^2 - n2^2 + n2 - n1)
inline double eigenvalue_correction(std::size_t n1, std::size_t n2, const ModelParams& params)
{
    const double a = static_cast<double>(n1);
    const double b = static_cast<double>(n2);
    return -params.g / (4.0 * std::sqrt(static_cast<double>(params.n_atoms))) * (a * a - b * b + b - a);
}

enum class EigenstateCorrectionForm
{
    /// (1/8N)(n1^{3/2} sqrt(n2+1) |n1-1;n2+1> + n2^{3/2} sqrt(n1+1) |n1+1;n2-1>)
    printed,
    /// <j|H_1|n>/(e_n - e_j) from the normal-mode matrix elements of H_1
    derived
};

struct LevelAmplitude
{
    std::size_t n1 = 0;
    std::size_t n2 = 0;
    double coefficient = 0.0;
};

/// First-order correction to |n1;n2>. Vanishing terms are omitted.
inline std::vector<LevelAmplitude> eigenstate_correction(std::size_t n1, std::size_t n2, std::size_t n_atoms,
                                                         EigenstateCorrectionForm form = EigenstateCorrectionForm::printed)
{
    const double a = static_cast<double>(n1);
    const double b = static_cast<double>(n2);
    const double scale = 1.0 / (8.0 * static_cast<double>(n_atoms));
    double down = 0.0;  // on |n1-1; n2+1>
    double up = 0.0;    // on |n1+1; n2-1>
    if (form == EigenstateCorrectionForm::printed)
    {
        down = scale * a * std::sqrt(a) * std::sqrt(b + 1.0);
        up = scale * b * std::sqrt(b) * std::sqrt(a + 1.0);
    }
    else
    {
        // <n1-1,n2+1|H_1|n1,n2> = g/(4 sqrt N)(n1-n2-1) sqrt(n1 (n2+1)), gap +2 sqrt(N) g
        // <n1+1,n2-1|H_1|n1,n2> = g/(4 sqrt N)(n1-n2+1) sqrt((n1+1) n2), gap -2 sqrt(N) g
        down = scale * (a - b - 1.0) * std::sqrt(a * (b + 1.0));
        up = -scale * (a - b + 1.0) * std::sqrt((a + 1.0) * b);
    }
    std::vector<LevelAmplitude> out;
    if (n1 >= 1 && down != 0.0) out.push_back({n1 - 1, n2 + 1, down});
    if (n2 >= 1 && up != 0.0) out.push_back({n1 + 1, n2 - 1, up});
    return out;
}

/// Finite cut of an infinite (n1, n2) double sum with a certified remainder.
struct SeriesTruncation
{
    std::size_t n_max = 0;
    double tail_bound = 0.0;
};

struct SeriesValue
{
    double value = 0.0;
    double tail_bound = 0.0;
};

enum class CorrectedVariant
{
    /// cos[sqrt(N) g t + (g/4 sqrt N)(n1+n2) t], exactly as printed
    printed,
    /// cos^2[sqrt(N) g t - (g/4 sqrt N)(n1+n2) t], the reading consistent with the leading cos^2 law
    cos2
};

inline const char* to_string(CorrectedVariant v) { return v == CorrectedVariant::printed ? "printed" : "cos2"; }

namespace detail
{

/// Poisson weights e^{-mean} mean^k / k! for k = 0..n_max.
inline std::vector<double> poisson_weights(double mean, std::size_t n_max)
{
    std::vector<double> w(n_max + 1);
    w[0] = std::exp(-mean);
    for (std::size_t k = 1; k <= n_max; ++k) w[k] = w[k - 1] * mean / static_cast<double>(k);
    return w;
}

/// sum_{k > cut} e^{-mean} mean^k / k! (k+1)^power; cut < 0 sums everything.
inline double poisson_moment_tail(double mean, long cut, int power)
{
    if (mean <= 0.0) return cut < 0 ? 1.0 : 0.0;
    const double log_mean = std::log(mean);
    double sum = 0.0;
    for (long k = std::max(0L, cut + 1);; ++k)
    {
        const double dk = static_cast<double>(k);
        const double term = std::exp(-mean + dk * log_mean - std::lgamma(dk + 1.0)) * std::pow(dk + 1.0, power);
        sum += term;
        if (dk > mean + power && term <= 1e-18 * std::max(sum, 1e-300)) break;
        if (term == 0.0 && dk > mean + power) break;
    }
    return sum;
}

/// Bound on sum over (n1, n2) outside [0, cut]^2 of w(n1) w(n2) (n1+n2+2)^3.
inline double cubic_envelope_tail(double mean, long cut)
{
    const double full = poisson_moment_tail(mean, -1, 3);
    if (cut < 0)
    {
        // whole double sum, using (x+y)^3 <= 4(x^3 + y^3)
        return 8.0 * full;
    }
    return 8.0 * (poisson_moment_tail(mean, cut, 3) + poisson_moment_tail(mean, cut, 0) * full);
}

}  // namespace detail

/// Remainder bound of the corrected <n> double sum cut at n_max: |alpha|^2 (1 - F^2).
inline double mean_photon_tail_bound(complex alpha, std::size_t n_max)
{
    const double lam = 0.5 * std::norm(alpha);
    const double tail = poisson_tail_mass(lam, n_max);
    return std::norm(alpha) * (2.0 * tail - tail * tail);
}

/// Remainder bound of the delta<n> double sum cut at n_max.
inline double delta_photon_tail_bound(complex alpha, std::size_t n_atoms, std::size_t n_max, CorrectedVariant variant)
{
    const double lam = 0.5 * std::norm(alpha);
    if (lam == 0.0) return 0.0;
    const double big_n = static_cast<double>(n_atoms);
    if (variant == CorrectedVariant::printed)
    {
        // every summand is bounded by 9 (n1+n2+2)^3 w(n1) w(n2) / (8N)
        return 9.0 / (8.0 * big_n) * detail::cubic_envelope_tail(lam, static_cast<long>(n_max));
    }
    // six matrix-element products per level, each <= s^3/(16N) |C_m C_n|, |C_m C_n| <= (|C_m|^2+|C_n|^2)/2
    return 3.0 / (4.0 * big_n) * detail::cubic_envelope_tail(lam, static_cast<long>(n_max) - 2);
}

/// Smallest n_max whose remainder bound is within tolerance.
inline SeriesTruncation plan_mean_photon_truncation(complex alpha, double tolerance = default_tolerance)
{
    SeriesTruncation t;
    for (t.n_max = 1;; ++t.n_max)
    {
        t.tail_bound = mean_photon_tail_bound(alpha, t.n_max);
        if (t.tail_bound <= tolerance) return t;
    }
}

inline SeriesTruncation plan_delta_photon_truncation(complex alpha, std::size_t n_atoms, CorrectedVariant variant,
                                                     double tolerance = default_tolerance)
{
    SeriesTruncation t;
    for (t.n_max = 1;; ++t.n_max)
    {
        t.tail_bound = delta_photon_tail_bound(alpha, n_atoms, t.n_max, variant);
        if (t.tail_bound <= tolerance) return t;
    }
}

/// Photon number with first-order level shifts, as a Poisson double sum.
inline SeriesValue corrected_mean_photons(complex alpha, const ModelParams& params, double t,
                                          const SeriesTruncation& trunc, CorrectedVariant variant,
                                          double tolerance = default_tolerance)
{
    detail::require_resonance(params, "corrected_mean_photons");
    const double bound = mean_photon_tail_bound(alpha, trunc.n_max);
    if (bound > tolerance)
    {
        throw TruncationInsufficient("corrected_mean_photons: n_max " + std::to_string(trunc.n_max) +
                                     " leaves remainder " + std::to_string(bound));
    }
    const double lam = 0.5 * std::norm(alpha);
    const auto w = detail::poisson_weights(lam, trunc.n_max);
    const double gc = params.collective_coupling();
    const double shift = params.g / (4.0 * std::sqrt(static_cast<double>(params.n_atoms)));

    double sum = 0.0;
    for (std::size_t n1 = 0; n1 <= trunc.n_max; ++n1)
    {
        for (std::size_t n2 = 0; n2 <= trunc.n_max; ++n2)
        {
            const double s = static_cast<double>(n1 + n2);
            double f = 0.0;
            if (variant == CorrectedVariant::printed)
            {
                f = std::cos(gc * t + shift * s * t);
            }
            else
            {
                const double c = std::cos(gc * t - shift * s * t);
                f = c * c;
            }
            sum += w[n1] * w[n2] * f;
        }
    }
    return {std::norm(alpha) * sum, bound};
}

namespace detail
{

/// e_{n1 n2} + e^1_{n1 n2}
inline double first_order_level(std::size_t n1, std::size_t n2, const ModelParams& params)
{
    return leading_eigenvalue(n1, n2, params) + eigenvalue_correction(n1, n2, params);
}

/// |alpha~|^{2M} e^{-2|alpha~|^2} / sqrt(m1! m2! n1! n2!), with m1+m2 = n1+n2 = M
inline double overlap_weight(double lam, std::size_t m1, std::size_t m2, std::size_t n1, std::size_t n2)
{
    const double total = static_cast<double>(n1 + n2);
    const double log_w = -2.0 * lam + total * std::log(lam) -
                         0.5 * (std::lgamma(m1 + 1.0) + std::lgamma(m2 + 1.0) + std::lgamma(n1 + 1.0) +
                                std::lgamma(n2 + 1.0));
    return std::exp(log_w);
}

}  // namespace detail

/// First-order correction to <a'a> from the eigenstate corrections,
/// 2 Re <psi0(t)| a'a |psi1(t)> with first-order level phases.
inline SeriesValue delta_mean_photons(complex alpha, const ModelParams& params, double t,
                                      const SeriesTruncation& trunc, CorrectedVariant variant,
                                      double tolerance = default_tolerance)
{
    detail::require_resonance(params, "delta_mean_photons");
    const double bound = delta_photon_tail_bound(alpha, params.n_atoms, trunc.n_max, variant);
    if (bound > tolerance)
    {
        throw TruncationInsufficient("delta_mean_photons: n_max " + std::to_string(trunc.n_max) +
                                     " leaves remainder " + std::to_string(bound));
    }
    const double lam = 0.5 * std::norm(alpha);
    if (lam == 0.0) return {0.0, bound};

    const double big_n = static_cast<double>(params.n_atoms);
    const double gc = params.collective_coupling();
    double sum = 0.0;

    if (variant == CorrectedVariant::printed)
    {
        const auto w = detail::poisson_weights(lam, trunc.n_max);
        const double slow2 = params.g / (2.0 * std::sqrt(big_n));
        const double slow4 = params.g / std::sqrt(big_n);
        for (std::size_t i = 0; i <= trunc.n_max; ++i)
        {
            for (std::size_t j = 0; j <= trunc.n_max; ++j)
            {
                const double n1 = static_cast<double>(i);
                const double n2 = static_cast<double>(j);
                // the undefined m1 of the printed expression is read as n2
                const double constant = (n1 + n2) * (n1 * n1 + n2 * n2) + n1 * n1 * (n2 + 1.0) + n2 * n2 * (n1 + 1.0);
                const double amp2 = ((n1 - 1.0) * (n1 - 1.0) + (n2 + 1.0) * (n2 + 1.0)) * std::sqrt(n1 * (n2 + 1.0)) +
                                    ((n1 + 1.0) * (n1 + 1.0) + (n2 - 1.0) * (n2 - 1.0)) * std::sqrt((n1 + 1.0) * n2);
                double amp4 = 0.0;
                if (i >= 1) amp4 += (n2 + 2.0) * std::sqrt(n1 * (n2 + 1.0) * (n1 - 1.0) * (n2 + 2.0));
                if (j >= 1) amp4 += (n1 + 2.0) * std::sqrt(n2 * (n1 + 1.0) * (n2 - 1.0) * (n1 + 2.0));
                const double s = n1 + n2 - 1.0;
                sum += w[i] * w[j] *
                       (constant + amp2 * std::cos(2.0 * gc * t + slow2 * s * t) +
                        amp4 * std::cos(4.0 * gc * t + slow4 * s * t));
            }
        }
        return {sum / (8.0 * big_n), bound};
    }

    // a'a = (n1 + n2 + c1'c2 + c2'c1)/2 in the normal-mode basis
    for (std::size_t n1 = 0; n1 <= trunc.n_max; ++n1)
    {
        for (std::size_t n2 = 0; n2 <= trunc.n_max; ++n2)
        {
            const double e_n = detail::first_order_level(n1, n2, params);
            for (const auto& k : eigenstate_correction(n1, n2, params.n_atoms, EigenstateCorrectionForm::derived))
            {
                const double k1 = static_cast<double>(k.n1);
                const double k2 = static_cast<double>(k.n2);
                auto add = [&](std::size_t m1, std::size_t m2, double element) {
                    const double phase = (detail::first_order_level(m1, m2, params) - e_n) * t;
                    sum += detail::overlap_weight(lam, m1, m2, n1, n2) * k.coefficient * element * std::cos(phase);
                };
                add(k.n1, k.n2, 0.5 * (k1 + k2));
                if (k.n2 >= 1) add(k.n1 + 1, k.n2 - 1, 0.5 * std::sqrt((k1 + 1.0) * k2));
                if (k.n1 >= 1) add(k.n1 - 1, k.n2 + 1, 0.5 * std::sqrt(k1 * (k2 + 1.0)));
            }
        }
    }
    return {2.0 * sum, bound};
}

/// Result of first-order perturbation theory evaluated from the H_0 and H_1 matrices.
struct FirstOrderResult
{
    double eigenvalue_correction = 0.0;
    KetVector eigenvector_correction;
    std::vector<LevelAmplitude> components;  ///< projections on the unperturbed levels
    double span_residual = 0.0;              ///< part of H_1|k> outside the enumerated levels
};

/// <k|H_1|k> and sum_{j != k} |j><j|H_1|k>/(e_k - e_j) with |j> the numerically
/// built normal-mode levels of the truncation-safe subspace.
inline FirstOrderResult numeric_first_order_oracle(const ModelParams& params, const TwoModeSpace& space,
                                                   std::size_t n1, std::size_t n2)
{
    const std::size_t safe = safe_total_occupation(space);
    if (n1 + n2 > safe)
    {
        throw ThresholdExceeded("numeric_first_order_oracle: level outside the truncation-safe subspace");
    }
    const auto h0 = hp_term(0, params, space.a, space.b).matrix;
    const auto h1 = hp_term(1, params, space.a, space.b).matrix;
    const KetVector target = leading_eigenstate(n1, n2, space.a, space.b);
    const KetVector h1_target = h1 * target;
    const double e_k = expectation(h0, target).real();

    FirstOrderResult out;
    out.eigenvalue_correction = overlap(target, h1_target).real();
    Eigen::VectorXcd correction = Eigen::VectorXcd::Zero(target.amplitudes.size());
    Eigen::VectorXcd projected = Eigen::VectorXcd::Zero(target.amplitudes.size());
    for (std::size_t total = 0; total <= safe; ++total)
    {
        for (std::size_t j1 = 0; j1 <= total; ++j1)
        {
            const std::size_t j2 = total - j1;
            const KetVector level = leading_eigenstate(j1, j2, space.a, space.b);
            const complex element = overlap(level, h1_target);
            projected += element * level.amplitudes;
            if (j1 == n1 && j2 == n2) continue;
            if (std::abs(element) <= 1e-13) continue;
            const double gap = e_k - expectation(h0, level).real();
            if (std::abs(gap) <= 1e-9)
            {
                throw DegenerateLevel("numeric_first_order_oracle: level (" + std::to_string(n1) + "," +
                                      std::to_string(n2) + ") couples to degenerate level (" + std::to_string(j1) +
                                      "," + std::to_string(j2) + ")");
            }
            const complex c = element / gap;
            correction += c * level.amplitudes;
            out.components.push_back({j1, j2, c.real()});
        }
    }
    out.span_residual = (h1_target.amplitudes - projected).cwiseAbs().maxCoeff();
    out.eigenvector_correction = KetVector{std::move(correction), target.space};
    return out;
}

}  // namespace tcsim
