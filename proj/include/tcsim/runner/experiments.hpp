#pragma once

// Experiment orchestration: builds the exact oracle and the closed forms for
// one resolved configuration, and collects the data table, the metadata block
// and the error summaries.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tcsim/cat.hpp"
#include "tcsim/exact.hpp"
#include "tcsim/hp_model.hpp"
#include "tcsim/parallel.hpp"
#include "tcsim/perturbation.hpp"
#include "tcsim/runner/config.hpp"
#include "tcsim/version.hpp"

namespace tcsim::runner
{

/// Validity thresholds; exceeding any makes the run numerically invalid.
inline constexpr double max_norm_drift = 1e-10;
inline constexpr double max_excitation_drift = 1e-10;
inline constexpr double max_top_fock_population = 1e-8;

struct Column
{
    std::string name;  ///< observable.provenance
    std::vector<double> values;

    std::string observable() const { return name.substr(0, name.find('.')); }
    std::string provenance() const
    {
        const auto dot = name.find('.');
        return dot == std::string::npos ? std::string{} : name.substr(dot + 1);
    }
};

struct ErrorSummary
{
    std::string observable;
    std::string reference;  ///< provenance treated as truth
    std::string candidate;
    double max_abs = 0.0;
    double rms = 0.0;
};

struct RunResult
{
    std::string name;
    std::vector<double> times;
    std::vector<Column> columns;
    std::vector<ErrorSummary> summary;
    nlohmann::ordered_json metadata;
    std::vector<std::string> validity_failures;

    bool valid() const { return validity_failures.empty(); }

    const Column& column(const std::string& col_name) const
    {
        for (const auto& c : columns)
            if (c.name == col_name) return c;
        throw Error("RunResult: no column " + col_name);
    }
};

struct ExecOptions
{
    std::size_t threads = 1;
};

namespace detail
{

inline int provenance_rank(const std::string& p)
{
    if (p == "exact") return 0;
    if (p == "closed-form") return 1;
    if (p == "corrected") return 2;
    if (p == "leading") return 3;
    return 4;
}

}  // namespace detail

/// Max-abs and RMS deviations between every pair of provenances of the same observable.
inline std::vector<ErrorSummary> summarize(const std::vector<Column>& columns)
{
    std::vector<ErrorSummary> out;
    for (std::size_t i = 0; i < columns.size(); ++i)
    {
        for (std::size_t j = 0; j < columns.size(); ++j)
        {
            if (i == j) continue;
            const auto& ref = columns[i];
            const auto& cand = columns[j];
            if (ref.observable() != cand.observable()) continue;
            const int ri = detail::provenance_rank(ref.provenance());
            const int rj = detail::provenance_rank(cand.provenance());
            if (ri > rj || (ri == rj && i > j)) continue;
            ErrorSummary s{ref.observable(), ref.provenance(), cand.provenance(), 0.0, 0.0};
            const std::size_t n = std::min(ref.values.size(), cand.values.size());
            double sq = 0.0;
            for (std::size_t k = 0; k < n; ++k)
            {
                const double d = std::abs(ref.values[k] - cand.values[k]);
                s.max_abs = std::max(s.max_abs, d);
                sq += d * d;
            }
            s.rms = n ? std::sqrt(sq / static_cast<double>(n)) : 0.0;
            out.push_back(s);
        }
    }
    return out;
}

inline nlohmann::ordered_json summary_json(const std::vector<ErrorSummary>& summary)
{
    auto arr = nlohmann::ordered_json::array();
    for (const auto& s : summary)
    {
        arr.push_back({{"observable", s.observable},
                       {"reference", s.reference},
                       {"candidate", s.candidate},
                       {"max_abs", s.max_abs},
                       {"rms", s.rms}});
    }
    return arr;
}

/// Exact evolution of field (x) ground for one atom number.
struct OracleRun
{
    TimeSeries series;
    double max_norm_drift = 0.0;
    double max_top_population = 0.0;
    double charge_drift = 0.0;
    double field_tail_mass = 0.0;
};

inline OracleRun run_oracle(const ModelParams& params, std::size_t cutoff, const KetVector& field,
                            const std::vector<double>& times, std::size_t threads)
{
    const FockSpace fock{cutoff};
    const SpinSector sector{params.n_atoms};
    const auto h = build_tc_hamiltonian(params, fock, sector);
    const auto charge = excitation_operator(fock, sector);
    const SpectralPropagator propagator(h, charge);

    const auto mode = build_mode_operators(fock);
    const auto id_s = identity(sector.descriptor());
    const std::vector<NamedObservable> obs = {
        {"n", tensor(mode.number, id_s)},
        {"n2", tensor(mode.number * mode.number, id_s)},
        {"charge", charge},
        {"top", top_fock_projector(fock, sector.descriptor())},
    };
    OracleRun run;
    run.series = observable_series(propagator, fock_ground_state(field, sector), obs, times, threads);
    run.max_norm_drift = *std::max_element(run.series.norm_drift.begin(), run.series.norm_drift.end());
    const auto& top = run.series.column("top");
    run.max_top_population = *std::max_element(top.begin(), top.end());
    const auto& c = run.series.column("charge");
    for (const double v : c) run.charge_drift = std::max(run.charge_drift, std::abs(v - c.front()));
    return run;
}

inline std::vector<double> variance(const std::vector<double>& m1, const std::vector<double>& m2)
{
    std::vector<double> v(m1.size());
    for (std::size_t i = 0; i < m1.size(); ++i) v[i] = m2[i] - m1[i] * m1[i];
    return v;
}

template <typename Fn>
std::vector<double> tabulate(const std::vector<double>& times, std::size_t threads, Fn&& fn)
{
    std::vector<double> out(times.size());
    parallel_for(times.size(), threads, [&](std::size_t i) { out[i] = fn(times[i]); });
    return out;
}

inline void record_oracle(RunResult& result, nlohmann::ordered_json& block, const OracleRun& run)
{
    block["max_norm_drift"] = run.max_norm_drift;
    block["max_top_fock_population"] = run.max_top_population;
    block["excitation_drift"] = run.charge_drift;
    block["field_tail_mass"] = run.field_tail_mass;
    if (run.max_norm_drift > max_norm_drift)
        result.validity_failures.push_back("norm drift " + std::to_string(run.max_norm_drift));
    if (run.charge_drift > max_excitation_drift)
        result.validity_failures.push_back("excitation drift " + std::to_string(run.charge_drift));
    if (run.max_top_population > max_top_fock_population)
        result.validity_failures.push_back("truncation escape: top Fock population " +
                                           std::to_string(run.max_top_population));
}

inline void run_coherent(const RunConfig& cfg, RunResult& result, const ExecOptions& opt)
{
    const complex alpha = cfg.alpha_complex();
    const FockSpace fock{cfg.fock_cutoff};
    auto oracle = run_oracle(cfg.params, cfg.fock_cutoff, coherent_state(alpha, fock), result.times, opt.threads);
    oracle.field_tail_mass = poisson_tail_mass(std::norm(alpha), cfg.fock_cutoff);
    const auto trunc = plan_mean_photon_truncation(alpha, cfg.series_tolerance);

    const auto& n_exact = oracle.series.column("n");
    result.columns.push_back({"n.exact", n_exact});
    result.columns.push_back(
        {"n.leading", tabulate(result.times, opt.threads, [&](double t) { return mean_photons_leading(alpha, cfg.params, t); })});
    result.columns.push_back({"n.corrected", tabulate(result.times, opt.threads, [&](double t) {
                                  return corrected_mean_photons(alpha, cfg.params, t, trunc, cfg.corrected_variant,
                                                                cfg.series_tolerance)
                                      .value;
                              })});
    result.columns.push_back({"var.exact", variance(n_exact, oracle.series.column("n2"))});
    result.columns.push_back({"var.leading", tabulate(result.times, opt.threads, [&](double t) {
                                  return photon_variance_leading(alpha, cfg.params, t);
                              })});

    auto& meta = result.metadata;
    record_oracle(result, meta["oracle"], oracle);
    meta["series"] = {{"n_max", trunc.n_max}, {"tail_bound", trunc.tail_bound}};
}

inline void run_cat(const RunConfig& cfg, RunResult& result, const ExecOptions& opt)
{
    const auto spec = cat_spec(cfg.gamma, cfg.phi);
    const FockSpace fock{cfg.fock_cutoff};
    auto oracle = run_oracle(cfg.params, cfg.fock_cutoff, cat_state(spec, fock), result.times, opt.threads);
    oracle.field_tail_mass = poisson_tail_mass(cfg.gamma * cfg.gamma, cfg.fock_cutoff);

    const auto& p = cfg.params;
    result.columns.push_back({"n_cat.exact", oracle.series.column("n")});
    result.columns.push_back(
        {"n_cat.closed-form", tabulate(result.times, opt.threads, [&](double t) { return cat_mean_photons(spec, p, t); })});
    result.columns.push_back({"n_single.closed-form", tabulate(result.times, opt.threads, [&](double t) {
                                  return single_mean_photons(spec.gamma, p, t);
                              })});
    result.columns.push_back({"n2_cat.exact", oracle.series.column("n2")});
    result.columns.push_back({"n2_cat.closed-form",
                              tabulate(result.times, opt.threads, [&](double t) { return cat_second_moment(spec, p, t); })});
    result.columns.push_back({"n2_single.closed-form", tabulate(result.times, opt.threads, [&](double t) {
                                  return single_second_moment(spec.gamma, p, t);
                              })});
    result.columns.push_back({"decoherence.closed-form",
                              tabulate(result.times, opt.threads, [&](double t) { return decoherence_metric(spec, p, t); })});

    auto& meta = result.metadata;
    record_oracle(result, meta["oracle"], oracle);
    meta["cat"] = {{"delta_sq", spec.delta_sq()},
                   {"norm_sq", spec.norm_sq()},
                   {"truncated_norm_deviation", cat_norm_deviation(spec, fock)},
                   {"decoherence_bound", spec.delta_sq() > 0.0 ? decoherence_bound(spec) : -1.0}};
}

inline void run_perturbation(const RunConfig& cfg, RunResult& result, const ExecOptions& opt)
{
    const complex alpha = cfg.alpha_complex();
    const auto& p = cfg.params;
    const FockSpace fock{cfg.fock_cutoff};
    auto oracle = run_oracle(p, cfg.fock_cutoff, coherent_state(alpha, fock), result.times, opt.threads);
    oracle.field_tail_mass = poisson_tail_mass(std::norm(alpha), cfg.fock_cutoff);

    // H_0 + H_1 on the bosonized two-mode space
    const TwoModeSpace space{FockSpace{cfg.hp_cutoff}, FockSpace{cfg.hp_cutoff}};
    const auto ops = two_mode_operators(space);
    const auto h01 = hp_hamiltonian(1, p, space);
    const SpectralPropagator propagator(h01, ops.n_a + ops.n_b);
    const auto psi0 = tensor(coherent_state(alpha, space.a), vacuum(space.b));
    const auto first_order = observable_series(propagator, psi0, {{"n", ops.n_a}}, result.times, opt.threads);

    const auto trunc_mean = plan_mean_photon_truncation(alpha, cfg.series_tolerance);
    const auto trunc_delta = plan_delta_photon_truncation(alpha, p.n_atoms, cfg.corrected_variant, cfg.series_tolerance);
    auto corrected = [&](CorrectedVariant v) {
        return tabulate(result.times, opt.threads, [&](double t) {
            return corrected_mean_photons(alpha, p, t, trunc_mean, v, cfg.series_tolerance).value;
        });
    };
    const auto n_corrected = corrected(cfg.corrected_variant);

    result.columns.push_back({"n.exact", oracle.series.column("n")});
    result.columns.push_back(
        {"n.leading", tabulate(result.times, opt.threads, [&](double t) { return mean_photons_leading(alpha, p, t); })});
    result.columns.push_back({"n.corrected", n_corrected});
    result.columns.push_back({"n_first_order.exact", first_order.column("n")});
    result.columns.push_back({"n_first_order.corrected", n_corrected});
    result.columns.push_back({"dn.corrected", tabulate(result.times, opt.threads, [&](double t) {
                                  return delta_mean_photons(alpha, p, t, trunc_delta, cfg.corrected_variant,
                                                            cfg.series_tolerance)
                                      .value;
                              })});

    auto& meta = result.metadata;
    record_oracle(result, meta["oracle"], oracle);
    meta["first_order_model"] = {
        {"hp_cutoff", cfg.hp_cutoff},
        {"max_norm_drift",
         *std::max_element(first_order.norm_drift.begin(), first_order.norm_drift.end())}};
    meta["series"] = {{"mean_n_max", trunc_mean.n_max},
                      {"mean_tail_bound", trunc_mean.tail_bound},
                      {"delta_n_max", trunc_delta.n_max},
                      {"delta_tail_bound", trunc_delta.tail_bound}};

    // which reading of the corrected photon number follows the H_0 + H_1 dynamics
    nlohmann::ordered_json check;
    double best = 0.0;
    std::string best_name;
    for (const auto v : {CorrectedVariant::printed, CorrectedVariant::cos2})
    {
        const auto values = corrected(v);
        double dev = 0.0;
        for (std::size_t i = 0; i < values.size(); ++i)
            dev = std::max(dev, std::abs(values[i] - first_order.column("n")[i]));
        check[to_string(v)] = dev;
        if (best_name.empty() || dev < best)
        {
            best = dev;
            best_name = to_string(v);
        }
    }
    check["matches"] = best_name;
    meta["variant_check"] = check;
}

inline void run_convergence(const RunConfig& cfg, RunResult& result, const ExecOptions& opt)
{
    const complex alpha = cfg.alpha_complex();
    const double collective = cfg.collective_coupling.value_or(cfg.params.collective_coupling());
    const FockSpace fock{cfg.fock_cutoff};
    const auto field = coherent_state(alpha, fock);

    auto& meta = result.metadata;
    nlohmann::ordered_json members = nlohmann::ordered_json::array();
    std::vector<double> errors;
    for (const auto n : cfg.sweep_n_atoms)
    {
        ModelParams p = cfg.params;
        p.n_atoms = n;
        p.g = collective / std::sqrt(static_cast<double>(n));
        auto oracle = run_oracle(p, cfg.fock_cutoff, field, result.times, opt.threads);
        oracle.field_tail_mass = poisson_tail_mass(std::norm(alpha), cfg.fock_cutoff);
        const std::string obs = "n_N" + std::to_string(n);
        const auto& exact = oracle.series.column("n");
        std::vector<double> lead(result.times.size());
        double err = 0.0;
        for (std::size_t i = 0; i < lead.size(); ++i)
        {
            lead[i] = mean_photons_leading(alpha, p, result.times[i]);
            err = std::max(err, std::abs(exact[i] - lead[i]));
        }
        errors.push_back(err);
        result.columns.push_back({obs + ".exact", exact});
        result.columns.push_back({obs + ".leading", std::move(lead)});
        nlohmann::ordered_json block{{"n_atoms", n}, {"g", p.g}, {"max_abs_error", err}};
        record_oracle(result, block, oracle);
        members.push_back(block);
    }
    bool decreasing = true;
    for (std::size_t i = 1; i < errors.size(); ++i) decreasing = decreasing && errors[i] < errors[i - 1];
    meta["convergence"] = {{"collective_coupling", collective}, {"members", members}, {"strictly_decreasing", decreasing}};
}

/// Runs one resolved configuration.
inline RunResult execute(const RunConfig& cfg, const std::string& name, const ExecOptions& opt = {})
{
    RunResult result;
    result.name = name;
    result.times = linear_grid(cfg.t_start, cfg.t_end, cfg.n_points);

    auto& meta = result.metadata;
    meta["library"] = {{"name", "tcsim"}, {"version", version}};
    meta["experiment"] = to_string(cfg.kind);
    nlohmann::ordered_json resolved;
    for (const auto& [k, v] : cfg.resolved_entries()) resolved[k] = v;
    meta["config"] = resolved;
    meta["config_text"] = cfg.to_config_text();
    meta["hp_validity"] = hp_validity(cfg.field_amplitude(), cfg.params);

    switch (cfg.kind)
    {
    case ExperimentKind::coherent: run_coherent(cfg, result, opt); break;
    case ExperimentKind::cat: run_cat(cfg, result, opt); break;
    case ExperimentKind::perturbation: run_perturbation(cfg, result, opt); break;
    case ExperimentKind::convergence_sweep: run_convergence(cfg, result, opt); break;
    }

    result.summary = summarize(result.columns);
    meta["summary"] = summary_json(result.summary);
    meta["valid"] = result.valid();
    meta["validity_failures"] = result.validity_failures;
    return result;
}

}  // namespace tcsim::runner
