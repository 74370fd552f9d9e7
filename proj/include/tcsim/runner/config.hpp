#pragma once

// Flat key = value experiment configuration: parsing, default resolution and
// aggregated validation. Unknown keys are errors.
//
// Keys:
//   experiment          coherent | cat | perturbation | convergence-sweep (required)
//   omega               mode frequency (default 1)
//   delta               atomic splitting (default omega)
//   g                   single-atom coupling (default 0.1)
//   collective_coupling sqrt(N) g; when given, g is derived from it
//   n_atoms             number of atoms N (default 25)
//   alpha, alpha_phase  coherent amplitude |alpha| and its phase (default 0.5, 0)
//   gamma, phi          cat parameters (default 1, pi/4)
//   t_start, t_end      time window (default 0 and 2 pi / (sqrt(N) g))
//   n_points            time grid size (default 200)
//   fock_cutoff         field cutoff (default ceil(|z|^2 + 8|z| + 10))
//   hp_cutoff           per-mode cutoff of the two-mode bosonized space (default fock_cutoff)
//   series_tolerance    remainder target of the perturbative double sums (default 1e-10)
//   sweep_n_atoms       atom numbers of a convergence sweep (default 4,16,64)
//   corrected_variant   printed | cos2 (default cos2)
//   format              csv | json (default csv)

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "tcsim/cat.hpp"
#include "tcsim/exact.hpp"
#include "tcsim/hp_model.hpp"
#include "tcsim/perturbation.hpp"

namespace tcsim::runner
{

enum class ExperimentKind
{
    coherent,
    cat,
    perturbation,
    convergence_sweep
};

inline const char* to_string(ExperimentKind k)
{
    switch (k)
    {
    case ExperimentKind::coherent: return "coherent";
    case ExperimentKind::cat: return "cat";
    case ExperimentKind::perturbation: return "perturbation";
    case ExperimentKind::convergence_sweep: return "convergence-sweep";
    }
    return "unknown";
}

enum class OutputFormat
{
    csv,
    json
};

inline const char* to_string(OutputFormat f) { return f == OutputFormat::csv ? "csv" : "json"; }

struct Diagnostic
{
    enum class Severity
    {
        error,
        warning
    };
    Severity severity = Severity::error;
    std::string code;   ///< e.g. Range, UnknownKey, CutoffTooSmall, HpValidity
    std::string field;  ///< config key, empty when not tied to one
    std::size_t line = 0;
    std::string message;

    std::string to_string(const std::string& source) const
    {
        std::string out = source;
        if (line != 0) out += ":" + std::to_string(line);
        out += severity == Severity::error ? ": error" : ": warning";
        out += " [" + code + "]";
        if (!field.empty()) out += " " + field + ":";
        return out + " " + message;
    }
};

/// Thrown with every diagnostic of a rejected configuration.
class ConfigError : public Error
{
public:
    ConfigError(std::string source, std::vector<Diagnostic> diagnostics)
        : Error(summarize(source, diagnostics)), source_(std::move(source)), diagnostics_(std::move(diagnostics))
    {
    }
    const std::vector<Diagnostic>& diagnostics() const noexcept { return diagnostics_; }
    const std::string& source() const noexcept { return source_; }

private:
    static std::string summarize(const std::string& source, const std::vector<Diagnostic>& d)
    {
        std::string out;
        for (const auto& x : d)
        {
            if (!out.empty()) out += "\n";
            out += x.to_string(source);
        }
        return out;
    }
    std::string source_;
    std::vector<Diagnostic> diagnostics_;
};

struct ConfigEntry
{
    std::string key;
    std::string value;
    std::size_t line = 0;
};

/// Configuration text before interpretation.
struct RawConfig
{
    std::string source = "<config>";
    std::vector<ConfigEntry> entries;

    const ConfigEntry* find(const std::string& key) const
    {
        for (const auto& e : entries)
            if (e.key == key) return &e;
        return nullptr;
    }

    void set(const std::string& key, const std::string& value)
    {
        for (auto& e : entries)
        {
            if (e.key == key)
            {
                e.value = value;
                return;
            }
        }
        entries.push_back({key, value, 0});
    }
};

inline const std::vector<std::string>& known_keys()
{
    static const std::vector<std::string> keys = {
        "experiment", "omega",   "delta",   "g",           "collective_coupling", "n_atoms",
        "alpha",      "alpha_phase", "gamma", "phi",       "t_start",             "t_end",
        "n_points",   "fock_cutoff", "hp_cutoff", "series_tolerance", "sweep_n_atoms", "corrected_variant",
        "format"};
    return keys;
}

namespace detail
{

inline std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_list(const std::string& value)
{
    std::vector<std::string> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(trim(item));
    return out;
}

/// Shortest text that parses back to the same double.
inline std::string format_double(double v)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

}  // namespace detail

/// Parses `key = value` lines; '#' starts a comment.
inline RawConfig parse_config_text(const std::string& text, const std::string& source = "<config>")
{
    RawConfig raw;
    raw.source = source;
    std::vector<Diagnostic> errors;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line))
    {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
        {
            errors.push_back({Diagnostic::Severity::error, "Parse", "", lineno, "expected 'key = value'"});
            continue;
        }
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        if (std::find(known_keys().begin(), known_keys().end(), key) == known_keys().end())
        {
            errors.push_back({Diagnostic::Severity::error, "UnknownKey", key, lineno, "unknown key"});
            continue;
        }
        if (value.empty())
        {
            errors.push_back({Diagnostic::Severity::error, "Parse", key, lineno, "missing value"});
            continue;
        }
        if (const auto* prev = raw.find(key))
        {
            errors.push_back({Diagnostic::Severity::error, "Parse", key, lineno,
                              "duplicate key (first set on line " + std::to_string(prev->line) + ")"});
            continue;
        }
        raw.entries.push_back({key, value, lineno});
    }
    if (!errors.empty()) throw ConfigError(source, std::move(errors));
    return raw;
}

inline RawConfig load_config_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
    {
        throw ConfigError(path, {{Diagnostic::Severity::error, "Io", "", 0, "cannot open configuration file"}});
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), path);
}

/// Fully resolved experiment description.
struct RunConfig
{
    ExperimentKind kind = ExperimentKind::coherent;
    ModelParams params;
    std::optional<double> collective_coupling;
    double alpha = 0.5;
    double alpha_phase = 0.0;
    double gamma = 1.0;
    double phi = std::numbers::pi / 4.0;
    double t_start = 0.0;
    double t_end = 0.0;
    std::size_t n_points = 200;
    std::size_t fock_cutoff = 0;
    std::size_t hp_cutoff = 0;
    double series_tolerance = default_tolerance;
    std::vector<std::size_t> sweep_n_atoms = {4, 16, 64};
    CorrectedVariant corrected_variant = CorrectedVariant::cos2;
    OutputFormat format = OutputFormat::csv;

    complex alpha_complex() const { return std::polar(alpha, alpha_phase); }

    /// Amplitude that sets the field truncation.
    double field_amplitude() const { return kind == ExperimentKind::cat ? gamma : alpha; }

    /// Configuration text that reproduces this run.
    std::vector<std::pair<std::string, std::string>> resolved_entries() const
    {
        using detail::format_double;
        std::vector<std::pair<std::string, std::string>> out;
        out.emplace_back("experiment", to_string(kind));
        out.emplace_back("omega", format_double(params.omega));
        out.emplace_back("delta", format_double(params.delta));
        if (collective_coupling)
            out.emplace_back("collective_coupling", format_double(*collective_coupling));
        else
            out.emplace_back("g", format_double(params.g));
        out.emplace_back("n_atoms", std::to_string(params.n_atoms));
        if (kind == ExperimentKind::cat)
        {
            out.emplace_back("gamma", format_double(gamma));
            out.emplace_back("phi", format_double(phi));
        }
        else
        {
            out.emplace_back("alpha", format_double(alpha));
            out.emplace_back("alpha_phase", format_double(alpha_phase));
        }
        out.emplace_back("t_start", format_double(t_start));
        out.emplace_back("t_end", format_double(t_end));
        out.emplace_back("n_points", std::to_string(n_points));
        out.emplace_back("fock_cutoff", std::to_string(fock_cutoff));
        out.emplace_back("hp_cutoff", std::to_string(hp_cutoff));
        out.emplace_back("series_tolerance", format_double(series_tolerance));
        if (kind == ExperimentKind::convergence_sweep)
        {
            std::string list;
            for (std::size_t i = 0; i < sweep_n_atoms.size(); ++i)
                list += (i ? "," : "") + std::to_string(sweep_n_atoms[i]);
            out.emplace_back("sweep_n_atoms", list);
        }
        out.emplace_back("corrected_variant", to_string(corrected_variant));
        out.emplace_back("format", to_string(format));
        return out;
    }

    std::string to_config_text() const
    {
        std::string text;
        for (const auto& [k, v] : resolved_entries()) text += k + " = " + v + "\n";
        return text;
    }
};

struct Validation
{
    std::optional<RunConfig> config;
    std::vector<Diagnostic> diagnostics;

    bool ok() const
    {
        return config.has_value() && std::none_of(diagnostics.begin(), diagnostics.end(), [](const Diagnostic& d) {
                   return d.severity == Diagnostic::Severity::error;
               });
    }
    std::vector<Diagnostic> errors() const
    {
        std::vector<Diagnostic> out;
        for (const auto& d : diagnostics)
            if (d.severity == Diagnostic::Severity::error) out.push_back(d);
        return out;
    }
};

namespace detail
{

class Reader
{
public:
    Reader(const RawConfig& raw, std::vector<Diagnostic>& diags) : raw_(raw), diags_(diags) {}

    bool has(const std::string& key) const { return raw_.find(key) != nullptr; }

    std::size_t line_of(const std::string& key) const
    {
        const auto* e = raw_.find(key);
        return e ? e->line : 0;
    }

    void error(const std::string& code, const std::string& key, const std::string& message)
    {
        diags_.push_back({Diagnostic::Severity::error, code, key, line_of(key), message});
    }

    void warning(const std::string& code, const std::string& key, const std::string& message)
    {
        diags_.push_back({Diagnostic::Severity::warning, code, key, line_of(key), message});
    }

    double real(const std::string& key, double fallback)
    {
        const auto* e = raw_.find(key);
        if (!e) return fallback;
        if (e->value.find(',') != std::string::npos)
        {
            error("Parse", key, "value lists are only accepted by the sweep command");
            return fallback;
        }
        try
        {
            std::size_t used = 0;
            const double v = std::stod(e->value, &used);
            if (used != e->value.size()) throw std::invalid_argument("trailing");
            if (!std::isfinite(v)) throw std::invalid_argument("finite");
            return v;
        }
        catch (const std::exception&)
        {
            error("Parse", key, "'" + e->value + "' is not a finite number");
            return fallback;
        }
    }

    std::size_t count(const std::string& key, std::size_t fallback)
    {
        const auto* e = raw_.find(key);
        if (!e) return fallback;
        return parse_count(key, e->value, fallback);
    }

    std::size_t parse_count(const std::string& key, const std::string& text, std::size_t fallback)
    {
        if (text.find(',') != std::string::npos)
        {
            error("Parse", key, "value lists are only accepted by the sweep command");
            return fallback;
        }
        try
        {
            std::size_t used = 0;
            const long long v = std::stoll(text, &used);
            if (used != text.size()) throw std::invalid_argument("trailing");
            if (v < 0)
            {
                error("Range", key, "must be a non-negative integer, got " + text);
                return fallback;
            }
            return static_cast<std::size_t>(v);
        }
        catch (const std::exception&)
        {
            error("Parse", key, "'" + text + "' is not an integer");
            return fallback;
        }
    }

    std::string word(const std::string& key, const std::string& fallback) const
    {
        const auto* e = raw_.find(key);
        return e ? e->value : fallback;
    }

private:
    const RawConfig& raw_;
    std::vector<Diagnostic>& diags_;
};

}  // namespace detail

/// Resolves defaults and runs every precondition check; all violations are reported together.
inline Validation validate(const RawConfig& raw)
{
    Validation result;
    auto& diags = result.diagnostics;
    detail::Reader r(raw, diags);
    RunConfig cfg;

    if (!r.has("experiment"))
    {
        diags.push_back({Diagnostic::Severity::error, "Missing", "experiment", 0,
                         "required key (coherent | cat | perturbation | convergence-sweep)"});
    }
    else
    {
        const auto kind = r.word("experiment", "");
        if (kind == "coherent")
            cfg.kind = ExperimentKind::coherent;
        else if (kind == "cat")
            cfg.kind = ExperimentKind::cat;
        else if (kind == "perturbation")
            cfg.kind = ExperimentKind::perturbation;
        else if (kind == "convergence-sweep")
            cfg.kind = ExperimentKind::convergence_sweep;
        else
            r.error("Parse", "experiment", "unknown experiment kind '" + kind + "'");
    }

    cfg.params.omega = r.real("omega", 1.0);
    cfg.params.delta = r.real("delta", cfg.params.omega);
    cfg.params.n_atoms = r.count("n_atoms", 25);
    if (r.has("g") && r.has("collective_coupling"))
    {
        r.error("Conflict", "collective_coupling", "give either g or collective_coupling, not both");
    }
    if (r.has("collective_coupling"))
    {
        cfg.collective_coupling = r.real("collective_coupling", 0.5);
        if (*cfg.collective_coupling < 0.0) r.error("Range", "collective_coupling", "must be >= 0");
        cfg.params.g = cfg.params.n_atoms > 0
                           ? *cfg.collective_coupling / std::sqrt(static_cast<double>(cfg.params.n_atoms))
                           : 0.0;
    }
    else
    {
        cfg.params.g = r.real("g", 0.1);
    }
    cfg.alpha = r.real("alpha", 0.5);
    cfg.alpha_phase = r.real("alpha_phase", 0.0);
    cfg.gamma = r.real("gamma", 1.0);
    cfg.phi = r.real("phi", std::numbers::pi / 4.0);
    cfg.n_points = r.count("n_points", 200);
    cfg.series_tolerance = r.real("series_tolerance", default_tolerance);

    if (!(cfg.params.omega > 0.0)) r.error("Range", "omega", "must be > 0");
    if (!(cfg.params.delta > 0.0)) r.error("Range", "delta", "must be > 0");
    if (!(cfg.params.g >= 0.0)) r.error("Range", "g", "must be >= 0");
    if (cfg.params.n_atoms < 1) r.error("Range", "n_atoms", "must be >= 1");
    if (!(cfg.alpha >= 0.0)) r.error("Range", "alpha", "must be >= 0 (use alpha_phase for the phase)");
    if (!(cfg.gamma >= 0.0)) r.error("Range", "gamma", "must be >= 0");
    if (cfg.n_points < 2) r.error("Range", "n_points", "must be >= 2");
    if (!(cfg.series_tolerance > 0.0)) r.error("Range", "series_tolerance", "must be > 0");
    if (!cfg.params.resonant())
    {
        r.error("OffResonance", "delta", "the leading-order closed forms require delta == omega");
    }

    if (r.has("sweep_n_atoms"))
    {
        cfg.sweep_n_atoms.clear();
        for (const auto& item : detail::split_list(r.word("sweep_n_atoms", "")))
        {
            const auto n = r.parse_count("sweep_n_atoms", item, 0);
            if (n < 1) r.error("Range", "sweep_n_atoms", "atom numbers must be >= 1");
            cfg.sweep_n_atoms.push_back(n);
        }
    }
    if (r.has("sweep_n_atoms") && cfg.kind != ExperimentKind::convergence_sweep)
    {
        r.error("Conflict", "sweep_n_atoms", "only meaningful for experiment = convergence-sweep");
    }

    const auto variant = r.word("corrected_variant", "cos2");
    if (variant == "printed")
        cfg.corrected_variant = CorrectedVariant::printed;
    else if (variant == "cos2")
        cfg.corrected_variant = CorrectedVariant::cos2;
    else
        r.error("Parse", "corrected_variant", "expected printed | cos2, got '" + variant + "'");

    const auto format = r.word("format", "csv");
    if (format == "csv")
        cfg.format = OutputFormat::csv;
    else if (format == "json")
        cfg.format = OutputFormat::json;
    else
        r.error("Parse", "format", "expected csv | json, got '" + format + "'");

    const double collective = cfg.collective_coupling.value_or(cfg.params.collective_coupling());
    cfg.t_start = r.real("t_start", 0.0);
    if (r.has("t_end"))
    {
        cfg.t_end = r.real("t_end", 1.0);
    }
    else if (collective > 0.0)
    {
        cfg.t_end = cfg.t_start + 2.0 * std::numbers::pi / collective;
    }
    else
    {
        // a negative coupling is already reported as a range error
        if (collective == 0.0) r.error("Missing", "t_end", "required when the coupling is zero");
        cfg.t_end = cfg.t_start + 1.0;
    }
    if (!(cfg.t_end > cfg.t_start)) r.error("Range", "t_end", "must be greater than t_start");

    const double amplitude = cfg.field_amplitude();
    cfg.fock_cutoff = r.count("fock_cutoff", default_cutoff(amplitude));
    cfg.hp_cutoff = r.count("hp_cutoff", cfg.fock_cutoff);
    const double mean = amplitude * amplitude;
    const double tail = poisson_tail_mass(mean, cfg.fock_cutoff);
    if (tail > coherent_tail_tolerance)
    {
        r.error("CutoffTooSmall", "fock_cutoff",
                "tail mass " + detail::format_double(tail) + " above " + detail::format_double(coherent_tail_tolerance) +
                    "; required cutoff " + std::to_string(required_cutoff(mean)));
    }
    if (cfg.kind == ExperimentKind::perturbation && poisson_tail_mass(mean, cfg.hp_cutoff) > coherent_tail_tolerance)
    {
        r.error("CutoffTooSmall", "hp_cutoff", "required cutoff " + std::to_string(required_cutoff(mean)));
    }

    const std::vector<std::size_t> atom_numbers =
        cfg.kind == ExperimentKind::convergence_sweep ? cfg.sweep_n_atoms : std::vector<std::size_t>{cfg.params.n_atoms};
    for (const auto n : atom_numbers)
    {
        if (n < 1) continue;
        const double ratio = mean / (0.5 * static_cast<double>(n));
        if (ratio > hp_validity_threshold)
        {
            r.warning("HpValidity", cfg.kind == ExperimentKind::convergence_sweep ? "sweep_n_atoms" : "n_atoms",
                      "|z|^2/(N/2) = " + detail::format_double(ratio) + " exceeds " +
                          detail::format_double(hp_validity_threshold) + " at N=" + std::to_string(n) +
                          "; leading-order bosonization is unreliable");
        }
        if (const auto w = desk_scale_warning(FockSpace{cfg.fock_cutoff}, SpinSector{n}))
        {
            r.warning("DeskScale", "n_atoms", *w);
        }
    }

    result.config = cfg;
    return result;
}

/// validate() that throws ConfigError on any error-level diagnostic.
inline RunConfig resolve(const RawConfig& raw, std::vector<Diagnostic>* warnings = nullptr)
{
    auto v = validate(raw);
    if (!v.ok()) throw ConfigError(raw.source, v.errors());
    if (warnings)
    {
        for (const auto& d : v.diagnostics)
            if (d.severity == Diagnostic::Severity::warning) warnings->push_back(d);
    }
    return *v.config;
}

/// Cartesian expansion of comma-separated values (sweep_n_atoms stays a list).
inline std::vector<RawConfig> expand_grid(const RawConfig& raw)
{
    std::vector<RawConfig> members{raw};
    for (const auto& entry : raw.entries)
    {
        if (entry.key == "sweep_n_atoms") continue;
        const auto values = detail::split_list(entry.value);
        if (values.size() < 2) continue;
        std::vector<RawConfig> next;
        for (const auto& m : members)
        {
            for (const auto& v : values)
            {
                RawConfig copy = m;
                copy.set(entry.key, v);
                next.push_back(std::move(copy));
            }
        }
        members = std::move(next);
    }
    return members;
}

}  // namespace tcsim::runner
