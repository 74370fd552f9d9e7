// tcsim command-line front end: run / validate / sweep / report.

#include <iomanip>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tcsim/runner/config.hpp"
#include "tcsim/runner/experiments.hpp"
#include "tcsim/runner/output.hpp"
#include "tcsim/version.hpp"

namespace
{

namespace fs = std::filesystem;
using namespace tcsim;
using namespace tcsim::runner;

constexpr int exit_ok = 0;
constexpr int exit_failure = 1;
constexpr int exit_config = 2;
constexpr int exit_invalid = 3;

struct Flags
{
    std::string format;
    std::string out = ".";
    std::size_t threads = 1;
    std::string variant;
};

RawConfig load_with_overrides(const std::string& path, const Flags& flags)
{
    auto raw = load_config_file(path);
    if (!flags.format.empty()) raw.set("format", flags.format);
    if (!flags.variant.empty()) raw.set("corrected_variant", flags.variant);
    return raw;
}

void print_diagnostics(const std::string& source, const std::vector<Diagnostic>& diags)
{
    for (const auto& d : diags) std::cerr << d.to_string(source) << "\n";
}

std::string stem_of(const std::string& path) { return fs::path(path).stem().string(); }

int report_result(const RunResult& result, const std::string& written)
{
    std::cout << "wrote " << written << "\n";
    for (const auto& s : result.summary)
    {
        std::cout << "  " << s.observable << ": " << s.candidate << " vs " << s.reference << "  max_abs=" << s.max_abs
                  << "  rms=" << s.rms << "\n";
    }
    if (!result.valid())
    {
        for (const auto& f : result.validity_failures) std::cerr << result.name << ": invalid: " << f << "\n";
        return exit_invalid;
    }
    return exit_ok;
}

int cmd_run(const std::string& path, const Flags& flags)
{
    const auto raw = load_with_overrides(path, flags);
    std::vector<Diagnostic> warnings;
    const auto cfg = resolve(raw, &warnings);
    print_diagnostics(raw.source, warnings);
    fs::create_directories(flags.out);
    const auto result = execute(cfg, stem_of(path), {flags.threads});
    return report_result(result, write_result(result, flags.out, cfg.format));
}

int cmd_validate(const std::string& path, const Flags& flags)
{
    const auto raw = load_with_overrides(path, flags);
    const auto v = validate(raw);
    print_diagnostics(raw.source, v.diagnostics);
    if (!v.ok()) return exit_config;
    std::cout << v.config->to_config_text();
    return exit_ok;
}

int cmd_sweep(const std::string& path, const Flags& flags)
{
    const auto raw = load_with_overrides(path, flags);
    const auto members = expand_grid(raw);

    // every member is validated before any of them runs
    std::vector<RunConfig> configs;
    std::vector<Diagnostic> errors;
    for (std::size_t i = 0; i < members.size(); ++i)
    {
        const auto v = validate(members[i]);
        for (auto d : v.diagnostics)
        {
            d.message += " (sweep member " + std::to_string(i) + ")";
            if (d.severity == Diagnostic::Severity::error)
                errors.push_back(d);
            else
                print_diagnostics(raw.source, {d});
        }
        if (v.ok()) configs.push_back(*v.config);
    }
    if (!errors.empty()) throw ConfigError(raw.source, errors);

    fs::create_directories(flags.out);
    const auto stem = stem_of(path);
    std::string index = "member,file,experiment,valid\n";
    int status = exit_ok;
    for (std::size_t i = 0; i < configs.size(); ++i)
    {
        std::ostringstream suffix;
        suffix << '_' << std::setw(4) << std::setfill('0') << i;
        const auto result = execute(configs[i], stem + suffix.str(), {flags.threads});
        const auto written = write_result(result, flags.out, configs[i].format);
        if (report_result(result, written) != exit_ok) status = exit_invalid;
        index += std::to_string(i) + "," + fs::path(written).filename().string() + "," + to_string(configs[i].kind) +
                 "," + (result.valid() ? "true" : "false") + "\n";
    }
    write_text((fs::path(flags.out) / (stem + "_sweep.csv")).string(), index);
    return status;
}

int cmd_report(const std::vector<std::string>& files)
{
    std::cout.precision(6);
    for (const auto& f : files)
    {
        const auto table = load_table(f);
        std::cout << f << " (" << table.times.size() << " rows)\n";
        for (const auto& s : summarize(table.columns))
        {
            std::cout << "  " << s.observable << ": " << s.candidate << " vs " << s.reference
                      << "  max_abs=" << s.max_abs << "  rms=" << s.rms << "\n";
        }
    }
    return exit_ok;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Tavis-Cummings dynamics: exact oracle versus bosonized closed forms"};
    app.set_version_flag("--version", std::string(tcsim::version));
    app.require_subcommand(1);

    Flags flags;
    auto add_common = [&flags](CLI::App* sub) {
        sub->add_option("--format", flags.format, "output format")->check(CLI::IsMember({"csv", "json"}));
        sub->add_option("--out", flags.out, "output directory");
        sub->add_option("--threads", flags.threads, "worker threads (results do not depend on it)")
            ->check(CLI::PositiveNumber);
        sub->add_option("--corrected-variant", flags.variant, "reading of the first-order photon number")
            ->check(CLI::IsMember({"printed", "cos2"}));
    };

    std::string config_path;
    auto* run = app.add_subcommand("run", "run one experiment");
    run->add_option("config", config_path, "configuration file")->required();
    add_common(run);

    auto* val = app.add_subcommand("validate", "resolve defaults and check a configuration");
    val->add_option("config", config_path, "configuration file")->required();
    add_common(val);

    auto* sweep = app.add_subcommand("sweep", "run the cartesian grid of comma-separated values");
    sweep->add_option("config", config_path, "configuration file")->required();
    add_common(sweep);

    std::vector<std::string> files;
    auto* report = app.add_subcommand("report", "recompute error summaries from data files");
    report->add_option("files", files, "data files (.csv or .json)")->required();

    CLI11_PARSE(app, argc, argv);

    try
    {
        if (*run) return cmd_run(config_path, flags);
        if (*val) return cmd_validate(config_path, flags);
        if (*sweep) return cmd_sweep(config_path, flags);
        if (*report) return cmd_report(files);
    }
    catch (const ConfigError& e)
    {
        std::cerr << e.what() << "\n";
        return exit_config;
    }
    catch (const std::exception& e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return exit_failure;
    }
    return exit_failure;
}
