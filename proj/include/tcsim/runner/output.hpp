#pragma once

// CSV / JSON writers for run results and the reader used by `report`.

#include <cstddef>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tcsim/runner/config.hpp"
#include "tcsim/runner/experiments.hpp"

namespace tcsim::runner
{

/// Header `t,<obs.provenance>...`, one row per time point, 17 significant digits.
inline std::string to_csv(const RunResult& result)
{
    std::ostringstream os;
    os.precision(17);
    os << "t";
    for (const auto& c : result.columns) os << "," << c.name;
    os << "\n";
    for (std::size_t i = 0; i < result.times.size(); ++i)
    {
        os << result.times[i];
        for (const auto& c : result.columns) os << "," << c.values[i];
        os << "\n";
    }
    return os.str();
}

inline std::string metadata_text(const RunResult& result) { return result.metadata.dump(2) + "\n"; }

/// Data and metadata in a single document.
inline std::string to_json(const RunResult& result)
{
    nlohmann::ordered_json doc;
    doc["metadata"] = result.metadata;
    nlohmann::ordered_json data;
    data["t"] = result.times;
    for (const auto& c : result.columns) data[c.name] = c.values;
    doc["data"] = data;
    return doc.dump(2) + "\n";
}

inline void write_text(const std::string& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    out << text;
    if (!out) throw Error("write failed for " + path);
}

/// Writes <dir>/<name>.csv + <dir>/<name>.meta.json, or <dir>/<name>.json. Returns the data file path.
inline std::string write_result(const RunResult& result, const std::string& dir, OutputFormat format)
{
    const std::string base = dir.empty() ? result.name : dir + "/" + result.name;
    if (format == OutputFormat::csv)
    {
        write_text(base + ".csv", to_csv(result));
        write_text(base + ".meta.json", metadata_text(result));
        return base + ".csv";
    }
    write_text(base + ".json", to_json(result));
    return base + ".json";
}

/// Columns read back from a data file written by write_result.
struct DataTable
{
    std::vector<double> times;
    std::vector<Column> columns;
};

inline DataTable parse_csv(const std::string& text, const std::string& source)
{
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw Error(source + ": empty data file");
    DataTable table;
    const auto header = detail::split_list(line);
    if (header.empty() || header.front() != "t") throw Error(source + ": first column must be t");
    for (std::size_t i = 1; i < header.size(); ++i) table.columns.push_back({header[i], {}});
    std::size_t row = 1;
    while (std::getline(in, line))
    {
        ++row;
        if (detail::trim(line).empty()) continue;
        const auto cells = detail::split_list(line);
        if (cells.size() != header.size())
            throw Error(source + ":" + std::to_string(row) + ": expected " + std::to_string(header.size()) + " cells");
        try
        {
            table.times.push_back(std::stod(cells[0]));
            for (std::size_t i = 1; i < cells.size(); ++i) table.columns[i - 1].values.push_back(std::stod(cells[i]));
        }
        catch (const std::exception&)
        {
            throw Error(source + ":" + std::to_string(row) + ": malformed number");
        }
    }
    return table;
}

inline DataTable parse_json(const std::string& text, const std::string& source)
{
    DataTable table;
    try
    {
        const auto doc = nlohmann::ordered_json::parse(text);
        const auto& data = doc.at("data");
        table.times = data.at("t").get<std::vector<double>>();
        for (const auto& [key, values] : data.items())
        {
            if (key == "t") continue;
            table.columns.push_back({key, values.get<std::vector<double>>()});
        }
    }
    catch (const nlohmann::json::exception& e)
    {
        throw Error(source + ": " + e.what());
    }
    return table;
}

inline DataTable load_table(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    const bool json = path.size() >= 5 && path.substr(path.size() - 5) == ".json";
    return json ? parse_json(ss.str(), path) : parse_csv(ss.str(), path);
}

}  // namespace tcsim::runner
