// prosim: run scenarios, sweeps, the analytic overhead report and the
// simulation-vs-model comparison.
#include "prosim/experiments.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace
{

using namespace prosim;

std::vector<std::uint64_t>
ParseSeeds(const std::string& text)
{
    // "1-10" or "1,2,5"
    std::vector<std::uint64_t> seeds;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
    {
        const auto dash = item.find('-');
        if (dash != std::string::npos && dash > 0)
        {
            const auto lo = std::stoull(item.substr(0, dash));
            const auto hi = std::stoull(item.substr(dash + 1));
            if (hi < lo)
            {
                throw std::invalid_argument("seed range '" + item + "' is reversed");
            }
            for (auto s = lo; s <= hi; ++s)
            {
                seeds.push_back(s);
            }
        }
        else
        {
            seeds.push_back(std::stoull(item));
        }
    }
    if (seeds.empty())
    {
        throw std::invalid_argument("no seeds given");
    }
    return seeds;
}

std::vector<double>
ParseValues(const std::string& text)
{
    std::vector<double> values;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
    {
        std::size_t used = 0;
        values.push_back(std::stod(item, &used));
        if (used != item.size())
        {
            throw std::invalid_argument("bad value '" + item + "'");
        }
    }
    return values;
}

ProtocolKind
RequireProtocol(const std::string& name)
{
    const auto p = ParseProtocol(name);
    if (!p)
    {
        throw std::invalid_argument("unknown protocol '" + name + "'");
    }
    return *p;
}

ScenarioConfig
Config(const std::string& path)
{
    return path.empty() ? ScenarioConfig{} : LoadConfig(path);
}

/// Writes to `path`, or stdout when it is empty or "-".
template <typename Fn>
void
WithOutput(const std::string& path, Fn&& fn)
{
    if (path.empty() || path == "-")
    {
        fn(std::cout);
        return;
    }
    std::ofstream out(path);
    if (!out)
    {
        throw std::runtime_error("cannot write '" + path + "'");
    }
    fn(out);
}

} // namespace

int
main(int argc, char** argv)
{
    CLI::App app{"Proactive routing simulator and control-overhead model"};
    app.require_subcommand(1);

    std::string config;
    std::string out;
    std::string seeds;
    std::string protocol;

    auto* run = app.add_subcommand("run", "Run one scenario per seed and print result rows");
    run->add_option("--config", config, "Scenario file (key = value)");
    run->add_option("--out", out, "Output CSV (default stdout)");
    run->add_option("--seed,--seeds", seeds, "Seed list, e.g. 1 or 1-10 or 1,3,5");
    run->add_option("--protocol", protocol, "dsdv, fsr or olsr (overrides the config)");

    std::string sweepParam = "nodes";
    std::string sweepValues;
    std::string protocols = "dsdv,fsr,olsr";
    unsigned threads = 1;
    auto* sweep = app.add_subcommand("sweep", "Sweep nodes, pause or speed across protocols and seeds");
    sweep->add_option("--config", config, "Scenario file (key = value)");
    sweep->add_option("--out", out, "Output CSV; existing rows are kept and skipped")->required();
    sweep->add_option("--seed,--seeds", seeds, "Seed list (default 1-10)");
    sweep->add_option("--protocol", protocols, "Comma-separated protocols");
    sweep->add_option("--param", sweepParam, "nodes, pause or speed");
    sweep->add_option("--values", sweepValues, "Comma-separated values")->required();
    sweep->add_option("--threads", threads, "Concurrent runs");

    std::string analyticParam;
    std::string analyticValues;
    double bracketLo = 1e-3;
    double bracketHi = 1e4;
    auto* analyticCmd = app.add_subcommand("analytic", "Evaluate the overhead model and its derivatives");
    analyticCmd->add_option("--config", config, "Parameter file (n, B, k, T_pr, T, mu_k, lambda, PN_avg, L_avg, H)");
    analyticCmd->add_option("--out", out, "Output CSV (default stdout)");
    analyticCmd->add_option("--param", analyticParam, "Parameter to sweep");
    analyticCmd->add_option("--values", analyticValues, "Comma-separated sweep values");
    analyticCmd->add_option("--bracket-lo", bracketLo, "Stationary T_pr search, low end");
    analyticCmd->add_option("--bracket-hi", bracketHi, "Stationary T_pr search, high end");

    std::string rowsPath;
    auto* compare = app.add_subcommand("compare", "Fit measured control traffic against k n^3 / (B T_pr)");
    compare->add_option("--rows", rowsPath, "Result CSV from a nodes sweep")->required();
    compare->add_option("--config", config, "Analytic parameter file (B and T_pr are used)");
    compare->add_option("--out", out, "Output CSV (default stdout)");
    compare->add_option("--protocol", protocol, "Only this protocol");

    CLI11_PARSE(app, argc, argv);

    try
    {
        if (run->parsed())
        {
            ScenarioConfig cfg = Config(config);
            if (!protocol.empty())
            {
                cfg.protocol = RequireProtocol(protocol);
            }
            const auto seedList = seeds.empty() ? std::vector<std::uint64_t>{cfg.seed} : ParseSeeds(seeds);
            WithOutput(out, [&](std::ostream& os) {
                os << ResultHeader() << '\n';
                for (auto s : seedList)
                {
                    cfg.seed = s;
                    os << FormatRow(RunScenario(cfg).row) << '\n';
                }
            });
        }
        else if (sweep->parsed())
        {
            const ScenarioConfig cfg = Config(config);
            SweepSpec spec;
            spec.param = ParseSweepParam(sweepParam);
            spec.values = ParseValues(sweepValues);
            spec.protocols.clear();
            std::stringstream ss(protocols);
            std::string item;
            while (std::getline(ss, item, ','))
            {
                spec.protocols.push_back(RequireProtocol(item));
            }
            if (!seeds.empty())
            {
                spec.seeds = ParseSeeds(seeds);
            }
            spec.threads = threads;
            const auto rows = Sweep(cfg, spec, out);
            std::cerr << rows.size() << " rows in " << out << '\n';
        }
        else if (analyticCmd->parsed())
        {
            analytic::Params params;
            if (!config.empty())
            {
                std::ifstream in(config);
                if (!in)
                {
                    throw std::runtime_error("cannot open '" + config + "'");
                }
                params = analytic::ParseParams(in);
            }
            AnalyticSweep sw;
            sw.bracketLo = bracketLo;
            sw.bracketHi = bracketHi;
            if (!analyticParam.empty())
            {
                sw.param = ParseAnalyticParam(analyticParam);
                sw.values = ParseValues(analyticValues);
            }
            WithOutput(out, [&](std::ostream& os) { AnalyticReport(params, sw, os); });
        }
        else if (compare->parsed())
        {
            analytic::Params params;
            if (!config.empty())
            {
                std::ifstream in(config);
                if (!in)
                {
                    throw std::runtime_error("cannot open '" + config + "'");
                }
                params = analytic::ParseParams(in);
            }
            std::ifstream in(rowsPath);
            if (!in)
            {
                throw std::runtime_error("cannot open '" + rowsPath + "'");
            }
            auto rows = ReadRows(in);
            if (!protocol.empty())
            {
                const std::string keep = ToString(RequireProtocol(protocol));
                std::erase_if(rows, [&keep](const ResultRow& r) { return r.protocol != keep; });
            }
            const auto fits = Compare(rows, params);
            WithOutput(out, [&](std::ostream& os) { WriteComparison(fits, os); });
        }
    }
    catch (const std::exception& e)
    {
        std::cerr << "prosim: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
