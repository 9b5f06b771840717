// Scenario configuration, single runs, parameter sweeps, the analytic report
// and the simulation-vs-model fit.
#pragma once

#include "prosim/analytic.hpp"
#include "prosim/simulation.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace prosim
{

enum class Placement
{
    Random,
    Chain,     ///< nodes on a horizontal line, chain_spacing apart
    Connected, ///< uniform placement redrawn until the unit-disk graph is connected
};

struct ScenarioConfig
{
    ProtocolKind protocol = ProtocolKind::Dsdv;
    std::size_t nodes = 50;
    double areaX = 1000.0;
    double areaY = 1000.0;
    double range = 250.0;
    double bandwidth = 2.0e6;
    std::uint32_t packetSize = 512;
    double speedMin = 1.0;
    double speedMax = 20.0;
    double pause = 0.0;
    std::size_t flows = 10;
    double rate = 4.0;
    double trafficStart = 10.0;
    std::optional<double> trafficStop; ///< defaults to duration
    double duration = 900.0;
    std::uint64_t seed = 1;
    Placement placement = Placement::Random;
    double chainSpacing = 200.0;
    double loss = 0.0;
    std::optional<std::uint32_t> ttl;
    double bufferTimeout = 30.0;
    double linkSample = 0.1;
    ControlSizing sizing;
    DsdvConfig dsdv;
    FsrConfig fsr;
    OlsrConfig olsr;

    /// Throws std::invalid_argument naming the offending key.
    void Validate() const;
    /// True when nobody ever moves (pause covers the run or no speed).
    bool IsStatic() const { return pause >= duration || speedMax <= 0.0; }
};

/// Parses `key = value` lines; '#' starts a comment. Unknown keys and bad
/// values throw std::invalid_argument naming the key and line.
ScenarioConfig ParseConfig(std::istream& in);
ScenarioConfig LoadConfig(const std::string& path);

/// Initial trajectories, placement and flows drawn from the config's seed.
SimulationSetup BuildSetup(const ScenarioConfig& cfg);

struct ResultRow
{
    std::string protocol;
    std::uint64_t seed = 0;
    std::size_t nodes = 0;
    double pause = 0.0;
    double speedMax = 0.0;
    double duration = 0.0;
    double throughputBps = 0.0;
    std::optional<double> avgDelay;
    std::optional<double> nrl;
    std::optional<double> deliveryRatio;
    std::uint64_t ctrlPkts = 0;
    std::uint64_t ctrlBytes = 0;
    std::uint64_t dataSent = 0;
    std::uint64_t dataDelivered = 0;
    std::uint64_t dataDropped = 0;
};

/// Exact CSV header for ResultRow.
const std::string& ResultHeader();
std::string FormatRow(const ResultRow& row);
/// Inverse of FormatRow; throws std::invalid_argument on malformed lines.
ResultRow ParseRow(const std::string& line);
/// Reads a CSV with the ResultRow header.
std::vector<ResultRow> ReadRows(std::istream& in);

/// A finished run: the row plus the end-of-run counters it was built from.
struct RunOutcome
{
    ResultRow row;
    std::uint64_t inFlight = 0;
    std::uint64_t protocolBroadcasts = 0;
};

RunOutcome RunScenario(const ScenarioConfig& cfg);

enum class SweepParam
{
    Nodes,
    Pause,
    Speed,
};

SweepParam ParseSweepParam(const std::string& name);
void ApplySweepValue(ScenarioConfig& cfg, SweepParam param, double value);

struct SweepSpec
{
    SweepParam param = SweepParam::Nodes;
    std::vector<double> values;
    std::vector<ProtocolKind> protocols{ProtocolKind::Dsdv, ProtocolKind::Fsr, ProtocolKind::Olsr};
    std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    unsigned threads = 1;
};

/**
 * Runs protocols x values x seeds. Rows are appended to `outPath` as they
 * complete; points already present in the file are skipped, and the file is
 * rewritten sorted once every point is done. Returns the full sorted set.
 */
std::vector<ResultRow> Sweep(const ScenarioConfig& base, const SweepSpec& spec, const std::string& outPath);

/// Same, collecting rows in memory only.
std::vector<ResultRow> Sweep(const ScenarioConfig& base, const SweepSpec& spec);

/// Sort key: protocol, nodes, pause, speed, seed.
bool RowLess(const ResultRow& a, const ResultRow& b);

struct AnalyticSweep
{
    std::optional<analytic::Param> param;
    std::vector<double> values;
    double bracketLo = 1e-3;
    double bracketHi = 1e4;
};

/// CSV: quantity,mode,form,value,finite_diff,rel_err,sweep_param,sweep_value,note
void AnalyticReport(const analytic::Params& params, const AnalyticSweep& sweep, std::ostream& out);

analytic::Param ParseAnalyticParam(const std::string& name);

struct ProtocolFit
{
    std::string protocol;
    std::vector<double> nodes;        ///< distinct node counts, ascending
    std::vector<double> ctrlRate;     ///< median control packets per second per node count
    double k = 0.0;                   ///< least-squares slope through the origin against n^3/(B T_pr)
    double relResidual = 0.0;         ///< ||y - k x|| / ||y||
    bool poorFit = false;             ///< relResidual above the threshold
    double logLogSlope = 0.0;         ///< d log(rate) / d log(n)
    bool superlinear = false;         ///< logLogSlope > 1
    bool monotone = false;            ///< rate strictly increases with n
};

/// Throws std::invalid_argument when a protocol has fewer than 3 distinct node counts.
std::vector<ProtocolFit> Compare(const std::vector<ResultRow>& rows,
                                 const analytic::Params& params,
                                 double residualThreshold = 0.25);

void WriteComparison(const std::vector<ProtocolFit>& fits, std::ostream& out);

} // namespace prosim
