#include "prosim/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <tuple>

namespace prosim
{

namespace
{

std::string
Trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
    {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string
Num(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

std::string
Opt(const std::optional<double>& v)
{
    return v ? Num(*v) : "NA";
}

std::vector<std::string>
SplitCsv(const std::string& line)
{
    std::vector<std::string> out;
    std::string cell;
    std::istringstream is(line);
    while (std::getline(is, cell, ','))
    {
        out.push_back(Trim(cell));
    }
    if (!line.empty() && line.back() == ',')
    {
        out.emplace_back();
    }
    return out;
}

double
ToDouble(const std::string& text)
{
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size())
    {
        throw std::invalid_argument("trailing characters");
    }
    return v;
}

std::uint64_t
ToUnsigned(const std::string& text)
{
    if (text.empty() || text[0] == '-' || text[0] == '+')
    {
        throw std::invalid_argument("not an unsigned integer");
    }
    std::size_t used = 0;
    const auto v = std::stoull(text, &used);
    if (used != text.size())
    {
        throw std::invalid_argument("trailing characters");
    }
    return v;
}

bool
IsConnected(const Adjacency& adj)
{
    if (adj.empty())
    {
        return true;
    }
    std::vector<bool> seen(adj.size(), false);
    std::vector<NodeId> stack{0};
    seen[0] = true;
    std::size_t count = 1;
    while (!stack.empty())
    {
        const NodeId u = stack.back();
        stack.pop_back();
        for (NodeId v : adj[u])
        {
            if (!seen[v])
            {
                seen[v] = true;
                ++count;
                stack.push_back(v);
            }
        }
    }
    return count == adj.size();
}

} // namespace

void
ScenarioConfig::Validate() const
{
    auto bad = [](const char* key, const std::string& why) {
        return std::invalid_argument(std::string(key) + ": " + why);
    };
    if (nodes == 0)
    {
        throw bad("nodes", "must be at least 1");
    }
    if (!(areaX > 0.0) || !(areaY > 0.0))
    {
        throw bad(areaX > 0.0 ? "area_y" : "area_x", "must be positive");
    }
    if (!(range > 0.0))
    {
        throw bad("range", "must be positive");
    }
    if (!(bandwidth > 0.0))
    {
        throw bad("bandwidth", "must be positive");
    }
    if (packetSize == 0)
    {
        throw bad("packet_size", "must be positive");
    }
    if (!(speedMin >= 0.0))
    {
        throw bad("speed_min", "must be non-negative");
    }
    if (!(speedMax >= speedMin))
    {
        throw bad("speed_max", "must be >= speed_min");
    }
    if (!(pause >= 0.0))
    {
        throw bad("pause", "must be non-negative");
    }
    if (flows > 0 && nodes < 2)
    {
        throw bad("flows", "need at least two nodes");
    }
    if (!(rate > 0.0))
    {
        throw bad("rate", "must be positive");
    }
    if (!(duration > 0.0))
    {
        throw bad("duration", "must be positive");
    }
    if (!(trafficStart >= 0.0))
    {
        throw bad("traffic_start", "must be non-negative");
    }
    if (trafficStop && !(*trafficStop >= trafficStart))
    {
        throw bad("traffic_stop", "must be >= traffic_start");
    }
    if (!(chainSpacing > 0.0))
    {
        throw bad("chain_spacing", "must be positive");
    }
    if (!(loss >= 0.0 && loss < 1.0))
    {
        throw bad("loss", "must lie in [0, 1)");
    }
    if (ttl && *ttl == 0)
    {
        throw bad("ttl", "must be positive");
    }
    if (!(bufferTimeout > 0.0))
    {
        throw bad("buffer_timeout", "must be positive");
    }
    if (!(linkSample > 0.0))
    {
        throw bad("link_sample", "must be positive");
    }
    dsdv.Validate();
    fsr.Validate();
    olsr.Validate();
}

ScenarioConfig
ParseConfig(std::istream& in)
{
    ScenarioConfig c;
    using Setter = std::function<void(const std::string&)>;
    auto real = [](double& field) -> Setter { return [&field](const std::string& v) { field = ToDouble(v); }; };
    auto count = [](std::size_t& field) -> Setter {
        return [&field](const std::string& v) { field = static_cast<std::size_t>(ToUnsigned(v)); };
    };
    auto u32 = [](std::uint32_t& field) -> Setter {
        return [&field](const std::string& v) {
            const auto x = ToUnsigned(v);
            if (x > UINT32_MAX)
            {
                throw std::out_of_range("too large");
            }
            field = static_cast<std::uint32_t>(x);
        };
    };
    const std::map<std::string, Setter> setters = {
        {"protocol",
         [&c](const std::string& v) {
             const auto p = ParseProtocol(v);
             if (!p)
             {
                 throw std::invalid_argument("expected dsdv, fsr or olsr");
             }
             c.protocol = *p;
         }},
        {"nodes", count(c.nodes)},
        {"area_x", real(c.areaX)},
        {"area_y", real(c.areaY)},
        {"range", real(c.range)},
        {"bandwidth", real(c.bandwidth)},
        {"packet_size", u32(c.packetSize)},
        {"speed_min", real(c.speedMin)},
        {"speed_max", real(c.speedMax)},
        {"pause", real(c.pause)},
        {"flows", count(c.flows)},
        {"rate", real(c.rate)},
        {"traffic_start", real(c.trafficStart)},
        {"traffic_stop", [&c](const std::string& v) { c.trafficStop = ToDouble(v); }},
        {"duration", real(c.duration)},
        {"seed", [&c](const std::string& v) { c.seed = ToUnsigned(v); }},
        {"placement",
         [&c](const std::string& v) {
             if (v == "random")
             {
                 c.placement = Placement::Random;
             }
             else if (v == "chain")
             {
                 c.placement = Placement::Chain;
             }
             else if (v == "connected")
             {
                 c.placement = Placement::Connected;
             }
             else
             {
                 throw std::invalid_argument("expected random, chain or connected");
             }
         }},
        {"chain_spacing", real(c.chainSpacing)},
        {"loss", real(c.loss)},
        {"ttl",
         [&c](const std::string& v) {
             const auto x = ToUnsigned(v);
             if (x > UINT32_MAX)
             {
                 throw std::out_of_range("too large");
             }
             c.ttl = static_cast<std::uint32_t>(x);
         }},
        {"buffer_timeout", real(c.bufferTimeout)},
        {"link_sample", real(c.linkSample)},
        {"header_bytes", u32(c.sizing.header)},
        {"entry_bytes", u32(c.sizing.perEntry)},
        {"dsdv_periodic", real(c.dsdv.periodicInterval)},
        {"dsdv_settling", real(c.dsdv.settlingTime)},
        {"dsdv_full_dump_every", u32(c.dsdv.fullDumpEvery)},
        {"fsr_scope_radius", real(c.fsr.scopeRadii[0])},
        {"fsr_inner_interval", real(c.fsr.scopeIntervals[0])},
        {"fsr_outer_interval", real(c.fsr.scopeIntervals[1])},
        {"fsr_expiry_factor", real(c.fsr.expiryFactor)},
        {"olsr_hello", real(c.olsr.helloInterval)},
        {"olsr_tc", real(c.olsr.tcInterval)},
        {"olsr_hold_factor", real(c.olsr.holdFactor)},
        {"olsr_willingness",
         [&c](const std::string& v) {
             const auto x = ToUnsigned(v);
             if (x > 7)
             {
                 throw std::out_of_range("willingness is 0..7");
             }
             c.olsr.willingness = static_cast<std::uint8_t>(x);
         }},
    };

    std::string line;
    int lineNo = 0;
    while (std::getline(in, line))
    {
        ++lineNo;
        if (const auto hash = line.find('#'); hash != std::string::npos)
        {
            line.erase(hash);
        }
        if (Trim(line).empty())
        {
            continue;
        }
        const auto eq = line.find('=');
        const std::string where = "line " + std::to_string(lineNo);
        if (eq == std::string::npos)
        {
            throw std::invalid_argument(where + ": expected key = value");
        }
        const std::string key = Trim(line.substr(0, eq));
        const std::string value = Trim(line.substr(eq + 1));
        const auto it = setters.find(key);
        if (it == setters.end())
        {
            throw std::invalid_argument(where + ": unknown key '" + key + "'");
        }
        try
        {
            it->second(value);
        }
        catch (const std::exception& e)
        {
            throw std::invalid_argument(where + ": bad value for '" + key + "': '" + value + "' (" +
                                        e.what() + ")");
        }
    }
    try
    {
        c.Validate();
    }
    catch (const std::invalid_argument& e)
    {
        throw std::invalid_argument(std::string("config: ") + e.what());
    }
    return c;
}

ScenarioConfig
LoadConfig(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
    {
        throw std::runtime_error("cannot open config '" + path + "'");
    }
    try
    {
        return ParseConfig(in);
    }
    catch (const std::invalid_argument& e)
    {
        throw std::invalid_argument(path + ": " + e.what());
    }
}

SimulationSetup
BuildSetup(const ScenarioConfig& cfg)
{
    cfg.Validate();
    const Area area{cfg.areaX, cfg.areaY};
    RngStream placement(cfg.seed, StreamLabel::Placement);
    std::vector<Position> start;
    switch (cfg.placement)
    {
    case Placement::Random:
        start = InitPositions(cfg.nodes, area, placement);
        break;
    case Placement::Chain:
        for (std::size_t i = 0; i < cfg.nodes; ++i)
        {
            start.push_back({static_cast<double>(i) * cfg.chainSpacing, cfg.areaY / 2.0});
        }
        break;
    case Placement::Connected: {
        constexpr int kAttempts = 10000;
        int attempt = 0;
        for (; attempt < kAttempts; ++attempt)
        {
            start = InitPositions(cfg.nodes, area, placement);
            if (IsConnected(ComputeAdjacency(start, cfg.range)))
            {
                break;
            }
        }
        if (attempt == kAttempts)
        {
            throw std::runtime_error("placement: no connected layout found; enlarge range or shrink the area");
        }
        break;
    }
    }

    SimulationSetup s;
    RngStream mobility(cfg.seed, StreamLabel::Mobility);
    const MobilityConfig mob{cfg.speedMin, cfg.speedMax, cfg.pause};
    for (const auto& p : start)
    {
        s.trajectories.push_back(cfg.IsStatic() ? Trajectory::Static(p)
                                                : Trajectory::RandomWaypoint(p, area, mob, cfg.duration, mobility));
    }
    s.radio = RadioParams{cfg.range, cfg.bandwidth, cfg.loss};
    s.protocol = cfg.protocol;
    s.dsdv = cfg.dsdv;
    s.fsr = cfg.fsr;
    s.olsr = cfg.olsr;
    s.sizing = cfg.sizing;
    RngStream traffic(cfg.seed, StreamLabel::Traffic);
    s.flows = GenerateFlows(cfg.flows,
                            cfg.nodes,
                            cfg.rate,
                            cfg.packetSize,
                            cfg.trafficStart,
                            cfg.trafficStop.value_or(cfg.duration),
                            traffic);
    s.duration = cfg.duration;
    s.seed = cfg.seed;
    s.linkSamplePeriod = cfg.linkSample;
    s.dataTtl = cfg.ttl;
    s.bufferTimeout = cfg.bufferTimeout;
    return s;
}

const std::string&
ResultHeader()
{
    static const std::string header =
        "protocol,seed,nodes,pause,speed_max,duration,throughput_bps,avg_delay_s,nrl,delivery_ratio,"
        "ctrl_pkts,ctrl_bytes,data_sent,data_delivered,data_dropped";
    return header;
}

std::string
FormatRow(const ResultRow& r)
{
    std::ostringstream os;
    os << r.protocol << ',' << r.seed << ',' << r.nodes << ',' << Num(r.pause) << ',' << Num(r.speedMax) << ','
       << Num(r.duration) << ',' << Num(r.throughputBps) << ',' << Opt(r.avgDelay) << ',' << Opt(r.nrl) << ','
       << Opt(r.deliveryRatio) << ',' << r.ctrlPkts << ',' << r.ctrlBytes << ',' << r.dataSent << ','
       << r.dataDelivered << ',' << r.dataDropped;
    return os.str();
}

ResultRow
ParseRow(const std::string& line)
{
    const auto cells = SplitCsv(line);
    if (cells.size() != 15)
    {
        throw std::invalid_argument("result row needs 15 columns, got " + std::to_string(cells.size()));
    }
    auto opt = [](const std::string& s) -> std::optional<double> {
        if (s == "NA")
        {
            return std::nullopt;
        }
        return ToDouble(s);
    };
    ResultRow r;
    try
    {
        r.protocol = cells[0];
        r.seed = ToUnsigned(cells[1]);
        r.nodes = static_cast<std::size_t>(ToUnsigned(cells[2]));
        r.pause = ToDouble(cells[3]);
        r.speedMax = ToDouble(cells[4]);
        r.duration = ToDouble(cells[5]);
        r.throughputBps = ToDouble(cells[6]);
        r.avgDelay = opt(cells[7]);
        r.nrl = opt(cells[8]);
        r.deliveryRatio = opt(cells[9]);
        r.ctrlPkts = ToUnsigned(cells[10]);
        r.ctrlBytes = ToUnsigned(cells[11]);
        r.dataSent = ToUnsigned(cells[12]);
        r.dataDelivered = ToUnsigned(cells[13]);
        r.dataDropped = ToUnsigned(cells[14]);
    }
    catch (const std::exception& e)
    {
        throw std::invalid_argument("malformed result row '" + line + "': " + e.what());
    }
    if (r.dataDelivered + r.dataDropped > r.dataSent)
    {
        throw std::invalid_argument("result row delivers or drops more than it sent: '" + line + "'");
    }
    return r;
}

std::vector<ResultRow>
ReadRows(std::istream& in)
{
    std::vector<ResultRow> rows;
    std::string line;
    bool first = true;
    while (std::getline(in, line))
    {
        if (!line.empty() && line.back() == '\r')
        {
            line.pop_back();
        }
        if (line.empty())
        {
            continue;
        }
        if (first)
        {
            first = false;
            if (line != ResultHeader())
            {
                throw std::invalid_argument("unexpected CSV header: '" + line + "'");
            }
            continue;
        }
        rows.push_back(ParseRow(line));
    }
    return rows;
}

RunOutcome
RunScenario(const ScenarioConfig& cfg)
{
    Simulation sim(BuildSetup(cfg));
    sim.Run();
    const MetricsLedger& ledger = sim.Ledger();
    const MetricsReport rep = Report(ledger, cfg.duration);
    RunOutcome out;
    ResultRow& r = out.row;
    r.protocol = ToString(cfg.protocol);
    r.seed = cfg.seed;
    r.nodes = cfg.nodes;
    r.pause = cfg.pause;
    r.speedMax = cfg.speedMax;
    r.duration = cfg.duration;
    r.throughputBps = rep.throughputBps;
    r.avgDelay = rep.avgDelay;
    r.nrl = rep.nrl;
    r.deliveryRatio = rep.deliveryRatio;
    r.ctrlPkts = ledger.ControlPackets();
    r.ctrlBytes = ledger.ControlBytes();
    r.dataSent = ledger.Sent();
    r.dataDelivered = ledger.Delivered();
    r.dataDropped = ledger.Dropped();
    out.inFlight = sim.DataInFlight();
    out.protocolBroadcasts = sim.ProtocolBroadcasts();
    return out;
}

SweepParam
ParseSweepParam(const std::string& name)
{
    if (name == "nodes")
    {
        return SweepParam::Nodes;
    }
    if (name == "pause")
    {
        return SweepParam::Pause;
    }
    if (name == "speed")
    {
        return SweepParam::Speed;
    }
    throw std::invalid_argument("sweep parameter must be nodes, pause or speed, not '" + name + "'");
}

void
ApplySweepValue(ScenarioConfig& cfg, SweepParam param, double value)
{
    switch (param)
    {
    case SweepParam::Nodes:
        if (!(value >= 1.0) || value != std::floor(value))
        {
            throw std::invalid_argument("node counts must be positive integers");
        }
        cfg.nodes = static_cast<std::size_t>(value);
        break;
    case SweepParam::Pause:
        cfg.pause = value;
        break;
    case SweepParam::Speed:
        cfg.speedMax = value;
        cfg.speedMin = std::min(cfg.speedMin, value);
        break;
    }
}

namespace
{

using RowKey = std::tuple<std::string, std::string, std::string, std::string, std::string>;

RowKey
KeyOf(const ResultRow& r)
{
    return {r.protocol, std::to_string(r.seed), std::to_string(r.nodes), Num(r.pause), Num(r.speedMax)};
}

std::vector<ScenarioConfig>
Expand(const ScenarioConfig& base, const SweepSpec& spec)
{
    if (spec.values.empty())
    {
        throw std::invalid_argument("sweep needs at least one value");
    }
    if (spec.seeds.empty() || spec.protocols.empty())
    {
        throw std::invalid_argument("sweep needs at least one seed and one protocol");
    }
    std::vector<ScenarioConfig> jobs;
    for (ProtocolKind p : spec.protocols)
    {
        for (double v : spec.values)
        {
            for (std::uint64_t s : spec.seeds)
            {
                ScenarioConfig c = base;
                c.protocol = p;
                c.seed = s;
                ApplySweepValue(c, spec.param, v);
                c.Validate();
                jobs.push_back(c);
            }
        }
    }
    return jobs;
}

ResultRow
PlannedKey(const ScenarioConfig& c)
{
    ResultRow r;
    r.protocol = ToString(c.protocol);
    r.seed = c.seed;
    r.nodes = c.nodes;
    r.pause = c.pause;
    r.speedMax = c.speedMax;
    return r;
}

std::vector<ResultRow>
RunJobs(const std::vector<ScenarioConfig>& jobs,
        unsigned threads,
        const std::function<void(const ResultRow&)>& onRow)
{
    std::vector<ResultRow> rows(jobs.size());
    std::atomic<std::size_t> next{0};
    std::mutex mu;
    std::exception_ptr failure;
    auto worker = [&] {
        for (;;)
        {
            const std::size_t i = next.fetch_add(1);
            if (i >= jobs.size())
            {
                return;
            }
            try
            {
                rows[i] = RunScenario(jobs[i]).row;
                std::lock_guard lock(mu);
                if (onRow)
                {
                    onRow(rows[i]);
                }
            }
            catch (...)
            {
                std::lock_guard lock(mu);
                if (!failure)
                {
                    failure = std::current_exception();
                }
                next = jobs.size();
                return;
            }
        }
    };
    const unsigned n = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(jobs.size())));
    if (n == 1)
    {
        worker();
    }
    else
    {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < n; ++t)
        {
            pool.emplace_back(worker);
        }
        for (auto& t : pool)
        {
            t.join();
        }
    }
    if (failure)
    {
        std::rethrow_exception(failure);
    }
    return rows;
}

} // namespace

bool
RowLess(const ResultRow& a, const ResultRow& b)
{
    return std::tie(a.protocol, a.nodes, a.pause, a.speedMax, a.seed) <
           std::tie(b.protocol, b.nodes, b.pause, b.speedMax, b.seed);
}

std::vector<ResultRow>
Sweep(const ScenarioConfig& base, const SweepSpec& spec)
{
    auto rows = RunJobs(Expand(base, spec), spec.threads, {});
    std::sort(rows.begin(), rows.end(), RowLess);
    return rows;
}

std::vector<ResultRow>
Sweep(const ScenarioConfig& base, const SweepSpec& spec, const std::string& outPath)
{
    const auto jobs = Expand(base, spec);
    std::vector<ResultRow> done;
    {
        std::ifstream in(outPath);
        if (in)
        {
            done = ReadRows(in);
        }
    }
    std::set<RowKey> have;
    for (const auto& r : done)
    {
        have.insert(KeyOf(r));
    }
    std::vector<ScenarioConfig> todo;
    for (const auto& j : jobs)
    {
        if (!have.contains(KeyOf(PlannedKey(j))))
        {
            todo.push_back(j);
        }
    }
    {
        std::ofstream out(outPath, std::ios::app);
        if (!out)
        {
            throw std::runtime_error("cannot write '" + outPath + "'");
        }
        if (done.empty())
        {
            std::ifstream probe(outPath);
            if (probe.peek() == std::ifstream::traits_type::eof())
            {
                out << ResultHeader() << '\n';
            }
        }
        out.flush();
        const auto fresh = RunJobs(todo, spec.threads, [&out](const ResultRow& r) {
            out << FormatRow(r) << '\n';
            out.flush();
        });
        done.insert(done.end(), fresh.begin(), fresh.end());
    }
    std::sort(done.begin(), done.end(), RowLess);
    std::ofstream out(outPath, std::ios::trunc);
    out << ResultHeader() << '\n';
    for (const auto& r : done)
    {
        out << FormatRow(r) << '\n';
    }
    if (!out)
    {
        throw std::runtime_error("cannot write '" + outPath + "'");
    }
    return done;
}

analytic::Param
ParseAnalyticParam(const std::string& name)
{
    using analytic::Param;
    for (Param p : {Param::N,
                    Param::B,
                    Param::K,
                    Param::Tpr,
                    Param::T,
                    Param::MuK,
                    Param::Lambda,
                    Param::PnAvg,
                    Param::H})
    {
        if (name == analytic::ToString(p))
        {
            return p;
        }
    }
    throw std::invalid_argument("unknown analytic parameter '" + name + "'");
}

namespace
{

struct ReportWriter
{
    std::ostream& out;
    std::string sweepParam;
    std::string sweepValue;

    void Row(const std::string& quantity,
             const char* mode,
             const char* form,
             const std::optional<double>& value,
             const std::optional<double>& fd = std::nullopt,
             const std::string& note = "")
    {
        std::optional<double> rel;
        if (value && fd)
        {
            const double scale = std::max(std::abs(*value), std::abs(*fd));
            rel = scale == 0.0 ? 0.0 : std::abs(*value - *fd) / scale;
        }
        char buf[64];
        auto num = [&buf](const std::optional<double>& v) -> std::string {
            if (!v)
            {
                return "NA";
            }
            std::snprintf(buf, sizeof buf, "%.15g", *v);
            return buf;
        };
        out << quantity << ',' << mode << ',' << form << ',' << num(value) << ',' << num(fd) << ','
            << num(rel) << ',' << sweepParam << ',' << sweepValue << ',' << note << '\n';
    }
};

double
Step(double x)
{
    return 1e-4 * std::max(std::abs(x), 1e-3);
}

void
ReportPoint(const analytic::Params& p, const AnalyticSweep& sweep, ReportWriter& w)
{
    using namespace analytic;
    constexpr auto kPaper = EvalMode::Paper;
    constexpr auto kSmooth = EvalMode::Smooth;
    constexpr auto kRatio = TriggerForm::Ratio;
    constexpr auto kCount = TriggerForm::Count;

    w.Row("ro_pf", "-", "-", PacketFailureOverhead(p));
    w.Row("ro_pr", "-", "-", PeriodicOverhead(p.k, p.n, p.B, p.Tpr));
    for (auto mode : {kPaper, kSmooth})
    {
        w.Row("ro_tr_single", ToString(mode), "-", TriggeredOverheadSingle(p.T, p.Tpr, mode));
        for (auto form : {kCount, kRatio})
        {
            w.Row("ro_tr", ToString(mode), ToString(form), TriggeredOverheadTotal(p.n, p.T, p.Tpr, form, mode));
            w.Row("ro_total", ToString(mode), ToString(form), TotalOverhead(p, form, mode));
        }
    }

    auto fd = [&p](const std::function<double(const Params&)>& f, Param which) {
        return FiniteDifference(f, which, p, Step(Get(p, which))).value;
    };
    // Differences are taken over the terms that depend on the stepped
    // parameter; constant terms only add rounding noise.
    const auto failure = [](const Params& q) { return PacketFailureOverhead(q); };
    const auto failurePeriodic = [](const Params& q) {
        return PacketFailureOverhead(q) + PeriodicOverhead(q.k, q.n, q.B, q.Tpr);
    };
    for (auto form : {kCount, kRatio})
    {
        const auto total = [form](const Params& q) { return TotalOverhead(q, form, EvalMode::Smooth); };
        const auto tpr = form == kRatio ? std::function<double(const Params&)>(failurePeriodic) : total;
        w.Row("d_dTpr", "smooth", ToString(form), DyDTpr(p, form, kSmooth).value, fd(tpr, Param::Tpr));
        w.Row("d_dT", "smooth", ToString(form), DyDT(p, form, kSmooth).value, fd(total, Param::T));
    }
    const auto paperNote = [](const Derivative& d) { return d.nonDifferentiable ? "non_differentiable" : ""; };
    const Derivative pTpr = DyDTpr(p, kRatio, kPaper);
    w.Row("d_dTpr", "paper", "ratio", pTpr.value, std::nullopt, paperNote(pTpr));
    const Derivative pT = DyDT(p, kRatio, kPaper);
    w.Row("d_dT", "paper", "ratio", pT.value, std::nullopt, paperNote(pT));
    w.Row("d_dLambda", "smooth", "-", DyDLambda(p), fd(failure, Param::Lambda));
    w.Row("d_dMu", "smooth", "-", DyDMu(p), fd(failure, Param::MuK));
    w.Row("d_dN",
          "smooth",
          "-",
          DyDN(p),
          fd([](const Params& q) { return PeriodicOverhead(q.k, q.n, q.B, q.Tpr); }, Param::N));

    for (auto form : {kCount, kRatio})
    {
        try
        {
            const StationaryPoint sp = SolveStationaryTpr(p, sweep.bracketLo, sweep.bracketHi, form, kSmooth);
            w.Row("T_pr_star", "smooth", ToString(form), sp.Tpr);
            Params at = p;
            at.Tpr = sp.Tpr;
            const Balance b = UpdateCoefficientSides(at, sp.Tpr / p.muK, form, kSmooth);
            w.Row("h_star", "smooth", ToString(form), sp.Tpr / p.muK);
            w.Row("balance_lhs", "smooth", ToString(form), b.lhs);
            w.Row("balance_rhs", "smooth", ToString(form), b.rhs);
        }
        catch (const BracketError& e)
        {
            w.Row("T_pr_star", "smooth", ToString(form), std::nullopt, std::nullopt, "bracket_error");
        }
    }

    for (auto mode : {kPaper, kSmooth})
    {
        w.Row("ro_olsr", ToString(mode), "ratio", OlsrOverhead(p, p.H, mode));
    }
    w.Row("d_ro_olsr_dH",
          "smooth",
          "ratio",
          DOlsrDH(p, p.H, kSmooth).value,
          fd(
              [](const Params& q) {
                  Params at = q;
                  at.Tpr = q.H;
                  return PacketFailureOverhead(at) + PeriodicOverhead(q.k, q.n, q.B, q.H) +
                         PeriodicOverhead(q.k, q.n, q.B, 2.0 * q.H);
              },
              Param::H));
    const Derivative pH = DOlsrDH(p, p.H, kPaper);
    w.Row("d_ro_olsr_dH", "paper", "ratio", pH.value, std::nullopt, paperNote(pH));
}

} // namespace

void
AnalyticReport(const analytic::Params& params, const AnalyticSweep& sweep, std::ostream& out)
{
    out << "quantity,mode,form,value,finite_diff,rel_err,sweep_param,sweep_value,note\n";
    if (!sweep.param)
    {
        ReportWriter w{out, "none", "NA"};
        ReportPoint(params, sweep, w);
        return;
    }
    if (sweep.values.empty())
    {
        throw std::invalid_argument("analytic sweep needs at least one value");
    }
    for (double v : sweep.values)
    {
        analytic::Params p = params;
        analytic::Set(p, *sweep.param, v);
        p.Validate();
        ReportWriter w{out, analytic::ToString(*sweep.param), Num(v)};
        ReportPoint(p, sweep, w);
    }
}

namespace
{

double
Median(std::vector<double> v)
{
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 == 1 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

} // namespace

std::vector<ProtocolFit>
Compare(const std::vector<ResultRow>& rows, const analytic::Params& params, double residualThreshold)
{
    if (!(params.B > 0.0) || !(params.Tpr > 0.0))
    {
        throw std::invalid_argument("compare needs positive B and T_pr");
    }
    std::map<std::string, std::map<std::size_t, std::vector<double>>> grouped;
    for (const auto& r : rows)
    {
        if (!(r.duration > 0.0))
        {
            throw std::invalid_argument("row with non-positive duration");
        }
        grouped[r.protocol][r.nodes].push_back(static_cast<double>(r.ctrlPkts) / r.duration);
    }
    if (grouped.empty())
    {
        throw std::invalid_argument("compare needs at least one result row");
    }
    std::vector<ProtocolFit> fits;
    for (const auto& [protocol, byNodes] : grouped)
    {
        if (byNodes.size() < 3)
        {
            throw std::invalid_argument("compare needs at least 3 node counts for " + protocol + ", got " +
                                        std::to_string(byNodes.size()));
        }
        ProtocolFit f;
        f.protocol = protocol;
        for (const auto& [n, rates] : byNodes)
        {
            f.nodes.push_back(static_cast<double>(n));
            f.ctrlRate.push_back(Median(rates));
        }
        double sxy = 0.0;
        double sxx = 0.0;
        double syy = 0.0;
        for (std::size_t i = 0; i < f.nodes.size(); ++i)
        {
            const double n = f.nodes[i];
            const double x = n * n * n / (params.B * params.Tpr);
            sxy += x * f.ctrlRate[i];
            sxx += x * x;
            syy += f.ctrlRate[i] * f.ctrlRate[i];
        }
        f.k = sxy / sxx;
        double ss = 0.0;
        for (std::size_t i = 0; i < f.nodes.size(); ++i)
        {
            const double n = f.nodes[i];
            const double e = f.ctrlRate[i] - f.k * n * n * n / (params.B * params.Tpr);
            ss += e * e;
        }
        f.relResidual = syy > 0.0 ? std::sqrt(ss / syy) : 0.0;
        f.poorFit = !(f.relResidual <= residualThreshold);

        std::vector<double> lx;
        std::vector<double> ly;
        for (std::size_t i = 0; i < f.nodes.size(); ++i)
        {
            if (f.ctrlRate[i] > 0.0)
            {
                lx.push_back(std::log(f.nodes[i]));
                ly.push_back(std::log(f.ctrlRate[i]));
            }
        }
        if (lx.size() >= 2)
        {
            const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / lx.size();
            const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / ly.size();
            double num = 0.0;
            double den = 0.0;
            for (std::size_t i = 0; i < lx.size(); ++i)
            {
                num += (lx[i] - mx) * (ly[i] - my);
                den += (lx[i] - mx) * (lx[i] - mx);
            }
            f.logLogSlope = num / den;
        }
        f.superlinear = f.logLogSlope > 1.0;
        f.monotone = std::adjacent_find(f.ctrlRate.begin(), f.ctrlRate.end(), std::greater_equal<>()) ==
                     f.ctrlRate.end();
        fits.push_back(std::move(f));
    }
    return fits;
}

void
WriteComparison(const std::vector<ProtocolFit>& fits, std::ostream& out)
{
    out << "protocol,fitted_k,rel_residual,poor_fit,loglog_slope,superlinear,monotone,points\n";
    for (const auto& f : fits)
    {
        std::ostringstream pts;
        for (std::size_t i = 0; i < f.nodes.size(); ++i)
        {
            pts << (i ? ";" : "") << Num(f.nodes[i]) << ':' << Num(f.ctrlRate[i]);
        }
        char buf[256];
        std::snprintf(buf,
                      sizeof buf,
                      "%s,%.12g,%.6g,%s,%.6g,%s,%s,",
                      f.protocol.c_str(),
                      f.k,
                      f.relResidual,
                      f.poorFit ? "true" : "false",
                      f.logLogSlope,
                      f.superlinear ? "true" : "false",
                      f.monotone ? "true" : "false");
        out << buf << pts.str() << '\n';
    }
}

} // namespace prosim
