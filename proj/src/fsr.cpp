#include "prosim/fsr.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace prosim
{

void
FsrConfig::Validate() const
{
    if (scopeRadii.empty() || scopeRadii.size() != scopeIntervals.size())
    {
        throw std::invalid_argument("fsr scope radii and intervals must have equal, non-zero length");
    }
    if (!std::isinf(scopeRadii.back()))
    {
        throw std::invalid_argument("the outermost fsr scope must be unbounded");
    }
    for (std::size_t i = 0; i < scopeRadii.size(); ++i)
    {
        if (!(scopeIntervals[i] > 0.0) || !(scopeRadii[i] >= 0.0))
        {
            throw std::invalid_argument("fsr radii must be non-negative and intervals positive");
        }
        if (i > 0 && (!(scopeRadii[i] > scopeRadii[i - 1]) ||
                      !(scopeIntervals[i] > scopeIntervals[i - 1])))
        {
            throw std::invalid_argument("fsr radii and intervals must be strictly ascending");
        }
    }
    if (!(expiryFactor > 0.0))
    {
        throw std::invalid_argument("fsr expiry factor must be positive");
    }
}

std::size_t
ScopeIndex(std::uint32_t hopDistance, std::span<const double> radii)
{
    if (hopDistance == kInfiniteMetric)
    {
        return radii.size() - 1;
    }
    for (std::size_t i = 0; i < radii.size(); ++i)
    {
        if (static_cast<double>(hopDistance) <= radii[i])
        {
            return i;
        }
    }
    return radii.size() - 1;
}

bool
FsrMerge(LinkStateDb& lsdb, std::span<const LinkStateRecord> records, SimTime now, bool* graphChanged)
{
    bool changed = false;
    bool graph = false;
    for (const auto& rec : records)
    {
        auto it = lsdb.find(rec.origin);
        if (it != lsdb.end() && rec.seq <= it->second.seq)
        {
            continue;
        }
        graph = graph || it == lsdb.end() || it->second.neighbors != rec.neighbors;
        lsdb[rec.origin] = LinkStateEntry{rec.origin, rec.neighbors, rec.seq, now};
        changed = true;
    }
    if (graphChanged != nullptr)
    {
        *graphChanged = graph;
    }
    return changed;
}

std::map<NodeId, std::vector<NodeId>>
LinkStateGraph(const LinkStateDb& lsdb)
{
    std::map<NodeId, std::vector<NodeId>> g;
    for (const auto& [origin, e] : lsdb)
    {
        g[origin];
        for (NodeId v : e.neighbors)
        {
            if (v == origin)
            {
                continue;
            }
            g[origin].push_back(v);
            g[v].push_back(origin);
        }
    }
    for (auto& [_, nbrs] : g)
    {
        std::sort(nbrs.begin(), nbrs.end());
        nbrs.erase(std::unique(nbrs.begin(), nbrs.end()), nbrs.end());
    }
    return g;
}

RoutingTable
FsrRoutes(const LinkStateDb& lsdb, NodeId self, SimTime now)
{
    // Our own neighbour list is first-hand; stale remote claims of a link
    // to us do not override it.
    auto own = lsdb.find(self);
    const bool authoritative = own != lsdb.end();
    std::vector<std::pair<NodeId, NodeId>> edges;
    for (const auto& [origin, e] : lsdb)
    {
        for (NodeId v : e.neighbors)
        {
            if (v == origin || (authoritative && origin != self && v == self))
            {
                continue;
            }
            edges.emplace_back(origin, v);
        }
    }
    return ShortestHopRoutes(std::move(edges), self, now);
}

Fsr::Fsr(NodeContext& ctx, FsrConfig cfg, ControlSizing sizing)
    : RoutingProtocol(ctx, sizing),
      m_cfg(std::move(cfg))
{
    m_cfg.Validate();
    const NodeId self = m_ctx.Self();
    m_lsdb[self] = LinkStateEntry{self, {}, 0, m_ctx.Now()};
    RefreshOwnEntry();
    Recompute();
}

void
Fsr::OnStart()
{
    for (std::size_t i = 0; i < m_cfg.scopeIntervals.size(); ++i)
    {
        m_ctx.ScheduleTimer(0.0, static_cast<TimerLabel>(i));
    }
}

void
Fsr::RefreshOwnEntry()
{
    auto& own = m_lsdb.at(m_ctx.Self());
    own.neighbors = m_ctx.LinkNeighbors();
    own.heardAt = m_ctx.Now();
}

void
Fsr::ExpireStale()
{
    const SimTime now = m_ctx.Now();
    const NodeId self = m_ctx.Self();
    bool changed = false;
    for (auto it = m_lsdb.begin(); it != m_lsdb.end();)
    {
        if (it->first == self)
        {
            ++it;
            continue;
        }
        const RouteEntry* r = m_table.Find(it->first);
        const std::uint32_t d = (r == nullptr) ? kInfiniteMetric : r->metric;
        const double life = m_cfg.expiryFactor * m_cfg.scopeIntervals[ScopeIndex(d, m_cfg.scopeRadii)];
        if (now - it->second.heardAt > life)
        {
            it = m_lsdb.erase(it);
            changed = true;
        }
        else
        {
            ++it;
        }
    }
    if (changed)
    {
        Recompute();
    }
}

void
Fsr::Recompute()
{
    RoutingTable fresh = FsrRoutes(m_lsdb, m_ctx.Self(), m_ctx.Now());
    // Keep install times of routes that did not change.
    for (const auto& [dest, e] : fresh.Entries())
    {
        const RouteEntry* old = m_table.Find(dest);
        if (old != nullptr && old->nextHop == e.nextHop && old->metric == e.metric)
        {
            RouteEntry kept = e;
            kept.installTime = old->installTime;
            fresh.Upsert(kept);
        }
    }
    for (const auto& [dest, e] : fresh.Entries())
    {
        if (m_table.Find(dest) == nullptr)
        {
            m_ctx.RouteInstalled(dest);
        }
    }
    m_table = std::move(fresh);
}

std::optional<ControlPacket>
Fsr::BuildScopeUpdate(std::size_t scope)
{
    const NodeId self = m_ctx.Self();
    if (scope == 0)
    {
        auto& own = m_lsdb.at(self);
        ++own.seq;
        RefreshOwnEntry();
        Recompute();
    }
    std::vector<LinkStateRecord> records;
    for (const auto& [origin, e] : m_lsdb)
    {
        if (origin == self)
        {
            if (scope == 0)
            {
                records.push_back({origin, e.neighbors, e.seq});
            }
            continue;
        }
        const RouteEntry* r = m_table.Find(origin);
        if (r == nullptr)
        {
            // Unreachable origins are not propagated.
            continue;
        }
        if (ScopeIndex(r->metric, m_cfg.scopeRadii) == scope)
        {
            records.push_back({origin, e.neighbors, e.seq});
        }
    }
    if (records.empty())
    {
        return std::nullopt;
    }
    return ControlPacket::Make(self, ++m_packetSeq, std::move(records), m_sizing);
}

void
Fsr::OnTimer(TimerLabel label)
{
    const std::size_t scope = label;
    if (scope >= m_cfg.scopeIntervals.size())
    {
        return;
    }
    ExpireStale();
    if (auto pkt = BuildScopeUpdate(scope))
    {
        Send(std::move(*pkt));
    }
    m_ctx.ScheduleTimer(m_cfg.scopeIntervals[scope], label);
}

void
Fsr::OnControl(const ControlPacket& packet, NodeId)
{
    const auto* records = std::get_if<std::vector<LinkStateRecord>>(&packet.payload);
    if (records == nullptr)
    {
        return;
    }
    std::vector<LinkStateRecord> foreign;
    foreign.reserve(records->size());
    for (const auto& rec : *records)
    {
        if (rec.origin != m_ctx.Self())
        {
            foreign.push_back(rec);
        }
    }
    bool graphChanged = false;
    FsrMerge(m_lsdb, foreign, m_ctx.Now(), &graphChanged);
    if (graphChanged)
    {
        Recompute();
    }
}

void
Fsr::OnLinkDown(NodeId)
{
    RefreshOwnEntry();
    Recompute();
}

void
Fsr::OnLinkUp(NodeId)
{
    RefreshOwnEntry();
    Recompute();
}

} // namespace prosim
