#include "prosim/routing.hpp"

#include <algorithm>
#include <deque>
#include <ostream>

namespace prosim
{

const RouteEntry*
RoutingTable::Find(NodeId dest) const
{
    auto it = m_entries.find(dest);
    return it == m_entries.end() ? nullptr : &it->second;
}

RouteEntry*
RoutingTable::Find(NodeId dest)
{
    auto it = m_entries.find(dest);
    return it == m_entries.end() ? nullptr : &it->second;
}

void
RoutingTable::Upsert(const RouteEntry& entry)
{
    m_entries[entry.dest] = entry;
}

bool
RoutingTable::Erase(NodeId dest)
{
    return m_entries.erase(dest) > 0;
}

std::optional<NodeId>
RoutingTable::NextHop(NodeId dest) const
{
    const RouteEntry* e = Find(dest);
    if (e == nullptr || !e->IsValid())
    {
        return std::nullopt;
    }
    return e->nextHop;
}

void
DumpTable(std::ostream& os, SimTime t, NodeId node, const RoutingTable& table)
{
    for (const auto& [dest, e] : table.Entries())
    {
        os << t << ' ' << node << ' ' << dest << ' ' << e.nextHop << ' ';
        if (e.IsValid())
        {
            os << e.metric;
        }
        else
        {
            os << "inf";
        }
        os << ' ' << e.seq << '\n';
    }
}

const char*
ToString(ControlKind kind)
{
    switch (kind)
    {
    case ControlKind::DsdvUpdate:
        return "dsdv-update";
    case ControlKind::FsrLinkState:
        return "fsr-linkstate";
    case ControlKind::OlsrHello:
        return "olsr-hello";
    case ControlKind::OlsrTc:
        return "olsr-tc";
    }
    return "?";
}

std::size_t
EntryCount(const ControlPayload& payload)
{
    struct Counter
    {
        std::size_t operator()(const std::vector<DsdvAdvert>& v) const { return v.size(); }
        std::size_t operator()(const std::vector<LinkStateRecord>& v) const { return v.size(); }
        std::size_t operator()(const HelloBody& h) const { return h.links.size(); }
        std::size_t operator()(const TcBody& tc) const { return tc.selectors.size(); }
    };
    return std::visit(Counter{}, payload);
}

ControlPacket
ControlPacket::Make(NodeId origin,
                    std::uint64_t seq,
                    ControlPayload payload,
                    const ControlSizing& sizing,
                    bool triggered)
{
    ControlPacket p;
    p.origin = origin;
    p.seq = seq;
    switch (payload.index())
    {
    case 0:
        p.kind = ControlKind::DsdvUpdate;
        break;
    case 1:
        p.kind = ControlKind::FsrLinkState;
        break;
    case 2:
        p.kind = ControlKind::OlsrHello;
        break;
    default:
        p.kind = ControlKind::OlsrTc;
        break;
    }
    p.size = sizing.header + sizing.perEntry * static_cast<std::uint32_t>(EntryCount(payload));
    p.payload = std::move(payload);
    p.triggered = triggered;
    return p;
}

const char*
ToString(DropReason reason)
{
    switch (reason)
    {
    case DropReason::NoRoute:
        return "no-route";
    case DropReason::NextHopUnreachable:
        return "next-hop-unreachable";
    case DropReason::TtlExpired:
        return "ttl-expired";
    case DropReason::BufferedTimeout:
        return "buffered-timeout";
    }
    return "?";
}

ForwardDecision
ForwardData(NodeId self,
            DataPacket& packet,
            const RoutingTable& table,
            const std::function<bool(NodeId)>& isNeighbor,
            const ForwardOptions& options)
{
    if (packet.dst == self)
    {
        return ForwardDecision::Deliver();
    }
    if (packet.ttl == 0)
    {
        return ForwardDecision::Dropped(DropReason::TtlExpired);
    }
    const RouteEntry* e = table.Find(packet.dst);
    if (e == nullptr)
    {
        return ForwardDecision::Dropped(DropReason::NoRoute);
    }
    if (!e->IsValid())
    {
        return options.bufferBrokenRoutes ? ForwardDecision::Hold()
                                          : ForwardDecision::Dropped(DropReason::NoRoute);
    }
    if (!isNeighbor(e->nextHop))
    {
        return ForwardDecision::Dropped(DropReason::NextHopUnreachable);
    }
    --packet.ttl;
    if (packet.ttl == 0)
    {
        return ForwardDecision::Dropped(DropReason::TtlExpired);
    }
    return ForwardDecision::To(e->nextHop);
}

const char*
ToString(ProtocolKind kind)
{
    switch (kind)
    {
    case ProtocolKind::Dsdv:
        return "dsdv";
    case ProtocolKind::Fsr:
        return "fsr";
    case ProtocolKind::Olsr:
        return "olsr";
    }
    return "?";
}

std::optional<ProtocolKind>
ParseProtocol(const std::string& name)
{
    if (name == "dsdv")
    {
        return ProtocolKind::Dsdv;
    }
    if (name == "fsr")
    {
        return ProtocolKind::Fsr;
    }
    if (name == "olsr")
    {
        return ProtocolKind::Olsr;
    }
    return std::nullopt;
}

namespace
{

/// Breadth-first layers over a compressed adjacency (offsets into targets).
RoutingTable
LayeredRoutes(const std::vector<std::size_t>& offsets,
              const std::vector<NodeId>& targets,
              NodeId self,
              SimTime now)
{
    const std::size_t size = offsets.size() - 1;
    std::vector<std::uint32_t> dist(size, kInfiniteMetric);
    std::vector<NodeId> first(size, kNoNode);
    dist[self] = 0;
    first[self] = self;
    std::vector<NodeId> frontier{self};
    std::vector<NodeId> layer;
    std::uint32_t depth = 0;
    while (!frontier.empty())
    {
        ++depth;
        // Next layer: each node keeps the smallest first hop among its
        // predecessors in the previous layer.
        layer.clear();
        for (NodeId u : frontier)
        {
            const NodeId via = (u == self) ? kNoNode : first[u];
            for (std::size_t i = offsets[u]; i < offsets[u + 1]; ++i)
            {
                const NodeId v = targets[i];
                if (dist[v] < depth)
                {
                    continue;
                }
                const NodeId hop = (via == kNoNode) ? v : via;
                if (dist[v] == kInfiniteMetric)
                {
                    dist[v] = depth;
                    first[v] = hop;
                    layer.push_back(v);
                }
                else if (hop < first[v])
                {
                    first[v] = hop;
                }
            }
        }
        frontier.swap(layer);
    }
    RoutingTable table;
    for (NodeId v = 0; v < size; ++v)
    {
        if (dist[v] != kInfiniteMetric)
        {
            table.Upsert(RouteEntry{v, first[v], dist[v], 0, now});
        }
    }
    return table;
}

/// Directed arcs (u, v) bucketed by u into offsets/targets.
RoutingTable
ArcRoutes(const std::vector<std::pair<NodeId, NodeId>>& arcs, NodeId self, SimTime now)
{
    NodeId top = self;
    for (const auto& [u, v] : arcs)
    {
        top = std::max({top, u, v});
    }
    std::vector<std::size_t> offsets(static_cast<std::size_t>(top) + 2, 0);
    for (const auto& arc : arcs)
    {
        ++offsets[arc.first + 1];
    }
    for (std::size_t i = 1; i < offsets.size(); ++i)
    {
        offsets[i] += offsets[i - 1];
    }
    std::vector<NodeId> targets(arcs.size());
    std::vector<std::size_t> fill(offsets.begin(), offsets.end() - 1);
    for (const auto& [u, v] : arcs)
    {
        targets[fill[u]++] = v;
    }
    return LayeredRoutes(offsets, targets, self, now);
}

} // namespace

RoutingTable
ShortestHopRoutes(const std::map<NodeId, std::vector<NodeId>>& graph, NodeId self, SimTime now)
{
    std::vector<std::pair<NodeId, NodeId>> arcs;
    for (const auto& [u, nbrs] : graph)
    {
        for (NodeId v : nbrs)
        {
            arcs.emplace_back(u, v);
        }
    }
    return ArcRoutes(arcs, self, now);
}

RoutingTable
ShortestHopRoutes(std::vector<std::pair<NodeId, NodeId>> edges, NodeId self, SimTime now)
{
    const std::size_t n = edges.size();
    edges.reserve(2 * n);
    for (std::size_t i = 0; i < n; ++i)
    {
        edges.emplace_back(edges[i].second, edges[i].first);
    }
    return ArcRoutes(edges, self, now);
}

} // namespace prosim
