#include "prosim/olsr.hpp"

#include <algorithm>
#include <deque>
#include <stdexcept>
#include <tuple>

namespace prosim
{

void
OlsrConfig::Validate() const
{
    if (!(helloInterval > 0.0) || !(tcInterval > 0.0) || !(holdFactor > 0.0) ||
        !(duplicateHold > 0.0))
    {
        throw std::invalid_argument("olsr intervals must be positive");
    }
    if (willingness > 7)
    {
        throw std::invalid_argument("olsr willingness must lie in 0..7");
    }
}

std::vector<NodeId>
OlsrState::SymmetricNeighbors() const
{
    std::vector<NodeId> out;
    for (const auto& [id, rec] : neighbors)
    {
        if (rec.symmetric)
        {
            out.push_back(id);
        }
    }
    return out;
}

std::set<NodeId>
OlsrState::SelectorSet() const
{
    std::set<NodeId> out;
    for (const auto& [id, _] : mprSelectors)
    {
        out.insert(id);
    }
    return out;
}

void
OlsrOnHello(OlsrState& state, NodeId self, const HelloBody& hello, NodeId from, SimTime now)
{
    auto [it, inserted] = state.neighbors.try_emplace(from);
    NeighborRecord& rec = it->second;
    rec.id = from;
    rec.lastHeard = now;
    rec.willingness = hello.willingness;

    const auto us = std::find_if(hello.links.begin(), hello.links.end(),
                                 [self](const HelloLink& l) { return l.neighbor == self; });
    rec.symmetric = us != hello.links.end();

    std::erase_if(state.twoHop, [from](const TwoHopRecord& r) { return r.neighbor == from; });
    if (rec.symmetric)
    {
        for (const auto& l : hello.links)
        {
            if (l.neighbor != self && l.status != LinkStatus::Asymmetric)
            {
                state.twoHop.push_back({from, l.neighbor, now});
            }
        }
    }

    if (rec.symmetric && us->status == LinkStatus::Mpr)
    {
        state.mprSelectors[from] = now;
    }
    else
    {
        state.mprSelectors.erase(from);
    }
}

std::set<NodeId>
SelectMprs(const std::map<NodeId, std::uint8_t>& symNeighbors,
           const std::vector<std::pair<NodeId, NodeId>>& twoHop,
           NodeId self)
{
    // provider -> 2-hop nodes it reaches
    std::map<NodeId, std::set<NodeId>> reach;
    std::map<NodeId, std::set<NodeId>> providers;
    for (const auto& [via, target] : twoHop)
    {
        auto w = symNeighbors.find(via);
        if (w == symNeighbors.end() || w->second == 0)
        {
            continue;
        }
        if (target == self || symNeighbors.count(target) != 0)
        {
            continue;
        }
        reach[via].insert(target);
        providers[target].insert(via);
    }

    std::set<NodeId> mprs;
    for (const auto& [target, via] : providers)
    {
        if (via.size() == 1)
        {
            mprs.insert(*via.begin());
        }
    }

    std::set<NodeId> uncovered;
    for (const auto& [target, _] : providers)
    {
        uncovered.insert(target);
    }
    for (NodeId m : mprs)
    {
        for (NodeId t : reach[m])
        {
            uncovered.erase(t);
        }
    }

    while (!uncovered.empty())
    {
        NodeId best = kNoNode;
        std::tuple<std::size_t, std::uint8_t, std::size_t> bestKey{0, 0, 0};
        for (const auto& [via, targets] : reach)
        {
            if (mprs.count(via) != 0)
            {
                continue;
            }
            std::size_t gain = 0;
            for (NodeId t : targets)
            {
                gain += uncovered.count(t);
            }
            if (gain == 0)
            {
                continue;
            }
            const std::tuple<std::size_t, std::uint8_t, std::size_t> key{
                gain, symNeighbors.at(via), targets.size()};
            // reach is ordered by id, so a strict comparison keeps the lower id on ties.
            if (best == kNoNode || key > bestKey)
            {
                best = via;
                bestKey = key;
            }
        }
        if (best == kNoNode)
        {
            break;
        }
        mprs.insert(best);
        for (NodeId t : reach[best])
        {
            uncovered.erase(t);
        }
    }
    return mprs;
}

std::optional<ControlPacket>
OlsrGenerateTc(NodeId self,
               const std::set<NodeId>& selectors,
               std::uint64_t& ansn,
               const ControlSizing& sizing)
{
    if (selectors.empty())
    {
        return std::nullopt;
    }
    ++ansn;
    TcBody body;
    body.ansn = ansn;
    body.selectors.assign(selectors.begin(), selectors.end());
    return ControlPacket::Make(self, ansn, std::move(body), sizing);
}

FloodAction
OlsrForward(NodeId self,
            const ControlPacket& packet,
            NodeId from,
            const std::set<NodeId>& selectors,
            std::map<std::pair<NodeId, std::uint64_t>, DuplicateRecord>& duplicates,
            SimTime now,
            double duplicateHold,
            bool* fresh)
{
    if (fresh != nullptr)
    {
        *fresh = false;
    }
    if (packet.origin == self)
    {
        return FloodAction::Absorb;
    }
    auto [it, inserted] = duplicates.try_emplace({packet.origin, packet.seq});
    if (inserted)
    {
        it->second.expires = now + duplicateHold;
        if (fresh != nullptr)
        {
            *fresh = true;
        }
    }
    if (it->second.retransmitted || selectors.count(from) == 0)
    {
        return FloodAction::Absorb;
    }
    it->second.retransmitted = true;
    return FloodAction::Retransmit;
}

RoutingTable
OlsrRoutes(const std::vector<NodeId>& symNeighbors,
           const std::vector<TopologyRecord>& topology,
           NodeId self,
           SimTime now)
{
    std::vector<std::pair<NodeId, NodeId>> edges;
    edges.reserve(symNeighbors.size() + topology.size());
    for (NodeId v : symNeighbors)
    {
        edges.emplace_back(self, v);
    }
    for (const auto& r : topology)
    {
        if (r.lastHop == self || r.dest == self)
        {
            // Links at our end come from first-hand sensing only.
            continue;
        }
        edges.emplace_back(r.lastHop, r.dest);
    }
    return ShortestHopRoutes(std::move(edges), self, now);
}

FloodResult
SimulateFlood(const std::vector<std::vector<NodeId>>& graph,
              NodeId origin,
              const std::vector<std::set<NodeId>>* relaySets)
{
    FloodResult res;
    std::vector<bool> sent(graph.size(), false);
    std::deque<NodeId> senders{origin};
    sent[origin] = true;
    res.reached.insert(origin);
    res.transmissions = 1;
    while (!senders.empty())
    {
        const NodeId from = senders.front();
        senders.pop_front();
        for (NodeId v : graph[from])
        {
            res.reached.insert(v);
            if (sent[v])
            {
                continue;
            }
            const bool relay = relaySets == nullptr || (*relaySets)[from].count(v) != 0;
            if (relay)
            {
                sent[v] = true;
                ++res.transmissions;
                senders.push_back(v);
            }
        }
    }
    return res;
}

Olsr::Olsr(NodeContext& ctx, OlsrConfig cfg, ControlSizing sizing)
    : RoutingProtocol(ctx, sizing),
      m_cfg(cfg)
{
    m_cfg.Validate();
    Recompute();
}

void
Olsr::OnStart()
{
    m_ctx.ScheduleTimer(0.0, kHello);
    m_ctx.ScheduleTimer(0.0, kTc);
}

ControlPacket
Olsr::BuildHello() const
{
    HelloBody body;
    body.willingness = m_cfg.willingness;
    for (const auto& [id, rec] : m_state.neighbors)
    {
        LinkStatus st = LinkStatus::Asymmetric;
        if (rec.symmetric)
        {
            st = m_state.mprs.count(id) != 0 ? LinkStatus::Mpr : LinkStatus::Symmetric;
        }
        body.links.push_back({id, st});
    }
    return ControlPacket::Make(m_ctx.Self(), m_helloSeq, std::move(body), m_sizing);
}

void
Olsr::Expire()
{
    const SimTime now = m_ctx.Now();
    const double nHold = m_cfg.NeighborHold();
    bool changed = false;
    for (auto it = m_state.neighbors.begin(); it != m_state.neighbors.end();)
    {
        if (now - it->second.lastHeard > nHold)
        {
            const NodeId gone = it->first;
            std::erase_if(m_state.twoHop, [gone](const TwoHopRecord& r) { return r.neighbor == gone; });
            m_state.mprSelectors.erase(gone);
            it = m_state.neighbors.erase(it);
            changed = true;
        }
        else
        {
            ++it;
        }
    }
    changed |= std::erase_if(m_state.twoHop, [&](const TwoHopRecord& r) {
                   return now - r.lastHeard > nHold;
               }) > 0;
    changed |= std::erase_if(m_state.mprSelectors, [&](const auto& kv) {
                   return now - kv.second > nHold;
               }) > 0;
    const double tHold = m_cfg.TopologyHold();
    if (std::erase_if(m_state.topology, [&](const TopologyRecord& r) { return now - r.heardAt > tHold; }) > 0)
    {
        m_topologyDirty = true;
        changed = true;
    }
    std::erase_if(m_state.duplicates, [&](const auto& kv) { return kv.second.expires < now; });
    if (changed)
    {
        OnTopologyChange();
    }
}

void
Olsr::UpdateMprs()
{
    std::map<NodeId, std::uint8_t> sym;
    for (const auto& [id, rec] : m_state.neighbors)
    {
        if (rec.symmetric)
        {
            sym[id] = rec.willingness;
        }
    }
    std::vector<std::pair<NodeId, NodeId>> pairs;
    pairs.reserve(m_state.twoHop.size());
    for (const auto& r : m_state.twoHop)
    {
        pairs.emplace_back(r.neighbor, r.twoHop);
    }
    m_state.mprs = SelectMprs(sym, pairs, m_ctx.Self());
}

void
Olsr::OnTopologyChange()
{
    UpdateMprs();
    auto selectors = m_state.SelectorSet();
    if (selectors != m_lastSelectors)
    {
        m_lastSelectors = selectors;
        // Extra TC on selector change, at most one per half TC interval.
        if (!selectors.empty() && m_ctx.Now() - m_lastTc >= 0.5 * m_cfg.tcInterval)
        {
            SendTc(true);
        }
    }
    Recompute();
}

void
Olsr::SendTc(bool triggered)
{
    auto pkt = OlsrGenerateTc(m_ctx.Self(), m_state.SelectorSet(), m_ansn, m_sizing);
    if (!pkt)
    {
        return;
    }
    pkt->triggered = triggered;
    m_lastTc = m_ctx.Now();
    ++m_tcGenerated;
    Send(std::move(*pkt));
}

bool
Olsr::ProcessTc(const TcBody& tc, NodeId origin)
{
    for (const auto& r : m_state.topology)
    {
        if (r.lastHop == origin && r.ansn > tc.ansn)
        {
            return false;
        }
    }
    const SimTime now = m_ctx.Now();
    bool changed = std::erase_if(m_state.topology, [&](const TopologyRecord& r) {
                       return r.lastHop == origin && r.ansn < tc.ansn &&
                              std::find(tc.selectors.begin(), tc.selectors.end(), r.dest) == tc.selectors.end();
                   }) > 0;
    for (NodeId dest : tc.selectors)
    {
        auto it = std::find_if(m_state.topology.begin(), m_state.topology.end(),
                               [&](const TopologyRecord& r) {
                                   return r.lastHop == origin && r.dest == dest;
                               });
        if (it == m_state.topology.end())
        {
            m_state.topology.push_back({dest, origin, tc.ansn, now});
            changed = true;
        }
        else
        {
            it->ansn = tc.ansn;
            it->heardAt = now;
        }
    }
    return changed;
}

void
Olsr::Recompute()
{
    auto sym = m_state.SymmetricNeighbors();
    if (!m_topologyDirty && sym == m_routedNeighbors)
    {
        return;
    }
    m_table = OlsrRoutes(sym, m_state.topology, m_ctx.Self(), m_ctx.Now());
    m_routedNeighbors = std::move(sym);
    m_topologyDirty = false;
}

void
Olsr::OnTimer(TimerLabel label)
{
    Expire();
    if (label == kHello)
    {
        ++m_helloSeq;
        Send(BuildHello());
        m_ctx.ScheduleTimer(m_cfg.helloInterval, kHello);
    }
    else if (label == kTc)
    {
        SendTc(false);
        m_ctx.ScheduleTimer(m_cfg.tcInterval, kTc);
    }
}

void
Olsr::OnControl(const ControlPacket& packet, NodeId from)
{
    if (const auto* hello = std::get_if<HelloBody>(&packet.payload))
    {
        const auto symBefore = m_state.SymmetricNeighbors();
        const auto twoHopBefore = m_state.twoHop.size();
        const auto selectorsBefore = m_state.mprSelectors.size();
        std::vector<NodeId> viaBefore;
        for (const auto& r : m_state.twoHop)
        {
            if (r.neighbor == from)
            {
                viaBefore.push_back(r.twoHop);
            }
        }
        OlsrOnHello(m_state, m_ctx.Self(), *hello, from, m_ctx.Now());
        std::vector<NodeId> viaAfter;
        for (const auto& r : m_state.twoHop)
        {
            if (r.neighbor == from)
            {
                viaAfter.push_back(r.twoHop);
            }
        }
        const bool changed = symBefore != m_state.SymmetricNeighbors() || viaBefore != viaAfter ||
                             twoHopBefore != m_state.twoHop.size() ||
                             selectorsBefore != m_state.mprSelectors.size() ||
                             m_state.SelectorSet() != m_lastSelectors;
        if (changed)
        {
            OnTopologyChange();
        }
        return;
    }
    const auto* tc = std::get_if<TcBody>(&packet.payload);
    if (tc == nullptr)
    {
        return;
    }
    auto nb = m_state.neighbors.find(from);
    if (nb == m_state.neighbors.end() || !nb->second.symmetric)
    {
        return;
    }
    bool fresh = false;
    const auto action = OlsrForward(m_ctx.Self(), packet, from, m_state.SelectorSet(),
                                    m_state.duplicates, m_ctx.Now(), m_cfg.duplicateHold, &fresh);
    if (fresh && ProcessTc(*tc, packet.origin))
    {
        m_topologyDirty = true;
        Recompute();
    }
    if (action == FloodAction::Retransmit)
    {
        ++m_tcForwarded;
        Send(packet);
    }
}

void
Olsr::OnLinkDown(NodeId neighbor)
{
    if (m_state.neighbors.erase(neighbor) == 0)
    {
        return;
    }
    std::erase_if(m_state.twoHop, [neighbor](const TwoHopRecord& r) { return r.neighbor == neighbor; });
    m_state.mprSelectors.erase(neighbor);
    OnTopologyChange();
}

} // namespace prosim
