#include "prosim/dsdv.hpp"

#include <algorithm>
#include <stdexcept>

namespace prosim
{

void
DsdvConfig::Validate() const
{
    if (!(periodicInterval > 0.0) || !(settlingTime > 0.0) || fullDumpEvery == 0)
    {
        throw std::invalid_argument("dsdv timers must be positive");
    }
}

DsdvVerdict
DsdvCompare(const RouteEntry& candidate, const RouteEntry* existing)
{
    if (existing == nullptr || candidate.seq > existing->seq)
    {
        return DsdvVerdict::Replace;
    }
    if (candidate.seq == existing->seq && candidate.metric < existing->metric)
    {
        return DsdvVerdict::Replace;
    }
    return DsdvVerdict::Keep;
}

Dsdv::Dsdv(NodeContext& ctx, DsdvConfig cfg, ControlSizing sizing)
    : RoutingProtocol(ctx, sizing),
      m_cfg(cfg)
{
    m_cfg.Validate();
    const NodeId self = m_ctx.Self();
    DsdvEntry own;
    own.route = RouteEntry{self, self, 0, 0, m_ctx.Now()};
    Install(own);
}

void
Dsdv::OnStart()
{
    m_ctx.ScheduleTimer(0.0, kPeriodic);
}

void
Dsdv::OnTimer(TimerLabel label)
{
    if (label != kPeriodic)
    {
        return;
    }
    ++m_round;
    auto& own = m_entries.at(m_ctx.Self());
    own.route.seq += 2;
    own.route.installTime = m_ctx.Now();
    m_table.Upsert(own.route);
    Send(BuildPeriodic(m_round));
    m_ctx.ScheduleTimer(m_cfg.periodicInterval, kPeriodic);
}

ControlPacket
Dsdv::BuildPeriodic(std::uint64_t round)
{
    const bool full = round % m_cfg.fullDumpEvery == 0;
    const SimTime now = m_ctx.Now();
    const NodeId self = m_ctx.Self();
    std::vector<DsdvAdvert> adverts;
    for (auto& [dest, e] : m_entries)
    {
        if (e.settleDeadline && now >= *e.settleDeadline)
        {
            e.settleDeadline.reset();
        }
        if (dest == self)
        {
            adverts.push_back({dest, 0, e.route.seq});
            Advertised(e);
            continue;
        }
        if (e.settleDeadline)
        {
            // Still settling: a full dump repeats what was last advertised.
            if (full && e.lastAdvert)
            {
                adverts.push_back(*e.lastAdvert);
            }
            continue;
        }
        if (full || !e.advertised)
        {
            adverts.push_back({dest, e.route.metric, e.route.seq});
            Advertised(e);
        }
    }
    return ControlPacket::Make(self, ++m_packetSeq, std::move(adverts), m_sizing);
}

void
Dsdv::Advertised(DsdvEntry& e)
{
    e.advertised = true;
    e.lastAdvert = DsdvAdvert{e.route.dest, e.route.metric, e.route.seq};
}

void
Dsdv::Install(const DsdvEntry& entry)
{
    m_entries[entry.route.dest] = entry;
    m_table.Upsert(entry.route);
}

std::optional<ControlPacket>
Dsdv::Trigger(const std::vector<NodeId>& dests)
{
    if (dests.empty())
    {
        return std::nullopt;
    }
    std::vector<DsdvAdvert> adverts;
    for (NodeId d : dests)
    {
        auto& e = m_entries.at(d);
        adverts.push_back({d, e.route.metric, e.route.seq});
        Advertised(e);
    }
    ++m_triggered;
    return ControlPacket::Make(m_ctx.Self(), ++m_packetSeq, std::move(adverts), m_sizing, true);
}

std::optional<ControlPacket>
Dsdv::BreakLinksVia(NodeId lost)
{
    const NodeId self = m_ctx.Self();
    std::vector<NodeId> broken;
    for (auto& [dest, e] : m_entries)
    {
        if (dest == self || e.route.nextHop != lost || !e.route.IsValid())
        {
            continue;
        }
        e.route.metric = kInfiniteMetric;
        if (e.route.seq % 2 == 0)
        {
            ++e.route.seq;
        }
        e.route.installTime = m_ctx.Now();
        e.settleDeadline.reset();
        m_table.Upsert(e.route);
        broken.push_back(dest);
    }
    return Trigger(broken);
}

void
Dsdv::OnLinkDown(NodeId neighbor)
{
    if (auto pkt = BreakLinksVia(neighbor))
    {
        Send(std::move(*pkt));
    }
}

std::optional<ControlPacket>
Dsdv::ApplyUpdate(const std::vector<DsdvAdvert>& adverts, NodeId from)
{
    const NodeId self = m_ctx.Self();
    const SimTime now = m_ctx.Now();
    std::vector<NodeId> broken;
    for (const auto& adv : adverts)
    {
        if (adv.dest == self)
        {
            // Someone holds a broken route to us: outbid it with a fresh even number.
            auto& own = m_entries.at(self);
            if (adv.seq % 2 == 1 && adv.seq > own.route.seq)
            {
                own.route.seq = adv.seq + 1;
                own.advertised = false;
                m_table.Upsert(own.route);
            }
            continue;
        }
        RouteEntry cand{adv.dest, from, AddHop(adv.metric), adv.seq, now};
        auto it = m_entries.find(adv.dest);
        const RouteEntry* existing = (it == m_entries.end()) ? nullptr : &it->second.route;
        if (existing == nullptr && !cand.IsValid())
        {
            // Nothing to learn from a broken route we never had.
            continue;
        }
        if (DsdvCompare(cand, existing) == DsdvVerdict::Keep)
        {
            continue;
        }
        const bool wasValid = existing != nullptr && existing->IsValid();
        DsdvEntry next = (it == m_entries.end()) ? DsdvEntry{} : it->second;
        const bool sameSeq = existing != nullptr && existing->seq == cand.seq;
        next.route = cand;
        next.advertised = false;
        if (sameSeq)
        {
            next.settleDeadline = now + m_cfg.settlingTime;
        }
        else
        {
            next.settleDeadline.reset();
        }
        Install(next);
        if (!cand.IsValid() && wasValid)
        {
            broken.push_back(adv.dest);
        }
        if (cand.IsValid() && !wasValid)
        {
            m_ctx.RouteInstalled(adv.dest);
        }
    }
    return Trigger(broken);
}

void
Dsdv::OnControl(const ControlPacket& packet, NodeId from)
{
    const auto* adverts = std::get_if<std::vector<DsdvAdvert>>(&packet.payload);
    if (adverts == nullptr)
    {
        return;
    }
    const auto& nbrs = m_ctx.LinkNeighbors();
    if (!std::binary_search(nbrs.begin(), nbrs.end(), from))
    {
        return;
    }
    if (auto pkt = ApplyUpdate(*adverts, from))
    {
        Send(std::move(*pkt));
    }
}

} // namespace prosim
