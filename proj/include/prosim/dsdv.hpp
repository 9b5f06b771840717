// Destination-Sequenced Distance Vector routing.
#pragma once

#include "prosim/routing.hpp"

#include <map>
#include <optional>
#include <vector>

namespace prosim
{

struct DsdvConfig
{
    double periodicInterval = 15.0; ///< seconds between periodic rounds
    double settlingTime = 5.0;
    std::uint32_t fullDumpEvery = 4; ///< every Nth periodic round is a full dump

    void Validate() const;
};

/**
 * A route plus advertisement bookkeeping. Even seq means the route is
 * valid, odd seq means it is broken (metric infinite).
 */
struct DsdvEntry
{
    RouteEntry route;
    /// Set while a same-seq metric improvement waits out the settling time.
    std::optional<SimTime> settleDeadline;
    /// False while a change is waiting to be advertised.
    bool advertised = false;
    /// Last (metric, seq) put on the air, advertised in full dumps while settling.
    std::optional<DsdvAdvert> lastAdvert;
};

enum class DsdvVerdict
{
    Keep,
    Replace,
};

/// Newer sequence number wins; at equal seq the shorter metric wins.
DsdvVerdict DsdvCompare(const RouteEntry& candidate, const RouteEntry* existing);

class Dsdv : public RoutingProtocol
{
  public:
    enum Timer : TimerLabel
    {
        kPeriodic = 1,
    };

    Dsdv(NodeContext& ctx, DsdvConfig cfg = {}, ControlSizing sizing = {});

    ProtocolKind Kind() const override { return ProtocolKind::Dsdv; }
    void OnStart() override;
    void OnTimer(TimerLabel label) override;
    void OnControl(const ControlPacket& packet, NodeId from) override;
    void OnLinkDown(NodeId neighbor) override;
    const RoutingTable& Table() const override { return m_table; }
    bool BuffersBrokenRoutes() const override { return true; }

    /**
     * Advertisement for periodic round `round` (1-based). Full-dump rounds
     * carry every entry; other rounds carry the own entry plus entries
     * changed since they were last advertised. Marks entries as advertised.
     */
    ControlPacket BuildPeriodic(std::uint64_t round);

    /// Invalidates every route through `lost`; returns the triggered update, if any.
    std::optional<ControlPacket> BreakLinksVia(NodeId lost);

    /// Applies a received update; returns a triggered advert for routes it broke.
    std::optional<ControlPacket> ApplyUpdate(const std::vector<DsdvAdvert>& adverts, NodeId from);

    const std::map<NodeId, DsdvEntry>& Entries() const { return m_entries; }
    std::uint64_t Rounds() const { return m_round; }
    std::uint64_t TriggeredSent() const { return m_triggered; }
    const DsdvConfig& Config() const { return m_cfg; }

  private:
    void Install(const DsdvEntry& entry);
    void Advertised(DsdvEntry& e);
    std::optional<ControlPacket> Trigger(const std::vector<NodeId>& dests);

    DsdvConfig m_cfg;
    std::map<NodeId, DsdvEntry> m_entries;
    RoutingTable m_table;
    std::uint64_t m_round = 0;
    std::uint64_t m_packetSeq = 0;
    std::uint64_t m_triggered = 0;
};

} // namespace prosim
