// Fisheye State Routing: link-state entries exchanged with neighbours only,
// at a frequency that falls off with the hop distance of their origin.
#pragma once

#include "prosim/routing.hpp"

#include <limits>
#include <map>
#include <span>
#include <vector>

namespace prosim
{

inline constexpr double kUnboundedScope = std::numeric_limits<double>::infinity();

struct FsrConfig
{
    /// Ascending inclusive hop radii; the last one is unbounded.
    std::vector<double> scopeRadii{2.0, kUnboundedScope};
    /// Broadcast interval per scope, ascending.
    std::vector<double> scopeIntervals{5.0, 15.0};
    /// Entries not refreshed within expiryFactor * their band interval are dropped.
    double expiryFactor = 3.0;

    void Validate() const;
};

/// Smallest i with hopDistance <= radii[i]; unreachable origins map to the last band.
std::size_t ScopeIndex(std::uint32_t hopDistance, std::span<const double> radii);

struct LinkStateEntry
{
    NodeId origin = kNoNode;
    std::vector<NodeId> neighbors; ///< sorted
    std::uint64_t seq = 0;
    SimTime heardAt = 0.0;
};

using LinkStateDb = std::map<NodeId, LinkStateEntry>;

/// Stores each record whose seq is strictly newer; returns whether anything changed.
/// `graphChanged`, when given, reports whether a new origin or neighbour list arrived.
bool FsrMerge(LinkStateDb& lsdb,
              std::span<const LinkStateRecord> records,
              SimTime now,
              bool* graphChanged = nullptr);

/// Undirected union graph of the database: an edge exists when either end lists the other.
std::map<NodeId, std::vector<NodeId>> LinkStateGraph(const LinkStateDb& lsdb);

/// Shortest-hop routes over LinkStateGraph(lsdb), lower next-hop id on ties.
RoutingTable FsrRoutes(const LinkStateDb& lsdb, NodeId self, SimTime now);

class Fsr : public RoutingProtocol
{
  public:
    Fsr(NodeContext& ctx, FsrConfig cfg = {}, ControlSizing sizing = {});

    ProtocolKind Kind() const override { return ProtocolKind::Fsr; }
    void OnStart() override;
    /// Label = scope index.
    void OnTimer(TimerLabel label) override;
    void OnControl(const ControlPacket& packet, NodeId from) override;
    void OnLinkDown(NodeId neighbor) override;
    void OnLinkUp(NodeId neighbor) override;
    const RoutingTable& Table() const override { return m_table; }

    /**
     * Packet for a scope timer: records whose origin currently sits in the
     * scope's distance band. Scope 0 always carries a refreshed own entry.
     * Returns none when the band is empty.
     */
    std::optional<ControlPacket> BuildScopeUpdate(std::size_t scope);

    const LinkStateDb& Database() const { return m_lsdb; }
    const FsrConfig& Config() const { return m_cfg; }

  private:
    void RefreshOwnEntry();
    void ExpireStale();
    void Recompute();

    FsrConfig m_cfg;
    LinkStateDb m_lsdb;
    RoutingTable m_table;
    std::uint64_t m_packetSeq = 0;
};

} // namespace prosim
