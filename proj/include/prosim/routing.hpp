// Contract shared by the proactive protocols: route tables, control-packet
// envelope, data forwarding and the hooks a protocol instance implements.
#pragma once

#include "prosim/sim_kernel.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace prosim
{

inline constexpr std::uint32_t kInfiniteMetric = std::numeric_limits<std::uint32_t>::max();

/// Saturating hop-count increment.
inline std::uint32_t
AddHop(std::uint32_t metric)
{
    return metric == kInfiniteMetric ? kInfiniteMetric : metric + 1;
}

/// One row of a node's routing table (destination, next hop, hops, seq#, install time).
struct RouteEntry
{
    NodeId dest = kNoNode;
    NodeId nextHop = kNoNode;
    std::uint32_t metric = kInfiniteMetric;
    std::uint64_t seq = 0;
    SimTime installTime = 0.0;

    bool IsValid() const { return metric != kInfiniteMetric; }

    friend bool operator==(const RouteEntry&, const RouteEntry&) = default;
};

/// At most one entry per destination.
class RoutingTable
{
  public:
    const RouteEntry* Find(NodeId dest) const;
    RouteEntry* Find(NodeId dest);

    void Upsert(const RouteEntry& entry);
    bool Erase(NodeId dest);
    void Clear() { m_entries.clear(); }

    /// Next hop of a valid entry for `dest`; none for missing or broken routes.
    std::optional<NodeId> NextHop(NodeId dest) const;

    std::size_t Size() const { return m_entries.size(); }
    const std::map<NodeId, RouteEntry>& Entries() const { return m_entries; }

    friend bool operator==(const RoutingTable&, const RoutingTable&) = default;

  private:
    std::map<NodeId, RouteEntry> m_entries;
};

/// Writes `t node dest next_hop metric seq` lines, one per entry.
void DumpTable(std::ostream& os, SimTime t, NodeId node, const RoutingTable& table);

enum class ControlKind : std::uint8_t
{
    DsdvUpdate,
    FsrLinkState,
    OlsrHello,
    OlsrTc,
};

inline constexpr std::size_t kControlKindCount = 4;

const char* ToString(ControlKind kind);

struct DsdvAdvert
{
    NodeId dest;
    std::uint32_t metric;
    std::uint64_t seq;

    friend bool operator==(const DsdvAdvert&, const DsdvAdvert&) = default;
};

struct LinkStateRecord
{
    NodeId origin;
    std::vector<NodeId> neighbors; ///< sorted
    std::uint64_t seq;

    friend bool operator==(const LinkStateRecord&, const LinkStateRecord&) = default;
};

enum class LinkStatus : std::uint8_t
{
    Asymmetric,
    Symmetric,
    Mpr, ///< symmetric and selected as multipoint relay by the sender
};

struct HelloLink
{
    NodeId neighbor;
    LinkStatus status;

    friend bool operator==(const HelloLink&, const HelloLink&) = default;
};

struct HelloBody
{
    std::uint8_t willingness = 3;
    std::vector<HelloLink> links;
};

struct TcBody
{
    std::uint64_t ansn = 0;
    std::vector<NodeId> selectors; ///< sorted
};

using ControlPayload =
    std::variant<std::vector<DsdvAdvert>, std::vector<LinkStateRecord>, HelloBody, TcBody>;

/// Byte accounting for control packets: header + perEntry * entries.
struct ControlSizing
{
    std::uint32_t header = 20;
    std::uint32_t perEntry = 12;
};

std::size_t EntryCount(const ControlPayload& payload);

struct ControlPacket
{
    NodeId origin = kNoNode;
    ControlKind kind = ControlKind::DsdvUpdate;
    std::uint64_t seq = 0;
    ControlPayload payload;
    std::uint32_t size = 0;
    bool triggered = false;

    static ControlPacket Make(NodeId origin,
                              std::uint64_t seq,
                              ControlPayload payload,
                              const ControlSizing& sizing,
                              bool triggered = false);
};

struct DataPacket
{
    std::uint64_t id = 0;
    NodeId src = kNoNode;
    NodeId dst = kNoNode;
    std::uint32_t size = 512;
    std::uint32_t ttl = 0;
    SimTime sentAt = 0.0;
};

enum class DropReason : std::uint8_t
{
    NoRoute,
    NextHopUnreachable,
    TtlExpired,
    BufferedTimeout,
};

inline constexpr std::size_t kDropReasonCount = 4;

const char* ToString(DropReason reason);

struct ForwardDecision
{
    enum class Action : std::uint8_t
    {
        Forward,
        DeliverLocal,
        Drop,
        Buffer,
    };

    Action action = Action::Drop;
    NodeId nextHop = kNoNode;
    DropReason reason = DropReason::NoRoute;

    static ForwardDecision To(NodeId hop) { return {Action::Forward, hop, DropReason::NoRoute}; }
    static ForwardDecision Deliver() { return {Action::DeliverLocal, kNoNode, DropReason::NoRoute}; }
    static ForwardDecision Hold() { return {Action::Buffer, kNoNode, DropReason::NoRoute}; }
    static ForwardDecision Dropped(DropReason r) { return {Action::Drop, kNoNode, r}; }
};

struct ForwardOptions
{
    /// Hold packets whose destination has a broken (infinite-metric) entry.
    bool bufferBrokenRoutes = false;
};

/**
 * Forwarding decision for `packet` at node `self`. On Forward the packet's
 * TTL has been decremented.
 */
ForwardDecision ForwardData(NodeId self,
                            DataPacket& packet,
                            const RoutingTable& table,
                            const std::function<bool(NodeId)>& isNeighbor,
                            const ForwardOptions& options = {});

enum class ProtocolKind : std::uint8_t
{
    Dsdv,
    Fsr,
    Olsr,
};

const char* ToString(ProtocolKind kind);
std::optional<ProtocolKind> ParseProtocol(const std::string& name);

using TimerLabel = std::uint32_t;

/// Services a node offers its routing agent.
class NodeContext
{
  public:
    virtual ~NodeContext() = default;

    virtual NodeId Self() const = 0;
    virtual std::size_t NetworkSize() const = 0;
    virtual SimTime Now() const = 0;

    /// One-hop broadcast of a control packet.
    virtual void Broadcast(ControlPacket packet) = 0;

    virtual EventHandle ScheduleTimer(SimTime delay, TimerLabel label) = 0;
    virtual bool CancelTimer(EventHandle handle) = 0;

    /// Neighbours as currently reported by link-layer sensing, sorted.
    virtual const std::vector<NodeId>& LinkNeighbors() const = 0;

    /// A valid route to `dest` appeared; held data may be released.
    virtual void RouteInstalled(NodeId dest) = 0;
};

class RoutingProtocol
{
  public:
    explicit RoutingProtocol(NodeContext& ctx, ControlSizing sizing = {})
        : m_ctx(ctx),
          m_sizing(sizing)
    {
    }
    virtual ~RoutingProtocol() = default;

    RoutingProtocol(const RoutingProtocol&) = delete;
    RoutingProtocol& operator=(const RoutingProtocol&) = delete;

    virtual ProtocolKind Kind() const = 0;
    virtual void OnStart() = 0;
    virtual void OnTimer(TimerLabel label) = 0;
    virtual void OnControl(const ControlPacket& packet, NodeId from) = 0;
    virtual void OnLinkDown(NodeId neighbor) = 0;
    virtual void OnLinkUp(NodeId) {}

    virtual const RoutingTable& Table() const = 0;
    virtual bool BuffersBrokenRoutes() const { return false; }

    /// Control packets this agent has handed to the radio.
    std::uint64_t BroadcastsIssued() const { return m_broadcasts; }

  protected:
    void Send(ControlPacket packet)
    {
        ++m_broadcasts;
        m_ctx.Broadcast(std::move(packet));
    }

    NodeContext& m_ctx;
    ControlSizing m_sizing;

  private:
    std::uint64_t m_broadcasts = 0;
};

/// Shortest-hop routes from `self` over an undirected graph given as
/// adjacency sets; ties go to the lower next-hop id.
RoutingTable ShortestHopRoutes(const std::map<NodeId, std::vector<NodeId>>& graph,
                               NodeId self,
                               SimTime now);

/// Same over an undirected edge list; order and duplicates do not matter.
RoutingTable ShortestHopRoutes(std::vector<std::pair<NodeId, NodeId>> edges, NodeId self, SimTime now);

} // namespace prosim
