// Optimized Link State Routing: HELLO link sensing, multipoint relay (MPR)
// selection, TC generation by MPRs and MPR-restricted flooding.
#pragma once

#include "prosim/routing.hpp"

#include <map>
#include <optional>
#include <set>
#include <vector>

namespace prosim
{

struct OlsrConfig
{
    double helloInterval = 1.0;
    double tcInterval = 2.0;
    /// Validity of learned state, as a multiple of the originating interval.
    double holdFactor = 3.0;
    std::uint8_t willingness = 3;
    double duplicateHold = 30.0;

    void Validate() const;
    double NeighborHold() const { return holdFactor * helloInterval; }
    double TopologyHold() const { return holdFactor * tcInterval; }
};

struct NeighborRecord
{
    NodeId id = kNoNode;
    bool symmetric = false;
    std::uint8_t willingness = 3;
    SimTime lastHeard = 0.0;
};

struct TwoHopRecord
{
    NodeId neighbor = kNoNode;
    NodeId twoHop = kNoNode;
    SimTime lastHeard = 0.0;

    friend bool operator==(const TwoHopRecord&, const TwoHopRecord&) = default;
};

struct TopologyRecord
{
    NodeId dest = kNoNode;
    NodeId lastHop = kNoNode; ///< the MPR advertising the link
    std::uint64_t ansn = 0;
    SimTime heardAt = 0.0;
};

struct DuplicateRecord
{
    bool retransmitted = false;
    SimTime expires = 0.0;
};

/// Per-node OLSR state.
struct OlsrState
{
    std::map<NodeId, NeighborRecord> neighbors;
    std::vector<TwoHopRecord> twoHop;
    std::set<NodeId> mprs;
    std::map<NodeId, SimTime> mprSelectors; ///< selector -> last HELLO naming us MPR
    std::vector<TopologyRecord> topology;
    std::map<std::pair<NodeId, std::uint64_t>, DuplicateRecord> duplicates;

    std::vector<NodeId> SymmetricNeighbors() const;
    std::set<NodeId> SelectorSet() const;
};

/**
 * Processes a HELLO from `from`: link sensing (asymmetric on first hearing,
 * symmetric once the HELLO lists us), 2-hop set refresh, MPR-selector
 * bookkeeping. HELLOs are never forwarded.
 */
void OlsrOnHello(OlsrState& state,
                 NodeId self,
                 const HelloBody& hello,
                 NodeId from,
                 SimTime now);

/**
 * Greedy MPR selection over neighbours (id -> willingness) and 2-hop
 * reachability pairs. Willingness-0 neighbours are never chosen; sole
 * providers of some 2-hop node are always chosen; the rest is a greedy
 * cover by (uncovered count, willingness, reachability degree, lower id).
 */
std::set<NodeId> SelectMprs(const std::map<NodeId, std::uint8_t>& symNeighbors,
                            const std::vector<std::pair<NodeId, NodeId>>& twoHop,
                            NodeId self);

/// TC listing the selector set with the next ANSN; none for an empty set.
std::optional<ControlPacket> OlsrGenerateTc(NodeId self,
                                            const std::set<NodeId>& selectors,
                                            std::uint64_t& ansn,
                                            const ControlSizing& sizing);

enum class FloodAction
{
    Retransmit,
    Absorb,
};

/**
 * MPR flooding rule: a packet is retransmitted at most once per
 * (origin, seq), and only when it arrived from an MPR selector. The
 * duplicate set is updated. `fresh` reports whether this is the first copy.
 */
FloodAction OlsrForward(NodeId self,
                        const ControlPacket& packet,
                        NodeId from,
                        const std::set<NodeId>& selectors,
                        std::map<std::pair<NodeId, std::uint64_t>, DuplicateRecord>& duplicates,
                        SimTime now,
                        double duplicateHold,
                        bool* fresh = nullptr);

/// Shortest-hop routes over self–neighbour edges plus advertised (lastHop, dest) links.
RoutingTable OlsrRoutes(const std::vector<NodeId>& symNeighbors,
                        const std::vector<TopologyRecord>& topology,
                        NodeId self,
                        SimTime now);

struct FloodResult
{
    std::set<NodeId> reached;
    std::size_t transmissions = 0; ///< including the originator's own send
};

/// Graph-level flood from `origin`; relay sets map node -> its MPRs.
/// Without relay sets every node retransmits once (classic flooding).
FloodResult SimulateFlood(const std::vector<std::vector<NodeId>>& graph,
                          NodeId origin,
                          const std::vector<std::set<NodeId>>* relaySets);

class Olsr : public RoutingProtocol
{
  public:
    enum Timer : TimerLabel
    {
        kHello = 1,
        kTc = 2,
    };

    Olsr(NodeContext& ctx, OlsrConfig cfg = {}, ControlSizing sizing = {});

    ProtocolKind Kind() const override { return ProtocolKind::Olsr; }
    void OnStart() override;
    void OnTimer(TimerLabel label) override;
    void OnControl(const ControlPacket& packet, NodeId from) override;
    void OnLinkDown(NodeId neighbor) override;
    const RoutingTable& Table() const override { return m_table; }

    ControlPacket BuildHello() const;

    const OlsrState& State() const { return m_state; }
    std::uint64_t TcGenerated() const { return m_tcGenerated; }
    std::uint64_t TcRetransmitted() const { return m_tcForwarded; }
    const OlsrConfig& Config() const { return m_cfg; }

  private:
    void Expire();
    void UpdateMprs();
    void OnTopologyChange();
    void SendTc(bool triggered);
    /// Returns whether the set of advertised links changed.
    bool ProcessTc(const TcBody& tc, NodeId origin);
    void Recompute();

    OlsrConfig m_cfg;
    OlsrState m_state;
    RoutingTable m_table;
    std::vector<NodeId> m_routedNeighbors;
    bool m_topologyDirty = true;
    std::uint64_t m_ansn = 0;
    std::uint64_t m_helloSeq = 0;
    std::set<NodeId> m_lastSelectors;
    SimTime m_lastTc = -1.0e300;
    std::uint64_t m_tcGenerated = 0;
    std::uint64_t m_tcForwarded = 0;
};

} // namespace prosim
