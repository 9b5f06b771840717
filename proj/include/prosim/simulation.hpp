// A single packet-level run: world, one routing agent per node, CBR traffic.
#pragma once

#include "prosim/dsdv.hpp"
#include "prosim/fsr.hpp"
#include "prosim/olsr.hpp"
#include "prosim/sim_kernel.hpp"
#include "prosim/traffic.hpp"
#include "prosim/world.hpp"

#include <deque>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

namespace prosim
{

struct SimulationSetup
{
    std::vector<Trajectory> trajectories;
    RadioParams radio;
    ProtocolKind protocol = ProtocolKind::Dsdv;
    DsdvConfig dsdv;
    FsrConfig fsr;
    OlsrConfig olsr;
    ControlSizing sizing;
    std::vector<CbrFlow> flows;
    double duration = 900.0;
    std::uint64_t seed = 1;
    /// Period of link-layer neighbour sensing in mobile scenarios.
    double linkSamplePeriod = 0.1;
    /// Initial data TTL; defaults to the node count.
    std::optional<std::uint32_t> dataTtl;
    /// How long a node holds data for a destination whose route is broken.
    double bufferTimeout = 30.0;
};

class Simulation
{
  public:
    using Tracer = std::function<void(const Event&)>;

    explicit Simulation(SimulationSetup setup);
    ~Simulation();

    Simulation(const Simulation&) = delete;
    Simulation& operator=(const Simulation&) = delete;

    /// Advances the clock to `t` (at most the configured duration is meaningful).
    void RunUntil(SimTime t);
    void Run() { RunUntil(m_setup.duration); }

    SimTime Now() const { return m_queue.Now(); }
    std::size_t Size() const { return m_agents.size(); }

    const SimulationSetup& Setup() const { return m_setup; }
    const World& GetWorld() const { return m_world; }
    const MetricsLedger& Ledger() const { return m_ledger; }
    const RoutingProtocol& Agent(NodeId node) const { return *m_agents.at(node); }

    /// Sum of the agents' own broadcast counters.
    std::uint64_t ProtocolBroadcasts() const;
    /// Data packets on the air or held in buffers.
    std::uint64_t DataInFlight() const { return m_onAir + BufferedPackets(); }
    std::uint64_t BufferedPackets() const;

    /// Called with every dispatched event, before it runs.
    void SetTracer(Tracer tracer) { m_tracer = std::move(tracer); }

  private:
    class Context;
    struct Held
    {
        DataPacket packet;
        std::uint64_t token;
    };

    void Start();
    void SampleLinks();
    void SendData(std::size_t flow);
    void Forward(NodeId node, DataPacket packet);
    void Release(NodeId node, NodeId dest);
    void Broadcast(NodeId node, ControlPacket packet);

    SimulationSetup m_setup;
    EventQueue m_queue;
    World m_world;
    MetricsLedger m_ledger;
    Adjacency m_sensed;
    std::vector<std::unique_ptr<Context>> m_contexts;
    std::vector<std::unique_ptr<RoutingProtocol>> m_agents;
    std::vector<std::deque<Held>> m_buffers;
    std::uint64_t m_onAir = 0;
    std::uint64_t m_nextPacketId = 1;
    std::uint64_t m_nextToken = 1;
    std::uint32_t m_ttl = 0;
    bool m_started = false;
    Tracer m_tracer;
};

} // namespace prosim
