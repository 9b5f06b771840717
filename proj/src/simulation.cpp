#include "prosim/simulation.hpp"

#include <algorithm>
#include <stdexcept>

namespace prosim
{

class Simulation::Context : public NodeContext
{
  public:
    Context(Simulation& sim, NodeId self)
        : m_sim(sim),
          m_self(self)
    {
    }

    NodeId Self() const override { return m_self; }
    std::size_t NetworkSize() const override { return m_sim.m_world.Size(); }
    SimTime Now() const override { return m_sim.m_queue.Now(); }

    void Broadcast(ControlPacket packet) override { m_sim.Broadcast(m_self, std::move(packet)); }

    EventHandle ScheduleTimer(SimTime delay, TimerLabel label) override
    {
        Simulation& sim = m_sim;
        const NodeId self = m_self;
        return sim.m_queue.Schedule(Now() + delay, EventKind::Timer, self, [&sim, self, label] {
            sim.m_agents[self]->OnTimer(label);
        });
    }

    bool CancelTimer(EventHandle handle) override { return m_sim.m_queue.Cancel(handle); }

    const std::vector<NodeId>& LinkNeighbors() const override { return m_sim.m_sensed[m_self]; }

    void RouteInstalled(NodeId dest) override
    {
        if (m_sim.m_buffers.empty() || m_sim.m_buffers[m_self].empty())
        {
            return;
        }
        Simulation& sim = m_sim;
        const NodeId self = m_self;
        // Released from a fresh event so the agent finishes its update first.
        sim.m_queue.Schedule(Now(), EventKind::PacketArrival, self, [&sim, self, dest] {
            sim.Release(self, dest);
        });
    }


  private:
    Simulation& m_sim;
    NodeId m_self;
};

Simulation::Simulation(SimulationSetup setup)
    : m_setup(std::move(setup)),
      m_world(m_setup.trajectories, m_setup.radio, m_setup.seed)
{
    const std::size_t n = m_world.Size();
    if (n == 0)
    {
        throw std::invalid_argument("simulation needs at least one node");
    }
    if (!(m_setup.duration > 0.0) || !(m_setup.linkSamplePeriod > 0.0) ||
        !(m_setup.bufferTimeout > 0.0))
    {
        throw std::invalid_argument("duration, link sampling period and buffer timeout must be positive");
    }
    for (const auto& f : m_setup.flows)
    {
        f.Validate();
        if (f.src >= n || f.dst >= n)
        {
            throw std::invalid_argument("flow endpoint outside the node range");
        }
    }
    m_ttl = m_setup.dataTtl.value_or(static_cast<std::uint32_t>(n));
    m_sensed = m_world.AdjacencyAt(0.0);
    m_buffers.resize(n);
    for (NodeId i = 0; i < n; ++i)
    {
        m_contexts.push_back(std::make_unique<Context>(*this, i));
    }
    for (NodeId i = 0; i < n; ++i)
    {
        switch (m_setup.protocol)
        {
        case ProtocolKind::Dsdv:
            m_agents.push_back(std::make_unique<Dsdv>(*m_contexts[i], m_setup.dsdv, m_setup.sizing));
            break;
        case ProtocolKind::Fsr:
            m_agents.push_back(std::make_unique<Fsr>(*m_contexts[i], m_setup.fsr, m_setup.sizing));
            break;
        case ProtocolKind::Olsr:
            m_agents.push_back(std::make_unique<Olsr>(*m_contexts[i], m_setup.olsr, m_setup.sizing));
            break;
        }
    }
}

Simulation::~Simulation() = default;

void
Simulation::Start()
{
    m_started = true;
    for (auto& agent : m_agents)
    {
        agent->OnStart();
    }
    if (!m_world.IsStatic())
    {
        m_queue.Schedule(m_setup.linkSamplePeriod, EventKind::MobilityStep, kNoNode, [this] {
            SampleLinks();
        });
    }
    const auto sends = ScheduleFlows(m_setup.flows);
    for (const auto& s : sends)
    {
        if (s.at > m_setup.duration)
        {
            break;
        }
        const std::size_t flow = s.flow;
        m_queue.Schedule(s.at, EventKind::TrafficSend, m_setup.flows[flow].src, [this, flow] {
            SendData(flow);
        });
    }
}

void
Simulation::RunUntil(SimTime t)
{
    if (!m_started)
    {
        Start();
    }
    if (m_tracer)
    {
        m_queue.Run(t, [this](Event& ev) {
            m_tracer(ev);
            ev.action();
        });
    }
    else
    {
        m_queue.Run(t);
    }
}

void
Simulation::SampleLinks()
{
    Adjacency next = m_world.AdjacencyAt(Now());
    const LinkChanges changes = LinkEvents(m_sensed, next);
    m_sensed = std::move(next);
    for (const auto& [a, b] : changes.down)
    {
        m_agents[a]->OnLinkDown(b);
        m_agents[b]->OnLinkDown(a);
    }
    for (const auto& [a, b] : changes.up)
    {
        m_agents[a]->OnLinkUp(b);
        m_agents[b]->OnLinkUp(a);
    }
    m_queue.Schedule(Now() + m_setup.linkSamplePeriod, EventKind::MobilityStep, kNoNode, [this] {
        SampleLinks();
    });
}

void
Simulation::Broadcast(NodeId node, ControlPacket packet)
{
    m_ledger.ControlTransmitted(packet.kind, packet.size);
    const auto arrivals = m_world.Broadcast(node, packet.size, Now());
    if (arrivals.empty())
    {
        return;
    }
    auto shared = std::make_shared<const ControlPacket>(std::move(packet));
    for (const auto& a : arrivals)
    {
        const NodeId rx = a.receiver;
        m_queue.Schedule(a.at, EventKind::PacketArrival, rx, [this, rx, node, shared] {
            m_agents[rx]->OnControl(*shared, node);
        });
    }
}

void
Simulation::SendData(std::size_t flow)
{
    const CbrFlow& f = m_setup.flows[flow];
    DataPacket p;
    p.id = m_nextPacketId++;
    p.src = f.src;
    p.dst = f.dst;
    p.size = f.size;
    p.ttl = m_ttl;
    p.sentAt = Now();
    m_ledger.DataSent(p.size);
    Forward(f.src, p);
}

void
Simulation::Forward(NodeId node, DataPacket packet)
{
    const SimTime now = Now();
    const auto isNeighbor = [this, node, now](NodeId hop) { return m_world.InRange(node, hop, now); };
    ForwardOptions opts;
    opts.bufferBrokenRoutes = m_agents[node]->BuffersBrokenRoutes();
    const ForwardDecision d = ForwardData(node, packet, m_agents[node]->Table(), isNeighbor, opts);
    switch (d.action)
    {
    case ForwardDecision::Action::DeliverLocal:
        m_ledger.DataDelivered(packet.size, packet.sentAt, now);
        break;
    case ForwardDecision::Action::Drop:
        m_ledger.DataDropped(d.reason);
        break;
    case ForwardDecision::Action::Buffer: {
        const std::uint64_t token = m_nextToken++;
        m_buffers[node].push_back({packet, token});
        m_queue.Schedule(now + m_setup.bufferTimeout, EventKind::Timer, node, [this, node, token] {
            auto& buf = m_buffers[node];
            auto it = std::find_if(buf.begin(), buf.end(), [token](const Held& h) { return h.token == token; });
            if (it != buf.end())
            {
                buf.erase(it);
                m_ledger.DataDropped(DropReason::BufferedTimeout);
            }
        });
        break;
    }
    case ForwardDecision::Action::Forward: {
        ++m_onAir;
        const NodeId next = d.nextHop;
        m_queue.Schedule(now + TxDelay(packet.size, m_world.Radio().bandwidth),
                         EventKind::PacketArrival,
                         next,
                         [this, next, packet] {
                             --m_onAir;
                             Forward(next, packet);
                         });
        break;
    }
    }
}

void
Simulation::Release(NodeId node, NodeId dest)
{
    auto& buf = m_buffers[node];
    std::vector<DataPacket> ready;
    for (auto it = buf.begin(); it != buf.end();)
    {
        if (it->packet.dst == dest)
        {
            ready.push_back(it->packet);
            it = buf.erase(it);
        }
        else
        {
            ++it;
        }
    }
    for (auto& p : ready)
    {
        Forward(node, p);
    }
}

std::uint64_t
Simulation::ProtocolBroadcasts() const
{
    std::uint64_t total = 0;
    for (const auto& a : m_agents)
    {
        total += a->BroadcastsIssued();
    }
    return total;
}

std::uint64_t
Simulation::BufferedPackets() const
{
    std::uint64_t total = 0;
    for (const auto& b : m_buffers)
    {
        total += b.size();
    }
    return total;
}

} // namespace prosim
