// Shared helpers for the unit tests.
#pragma once

#include "prosim/routing.hpp"

#include <deque>
#include <map>
#include <vector>

namespace prosim::test
{

/// Records everything an agent asks of its node.
class FakeContext : public NodeContext
{
  public:
    FakeContext(NodeId self, std::size_t n)
        : self(self),
          n(n)
    {
    }

    NodeId Self() const override { return self; }
    std::size_t NetworkSize() const override { return n; }
    SimTime Now() const override { return now; }
    void Broadcast(ControlPacket packet) override { sent.push_back(std::move(packet)); }
    EventHandle ScheduleTimer(SimTime delay, TimerLabel label) override
    {
        timers.push_back({now + delay, label});
        return {++nextHandle};
    }
    bool CancelTimer(EventHandle) override { return true; }
    const std::vector<NodeId>& LinkNeighbors() const override { return neighbors; }
    void RouteInstalled(NodeId dest) override { installed.push_back(dest); }

    NodeId self;
    std::size_t n;
    SimTime now = 0.0;
    std::vector<NodeId> neighbors;
    std::vector<ControlPacket> sent;
    std::vector<std::pair<SimTime, TimerLabel>> timers;
    std::vector<NodeId> installed;
    std::uint64_t nextHandle = 0;
};

/// Hop distances from `src` over an adjacency list; -1 for unreachable.
inline std::vector<int>
BfsDistances(const std::vector<std::vector<NodeId>>& adj, NodeId src)
{
    std::vector<int> dist(adj.size(), -1);
    std::deque<NodeId> q{src};
    dist[src] = 0;
    while (!q.empty())
    {
        const NodeId u = q.front();
        q.pop_front();
        for (NodeId v : adj[u])
        {
            if (dist[v] < 0)
            {
                dist[v] = dist[u] + 1;
                q.push_back(v);
            }
        }
    }
    return dist;
}

inline std::vector<std::vector<NodeId>>
Chain(std::size_t n)
{
    std::vector<std::vector<NodeId>> adj(n);
    for (NodeId i = 0; i + 1 < n; ++i)
    {
        adj[i].push_back(i + 1);
        adj[i + 1].push_back(i);
    }
    return adj;
}

} // namespace prosim::test
