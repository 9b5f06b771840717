// Small-graph helpers shared by the MPR tests and the acceptance suite.
#pragma once

#include "prosim/olsr.hpp"

#include <random>
#include <set>
#include <vector>

namespace prosim::test
{

using Graph = std::vector<std::vector<NodeId>>;

/// Graph on n nodes whose edge set is the bit pattern `mask` over pairs (i < j).
inline Graph
GraphFromMask(std::size_t n, std::uint64_t mask)
{
    Graph g(n);
    int bit = 0;
    for (NodeId i = 0; i < n; ++i)
    {
        for (NodeId j = i + 1; j < n; ++j, ++bit)
        {
            if ((mask >> bit) & 1U)
            {
                g[i].push_back(j);
                g[j].push_back(i);
            }
        }
    }
    return g;
}

inline bool
Connected(const Graph& g)
{
    std::vector<bool> seen(g.size(), false);
    std::vector<NodeId> st{0};
    seen[0] = true;
    std::size_t count = 1;
    while (!st.empty())
    {
        const NodeId u = st.back();
        st.pop_back();
        for (NodeId v : g[u])
        {
            if (!seen[v])
            {
                seen[v] = true;
                ++count;
                st.push_back(v);
            }
        }
    }
    return count == g.size();
}

/// Random connected graph: a random spanning tree plus extra edges with probability p.
inline Graph
RandomConnectedGraph(std::size_t n, double p, std::mt19937_64& gen)
{
    std::vector<std::set<NodeId>> adj(n);
    for (NodeId v = 1; v < n; ++v)
    {
        const auto u = static_cast<NodeId>(std::uniform_int_distribution<std::size_t>(0, v - 1)(gen));
        adj[u].insert(v);
        adj[v].insert(u);
    }
    std::bernoulli_distribution extra(p);
    for (NodeId i = 0; i < n; ++i)
    {
        for (NodeId j = i + 1; j < n; ++j)
        {
            if (extra(gen))
            {
                adj[i].insert(j);
                adj[j].insert(i);
            }
        }
    }
    Graph g(n);
    for (NodeId i = 0; i < n; ++i)
    {
        g[i].assign(adj[i].begin(), adj[i].end());
    }
    return g;
}

inline std::vector<std::pair<NodeId, NodeId>>
TwoHopPairs(const Graph& g, NodeId self)
{
    std::vector<std::pair<NodeId, NodeId>> pairs;
    for (NodeId n : g[self])
    {
        for (NodeId t : g[n])
        {
            pairs.emplace_back(n, t);
        }
    }
    return pairs;
}

/// Strict 2-hop set: nodes at distance exactly 2.
inline std::set<NodeId>
StrictTwoHop(const Graph& g, NodeId self)
{
    std::set<NodeId> one(g[self].begin(), g[self].end());
    std::set<NodeId> two;
    for (NodeId n : g[self])
    {
        for (NodeId t : g[n])
        {
            if (t != self && one.count(t) == 0)
            {
                two.insert(t);
            }
        }
    }
    return two;
}

inline std::set<NodeId>
MprsOf(const Graph& g, NodeId self, std::uint8_t willingness = 3)
{
    std::map<NodeId, std::uint8_t> sym;
    for (NodeId n : g[self])
    {
        sym[n] = willingness;
    }
    return SelectMprs(sym, TwoHopPairs(g, self), self);
}

inline bool
Covers(const Graph& g, NodeId self, const std::set<NodeId>& mprs)
{
    std::set<NodeId> covered;
    for (NodeId m : mprs)
    {
        covered.insert(g[m].begin(), g[m].end());
    }
    for (NodeId t : StrictTwoHop(g, self))
    {
        if (covered.count(t) == 0)
        {
            return false;
        }
    }
    return true;
}

/// Size of the smallest neighbour subset covering the strict 2-hop set.
inline std::size_t
MinimumCoverSize(const Graph& g, NodeId self)
{
    const auto& nbrs = g[self];
    std::size_t best = nbrs.size();
    for (std::uint64_t mask = 0; mask < (1ULL << nbrs.size()); ++mask)
    {
        std::set<NodeId> pick;
        for (std::size_t i = 0; i < nbrs.size(); ++i)
        {
            if ((mask >> i) & 1U)
            {
                pick.insert(nbrs[i]);
            }
        }
        if (pick.size() < best && Covers(g, self, pick))
        {
            best = pick.size();
        }
    }
    return best;
}

} // namespace prosim::test
