#include "prosim/world.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace prosim
{

double
Distance(const Position& a, const Position& b)
{
    return std::hypot(a.x - b.x, a.y - b.y);
}

void
MobilityConfig::Validate() const
{
    if (!(speedMin >= 0.0) || !(speedMax >= speedMin))
    {
        throw std::invalid_argument("mobility requires 0 <= speed_min <= speed_max");
    }
    if (!(pause >= 0.0))
    {
        throw std::invalid_argument("mobility pause must be non-negative");
    }
}

void
RadioParams::Validate() const
{
    if (!(range > 0.0))
    {
        throw std::invalid_argument("radio range must be positive");
    }
    if (!(bandwidth > 0.0))
    {
        throw std::invalid_argument("bandwidth must be positive");
    }
    if (!(lossProbability >= 0.0 && lossProbability < 1.0))
    {
        throw std::invalid_argument("loss probability must lie in [0, 1)");
    }
}

Trajectory::Trajectory(std::vector<Segment> segments)
    : m_segments(std::move(segments))
{
    if (m_segments.empty())
    {
        throw std::invalid_argument("trajectory needs at least one segment");
    }
}

Trajectory
Trajectory::Static(const Position& p)
{
    return Trajectory({Segment{0.0, 0.0, p, p, 0.0}});
}

Trajectory
Trajectory::RandomWaypoint(const Position& start,
                           const Area& area,
                           const MobilityConfig& cfg,
                           SimTime horizon,
                           RngStream& rng)
{
    cfg.Validate();
    std::vector<Segment> segs;
    Position here = start;
    SimTime t = 0.0;
    while (t < horizon)
    {
        if (cfg.pause > 0.0)
        {
            segs.push_back(Segment{t, t + cfg.pause, here, here, 0.0});
            t += cfg.pause;
            if (t >= horizon)
            {
                break;
            }
        }
        const Position dest{rng.Uniform(0.0, area.width), rng.Uniform(0.0, area.height)};
        const double speed = rng.Uniform(cfg.speedMin, cfg.speedMax);
        if (speed <= 0.0)
        {
            // A zero-speed draw never reaches its waypoint.
            break;
        }
        const double travel = Distance(here, dest) / speed;
        segs.push_back(Segment{t, t + travel, here, dest, speed});
        t += travel;
        here = dest;
    }
    if (segs.empty())
    {
        segs.push_back(Segment{0.0, 0.0, start, start, 0.0});
    }
    return Trajectory(std::move(segs));
}

Position
Trajectory::PositionAt(SimTime t) const
{
    // Last segment whose start is <= t.
    auto it = std::upper_bound(m_segments.begin(),
                               m_segments.end(),
                               t,
                               [](SimTime v, const Segment& s) { return v < s.start; });
    if (it == m_segments.begin())
    {
        return m_segments.front().from;
    }
    const Segment& s = *std::prev(it);
    if (t >= s.end || s.end <= s.start)
    {
        return s.to;
    }
    const double f = (t - s.start) / (s.end - s.start);
    return Position{s.from.x + f * (s.to.x - s.from.x), s.from.y + f * (s.to.y - s.from.y)};
}

std::vector<Position>
InitPositions(std::size_t n, const Area& area, RngStream& rng)
{
    if (n == 0)
    {
        throw std::invalid_argument("need at least one node");
    }
    if (!(area.width > 0.0) || !(area.height > 0.0))
    {
        throw std::invalid_argument("placement area must have positive width and height");
    }
    std::vector<Position> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
    {
        const double x = rng.Uniform(0.0, area.width);
        const double y = rng.Uniform(0.0, area.height);
        out.push_back({x, y});
    }
    return out;
}

std::vector<NodeId>
Neighbors(std::span<const Position> positions, NodeId node, double range)
{
    std::vector<NodeId> out;
    const Position& p = positions[node];
    for (NodeId j = 0; j < positions.size(); ++j)
    {
        if (j != node && Distance(p, positions[j]) <= range)
        {
            out.push_back(j);
        }
    }
    return out;
}

double
TxDelay(std::uint32_t bytes, double bandwidth)
{
    return static_cast<double>(bytes) * 8.0 / bandwidth;
}

Adjacency
ComputeAdjacency(std::span<const Position> positions, double range)
{
    const std::size_t n = positions.size();
    Adjacency adj(n);
    const double r2 = range * range;
    for (NodeId i = 0; i < n; ++i)
    {
        for (NodeId j = i + 1; j < n; ++j)
        {
            const double dx = positions[i].x - positions[j].x;
            const double dy = positions[i].y - positions[j].y;
            if (dx * dx + dy * dy <= r2)
            {
                adj[i].push_back(j);
                adj[j].push_back(i);
            }
        }
    }
    // j ascends in the inner loop and all i < j come first, so lists are sorted.
    return adj;
}

LinkChanges
LinkEvents(const Adjacency& prev, const Adjacency& curr)
{
    if (prev.size() != curr.size())
    {
        throw std::invalid_argument("adjacencies cover different node sets");
    }
    LinkChanges out;
    for (NodeId i = 0; i < prev.size(); ++i)
    {
        std::vector<NodeId> diff;
        std::set_difference(prev[i].begin(), prev[i].end(),
                            curr[i].begin(), curr[i].end(),
                            std::back_inserter(diff));
        for (NodeId j : diff)
        {
            if (i < j)
            {
                out.down.emplace_back(i, j);
            }
        }
        diff.clear();
        std::set_difference(curr[i].begin(), curr[i].end(),
                            prev[i].begin(), prev[i].end(),
                            std::back_inserter(diff));
        for (NodeId j : diff)
        {
            if (i < j)
            {
                out.up.emplace_back(i, j);
            }
        }
    }
    return out;
}

World::World(std::vector<Trajectory> trajectories, RadioParams radio, std::uint64_t seed)
    : m_trajectories(std::move(trajectories)),
      m_radio(radio),
      m_lossRng(seed, StreamLabel::Channel),
      m_broadcasts(m_trajectories.size(), 0)
{
    m_radio.Validate();
    for (const auto& tr : m_trajectories)
    {
        for (const auto& s : tr.Segments())
        {
            if (s.from != s.to)
            {
                m_static = false;
            }
        }
    }
}

Position
World::PositionOf(NodeId node, SimTime t) const
{
    return m_trajectories.at(node).PositionAt(t);
}

std::vector<Position>
World::PositionsAt(SimTime t) const
{
    std::vector<Position> out;
    out.reserve(m_trajectories.size());
    for (const auto& tr : m_trajectories)
    {
        out.push_back(tr.PositionAt(t));
    }
    return out;
}

bool
World::InRange(NodeId a, NodeId b, SimTime t) const
{
    return a != b && Distance(PositionOf(a, t), PositionOf(b, t)) <= m_radio.range;
}

Adjacency
World::AdjacencyAt(SimTime t) const
{
    const auto pos = PositionsAt(t);
    return ComputeAdjacency(pos, m_radio.range);
}

std::vector<Arrival>
World::Broadcast(NodeId sender, std::uint32_t bytes, SimTime t)
{
    ++m_broadcasts.at(sender);
    const SimTime at = t + TxDelay(bytes, m_radio.bandwidth);
    const Position p = PositionOf(sender, t);
    std::vector<Arrival> out;
    for (NodeId j = 0; j < m_trajectories.size(); ++j)
    {
        if (j == sender || Distance(p, PositionOf(j, t)) > m_radio.range)
        {
            continue;
        }
        if (m_radio.lossProbability > 0.0 && m_lossRng.Uniform() < m_radio.lossProbability)
        {
            continue;
        }
        out.push_back({j, at});
    }
    return out;
}

std::uint64_t
World::TotalBroadcasts() const
{
    return std::accumulate(m_broadcasts.begin(), m_broadcasts.end(), std::uint64_t{0});
}

void
World::DumpTrajectories(std::ostream& os, SimTime step, SimTime horizon) const
{
    const auto steps = static_cast<std::uint64_t>(std::floor(horizon / step + 1e-9));
    for (std::uint64_t k = 0; k <= steps; ++k)
    {
        const SimTime t = static_cast<double>(k) * step;
        for (NodeId i = 0; i < m_trajectories.size(); ++i)
        {
            const Position p = PositionOf(i, t);
            os << t << ' ' << i << ' ' << p.x << ' ' << p.y << '\n';
        }
    }
}

} // namespace prosim
