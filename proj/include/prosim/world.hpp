// Node placement, random-waypoint mobility, unit-disk connectivity and
// broadcast delivery.
#pragma once

#include "prosim/rng.hpp"
#include "prosim/sim_kernel.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

namespace prosim
{

struct Position
{
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Position&, const Position&) = default;
};

double Distance(const Position& a, const Position& b);

struct Area
{
    double width = 1000.0;
    double height = 1000.0;

    bool Contains(const Position& p) const
    {
        return p.x >= 0.0 && p.x <= width && p.y >= 0.0 && p.y <= height;
    }
};

struct MobilityConfig
{
    double speedMin = 1.0; ///< m/s
    double speedMax = 20.0;
    double pause = 0.0; ///< s

    void Validate() const;
};

struct RadioParams
{
    double range = 250.0;         ///< m
    double bandwidth = 2.0e6;     ///< bit/s
    double lossProbability = 0.0; ///< independent per-reception loss

    void Validate() const;
};

/**
 * Piecewise-linear path of one node. Each segment covers [start, end];
 * pause segments have from == to.
 */
class Trajectory
{
  public:
    struct Segment
    {
        SimTime start;
        SimTime end;
        Position from;
        Position to;
        double speed; ///< 0 during pauses
    };

    static Trajectory Static(const Position& p);

    /// Random waypoint: pause, pick a uniform destination and speed, travel, repeat.
    static Trajectory RandomWaypoint(const Position& start,
                                     const Area& area,
                                     const MobilityConfig& cfg,
                                     SimTime horizon,
                                     RngStream& rng);

    /// Builds a trajectory from explicit segments (tests, trace replay).
    explicit Trajectory(std::vector<Segment> segments);

    Position PositionAt(SimTime t) const;

    const std::vector<Segment>& Segments() const { return m_segments; }

  private:
    Trajectory() = default;
    std::vector<Segment> m_segments;
};

/// n independent uniform positions; throws std::invalid_argument on n == 0
/// or a degenerate area.
std::vector<Position> InitPositions(std::size_t n, const Area& area, RngStream& rng);

/// Every other node within `range` (inclusive) of `node`, ascending.
std::vector<NodeId> Neighbors(std::span<const Position> positions, NodeId node, double range);

/// Serialisation delay of `bytes` at `bandwidth` bit/s.
double TxDelay(std::uint32_t bytes, double bandwidth);

/// Sorted neighbour lists, one per node.
using Adjacency = std::vector<std::vector<NodeId>>;

Adjacency ComputeAdjacency(std::span<const Position> positions, double range);

using NodePair = std::pair<NodeId, NodeId>; ///< first < second

struct LinkChanges
{
    std::vector<NodePair> up;
    std::vector<NodePair> down;
};

/// Edges present in only one of the two adjacencies; each pair once.
LinkChanges LinkEvents(const Adjacency& prev, const Adjacency& curr);

struct Arrival
{
    NodeId receiver;
    SimTime at;

    friend bool operator==(const Arrival&, const Arrival&) = default;
};

class World
{
  public:
    World(std::vector<Trajectory> trajectories, RadioParams radio, std::uint64_t seed);

    std::size_t Size() const { return m_trajectories.size(); }
    const RadioParams& Radio() const { return m_radio; }

    Position PositionOf(NodeId node, SimTime t) const;
    std::vector<Position> PositionsAt(SimTime t) const;
    bool InRange(NodeId a, NodeId b, SimTime t) const;
    Adjacency AdjacencyAt(SimTime t) const;

    /**
     * Deliveries of a `bytes`-sized broadcast sent by `sender` at `t`.
     * Receiver membership is evaluated at `t`; every call counts as one
     * transmission even when nobody is in range.
     */
    std::vector<Arrival> Broadcast(NodeId sender, std::uint32_t bytes, SimTime t);

    std::uint64_t BroadcastCount(NodeId sender) const { return m_broadcasts.at(sender); }
    std::uint64_t TotalBroadcasts() const;

    /// True when no trajectory has a moving segment.
    bool IsStatic() const { return m_static; }

    /// Writes `t node x y` lines every `step` seconds up to `horizon`.
    void DumpTrajectories(std::ostream& os, SimTime step, SimTime horizon) const;

  private:
    std::vector<Trajectory> m_trajectories;
    RadioParams m_radio;
    RngStream m_lossRng;
    std::vector<std::uint64_t> m_broadcasts;
    bool m_static = true;
};

} // namespace prosim
