// Discrete-event core: clock, ordered event queue, node identifiers.
#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <queue>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

namespace prosim
{

/// Simulation time in seconds.
using SimTime = double;

/// Node identifier in [0, n).
using NodeId = std::uint32_t;

inline constexpr NodeId kNoNode = std::numeric_limits<NodeId>::max();

enum class EventKind : std::uint8_t
{
    Timer,
    PacketArrival,
    MobilityStep,
    TrafficSend,
};

const char* ToString(EventKind kind);

/**
 * A scheduled action. (fireAt, seq) is a total order over every event a
 * queue ever held; seq is the insertion counter.
 */
struct Event
{
    SimTime fireAt = 0.0;
    std::uint64_t seq = 0;
    NodeId target = kNoNode; ///< kNoNode addresses the world itself
    EventKind kind = EventKind::Timer;
    std::function<void()> action;
};

struct EventHandle
{
    std::uint64_t seq = 0;
    bool IsValid() const { return seq != 0; }
};

class SchedulingError : public std::logic_error
{
  public:
    using std::logic_error::logic_error;
};

/// Raised when a dispatched event throws; the message carries the clock.
class DispatchError : public std::runtime_error
{
  public:
    DispatchError(SimTime clock, const std::string& what);
    SimTime Clock() const { return m_clock; }

  private:
    SimTime m_clock;
};

class EventQueue
{
  public:
    using Dispatcher = std::function<void(Event&)>;

    SimTime Now() const { return m_now; }

    /// Enqueue an event; throws SchedulingError when `at` lies before Now().
    EventHandle Schedule(SimTime at,
                         EventKind kind,
                         NodeId target,
                         std::function<void()> action);

    /// True iff the event existed and had neither fired nor been cancelled.
    bool Cancel(EventHandle handle);

    /**
     * Dispatch every pending event with fireAt <= until in (fireAt, seq)
     * order, then set the clock to `until`. The default dispatcher invokes
     * the event's action.
     */
    std::uint64_t Run(SimTime until, const Dispatcher& dispatcher = {});

    std::size_t Pending() const { return m_live.size(); }

  private:
    struct Later
    {
        bool operator()(const Event& a, const Event& b) const
        {
            if (a.fireAt != b.fireAt)
            {
                return a.fireAt > b.fireAt;
            }
            return a.seq > b.seq;
        }
    };

    SimTime m_now = 0.0;
    std::uint64_t m_nextSeq = 1;
    std::priority_queue<Event, std::vector<Event>, Later> m_heap;
    std::unordered_set<std::uint64_t> m_live;
};

} // namespace prosim
