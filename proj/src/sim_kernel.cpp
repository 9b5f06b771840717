#include "prosim/sim_kernel.hpp"

#include <sstream>

namespace prosim
{

const char*
ToString(EventKind kind)
{
    switch (kind)
    {
    case EventKind::Timer:
        return "timer";
    case EventKind::PacketArrival:
        return "packet-arrival";
    case EventKind::MobilityStep:
        return "mobility-step";
    case EventKind::TrafficSend:
        return "traffic-send";
    }
    return "?";
}

static std::string
DescribeFault(SimTime clock, const std::string& what)
{
    std::ostringstream os;
    os.precision(12);
    os << "event dispatch failed at t=" << clock << ": " << what;
    return os.str();
}

DispatchError::DispatchError(SimTime clock, const std::string& what)
    : std::runtime_error(DescribeFault(clock, what)),
      m_clock(clock)
{
}

EventHandle
EventQueue::Schedule(SimTime at, EventKind kind, NodeId target, std::function<void()> action)
{
    if (!(at >= m_now))
    {
        std::ostringstream os;
        os.precision(12);
        os << "cannot schedule at t=" << at << " before current clock " << m_now;
        throw SchedulingError(os.str());
    }
    Event ev;
    ev.fireAt = at;
    ev.seq = m_nextSeq++;
    ev.target = target;
    ev.kind = kind;
    ev.action = std::move(action);
    m_live.insert(ev.seq);
    EventHandle handle{ev.seq};
    m_heap.push(std::move(ev));
    return handle;
}

bool
EventQueue::Cancel(EventHandle handle)
{
    // Cancelled entries stay in the heap and are skipped when popped.
    return m_live.erase(handle.seq) > 0;
}

std::uint64_t
EventQueue::Run(SimTime until, const Dispatcher& dispatcher)
{
    if (until < m_now)
    {
        throw SchedulingError("run horizon lies before the current clock");
    }
    std::uint64_t processed = 0;
    while (!m_heap.empty() && m_heap.top().fireAt <= until)
    {
        // priority_queue::top is const; the event is moved out before pop.
        Event ev = std::move(const_cast<Event&>(m_heap.top()));
        m_heap.pop();
        if (m_live.erase(ev.seq) == 0)
        {
            continue;
        }
        m_now = ev.fireAt;
        try
        {
            if (dispatcher)
            {
                dispatcher(ev);
            }
            else if (ev.action)
            {
                ev.action();
            }
        }
        catch (const DispatchError&)
        {
            throw;
        }
        catch (const std::exception& e)
        {
            throw DispatchError(m_now, e.what());
        }
        ++processed;
    }
    m_now = until;
    return processed;
}

} // namespace prosim
