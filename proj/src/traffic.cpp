#include "prosim/traffic.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace prosim
{

void
CbrFlow::Validate() const
{
    if (src == dst)
    {
        throw std::invalid_argument("a flow needs distinct endpoints");
    }
    if (!(rate > 0.0))
    {
        throw std::invalid_argument("flow rate must be positive");
    }
}

std::vector<CbrFlow>
GenerateFlows(std::size_t count,
              std::size_t nodes,
              double rate,
              std::uint32_t size,
              SimTime start,
              SimTime stop,
              RngStream& rng)
{
    std::vector<CbrFlow> flows;
    if (count == 0)
    {
        return flows;
    }
    if (nodes < 2)
    {
        throw std::invalid_argument("flows need at least two nodes");
    }
    for (std::size_t i = 0; i < count; ++i)
    {
        CbrFlow f;
        f.src = static_cast<NodeId>(rng.Below(nodes));
        f.dst = static_cast<NodeId>(rng.Below(nodes - 1));
        if (f.dst >= f.src)
        {
            ++f.dst;
        }
        f.rate = rate;
        f.size = size;
        f.start = start;
        f.stop = stop;
        f.Validate();
        flows.push_back(f);
    }
    return flows;
}

std::vector<TrafficSend>
ScheduleFlows(const std::vector<CbrFlow>& flows)
{
    std::vector<TrafficSend> out;
    for (std::size_t i = 0; i < flows.size(); ++i)
    {
        const auto& f = flows[i];
        f.Validate();
        for (std::uint64_t k = 0;; ++k)
        {
            // Multiplying instead of accumulating keeps send times exact.
            const SimTime t = f.start + static_cast<double>(k) / f.rate;
            if (!(t < f.stop))
            {
                break;
            }
            out.push_back({t, i});
        }
    }
    std::stable_sort(out.begin(), out.end(), [](const TrafficSend& a, const TrafficSend& b) {
        return a.at < b.at || (a.at == b.at && a.flow < b.flow);
    });
    return out;
}

void
MetricsLedger::DataSent(std::uint32_t)
{
    ++m_sent;
}

void
MetricsLedger::DataDelivered(std::uint32_t bytes, SimTime sentAt, SimTime deliveredAt)
{
    ++m_delivered;
    m_deliveredBytes += bytes;
    m_latencies.emplace_back(sentAt, deliveredAt);
}

void
MetricsLedger::DataDropped(DropReason reason)
{
    ++m_dropped[static_cast<std::size_t>(reason)];
}

void
MetricsLedger::ControlTransmitted(ControlKind kind, std::uint32_t bytes)
{
    ++m_ctrlPackets[static_cast<std::size_t>(kind)];
    m_ctrlBytes[static_cast<std::size_t>(kind)] += bytes;
}

std::uint64_t
MetricsLedger::Dropped() const
{
    return std::accumulate(m_dropped.begin(), m_dropped.end(), std::uint64_t{0});
}

std::uint64_t
MetricsLedger::ControlPackets() const
{
    return std::accumulate(m_ctrlPackets.begin(), m_ctrlPackets.end(), std::uint64_t{0});
}

std::uint64_t
MetricsLedger::ControlBytes() const
{
    return std::accumulate(m_ctrlBytes.begin(), m_ctrlBytes.end(), std::uint64_t{0});
}

MetricsReport
Report(const MetricsLedger& ledger, double duration)
{
    if (!(duration > 0.0))
    {
        throw std::invalid_argument("report duration must be positive");
    }
    MetricsReport r;
    r.throughputBps = static_cast<double>(ledger.DeliveredBytes()) * 8.0 / duration;
    if (ledger.Sent() > 0)
    {
        r.deliveryRatio = static_cast<double>(ledger.Delivered()) / static_cast<double>(ledger.Sent());
    }
    if (ledger.Delivered() > 0)
    {
        double sum = 0.0;
        for (const auto& [s, d] : ledger.Latencies())
        {
            sum += d - s;
        }
        const auto delivered = static_cast<double>(ledger.Delivered());
        r.avgDelay = sum / delivered;
        r.nrl = static_cast<double>(ledger.ControlPackets()) / delivered;
        r.nrlBytes = static_cast<double>(ledger.ControlBytes()) /
                     static_cast<double>(ledger.DeliveredBytes());
    }
    return r;
}

} // namespace prosim
