// CBR traffic and the run-level metrics ledger.
#pragma once

#include "prosim/rng.hpp"
#include "prosim/routing.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

namespace prosim
{

struct CbrFlow
{
    NodeId src = 0;
    NodeId dst = 1;
    double rate = 4.0; ///< packets per second
    std::uint32_t size = 512;
    SimTime start = 0.0;
    SimTime stop = 0.0;

    void Validate() const;
};

struct TrafficSend
{
    SimTime at;
    std::size_t flow; ///< index into the flow list

    friend bool operator==(const TrafficSend&, const TrafficSend&) = default;
};

/// `count` flows between distinct random (src, dst) pairs.
std::vector<CbrFlow> GenerateFlows(std::size_t count,
                                   std::size_t nodes,
                                   double rate,
                                   std::uint32_t size,
                                   SimTime start,
                                   SimTime stop,
                                   RngStream& rng);

/// Every send of every flow: start, start + 1/rate, ... strictly before stop,
/// ordered by (time, flow index).
std::vector<TrafficSend> ScheduleFlows(const std::vector<CbrFlow>& flows);

/// Counts of data and control traffic for one run.
class MetricsLedger
{
  public:
    void DataSent(std::uint32_t bytes);
    void DataDelivered(std::uint32_t bytes, SimTime sentAt, SimTime deliveredAt);
    void DataDropped(DropReason reason);
    void ControlTransmitted(ControlKind kind, std::uint32_t bytes);

    std::uint64_t Sent() const { return m_sent; }
    std::uint64_t Delivered() const { return m_delivered; }
    std::uint64_t DeliveredBytes() const { return m_deliveredBytes; }
    std::uint64_t Dropped() const;
    std::uint64_t Dropped(DropReason reason) const
    {
        return m_dropped[static_cast<std::size_t>(reason)];
    }
    /// sent - delivered - dropped.
    std::uint64_t InFlight() const { return m_sent - m_delivered - Dropped(); }

    std::uint64_t ControlPackets() const;
    std::uint64_t ControlBytes() const;
    std::uint64_t ControlPackets(ControlKind kind) const
    {
        return m_ctrlPackets[static_cast<std::size_t>(kind)];
    }
    std::uint64_t ControlBytes(ControlKind kind) const
    {
        return m_ctrlBytes[static_cast<std::size_t>(kind)];
    }

    /// (send time, delivery time) of each delivered packet, in delivery order.
    const std::vector<std::pair<SimTime, SimTime>>& Latencies() const { return m_latencies; }

  private:
    std::uint64_t m_sent = 0;
    std::uint64_t m_delivered = 0;
    std::uint64_t m_deliveredBytes = 0;
    std::array<std::uint64_t, kDropReasonCount> m_dropped{};
    std::array<std::uint64_t, kControlKindCount> m_ctrlPackets{};
    std::array<std::uint64_t, kControlKindCount> m_ctrlBytes{};
    std::vector<std::pair<SimTime, SimTime>> m_latencies;
};

/**
 * Run summary. Delay and routing load are undefined (empty) when nothing
 * was delivered; a 0 there would read as a perfect result.
 */
struct MetricsReport
{
    double throughputBps = 0.0;
    std::optional<double> avgDelay;
    std::optional<double> nrl;      ///< control packets per delivered data packet
    std::optional<double> nrlBytes; ///< control bytes per delivered data byte
    std::optional<double> deliveryRatio;
};

/// Throws std::invalid_argument when duration <= 0.
MetricsReport Report(const MetricsLedger& ledger, double duration);

} // namespace prosim
