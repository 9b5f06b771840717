#include "prosim/traffic.hpp"

#include <doctest.h>

using namespace prosim;

TEST_CASE("cbr schedule counts")
{
    CbrFlow f{0, 1, 4.0, 512, 0.0, 10.0};
    const auto s = ScheduleFlows({f});
    CHECK(s.size() == 40);
    CHECK(s.front().at == 0.0);
    CHECK(s.back().at == doctest::Approx(9.75));
    for (std::size_t i = 1; i < s.size(); ++i)
    {
        CHECK(s[i].at - s[i - 1].at == doctest::Approx(0.25));
    }

    f.start = f.stop = 5.0;
    CHECK(ScheduleFlows({f}).empty());
}

TEST_CASE("two flows interleave deterministically")
{
    const CbrFlow a{0, 1, 2.0, 512, 0.0, 2.0};
    const CbrFlow b{2, 3, 2.0, 512, 0.25, 2.0};
    const auto s = ScheduleFlows({a, b});
    const std::vector<std::size_t> order{0, 1, 0, 1, 0, 1, 0, 1};
    REQUIRE(s.size() == order.size());
    for (std::size_t i = 0; i < s.size(); ++i)
    {
        CHECK(s[i].flow == order[i]);
    }
    CHECK(s == ScheduleFlows({a, b}));

    // Same instant: lower flow index first.
    const auto t = ScheduleFlows({a, a});
    CHECK(t[0].flow == 0);
    CHECK(t[1].flow == 1);
    CHECK(t[0].at == t[1].at);
}

TEST_CASE("flow generation and validation")
{
    RngStream rng(3, StreamLabel::Traffic);
    const auto flows = GenerateFlows(20, 5, 4.0, 512, 10.0, 900.0, rng);
    REQUIRE(flows.size() == 20);
    for (const auto& f : flows)
    {
        CHECK(f.src != f.dst);
        CHECK(f.src < 5);
        CHECK(f.dst < 5);
        CHECK(f.start == 10.0);
    }
    RngStream again(3, StreamLabel::Traffic);
    const auto same = GenerateFlows(20, 5, 4.0, 512, 10.0, 900.0, again);
    for (std::size_t i = 0; i < flows.size(); ++i)
    {
        CHECK(flows[i].src == same[i].src);
        CHECK(flows[i].dst == same[i].dst);
    }

    CHECK_THROWS(CbrFlow({1, 1, 4.0, 512, 0.0, 1.0}).Validate());
    CHECK_THROWS(CbrFlow({0, 1, 0.0, 512, 0.0, 1.0}).Validate());
    CHECK_NOTHROW(CbrFlow({0, 1, 4.0, 512, 0.0, 1.0}).Validate());
}

TEST_CASE("report from a ledger")
{
    MetricsLedger l;
    for (int i = 0; i < 10; ++i)
    {
        l.DataSent(512);
        l.DataDelivered(512, 0.1 * i, 0.1 * i + 0.004096);
    }
    l.ControlTransmitted(ControlKind::OlsrHello, 32);
    l.ControlTransmitted(ControlKind::OlsrTc, 44);
    const auto r = Report(l, 1.0);
    CHECK(r.throughputBps == doctest::Approx(40960.0));
    REQUIRE(r.avgDelay.has_value());
    CHECK(*r.avgDelay == doctest::Approx(0.004096));
    CHECK(*r.nrl == doctest::Approx(0.2));
    CHECK(*r.deliveryRatio == doctest::Approx(1.0));
    CHECK(l.ControlPackets() == 2);
    CHECK(l.ControlBytes() == 76);
    CHECK(l.ControlPackets(ControlKind::OlsrTc) == 1);

    CHECK_THROWS_AS(Report(l, 0.0), std::invalid_argument);
}

TEST_CASE("nothing delivered gives undefined delay and routing load")
{
    MetricsLedger l;
    l.DataSent(512);
    l.DataDropped(DropReason::NoRoute);
    l.ControlTransmitted(ControlKind::DsdvUpdate, 80);
    const auto r = Report(l, 10.0);
    CHECK(r.throughputBps == 0.0);
    CHECK_FALSE(r.avgDelay.has_value());
    CHECK_FALSE(r.nrl.has_value());
    CHECK(*r.deliveryRatio == 0.0);

    const auto empty = Report(MetricsLedger{}, 10.0);
    CHECK_FALSE(empty.deliveryRatio.has_value());
}

TEST_CASE("ledger conservation")
{
    MetricsLedger l;
    for (int i = 0; i < 7; ++i)
    {
        l.DataSent(512);
    }
    l.DataDelivered(512, 0, 1);
    l.DataDropped(DropReason::TtlExpired);
    l.DataDropped(DropReason::BufferedTimeout);
    CHECK(l.Dropped() == 2);
    CHECK(l.Dropped(DropReason::TtlExpired) == 1);
    CHECK(l.InFlight() == 4);
    CHECK(l.Sent() == l.Delivered() + l.Dropped() + l.InFlight());
}
