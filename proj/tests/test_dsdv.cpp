#include "prosim/dsdv.hpp"
#include "support.hpp"

#include <doctest.h>

using namespace prosim;
using prosim::test::FakeContext;

namespace
{

RouteEntry
Cand(std::uint64_t seq, std::uint32_t metric)
{
    return RouteEntry{9, 1, metric, seq, 0.0};
}

const std::vector<DsdvAdvert>&
Adverts(const ControlPacket& p)
{
    return std::get<std::vector<DsdvAdvert>>(p.payload);
}

} // namespace

TEST_CASE("sequence-number comparison")
{
    const RouteEntry existing = Cand(100, 3);
    CHECK(DsdvCompare(Cand(102, 5), &existing) == DsdvVerdict::Replace);
    CHECK(DsdvCompare(Cand(100, 2), &existing) == DsdvVerdict::Replace);
    CHECK(DsdvCompare(Cand(100, 3), &existing) == DsdvVerdict::Keep);
    CHECK(DsdvCompare(Cand(98, 1), &existing) == DsdvVerdict::Keep);
    CHECK(DsdvCompare(Cand(101, kInfiniteMetric), &existing) == DsdvVerdict::Replace);
    CHECK(DsdvCompare(Cand(4, 7), nullptr) == DsdvVerdict::Replace);
}

TEST_CASE("periodic rounds: full dumps and incremental updates")
{
    FakeContext ctx(0, 10);
    ctx.neighbors = {1};
    Dsdv d(ctx);
    ctx.now = 1.0;
    d.ApplyUpdate({{1, 0, 2}, {2, 1, 4}, {3, 2, 6}, {4, 3, 8}}, 1);
    CHECK(d.Table().Size() == 5);

    // Rounds 1..3 incremental; the first one carries the four new routes.
    auto p1 = d.BuildPeriodic(1);
    CHECK(Adverts(p1).size() == 5);
    auto p2 = d.BuildPeriodic(2);
    REQUIRE(Adverts(p2).size() == 1);
    CHECK(Adverts(p2)[0].dest == 0);
    CHECK(p2.size == 32);

    auto full = d.BuildPeriodic(4);
    CHECK(Adverts(full).size() == 5);
    CHECK(full.size == 20 + 5 * 12);
    CHECK_FALSE(full.triggered);
}

TEST_CASE("own sequence number advances by two each round")
{
    FakeContext ctx(0, 3);
    Dsdv d(ctx);
    d.OnStart();
    REQUIRE(ctx.timers.size() == 1);
    CHECK(ctx.timers[0].first == 0.0);
    d.OnTimer(Dsdv::kPeriodic);
    d.OnTimer(Dsdv::kPeriodic);
    REQUIRE(ctx.sent.size() == 2);
    CHECK(Adverts(ctx.sent[0])[0].seq == 2);
    CHECK(Adverts(ctx.sent[1])[0].seq == 4);
    CHECK(d.Rounds() == 2);
    CHECK(d.BroadcastsIssued() == 2);
}

TEST_CASE("link down breaks routes through the lost neighbour")
{
    FakeContext ctx(0, 10);
    ctx.neighbors = {1, 2};
    Dsdv d(ctx);
    d.ApplyUpdate({{1, 0, 10}, {5, 2, 100}, {6, 1, 20}}, 1);
    d.ApplyUpdate({{2, 0, 10}}, 2);

    auto none = d.BreakLinksVia(7);
    CHECK_FALSE(none.has_value());

    auto trig = d.BreakLinksVia(1);
    REQUIRE(trig.has_value());
    CHECK(trig->triggered);
    // Routes to 1, 5 and 6 all went via 1: one packet, three entries.
    const auto& a = Adverts(*trig);
    REQUIRE(a.size() == 3);
    for (const auto& x : a)
    {
        CHECK(x.metric == kInfiniteMetric);
        CHECK(x.seq % 2 == 1);
    }
    CHECK(std::find(a.begin(), a.end(), DsdvAdvert{5, kInfiniteMetric, 101}) != a.end());
    CHECK_FALSE(d.Table().NextHop(5).has_value());
    CHECK(d.Table().NextHop(2) == NodeId{2});
    CHECK(d.TriggeredSent() == 1);
}

TEST_CASE("settling time gates re-advertisement of same-seq improvements")
{
    FakeContext ctx(0, 10);
    ctx.neighbors = {1, 2};
    Dsdv d(ctx);
    d.ApplyUpdate({{9, 3, 100}}, 1);
    d.BuildPeriodic(1);

    ctx.now = 10.0;
    d.ApplyUpdate({{9, 1, 100}}, 2);
    // Forwarding uses the better route at once.
    CHECK(d.Table().NextHop(9) == NodeId{2});
    CHECK(d.Table().Find(9)->metric == 2);

    ctx.now = 12.0;
    auto inc = d.BuildPeriodic(2);
    for (const auto& a : Adverts(inc))
    {
        CHECK(a.dest != 9);
    }
    auto full = d.BuildPeriodic(4);
    const auto& fa = Adverts(full);
    auto it = std::find_if(fa.begin(), fa.end(), [](const DsdvAdvert& a) { return a.dest == 9; });
    REQUIRE(it != fa.end());
    CHECK(it->metric == 4);

    ctx.now = 15.5;
    auto after = d.BuildPeriodic(5);
    const auto& aa = Adverts(after);
    it = std::find_if(aa.begin(), aa.end(), [](const DsdvAdvert& a) { return a.dest == 9; });
    REQUIRE(it != aa.end());
    CHECK(it->metric == 2);
}

TEST_CASE("updates: stale, newer and breakage propagation")
{
    FakeContext ctx(0, 10);
    ctx.neighbors = {1, 2};
    Dsdv d(ctx);
    d.ApplyUpdate({{9, 2, 100}}, 1);
    REQUIRE(ctx.installed == std::vector<NodeId>{9});

    const auto before = d.Table();
    CHECK_FALSE(d.ApplyUpdate({{9, 0, 98}}, 2).has_value());
    CHECK(d.Table() == before);

    auto trig = d.ApplyUpdate({{9, kInfiniteMetric, 101}}, 1);
    REQUIRE(trig.has_value());
    CHECK(Adverts(*trig) == std::vector<DsdvAdvert>{{9, kInfiniteMetric, 101}});
    CHECK_FALSE(d.Table().NextHop(9).has_value());

    // Destination's next even number repairs the route and releases data.
    d.ApplyUpdate({{9, 1, 102}}, 2);
    CHECK(d.Table().NextHop(9) == NodeId{2});
    CHECK(ctx.installed == std::vector<NodeId>{9, 9});

    // A broken route we never had is ignored.
    CHECK_FALSE(d.ApplyUpdate({{7, kInfiniteMetric, 5}}, 1).has_value());
    CHECK(d.Table().Find(7) == nullptr);
}

TEST_CASE("a node outbids a broken route to itself")
{
    FakeContext ctx(0, 4);
    ctx.neighbors = {1};
    Dsdv d(ctx);
    d.ApplyUpdate({{0, kInfiniteMetric, 7}}, 1);
    CHECK(d.Table().Find(0)->seq == 8);
    auto p = d.BuildPeriodic(1);
    CHECK(Adverts(p)[0] == DsdvAdvert{0, 0, 8});
}

TEST_CASE("control from a non-neighbour is ignored")
{
    FakeContext ctx(0, 4);
    ctx.neighbors = {1};
    Dsdv d(ctx);
    const auto pkt = ControlPacket::Make(3, 1, std::vector<DsdvAdvert>{{3, 0, 2}}, ControlSizing{});
    d.OnControl(pkt, 3);
    CHECK(d.Table().Find(3) == nullptr);
    d.OnControl(ControlPacket::Make(1, 1, std::vector<DsdvAdvert>{{1, 0, 2}}, ControlSizing{}), 1);
    CHECK(d.Table().NextHop(1) == NodeId{1});
}

TEST_CASE("installed sequence numbers never decrease")
{
    FakeContext ctx(0, 6);
    ctx.neighbors = {1, 2, 3};
    Dsdv d(ctx);
    std::map<NodeId, std::uint64_t> last;
    std::uint64_t s = 12345;
    for (int i = 0; i < 2000; ++i)
    {
        s = s * 6364136223846793005ULL + 1442695040888963407ULL;
        const NodeId from = 1 + static_cast<NodeId>((s >> 33) % 3);
        const NodeId dest = 4 + static_cast<NodeId>((s >> 40) % 2);
        const std::uint64_t seq = (s >> 20) % 50;
        const std::uint32_t metric = (seq % 2 == 1) ? kInfiniteMetric : static_cast<std::uint32_t>((s >> 50) % 6);
        ctx.now += 0.5;
        d.ApplyUpdate({{dest, metric, seq}}, from);
        if (const auto* r = d.Table().Find(dest))
        {
            CHECK(r->seq >= last[dest]);
            last[dest] = r->seq;
        }
        if (i % 7 == 0)
        {
            d.BreakLinksVia(from);
        }
    }
}
