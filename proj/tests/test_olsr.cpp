#include "prosim/olsr.hpp"
#include "graphs.hpp"
#include "support.hpp"

#include <doctest.h>

using namespace prosim;
using prosim::test::FakeContext;

namespace
{

// A=0, B=1, C=2, D=3, E=4
constexpr NodeId A = 0, B = 1, C = 2, D = 3, E = 4;

HelloBody
Hello(std::vector<HelloLink> links, std::uint8_t willingness = 3)
{
    HelloBody h;
    h.willingness = willingness;
    h.links = std::move(links);
    return h;
}

ControlPacket
Tc(NodeId origin, std::uint64_t seq, std::vector<NodeId> selectors)
{
    return ControlPacket::Make(origin, seq, TcBody{seq, std::move(selectors)}, ControlSizing{});
}

} // namespace

TEST_CASE("hello handshake and 2-hop discovery")
{
    OlsrState s;
    OlsrOnHello(s, A, Hello({}), B, 1.0);
    REQUIRE(s.neighbors.count(B) == 1);
    CHECK_FALSE(s.neighbors.at(B).symmetric);
    CHECK(s.SymmetricNeighbors().empty());

    OlsrOnHello(s, A, Hello({{A, LinkStatus::Asymmetric}}), B, 2.0);
    CHECK(s.neighbors.at(B).symmetric);
    CHECK(s.neighbors.at(B).lastHeard == 2.0);

    OlsrOnHello(s, A, Hello({{A, LinkStatus::Symmetric}, {C, LinkStatus::Symmetric}}), B, 3.0);
    REQUIRE(s.twoHop.size() == 1);
    CHECK(s.twoHop[0].neighbor == B);
    CHECK(s.twoHop[0].twoHop == C);
    CHECK(s.mprSelectors.empty());

    // Being named MPR makes B a selector; a later plain listing withdraws it.
    OlsrOnHello(s, A, Hello({{A, LinkStatus::Mpr}, {C, LinkStatus::Symmetric}}), B, 4.0);
    CHECK(s.SelectorSet() == std::set<NodeId>{B});
    OlsrOnHello(s, A, Hello({{A, LinkStatus::Symmetric}}), B, 5.0);
    CHECK(s.SelectorSet().empty());
    CHECK(s.twoHop.empty());
}

TEST_CASE("hello from asymmetric links does not add 2-hop entries")
{
    OlsrState s;
    OlsrOnHello(s, A, Hello({{A, LinkStatus::Symmetric}, {D, LinkStatus::Asymmetric}}), B, 1.0);
    CHECK(s.twoHop.empty());
}

TEST_CASE("mpr selection examples")
{
    CHECK(SelectMprs({{B, 3}, {C, 3}}, {}, A).empty());

    // D only via B.
    CHECK(SelectMprs({{B, 3}, {C, 3}}, {{B, D}, {C, A}, {B, A}}, A) == std::set<NodeId>{B});

    // B covers {D,E}, C covers {E}.
    CHECK(SelectMprs({{B, 3}, {C, 3}}, {{B, D}, {B, E}, {C, E}}, A) == std::set<NodeId>{B});

    // Willingness 0 is never chosen, even as the only path.
    CHECK(SelectMprs({{B, 0}, {C, 3}}, {{B, D}}, A).empty());
    CHECK(SelectMprs({{B, 0}, {C, 3}}, {{B, D}, {C, D}}, A) == std::set<NodeId>{C});

    // Ties: higher willingness wins, then lower id.
    CHECK(SelectMprs({{B, 3}, {C, 6}}, {{B, D}, {C, D}}, A) == std::set<NodeId>{C});
    CHECK(SelectMprs({{B, 3}, {C, 3}}, {{B, D}, {C, D}}, A) == std::set<NodeId>{B});

    // Targets that are already neighbours are not 2-hop nodes.
    CHECK(SelectMprs({{B, 3}, {C, 3}}, {{B, C}}, A).empty());
}

TEST_CASE("mpr selection matches the minimum cover on small shapes")
{
    // A-{B,C}, B-D; and A-{B,C}, B-{D,E}, C-E.
    const prosim::test::Graph g1{{B, C}, {A, D}, {A}, {B}};
    CHECK(prosim::test::MprsOf(g1, A).size() == prosim::test::MinimumCoverSize(g1, A));
    const prosim::test::Graph g2{{B, C}, {A, D, E}, {A, E}, {B}, {B, C}};
    CHECK(prosim::test::MprsOf(g2, A).size() == prosim::test::MinimumCoverSize(g2, A));
}

TEST_CASE("mpr coverage holds on every graph with up to six nodes")
{
    for (std::size_t n = 2; n <= 6; ++n)
    {
        const std::uint64_t pairs = n * (n - 1) / 2;
        for (std::uint64_t mask = 0; mask < (1ULL << pairs); ++mask)
        {
            const auto g = prosim::test::GraphFromMask(n, mask);
            for (NodeId self = 0; self < n; ++self)
            {
                const auto mprs = prosim::test::MprsOf(g, self);
                REQUIRE(prosim::test::Covers(g, self, mprs));
                for (NodeId m : mprs)
                {
                    REQUIRE(std::find(g[self].begin(), g[self].end(), m) != g[self].end());
                }
            }
        }
    }
}

TEST_CASE("tc generation")
{
    std::uint64_t ansn = 0;
    CHECK_FALSE(OlsrGenerateTc(B, {}, ansn, ControlSizing{}).has_value());
    CHECK(ansn == 0);

    auto tc = OlsrGenerateTc(B, {A, C}, ansn, ControlSizing{});
    REQUIRE(tc.has_value());
    CHECK(tc->kind == ControlKind::OlsrTc);
    CHECK(tc->size == 44);
    CHECK(std::get<TcBody>(tc->payload).selectors == std::vector<NodeId>{A, C});
    CHECK(std::get<TcBody>(tc->payload).ansn == 1);

    auto next = OlsrGenerateTc(B, {A}, ansn, ControlSizing{});
    CHECK(std::get<TcBody>(next->payload).ansn == 2);
    CHECK(ansn == 2);
}

TEST_CASE("mpr flooding rule")
{
    std::map<std::pair<NodeId, std::uint64_t>, DuplicateRecord> dup;
    const auto pkt = Tc(D, 7, {B});
    bool fresh = false;

    // C never selected us.
    CHECK(OlsrForward(A, pkt, C, {B}, dup, 1.0, 30.0, &fresh) == FloodAction::Absorb);
    CHECK(fresh);

    // The same packet later from a selector is retransmitted once.
    CHECK(OlsrForward(A, pkt, B, {B}, dup, 1.1, 30.0, &fresh) == FloodAction::Retransmit);
    CHECK_FALSE(fresh);
    CHECK(OlsrForward(A, pkt, B, {B}, dup, 1.2, 30.0, &fresh) == FloodAction::Absorb);

    // Our own packets are never relayed.
    CHECK(OlsrForward(A, Tc(A, 1, {B}), B, {B}, dup, 2.0, 30.0) == FloodAction::Absorb);

    // Fresh, from a selector.
    CHECK(OlsrForward(A, Tc(E, 1, {}), B, {B}, dup, 3.0, 30.0, &fresh) == FloodAction::Retransmit);
    CHECK(fresh);
}

TEST_CASE("routes over neighbours and topology records")
{
    auto r = OlsrRoutes({B, C}, {}, A, 0.0);
    CHECK(r.Find(B)->metric == 1);
    CHECK(r.Find(C)->metric == 1);
    CHECK(r.Find(D) == nullptr);

    const std::vector<TopologyRecord> topo{{D, B, 1, 0.0}};
    r = OlsrRoutes({B, C}, topo, A, 0.0);
    CHECK(r.Find(D)->metric == 2);
    CHECK(r.NextHop(D) == NodeId{B});

    // E hangs off D, D off B.
    const std::vector<TopologyRecord> chain{{D, B, 1, 0.0}, {E, D, 1, 0.0}, {9, 8, 1, 0.0}};
    r = OlsrRoutes({B, C}, chain, A, 0.0);
    CHECK(r.Find(E)->metric == 3);
    CHECK(r.Find(9) == nullptr);

    // Equal paths: lower next hop.
    const std::vector<TopologyRecord> tie{{D, C, 1, 0.0}, {D, B, 1, 0.0}};
    CHECK(OlsrRoutes({B, C}, tie, A, 0.0).NextHop(D) == NodeId{B});
}

TEST_CASE("mpr flooding reaches everyone with no more transmissions than flooding")
{
    std::mt19937_64 gen(99);
    for (int trial = 0; trial < 300; ++trial)
    {
        const std::size_t n = 2 + trial % 30;
        const auto g = prosim::test::RandomConnectedGraph(n, 0.15, gen);
        std::vector<std::set<NodeId>> relays(n);
        for (NodeId v = 0; v < n; ++v)
        {
            relays[v] = prosim::test::MprsOf(g, v);
        }
        const NodeId origin = static_cast<NodeId>(trial % n);
        const auto full = SimulateFlood(g, origin, nullptr);
        const auto mpr = SimulateFlood(g, origin, &relays);
        REQUIRE(full.reached.size() == n);
        REQUIRE(mpr.reached.size() == n);
        REQUIRE(full.transmissions == n);
        CHECK(mpr.transmissions <= full.transmissions);
    }
}

TEST_CASE("agent: timers, hello contents and tc silence")
{
    FakeContext ctx(A, 5);
    ctx.neighbors = {B};
    Olsr o(ctx);
    o.OnStart();
    REQUIRE(ctx.timers.size() == 2);

    ctx.now = 1.0;
    o.OnControl(ControlPacket::Make(B, 1, Hello({}), ControlSizing{}), B);
    auto h = std::get<HelloBody>(o.BuildHello().payload);
    CHECK(h.links == std::vector<HelloLink>{{B, LinkStatus::Asymmetric}});

    o.OnControl(ControlPacket::Make(B, 2, Hello({{A, LinkStatus::Asymmetric}, {C, LinkStatus::Symmetric}}),
                                    ControlSizing{}),
                B);
    CHECK(o.State().mprs == std::set<NodeId>{B});
    h = std::get<HelloBody>(o.BuildHello().payload);
    CHECK(h.links == std::vector<HelloLink>{{B, LinkStatus::Mpr}});
    // 2-hop nodes need a topology record before they are routable.
    CHECK(o.Table().NextHop(B) == NodeId{B});
    CHECK(o.Table().Find(C) == nullptr);

    // No one selected A: the TC timer produces nothing.
    ctx.sent.clear();
    o.OnTimer(Olsr::kTc);
    CHECK(ctx.sent.empty());
    CHECK(o.TcGenerated() == 0);

    // B names A as MPR: an immediate TC follows.
    ctx.now = 2.0;
    o.OnControl(ControlPacket::Make(B, 3, Hello({{A, LinkStatus::Mpr}}), ControlSizing{}), B);
    REQUIRE(ctx.sent.size() == 1);
    CHECK(ctx.sent[0].kind == ControlKind::OlsrTc);
    CHECK(ctx.sent[0].triggered);
    CHECK(o.TcGenerated() == 1);

    // State expires after three hello intervals of silence.
    ctx.now = 5.5;
    o.OnTimer(Olsr::kHello);
    CHECK(o.State().SymmetricNeighbors().empty());
    CHECK(o.Table().Find(B) == nullptr);
}

TEST_CASE("agent: tc processing and relaying")
{
    FakeContext ctx(A, 6);
    ctx.neighbors = {B};
    Olsr o(ctx);
    ctx.now = 1.0;
    o.OnControl(ControlPacket::Make(B, 1, Hello({{A, LinkStatus::Mpr}, {D, LinkStatus::Symmetric}}),
                                    ControlSizing{}),
                B);
    ctx.sent.clear();

    // B advertises D; E's TC (selectors {D}) is relayed by B, which selected A.
    o.OnControl(Tc(B, 1, {D}), B);
    CHECK(o.Table().Find(D)->metric == 2);
    ctx.sent.clear();
    o.OnControl(Tc(E, 1, {D}), B);
    CHECK(o.TcRetransmitted() == 2);
    REQUIRE(ctx.sent.size() == 1);
    CHECK(ctx.sent[0].origin == E);
    REQUIRE(o.Table().Find(E) != nullptr);
    CHECK(o.Table().Find(E)->metric == 3);

    o.OnControl(Tc(E, 1, {D}), B);
    CHECK(o.TcRetransmitted() == 2);

    // Newer ansn replaces the advertised set.
    o.OnControl(Tc(E, 2, {}), B);
    CHECK(o.Table().Find(E) == nullptr);

    // TC from a node that is not a symmetric neighbour is ignored.
    o.OnControl(Tc(5, 1, {D}), 5);
    CHECK(o.Table().Find(5) == nullptr);
}

TEST_CASE("config validation")
{
    OlsrConfig c;
    CHECK_NOTHROW(c.Validate());
    CHECK(c.tcInterval == 2 * c.helloInterval);
    c.willingness = 8;
    CHECK_THROWS(c.Validate());
    c = OlsrConfig{};
    c.helloInterval = 0;
    CHECK_THROWS(c.Validate());
}
