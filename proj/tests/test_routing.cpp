#include "prosim/routing.hpp"

#include <doctest.h>

#include <sstream>

using namespace prosim;

namespace
{

RouteEntry
Route(NodeId dest, NodeId next, std::uint32_t metric, std::uint64_t seq = 0)
{
    return RouteEntry{dest, next, metric, seq, 0.0};
}

} // namespace

TEST_CASE("next hop lookup")
{
    RoutingTable t;
    CHECK_FALSE(t.NextHop(3).has_value());

    t.Upsert(Route(0, 0, 0));
    CHECK(t.NextHop(0) == NodeId{0});
    CHECK(t.Find(0)->metric == 0);

    // Chain S(0) - 1 - 2, seen from S.
    const std::map<NodeId, std::vector<NodeId>> chain{{0, {1}}, {1, {0, 2}}, {2, {1}}};
    const auto routes = ShortestHopRoutes(chain, 0, 0.0);
    REQUIRE(routes.Find(2) != nullptr);
    CHECK(routes.NextHop(2) == NodeId{1});
    CHECK(routes.Find(2)->metric == 2);
    CHECK(routes.Find(0)->metric == 0);
    CHECK(routes.Find(0)->nextHop == 0);

    t.Upsert(Route(5, 1, kInfiniteMetric, 7));
    CHECK_FALSE(t.NextHop(5).has_value());
    t.Upsert(Route(5, 2, 3, 8));
    CHECK(t.Size() == 2);
    CHECK(t.NextHop(5) == NodeId{2});
    CHECK(t.Erase(5));
    CHECK_FALSE(t.Erase(5));
}

TEST_CASE("shortest hop routes prefer the lower next hop on ties")
{
    // 0 connects to 2 and 5, both connect to 9.
    const std::map<NodeId, std::vector<NodeId>> g{{0, {2, 5}}, {2, {0, 9}}, {5, {0, 9}}, {9, {2, 5}}, {7, {}}};
    const auto r = ShortestHopRoutes(g, 0, 1.5);
    CHECK(r.NextHop(9) == NodeId{2});
    CHECK(r.Find(9)->metric == 2);
    CHECK(r.Find(9)->installTime == 1.5);
    CHECK(r.Find(7) == nullptr);
}

TEST_CASE("forwarding decisions")
{
    RoutingTable t;
    t.Upsert(Route(3, 1, 2));
    t.Upsert(Route(4, 1, kInfiniteMetric, 9));
    const auto near = [](NodeId n) { return n == 1; };
    const auto none = [](NodeId) { return false; };

    DataPacket p;
    p.dst = 0;
    p.ttl = 5;
    CHECK(ForwardData(0, p, t, near).action == ForwardDecision::Action::DeliverLocal);

    p.dst = 3;
    auto d = ForwardData(0, p, t, near);
    CHECK(d.action == ForwardDecision::Action::Forward);
    CHECK(d.nextHop == 1);
    CHECK(p.ttl == 4);

    p.ttl = 5;
    d = ForwardData(0, p, t, none);
    CHECK(d.action == ForwardDecision::Action::Drop);
    CHECK(d.reason == DropReason::NextHopUnreachable);

    p.dst = 8;
    d = ForwardData(0, p, t, near);
    CHECK(d.reason == DropReason::NoRoute);

    p.dst = 3;
    p.ttl = 1;
    d = ForwardData(0, p, t, near);
    CHECK(d.action == ForwardDecision::Action::Drop);
    CHECK(d.reason == DropReason::TtlExpired);

    p.ttl = 0;
    CHECK(ForwardData(0, p, t, near).reason == DropReason::TtlExpired);

    p.dst = 4;
    p.ttl = 5;
    CHECK(ForwardData(0, p, t, near).reason == DropReason::NoRoute);
    CHECK(ForwardData(0, p, t, near, ForwardOptions{true}).action == ForwardDecision::Action::Buffer);
}

TEST_CASE("control packet sizing")
{
    const ControlSizing s;
    const auto dsdv = ControlPacket::Make(1, 0, std::vector<DsdvAdvert>(5, DsdvAdvert{1, 1, 2}), s);
    CHECK(dsdv.kind == ControlKind::DsdvUpdate);
    CHECK(dsdv.size == 80);

    const auto tc = ControlPacket::Make(1, 3, TcBody{3, {0, 2}}, s);
    CHECK(tc.kind == ControlKind::OlsrTc);
    CHECK(tc.size == 44);

    HelloBody h;
    h.links = {{2, LinkStatus::Symmetric}};
    CHECK(ControlPacket::Make(1, 0, h, s).size == 32);
    CHECK(ControlPacket::Make(1, 0, std::vector<LinkStateRecord>{}, s).size == 20);
    CHECK(ControlPacket::Make(1, 0, std::vector<DsdvAdvert>{}, ControlSizing{8, 4}).size == 8);
}

TEST_CASE("table dump format")
{
    RoutingTable t;
    t.Upsert(Route(0, 0, 0, 4));
    t.Upsert(Route(2, 1, kInfiniteMetric, 5));
    std::ostringstream os;
    DumpTable(os, 1.5, 0, t);
    CHECK(os.str() == "1.5 0 0 0 0 4\n1.5 0 2 1 inf 5\n");
}

TEST_CASE("protocol names")
{
    CHECK(ParseProtocol("dsdv") == ProtocolKind::Dsdv);
    CHECK(ParseProtocol("fsr") == ProtocolKind::Fsr);
    CHECK(ParseProtocol("olsr") == ProtocolKind::Olsr);
    CHECK_FALSE(ParseProtocol("xyz").has_value());
    CHECK(std::string(ToString(ProtocolKind::Olsr)) == "olsr");
}
