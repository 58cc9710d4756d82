#include <algorithm>

#include <gtest/gtest.h>

#include "molsync/relay/relay.hpp"
#include "support/generators.hpp"
#include "support/relay_harness.hpp"

namespace molsync::relay {
namespace {

using Deliveries = std::vector<std::pair<ConnectionId, Envelope>>;

std::vector<Kind> kinds(const Deliveries& d) {
  std::vector<Kind> out;
  for (const auto& [c, e] : d) out.push_back(e.kind());
  return out;
}

TEST(Relay, FirstWelcomeOnSeededRelayIsTheGoldenId) {
  testing::RelayHarness h(42);
  // Same stream as new_peer_id with seed 42 (see the peer id oracle).
  EXPECT_EQ(h.join()->str(), "EOYQBmYeYd56OSFs");
  EXPECT_EQ(h.join()->str(), "Ym5jfaLr1QBMqs3b");
}

TEST(Relay, TwoConnectionsGetDistinctIds) {
  testing::RelayHarness h(1);
  EXPECT_NE(*h.join(), *h.join());
}

TEST(Relay, ServerFullAtTheCap) {
  testing::RelayHarness h(3, 1024);
  for (int i = 0; i < 1024; ++i) ASSERT_TRUE(h.join());
  EXPECT_FALSE(h.join());
  EXPECT_EQ(h.last_error(), "server_full");
  EXPECT_TRUE(h.last_close());
  EXPECT_EQ(h.relay().registry().size(), 1024u);
}

TEST(Relay, ConnectNotifiesTheMaster) {
  testing::RelayHarness h;
  const PeerId a = *h.join(), b = *h.join();
  auto out = h.connect(b, a);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].first, h.conn(b));
  EXPECT_EQ(std::get<ConnectOk>(out[0].second.payload).peer, a);
  EXPECT_EQ(out[1].first, h.conn(a));
  EXPECT_EQ(std::get<PeerJoined>(out[1].second.payload).peer, b);
  EXPECT_TRUE(h.relay().registry().linked(a, b));
}

TEST(Relay, ConnectIsIdempotent) {
  testing::RelayHarness h;
  const PeerId a = *h.join(), b = *h.join();
  h.connect(b, a);
  auto again = h.connect(b, a);
  EXPECT_EQ(kinds(again), std::vector<Kind>{Kind::connect_ok});
  EXPECT_EQ(h.relay().registry().link_count(), 1u);
}

TEST(Relay, ExtraPairwiseLinkBesidesTheStar) {
  testing::RelayHarness h;
  const PeerId a = *h.join(), c = *h.join(), d = *h.join();
  h.connect(c, a);
  h.connect(d, a);
  h.connect(c, d);
  EXPECT_TRUE(h.relay().registry().linked(c, d));
  EXPECT_EQ(h.relay().registry().link_count(), 3u);
}

TEST(Relay, ConnectErrors) {
  testing::RelayHarness h;
  const PeerId a = *h.join();
  testing::Rng rng(77);
  auto out = h.connect(a, testing::peer_id(rng));
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(std::get<Error>(out[0].second.payload).code, "peer_not_found");
  out = h.connect(a, a);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(std::get<Error>(out[0].second.payload).code, "self_connect");
}

// Table-driven: a star of size n with master broadcasting.
TEST(Relay, BroadcastReachesExactlyTheLinkedPeers) {
  for (int spokes = 0; spokes <= 5; ++spokes) {
    testing::RelayHarness h;
    const PeerId master = *h.join();
    std::vector<PeerId> expected;
    for (int i = 0; i < spokes; ++i) {
      const PeerId s = *h.join();
      h.connect(s, master);
      expected.push_back(s);
    }
    const PeerId loner = *h.join();
    (void)loner;
    auto route = h.relay().route(Envelope{1, master, Address::broadcast(), 9, 0, State::of({})});
    std::sort(expected.begin(), expected.end());
    EXPECT_EQ(route.recipients, expected);
    if (spokes == 0) {
      EXPECT_EQ(route.drop_reason, DropReason::no_links);
    } else {
      EXPECT_FALSE(route.drop_reason);
    }
    auto out = h.send(master, Address::broadcast(), State::of({}));
    EXPECT_EQ(out.size(), static_cast<std::size_t>(spokes));
    for (const auto& [conn, e] : out) EXPECT_NE(conn, h.conn(master));
  }
}

TEST(Relay, SpokeBroadcastReachesOnlyItsMaster) {
  testing::RelayHarness h;
  const PeerId a = *h.join(), b = *h.join(), c = *h.join();
  h.connect(b, a);
  h.connect(c, a);
  auto out = h.send(b, Address::broadcast(), Chat{"hi"});
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].first, h.conn(a));
}

TEST(Relay, FramesAreForwardedUntouched) {
  testing::RelayHarness h;
  const PeerId a = *h.join(), b = *h.join();
  h.connect(b, a);
  Envelope e{1, a, Address::broadcast(), 77, 123456, Command{"select */water", {}}};
  const std::string frame = encode_envelope(e);
  auto r = h.relay().on_frame(h.conn(a), frame, 5);
  ASSERT_EQ(r.out.size(), 1u);
  EXPECT_EQ(r.out[0].frame, frame);
}

TEST(Relay, UnlinkedUnicastIsAnError) {
  testing::RelayHarness h;
  const PeerId a = *h.join(), b = *h.join();
  auto out = h.send(a, b, Chat{"psst"});
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].first, h.conn(a));
  EXPECT_EQ(std::get<Error>(out[0].second.payload).code, "not_linked");
  ASSERT_EQ(h.relay().drop_log().size(), 1u);
  EXPECT_EQ(h.relay().drop_log().back().reason, DropReason::no_links);
}

TEST(Relay, LinkedUnicastReachesOnlyTheTarget) {
  testing::RelayHarness h;
  const PeerId a = *h.join(), b = *h.join(), c = *h.join();
  h.connect(b, a);
  h.connect(c, a);
  auto out = h.send(a, b, Chat{"just you"});
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].first, h.conn(b));
}

TEST(Relay, DisconnectNotifiesFormerPartners) {
  testing::RelayHarness h;
  const PeerId a = *h.join(), b = *h.join(), c = *h.join(), loner = *h.join();
  h.connect(b, a);
  h.connect(c, a);
  auto out = h.close(a);
  ASSERT_EQ(out.size(), 2u);
  std::set<ConnectionId> got;
  for (const auto& [conn, e] : out) {
    EXPECT_EQ(std::get<PeerLeft>(e.payload).peer, a);
    got.insert(conn);
  }
  EXPECT_EQ(got, (std::set<ConnectionId>{h.conn(b), h.conn(c)}));
  EXPECT_TRUE(h.close(loner).empty());

  auto err = h.send(b, a, Chat{"still there?"});
  ASSERT_EQ(err.size(), 1u);
  EXPECT_EQ(std::get<Error>(err[0].second.payload).code, "peer_not_found");
  auto reconnect = h.connect(b, a);
  EXPECT_EQ(std::get<Error>(reconnect[0].second.payload).code, "peer_not_found");
}

TEST(Relay, SpoofedFromIsRejected) {
  testing::RelayHarness h;
  const PeerId a = *h.join(), b = *h.join();
  h.connect(b, a);
  Envelope e{1, b, Address::broadcast(), 1, 0, Chat{"i am b"}};
  auto r = h.relay().on_frame(h.conn(a), encode_envelope(e), 0);
  ASSERT_EQ(r.out.size(), 1u);
  EXPECT_EQ(r.out[0].connection, h.conn(a));
  EXPECT_EQ(std::get<Error>(decode_envelope(r.out[0].frame).value().payload).code, "bad_from");
}

TEST(Relay, FramesBeforeHelloAreRejected) {
  testing::RelayHarness h;
  testing::Rng rng(5);
  Envelope e{1, testing::peer_id(rng), Address::broadcast(), 1, 0, Chat{"hi"}};
  auto r = h.relay().on_frame(ConnectionId{999}, encode_envelope(e), 0);
  ASSERT_EQ(r.out.size(), 1u);
  EXPECT_EQ(std::get<Error>(decode_envelope(r.out[0].frame).value().payload).code, "not_registered");
}

TEST(Relay, GarbageGetsADecodeErrorAndNoCrash) {
  testing::RelayHarness h;
  const PeerId a = *h.join();
  auto r = h.relay().on_frame(h.conn(a), "{{{", 0);
  ASSERT_EQ(r.out.size(), 1u);
  EXPECT_EQ(std::get<Error>(decode_envelope(r.out[0].frame).value().payload).code, "malformed");
  EXPECT_FALSE(r.close);
}

TEST(Relay, RelayOnlyKindsFromPeersAreRejected) {
  testing::RelayHarness h;
  const PeerId a = *h.join(), b = *h.join();
  for (Payload p : {Payload{Welcome{a}}, Payload{ConnectOk{b}}, Payload{PeerJoined{b}}, Payload{PeerLeft{b}},
                    Payload{Error{"x", "y"}}}) {
    auto out = h.send(a, b, p);
    ASSERT_EQ(out.size(), 1u);
    EXPECT_EQ(std::get<Error>(out[0].second.payload).code, "unexpected_kind");
  }
}

TEST(Relay, HelloPolicySnapshotGatesOutbound) {
  testing::RelayHarness h;
  const PeerId a = *h.join("0,1,1/1,1,1"), b = *h.join();
  h.connect(b, a);
  EXPECT_TRUE(h.send(a, Address::broadcast(), Rotation::of({})).empty());
  EXPECT_EQ(h.relay().drop_log().back().reason, DropReason::gated);
  EXPECT_EQ(h.send(a, Address::broadcast(), State::of({})).size(), 1u);
}

TEST(Relay, RepeatedHelloRefreshesThePolicyOnly) {
  testing::RelayHarness h;
  const PeerId a = *h.join();
  Envelope hello;
  hello.payload = Hello{"1,1,0/1,1,1"};
  auto r = h.relay().on_frame(h.conn(a), encode_envelope(hello), 0);
  ASSERT_EQ(r.out.size(), 1u);
  EXPECT_EQ(std::get<Welcome>(decode_envelope(r.out[0].frame).value().payload).id, a);
  EXPECT_FALSE(h.relay().registry().find(a)->policy.send_commands);
  EXPECT_EQ(h.relay().registry().size(), 1u);
}

// No peer ever receives a frame carrying its own id as `from`.
TEST(Relay, EchoSuppressionUnderRandomTraffic) {
  testing::Rng rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    testing::RelayHarness h(trial);
    std::vector<PeerId> peers;
    for (int i = 0; i < 6; ++i) peers.push_back(*h.join());
    for (int i = 0; i < 8; ++i) {
      h.connect(peers[testing::below(rng, 6)], peers[testing::below(rng, 6)]);
    }
    for (int i = 0; i < 30; ++i) {
      const PeerId& from = peers[testing::below(rng, 6)];
      const Address to = testing::below(rng, 2) ? Address::broadcast() : Address(peers[testing::below(rng, 6)]);
      for (const auto& [conn, e] : h.send(from, to, Chat{"x"})) {
        const auto receiver = h.peer_of(conn);
        ASSERT_TRUE(receiver);
        EXPECT_FALSE(e.from.is_peer() && e.from.peer() == *receiver);
      }
    }
  }
}

}  // namespace
}  // namespace molsync::relay
