#include <gtest/gtest.h>

#include "molsync/peer/session.hpp"
#include "support/generators.hpp"
#include "support/session_harness.hpp"

namespace molsync::peer {
namespace {

using testing::from_relay;
using testing::kinds_of;
using testing::linked_session;

struct Ids {
  PeerId self, master, a, b;
};

Ids ids() {
  testing::Rng rng(11);
  return {testing::peer_id(rng), testing::peer_id(rng), testing::peer_id(rng), testing::peer_id(rng)};
}

Quaternion turn(double degrees) {
  return to_wire_precision(from_axis_angle({0, 1, 0}, degrees * 3.14159265358979 / 180.0));
}

TEST(Session, HelloCarriesThePolicyAndNoSender) {
  PeerSession s({Policy::parse("1,0,1/1,1,0").value()});
  const Outgoing hello = s.hello(5);
  EXPECT_TRUE(hello.envelope.from.is_relay());
  EXPECT_EQ(std::get<Hello>(hello.envelope.payload).policy, "1,0,1/1,1,0");
  EXPECT_EQ(decode_envelope(hello.frame).value(), hello.envelope);
}

TEST(Session, WelcomeAssignsTheId) {
  const Ids p = ids();
  PeerSession s;
  EXPECT_FALSE(s.connected());
  EXPECT_EQ(s.request_connect(p.master, 0).error().code, SessionErrorCode::not_connected);
  s.on_receive(from_relay(Welcome{p.self}), 0);
  ASSERT_TRUE(s.connected());
  EXPECT_EQ(*s.id(), p.self);
  auto req = s.request_connect(p.master, 1);
  ASSERT_TRUE(req);
  EXPECT_EQ(req.value().envelope.kind(), Kind::connect);
  EXPECT_EQ(req.value().envelope.to, Address(p.master));
}

TEST(Session, LinksFollowRelayNotifications) {
  const Ids p = ids();
  PeerSession s = linked_session(p.self, {p.master});
  s.on_receive(from_relay(PeerJoined{p.a}), 0);
  EXPECT_EQ(s.links(), (std::set<PeerId>{p.master, p.a}));
  s.on_receive(from_relay(PeerLeft{p.master}), 0);
  EXPECT_EQ(s.links(), (std::set<PeerId>{p.a}));
}

TEST(Session, DragWithoutLinksStaysLocal) {
  const Ids p = ids();
  PeerSession s = linked_session(p.self, {});
  EXPECT_TRUE(s.local_drag(turn(30), 0).empty());
  EXPECT_EQ(s.model().camera().orientation, turn(30));
}

TEST(Session, DragIsThrottledToTheMaxRate) {
  const Ids p = ids();
  PeerSession s = linked_session(p.self, {p.master});
  std::vector<Outgoing> sent;
  for (int t = 0; t <= 1000; t += 5) {
    for (auto& o : s.local_drag(turn(t / 10.0), t)) sent.push_back(std::move(o));
    for (auto& o : s.poll(t)) sent.push_back(std::move(o));
  }
  for (auto& o : s.poll(2000)) sent.push_back(std::move(o));
  EXPECT_LE(sent.size(), 22u);
  EXPECT_GE(sent.size(), 20u);
  for (std::size_t i = 1; i < sent.size(); ++i) {
    EXPECT_GE(sent[i].envelope.ts - sent[i - 1].envelope.ts, 50);
    EXPECT_GT(sent[i].envelope.seq, sent[i - 1].envelope.seq);
  }
  // The trailing edge carries the final orientation.
  EXPECT_EQ(std::get<Rotation>(sent.back().envelope.payload).q, turn(100));
  EXPECT_FALSE(s.next_deadline());
}

TEST(Session, SendGateKeepsEditsLocal) {
  const Ids p = ids();
  PeerSession s = linked_session(p.self, {p.master}, {Policy::parse("0,0,0/1,1,1").value()});
  EXPECT_TRUE(s.local_drag(turn(10), 0).empty());
  EXPECT_TRUE(s.set_zoom(250, 100).empty());
  auto cmd = s.send_command("rotate x 90", 200);
  ASSERT_TRUE(cmd);
  EXPECT_TRUE(cmd.value().empty());
  EXPECT_EQ(s.model().camera().orientation, turn(10));
  EXPECT_EQ(s.model().camera().zoom, 250);
  EXPECT_EQ(s.model().command_log(), std::vector<std::string>{"rotate x 90"});
  EXPECT_FALSE(s.next_deadline());
}

TEST(Session, ApplyGateRejectsInboundViewUpdates) {
  const Ids p = ids();
  PeerSession s = linked_session(p.self, {p.master}, {Policy::parse("1,1,1/0,0,0").value()});
  const Camera before = s.model().camera();
  Envelope e{1, p.master, Address::broadcast(), 1, 0, Rotation{turn(45), std::nullopt}};
  EXPECT_FALSE(s.on_receive(e, 0).applied);
  e.payload = Command{"hide all", std::nullopt};
  EXPECT_FALSE(s.on_receive(e, 0).applied);
  EXPECT_EQ(s.model().camera(), before);
  EXPECT_TRUE(s.model().command_log().empty());
  EXPECT_EQ(s.stats().rejected, 2u);
}

TEST(Session, ZoomEmitsAFullState) {
  const Ids p = ids();
  PeerSession s = linked_session(p.self, {p.master});
  s.local_drag(turn(20), 0);
  auto out = s.set_zoom(150, 100);
  ASSERT_EQ(out.size(), 1u);
  const auto& st = std::get<State>(out[0].envelope.payload);
  EXPECT_EQ(st.camera.zoom, 150);
  EXPECT_EQ(st.camera.orientation, turn(20));
}

TEST(Session, OversizeCommandIsRejected) {
  const Ids p = ids();
  PeerSession s = linked_session(p.self, {p.master});
  auto big = s.send_command(std::string(kMaxScriptBytes + 1, 'x'), 0);
  ASSERT_FALSE(big);
  EXPECT_EQ(big.error().code, SessionErrorCode::oversize_command);
  EXPECT_TRUE(s.model().command_log().empty());
  auto limit = s.send_command(std::string(kMaxScriptBytes, 'x'), 0);
  ASSERT_TRUE(limit);
  EXPECT_EQ(limit.value().size(), 1u);
}

TEST(Session, InvalidUtf8TextIsRejected) {
  const Ids p = ids();
  PeerSession s = linked_session(p.self, {p.master});
  EXPECT_EQ(s.send_chat("\xC3\x28", 0).error().code, SessionErrorCode::invalid_text);
  EXPECT_EQ(s.send_command("\xFF", 0).error().code, SessionErrorCode::invalid_text);
}

TEST(Session, ChatIsLoggedBothWays) {
  const Ids p = ids();
  PeerSession s = linked_session(p.self, {p.master});
  auto out = s.send_chat("héllo", 10);
  ASSERT_TRUE(out);
  EXPECT_EQ(kinds_of(out.value()), std::vector<Kind>{Kind::chat});
  s.on_receive(Envelope{1, p.master, Address::broadcast(), 4, 0, Chat{"hi back"}}, 20);
  ASSERT_EQ(s.chat_log().size(), 2u);
  EXPECT_EQ(s.chat_log()[1].from, p.master);
  EXPECT_EQ(s.chat_log()[1].text, "hi back");
}

TEST(Session, SendFileIsOneManifestThenChunks) {
  const Ids p = ids();
  PeerSession s = linked_session(p.self, {p.master});
  testing::Rng rng(3);
  const Bytes data = testing::bytes(rng, 1 << 20);
  auto out = s.send_file(data, "protein.pdb", 0);
  ASSERT_TRUE(out);
  ASSERT_EQ(out.value().size(), 65u);
  EXPECT_EQ(out.value()[0].envelope.kind(), Kind::file_manifest);
  EXPECT_EQ(std::get<FileManifest>(out.value()[0].envelope.payload).chunk_count, 64u);
  for (std::size_t i = 1; i < 65; ++i) EXPECT_EQ(out.value()[i].envelope.kind(), Kind::file_chunk);
}

TEST(Session, ReceivedFileIsAcknowledged) {
  const Ids p = ids();
  PeerSession sender = linked_session(p.master, {p.self});
  PeerSession receiver = linked_session(p.self, {p.master});
  testing::Rng rng(4);
  const Bytes data = testing::bytes(rng, 200000);
  auto out = sender.send_file(data, "../odd name.bin", 0).value();
  std::vector<Outgoing> acks;
  for (const auto& o : out) {
    for (auto& a : receiver.on_receive(o.envelope, 0).out) acks.push_back(std::move(a));
  }
  ASSERT_EQ(acks.size(), 1u);
  const auto& ack = std::get<FileAck>(acks[0].envelope.payload);
  EXPECT_TRUE(ack.ok);
  ASSERT_EQ(receiver.received_files().size(), 1u);
  EXPECT_EQ(receiver.received_files()[0].content, data);
  sender.on_receive(acks[0].envelope, 1);
  ASSERT_EQ(sender.file_acks().size(), 1u);
  EXPECT_TRUE(sender.file_acks()[0].ok);
}

TEST(Session, ChunkForUnknownFileIsNacked) {
  const Ids p = ids();
  PeerSession sender = linked_session(p.master, {p.self});
  PeerSession receiver = linked_session(p.self, {p.master});
  auto out = sender.send_file(Bytes(100, 1), "x", 0).value();
  auto r = receiver.on_receive(out[1].envelope, 0);
  ASSERT_EQ(r.out.size(), 1u);
  const auto& ack = std::get<FileAck>(r.out[0].envelope.payload);
  EXPECT_FALSE(ack.ok);
  EXPECT_EQ(ack.reason, "unknown_file_id");
}

TEST(Session, DecodeErrorsAreCountedNotFatal) {
  const Ids p = ids();
  PeerSession s = linked_session(p.self, {p.master});
  auto r = s.on_frame("not json", 0);
  ASSERT_TRUE(r.decode_error);
  EXPECT_EQ(r.decode_error->code, DecodeErrorCode::malformed);
  EXPECT_EQ(s.stats().decode_errors, 1u);
}

// Hub re-share table: {hub?, inbound hop, send gate} -> deliveries.
TEST(Session, HubReShareTable) {
  const Ids p = ids();
  struct Row {
    bool hub;
    bool reshared_input;
    const char* policy;
    std::size_t expected;
  };
  const Row rows[] = {
      {true, false, "1,1,1/1,1,1", 2},  {false, false, "1,1,1/1,1,1", 0}, {true, true, "1,1,1/1,1,1", 0},
      {true, false, "0,1,1/1,1,1", 0},  {true, false, "1,1,1/0,1,1", 0},
  };
  for (const Row& row : rows) {
    SessionOptions opts{Policy::parse(row.policy).value(), row.hub};
    PeerSession hub = linked_session(p.self, {p.master, p.a, p.b}, opts);
    Envelope e{1, p.a, Address::broadcast(), 9, 0, Rotation{turn(33), std::nullopt}};
    if (row.reshared_input) {
      std::get<Rotation>(e.payload).via = Forwarded{p.b, 3};
    }
    auto r = hub.on_receive(e, 0);
    SCOPED_TRACE(std::string(row.policy) + (row.hub ? " hub" : " peer") + (row.reshared_input ? " hop1" : " hop0"));
    ASSERT_EQ(r.out.size(), row.expected);
    std::set<PeerId> targets;
    for (const Outgoing& o : r.out) {
      targets.insert(o.envelope.to.peer());
      const auto* via = forwarded(o.envelope);
      ASSERT_NE(via, nullptr);
      EXPECT_EQ(via->origin, p.a);
      EXPECT_EQ(via->origin_seq, 9u);
      EXPECT_LE(o.frame.size(), 512u);
    }
    if (row.expected) {
      EXPECT_EQ(targets, (std::set<PeerId>{p.master, p.b}));
    }
  }
}

TEST(Session, ReSharedFramesAreNotReSharedAgain) {
  const Ids p = ids();
  PeerSession hub1 = linked_session(p.self, {p.master, p.a}, {Policy{}, true});
  PeerSession hub2 = linked_session(p.a, {p.self, p.b}, {Policy{}, true});
  Envelope e{1, p.master, Address::broadcast(), 1, 0, Command{"zap", std::nullopt}};
  auto first = hub1.on_receive(e, 0).out;
  ASSERT_EQ(first.size(), 1u);
  EXPECT_TRUE(hub2.on_receive(first[0].envelope, 0).applied);
  EXPECT_TRUE(hub2.on_receive(first[0].envelope, 0).out.empty());
  EXPECT_EQ(hub2.model().command_log(), std::vector<std::string>{"zap"});
}

TEST(Session, DisconnectClearsIdentityAndLinks) {
  const Ids p = ids();
  PeerSession s = linked_session(p.self, {p.master});
  s.local_drag(turn(1), 0);
  s.local_drag(turn(2), 1);
  ASSERT_TRUE(s.next_deadline());
  s.on_disconnected();
  EXPECT_FALSE(s.connected());
  EXPECT_TRUE(s.links().empty());
  EXPECT_FALSE(s.next_deadline());
}

TEST(Session, SetPolicyReannouncesWhenConnected) {
  const Ids p = ids();
  PeerSession offline;
  EXPECT_FALSE(offline.set_policy(Policy{}, 0));
  PeerSession s = linked_session(p.self, {p.master});
  auto hello = s.set_policy(Policy::parse("1,1,0/1,1,1").value(), 0);
  ASSERT_TRUE(hello);
  EXPECT_EQ(std::get<Hello>(hello->envelope.payload).policy, "1,1,0/1,1,1");
  EXPECT_FALSE(s.policy().send_commands);
}

TEST(Session, StatsCountBytesPerKind) {
  const Ids p = ids();
  PeerSession s = linked_session(p.self, {p.master});
  auto out = s.send_chat("abc", 0).value();
  EXPECT_EQ(s.stats().sent_of(Kind::chat).frames, 1u);
  EXPECT_EQ(s.stats().sent_of(Kind::chat).bytes, out[0].frame.size());
  EXPECT_EQ(s.stats().received_of(Kind::connect_ok).frames, 1u);
}

}  // namespace
}  // namespace molsync::peer
