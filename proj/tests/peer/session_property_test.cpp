#include <gtest/gtest.h>

#include "molsync/peer/session.hpp"
#include "support/generators.hpp"
#include "support/session_harness.hpp"

namespace molsync::peer {
namespace {

bool counters_at_least(const Stats& now, const Stats& before) {
  for (std::size_t k = 0; k < kKindCount; ++k) {
    if (now.sent[k].frames < before.sent[k].frames || now.sent[k].bytes < before.sent[k].bytes) return false;
    if (now.received[k].frames < before.received[k].frames) return false;
    if (now.received[k].bytes < before.received[k].bytes) return false;
  }
  return now.decode_errors >= before.decode_errors && now.applied >= before.applied &&
         now.rejected >= before.rejected && now.re_shared >= before.re_shared;
}

// Random local edits, inbound traffic and polls against a hub session.
TEST(SessionProperty, StatsMonotoneSeqStrictAndNoEchoToOrigin) {
  testing::Rng rng(123);
  for (int trial = 0; trial < 40; ++trial) {
    const PeerId self = testing::peer_id(rng);
    std::vector<PeerId> others;
    for (int i = 0; i < 4; ++i) others.push_back(testing::peer_id(rng));
    PeerSession s = testing::linked_session(self, others, {Policy{}, true});
    std::uint64_t last_seq = 0;
    std::map<PeerId, std::uint64_t> inbound_seq;
    std::int64_t now = 0;
    Stats before = s.stats();
    for (int step = 0; step < 200; ++step) {
      now += static_cast<std::int64_t>(testing::below(rng, 40));
      std::vector<Outgoing> out;
      std::optional<PeerId> origin;
      switch (testing::below(rng, 6)) {
        case 0: out = s.local_drag(testing::random_unit_quaternion(rng), now); break;
        case 1: out = s.set_zoom(testing::uniform(rng, 10, 300), now); break;
        case 2: out = s.send_command("c" + std::to_string(step), now).value(); break;
        case 3: out = s.poll(now); break;
        case 4: s.on_frame("garbage", now); break;
        default: {
          const PeerId& from = others[testing::below(rng, others.size())];
          origin = from;
          const Kind kind = std::array{Kind::rotation, Kind::state, Kind::command}[testing::below(rng, 3)];
          Envelope e{1, from, Address::broadcast(), ++inbound_seq[from], now, testing::payload_of(kind, rng)};
          out = s.on_receive(e, now).out;
          break;
        }
      }
      for (const Outgoing& o : out) {
        EXPECT_GT(o.envelope.seq, last_seq);
        last_seq = o.envelope.seq;
        if (origin) {
          EXPECT_NE(o.envelope.to, Address(*origin));
          ASSERT_NE(forwarded(o.envelope), nullptr);
        }
      }
      ASSERT_TRUE(counters_at_least(s.stats(), before));
      before = s.stats();
    }
  }
}

}  // namespace
}  // namespace molsync::peer
