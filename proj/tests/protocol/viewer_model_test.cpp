#include <algorithm>

#include <gtest/gtest.h>

#include "molsync/protocol/viewer_model.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

namespace molsync {
namespace {

const PeerId kA = *PeerId::parse("A1b2C3d4E5f6G7h8");
const PeerId kB = *PeerId::parse("Zz9Yy8Xx7Ww6Vv5U");
const PeerId kHub = *PeerId::parse("HHHHHHHHHHHHHHHH");

Envelope envelope_from(const PeerId& from, std::uint64_t seq, Payload p) {
  Envelope e;
  e.from = from;
  e.to = Address::broadcast();
  e.seq = seq;
  e.payload = std::move(p);
  return e;
}

Envelope state(const PeerId& from, std::uint64_t seq, const Camera& c) {
  return envelope_from(from, seq, State::of(c));
}

Camera camera_n(int n) {
  return Camera{from_axis_angle({0, 1, 0}, 0.1 * n), 100.0 + n, {double(n), -double(n), 0.5 * n}};
}

TEST(ViewerModel, FirstStateIsApplied) {
  ViewerModel m;
  const Camera c{};
  EXPECT_TRUE(m.apply(state(kA, 1, c), Policy{}));
  EXPECT_EQ(m.camera(), c);
  EXPECT_EQ(m.last_applied_seq(kA), 1u);
}

TEST(ViewerModel, DuplicateIsNotApplied) {
  ViewerModel m;
  const Envelope e = state(kA, 1, camera_n(3));
  EXPECT_TRUE(m.apply(e, Policy{}));
  const ViewerModel before = m;
  EXPECT_FALSE(m.apply(e, Policy{}));
  EXPECT_EQ(m, before);
}

TEST(ViewerModel, EveryDeliveryOrderOfThreeEndsAtSeqThree) {
  std::vector<int> order = {1, 2, 3};
  int orders = 0;
  do {
    ViewerModel m;
    for (int s : order) m.apply(state(kA, s, camera_n(s)), Policy{});
    EXPECT_EQ(m.camera(), State::of(camera_n(3)).camera);
    EXPECT_EQ(m.last_applied_seq(kA), 3u);
    ++orders;
  } while (std::next_permutation(order.begin(), order.end()));
  EXPECT_EQ(orders, 6);
}

TEST(ViewerModel, OutOfOrderOlderIsRejected) {
  ViewerModel m;
  EXPECT_TRUE(m.apply(state(kA, 3, camera_n(3)), Policy{}));
  EXPECT_FALSE(m.apply(state(kA, 2, camera_n(2)), Policy{}));
}

TEST(ViewerModel, RotationReplacesOrientationOnly) {
  ViewerModel m;
  m.apply(state(kA, 1, camera_n(2)), Policy{});
  const Quaternion q = to_wire_precision(from_axis_angle({1, 0, 0}, 0.7));
  EXPECT_TRUE(m.apply(envelope_from(kA, 2, Rotation::of(q)), Policy{}));
  EXPECT_EQ(m.camera().orientation, q);
  EXPECT_EQ(m.camera().zoom, 102.0);
}

TEST(ViewerModel, CommandsAppend) {
  ViewerModel m;
  EXPECT_TRUE(m.apply(envelope_from(kA, 1, Command{"spin on", {}}), Policy{}));
  EXPECT_TRUE(m.apply(envelope_from(kB, 1, Command{"color red", {}}), Policy{}));
  EXPECT_FALSE(m.apply(envelope_from(kB, 1, Command{"color red", {}}), Policy{}));
  EXPECT_EQ(m.command_log(), (std::vector<std::string>{"spin on", "color red"}));
}

TEST(ViewerModel, GatedUpdatesLeaveTheModelBitIdentical) {
  Policy off;
  off.apply_rotations = off.apply_states = off.apply_commands = false;
  ViewerModel m;
  m.apply(state(kA, 1, camera_n(1)), Policy{});
  const ViewerModel before = m;
  EXPECT_FALSE(m.apply(state(kA, 5, camera_n(5)), off));
  EXPECT_FALSE(m.apply(envelope_from(kA, 6, Rotation::of(from_axis_angle({0, 0, 1}, 1))), off));
  EXPECT_FALSE(m.apply(envelope_from(kA, 7, Command{"x", {}}), off));
  EXPECT_EQ(m, before);
  EXPECT_EQ(std::memcmp(&m.camera(), &before.camera(), sizeof(Camera)), 0);
}

TEST(ViewerModel, NonViewKindsAreIgnored) {
  ViewerModel m;
  EXPECT_FALSE(m.apply(envelope_from(kA, 1, Chat{"hi"}), Policy{}));
  EXPECT_EQ(m, ViewerModel{});
}

TEST(ViewerModel, ReSharedFramesAreKeyedOnTheOrigin) {
  ViewerModel m;
  State s = State::of(camera_n(4));
  s.via = Forwarded{kA, 4};
  EXPECT_TRUE(m.apply(envelope_from(kHub, 90, s), Policy{}));
  EXPECT_EQ(m.last_applied_seq(kA), 4u);
  EXPECT_EQ(m.last_applied_seq(kHub), 0u);
  // The direct copy of the same update is now stale.
  EXPECT_FALSE(m.apply(state(kA, 4, camera_n(4)), Policy{}));
  EXPECT_TRUE(m.apply(state(kA, 5, camera_n(5)), Policy{}));
}

TEST(ViewerModel, OlderStateCannotOverwriteANewerRotation) {
  ViewerModel m;
  const Quaternion q = to_wire_precision(from_axis_angle({1, 0, 0}, 0.3));
  EXPECT_TRUE(m.apply(envelope_from(kA, 5, Rotation::of(q)), Policy{}));
  EXPECT_TRUE(m.apply(state(kA, 4, camera_n(4)), Policy{}));  // framing still news
  EXPECT_EQ(m.camera().orientation, q);
  EXPECT_EQ(m.camera().zoom, 104.0);
}

TEST(ViewerModel, ApplyUpdateValueForm) {
  const ViewerModel m;
  auto out = apply_update(m, state(kA, 1, camera_n(1)), Policy{});
  EXPECT_TRUE(out.applied);
  EXPECT_EQ(m, ViewerModel{});
  auto again = apply_update(out.model, state(kA, 1, camera_n(1)), Policy{});
  EXPECT_FALSE(again.applied);
  EXPECT_EQ(again.model, out.model);
}

TEST(ViewerModel, TwoFreshModelsAgreeForAnyPermutation) {
  testing::Rng rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Envelope> es;
    const int n = 1 + static_cast<int>(testing::below(rng, 5));
    for (int i = 0; i < n; ++i) es.push_back(state(kA, 1 + testing::below(rng, 6), camera_n(i)));
    // Distinct sequence numbers per origin: a real sender never reuses one.
    std::sort(es.begin(), es.end(), [](auto& a, auto& b) { return a.seq < b.seq; });
    es.erase(std::unique(es.begin(), es.end(), [](auto& a, auto& b) { return a.seq == b.seq; }), es.end());
    std::vector<int> idx(es.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::optional<ViewerModel> first;
    do {
      ViewerModel m;
      for (int i : idx) m.apply(es[i], Policy{});
      if (!first) first = m;
      EXPECT_EQ(m, *first);
    } while (std::next_permutation(idx.begin(), idx.end()));
    EXPECT_EQ(first->camera(), std::get<State>(es.back().payload).camera);
  }
}

TEST(ViewerModel, LocalEditsValidate) {
  ViewerModel m;
  EXPECT_THROW(m.set_zoom(0.0), std::invalid_argument);
  EXPECT_THROW(m.set_zoom(-1.0), std::invalid_argument);
  EXPECT_THROW(m.set_zoom(NAN), std::invalid_argument);
  m.set_zoom(50);
  EXPECT_EQ(m.camera().zoom, 50);
  EXPECT_THROW(m.set_camera(Camera{{0, 0, 0, 0}, 100, {}}), std::invalid_argument);
  m.set_orientation({2, 0, 0, 0});
  EXPECT_EQ(m.camera().orientation, Quaternion{});
}

}  // namespace
}  // namespace molsync
