#include "doctest.h"

#include <vector>

#include "decsim/engine.hpp"

using namespace decsim;

TEST_CASE("events pop in (time, seq) order") {
  Engine eng;
  std::vector<int> order;
  eng.schedule(2.0, EventKind::kCustom, 0, 0, 0, [&] { order.push_back(2); });
  eng.schedule(1.0, EventKind::kCustom, 0, 0, 0, [&] { order.push_back(1); });
  eng.schedule(2.0, EventKind::kCustom, 0, 0, 0, [&] { order.push_back(3); });
  eng.run_until([] { return false; });
  CHECK(order == std::vector<int>{1, 2, 3});
  CHECK(eng.now() == 2.0);
}

TEST_CASE("scheduling at the current clock runs after already-queued equal-time events") {
  Engine eng;
  std::vector<int> order;
  eng.schedule(1.0, EventKind::kCustom, 0, 0, 0, [&] {
    order.push_back(1);
    eng.schedule(1.0, EventKind::kCustom, 0, 0, 0, [&] { order.push_back(3); });
  });
  eng.schedule(1.0, EventKind::kCustom, 0, 0, 0, [&] { order.push_back(2); });
  eng.run_until([] { return false; });
  CHECK(order == std::vector<int>{1, 2, 3});
}

TEST_CASE("past-time scheduling is rejected") {
  Engine eng;
  eng.schedule(5.0, EventKind::kCustom, 0, 0, 0, [&] {
    CHECK_THROWS_AS(eng.schedule(4.0, EventKind::kCustom, 0, 0, 0, [] {}),
                    std::logic_error);
  });
  eng.run_until([] { return false; });
}

TEST_CASE("clock is nondecreasing across dispatches") {
  Engine eng;
  double last = -1.0;
  for (int i = 0; i < 100; ++i) {
    eng.schedule((i * 7919) % 13 * 0.5, EventKind::kCustom, 0, 0, 0, [&, i] {
      CHECK(eng.now() >= last);
      last = eng.now();
    });
  }
  eng.run_until([] { return false; });
}

TEST_CASE("cancel suppresses dispatch") {
  Engine eng;
  int fired = 0;
  const uint64_t h = eng.schedule(1.0, EventKind::kCustom, 0, 0, 0, [&] { ++fired; });
  eng.schedule(2.0, EventKind::kCustom, 0, 0, 0, [&] { ++fired; });
  eng.cancel(h);
  eng.run_until([] { return false; });
  CHECK(fired == 1);
}

TEST_CASE("stop predicate halts before the next dispatch") {
  Engine eng;
  int fired = 0;
  bool stop = false;
  eng.schedule(1.0, EventKind::kCustom, 0, 0, 0, [&] {
    ++fired;
    stop = true;
  });
  eng.schedule(2.0, EventKind::kCustom, 0, 0, 0, [&] { ++fired; });
  const double t = eng.run_until([&] { return stop; });
  CHECK(fired == 1);
  CHECK(t == 1.0);
}

TEST_CASE("livelock guard aborts runaway simulations") {
  Engine eng;
  eng.set_event_cap(50);
  std::function<void()> loop = [&] {
    eng.schedule(eng.now(), EventKind::kCustom, 0, 0, 0, loop);
  };
  eng.schedule(0.0, EventKind::kCustom, 0, 0, 0, loop);
  CHECK_THROWS_AS(eng.run_until([] { return false; }), SimDiagnostic);
}

TEST_CASE("channel delivery algebra") {
  Engine eng;
  Channel ch{0, 1, 2.0, 0.0};

  SUBCASE("idle channel: send at 5 delivers at 7") {
    CHECK(ch.send(eng, 5.0) == doctest::Approx(7.0));
    CHECK(ch.busy_until == doctest::Approx(7.0));
  }
  SUBCASE("busy until 6: send at 5 delivers at 8") {
    ch.busy_until = 6.0;
    CHECK(ch.send(eng, 5.0) == doctest::Approx(8.0));
  }
  SUBCASE("infinite delay swallows the payload") {
    Channel dead{0, 1, kInf, 0.0};
    CHECK(is_inf(dead.send(eng, 1.0)));
    CHECK(eng.messages_sent() == 0);
  }
  SUBCASE("FIFO: back-to-back sends serialize") {
    CHECK(ch.send(eng, 0.0) == doctest::Approx(2.0));
    CHECK(ch.send(eng, 0.0) == doctest::Approx(4.0));
    CHECK(ch.send(eng, 3.0) == doctest::Approx(6.0));
    CHECK(eng.messages_sent() == 3);
  }
}

TEST_CASE("two serialized producers see at most one transmission of queueing") {
  // Each producer keeps at most one message outstanding, so any send waits
  // for at most one foreign transmission: delivery <= now + 2 * delay.
  Engine eng;
  Channel ch{0, 1, 3.0, 0.0};
  struct Producer {
    bool sending = false;
    int sent = 0;
  } a, b;
  double worst = 0.0;
  std::function<void(Producer&)> pump = [&](Producer& p) {
    if (p.sending || p.sent >= 25) return;
    p.sending = true;
    ++p.sent;
    const double now = eng.now();
    const double t = ch.send(eng, now);
    CHECK(t - now <= 2.0 * ch.delay + 1e-12);
    worst = std::fmax(worst, t - now);
    eng.schedule(t, EventKind::kSendDone, 0, 1, 0, [&] {
      p.sending = false;
      pump(p);
    });
  };
  pump(a);
  eng.schedule(1.0, EventKind::kCustom, 0, 0, 0, [&] { pump(b); });
  eng.run_until([] { return false; });
  CHECK(a.sent == 25);
  CHECK(b.sent == 25);
  CHECK(worst > ch.delay);  // interleaving actually happened
}

TEST_CASE("every finite send is delivered exactly once") {
  Engine eng;
  Channel ch{0, 1, 1.5, 0.0};
  int delivered = 0;
  for (int i = 0; i < 20; ++i) {
    const double t = ch.send(eng, 0.25 * i);
    eng.schedule(t, EventKind::kMessageDelivered, 0, 1, 0, [&] { ++delivered; });
  }
  eng.run_until([] { return false; });
  CHECK(delivered == 20);
  CHECK(eng.messages_sent() == 20);
}

TEST_CASE("compute unit discards interrupted work and clamps zero durations") {
  Engine eng;
  ComputeUnit unit;
  unit.worker = 0;
  int done = 0;
  unit.start(eng, 2.0, 0, [&] {
    unit.pending = 0;
    ++done;
  });
  eng.schedule(1.0, EventKind::kCustom, 0, 0, 0, [&] {
    unit.interrupt(eng);
    unit.start(eng, 2.0, 0, [&] {
      unit.pending = 0;
      ++done;
    });
  });
  eng.run_until([] { return false; });
  CHECK(done == 1);
  CHECK(eng.now() == doctest::Approx(3.0));

  ComputeUnit zero;
  int zdone = 0;
  zero.start(eng, 0.0, 0, [&] {
    zero.pending = 0;
    ++zdone;
  });
  eng.run_until([] { return false; });
  CHECK(zdone == 1);

  ComputeUnit never;
  never.start(eng, kInf, 0, [&] { FAIL("infinite compute completed"); });
  CHECK_FALSE(never.busy());
}
