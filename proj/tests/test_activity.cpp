#include "costudy/activity.hpp"
#include "costudy/errors.hpp"
#include "costudy/rng.hpp"

#include <doctest.h>

using namespace costudy;

TEST_SUITE("activity-monitor") {

TEST_CASE("code idle fires only after strictly more than 60 s") {
    const IdleThresholds th;
    ActivityTrack t;
    observe(t, Channel::mouse, 1'000'000);
    observe(t, Channel::notes, 1'000'000);
    observe(t, Channel::code, 1'000);
    CHECK(tick(t, th, 59'999).empty());
    CHECK(tick(t, th, 61'000).empty()); // exactly at threshold
    const auto fired = tick(t, th, 61'001);
    REQUIRE(fired.size() == 1);
    CHECK(fired[0] == Trigger::code_idle);
}

TEST_CASE("a channel fires once per idle episode and rearms on activity") {
    const IdleThresholds th;
    ActivityTrack t;
    observe(t, Channel::mouse, 1'000'000);
    observe(t, Channel::notes, 1'000'000);
    observe(t, Channel::code, 1'000);
    CHECK(tick(t, th, 61'001).size() == 1);
    CHECK(tick(t, th, 100'000).empty());
    CHECK(tick(t, th, 500'000).empty());
    observe(t, Channel::code, 62'000);
    CHECK(tick(t, th, 122'000).empty());
    const auto again = tick(t, th, 122'001);
    REQUIRE(again.size() == 1);
    CHECK(again[0] == Trigger::code_idle);
}

TEST_CASE("recent activity on every channel gives no triggers") {
    ActivityTrack t;
    for (const auto c : kChannels) observe(t, c, 10'000);
    CHECK(tick(t, IdleThresholds{}, 20'000).empty());
}

TEST_CASE("several stale channels fire in channel order") {
    ActivityTrack t;
    observe(t, Channel::notes, 500'000);
    const auto fired = tick(t, IdleThresholds{}, 200'000);
    REQUIRE(fired.size() == 2);
    CHECK(fired[0] == Trigger::mouse_idle);
    CHECK(fired[1] == Trigger::code_idle);
    const auto all = tick(t, IdleThresholds{}, 700'000);
    REQUIRE(all.size() == 1);
    CHECK(all[0] == Trigger::notes_idle);
}

TEST_CASE("debounce holds over random traces") {
    const IdleThresholds th;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        Rng rng(seed);
        ActivityTrack t;
        std::array<int, 3> fires_since_activity{};
        std::array<std::int64_t, 3> last{};
        std::int64_t now = 0;
        for (int step = 0; step < 400; ++step) {
            now += rng.uniform_int(0, 40'000);
            if (rng.chance(0.3)) {
                const auto c = kChannels[rng.index(3)];
                observe(t, c, now);
                fires_since_activity[static_cast<std::size_t>(c)] = 0;
                last[static_cast<std::size_t>(c)] = now;
            }
            for (const auto trig : tick(t, th, now)) {
                const auto i = static_cast<std::size_t>(trig);
                ++fires_since_activity[i];
                CHECK(fires_since_activity[i] == 1);
                CHECK(now - last[i] > th.for_channel(kChannels[i]));
            }
            for (std::size_t i = 0; i < 3; ++i) {
                if (now - last[i] > th.for_channel(kChannels[i])) CHECK(fires_since_activity[i] == 1);
            }
        }
    }
}

TEST_CASE("threshold validation and names") {
    IdleThresholds th;
    th.code_idle_ms = 0;
    CHECK_THROWS_AS(th.validate(), ConfigError);
    CHECK(channel_from_string("code") == Channel::code);
    CHECK_FALSE(channel_from_string("keyboard"));
    CHECK(to_string(Trigger::notes_idle) == "notes_idle");
}

}
