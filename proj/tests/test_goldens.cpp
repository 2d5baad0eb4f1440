// Pinned seeded outputs. The scheduler and router values come from the
// independent reference in tests/oracles/rng_oracle.py; the stub reply was
// recorded from a seeded run.

#include "support.hpp"

#include "costudy/agent.hpp"
#include "costudy/router.hpp"
#include "costudy/scheduler.hpp"

#include <doctest.h>

using namespace costudy;
using namespace costudy::test;

TEST_SUITE("action-scheduler") {
TEST_CASE("golden: first passive transition for seed 7") {
    Rng rng(7);
    const auto t = next_passive_transition(rng, SchedulerConfig{});
    CHECK(t.delay_ms == 165'490);
    CHECK(t.action == PassiveAction::taking_notes);
    CHECK(derive_seed(7, "scheduler/agent-1") == 5016462608776280489ULL);
}
}

TEST_SUITE("interaction-router") {
TEST_CASE("golden: first group routing for seed 11") {
    auto s = make_session(11);
    const auto ev = route_group(s, "Why is binary search O(log n)?");
    std::vector<std::string> responders;
    for (const auto& e : ev) {
        if (e.kind == EventKind::agent_chat) responders.push_back(e.data["agent_id"].get<std::string>());
    }
    CHECK(responders == std::vector<std::string>{"agent-3"});
}
}

TEST_SUITE("provider-gateway") {
TEST_CASE("golden: stub reply for seed 1") {
    StubProvider p(1);
    ChatRequest r;
    r.system_prompt = assemble_system_prompt(default_roster()[0], parse_transcript(kTranscript));
    r.messages.push_back(ChatTurn{Role::user, "why O(n^2)?", std::nullopt});
    CHECK(p.complete(r) == "<explaining> Ava here. You asked: \"why O(n^2)?\" The key idea is how the loop invariant "
                           "holds after each pass.");
}
}
