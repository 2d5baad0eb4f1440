#pragma once

#include "costudy/engine.hpp"

#include <vector>

namespace costudy {

// One step of a scripted session: a wire event ingested at at_ms, or a bare
// clock advance when wire is null.
struct ScriptStep {
    std::int64_t at_ms = 0;
    Json wire;
};

// A five-minute study session: private and group chat, a brush query, a
// voice question, code edits at 10 s and 50 s, and idle gaps long enough
// for each monitor channel to fire. Clock advances every tick_ms.
std::vector<ScriptStep> demo_script(std::int64_t tick_ms = 1000);

// Steps must be in time order.
void run_script(Session& session, const std::vector<ScriptStep>& steps);

} // namespace costudy
