#pragma once

#include "costudy/activity.hpp"
#include "costudy/config.hpp"
#include "costudy/session.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace costudy {

// A highlighted region of the tutorial video plus the question about it.
// Coordinates are in intrinsic video pixels.
struct BrushQuery {
    int min_x = 0;
    int min_y = 0;
    int max_x = 0;
    int max_y = 0;
    std::string image;
    std::string image_mime = "image/png";
    std::string question;
    std::int64_t video_position_ms = 0;

    // Throws ValidationError naming the offending field.
    void validate(const VideoFrame& frame) const;
};

// Each router operation appends the perceive event itself, then any replies,
// notices and action changes, and returns everything it appended. In
// baseline mode only the perceive side is recorded.

std::vector<SessionEvent> route_private(Session& session, std::string_view agent_id, std::string_view text);

// One to three distinct responders, drawn uniformly from the roster.
std::vector<SessionEvent> route_group(Session& session, std::string_view text);

// Relays the most recent agent message in the group room to a different
// agent and posts its reply; seeds the room with an opening remark when no
// agent has spoken yet. Reschedules the next forward. No-op for a roster of one.
std::vector<SessionEvent> forward_between_agents(Session& session, std::optional<std::uint64_t> cause);

// Exactly one responder; the reply goes to the group room tagged brush_reply.
std::vector<SessionEvent> route_brush(Session& session, const BrushQuery& query);

std::vector<SessionEvent> route_audio(Session& session, std::string_view agent_id, std::string_view audio,
                                      std::string_view mime);

std::vector<SessionEvent> dispatch_trigger(Session& session, Trigger trigger, std::optional<std::uint64_t> cause);

} // namespace costudy
