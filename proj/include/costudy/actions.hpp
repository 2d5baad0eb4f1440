#pragma once

#include <array>
#include <optional>
#include <string_view>

namespace costudy {

enum class PassiveAction {
    // study
    typing,
    watching,
    thinking,
    taking_notes,
    expressing_confusion,
    // break
    stretching,
    rubbing_eyes,
    eating,
    drinking,
    checking_phone,
};

inline constexpr std::array kPassiveActions{
    PassiveAction::typing,     PassiveAction::watching,     PassiveAction::thinking,
    PassiveAction::taking_notes, PassiveAction::expressing_confusion, PassiveAction::stretching,
    PassiveAction::rubbing_eyes, PassiveAction::eating,     PassiveAction::drinking,
    PassiveAction::checking_phone,
};

// Study behaviours the scheduler cycles into; typing is the resting default.
inline constexpr std::array kStudyActions{
    PassiveAction::watching, PassiveAction::thinking, PassiveAction::taking_notes,
    PassiveAction::expressing_confusion,
};

inline constexpr std::array kBreakActions{
    PassiveAction::stretching, PassiveAction::rubbing_eyes, PassiveAction::eating,
    PassiveAction::drinking,   PassiveAction::checking_phone,
};

constexpr bool is_break(PassiveAction a) {
    return a >= PassiveAction::stretching;
}

enum class ActiveAction { asking, chatting, encouraging, exciting, explaining, welcoming };

inline constexpr std::array kActiveActions{
    ActiveAction::asking,    ActiveAction::chatting,   ActiveAction::encouraging,
    ActiveAction::exciting,  ActiveAction::explaining, ActiveAction::welcoming,
};

enum class Phase { starting, continuing, ending };

inline constexpr std::array kPhases{Phase::starting, Phase::continuing, Phase::ending};

std::string_view to_string(PassiveAction a);
std::string_view to_string(ActiveAction a);
std::string_view to_string(Phase p);

std::optional<PassiveAction> passive_action_from_string(std::string_view s);
// Case-insensitive.
std::optional<ActiveAction> active_action_from_string(std::string_view s);
std::optional<Phase> phase_from_string(std::string_view s);

} // namespace costudy
