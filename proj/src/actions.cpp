#include "costudy/actions.hpp"

#include <cctype>
#include <string>

namespace costudy {

std::string_view to_string(PassiveAction a) {
    switch (a) {
    case PassiveAction::typing: return "typing";
    case PassiveAction::watching: return "watching";
    case PassiveAction::thinking: return "thinking";
    case PassiveAction::taking_notes: return "taking_notes";
    case PassiveAction::expressing_confusion: return "expressing_confusion";
    case PassiveAction::stretching: return "stretching";
    case PassiveAction::rubbing_eyes: return "rubbing_eyes";
    case PassiveAction::eating: return "eating";
    case PassiveAction::drinking: return "drinking";
    case PassiveAction::checking_phone: return "checking_phone";
    }
    return "typing";
}

std::string_view to_string(ActiveAction a) {
    switch (a) {
    case ActiveAction::asking: return "asking";
    case ActiveAction::chatting: return "chatting";
    case ActiveAction::encouraging: return "encouraging";
    case ActiveAction::exciting: return "exciting";
    case ActiveAction::explaining: return "explaining";
    case ActiveAction::welcoming: return "welcoming";
    }
    return "chatting";
}

std::string_view to_string(Phase p) {
    switch (p) {
    case Phase::starting: return "starting";
    case Phase::continuing: return "continuing";
    case Phase::ending: return "ending";
    }
    return "starting";
}

std::optional<PassiveAction> passive_action_from_string(std::string_view s) {
    for (auto a : kPassiveActions) {
        if (to_string(a) == s) return a;
    }
    return std::nullopt;
}

std::optional<ActiveAction> active_action_from_string(std::string_view s) {
    std::string lower(s);
    for (auto& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    for (auto a : kActiveActions) {
        if (to_string(a) == lower) return a;
    }
    return std::nullopt;
}

std::optional<Phase> phase_from_string(std::string_view s) {
    for (auto p : kPhases) {
        if (to_string(p) == s) return p;
    }
    return std::nullopt;
}

} // namespace costudy
