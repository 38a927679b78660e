#pragma once

// Side-effect-free planners behind the actor tiers. select_decision asks
// whether each tier has work; the performing functions act on the same plans.

#include <optional>
#include <string>
#include <vector>

#include "discourse/actor.hpp"

namespace discourse::detail {

/// Own SUGGEST/REQUEST acts the user let pass without grounding.
std::vector<std::string> stale_own_proposals(const DiscourseState& s);

bool grounding_applicable(const DiscourseState& s);

struct NegotiationMove {
  ActType type = ActType::Accept;
  Term content;
  std::vector<std::string> about;  ///< proposal ids
};

std::vector<NegotiationMove> plan_negotiation(const DiscourseState& s, const Policy& policy,
                                              const World& world);

struct GoalPlan {
  enum class Kind {
    None,
    AskGoal,
    ResolveChoices,  ///< choice points block elaboration
    Suggest,
    Eval,
    ConsumeBuild,  ///< plan ready and already assented to
    Execute,
    NoElaboration,
  };
  Kind kind = Kind::None;
  std::vector<Term> steps;
  std::vector<ChoicePoint> choices;
};

GoalPlan plan_goals(const DiscourseState& s, const Policy& policy, const World& world);

/// Shared steps plus open step proposals, as the plan reasoner should see them.
DomainPlan working_plan(const DiscourseState& s);

/// Whether tiers 3-6 have anything to do if the system held the turn.
bool has_agenda(const DiscourseState& s, const Policy& policy, const World& world);

bool question_like(ActType t);

std::string batch_group(const DiscourseState& s, std::string_view tag);

}  // namespace discourse::detail
