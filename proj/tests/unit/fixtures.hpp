#pragma once

// Helpers shared by the unit, property and acceptance tests.

#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "discourse/engine.hpp"
#include "discourse/harness.hpp"

namespace fixtures {

using nlohmann::json;

inline json act(std::string type, std::string content = "", std::vector<std::string> marks = {}) {
  json a = {{"type", std::move(type)}};
  if (!content.empty()) a["content"] = std::move(content);
  if (!marks.empty()) a["marks"] = marks;
  return a;
}

inline json utterance(std::string utt, std::int64_t tick, std::vector<json> acts,
                      std::string turn = "release") {
  return {{"utt", std::move(utt)},
          {"speaker", "USER"},
          {"tick", tick},
          {"turn", std::move(turn)},
          {"acts", std::move(acts)}};
}

inline std::string data_path(const std::string& rel) {
  return std::string(DISCOURSE_DATA_DIR) + "/" + rel;
}

inline discourse::DialogueScript script_of(const std::vector<json>& records) {
  std::string text;
  for (const auto& r : records) text += r.dump() + "\n";
  return discourse::parse_script(text);
}

inline discourse::EngineOptions options(std::string_view policy = "cooperative",
                                        discourse::World world = discourse::default_world()) {
  discourse::EngineOptions o;
  o.policy = discourse::load_policy(policy);
  o.world = std::move(world);
  return o;
}

/// Random but well-formed user dialogue over the default world's vocabulary.
class ScriptGenerator {
 public:
  explicit ScriptGenerator(std::uint64_t seed) : rng_(seed) {}

  std::vector<json> next(int min_utts = 3, int max_utts = 10) {
    std::vector<json> out;
    const int n = uniform(min_utts, max_utts);
    std::int64_t tick = 0;
    for (int i = 1; i <= n; ++i) {
      tick += uniform(1, 4);
      if (chance(0.1)) {
        out.push_back({{"pause", true}, {"tick", tick}});
        tick += uniform(1, 2);
      }
      std::vector<json> acts;
      const int k = uniform(1, 3);
      for (int j = 0; j < k; ++j) acts.push_back(random_act(i));
      out.push_back(utterance("u" + std::to_string(i), tick, std::move(acts),
                              chance(0.35) ? "keep" : "release"));
    }
    return out;
  }

  json random_act(int utt_index) {
    switch (uniform(0, 11)) {
      case 0: return act("YNQ", pick(kFacts));
      case 1: return act("CHECK", pick(kFacts));
      case 2: return act("WHQ", pick(kWhPatterns));
      case 3: return act("REQUEST", pick(kActions));
      case 4: return act("INFORM", pick(kActions), {"imperative"});
      case 5: return act("SUGGEST", pick(kActions));
      case 6: return act("INFORM", pick(kFacts));
      case 7: return act("INFORM", "(MUST (MOVE-COMMODITY ORANGES " + pick(kCities) + "))",
                         {"goal-stating"});
      case 8: return act(chance(0.5) ? "ACCEPT" : "REJECT");
      case 9: return act("ACK");
      case 10: return act("YNQ", pick(kFacts), {"defective"});
      default:
        return utt_index > 1 ? act("CHECK", "@u" + std::to_string(uniform(1, utt_index - 1)))
                             : act("YNQ", pick(kFacts));
    }
  }

  int uniform(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  bool chance(double p) { return std::bernoulli_distribution(p)(rng_); }
  const std::string& pick(const std::vector<std::string>& v) {
    return v[static_cast<std::size_t>(uniform(0, static_cast<int>(v.size()) - 1))];
  }

  inline static const std::vector<std::string> kCities{"AVON", "BATH", "CORNING", "DANSVILLE"};
  inline static const std::vector<std::string> kFacts{
      "(:AT ORANGES CORNING)", "(:AT ORANGES AVON)",        "(:AT ENGINE-E1 AVON)",
      "(:AT BOXCAR-B1 BATH)",  "(:ISA ORANGES COMMODITY)",  "(:ISA ORANGES ENGINE)",
      "(:CONNECTED AVON BATH)", "(:REQUIRES MOVE-BOXCAR ENGINE)", "(:IN ORANGES BOXCAR-B1)"};
  inline static const std::vector<std::string> kWhPatterns{
      "(:AT ORANGES ?X)", "(:AT ENGINE-E1 ?X)", "(:AT ?X DANSVILLE)", "(:AT ?X ELMIRA)"};
  inline static const std::vector<std::string> kActions{
      "(MOVE-ENGINE ENGINE-E1 AVON DANSVILLE)", "(COUPLE ENGINE-E1 BOXCAR-B1 DANSVILLE)",
      "(MOVE-ENGINE ENGINE-E1 DANSVILLE CORNING)", "(LOAD ORANGES BOXCAR-B1 CORNING)",
      "(MOVE-ENGINE ENGINE-E1 CORNING BATH)", "(MOVE-ENGINE ENGINE-E1 AVON ELMIRA)",
      "(LOAD ORANGES ENGINE-E1 CORNING)", "(MOVE-ENGINE ?E AVON BATH)",
      "(MOVE-COMMODITY ORANGES BATH)"};

 private:
  std::mt19937_64 rng_;
};

}  // namespace fixtures
