#pragma once

// Achievability checks and staged plan search over context graphs: each
// stage applies one grounded usage as a DELETE/INSERT/WHERE update.

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "aat/error.h"
#include "aat/rdf.h"
#include "aat/usage.h"

namespace aat::planner {

class PlannerError : public Error {
 public:
  using Error::Error;
};

class NotApplicable : public PlannerError {
 public:
  using PlannerError::PlannerError;
};

class NoPlanFound : public PlannerError {
 public:
  NoPlanFound(std::size_t explored, std::size_t covered, std::size_t goalSize,
              std::optional<std::size_t> atIndex = std::nullopt);
  std::size_t explored() const { return explored_; }
  // Most goal triples entailed by any state reached, out of goalSize().
  std::size_t covered() const { return covered_; }
  std::size_t goalSize() const { return goalSize_; }
  // Position of the failing goal within a goal sequence.
  const std::optional<std::size_t>& atIndex() const { return atIndex_; }
  NoPlanFound at(std::size_t index) const { return NoPlanFound(explored_, covered_, goalSize_, index); }

 private:
  std::size_t explored_;
  std::size_t covered_;
  std::size_t goalSize_;
  std::optional<std::size_t> atIndex_;
};

class LimitExceeded : public PlannerError {
 public:
  explicit LimitExceeded(std::size_t explored)
      : PlannerError("search stopped after " + std::to_string(explored) + " expansions"), explored_(explored) {}
  std::size_t explored() const { return explored_; }

 private:
  std::size_t explored_;
};

enum class Strategy { Bfs, Greedy, Subgoal };

std::string_view toString(Strategy strategy);
// "bfs", "greedy" or "subgoal"; throws PlannerError otherwise.
Strategy parseStrategy(std::string_view name);

// iot:switchstatus, iot:status, iot:currentStatus, iot:brightness.
std::set<std::string> defaultFunctionalPredicates();

struct SearchConfig {
  Strategy strategy = Strategy::Bfs;
  int maxDepth = 6;
  std::size_t maxExpansions = 10000;
  // Inserting (s, p, o) for one of these first removes every (s, p, *).
  std::set<std::string> functionalPredicates = defaultFunctionalPredicates();
  usage::GroundingMode grounding = usage::GroundingMode::Referenced;
};

struct PlanStep {
  std::string usageId;
  std::string instance;
  std::string artifactName;
  std::string operationName;
  rdf::Graph groundedPre;
  rdf::Graph groundedPost;
};

struct Plan {
  std::vector<PlanStep> steps;
  rdf::Graph projectedFinal;
  std::size_t explored = 0;
};

struct Candidate {
  std::string usageId;
  std::string instance;

  auto operator<=>(const Candidate&) const = default;
};

// Every (usage, instance) pair whose grounded postcondition shares a
// predicate and value with some goal triple, where a status about the
// instance itself must name that instance in the goal and any other status
// must be about an instance of the usage's artifact type. Sorted.
std::vector<Candidate> directlyAchievable(const rdf::Graph& goal, const std::vector<usage::UsageDecl>& usages,
                                          const usage::InstanceCatalog& catalog,
                                          usage::GroundingMode mode = usage::GroundingMode::Referenced);

// entails(grounded postcondition ∪ topology, goal).
bool postconditionEntails(const rdf::Graph& goal, const usage::UsageDecl& usage, const std::string& instance,
                          const usage::InstanceCatalog& catalog,
                          usage::GroundingMode mode = usage::GroundingMode::Referenced);

bool applicable(const rdf::Graph& state, const usage::UsageDecl& usage, const std::string& instance,
                const usage::InstanceCatalog& catalog, usage::GroundingMode mode = usage::GroundingMode::Referenced);

// Throws NotApplicable when the precondition does not match `state`.
rdf::Graph stageTransition(const rdf::Graph& state, const usage::UsageDecl& usage, const std::string& instance,
                           const usage::InstanceCatalog& catalog, const SearchConfig& config = {});

class Planner {
 public:
  Planner(std::vector<usage::UsageDecl> usages, usage::InstanceCatalog catalog, SearchConfig config = {});

  // Throws PlannerError on an empty goal, NoPlanFound or LimitExceeded.
  Plan plan(const rdf::Graph& initial, const rdf::Graph& goal) const;
  // Each goal planned from the previous plan's projected final state.
  std::vector<Plan> planSequence(const rdf::Graph& initial, const std::vector<rdf::Graph>& goals) const;

  // Applicable (usage, instance) pairs in expansion order.
  std::vector<Candidate> applicableIn(const rdf::Graph& state) const;
  rdf::Graph apply(const rdf::Graph& state, const Candidate& candidate) const;
  // Replays `steps` from `initial`; throws NotApplicable if a step no longer applies.
  rdf::Graph replay(const rdf::Graph& initial, const std::vector<PlanStep>& steps) const;

  const std::vector<usage::UsageDecl>& usages() const { return usages_; }
  const usage::InstanceCatalog& catalog() const { return catalog_; }
  const SearchConfig& config() const { return config_; }

 private:
  // A grounded usage ready to apply: the precondition as WHERE/DELETE
  // template and the postcondition as INSERT template.
  struct Action {
    Candidate key;
    std::size_t usageIndex = 0;
    std::string artifactName;
    std::string operationName;
    usage::Grounding grounding;
    rdf::Pattern where;
    rdf::Pattern insert;
  };

  const Action* find(const Candidate& candidate) const;
  PlanStep stepFor(const Action& action) const;
  Plan bfs(const rdf::Graph& initial, const rdf::Graph& goal) const;
  Plan greedy(const rdf::Graph& initial, const rdf::Graph& goal) const;
  Plan subgoal(const rdf::Graph& initial, const rdf::Graph& goal) const;
  bool achieve(rdf::Graph& state, const rdf::Graph& goal, int depth, std::vector<const Action*>& steps,
               std::size_t& explored) const;

  std::vector<usage::UsageDecl> usages_;
  usage::InstanceCatalog catalog_;
  SearchConfig config_;
  std::vector<Action> actions_;
};

// `step N: usage <iri> instance <iri> operation <name>`, one line per step.
std::string formatPlan(const Plan& plan);

}  // namespace aat::planner
