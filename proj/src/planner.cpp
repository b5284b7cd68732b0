#include "aat/planner.h"

#include <algorithm>
#include <map>
#include <queue>
#include <tuple>
#include <unordered_set>

#include "aat/semdoc.h"

namespace aat::planner {

namespace {

std::string skolemVariable(const rdf::Term& t) { return "k_" + t.value().substr(t.value().rfind(':') + 1); }

// Precondition as a WHERE/DELETE template: blanks and skolem IRIs become
// variables so that they bind to whatever the state holds.
rdf::Pattern wherePattern(const rdf::Graph& pre) {
  auto open = [](const rdf::Term& t) {
    if (t.isBlank()) return rdf::Term::variable("b_" + t.value());
    if (usage::isSkolem(t)) return rdf::Term::variable(skolemVariable(t));
    return t;
  };
  rdf::Pattern out;
  for (const auto& t : pre) out.push_back({open(t.subject), open(t.predicate), open(t.object)});
  return out;
}

// Postcondition as an INSERT template: skolems shared with the precondition
// reuse its variables; leftover blanks get stable skolem IRIs so repeated
// application does not grow the state.
rdf::Pattern insertPattern(const rdf::Graph& post, const rdf::Graph& pre, const std::string& usageId) {
  std::set<rdf::Term> preSkolems;
  for (const auto& t : pre) {
    for (const auto* term : {&t.subject, &t.predicate, &t.object}) {
      if (usage::isSkolem(*term)) preSkolems.insert(*term);
    }
  }
  auto close = [&](const rdf::Term& t) {
    if (t.isBlank()) return rdf::Term::iri(usage::skolemIri(usageId, "_:" + t.value()));
    if (preSkolems.count(t)) return rdf::Term::variable(skolemVariable(t));
    return t;
  };
  rdf::Pattern out;
  for (const auto& t : post) out.push_back({close(t.subject), close(t.predicate), close(t.object)});
  return out;
}

// Skolem IRIs back to blanks, for entailment checks against a state.
rdf::Graph asQuery(const rdf::Graph& g) {
  auto open = [](const rdf::Term& t) { return usage::isSkolem(t) ? rdf::Term::blank(skolemVariable(t)) : t; };
  rdf::Graph out;
  for (const auto& t : g) out.insert({open(t.subject), open(t.predicate), open(t.object)});
  return out;
}

rdf::Graph transition(const rdf::Graph& state, const rdf::Pattern& where, const rdf::Pattern& insert,
                      const std::set<std::string>& functional) {
  auto solutions = rdf::match(where, state);
  if (solutions.empty()) throw NotApplicable("precondition does not hold");
  rdf::Graph next = rdf::applyUpdate(state, where, insert, where);

  std::set<rdf::Triple> inserted;
  for (const auto& solution : solutions) {
    for (const auto& t : insert) {
      if (auto inst = rdf::instantiate(t, solution)) inserted.insert(*inst);
    }
  }
  std::vector<rdf::Triple> stale;
  for (const auto& added : inserted) {
    if (!added.predicate.isIri() || !functional.count(added.predicate.value())) continue;
    for (const auto& t : next.withSubject(added.subject)) {
      if (t.predicate == added.predicate && !inserted.count(t)) stale.push_back(t);
    }
  }
  for (const auto& t : stale) next.erase(t);
  return next;
}

std::string canonical(const rdf::Graph& g) { return semdoc::serializeNTriples(g); }

std::size_t coverage(const rdf::Graph& state, const rdf::Graph& goal) {
  std::size_t n = 0;
  for (const auto& t : goal) {
    if (rdf::entails(state, rdf::Graph{t})) ++n;
  }
  return n;
}

std::vector<std::string> instancesFor(const usage::UsageDecl& u, const usage::InstanceCatalog& catalog) {
  std::set<std::string> out;
  for (const auto& type : u.artifactTypes) {
    for (const auto& i : catalog.instancesOf(type)) out.insert(i);
  }
  return {out.begin(), out.end()};
}

usage::Grounding groundFor(const usage::UsageDecl& u, const std::string& instance,
                           const usage::InstanceCatalog& catalog, usage::GroundingMode mode) {
  const auto* info = catalog.find(instance);
  if (!info) throw usage::TypeMismatch("unknown instance " + instance);
  return usage::ground(u, instance, info->types, mode);
}

std::string showId(const std::string& id) { return id.rfind("_:", 0) == 0 ? id : "<" + id + ">"; }

}  // namespace

NoPlanFound::NoPlanFound(std::size_t explored, std::size_t covered, std::size_t goalSize,
                         std::optional<std::size_t> atIndex)
    : PlannerError("no plan found" + (atIndex ? " for goal " + std::to_string(*atIndex) : std::string()) + " after " +
                   std::to_string(explored) + " expansions; best partial coverage " + std::to_string(covered) + "/" +
                   std::to_string(goalSize) + " goal triples"),
      explored_(explored),
      covered_(covered),
      goalSize_(goalSize),
      atIndex_(atIndex) {}

std::string_view toString(Strategy strategy) {
  switch (strategy) {
    case Strategy::Bfs: return "bfs";
    case Strategy::Greedy: return "greedy";
    case Strategy::Subgoal: return "subgoal";
  }
  return "?";
}

Strategy parseStrategy(std::string_view name) {
  if (name == "bfs") return Strategy::Bfs;
  if (name == "greedy") return Strategy::Greedy;
  if (name == "subgoal") return Strategy::Subgoal;
  throw PlannerError("unknown strategy '" + std::string(name) + "' (expected bfs, greedy or subgoal)");
}

std::set<std::string> defaultFunctionalPredicates() {
  const std::string iot(semdoc::ns::kIot);
  return {iot + "switchstatus", iot + "status", iot + "currentStatus", iot + "brightness"};
}

std::vector<Candidate> directlyAchievable(const rdf::Graph& goal, const std::vector<usage::UsageDecl>& usages,
                                          const usage::InstanceCatalog& catalog, usage::GroundingMode mode) {
  std::vector<Candidate> out;
  for (const auto& u : usages) {
    std::set<std::string> typed;
    for (const auto& type : u.artifactTypes) {
      for (const auto& i : catalog.instancesOf(type)) typed.insert(i);
    }
    for (const auto& instance : typed) {
      if (!catalog.operationFor(instance, u.operationTypes)) continue;
      auto post = groundFor(u, instance, catalog, mode).post;
      const auto self = rdf::Term::iri(instance);
      bool achievable = false;
      for (const auto& g : goal) {
        for (const auto& s : post) {
          if (s.predicate != g.predicate) continue;
          if (s.object != g.object && !s.object.isBlank()) continue;
          if (s.subject == self) {
            achievable = g.subject == self || g.subject.isBlank();
          } else if (s.subject.isIri() && !usage::isSkolem(s.subject)) {
            achievable = s.subject == g.subject;
          } else {
            achievable = g.subject.isBlank() || (g.subject.isIri() && typed.count(g.subject.value()));
          }
          if (achievable) break;
        }
        if (achievable) break;
      }
      if (achievable) out.push_back({u.id, instance});
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool postconditionEntails(const rdf::Graph& goal, const usage::UsageDecl& u, const std::string& instance,
                          const usage::InstanceCatalog& catalog, usage::GroundingMode mode) {
  auto post = asQuery(groundFor(u, instance, catalog, mode).post);
  return rdf::entails(rdf::unionOf(post, catalog.topology()), goal).holds;
}

bool applicable(const rdf::Graph& state, const usage::UsageDecl& u, const std::string& instance,
                const usage::InstanceCatalog& catalog, usage::GroundingMode mode) {
  auto g = groundFor(u, instance, catalog, mode);
  return !g.hasPrecond || !rdf::match(wherePattern(g.pre), state).empty();
}

rdf::Graph stageTransition(const rdf::Graph& state, const usage::UsageDecl& u, const std::string& instance,
                           const usage::InstanceCatalog& catalog, const SearchConfig& config) {
  auto g = groundFor(u, instance, catalog, config.grounding);
  return transition(state, wherePattern(g.pre), insertPattern(g.post, g.pre, u.id), config.functionalPredicates);
}

Planner::Planner(std::vector<usage::UsageDecl> usages, usage::InstanceCatalog catalog, SearchConfig config)
    : usages_(std::move(usages)), catalog_(std::move(catalog)), config_(std::move(config)) {
  if (config_.maxDepth < 1) throw PlannerError("maxDepth must be at least 1");
  if (config_.maxExpansions < 1) throw PlannerError("maxExpansions must be at least 1");
  std::sort(usages_.begin(), usages_.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  for (std::size_t k = 0; k < usages_.size(); ++k) {
    const auto& u = usages_[k];
    for (const auto& instance : instancesFor(u, catalog_)) {
      auto operation = catalog_.operationFor(instance, u.operationTypes);
      if (!operation) continue;
      Action a;
      a.key = {u.id, instance};
      a.usageIndex = k;
      a.artifactName = catalog_.find(instance)->artifactName;
      a.operationName = *operation;
      a.grounding = groundFor(u, instance, catalog_, config_.grounding);
      a.where = wherePattern(a.grounding.pre);
      a.insert = insertPattern(a.grounding.post, a.grounding.pre, u.id);
      actions_.push_back(std::move(a));
    }
  }
  std::sort(actions_.begin(), actions_.end(), [](const Action& a, const Action& b) { return a.key < b.key; });
}

const Planner::Action* Planner::find(const Candidate& candidate) const {
  auto it = std::lower_bound(actions_.begin(), actions_.end(), candidate,
                             [](const Action& a, const Candidate& c) { return a.key < c; });
  return it != actions_.end() && it->key == candidate ? &*it : nullptr;
}

PlanStep Planner::stepFor(const Action& a) const {
  return PlanStep{a.key.usageId, a.key.instance, a.artifactName, a.operationName, a.grounding.pre, a.grounding.post};
}

std::vector<Candidate> Planner::applicableIn(const rdf::Graph& state) const {
  std::vector<Candidate> out;
  for (const auto& a : actions_) {
    if (!rdf::match(a.where, state).empty()) out.push_back(a.key);
  }
  return out;
}

rdf::Graph Planner::apply(const rdf::Graph& state, const Candidate& candidate) const {
  const Action* a = find(candidate);
  if (!a) throw NotApplicable("no usage " + candidate.usageId + " for instance " + candidate.instance);
  return transition(state, a->where, a->insert, config_.functionalPredicates);
}

rdf::Graph Planner::replay(const rdf::Graph& initial, const std::vector<PlanStep>& steps) const {
  rdf::Graph state = initial;
  for (const auto& step : steps) state = apply(state, {step.usageId, step.instance});
  return state;
}

Plan Planner::plan(const rdf::Graph& initial, const rdf::Graph& goal) const {
  if (goal.empty()) throw PlannerError("goal has no status statement");
  Plan result;
  switch (config_.strategy) {
    case Strategy::Bfs: result = bfs(initial, goal); break;
    case Strategy::Greedy: result = greedy(initial, goal); break;
    case Strategy::Subgoal: result = subgoal(initial, goal); break;
  }
  if (!rdf::entails(result.projectedFinal, goal)) {
    throw NoPlanFound(result.explored, coverage(result.projectedFinal, goal), goal.size());
  }
  return result;
}

std::vector<Plan> Planner::planSequence(const rdf::Graph& initial, const std::vector<rdf::Graph>& goals) const {
  std::vector<Plan> plans;
  rdf::Graph state = initial;
  for (std::size_t k = 0; k < goals.size(); ++k) {
    try {
      plans.push_back(plan(state, goals[k]));
    } catch (const NoPlanFound& e) {
      throw e.at(k);
    }
    state = plans.back().projectedFinal;
  }
  return plans;
}

namespace {

struct Node {
  rdf::Graph state;
  std::ptrdiff_t parent;
  std::size_t action;
  int depth;
};

}  // namespace

Plan Planner::bfs(const rdf::Graph& initial, const rdf::Graph& goal) const {
  std::vector<Node> nodes{{initial, -1, 0, 0}};
  auto build = [&](std::size_t index, std::size_t explored) {
    Plan p;
    p.projectedFinal = nodes[index].state;
    p.explored = explored;
    for (auto k = static_cast<std::ptrdiff_t>(index); nodes[k].parent >= 0; k = nodes[k].parent) {
      p.steps.push_back(stepFor(actions_[nodes[k].action]));
    }
    std::reverse(p.steps.begin(), p.steps.end());
    return p;
  };
  if (rdf::entails(initial, goal)) return build(0, 0);

  std::unordered_set<std::string> seen{canonical(initial)};
  std::size_t best = coverage(initial, goal);
  std::size_t explored = 0;
  for (std::size_t head = 0; head < nodes.size(); ++head) {
    if (nodes[head].depth >= config_.maxDepth) continue;
    if (explored == config_.maxExpansions) throw LimitExceeded(explored);
    ++explored;
    const rdf::Graph state = nodes[head].state;
    const int depth = nodes[head].depth;
    for (std::size_t k = 0; k < actions_.size(); ++k) {
      if (rdf::match(actions_[k].where, state).empty()) continue;
      auto next = transition(state, actions_[k].where, actions_[k].insert, config_.functionalPredicates);
      if (!seen.insert(canonical(next)).second) continue;
      nodes.push_back({std::move(next), static_cast<std::ptrdiff_t>(head), k, depth + 1});
      const auto& reached = nodes.back().state;
      if (rdf::entails(reached, goal)) return build(nodes.size() - 1, explored);
      best = std::max(best, coverage(reached, goal));
    }
  }
  throw NoPlanFound(explored, best, goal.size());
}

Plan Planner::greedy(const rdf::Graph& initial, const rdf::Graph& goal) const {
  std::vector<Node> nodes{{initial, -1, 0, 0}};
  auto build = [&](std::size_t index, std::size_t explored) {
    Plan p;
    p.projectedFinal = nodes[index].state;
    p.explored = explored;
    for (auto k = static_cast<std::ptrdiff_t>(index); nodes[k].parent >= 0; k = nodes[k].parent) {
      p.steps.push_back(stepFor(actions_[nodes[k].action]));
    }
    std::reverse(p.steps.begin(), p.steps.end());
    return p;
  };
  if (rdf::entails(initial, goal)) return build(0, 0);

  // Highest coverage first, then shallower, then older.
  using Key = std::tuple<std::ptrdiff_t, int, std::size_t>;
  std::priority_queue<Key, std::vector<Key>, std::greater<>> open;
  std::size_t best = coverage(initial, goal);
  open.push({-static_cast<std::ptrdiff_t>(best), 0, 0});
  std::unordered_set<std::string> seen{canonical(initial)};
  std::size_t explored = 0;
  while (!open.empty()) {
    auto [negScore, depth, index] = open.top();
    open.pop();
    if (depth >= config_.maxDepth) continue;
    if (explored == config_.maxExpansions) throw LimitExceeded(explored);
    ++explored;
    const rdf::Graph state = nodes[index].state;
    for (std::size_t k = 0; k < actions_.size(); ++k) {
      if (rdf::match(actions_[k].where, state).empty()) continue;
      auto next = transition(state, actions_[k].where, actions_[k].insert, config_.functionalPredicates);
      if (!seen.insert(canonical(next)).second) continue;
      nodes.push_back({std::move(next), static_cast<std::ptrdiff_t>(index), k, depth + 1});
      const auto& reached = nodes.back().state;
      if (rdf::entails(reached, goal)) return build(nodes.size() - 1, explored);
      auto score = coverage(reached, goal);
      best = std::max(best, score);
      open.push({-static_cast<std::ptrdiff_t>(score), depth + 1, nodes.size() - 1});
    }
  }
  throw NoPlanFound(explored, best, goal.size());
}

bool Planner::achieve(rdf::Graph& state, const rdf::Graph& goal, int depth, std::vector<const Action*>& steps,
                      std::size_t& explored) const {
  if (rdf::entails(state, goal)) return true;
  if (depth <= 0) return false;
  for (const auto& g : goal) {
    rdf::Graph single{g};
    if (rdf::entails(state, single)) continue;
    bool done = false;
    for (const auto& candidate : directlyAchievable(single, usages_, catalog_, config_.grounding)) {
      const Action* a = find(candidate);
      if (!a) continue;
      if (explored == config_.maxExpansions) throw LimitExceeded(explored);
      ++explored;
      rdf::Graph trial = state;
      std::vector<const Action*> trialSteps = steps;
      if (rdf::match(a->where, trial).empty()) {
        if (!achieve(trial, asQuery(a->grounding.pre), depth - 1, trialSteps, explored)) continue;
        if (rdf::match(a->where, trial).empty()) continue;
      }
      if (static_cast<int>(trialSteps.size()) >= config_.maxDepth) continue;
      trial = transition(trial, a->where, a->insert, config_.functionalPredicates);
      trialSteps.push_back(a);
      if (rdf::entails(trial, single)) {
        state = std::move(trial);
        steps = std::move(trialSteps);
        done = true;
        break;
      }
    }
    if (!done) return false;
  }
  return rdf::entails(state, goal).holds;
}

Plan Planner::subgoal(const rdf::Graph& initial, const rdf::Graph& goal) const {
  rdf::Graph state = initial;
  std::vector<const Action*> steps;
  std::size_t explored = 0;
  if (!achieve(state, goal, config_.maxDepth, steps, explored)) {
    throw NoPlanFound(explored, coverage(state, goal), goal.size());
  }
  Plan p;
  p.explored = explored;
  for (const auto* a : steps) p.steps.push_back(stepFor(*a));
  // The concatenated subplans only count once a replay confirms them.
  p.projectedFinal = replay(initial, p.steps);
  if (!rdf::entails(p.projectedFinal, goal)) throw NoPlanFound(explored, coverage(p.projectedFinal, goal), goal.size());
  return p;
}

std::string formatPlan(const Plan& plan) {
  std::string out;
  for (std::size_t k = 0; k < plan.steps.size(); ++k) {
    const auto& s = plan.steps[k];
    out += "step " + std::to_string(k + 1) + ": usage " + showId(s.usageId) + " instance <" + s.instance +
           "> operation " + s.operationName + "\n";
  }
  return out;
}

}  // namespace aat::planner
