// Acceptance run: one PASS/FAIL line per criterion, with the time limit each
// one must meet. Exits non-zero when any criterion fails.

#include <chrono>
#include <functional>
#include <iostream>
#include <sstream>

#include "aat/planner.h"
#include "aat/scenario.h"
#include "aat/semdoc.h"
#include "aat/usage.h"
#include "oracles.h"

using namespace aat;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void criterion(int number, const std::string& name, long limitMs, const std::function<Verdict()>& body) {
  auto start = std::chrono::steady_clock::now();
  Verdict v;
  try {
    v = body();
  } catch (const std::exception& e) {
    v = {false, std::string("unexpected error: ") + e.what()};
  }
  long ms = static_cast<long>(
      std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start).count());
  bool inTime = ms < limitMs;
  bool pass = v.pass && inTime;
  if (!pass) ++failures;
  std::cout << "criterion " << number << " " << name << ": " << (pass ? "PASS" : "FAIL") << " (" << v.detail << "; "
            << ms << " ms, limit " << limitMs << " ms" << (inTime ? "" : ", too slow") << ")" << std::endl;
}

std::string fixture(const std::string& relative) { return oracle::fixture("home/" + relative); }

scenario::SessionOptions options(const std::string& world, const std::string& usages, const std::string& manifest) {
  scenario::SessionOptions o;
  o.world = fixture(world);
  if (!usages.empty()) o.usages = fixture(usages);
  if (!manifest.empty()) o.manifest = fixture(manifest);
  return o;
}

std::vector<std::string> invokes(const std::vector<std::string>& trace) {
  std::vector<std::string> out;
  for (const auto& line : trace) {
    if (auto at = line.find("] invoke "); at != std::string::npos) out.push_back(line.substr(at + 2));
  }
  return out;
}

std::string head(const std::string& invoke) { return invoke.substr(0, invoke.find(" -> ")); }
std::string target(const std::string& invoke) { return invoke.substr(invoke.find(" -> ") + 4); }

Verdict simpleSettings() {
  const std::string ceiling = "http://localhost/TD/smart_home/kitchen/ceilingLight.jsonld";
  auto goal = usage::loadGraph(fixture("simple/goal.ttl"));

  scenario::Session single(options("simple/world.txt", "simple/usage_referenced.ttl", "simple/manifest_referenced.txt"));
  planner::Planner planner(single.usages(), single.catalog());
  auto plan = planner.plan(single.context(), goal);
  bool planOk = plan.steps.size() == 1 && plan.steps[0].instance == ceiling &&
                plan.steps[0].operationName == "Switch On" &&
                single.catalog().operationFor(ceiling, {"http://iotschema.org/SwitchOn"}) == "Switch On";

  scenario::Session two(
      options("simple/world_two_lights.txt", "simple/usage_referenced.ttl", "simple/manifest_referenced.txt"));
  auto loose = planner::directlyAchievable(goal, two.usages(), two.catalog(), usage::GroundingMode::Disabled);
  auto grounded = planner::directlyAchievable(goal, two.usages(), two.catalog(), usage::GroundingMode::Referenced);

  std::ostringstream d;
  d << plan.steps.size() << "-step plan";
  if (!plan.steps.empty()) d << " " << plan.steps[0].usageId << " " << plan.steps[0].operationName << " on ceilingLight";
  d << "; directlyAchievable ungrounded " << loose.size() << " (want 2), grounded " << grounded.size() << " (want 1)";
  return {planOk && loose.size() == 2 && grounded.size() == 1, d.str()};
}

Verdict sideEffectPlanning() {
  scenario::Session session(options("complex/world.txt", "complex/usages.ttl", "complex/manifest.txt"));
  auto goal = usage::loadGraph(fixture("complex/goal.ttl"));
  auto catalog = session.catalog();

  bool sideEffect = false;
  int checked = 0, entailing = 0;
  for (const auto& u : session.usages()) {
    for (const auto& t : u.postcond.graph) {
      sideEffect = sideEffect || (t.predicate.value() == "http://iotschema.org/brightness" && t.subject.isBlank());
    }
    for (const auto& type : u.artifactTypes) {
      for (const auto& instance : catalog.instancesOf(type)) {
        ++checked;
        entailing += planner::postconditionEntails(goal, u, instance, catalog);
      }
    }
  }

  planner::Planner planner(session.usages(), catalog);
  auto initial = session.context();
  auto plan = planner.plan(initial, goal);
  bool replayed = rdf::entails(planner.replay(initial, plan.steps), goal).holds;

  std::ostringstream d;
  d << "side effect present " << (sideEffect ? "yes" : "no") << "; " << entailing << "/" << checked
    << " single postconditions entail the goal; bfs plan of " << plan.steps.size() << " step(s), replay "
    << (replayed ? "entails" : "misses") << " the goal";
  return {sideEffect && checked > 0 && entailing == 0 && plan.steps.size() == 2 && replayed, d.str()};
}

Verdict deviceReplacement() {
  scenario::Session session(options("sos/world.txt", "", ""));
  const auto scriptPath = fixture("sos/sos_script.json");
  scenario::Runner before(session);
  before.run(scenario::loadScript(scriptPath));
  session.replaceDevice("emergency_light", fixture("sos/lamp_new.json"));
  scenario::Runner after(session);
  after.run(scenario::loadScript(scriptPath));

  auto oldCalls = invokes(before.trace());
  auto newCalls = invokes(after.trace());
  bool same = oldCalls.size() == 6 && newCalls.size() == oldCalls.size();
  for (std::size_t k = 0; same && k < newCalls.size(); ++k) {
    const char* op = k % 2 ? "\"Switch Off\"" : "\"Switch On\"";
    same = head(newCalls[k]) == head(oldCalls[k]) && head(newCalls[k]).find(op) != std::string::npos &&
           target(oldCalls[k]).rfind("http://localhost/TD/", 0) == 0 &&
           target(newCalls[k]).rfind("coap://exampleHost/light/", 0) == 0;
  }
  int delivered = 0;
  for (const auto& line : session.world().log()) delivered += line.rfind("INVOKE lb2 ", 0) == 0;

  std::ostringstream d;
  d << oldCalls.size() << " invokes over http, " << newCalls.size() << " over coap after replacement, " << delivered
    << " delivered to the new device";
  return {same && delivered == 6, d.str()};
}

Verdict protocolImport() {
  auto o = options("welcome/world.txt", "welcome/usages.ttl", "welcome/manifest.txt");
  o.serve = true;
  scenario::Session session(o);
  auto ids = session.world().deviceIds();
  bool separate = std::count(ids.begin(), ids.end(), "heater") && std::count(ids.begin(), ids.end(), "cooler");
  const auto base = *session.serverIri() + "/protocols/";
  auto script = scenario::loadScript(base + "welcome_home.json");
  scenario::Runner runner(session);
  runner.run(script);

  auto context = session.context();
  int entailed = 0;
  for (const char* goal : {"goals/warm_up.ttl", "goals/lighting.ttl"}) {
    entailed += rdf::entails(context, usage::loadGraph(base + goal)).holds;
  }
  std::ostringstream d;
  d << "script of " << script.steps.size() << " goal(s) fetched over http; " << entailed << "/2 goals entailed";
  return {separate && script.steps.size() == 2 && entailed == 2, d.str()};
}

Verdict entailmentOracle() {
  oracle::Gen gen(20181);
  int agree = 0, holds = 0;
  const int cases = 1000;
  for (int k = 0; k < cases; ++k) {
    auto premise = gen.graph(6, 3);
    auto conclusion = gen.graph(3, 3);
    bool expected = oracle::bruteEntails(premise, conclusion);
    agree += rdf::entails(premise, conclusion).holds == expected;
    holds += expected;
  }
  std::ostringstream d;
  d << agree << "/" << cases << " agree with exhaustive enumeration (" << holds << " entailed)";
  return {agree == cases, d.str()};
}

Verdict updateSemantics() {
  using rdf::Term;
  auto ex = [](const char* l) { return Term::iri(std::string("http://example.org/") + l); };
  rdf::Graph state{{ex("a"), ex("p"), ex("b")}};
  rdf::Pattern where{{Term::variable("s"), ex("p"), ex("b")}};

  bool blankRejected = false;
  try {
    rdf::applyUpdate(state, {{Term::blank("x"), ex("p"), ex("b")}}, {}, where);
  } catch (const rdf::UpdateError&) {
    blankRejected = true;
  }
  auto skipped = rdf::applyUpdate(state, {}, {{Term::variable("s"), ex("q"), Term::variable("unbound")}}, where);
  bool unboundSkipped = skipped == state;

  oracle::Gen gen(4242);
  int agree = 0, rejected = 0;
  const int cases = 500;
  for (int k = 0; k < cases; ++k) {
    auto s = gen.graph(6, gen.chance(0.3) ? 2 : 0);
    auto w = gen.pattern(3, true);
    auto del = gen.pattern(2, gen.chance(0.1));
    auto ins = gen.pattern(2, false);
    auto expected = oracle::naiveUpdate(s, del, ins, w);
    try {
      auto got = rdf::applyUpdate(s, del, ins, w);
      agree += !expected.rejected && got == expected.result;
    } catch (const rdf::UpdateError&) {
      agree += expected.rejected;
      ++rejected;
    }
  }
  std::ostringstream d;
  d << "blank in DELETE " << (blankRejected ? "rejected" : "accepted") << "; unbound triples "
    << (unboundSkipped ? "skipped" : "kept") << "; " << agree << "/" << cases << " random updates agree ("
    << rejected << " rejected)";
  return {blankRejected && unboundSkipped && agree == cases, d.str()};
}

Verdict plannerSoundness() {
  oracle::Gen gen(77);
  const int homes = 200;
  int agree = 0, solvable = 0;
  std::string firstProblem;
  auto problem = [&](int k, const std::string& what) {
    if (firstProblem.empty()) firstProblem = "home " + std::to_string(k) + ": " + what;
  };
  for (int k = 0; k < homes; ++k) {
    auto home = oracle::randomHome(gen, 5, 8);
    oracle::TempDir dir;
    auto files = oracle::writeHome(home, dir.path());
    scenario::SessionOptions o;
    o.world = files.world;
    o.usages = files.usages;
    o.manifest = files.manifest;
    o.search.maxDepth = 3;
    scenario::Session session(o);
    auto goal = usage::loadGraph(files.goal.string());
    auto initial = session.context();
    auto expected = oracle::minimumPlanLength(home, 3);
    planner::Planner planner(session.usages(), session.catalog(), session.search());
    try {
      auto plan = planner.plan(initial, goal);
      if (!expected) {
        problem(k, "plan found where none exists");
        continue;
      }
      ++solvable;
      if (static_cast<int>(plan.steps.size()) != *expected) {
        problem(k, "plan length " + std::to_string(plan.steps.size()) + ", minimum " + std::to_string(*expected));
        continue;
      }
      if (!rdf::entails(planner.replay(initial, plan.steps), goal)) {
        problem(k, "replay misses the goal");
        continue;
      }
      scenario::executePlan(session, plan, [](const std::string&) {});
      if (!rdf::entails(session.context(), goal)) {
        problem(k, "executed context misses the goal");
        continue;
      }
      ++agree;
    } catch (const planner::NoPlanFound&) {
      if (expected) {
        problem(k, "no plan found, minimum " + std::to_string(*expected));
        continue;
      }
      ++agree;
    }
  }
  std::ostringstream d;
  d << agree << "/" << homes << " homes agree (" << solvable << " solvable)";
  if (!firstProblem.empty()) d << "; first problem " << firstProblem;
  return {agree == homes, d.str()};
}

// Removes each line mentioning `link`; when the removed line closed a
// statement, the previous kept line closes it instead.
std::string without(const std::string& text, const std::string& link) {
  std::vector<std::string> kept;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    if (line.find(link) == std::string::npos) {
      kept.push_back(line);
      continue;
    }
    auto end = line.find_last_not_of(" \t\r");
    if (end == std::string::npos || line[end] != '.') continue;
    for (auto it = kept.rbegin(); it != kept.rend(); ++it) {
      auto last = it->find_last_not_of(" \t\r");
      if (last == std::string::npos) continue;
      if ((*it)[last] == ';') (*it)[last] = '.';
      break;
    }
  }
  std::string out;
  for (const auto& line : kept) out += line + "\n";
  return out;
}

Verdict kbValidation() {
  const auto text = oracle::slurp(fixture("simple/usage_referenced.ttl"));
  auto resolver = usage::Manifest::load(fixture("simple/manifest_referenced.txt")).resolver();
  auto load = [&](const std::string& source) {
    return usage::loadUsages(semdoc::parseTurtle(source).graph, resolver);
  };
  bool controlLoads = load(text).size() == 1;

  const std::vector<std::pair<std::string, std::string>> mutations = {
      {"usg:hasPostcond", "postcond"},
      {"usg:forArtifact", "forArtifact"},
      {"usg:forOperation", "forOperation"},
      {"usg:hasOperation", "hasOperation"},
  };
  int named = 0;
  std::ostringstream d;
  d << "unmutated KB " << (controlLoads ? "loads" : "fails");
  for (const auto& [link, axiom] : mutations) {
    std::string got = "none";
    try {
      load(without(text, link));
    } catch (const usage::ValidationError& e) {
      got = e.axiom();
    }
    named += got == axiom;
    d << "; without " << link << " -> " << got;
  }
  d << "; " << named << "/4";
  return {controlLoads && named == 4, d.str()};
}

}  // namespace

int main() {
  criterion(1, "simple-settings", 1000, simpleSettings);
  criterion(2, "side-effect-planning", 1000, sideEffectPlanning);
  criterion(3, "device-replacement", 2000, deviceReplacement);
  criterion(4, "protocol-import", 5000, protocolImport);
  criterion(5, "entailment-oracle", 10000, entailmentOracle);
  criterion(6, "update-semantics", 5000, updateSemantics);
  criterion(7, "planner-soundness", 60000, plannerSoundness);
  criterion(8, "kb-validation", 5000, kbValidation);
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criterion(s) failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
