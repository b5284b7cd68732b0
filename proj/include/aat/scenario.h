#pragma once

// Scenario scripts and the session that runs them: a simulated world, the
// bindings and artifact registry on top of it, the usage KB, and a runner
// that executes scripted steps and planned goals with a deterministic trace.

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "aat/artifact.h"
#include "aat/binding.h"
#include "aat/error.h"
#include "aat/planner.h"
#include "aat/sim.h"
#include "aat/usage.h"

namespace aat::scenario {

class ScriptError : public Error {
 public:
  using Error::Error;
};

// A step failed while executing, or a goal was not entailed afterwards.
class ExecutionError : public Error {
 public:
  using Error::Error;
};

struct Step {
  enum class Kind { Invoke, Wait, OnEvent, Repeat, AchieveGoal, Emit };

  Kind kind = Kind::Wait;
  std::string artifact;   // Invoke, OnEvent
  std::string operation;  // Invoke
  std::optional<td::DataValue> input;
  int ticks = 0;          // Wait
  std::string event;      // OnEvent, Emit
  std::string device;     // Emit
  int times = 0;          // Repeat
  std::string goal;       // AchieveGoal, absolute after parsing
  std::string goalRef;    // AchieveGoal, as written in the script
  std::vector<Step> steps;
};

struct Script {
  std::string iri;
  std::vector<Step> steps;
};

// JSON script: either {"steps": [...]} or a bare array. Array items that are
// strings are goal IRIs; objects hold exactly one of
//   {"invoke": {"artifact", "operation", "input"?}}  {"wait": ticks}
//   {"onEvent": {"artifact", "event", "steps"}}      {"repeat": {"times", "steps"}}
//   {"achieveGoal": iri}                             {"emit": {"device", "event"}}
// Goal IRIs resolve against `baseIri`. Throws ScriptError.
Script parseScript(std::string_view json, const std::string& baseIri);
// From a file path or an http IRI.
Script loadScript(const std::string& locator);

struct SessionOptions {
  std::filesystem::path world;
  std::optional<std::filesystem::path> usages;
  std::optional<std::filesystem::path> manifest;
  // Serve the world over HTTP and route http targets through that server;
  // otherwise every scheme goes straight to the world.
  bool serve = false;
  planner::SearchConfig search;
};

class Session {
 public:
  explicit Session(SessionOptions options);
  ~Session();

  sim::World& world() { return *world_; }
  const sim::World& world() const { return *world_; }
  artifact::Registry& registry() { return registry_; }
  const binding::BindingRegistry& bindings() const { return bindings_; }
  sim::SimBinding& simBinding() { return *simBinding_; }
  const std::vector<usage::UsageDecl>& usages() const { return usages_; }
  const planner::SearchConfig& search() const { return options_.search; }
  // Port of the embedded server when serving.
  std::optional<int> port() const;
  // Base IRI of the embedded server, e.g. http://127.0.0.1:8123
  std::optional<std::string> serverIri() const;
  const std::vector<std::string>& warnings() const { return warnings_; }

  usage::ContextResolver resolver() const;
  usage::InstanceCatalog catalog() const;
  // Exported device statuses plus topology and ambient statements.
  rdf::Graph context(std::vector<std::string>* warnings = nullptr) const;

  // Loads a TD from a file or IRI and swaps it in under its td:name.
  std::shared_ptr<artifact::ArtifactInstance> replaceDevice(const std::string& name, const std::string& locator);

 private:
  SessionOptions options_;
  std::shared_ptr<sim::World> world_;
  std::shared_ptr<sim::SimBinding> simBinding_;
  std::unique_ptr<sim::HttpServer> server_;
  binding::BindingRegistry bindings_;
  artifact::Registry registry_;
  std::optional<usage::Manifest> manifest_;
  std::vector<usage::UsageDecl> usages_;
  std::vector<std::string> warnings_;
};

// Runs each plan step through the artifact runtime, using the default value
// of an operation's input schema as input. Throws ExecutionError.
void executePlan(Session& session, const planner::Plan& plan, const std::function<void(const std::string&)>& trace);

class Runner {
 public:
  explicit Runner(Session& session, std::ostream* echo = nullptr);

  // Throws ScriptError, ExecutionError, planner::NoPlanFound and the
  // artifact/binding errors of invoke steps.
  void run(const Script& script);
  // Plans `goal` from the current context, executes it and checks the
  // resulting context entails the goal.
  planner::Plan achieve(const rdf::Graph& goal, const std::string& label);

  const std::vector<std::string>& trace() const { return trace_; }

 private:
  struct Handler {
    std::string artifact;
    std::string event;
    std::vector<Step> steps;
  };

  void runStep(const Step& step);
  void pollHandlers();
  void note(const std::string& line);

  Session& session_;
  std::ostream* echo_;
  std::vector<Handler> handlers_;
  std::vector<std::string> trace_;
};

}  // namespace aat::scenario
