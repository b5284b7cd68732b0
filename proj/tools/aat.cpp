// aat: operator entry point for artifacts, context graphs, planning and
// simulated scenarios.

#include <chrono>
#include <csignal>
#include <cstdlib>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "aat/artifact.h"
#include "aat/binding.h"
#include "aat/planner.h"
#include "aat/scenario.h"
#include "aat/semdoc.h"
#include "aat/sim.h"
#include "aat/td.h"
#include "aat/usage.h"

namespace {

using namespace aat;

enum Exit { kOk = 0, kUsage = 1, kNoPlan = 2, kInvalid = 3, kTransport = 4, kExecution = 5 };

std::string compact(const semdoc::PrefixTable& prefixes, const rdf::Term& t) {
  return t.isIri() ? prefixes.compact(t.value()) : t.toString();
}

void printGraph(const rdf::Graph& g, const std::string& format) {
  if (format == "ntriples") {
    std::cout << semdoc::serializeNTriples(g);
    return;
  }
  auto prefixes = semdoc::PrefixTable::wellKnown();
  std::vector<std::array<std::string, 3>> rows;
  std::array<std::size_t, 3> width{7, 9, 6};
  for (const auto& t : g) {
    rows.push_back({compact(prefixes, t.subject), compact(prefixes, t.predicate), compact(prefixes, t.object)});
    for (std::size_t k = 0; k < 3; ++k) width[k] = std::max(width[k], rows.back()[k].size());
  }
  auto line = [&](const std::array<std::string, 3>& r) {
    std::cout << std::left << std::setw(static_cast<int>(width[0])) << r[0] << "  "
              << std::setw(static_cast<int>(width[1])) << r[1] << "  " << r[2] << '\n';
  };
  line({"subject", "predicate", "object"});
  for (const auto& r : rows) line(r);
}

void printSummary(const artifact::ArtifactInstance& instance) {
  std::cout << "artifact " << instance.name() << " generation " << instance.generation() << '\n';
  std::cout << "  source: " << instance.sourceIri() << '\n';
  std::cout << "  base: " << instance.td().baseIri << '\n';
  std::cout << "  types:";
  for (const auto& t : instance.typeIris()) std::cout << ' ' << t;
  std::cout << '\n';
  for (const auto& [name, handle] : instance.operations()) std::cout << "  operation: " << name << '\n';
  for (const auto& [name, state] : instance.properties()) {
    std::cout << "  property: " << name;
    if (state.value) std::cout << " = " << state.value->toJsonText();
    if (state.stale) std::cout << " (stale)";
    std::cout << '\n';
  }
  for (const auto& [name, channel] : instance.events()) std::cout << "  event: " << name << '\n';
  for (const auto& w : instance.warnings()) std::cout << "  warning: " << w << '\n';
}

void printKey(const artifact::ArtifactInstance& instance) {
  std::cout << instance.name() << "\tgeneration " << instance.generation() << '\t' << instance.sourceIri() << '\n';
}

// Options shared by the commands that run against a simulated world.
struct WorldFlags {
  std::string world;
  bool serve = false;
  std::string usages;
  std::string manifest;
};

void addWorldFlags(CLI::App* cmd, WorldFlags& flags, bool required) {
  auto* opt = cmd->add_option("--world", flags.world, "World file describing the simulated home");
  if (required) opt->required();
  cmd->add_flag("--serve", flags.serve, "Route http targets through the embedded HTTP server");
}

scenario::SessionOptions sessionOptions(const WorldFlags& flags) {
  scenario::SessionOptions options;
  options.world = flags.world;
  options.serve = flags.serve;
  if (!flags.usages.empty()) options.usages = flags.usages;
  if (!flags.manifest.empty()) {
    options.manifest = flags.manifest;
  } else if (const char* env = std::getenv("AAT_MANIFEST")) {
    options.manifest = env;
  }
  return options;
}

void printWarnings(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
}

int report(const std::exception& e, int code) {
  std::cerr << "error: " << e.what() << '\n';
  return code;
}

// Maps the library's failures onto exit statuses.
template <typename F>
int guarded(F&& body) {
  try {
    return body();
  } catch (const planner::NoPlanFound& e) {
    return report(e, kNoPlan);
  } catch (const planner::LimitExceeded& e) {
    return report(e, kNoPlan);
  } catch (const scenario::ExecutionError& e) {
    return report(e, kExecution);
  } catch (const binding::BindingError& e) {
    return report(e, kTransport);
  } catch (const semdoc::FetchError& e) {
    return report(e, kTransport);
  } catch (const sim::BindError& e) {
    return report(e, kTransport);
  } catch (const Error& e) {
    return report(e, kInvalid);
  } catch (const std::exception& e) {
    return report(e, kInvalid);
  }
}

td::ThingDescription readTd(const std::string& locator) {
  return td::parseTd(semdoc::fetch(semdoc::DocumentSource::fromLocator(locator)));
}

rdf::Graph readGraph(const std::string& locator) { return usage::loadGraph(locator); }

volatile std::sig_atomic_t stopRequested = 0;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Artifacts, usages and goal planning over Web of Things descriptions"};
  app.require_subcommand(1);
  int exitCode = kOk;

  // ingest-td
  auto* ingest = app.add_subcommand("ingest-td", "Instantiate an artifact from a TD and print its usage interface");
  std::string ingestSource;
  WorldFlags ingestWorld;
  ingest->add_option("source", ingestSource, "TD file or IRI")->required();
  addWorldFlags(ingest, ingestWorld, false);
  ingest->callback([&] {
    exitCode = guarded([&] {
      auto td = readTd(ingestSource);
      auto diagnostics = td::validate(td);
      for (const auto& d : diagnostics) {
        std::cerr << (d.severity == td::Diagnostic::Severity::Error ? "error: " : "warning: ") << d.path << ": "
                  << d.message << '\n';
      }
      std::shared_ptr<artifact::ArtifactInstance> instance;
      std::unique_ptr<scenario::Session> session;
      binding::BindingRegistry plain;
      artifact::Registry registry;
      artifact::Registry* target = &registry;
      const binding::BindingRegistry* bindings = &plain;
      if (!ingestWorld.world.empty()) {
        session = std::make_unique<scenario::Session>(sessionOptions(ingestWorld));
        if (session->registry().find(td.name)) session->registry().remove(td.name);
        target = &session->registry();
        bindings = &session->bindings();
      } else {
        plain.add("http", binding::httpBinding());
      }
      try {
        instance = target->add(td, *bindings, ingestSource);
      } catch (const artifact::InstantiationError& e) {
        instance = e.instance();
      }
      printSummary(*instance);
      return int{kOk};
    });
  });

  // artifacts
  auto* artifacts = app.add_subcommand("artifacts", "List the artifacts instantiated from a world");
  WorldFlags artifactsWorld;
  addWorldFlags(artifacts, artifactsWorld, true);
  artifacts->callback([&] {
    exitCode = guarded([&] {
      scenario::Session session(sessionOptions(artifactsWorld));
      printWarnings(session.warnings());
      for (const auto& instance : session.registry().snapshot()) printKey(*instance);
      return int{kOk};
    });
  });

  // act
  auto* act = app.add_subcommand("act", "Invoke an operation of an artifact");
  WorldFlags actWorld;
  std::string actArtifact, actOperation, actInput;
  addWorldFlags(act, actWorld, true);
  act->add_option("artifact", actArtifact)->required();
  act->add_option("operation", actOperation)->required();
  act->add_option("--input", actInput, "Input value as JSON");
  act->callback([&] {
    exitCode = guarded([&] {
      scenario::Session session(sessionOptions(actWorld));
      std::optional<td::DataValue> input;
      if (!actInput.empty()) input = td::DataValue::parse(actInput);
      auto out = artifact::act(session.registry(), actArtifact, actOperation, input);
      std::cout << (out ? out->toJsonText() : "ok") << '\n';
      return int{kOk};
    });
  });

  // read
  auto* read = app.add_subcommand("read", "Read a property of an artifact");
  WorldFlags readWorld;
  std::string readArtifact, readProperty;
  addWorldFlags(read, readWorld, true);
  read->add_option("artifact", readArtifact)->required();
  read->add_option("property", readProperty)->required();
  read->callback([&] {
    exitCode = guarded([&] {
      scenario::Session session(sessionOptions(readWorld));
      std::cout << artifact::readProperty(session.registry(), readArtifact, readProperty).toJsonText() << '\n';
      return int{kOk};
    });
  });

  // replace-device
  auto* replace = app.add_subcommand("replace-device", "Re-instantiate an artifact from a new TD with the same name");
  WorldFlags replaceWorld;
  std::string replaceName, replaceSource;
  addWorldFlags(replace, replaceWorld, true);
  replace->add_option("name", replaceName)->required();
  replace->add_option("source", replaceSource, "TD file or IRI")->required();
  replace->callback([&] {
    exitCode = guarded([&] {
      scenario::Session session(sessionOptions(replaceWorld));
      std::shared_ptr<artifact::ArtifactInstance> instance;
      try {
        instance = session.replaceDevice(replaceName, replaceSource);
      } catch (const artifact::InstantiationError& e) {
        instance = e.instance();
      }
      printSummary(*instance);
      return int{kOk};
    });
  });

  // context {load,show}
  auto* context = app.add_subcommand("context", "Context graphs");
  context->require_subcommand(1);
  std::string format = "table";
  auto* contextLoad = context->add_subcommand("load", "Parse and print a context document");
  std::string contextFile;
  contextLoad->add_option("file", contextFile)->required();
  contextLoad->add_option("--format", format)->check(CLI::IsMember({"ntriples", "table"}));
  contextLoad->callback([&] {
    exitCode = guarded([&] {
      auto ref = usage::makeContext(contextFile, readGraph(contextFile));
      if (ref.graph.empty()) throw usage::ValidationError("context", contextFile + " has no status statement");
      printGraph(ref.graph, format);
      return int{kOk};
    });
  });
  auto* contextShow = context->add_subcommand("show", "Print the current context of a world");
  WorldFlags showWorld;
  addWorldFlags(contextShow, showWorld, true);
  contextShow->add_option("--format", format)->check(CLI::IsMember({"ntriples", "table"}));
  contextShow->callback([&] {
    exitCode = guarded([&] {
      scenario::Session session(sessionOptions(showWorld));
      std::vector<std::string> warnings;
      auto g = session.context(&warnings);
      printWarnings(warnings);
      printGraph(g, format);
      return int{kOk};
    });
  });

  // topology load
  auto* topology = app.add_subcommand("topology", "Building topology");
  topology->require_subcommand(1);
  auto* topologyLoad = topology->add_subcommand("load", "Check and print a topology document");
  std::string topologyFile;
  topologyLoad->add_option("file", topologyFile)->required();
  topologyLoad->callback([&] {
    exitCode = guarded([&] {
      auto g = readGraph(topologyFile);
      const std::string bot(semdoc::ns::kBot);
      std::map<std::string, std::set<std::string>> contains;
      std::map<std::string, std::set<std::string>> elements;
      for (const auto& t : g) {
        if (t.predicate.value() == bot + "containsZone") contains[t.subject.value()].insert(t.object.value());
        if (t.predicate.value() == bot + "hasElement") elements[t.subject.value()].insert(t.object.value());
      }
      // containsZone must be acyclic.
      std::map<std::string, int> mark;
      std::function<void(const std::string&)> visit = [&](const std::string& z) {
        if (mark[z] == 1) throw usage::UsageError("bot:containsZone cycle through " + z);
        if (mark[z] == 2) return;
        mark[z] = 1;
        for (const auto& c : contains[z]) visit(c);
        mark[z] = 2;
      };
      for (const auto& [z, children] : contains) visit(z);
      for (const auto& [z, children] : contains) {
        for (const auto& c : children) std::cout << "zone " << z << " contains " << c << '\n';
      }
      for (const auto& [z, items] : elements) {
        for (const auto& e : items) std::cout << "zone " << z << " element " << e << '\n';
      }
      return int{kOk};
    });
  });

  // usages load
  auto* usages = app.add_subcommand("usages", "Usage knowledge base");
  usages->require_subcommand(1);
  auto* usagesLoad = usages->add_subcommand("load", "Validate a usage document and list its usages");
  std::string usagesFile, usagesManifest;
  usagesLoad->add_option("file", usagesFile)->required();
  usagesLoad->add_option("--manifest", usagesManifest, "Context IRI to file manifest (default $AAT_MANIFEST)");
  usagesLoad->callback([&] {
    exitCode = guarded([&] {
      usage::Manifest manifest;
      if (!usagesManifest.empty()) {
        manifest = usage::Manifest::load(usagesManifest);
      } else if (const char* env = std::getenv("AAT_MANIFEST")) {
        manifest = usage::Manifest::load(env);
      }
      for (const auto& u : usage::loadUsages(readGraph(usagesFile), manifest.resolver())) {
        std::cout << "usage " << u.id << '\n';
        for (const auto& t : u.artifactTypes) std::cout << "  artifact type: " << t << '\n';
        for (const auto& t : u.operationTypes) std::cout << "  operation type: " << t << '\n';
        if (u.precond) std::cout << "  precondition: " << u.precond->iri << " (" << u.precond->graph.size() << " triples)\n";
        std::cout << "  postcondition: " << u.postcond.iri << " (" << u.postcond.graph.size() << " triples)\n";
      }
      return int{kOk};
    });
  });

  // plan
  auto* plan = app.add_subcommand("plan", "Find (and optionally execute) a usage sequence reaching a goal");
  WorldFlags planWorld;
  std::string planGoal, planStrategy = "bfs", planContext, planTopology, planFormat = "ntriples";
  int planDepth = 6;
  std::size_t planExpansions = 10000;
  bool planExecute = false, planDumpFinal = false, planNoGrounding = false;
  addWorldFlags(plan, planWorld, true);
  plan->add_option("--usages", planWorld.usages, "Usage document")->required();
  plan->add_option("--manifest", planWorld.manifest, "Context IRI to file manifest (default $AAT_MANIFEST)");
  plan->add_option("--goal", planGoal, "Goal context: file, IRI, or manifest IRI")->required();
  plan->add_option("--context", planContext, "Initial context instead of the world's current one");
  plan->add_option("--topology", planTopology, "Topology instead of the world's");
  plan->add_option("--strategy", planStrategy)->check(CLI::IsMember({"bfs", "greedy", "subgoal"}));
  plan->add_option("--max-depth", planDepth)->check(CLI::PositiveNumber);
  plan->add_option("--max-expansions", planExpansions)->check(CLI::PositiveNumber);
  plan->add_flag("--no-grounding", planNoGrounding, "Use condition graphs without reference grounding");
  plan->add_flag("--execute", planExecute, "Run the plan against the world and verify the goal");
  plan->add_flag("--dump-final", planDumpFinal, "Print the projected final context");
  plan->add_option("--format", planFormat)->check(CLI::IsMember({"ntriples", "table"}));
  plan->callback([&] {
    exitCode = guarded([&] {
      auto options = sessionOptions(planWorld);
      options.search.strategy = planner::parseStrategy(planStrategy);
      options.search.maxDepth = planDepth;
      options.search.maxExpansions = planExpansions;
      if (planNoGrounding) options.search.grounding = usage::GroundingMode::Disabled;
      scenario::Session session(options);
      printWarnings(session.warnings());

      rdf::Graph topologyGraph = planTopology.empty() ? session.world().topology() : readGraph(planTopology);
      usage::InstanceCatalog catalog(topologyGraph);
      for (const auto& instance : session.registry().snapshot()) {
        catalog.add(usage::describeInstance(instance->td(), instance->sourceIri()));
      }
      rdf::Graph initial = planContext.empty() ? session.context()
                                               : rdf::unionOf(readGraph(planContext), topologyGraph);
      auto goal = session.resolver()(planGoal).graph;

      planner::Planner planner(session.usages(), catalog, options.search);
      auto result = planner.plan(initial, goal);
      std::cout << planner::formatPlan(result);
      if (planDumpFinal) printGraph(result.projectedFinal, planFormat);
      if (planExecute) {
        scenario::executePlan(session, result, [](const std::string& line) { std::cout << line << '\n'; });
        if (!rdf::entails(session.context(), goal)) {
          throw scenario::ExecutionError("goal is not entailed by the context after execution");
        }
        std::cout << "goal entailed after execution\n";
      }
      return int{kOk};
    });
  });

  // scenario run
  auto* scenarioCmd = app.add_subcommand("scenario", "Scripted scenarios");
  scenarioCmd->require_subcommand(1);
  auto* run = scenarioCmd->add_subcommand("run", "Run a scenario script against a simulated world");
  WorldFlags runWorld;
  std::string runScript;
  std::vector<std::string> runReplace;
  bool runFromServer = false;
  addWorldFlags(run, runWorld, true);
  run->add_option("--script", runScript, "Script file or IRI")->required();
  run->add_flag("--from-server", runFromServer, "Fetch the script path from the embedded server (implies --serve)");
  run->add_option("--usages", runWorld.usages, "Usage document");
  run->add_option("--manifest", runWorld.manifest, "Context IRI to file manifest (default $AAT_MANIFEST)");
  run->add_option("--replace", runReplace, "NAME=SOURCE: replace an artifact's TD before running");
  run->callback([&] {
    exitCode = guarded([&] {
      if (runFromServer) runWorld.serve = true;
      scenario::Session session(sessionOptions(runWorld));
      printWarnings(session.warnings());
      for (const auto& r : runReplace) {
        auto eq = r.find('=');
        if (eq == std::string::npos) throw Error("--replace expects NAME=SOURCE, got '" + r + "'");
        auto instance = session.replaceDevice(r.substr(0, eq), r.substr(eq + 1));
        std::cout << "replaced " << instance->name() << " generation " << instance->generation() << '\n';
      }
      auto locator = runFromServer ? *session.serverIri() + runScript : runScript;
      auto script = scenario::loadScript(locator);
      scenario::Runner runner(session, &std::cout);
      runner.run(script);
      return int{kOk};
    });
  });

  // sim serve
  auto* simCmd = app.add_subcommand("sim", "Simulated home");
  simCmd->require_subcommand(1);
  auto* serve = simCmd->add_subcommand("serve", "Serve a world over HTTP until interrupted");
  std::string serveWorld;
  int servePort = 8080;
  double serveSeconds = 0;
  serve->add_option("--world", serveWorld)->required();
  serve->add_option("--port", servePort, "0 picks a free port");
  serve->add_option("--duration", serveSeconds, "Stop after this many seconds (0: until interrupted)");
  serve->callback([&] {
    exitCode = guarded([&] {
      auto world = sim::World::load(serveWorld);
      auto server = sim::serveHttp(world, servePort);
      std::cout << "serving on http://127.0.0.1:" << server->port() << std::endl;
      std::signal(SIGINT, [](int) { stopRequested = 1; });
      std::signal(SIGTERM, [](int) { stopRequested = 1; });
      auto until = std::chrono::steady_clock::now() + std::chrono::duration<double>(serveSeconds);
      while (!stopRequested && (serveSeconds <= 0 || std::chrono::steady_clock::now() < until)) {
        std::this_thread::sleep_for(std::chrono::milliseconds(50));
      }
      server->stop();
      return int{kOk};
    });
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }
  return exitCode;
}
