#include "aat/scenario.h"

#include "aat/semdoc.h"

namespace aat::scenario {

namespace {

using nlohmann::json;

const json& member(const json& object, const char* key, const std::string& where) {
  if (!object.is_object() || !object.contains(key)) throw ScriptError(where + ": missing \"" + key + "\"");
  return object.at(key);
}

std::string text(const json& object, const char* key, const std::string& where) {
  const auto& v = member(object, key, where);
  if (!v.is_string()) throw ScriptError(where + ": \"" + key + "\" must be a string");
  return v.get<std::string>();
}

int count(const json& v, const std::string& where) {
  if (!v.is_number_integer() || v.get<long long>() < 0) throw ScriptError(where + " must be a non-negative integer");
  return v.get<int>();
}

std::string absolute(const std::string& base, const std::string& reference) {
  if (reference.find("://") != std::string::npos || base.empty()) return reference;
  return semdoc::resolveReference(base, reference);
}

std::vector<Step> parseSteps(const json& list, const std::string& base, const std::string& where);

Step parseStep(const json& item, const std::string& base, const std::string& where) {
  Step step;
  if (item.is_string()) {
    step.kind = Step::Kind::AchieveGoal;
    step.goalRef = item.get<std::string>();
    step.goal = absolute(base, step.goalRef);
    return step;
  }
  if (!item.is_object() || item.size() != 1) throw ScriptError(where + ": a step is an object with exactly one key");
  const auto& [key, body] = *item.items().begin();
  const std::string at = where + "." + key;
  if (key == "invoke") {
    step.kind = Step::Kind::Invoke;
    step.artifact = text(body, "artifact", at);
    step.operation = text(body, "operation", at);
    if (body.contains("input") && !body.at("input").is_null()) {
      try {
        step.input = td::DataValue::fromJson(body.at("input"));
      } catch (const Error& e) {
        throw ScriptError(at + ": " + e.what());
      }
    }
  } else if (key == "wait") {
    step.kind = Step::Kind::Wait;
    step.ticks = count(body, at);
  } else if (key == "onEvent") {
    step.kind = Step::Kind::OnEvent;
    step.artifact = text(body, "artifact", at);
    step.event = text(body, "event", at);
    step.steps = parseSteps(member(body, "steps", at), base, at);
  } else if (key == "repeat") {
    step.kind = Step::Kind::Repeat;
    step.times = count(member(body, "times", at), at + ".times");
    step.steps = parseSteps(member(body, "steps", at), base, at);
  } else if (key == "achieveGoal") {
    step.kind = Step::Kind::AchieveGoal;
    if (!body.is_string()) throw ScriptError(at + " must be a goal IRI");
    step.goalRef = body.get<std::string>();
    step.goal = absolute(base, step.goalRef);
  } else if (key == "emit") {
    step.kind = Step::Kind::Emit;
    step.device = text(body, "device", at);
    step.event = text(body, "event", at);
  } else {
    throw ScriptError(where + ": unknown step \"" + key + "\"");
  }
  return step;
}

std::vector<Step> parseSteps(const json& list, const std::string& base, const std::string& where) {
  if (!list.is_array()) throw ScriptError(where + ": steps must be an array");
  std::vector<Step> steps;
  for (std::size_t k = 0; k < list.size(); ++k) {
    steps.push_back(parseStep(list[k], base, where + "[" + std::to_string(k) + "]"));
  }
  return steps;
}

bool isHttp(const std::string& locator) {
  return locator.rfind("http://", 0) == 0 || locator.rfind("https://", 0) == 0;
}

std::string quoted(const std::string& s) { return s.find(' ') == std::string::npos ? s : "\"" + s + "\""; }

}  // namespace

Script parseScript(std::string_view text, const std::string& baseIri) {
  auto doc = json::parse(text, nullptr, false);
  if (doc.is_discarded()) throw ScriptError("script is not valid JSON");
  Script script;
  script.iri = baseIri;
  if (doc.is_array()) {
    script.steps = parseSteps(doc, baseIri, "script");
  } else if (doc.is_object()) {
    script.steps = parseSteps(member(doc, "steps", "script"), baseIri, "script");
  } else {
    throw ScriptError("script must be an object or an array");
  }
  return script;
}

Script loadScript(const std::string& locator) {
  auto text = semdoc::fetch(semdoc::DocumentSource::fromLocator(locator));
  return parseScript(text, locator);
}

// --- session -----------------------------------------------------------------

Session::Session(SessionOptions options) : options_(std::move(options)) {
  world_ = sim::World::load(options_.world);
  simBinding_ = std::make_shared<sim::SimBinding>(world_);
  bindings_.add("sim", simBinding_);
  bindings_.add("coap", simBinding_);
  if (options_.serve) {
    server_ = sim::serveHttp(world_, 0);
    binding::HttpOptions http;
    http.authorityMap["localhost"] = "127.0.0.1:" + std::to_string(server_->port());
    bindings_.add("http", binding::httpBinding(http));
  } else {
    bindings_.add("http", simBinding_);
  }

  for (const auto& id : world_->deviceIds()) {
    auto device = world_->device(id);
    if (device.spare) continue;
    try {
      registry_.add(device.td, bindings_, device.tdIri);
    } catch (const artifact::InstantiationError& e) {
      warnings_.push_back(e.what());
    }
  }

  if (options_.manifest) manifest_ = usage::Manifest::load(*options_.manifest);
  if (options_.usages) usages_ = usage::loadUsages(usage::loadGraph(options_.usages->string()), resolver());
}

Session::~Session() {
  if (server_) server_->stop();
}

std::optional<int> Session::port() const {
  if (!server_) return std::nullopt;
  return server_->port();
}

std::optional<std::string> Session::serverIri() const {
  if (!server_) return std::nullopt;
  return "http://127.0.0.1:" + std::to_string(server_->port());
}

usage::ContextResolver Session::resolver() const {
  auto manifest = manifest_;
  return [manifest](const std::string& iri) {
    if (manifest) {
      if (auto path = manifest->find(iri)) return usage::makeContext(iri, usage::loadGraph(path->string()));
    }
    if (isHttp(iri) || std::filesystem::exists(iri)) return usage::makeContext(iri, usage::loadGraph(iri));
    throw usage::UsageError("no document for context <" + iri + ">");
  };
}

usage::InstanceCatalog Session::catalog() const {
  return usage::InstanceCatalog::fromRegistry(registry_, world_->topology());
}

rdf::Graph Session::context(std::vector<std::string>* warnings) const {
  return usage::currentContext(registry_, world_->predicates(), {world_->topology(), world_->ambient()}, warnings);
}

std::shared_ptr<artifact::ArtifactInstance> Session::replaceDevice(const std::string& name, const std::string& locator) {
  auto text = semdoc::fetch(semdoc::DocumentSource::fromLocator(locator));
  auto td = td::parseTd(text);
  return registry_.replace(name, td, bindings_);
}

// --- execution ---------------------------------------------------------------

void executePlan(Session& session, const planner::Plan& plan, const std::function<void(const std::string&)>& trace) {
  for (std::size_t k = 0; k < plan.steps.size(); ++k) {
    const auto& step = plan.steps[k];
    try {
      auto instance = session.registry().get(step.artifactName);
      const auto& operations = instance->operations();
      auto it = operations.find(step.operationName);
      if (it == operations.end()) {
        throw artifact::UnknownOperation(step.artifactName, step.operationName, {});
      }
      std::optional<td::DataValue> input;
      if (const auto& schema = it->second.interaction.inputSchema) input = td::defaultValue(*schema);
      auto target = td::effectiveTarget(instance->td().baseIri, it->second.form.href);
      trace("invoke " + step.artifactName + " " + quoted(step.operationName) + (input ? " " + input->toJsonText() : "") +
            " -> " + target);
      artifact::act(session.registry(), step.artifactName, step.operationName, input);
    } catch (const Error& e) {
      throw ExecutionError("step " + std::to_string(k + 1) + " (" + step.operationName + " on " + step.artifactName +
                           ") failed: " + e.what());
    }
  }
}

Runner::Runner(Session& session, std::ostream* echo) : session_(session), echo_(echo) {}

void Runner::note(const std::string& line) {
  trace_.push_back("[t=" + std::to_string(session_.world().now()) + "] " + line);
  if (echo_) *echo_ << trace_.back() << '\n';
}

planner::Plan Runner::achieve(const rdf::Graph& goal, const std::string& label) {
  planner::Planner planner(session_.usages(), session_.catalog(), session_.search());
  auto plan = planner.plan(session_.context(), goal);
  note("goal " + label + ": plan of " + std::to_string(plan.steps.size()) + " step(s)");
  executePlan(session_, plan, [this](const std::string& line) { note(line); });
  if (!rdf::entails(session_.context(), goal)) throw ExecutionError("goal " + label + " is not entailed after execution");
  note("goal " + label + " achieved");
  return plan;
}

void Runner::run(const Script& script) {
  for (const auto& step : script.steps) {
    runStep(step);
    pollHandlers();
  }
}

void Runner::runStep(const Step& step) {
  switch (step.kind) {
    case Step::Kind::Invoke: {
      auto instance = session_.registry().get(step.artifact);
      std::string target;
      if (auto it = instance->operations().find(step.operation); it != instance->operations().end()) {
        target = " -> " + td::effectiveTarget(instance->td().baseIri, it->second.form.href);
      }
      note("invoke " + step.artifact + " " + quoted(step.operation) + (step.input ? " " + step.input->toJsonText() : "") +
           target);
      artifact::act(session_.registry(), step.artifact, step.operation, step.input);
      break;
    }
    case Step::Kind::Wait:
      note("wait " + std::to_string(step.ticks));
      session_.world().tick(step.ticks);
      break;
    case Step::Kind::OnEvent:
      session_.registry().get(step.artifact);
      handlers_.push_back({step.artifact, step.event, step.steps});
      note("on " + step.artifact + "/" + step.event);
      break;
    case Step::Kind::Repeat:
      for (int k = 0; k < step.times; ++k) {
        for (const auto& inner : step.steps) runStep(inner);
      }
      break;
    case Step::Kind::AchieveGoal: {
      auto goal = session_.resolver()(step.goal);
      achieve(goal.graph, "<" + step.goalRef + ">");
      break;
    }
    case Step::Kind::Emit:
      note("emit " + step.device + " " + step.event);
      session_.world().emit(step.device, step.event);
      break;
  }
}

void Runner::pollHandlers() {
  for (std::size_t k = 0; k < handlers_.size(); ++k) {
    const Handler handler = handlers_[k];
    for (const auto& record : artifact::pollEvents(session_.registry(), handler.artifact, handler.event)) {
      note("event " + handler.artifact + "/" + record.eventName);
      for (const auto& step : handler.steps) runStep(step);
    }
  }
}

}  // namespace aat::scenario
