#include "aat/sim.h"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "http_util.h"

namespace aat::sim {

namespace {

const std::string kIot(semdoc::ns::kIot);
const std::string kBot(semdoc::ns::kBot);

bool hasType(const td::Interaction& i, const std::string& localName) { return i.semanticTypes.count(kIot + localName) > 0; }

// Value a property starts at when the world file does not set one.
td::DataValue initialValue(const std::optional<td::DataSchema>& schema) {
  if (!schema) return td::DataValue(false);
  switch (schema->type) {
    case td::SchemaType::Boolean: return td::DataValue(false);
    case td::SchemaType::Number: return td::DataValue(0.0);
    case td::SchemaType::String: return td::DataValue(std::string());
    default: return td::defaultValue(*schema);
  }
}

bool isOn(const td::DataValue& v) {
  if (v.isBool()) return v.asBool();
  if (v.isText()) return v.asText() == "on";
  return false;
}

std::string readFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string pathOf(const std::string& target) {
  std::string path = target.find("://") == std::string::npos ? target : detail::splitIri(target).path;
  if (auto q = path.find_first_of("?#"); q != std::string::npos) path.resize(q);
  return path;
}

// Whitespace-separated tokens; double-quoted runs keep their spaces.
std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> tokens;
  std::string current;
  bool quoted = false;
  bool inToken = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      current += c;
      if (c == '\\' && i + 1 < line.size()) {
        current += line[++i];
      } else if (c == '"') {
        quoted = false;
      }
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (inToken) tokens.push_back(std::move(current));
      current.clear();
      inToken = false;
      continue;
    }
    inToken = true;
    current += c;
    if (c == '"') quoted = true;
  }
  if (inToken) tokens.push_back(std::move(current));
  return tokens;
}

std::string stripComment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"' && (i == 0 || line[i - 1] != '\\')) quoted = !quoted;
    if (line[i] == '#' && !quoted && (i == 0 || std::isspace(static_cast<unsigned char>(line[i - 1])))) {
      return line.substr(0, i);
    }
  }
  return line;
}

class WorldParser {
 public:
  WorldParser(World& world, std::filesystem::path baseDir, std::string origin)
      : world_(world), baseDir_(std::move(baseDir)), origin_(std::move(origin)), prefixes_(semdoc::PrefixTable::wellKnown()) {}

  void parse(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string raw;
    while (std::getline(in, raw)) {
      ++line_;
      auto tokens = tokenize(stripComment(raw));
      if (tokens.empty()) continue;
      const auto& directive = tokens.front();
      if (directive == "prefix") {
        prefixDirective(tokens);
      } else if (directive == "predicates") {
        need(tokens, 2);
        try {
          world_.setPredicates(artifact::PredicateTable::load(resolve(tokens[1]).string()));
        } catch (const Error& e) {
          fail(e.what());
        }
      } else if (directive == "topology") {
        need(tokens, 2);
        addTopology(turtle(readOrFail(tokens[1]), 0));
      } else if (directive == "zone") {
        need(tokens, 2);
        for (std::size_t i = 1; i < tokens.size(); ++i) {
          topology_.insert({iri(tokens[i]), rdf::Term::iri(std::string(semdoc::ns::kRdfType)),
                            rdf::Term::iri(kBot + "Zone")});
        }
      } else if (directive == "contains" || directive == "element") {
        need(tokens, 3);
        auto predicate = rdf::Term::iri(kBot + (directive == "contains" ? "containsZone" : "hasElement"));
        auto zone = iri(tokens[1]);
        for (std::size_t i = 2; i < tokens.size(); ++i) topology_.insert({zone, predicate, iri(tokens[i])});
      } else if (directive == "device") {
        deviceDirective(tokens);
      } else if (directive == "document") {
        need(tokens, 3);
        if (tokens[1].empty() || tokens[1].front() != '/') fail("document path must start with '/'");
        world_.publish(tokens[1], readOrFail(tokens[2]));
      } else if (directive == "ambient") {
        ambientBlock(in);
      } else {
        fail("unknown directive '" + directive + "'");
      }
    }
    for (const auto& t : topology_) topologyOut_.insert(t);
  }

  rdf::Graph topology() const { return topologyOut_; }
  rdf::Graph ambient() const { return ambientOut_; }

 private:
  [[noreturn]] void fail(const std::string& message) const { throw WorldSpecError(origin_, line_, message); }

  void need(const std::vector<std::string>& tokens, std::size_t n) const {
    if (tokens.size() < n) fail("'" + tokens.front() + "' needs " + std::to_string(n - 1) + " argument(s)");
  }

  std::filesystem::path resolve(const std::string& file) const {
    std::filesystem::path p(file);
    return p.is_absolute() ? p : baseDir_ / p;
  }

  std::string readOrFail(const std::string& file) const {
    try {
      return readFile(resolve(file));
    } catch (const Error& e) {
      fail(e.what());
    }
  }

  rdf::Term iri(const std::string& token) const {
    try {
      if (token.size() > 2 && token.front() == '<' && token.back() == '>') {
        return rdf::Term::iri(token.substr(1, token.size() - 2));
      }
      return rdf::Term::iri(prefixes_.expand(token));
    } catch (const Error& e) {
      fail(e.what());
    }
  }

  void prefixDirective(const std::vector<std::string>& tokens) {
    need(tokens, 3);
    const auto& label = tokens[1];
    const auto& ns = tokens[2];
    if (label.empty() || label.back() != ':' || ns.size() < 2 || ns.front() != '<' || ns.back() != '>') {
      fail("expected 'prefix label: <namespace>'");
    }
    prefixes_.add(label.substr(0, label.size() - 1), ns.substr(1, ns.size() - 2));
  }

  rdf::Graph turtle(const std::string& body, std::size_t firstLine) const {
    try {
      return semdoc::parseTurtle(body, prefixes_).graph;
    } catch (const semdoc::ParseError& e) {
      throw WorldSpecError(origin_, firstLine ? firstLine + e.line() - 1 : line_, e.what());
    }
  }

  void addTopology(const rdf::Graph& g) {
    topologyOut_ = rdf::unionOf(topologyOut_, g);
  }

  void ambientBlock(std::istream& in) {
    std::size_t first = line_ + 1;
    std::string body;
    std::string raw;
    bool closed = false;
    while (std::getline(in, raw)) {
      ++line_;
      auto tokens = tokenize(raw);
      if (tokens.size() == 1 && tokens.front() == "end") {
        closed = true;
        break;
      }
      body += raw + "\n";
    }
    if (!closed) fail("ambient block is missing 'end'");
    ambientOut_ = rdf::unionOf(ambientOut_, turtle(body, first));
  }

  void deviceDirective(const std::vector<std::string>& tokens) {
    need(tokens, 3);
    DeviceSpec spec;
    spec.id = tokens[1];
    for (std::size_t i = 2; i < tokens.size(); ++i) {
      const auto& t = tokens[i];
      if (t == "spare") {
        spec.spare = true;
      } else if (t == "init") {
        // optional marker before the initial values
      } else if (t.rfind("td=", 0) == 0) {
        spec.tdText = readOrFail(t.substr(3));
      } else if (t.rfind("iri=", 0) == 0) {
        spec.tdIri = iri(t.substr(4)).value();
      } else {
        auto [key, value] = assignment(t);
        spec.initial[key] = value;
      }
    }
    if (spec.tdText.empty()) fail("device '" + spec.id + "' has no td= file");
    try {
      world_.addDevice(spec);
    } catch (const Error& e) {
      fail(e.what());
    }
  }

  std::pair<std::string, td::DataValue> assignment(const std::string& token) const {
    std::size_t eq = std::string::npos;
    bool quoted = false;
    for (std::size_t i = 0; i < token.size(); ++i) {
      if (token[i] == '"' && (i == 0 || token[i - 1] != '\\')) quoted = !quoted;
      if (token[i] == '=' && !quoted) {
        eq = i;
        break;
      }
    }
    if (eq == std::string::npos || eq == 0) fail("expected key=value, got '" + token + "'");
    std::string key = token.substr(0, eq);
    if (key.size() >= 2 && key.front() == '"' && key.back() == '"') key = key.substr(1, key.size() - 2);
    try {
      return {key, td::DataValue::parse(token.substr(eq + 1))};
    } catch (const Error& e) {
      fail("initial value of '" + key + "': " + e.what());
    }
  }

  World& world_;
  std::filesystem::path baseDir_;
  std::string origin_;
  semdoc::PrefixTable prefixes_;
  std::size_t line_ = 0;
  rdf::Graph topology_;
  rdf::Graph topologyOut_;
  rdf::Graph ambientOut_;
};

}  // namespace

World::World() : predicates_(artifact::PredicateTable::defaults()) {}

std::shared_ptr<World> World::parse(std::string_view text, const std::filesystem::path& baseDir,
                                    const std::string& origin) {
  auto world = std::make_shared<World>();
  WorldParser parser(*world, baseDir, origin);
  parser.parse(text);
  std::lock_guard lock(world->mutex_);
  world->topology_ = parser.topology();
  world->ambient_ = parser.ambient();
  return world;
}

std::shared_ptr<World> World::load(const std::filesystem::path& file) {
  std::string text;
  try {
    text = readFile(file);
  } catch (const Error& e) {
    throw WorldSpecError(file.string(), 0, e.what());
  }
  return parse(text, file.parent_path(), file.string());
}

void World::setPredicates(artifact::PredicateTable table) {
  std::lock_guard lock(mutex_);
  predicates_ = std::move(table);
}

void World::addDevice(const DeviceSpec& spec) {
  auto fail = [&](const std::string& message) { throw WorldSpecError("device " + spec.id, 0, message); };
  Device device;
  device.id = spec.id;
  device.tdText = spec.tdText;
  device.tdIri = spec.tdIri.empty() ? "http://localhost/td/" + spec.id : spec.tdIri;
  device.spare = spec.spare;
  try {
    device.td = td::parseTd(spec.tdText);
  } catch (const Error& e) {
    fail(e.what());
  }
  auto diagnostics = td::validate(device.td);
  for (const auto& d : diagnostics) {
    if (d.severity == td::Diagnostic::Severity::Error) fail(d.path + ": " + d.message);
  }

  for (const auto& i : device.td.interactions) {
    if (i.kind == td::InteractionKind::Property) device.state[i.name] = initialValue(i.valueSchema());
    if (i.kind == td::InteractionKind::Event) device.events[i.name];
  }
  for (const auto& [name, value] : spec.initial) {
    const auto* prop = device.td.find(name);
    if (!prop || prop->kind != td::InteractionKind::Property) fail("no property '" + name + "' to initialize");
    if (const auto& schema = prop->valueSchema(); schema && !td::conformsTo(value, *schema)) {
      fail("initial value " + value.toJsonText() + " of '" + name + "' does not match its " +
           std::string(td::toString(schema->type)) + " schema");
    }
    device.state[name] = value;
  }

  std::map<std::string, Route> routes;
  for (const auto& i : device.td.interactions) {
    for (const auto& form : i.forms) {
      routes[pathOf(td::effectiveTarget(device.td.baseIri, form.href))] = Route{spec.id, i.name};
    }
  }

  std::lock_guard lock(mutex_);
  if (devices_.count(spec.id)) fail("duplicate device id");
  for (const auto& [path, route] : routes) {
    if (auto it = routes_.find(path); it != routes_.end()) {
      fail("route " + path + " already belongs to device '" + it->second.deviceId + "'");
    }
  }
  routes_.insert(routes.begin(), routes.end());
  devices_.emplace(spec.id, std::move(device));
}

void World::publish(const std::string& urlPath, std::string text) {
  std::lock_guard lock(mutex_);
  documents_[urlPath] = std::move(text);
}

Reply World::handle(const std::string& path, binding::Verb verb, const std::optional<std::string>& payload) {
  std::lock_guard lock(mutex_);
  return handleLocked(pathOf(path), verb, payload);
}

Reply World::handleLocked(const std::string& path, binding::Verb verb, const std::optional<std::string>& payload) {
  auto route = routes_.find(path);
  if (route == routes_.end()) return {404, "no resource at " + path};
  Device& device = devices_.at(route->second.deviceId);
  const td::Interaction& interaction = *device.td.find(route->second.interaction);

  std::optional<td::DataValue> input;
  if (payload && !payload->empty()) {
    try {
      input = td::DataValue::parse(*payload);
    } catch (const Error&) {
      return {400, "payload is not JSON"};
    }
  }

  switch (interaction.kind) {
    case td::InteractionKind::Property:
      if (verb == binding::Verb::Read) return {200, device.state.at(interaction.name).toJsonText()};
      if (verb == binding::Verb::Write) {
        if (!interaction.writable) return {405, "property is not writable"};
        if (!input) return {400, "missing value"};
        if (const auto& schema = interaction.valueSchema(); schema && !td::conformsTo(*input, *schema)) {
          return {400, "value does not match the schema"};
        }
        device.state[interaction.name] = *input;
        log_.push_back("WRITE " + device.id + " " + interaction.name + " " + input->toJsonText());
        return {200, ""};
      }
      return {405, "properties accept READ and WRITE"};
    case td::InteractionKind::Action: {
      if (verb != binding::Verb::Invoke) return {405, "actions accept INVOKE"};
      if (interaction.inputSchema) {
        if (!input) return {400, "missing input"};
        if (!td::conformsTo(*input, *interaction.inputSchema)) return {400, "input does not match the schema"};
      }
      applyAction(device, interaction, input);
      log_.push_back("INVOKE " + device.id + " " + interaction.name + (input ? " " + input->toJsonText() : ""));
      if (interaction.outputSchema) return {200, td::defaultValue(*interaction.outputSchema).toJsonText()};
      return {200, ""};
    }
    case td::InteractionKind::Event: {
      if (verb != binding::Verb::Read) return {405, "events accept READ"};
      auto records = nlohmann::json::array();
      auto& queue = device.events[interaction.name];
      for (const auto& e : queue) {
        nlohmann::json r = {{"time", e.time}};
        r["payload"] = e.payload ? e.payload->toJson() : nlohmann::json();
        records.push_back(std::move(r));
      }
      queue.clear();
      return {200, records.dump()};
    }
  }
  return {500, ""};
}

void World::applyAction(Device& device, const td::Interaction& action, const std::optional<td::DataValue>& input) {
  auto set = [&](const std::string& propertyType, bool on, const std::string& onText, const std::string& offText) {
    for (const auto& i : device.td.interactions) {
      if (i.kind != td::InteractionKind::Property || !hasType(i, propertyType)) continue;
      const auto& schema = i.valueSchema();
      if (schema && schema->type == td::SchemaType::String) {
        device.state[i.name] = td::DataValue(on ? onText : offText);
      } else {
        device.state[i.name] = td::DataValue(on);
      }
    }
  };
  if (hasType(action, "SwitchOn")) set("SwitchStatus", true, "on", "off");
  if (hasType(action, "SwitchOff")) set("SwitchStatus", false, "on", "off");
  for (const char* status : {"HeatingStatus", "CoolingStatus", "SwitchStatus"}) {
    if (hasType(action, "TurnOn")) set(status, true, "on", "off");
    if (hasType(action, "TurnOff")) set(status, false, "on", "off");
  }
  if (hasType(action, "Open")) set("CurtainStatus", true, "open", "closed");
  if (hasType(action, "Close")) set("CurtainStatus", false, "open", "closed");
  if ((hasType(action, "SetTemperature") || hasType(action, "SetTargetTemperature")) && input && input->isNumber()) {
    for (const auto& i : device.td.interactions) {
      if (i.kind == td::InteractionKind::Property && hasType(i, "TargetTemperature")) device.state[i.name] = *input;
    }
  }
}

void World::emit(const std::string& deviceId, const std::string& eventName, std::optional<td::DataValue> payload) {
  std::lock_guard lock(mutex_);
  auto it = devices_.find(deviceId);
  if (it == devices_.end()) throw UnknownDevice(deviceId);
  auto channel = it->second.events.find(eventName);
  if (channel == it->second.events.end()) {
    throw SimError("device '" + deviceId + "' has no event '" + eventName + "'");
  }
  channel->second.push_back(QueuedEvent{eventName, std::move(payload), clock_});
  log_.push_back("EMIT " + deviceId + " " + eventName);
}

void World::tick(int ticks) {
  std::lock_guard lock(mutex_);
  for (int t = 0; t < ticks; ++t) {
    ++clock_;
    for (auto& [id, device] : devices_) {
      std::string temperature;
      std::string target;
      bool heating = false;
      bool cooling = false;
      for (const auto& i : device.td.interactions) {
        if (i.kind != td::InteractionKind::Property) continue;
        if (hasType(i, "Temperature")) temperature = i.name;
        if (hasType(i, "TargetTemperature")) target = i.name;
        if (hasType(i, "HeatingStatus")) heating = isOn(device.state[i.name]);
        if (hasType(i, "CoolingStatus")) cooling = isOn(device.state[i.name]);
      }
      if (temperature.empty() || target.empty()) continue;
      auto& now = device.state[temperature];
      const auto& goal = device.state[target];
      if (!now.isNumber() || !goal.isNumber()) continue;
      double value = now.asNumber();
      if (heating && value < goal.asNumber()) now = td::DataValue(std::min(value + 1, goal.asNumber()));
      if (cooling && value > goal.asNumber()) now = td::DataValue(std::max(value - 1, goal.asNumber()));
    }
  }
}

std::int64_t World::now() const {
  std::lock_guard lock(mutex_);
  return clock_;
}

std::vector<std::string> World::deviceIds() const {
  std::lock_guard lock(mutex_);
  std::vector<std::string> ids;
  for (const auto& [id, d] : devices_) ids.push_back(id);
  return ids;
}

Device World::device(const std::string& id) const {
  std::lock_guard lock(mutex_);
  auto it = devices_.find(id);
  if (it == devices_.end()) throw UnknownDevice(id);
  return it->second;
}

std::map<std::string, td::DataValue> World::state(const std::string& id) const { return device(id).state; }

std::optional<std::string> World::document(const std::string& urlPath) const {
  std::lock_guard lock(mutex_);
  auto it = documents_.find(urlPath);
  if (it == documents_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::string> World::tdText(const std::string& deviceId) const {
  std::lock_guard lock(mutex_);
  auto it = devices_.find(deviceId);
  if (it == devices_.end()) return std::nullopt;
  return it->second.tdText;
}

rdf::Graph World::deviceContext() const {
  std::lock_guard lock(mutex_);
  rdf::Graph graph;
  for (const auto& [id, device] : devices_) {
    if (device.spare) continue;
    for (const auto& i : device.td.interactions) {
      if (i.kind != td::InteractionKind::Property || !i.observable) continue;
      const auto* rule = predicates_.forInteraction(i);
      if (!rule) continue;
      if (auto literal = predicates_.render(*rule, device.state.at(i.name))) {
        graph.insert({rdf::Term::iri(device.tdIri), rdf::Term::iri(rule->predicate), *literal});
      }
    }
  }
  return graph;
}

rdf::Graph World::contextProjection() const {
  auto devices = deviceContext();
  std::lock_guard lock(mutex_);
  return rdf::unionOf(devices, ambient_);
}

std::vector<std::string> World::log() const {
  std::lock_guard lock(mutex_);
  return log_;
}

binding::Response SimBinding::invoke(const std::string& target, binding::Verb verb,
                                     const std::optional<std::string>& payload, const std::string&) {
  {
    std::lock_guard lock(faultMutex_);
    if (!faults_.empty()) {
      int status = faults_.front();
      faults_.pop_front();
      if (status == 0) throw binding::TransportError(0, "connect");
      return {status, "injected fault"};
    }
  }
  std::string path;
  try {
    path = pathOf(target);
  } catch (const Error&) {
    throw binding::TransportError(0, "invalid target " + target);
  }
  auto reply = world_->handle(path, verb, payload);
  return {reply.status, reply.payload};
}

void SimBinding::injectFault(int status) {
  std::lock_guard lock(faultMutex_);
  faults_.push_back(status);
}

std::vector<std::string> populateRegistry(const World& world, artifact::Registry& registry,
                                          const binding::BindingRegistry& bindings) {
  std::vector<std::string> names;
  for (const auto& id : world.deviceIds()) {
    auto device = world.device(id);
    if (device.spare) continue;
    registry.add(device.td, bindings, device.tdIri);
    names.push_back(device.td.name);
  }
  return names;
}

}  // namespace aat::sim
