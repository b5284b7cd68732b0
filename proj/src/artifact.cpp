#include "aat/artifact.h"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "aat/semdoc.h"

namespace aat::artifact {

namespace {

std::string joinNames(const std::vector<std::string>& names) {
  std::string out;
  for (const auto& n : names) {
    if (!out.empty()) out += ", ";
    out += "'" + n + "'";
  }
  return out;
}

std::string describe(const std::vector<td::Diagnostic>& diagnostics) {
  std::string out = "invalid Thing Description";
  for (const auto& d : diagnostics) {
    if (d.severity == td::Diagnostic::Severity::Error) out += "; " + d.path + ": " + d.message;
  }
  return out;
}

constexpr std::string_view kDefaultTable = R"(# semantic type            predicate                 true   false
iot:SwitchStatus            iot:switchstatus          on     off
iot:CurtainStatus           iot:currentStatus         open   closed
iot:HeatingStatus           iot:heatingstatus         on     off
iot:CoolingStatus           iot:coolingstatus         on     off
iot:Temperature             iot:temperature           -      -
iot:TargetTemperature       iot:targetTemperature     -      -
)";

}  // namespace

UnknownOperation::UnknownOperation(const std::string& artifact, const std::string& operation,
                                   std::vector<std::string> available)
    : ArtifactError("artifact '" + artifact + "' has no operation '" + operation + "' (available: " +
                    joinNames(available) + ")"),
      available_(std::move(available)) {}

InvalidTd::InvalidTd(std::vector<td::Diagnostic> diagnostics)
    : ArtifactError(describe(diagnostics)), diagnostics_(std::move(diagnostics)) {}

// --- predicate table -------------------------------------------------------

PredicateTable PredicateTable::parse(std::string_view text) {
  PredicateTable table;
  auto prefixes = semdoc::PrefixTable::wellKnown();
  auto iri = [&](const std::string& token, std::size_t lineNo) {
    if (token.size() > 2 && token.front() == '<' && token.back() == '>') return token.substr(1, token.size() - 2);
    try {
      return prefixes.expand(token);
    } catch (const Error& e) {
      throw ArtifactError("predicate table line " + std::to_string(lineNo) + ": " + e.what());
    }
  };
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineNo = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream fields(line);
    std::vector<std::string> tokens;
    for (std::string t; fields >> t;) tokens.push_back(t);
    if (tokens.empty()) continue;
    if (tokens.size() != 4) {
      throw ArtifactError("predicate table line " + std::to_string(lineNo) +
                          ": expected 'semanticType predicate trueLiteral falseLiteral'");
    }
    PredicateRule rule;
    rule.semanticType = iri(tokens[0], lineNo);
    rule.predicate = iri(tokens[1], lineNo);
    rule.trueLiteral = tokens[2] == "-" ? "" : tokens[2];
    rule.falseLiteral = tokens[3] == "-" ? "" : tokens[3];
    table.add(std::move(rule));
  }
  return table;
}

PredicateTable PredicateTable::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ArtifactError("cannot open predicate table " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

PredicateTable PredicateTable::defaults() { return parse(kDefaultTable); }

void PredicateTable::add(PredicateRule rule) {
  for (auto& r : rules_) {
    if (r.semanticType == rule.semanticType) {
      r = std::move(rule);
      return;
    }
  }
  rules_.push_back(std::move(rule));
}

const PredicateRule* PredicateTable::find(const std::string& semanticType) const {
  for (const auto& r : rules_) {
    if (r.semanticType == semanticType) return &r;
  }
  return nullptr;
}

const PredicateRule* PredicateTable::forInteraction(const td::Interaction& interaction) const {
  const std::string iot(semdoc::ns::kIot);
  for (const auto& t : interaction.semanticTypes) {
    if (t.rfind(iot, 0) != 0) continue;
    if (const auto* r = find(t)) return r;
  }
  for (const auto& t : interaction.semanticTypes) {
    if (const auto* r = find(t)) return r;
  }
  return nullptr;
}

std::optional<rdf::Term> PredicateTable::render(const PredicateRule& rule, const td::DataValue& value) const {
  if (value.isBool()) {
    const std::string& lit = value.asBool() ? rule.trueLiteral : rule.falseLiteral;
    if (lit.empty()) return rdf::Term::boolean(value.asBool());
    return rdf::Term::literal(lit);
  }
  if (value.isNumber()) return rdf::Term::number(value.asNumber());
  if (value.isText()) return rdf::Term::literal(value.asText());
  return std::nullopt;
}

std::optional<td::DataValue> PredicateTable::parseLiteral(const PredicateRule& rule, const rdf::Term& literal,
                                                          const td::DataSchema& schema) const {
  if (!literal.isLiteral()) return std::nullopt;
  switch (schema.type) {
    case td::SchemaType::Boolean:
      if (!rule.trueLiteral.empty() && literal.value() == rule.trueLiteral) return td::DataValue(true);
      if (!rule.falseLiteral.empty() && literal.value() == rule.falseLiteral) return td::DataValue(false);
      if (literal.hint() == rdf::LiteralHint::Boolean) return td::DataValue(literal.value() == "true");
      return std::nullopt;
    case td::SchemaType::Number:
      if (literal.hint() != rdf::LiteralHint::Number) return std::nullopt;
      return td::DataValue(std::stod(literal.value()));
    case td::SchemaType::String: return td::DataValue(literal.value());
    default: return std::nullopt;
  }
}

// --- instances ---------------------------------------------------------------

ArtifactInstance::ArtifactInstance(td::ThingDescription td, std::shared_ptr<binding::ProtocolBinding> binding,
                                   std::string sourceIri)
    : td_(std::move(td)), binding_(std::move(binding)), sourceIri_(std::move(sourceIri)) {
  for (const auto& i : td_.interactions) {
    switch (i.kind) {
      case td::InteractionKind::Action:
        operations_.emplace(i.name, OperationHandle{i, i.forms.front()});
        break;
      case td::InteractionKind::Event:
        events_.emplace(i.name, EventChannel{i});
        break;
      case td::InteractionKind::Property: {
        PropertyState state;
        state.observable = i.observable;
        state.writable = i.writable;
        properties_.emplace(i.name, state);
        break;
      }
    }
  }
}

std::map<std::string, PropertyState> ArtifactInstance::properties() const {
  std::lock_guard lock(propertyMutex_);
  return properties_;
}

std::set<std::string> ArtifactInstance::propertyNames() const {
  std::lock_guard lock(propertyMutex_);
  std::set<std::string> names;
  for (const auto& [n, s] : properties_) names.insert(n);
  return names;
}

std::optional<std::string> ArtifactInstance::operationFor(const std::string& operationType) const {
  for (const auto& [name, handle] : operations_) {
    if (handle.interaction.semanticTypes.count(operationType)) return name;
  }
  return std::nullopt;
}

void ArtifactInstance::cacheValue(const std::string& propertyName, td::DataValue value) {
  std::lock_guard lock(propertyMutex_);
  auto& state = properties_.at(propertyName);
  state.value = std::move(value);
  state.stale = false;
}

void ArtifactInstance::markStale(const std::string& propertyName) {
  std::lock_guard lock(propertyMutex_);
  properties_.at(propertyName).stale = true;
}

td::DataValue refreshProperty(ArtifactInstance& instance, const std::string& propertyName) {
  const td::Interaction* prop = instance.td().find(propertyName);
  if (!prop || prop->kind != td::InteractionKind::Property) throw UnknownProperty(instance.name(), propertyName);
  if (!prop->observable) {
    throw NotReadable("property '" + propertyName + "' of '" + instance.name() + "' is not observable");
  }
  try {
    auto request = binding::resolveFor(binding::Verb::Read, instance.td().baseIri, *prop, std::nullopt);
    td::DataValue value;
    if (const auto& schema = prop->valueSchema()) {
      value = *binding::dispatch(instance.binding(), request, schema);
    } else {
      auto res = instance.binding().invoke(request.target, request.verb, std::nullopt, request.mediaType);
      if (res.status < 200 || res.status >= 300) throw binding::TransportError(res.status, res.payload);
      value = td::DataValue::parse(res.payload);
    }
    instance.cacheValue(propertyName, value);
    return value;
  } catch (const Error&) {
    instance.markStale(propertyName);
    throw;
  }
}

std::shared_ptr<ArtifactInstance> instantiate(const td::ThingDescription& td, const binding::BindingRegistry& bindings,
                                              std::string sourceIri) {
  auto diagnostics = td::validate(td);
  if (td::hasErrors(diagnostics)) throw InvalidTd(std::move(diagnostics));
  auto binding = bindings.require(td.scheme());
  auto instance = std::make_shared<ArtifactInstance>(td, std::move(binding), std::move(sourceIri));

  std::vector<std::string> failures;
  for (const auto* prop : td.ofKind(td::InteractionKind::Property)) {
    if (!prop->observable) continue;
    try {
      refreshProperty(*instance, prop->name);
    } catch (const Error& e) {
      failures.push_back(prop->name);
      instance->addWarning("initial read of '" + prop->name + "' failed: " + e.what());
    }
  }
  if (!failures.empty()) {
    throw InstantiationError(instance, "artifact '" + td.name + "' created with stale properties " +
                                           joinNames(failures));
  }
  return instance;
}

// --- registry ----------------------------------------------------------------

std::shared_ptr<ArtifactInstance> Registry::add(const td::ThingDescription& td, const binding::BindingRegistry& bindings,
                                                std::string sourceIri) {
  if (find(td.name)) throw DuplicateArtifact(td.name);
  std::shared_ptr<ArtifactInstance> instance;
  std::optional<InstantiationError> pending;
  try {
    instance = instantiate(td, bindings, std::move(sourceIri));
  } catch (const InstantiationError& e) {
    instance = e.instance();
    pending = e;
  }
  {
    std::unique_lock lock(mutex_);
    if (instances_.count(td.name)) throw DuplicateArtifact(td.name);
    instances_.emplace(td.name, instance);
  }
  if (pending) throw *pending;
  return instance;
}

std::shared_ptr<ArtifactInstance> Registry::replace(const std::string& name, const td::ThingDescription& newTd,
                                                    const binding::BindingRegistry& bindings,
                                                    std::optional<std::string> sourceIri) {
  if (newTd.name != name) {
    throw NameMismatch("replacement TD is named '" + newTd.name + "', expected '" + name + "'");
  }
  auto old = get(name);
  std::shared_ptr<ArtifactInstance> instance;
  std::optional<InstantiationError> pending;
  try {
    instance = instantiate(newTd, bindings, sourceIri.value_or(old->sourceIri()));
  } catch (const InstantiationError& e) {
    instance = e.instance();
    pending = e;
  }
  {
    std::unique_lock lock(mutex_);
    auto it = instances_.find(name);
    if (it == instances_.end()) throw UnknownArtifact(name);
    instance->generation_ = it->second->generation_ + 1;
    it->second = instance;
  }
  if (pending) throw *pending;
  return instance;
}

void Registry::remove(const std::string& name) {
  std::unique_lock lock(mutex_);
  if (!instances_.erase(name)) throw UnknownArtifact(name);
}

std::shared_ptr<ArtifactInstance> Registry::get(const std::string& name) const {
  auto instance = find(name);
  if (!instance) throw UnknownArtifact(name);
  return instance;
}

std::shared_ptr<ArtifactInstance> Registry::find(const std::string& name) const {
  std::shared_lock lock(mutex_);
  auto it = instances_.find(name);
  return it == instances_.end() ? nullptr : it->second;
}

std::shared_ptr<ArtifactInstance> Registry::findBySource(const std::string& sourceIri) const {
  std::shared_lock lock(mutex_);
  for (const auto& [n, instance] : instances_) {
    if (instance->sourceIri() == sourceIri) return instance;
  }
  return nullptr;
}

std::vector<std::shared_ptr<ArtifactInstance>> Registry::snapshot() const {
  std::shared_lock lock(mutex_);
  std::vector<std::shared_ptr<ArtifactInstance>> out;
  for (const auto& [n, instance] : instances_) out.push_back(instance);
  return out;
}

std::vector<std::string> Registry::names() const {
  std::shared_lock lock(mutex_);
  std::vector<std::string> out;
  for (const auto& [n, instance] : instances_) out.push_back(n);
  return out;
}

std::size_t Registry::size() const {
  std::shared_lock lock(mutex_);
  return instances_.size();
}

// --- uniform usage interface -------------------------------------------------

std::optional<td::DataValue> act(const Registry& registry, const std::string& artifactName,
                                 const std::string& actionName, const std::optional<td::DataValue>& input) {
  auto instance = registry.get(artifactName);
  auto it = instance->operations().find(actionName);
  if (it == instance->operations().end()) {
    std::vector<std::string> available;
    for (const auto& [n, h] : instance->operations()) available.push_back(n);
    throw UnknownOperation(artifactName, actionName, std::move(available));
  }
  const auto& interaction = it->second.interaction;
  if (interaction.inputSchema) {
    if (!input) throw SchemaMismatch("operation '" + actionName + "' requires an input value");
    if (!td::conformsTo(*input, *interaction.inputSchema)) {
      throw SchemaMismatch("input " + input->toJsonText() + " does not match the " +
                           std::string(td::toString(interaction.inputSchema->type)) + " schema of '" + actionName +
                           "'");
    }
  }
  auto request = binding::resolve(instance->td().baseIri, interaction, input);
  return binding::dispatch(instance->binding(), request, interaction.outputSchema);
}

td::DataValue readProperty(const Registry& registry, const std::string& artifactName, const std::string& propertyName) {
  auto instance = registry.get(artifactName);
  return refreshProperty(*instance, propertyName);
}

void writeProperty(Registry& registry, const std::string& artifactName, const std::string& propertyName,
                   const td::DataValue& value) {
  auto instance = registry.get(artifactName);
  const td::Interaction* prop = instance->td().find(propertyName);
  if (!prop || prop->kind != td::InteractionKind::Property) throw UnknownProperty(artifactName, propertyName);
  if (!prop->writable) throw NotWritable("property '" + propertyName + "' of '" + artifactName + "' is not writable");
  if (const auto& schema = prop->valueSchema(); schema && !td::conformsTo(value, *schema)) {
    throw SchemaMismatch("value " + value.toJsonText() + " does not match the schema of '" + propertyName + "'");
  }
  auto request = binding::resolveFor(binding::Verb::Write, instance->td().baseIri, *prop, value);
  if (!request.payload) request.payload = value.toJsonText();
  binding::dispatch(instance->binding(), request, std::nullopt);
}

std::vector<EventRecord> pollEvents(const Registry& registry, const std::string& artifactName,
                                    const std::string& eventName) {
  auto instance = registry.get(artifactName);
  auto it = instance->events().find(eventName);
  if (it == instance->events().end()) throw UnknownEvent(artifactName, eventName);
  auto request = binding::resolveFor(binding::Verb::Read, instance->td().baseIri, it->second.interaction, std::nullopt);
  auto res = instance->binding().invoke(request.target, request.verb, std::nullopt, request.mediaType);
  if (res.status < 200 || res.status >= 300) throw binding::TransportError(res.status, res.payload);

  auto doc = nlohmann::json::parse(res.payload, nullptr, false);
  if (doc.is_discarded() || !doc.is_array()) {
    throw binding::ResponseSchemaMismatch("event channel '" + eventName + "' did not return a record list");
  }
  std::vector<EventRecord> records;
  std::int64_t last = 0;
  for (const auto& item : doc) {
    EventRecord record;
    record.eventName = eventName;
    if (item.is_object()) {
      if (item.contains("time") && item.at("time").is_number()) record.timestamp = item.at("time").get<std::int64_t>();
      if (item.contains("payload") && !item.at("payload").is_null()) {
        record.payload = td::DataValue::fromJson(item.at("payload"));
      }
    }
    record.timestamp = std::max(record.timestamp, last);
    last = record.timestamp;
    records.push_back(std::move(record));
  }
  return records;
}

rdf::Graph exportContext(const Registry& registry, const PredicateTable& table, std::vector<std::string>* warnings) {
  rdf::Graph graph;
  auto warn = [&](std::string w) {
    if (warnings) warnings->push_back(std::move(w));
  };
  for (const auto& instance : registry.snapshot()) {
    for (const auto* prop : instance->td().ofKind(td::InteractionKind::Property)) {
      if (!prop->observable) continue;
      const PredicateRule* rule = table.forInteraction(*prop);
      if (!rule) {
        warn(instance->name() + "/" + prop->name + ": no predicate mapping");
        continue;
      }
      try {
        auto value = refreshProperty(*instance, prop->name);
        auto literal = table.render(*rule, value);
        if (!literal) {
          warn(instance->name() + "/" + prop->name + ": value has no literal form");
          continue;
        }
        graph.insert({rdf::Term::iri(instance->sourceIri()), rdf::Term::iri(rule->predicate), *literal});
      } catch (const Error& e) {
        warn(instance->name() + "/" + prop->name + ": stale (" + e.what() + ")");
      }
    }
  }
  return graph;
}

}  // namespace aat::artifact
