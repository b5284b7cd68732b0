#pragma once

// The generic artifact: any Thing Description projected into a uniform
// runtime entity with observable properties, an operation map and an event
// map, kept in a registry that supports replacing devices at runtime.

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "aat/binding.h"
#include "aat/error.h"
#include "aat/rdf.h"
#include "aat/td.h"

namespace aat::artifact {

class ArtifactError : public Error {
 public:
  using Error::Error;
};

class UnknownArtifact : public ArtifactError {
 public:
  explicit UnknownArtifact(const std::string& name) : ArtifactError("unknown artifact '" + name + "'") {}
};

class UnknownOperation : public ArtifactError {
 public:
  UnknownOperation(const std::string& artifact, const std::string& operation, std::vector<std::string> available);
  const std::vector<std::string>& available() const { return available_; }

 private:
  std::vector<std::string> available_;
};

class UnknownProperty : public ArtifactError {
 public:
  UnknownProperty(const std::string& artifact, const std::string& property)
      : ArtifactError("artifact '" + artifact + "' has no property '" + property + "'") {}
};

class UnknownEvent : public ArtifactError {
 public:
  UnknownEvent(const std::string& artifact, const std::string& event)
      : ArtifactError("artifact '" + artifact + "' has no event '" + event + "'") {}
};

class SchemaMismatch : public ArtifactError {
 public:
  using ArtifactError::ArtifactError;
};

class NotReadable : public ArtifactError {
 public:
  using ArtifactError::ArtifactError;
};

class NotWritable : public ArtifactError {
 public:
  using ArtifactError::ArtifactError;
};

class NameMismatch : public ArtifactError {
 public:
  using ArtifactError::ArtifactError;
};

class DuplicateArtifact : public ArtifactError {
 public:
  explicit DuplicateArtifact(const std::string& name) : ArtifactError("artifact '" + name + "' already exists") {}
};

// The TD failed validation with error-severity diagnostics.
class InvalidTd : public ArtifactError {
 public:
  explicit InvalidTd(std::vector<td::Diagnostic> diagnostics);
  const std::vector<td::Diagnostic>& diagnostics() const { return diagnostics_; }

 private:
  std::vector<td::Diagnostic> diagnostics_;
};

// Maps a property's semantic type to the context predicate it is published
// under, and booleans to the literals used in context graphs.
struct PredicateRule {
  std::string semanticType;
  std::string predicate;
  // Empty: booleans are rendered as boolean literals.
  std::string trueLiteral;
  std::string falseLiteral;
};

class PredicateTable {
 public:
  // One rule per line: `semanticTypeIRI predicateIRI trueLiteral falseLiteral`.
  // IRIs may be <full> or use the well-known prefixes; `-` leaves a literal
  // slot empty. `#` starts a comment.
  static PredicateTable parse(std::string_view text);
  static PredicateTable load(const std::string& path);
  // switch status -> iot:switchstatus on/off, curtain status ->
  // iot:currentStatus open/closed, plus heating/cooling/temperature.
  static PredicateTable defaults();

  void add(PredicateRule rule);
  const PredicateRule* find(const std::string& semanticType) const;
  // Rule of the first iot: semantic type of `interaction` that has one.
  const PredicateRule* forInteraction(const td::Interaction& interaction) const;
  std::optional<rdf::Term> render(const PredicateRule& rule, const td::DataValue& value) const;
  // Inverse of render() for literals produced by this table.
  std::optional<td::DataValue> parseLiteral(const PredicateRule& rule, const rdf::Term& literal,
                                            const td::DataSchema& schema) const;
  const std::vector<PredicateRule>& rules() const { return rules_; }

 private:
  std::vector<PredicateRule> rules_;
};

struct PropertyState {
  std::optional<td::DataValue> value;
  bool observable = true;
  bool writable = false;
  bool stale = false;
};

struct OperationHandle {
  td::Interaction interaction;
  td::Form form;
};

struct EventChannel {
  td::Interaction interaction;
};

struct EventRecord {
  std::string eventName;
  std::optional<td::DataValue> payload;
  std::int64_t timestamp = 0;
};

class ArtifactInstance {
 public:
  ArtifactInstance(td::ThingDescription td, std::shared_ptr<binding::ProtocolBinding> binding,
                   std::string sourceIri);

  const std::string& name() const { return td_.name; }
  const std::set<std::string>& typeIris() const { return td_.types; }
  const td::ThingDescription& td() const { return td_; }
  // IRI the TD was loaded from; the artifact's identity in context graphs.
  const std::string& sourceIri() const { return sourceIri_; }
  std::uint64_t generation() const { return generation_; }
  binding::ProtocolBinding& binding() const { return *binding_; }

  const std::map<std::string, OperationHandle>& operations() const { return operations_; }
  const std::map<std::string, EventChannel>& events() const { return events_; }
  // Copy of the observable property cache.
  std::map<std::string, PropertyState> properties() const;
  std::set<std::string> propertyNames() const;

  // Action name whose semantic types include `operationType`, if any.
  std::optional<std::string> operationFor(const std::string& operationType) const;

  // Initial-read failures recorded by instantiate().
  const std::vector<std::string>& warnings() const { return warnings_; }
  void addWarning(std::string warning) { warnings_.push_back(std::move(warning)); }

  void cacheValue(const std::string& propertyName, td::DataValue value);
  void markStale(const std::string& propertyName);

 private:
  friend class Registry;

  td::ThingDescription td_;
  std::shared_ptr<binding::ProtocolBinding> binding_;
  std::string sourceIri_;
  std::uint64_t generation_ = 1;
  std::map<std::string, OperationHandle> operations_;
  std::map<std::string, EventChannel> events_;
  mutable std::mutex propertyMutex_;
  std::map<std::string, PropertyState> properties_;
  std::vector<std::string> warnings_;
};

// Thrown when the instance was created but an initial property read failed;
// the affected properties are marked stale.
class InstantiationError : public ArtifactError {
 public:
  InstantiationError(std::shared_ptr<ArtifactInstance> instance, const std::string& message)
      : ArtifactError(message), instance_(std::move(instance)) {}
  const std::shared_ptr<ArtifactInstance>& instance() const { return instance_; }

 private:
  std::shared_ptr<ArtifactInstance> instance_;
};

// Builds the three maps from the TD and reads every observable property once.
// Throws InvalidTd, binding::NoBindingError, or InstantiationError.
std::shared_ptr<ArtifactInstance> instantiate(const td::ThingDescription& td, const binding::BindingRegistry& bindings,
                                              std::string sourceIri);

// Fresh read through the instance's binding; updates its cached value.
td::DataValue refreshProperty(ArtifactInstance& instance, const std::string& propertyName);

// Artifacts by name. Mutations are serialized; readers get shared_ptr
// snapshots, so in-flight work on a replaced instance keeps its old binding.
class Registry {
 public:
  // Inserts even when instantiate() throws InstantiationError (then rethrows).
  std::shared_ptr<ArtifactInstance> add(const td::ThingDescription& td, const binding::BindingRegistry& bindings,
                                        std::string sourceIri);
  // Swaps the instance under `name`; the generation increments. The source
  // IRI is kept unless a new one is given.
  std::shared_ptr<ArtifactInstance> replace(const std::string& name, const td::ThingDescription& newTd,
                                            const binding::BindingRegistry& bindings,
                                            std::optional<std::string> sourceIri = std::nullopt);
  void remove(const std::string& name);

  std::shared_ptr<ArtifactInstance> get(const std::string& name) const;  // throws UnknownArtifact
  std::shared_ptr<ArtifactInstance> find(const std::string& name) const;
  std::shared_ptr<ArtifactInstance> findBySource(const std::string& sourceIri) const;
  std::vector<std::shared_ptr<ArtifactInstance>> snapshot() const;
  std::vector<std::string> names() const;
  std::size_t size() const;

 private:
  mutable std::shared_mutex mutex_;
  std::map<std::string, std::shared_ptr<ArtifactInstance>> instances_;
};

// Uniform invocation: returns the decoded output, or nullopt as a bare
// acknowledgment when the action has no output schema.
std::optional<td::DataValue> act(const Registry& registry, const std::string& artifactName,
                                 const std::string& actionName, const std::optional<td::DataValue>& input);

td::DataValue readProperty(const Registry& registry, const std::string& artifactName, const std::string& propertyName);
void writeProperty(Registry& registry, const std::string& artifactName, const std::string& propertyName,
                   const td::DataValue& value);

// Drains queued records of one event channel, oldest first.
std::vector<EventRecord> pollEvents(const Registry& registry, const std::string& artifactName,
                                    const std::string& eventName);

// One triple per readable property: (source IRI, table predicate, literal).
// Properties are read afresh; stale or unmapped ones are skipped and reported
// in `warnings` when given.
rdf::Graph exportContext(const Registry& registry, const PredicateTable& table,
                         std::vector<std::string>* warnings = nullptr);

}  // namespace aat::artifact
