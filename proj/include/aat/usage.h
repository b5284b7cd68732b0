#pragma once

// Usage knowledge base: usages with their pre/postcondition contexts, the
// building topology, and grounding of condition-graph blank nodes to the
// artifact instance a usage is applied to.

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "aat/artifact.h"
#include "aat/error.h"
#include "aat/rdf.h"

namespace aat::usage {

class UsageError : public Error {
 public:
  using Error::Error;
};

// A usage document violates one of the ontology's axioms. `axiom` is a short
// stable name: "postcond", "forArtifact", "forOperation", "hasOperation",
// "context", or "domain:<property>" / "range:<property>".
class ValidationError : public UsageError {
 public:
  ValidationError(std::string axiom, const std::string& message)
      : UsageError(axiom + " axiom violated: " + message), axiom_(std::move(axiom)) {}
  const std::string& axiom() const { return axiom_; }

 private:
  std::string axiom_;
};

class TypeMismatch : public UsageError {
 public:
  using UsageError::UsageError;
};

// A resolved context document; tools:referencedBy markers are stripped from
// `graph` and kept in `references` (blank label -> reference IRI).
struct ContextRef {
  std::string iri;
  rdf::Graph graph;
  std::map<std::string, std::string> references;
};

struct UsageDecl {
  // IRI, or `_:label` for a blank usage node.
  std::string id;
  rdf::Term artifactNode = rdf::Term::lowest();
  std::set<std::string> artifactTypes;
  rdf::Term operationNode = rdf::Term::lowest();
  std::set<std::string> operationTypes;
  std::optional<ContextRef> precond;
  ContextRef postcond;
  // Reference IRIs attached to the artifact node in the usage document.
  std::set<std::string> artifactReferences;
};

using ContextResolver = std::function<ContextRef(const std::string& iri)>;

// Splits `tools:referencedBy` triples with blank subjects out of `graph`.
ContextRef makeContext(std::string iri, const rdf::Graph& graph);

// Context IRI -> file path, one `IRI<TAB>path` per line; paths relative to
// the manifest's directory.
class Manifest {
 public:
  static Manifest parse(std::string_view text, const std::filesystem::path& baseDir);
  static Manifest load(const std::filesystem::path& file);

  void add(std::string iri, std::filesystem::path path) { entries_[std::move(iri)] = std::move(path); }
  std::optional<std::filesystem::path> find(const std::string& iri) const;
  const std::map<std::string, std::filesystem::path>& entries() const { return entries_; }

  // Manifest entries first; other http(s) IRIs are fetched. Throws
  // UsageError for unknown IRIs and semdoc errors for unreadable documents.
  ContextResolver resolver() const;

 private:
  std::map<std::string, std::filesystem::path> entries_;
};

// Extracts every usg:Usage node and validates it. Throws ValidationError.
std::vector<UsageDecl> loadUsages(const rdf::Graph& usageGraph, const ContextResolver& resolve);

// Re-checks the mandatory links of an already loaded usage.
void validate(const UsageDecl& usage);

// Stable IRI standing for a blank node of usage `usageId`.
std::string skolemIri(const std::string& usageId, const std::string& key);
bool isSkolem(const rdf::Term& term);

enum class GroundingMode {
  // Blanks sharing a reference with the artifact node become the instance.
  Referenced,
  // Condition graphs are used as written.
  Disabled,
};

struct Grounding {
  rdf::Graph pre;  // empty when the usage has no precondition
  rdf::Graph post;
  bool hasPrecond = false;
};

// Throws TypeMismatch when `instanceTypes` holds none of the usage's artifact
// types. Blanks referenced like the artifact node become `instance`; other
// references shared by both condition graphs become one skolem IRI per
// reference; remaining blanks stay blank.
Grounding ground(const UsageDecl& usage, const std::string& instance, const std::set<std::string>& instanceTypes,
                 GroundingMode mode = GroundingMode::Referenced);

// An artifact instance as the planner sees it.
struct InstanceInfo {
  std::string iri;
  std::string artifactName;
  std::set<std::string> types;
  // Operation semantic type -> action name.
  std::map<std::string, std::string> operations;
};

InstanceInfo describeInstance(const td::ThingDescription& td, const std::string& iri);

class InstanceCatalog {
 public:
  InstanceCatalog() = default;
  explicit InstanceCatalog(rdf::Graph topology) : topology_(std::move(topology)) {}
  static InstanceCatalog fromRegistry(const artifact::Registry& registry, rdf::Graph topology);

  void add(InstanceInfo info);
  const InstanceInfo* find(const std::string& iri) const;
  // Topology elements whose types include `artifactType`, sorted.
  std::vector<std::string> instancesOf(const std::string& artifactType) const;
  // Action of `instance` implementing one of `operationTypes`, if any.
  std::optional<std::string> operationFor(const std::string& instance,
                                          const std::set<std::string>& operationTypes) const;
  const rdf::Graph& topology() const { return topology_; }

 private:
  rdf::Graph topology_;
  std::map<std::string, InstanceInfo> instances_;
};

std::vector<std::string> instancesOf(const artifact::Registry& registry, const rdf::Graph& topology,
                                     const std::string& artifactType);

// exportContext(registry) united with the topology and any ambient graphs.
rdf::Graph currentContext(const artifact::Registry& registry, const artifact::PredicateTable& table,
                          const std::vector<rdf::Graph>& extra, std::vector<std::string>* warnings = nullptr);

// Reads a Turtle document from a file path or an http(s) IRI.
rdf::Graph loadGraph(const std::string& locator);

}  // namespace aat::usage
