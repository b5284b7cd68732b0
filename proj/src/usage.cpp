#include "aat/usage.h"

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "aat/semdoc.h"

namespace aat::usage {

namespace {

namespace ns = semdoc::ns;

const std::string kType(ns::kRdfType);
const std::string kUsage = std::string(ns::kUsg) + "Usage";
const std::string kHasPrecond = std::string(ns::kUsg) + "hasPrecond";
const std::string kHasPostcond = std::string(ns::kUsg) + "hasPostcond";
const std::string kForArtifact = std::string(ns::kUsg) + "forArtifact";
const std::string kForOperation = std::string(ns::kUsg) + "forOperation";
const std::string kHasOperation = std::string(ns::kUsg) + "hasOperation";
const std::string kReferencedBy = std::string(ns::kTools) + "referencedBy";
const std::string kHasElement = std::string(ns::kBot) + "hasElement";
constexpr std::string_view kSkolemPrefix = "urn:aat:skolem:";

std::string idOf(const rdf::Term& node) { return node.isBlank() ? "_:" + node.value() : node.value(); }

std::string localName(const std::string& iri) {
  auto cut = iri.find_last_of("#/");
  return cut == std::string::npos ? iri : iri.substr(cut + 1);
}

std::vector<rdf::Term> objects(const rdf::Graph& g, const rdf::Term& subject, const std::string& predicate) {
  std::vector<rdf::Term> out;
  for (const auto& t : g.withSubject(subject)) {
    if (t.predicate.isIri() && t.predicate.value() == predicate) out.push_back(t.object);
  }
  return out;
}

std::set<std::string> typesOf(const rdf::Graph& g, const rdf::Term& node) {
  std::set<std::string> types;
  for (const auto& o : objects(g, node, kType)) {
    if (o.isIri()) types.insert(o.value());
  }
  return types;
}

void checkDomainsAndRanges(const rdf::Graph& g) {
  std::set<rdf::Term> usages;
  for (const auto& t : g) {
    if (t.predicate.value() == kType && t.object.isIri() && t.object.value() == kUsage) usages.insert(t.subject);
  }
  for (const auto& t : g) {
    if (!t.predicate.isIri()) continue;
    const auto& p = t.predicate.value();
    bool usageDomain = p == kForArtifact || p == kForOperation || p == kHasPrecond || p == kHasPostcond;
    if (usageDomain && !usages.count(t.subject)) {
      throw ValidationError("domain:" + localName(p), idOf(t.subject) + " uses " + localName(p) +
                                                          " but is not a usg:Usage");
    }
    if ((p == kHasPrecond || p == kHasPostcond) && !t.object.isIri()) {
      throw ValidationError("range:" + localName(p), "the object of " + localName(p) + " on " + idOf(t.subject) +
                                                         " must be a context IRI");
    }
    if ((p == kForArtifact || p == kForOperation || p == kHasOperation) && t.object.isLiteral()) {
      throw ValidationError("range:" + localName(p), "the object of " + localName(p) + " on " + idOf(t.subject) +
                                                         " must be a node, not a literal");
    }
    if ((p == kForArtifact || p == kForOperation) && typesOf(g, t.object).empty()) {
      throw ValidationError("range:" + localName(p), idOf(t.object) + " needs an rdf:type naming its " +
                                                         (p == kForArtifact ? "artifact" : "operation") + " type");
    }
  }
}

rdf::Term single(const rdf::Graph& g, const rdf::Term& usage, const std::string& predicate, const std::string& axiom) {
  auto found = objects(g, usage, predicate);
  if (found.empty()) throw ValidationError(axiom, "usage " + idOf(usage) + " has no usg:" + localName(predicate));
  if (found.size() > 1) {
    throw ValidationError(axiom, "usage " + idOf(usage) + " has more than one usg:" + localName(predicate));
  }
  return found.front();
}

ContextRef resolveContext(const ContextResolver& resolve, const std::string& iri, const std::string& usageId) {
  ContextRef ref = resolve(iri);
  if (ref.graph.empty()) {
    throw ValidationError("context", "context " + iri + " of usage " + usageId + " has no status statement");
  }
  return ref;
}

rdf::Graph substitute(const rdf::Graph& g, const std::map<std::string, rdf::Term>& replacements) {
  if (replacements.empty()) return g;
  auto swap = [&](const rdf::Term& t) {
    if (!t.isBlank()) return t;
    auto it = replacements.find(t.value());
    return it == replacements.end() ? t : it->second;
  };
  rdf::Graph out;
  for (const auto& t : g) out.insert({swap(t.subject), swap(t.predicate), swap(t.object)});
  return out;
}

std::set<std::string> targets(const ContextRef& ref) {
  std::set<std::string> out;
  for (const auto& [label, target] : ref.references) out.insert(target);
  return out;
}

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t hash = 14695981039346656037ull;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 1099511628211ull;
  }
  return hash;
}

}  // namespace

ContextRef makeContext(std::string iri, const rdf::Graph& graph) {
  ContextRef ref;
  ref.iri = std::move(iri);
  for (const auto& t : graph) {
    if (t.predicate.isIri() && t.predicate.value() == kReferencedBy && t.subject.isBlank() && t.object.isIri()) {
      ref.references[t.subject.value()] = t.object.value();
    } else {
      ref.graph.insert(t);
    }
  }
  ref.graph.name = ref.iri;
  return ref;
}

Manifest Manifest::parse(std::string_view text, const std::filesystem::path& baseDir) {
  Manifest manifest;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineNo = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    if (!line.empty() && line.front() == '#') continue;
    std::istringstream fields(line);
    std::string iri;
    std::string path;
    if (!(fields >> iri)) continue;
    if (!(fields >> path)) throw UsageError("manifest line " + std::to_string(lineNo) + ": missing path for " + iri);
    if (iri.size() > 2 && iri.front() == '<' && iri.back() == '>') iri = iri.substr(1, iri.size() - 2);
    std::filesystem::path p(path);
    manifest.add(iri, p.is_absolute() ? p : baseDir / p);
  }
  return manifest;
}

Manifest Manifest::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw UsageError("cannot open manifest " + file.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), file.parent_path());
}

std::optional<std::filesystem::path> Manifest::find(const std::string& iri) const {
  auto it = entries_.find(iri);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

ContextResolver Manifest::resolver() const {
  return [entries = entries_](const std::string& iri) {
    if (auto it = entries.find(iri); it != entries.end()) return makeContext(iri, loadGraph(it->second.string()));
    if (iri.rfind("http://", 0) == 0 || iri.rfind("https://", 0) == 0) return makeContext(iri, loadGraph(iri));
    throw UsageError("no document for context <" + iri + ">");
  };
}

rdf::Graph loadGraph(const std::string& locator) {
  auto text = semdoc::fetch(semdoc::DocumentSource::fromLocator(locator));
  auto graph = semdoc::parseTurtle(text, semdoc::PrefixTable::wellKnown()).graph;
  graph.name = locator;
  return graph;
}

std::vector<UsageDecl> loadUsages(const rdf::Graph& g, const ContextResolver& resolve) {
  checkDomainsAndRanges(g);
  std::set<rdf::Term> nodes;
  for (const auto& t : g) {
    if (t.predicate.value() == kType && t.object.isIri() && t.object.value() == kUsage) nodes.insert(t.subject);
  }

  std::vector<UsageDecl> usages;
  for (const auto& node : nodes) {
    UsageDecl u;
    u.id = idOf(node);
    auto post = single(g, node, kHasPostcond, "postcond");
    u.artifactNode = single(g, node, kForArtifact, "forArtifact");
    u.operationNode = single(g, node, kForOperation, "forOperation");
    auto linked = objects(g, u.artifactNode, kHasOperation);
    if (std::find(linked.begin(), linked.end(), u.operationNode) == linked.end()) {
      throw ValidationError("hasOperation", "artifact " + idOf(u.artifactNode) + " of usage " + u.id +
                                                " has no usg:hasOperation link to " + idOf(u.operationNode));
    }
    u.artifactTypes = typesOf(g, u.artifactNode);
    u.operationTypes = typesOf(g, u.operationNode);
    for (const auto& r : objects(g, u.artifactNode, kReferencedBy)) {
      if (r.isIri()) u.artifactReferences.insert(r.value());
    }

    auto pres = objects(g, node, kHasPrecond);
    if (pres.size() > 1) throw ValidationError("precond", "usage " + u.id + " has more than one usg:hasPrecond");
    if (!pres.empty()) u.precond = resolveContext(resolve, pres.front().value(), u.id);
    u.postcond = resolveContext(resolve, post.value(), u.id);
    usages.push_back(std::move(u));
  }
  std::sort(usages.begin(), usages.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  return usages;
}

void validate(const UsageDecl& u) {
  if (u.postcond.iri.empty()) throw ValidationError("postcond", "usage " + u.id + " has no postcondition");
  if (u.postcond.graph.empty()) throw ValidationError("context", "postcondition of " + u.id + " is empty");
  if (u.precond && u.precond->graph.empty()) throw ValidationError("context", "precondition of " + u.id + " is empty");
  if (u.artifactTypes.empty()) throw ValidationError("forArtifact", "usage " + u.id + " has no typed artifact");
  if (u.operationTypes.empty()) throw ValidationError("forOperation", "usage " + u.id + " has no typed operation");
}

std::string skolemIri(const std::string& usageId, const std::string& key) {
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(fnv1a(usageId + '\x1f' + key)));
  return std::string(kSkolemPrefix) + hex;
}

bool isSkolem(const rdf::Term& term) { return term.isIri() && term.value().rfind(kSkolemPrefix, 0) == 0; }

Grounding ground(const UsageDecl& u, const std::string& instance, const std::set<std::string>& instanceTypes,
                 GroundingMode mode) {
  bool typed = false;
  for (const auto& t : u.artifactTypes) typed = typed || instanceTypes.count(t);
  if (!typed) throw TypeMismatch(instance + " is not an instance of the artifact type of usage " + u.id);

  Grounding g;
  g.hasPrecond = u.precond.has_value();
  if (mode == GroundingMode::Disabled) {
    if (u.precond) g.pre = u.precond->graph;
    g.post = u.postcond.graph;
    return g;
  }

  const auto instanceTerm = rdf::Term::iri(instance);
  const auto preTargets = u.precond ? targets(*u.precond) : std::set<std::string>{};
  const auto postTargets = targets(u.postcond);
  auto plan = [&](const ContextRef& ref, const std::set<std::string>& otherTargets) {
    std::map<std::string, rdf::Term> replacements;
    for (const auto& [label, target] : ref.references) {
      if (u.artifactReferences.count(target)) {
        replacements.emplace(label, instanceTerm);
      } else if (otherTargets.count(target)) {
        replacements.emplace(label, rdf::Term::iri(skolemIri(u.id, target)));
      }
    }
    return replacements;
  };
  if (u.precond) g.pre = substitute(u.precond->graph, plan(*u.precond, postTargets));
  g.post = substitute(u.postcond.graph, plan(u.postcond, preTargets));
  return g;
}

InstanceInfo describeInstance(const td::ThingDescription& td, const std::string& iri) {
  InstanceInfo info;
  info.iri = iri;
  info.artifactName = td.name;
  info.types = td.types;
  for (const auto* action : td.ofKind(td::InteractionKind::Action)) {
    for (const auto& type : action->semanticTypes) info.operations.emplace(type, action->name);
  }
  return info;
}

InstanceCatalog InstanceCatalog::fromRegistry(const artifact::Registry& registry, rdf::Graph topology) {
  InstanceCatalog catalog(std::move(topology));
  for (const auto& instance : registry.snapshot()) catalog.add(describeInstance(instance->td(), instance->sourceIri()));
  return catalog;
}

void InstanceCatalog::add(InstanceInfo info) {
  auto iri = info.iri;
  instances_[iri] = std::move(info);
}

const InstanceInfo* InstanceCatalog::find(const std::string& iri) const {
  auto it = instances_.find(iri);
  return it == instances_.end() ? nullptr : &it->second;
}

std::vector<std::string> InstanceCatalog::instancesOf(const std::string& artifactType) const {
  std::set<std::string> elements;
  for (const auto& t : topology_) {
    if (t.predicate.isIri() && t.predicate.value() == kHasElement && t.object.isIri()) elements.insert(t.object.value());
  }
  std::vector<std::string> out;
  for (const auto& [iri, info] : instances_) {
    if (elements.count(iri) && info.types.count(artifactType)) out.push_back(iri);
  }
  return out;
}

std::optional<std::string> InstanceCatalog::operationFor(const std::string& instance,
                                                         const std::set<std::string>& operationTypes) const {
  const auto* info = find(instance);
  if (!info) return std::nullopt;
  for (const auto& type : operationTypes) {
    if (auto it = info->operations.find(type); it != info->operations.end()) return it->second;
  }
  return std::nullopt;
}

std::vector<std::string> instancesOf(const artifact::Registry& registry, const rdf::Graph& topology,
                                     const std::string& artifactType) {
  return InstanceCatalog::fromRegistry(registry, topology).instancesOf(artifactType);
}

rdf::Graph currentContext(const artifact::Registry& registry, const artifact::PredicateTable& table,
                          const std::vector<rdf::Graph>& extra, std::vector<std::string>* warnings) {
  rdf::Graph context = artifact::exportContext(registry, table, warnings);
  for (const auto& g : extra) context = rdf::unionOf(context, g);
  return context;
}

}  // namespace aat::usage
