#pragma once

#include <chrono>
#include <map>
#include <string>
#include <string_view>
#include <utility>

#include "aat/error.h"
#include "aat/rdf.h"

namespace aat::semdoc {

namespace ns {
inline constexpr std::string_view kRdf = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
inline constexpr std::string_view kRdfType = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
inline constexpr std::string_view kXsd = "http://www.w3.org/2001/XMLSchema#";
inline constexpr std::string_view kIot = "http://iotschema.org/";
inline constexpr std::string_view kTd = "http://www.w3.org/ns/td#";
inline constexpr std::string_view kUsg = "http://www.emse.fr/ci/ontologies/2018/wot_usage#";
inline constexpr std::string_view kTools = "http://localhost/tools/";
inline constexpr std::string_view kBot = "http://www.w3id.org/bot#";
inline constexpr std::string_view kSh = "http://localhost/smart_home#";
}  // namespace ns

class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t line, std::size_t column)
      : Error(message + " (line " + std::to_string(line) + ", column " + std::to_string(column) + ")"),
        line_(line),
        column_(column) {}
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

class FetchError : public Error {
 public:
  FetchError(std::string origin, std::string cause)
      : Error("cannot fetch " + origin + ": " + cause), origin_(std::move(origin)), cause_(std::move(cause)) {}
  const std::string& origin() const { return origin_; }
  const std::string& cause() const { return cause_; }

 private:
  std::string origin_;
  std::string cause_;
};

// Prefix label (without the colon) to namespace IRI.
class PrefixTable {
 public:
  // Pre-registers rdf: so `a` and rdf:type always expand.
  PrefixTable();

  void add(const std::string& label, const std::string& ns) { map_[label] = ns; }
  bool has(const std::string& label) const { return map_.count(label) > 0; }
  // Throws Error for an undeclared prefix.
  std::string expand(std::string_view prefixed) const;
  // Shortest `label:local` spelling for `iri`, or `<iri>` when none applies.
  std::string compact(const std::string& iri) const;
  const std::map<std::string, std::string>& entries() const { return map_; }

  // rdf:, iot:, td:, usg:, tools:, bot:, sh:, xsd:.
  static PrefixTable wellKnown();

 private:
  std::map<std::string, std::string> map_;
};

struct TurtleDocument {
  rdf::Graph graph;
  PrefixTable prefixes;
};

// Parses the Turtle subset used by usage, context and topology documents.
// `initial` seeds the prefix table (document @prefix lines override it).
TurtleDocument parseTurtle(std::string_view text, const PrefixTable& initial = PrefixTable());

// One line per triple, sorted, blank nodes renumbered `_:bN`.
std::string serializeNTriples(const rdf::Graph& graph);

enum class MediaHint { Turtle, NTriples, TdJson };

struct DocumentSource {
  enum class Origin { File, Http, Inline };

  Origin origin = Origin::File;
  // File path, http(s) IRI, or the inline document text.
  std::string location;
  std::optional<MediaHint> mediaHint;

  static DocumentSource file(std::string path) { return {Origin::File, std::move(path), std::nullopt}; }
  static DocumentSource http(std::string iri) { return {Origin::Http, std::move(iri), std::nullopt}; }
  static DocumentSource inlineText(std::string text, MediaHint hint) { return {Origin::Inline, std::move(text), hint}; }
  // http:// and https:// become Http, file:// and everything else File.
  static DocumentSource fromLocator(const std::string& locator);

  // Explicit hint, else inferred from the extension (.ttl/.nt/.json/.jsonld).
  MediaHint media() const;
};

struct FetchOptions {
  std::chrono::milliseconds timeout{5000};
};

// Raw document text. Throws FetchError on I/O failure or a non-2xx status;
// HTTP connection failures carry the cause "connect".
std::string fetch(const DocumentSource& source, const FetchOptions& options = {});

// Resolves `reference` against `base` (absolute IRIs and paths pass through).
std::string resolveReference(const std::string& base, const std::string& reference);

}  // namespace aat::semdoc
