#pragma once

// Minimal RDF substrate: terms, triples, graphs, basic-graph-pattern matching,
// simple entailment and DELETE/INSERT/WHERE graph updates.
//
// Graphs are plain values. Every operation here returns a new graph and
// leaves its inputs untouched, so planners can keep cheap state snapshots.

#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "aat/error.h"

namespace aat::rdf {

class TermError : public Error {
 public:
  using Error::Error;
};

// A literal or a subject/predicate position that the data model forbids.
class GraphError : public Error {
 public:
  using Error::Error;
};

class PatternError : public Error {
 public:
  using Error::Error;
};

class UpdateError : public Error {
 public:
  using Error::Error;
};

enum class TermKind { Iri, Blank, Literal, Variable };

// Lexical category of a literal. Non-literal terms always carry `None`.
enum class LiteralHint { None, String, Boolean, Number };

class Term {
 public:
  static Term iri(std::string value);
  static Term blank(std::string label);
  static Term literal(std::string lexical, LiteralHint hint = LiteralHint::String);
  static Term boolean(bool value);
  static Term number(double value);
  static Term variable(std::string name);

  TermKind kind() const { return kind_; }
  const std::string& value() const { return value_; }
  LiteralHint hint() const { return hint_; }

  bool isIri() const { return kind_ == TermKind::Iri; }
  bool isBlank() const { return kind_ == TermKind::Blank; }
  bool isLiteral() const { return kind_ == TermKind::Literal; }
  bool isVariable() const { return kind_ == TermKind::Variable; }

  // N-Triples spelling (`<iri>`, `_:b`, `"lit"`, `"1"^^<xsd:integer>`, `?v`).
  std::string toString() const;

  // Smallest possible term in the total order; used as a range-scan sentinel.
  static Term lowest() { return Term{}; }

  auto operator<=>(const Term&) const = default;
  bool operator==(const Term&) const = default;

 private:
  Term() = default;
  Term(TermKind kind, std::string value, LiteralHint hint)
      : kind_(kind), value_(std::move(value)), hint_(hint) {}

  TermKind kind_ = TermKind::Iri;
  std::string value_;
  LiteralHint hint_ = LiteralHint::None;
};

struct Triple {
  Term subject;
  Term predicate;
  Term object;

  auto operator<=>(const Triple&) const = default;
  bool operator==(const Triple&) const = default;
};

// Triples with Variables or blank nodes standing for unknowns.
using Pattern = std::vector<Triple>;

// Variable name (without the leading '?') to a concrete term.
using Binding = std::map<std::string, Term>;

// A set of variable-free triples. Blank nodes may occupy the predicate
// position (generalized RDF); literals may not occupy subject or predicate.
class Graph {
 public:
  using const_iterator = std::set<Triple>::const_iterator;

  Graph() = default;
  Graph(std::initializer_list<Triple> triples);
  template <typename Range>
  explicit Graph(const Range& triples) {
    for (const auto& t : triples) insert(t);
  }

  // Throws GraphError for variables or literals in subject/predicate.
  bool insert(const Triple& triple);
  bool erase(const Triple& triple) { return triples_.erase(triple) > 0; }
  bool contains(const Triple& triple) const { return triples_.count(triple) > 0; }

  std::size_t size() const { return triples_.size(); }
  bool empty() const { return triples_.empty(); }
  const_iterator begin() const { return triples_.begin(); }
  const_iterator end() const { return triples_.end(); }
  const std::set<Triple>& triples() const { return triples_; }

  // Triples whose subject equals `subject`.
  std::vector<Triple> withSubject(const Term& subject) const;

  std::set<std::string> blankLabels() const;
  std::set<Term> terms() const;
  bool hasBlanks() const;

  std::optional<std::string> name;

  bool operator==(const Graph& other) const { return triples_ == other.triples_; }

 private:
  std::set<Triple> triples_;
};

// Every binding of the pattern's Variables under which each instantiated
// pattern triple is in `data`. Blank nodes in the pattern act as
// non-distinguished variables. Results are distinct and sorted. An empty
// pattern has exactly one (empty) solution.
std::vector<Binding> match(const Pattern& pattern, const Graph& data);

struct Entailment {
  bool holds = false;
  // Blank label of the conclusion to the premise term it was mapped to.
  std::map<std::string, Term> witness;

  explicit operator bool() const { return holds; }
};

// RDF simple entailment: some mapping of `conclusion`'s blank nodes onto
// terms of `premise` makes every conclusion triple a premise triple.
Entailment entails(const Graph& premise, const Graph& conclusion);

// Set union. Blank labels of `second` that clash with `first` are renamed so
// the two documents' blank nodes stay distinct.
Graph unionOf(const Graph& first, const Graph& second);

// Replaces each Variable of `triple` using `binding`. Returns nullopt when a
// variable is unbound or the result would put a literal in subject/predicate.
std::optional<Triple> instantiate(const Triple& triple, const Binding& binding);

// DELETE {del} INSERT {ins} WHERE {where}. All solutions of `where` are
// computed against `state`; the union of instantiated delete triples is
// removed, then the union of instantiated insert triples is added. Triples
// left with an unbound variable or an illegal construct are skipped. Blank
// nodes in `ins` become fresh blank nodes per solution.
Graph applyUpdate(const Graph& state, const Pattern& del, const Pattern& ins,
                  const Pattern& where);

Pattern toPattern(const Graph& graph);

}  // namespace aat::rdf
