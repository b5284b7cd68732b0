#include "aat/rdf.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <limits>

namespace aat::rdf {

namespace {

constexpr std::string_view kXsd = "http://www.w3.org/2001/XMLSchema#";

bool hasWhitespace(std::string_view s) {
  return std::any_of(s.begin(), s.end(), [](unsigned char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
  });
}

std::string escapeLiteral(std::string_view s) {
  std::string out;
  out.reserve(s.size() + 2);
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  return out;
}

bool isIntegerLexical(std::string_view s) {
  if (!s.empty() && (s.front() == '+' || s.front() == '-')) s.remove_prefix(1);
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

}  // namespace

Term Term::iri(std::string value) {
  if (value.empty()) throw TermError("IRI must not be empty");
  if (hasWhitespace(value)) throw TermError("IRI contains whitespace: " + value);
  return Term(TermKind::Iri, std::move(value), LiteralHint::None);
}

Term Term::blank(std::string label) {
  if (label.empty() || hasWhitespace(label)) throw TermError("invalid blank node label '" + label + "'");
  return Term(TermKind::Blank, std::move(label), LiteralHint::None);
}

Term Term::literal(std::string lexical, LiteralHint hint) {
  if (hint == LiteralHint::None) hint = LiteralHint::String;
  return Term(TermKind::Literal, std::move(lexical), hint);
}

Term Term::boolean(bool value) {
  return Term(TermKind::Literal, value ? "true" : "false", LiteralHint::Boolean);
}

Term Term::number(double value) {
  if (!std::isfinite(value)) throw TermError("number literal must be finite");
  if (std::trunc(value) == value && std::fabs(value) < 1e15) {
    return Term(TermKind::Literal, std::to_string(static_cast<long long>(value)), LiteralHint::Number);
  }
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return Term(TermKind::Literal, std::string(buf, end), LiteralHint::Number);
}

Term Term::variable(std::string name) {
  if (name.empty() || hasWhitespace(name)) throw TermError("invalid variable name '" + name + "'");
  return Term(TermKind::Variable, std::move(name), LiteralHint::None);
}

std::string Term::toString() const {
  switch (kind_) {
    case TermKind::Iri: return "<" + value_ + ">";
    case TermKind::Blank: return "_:" + value_;
    case TermKind::Variable: return "?" + value_;
    case TermKind::Literal: break;
  }
  std::string quoted = "\"" + escapeLiteral(value_) + "\"";
  switch (hint_) {
    case LiteralHint::Boolean: return quoted + "^^<" + std::string(kXsd) + "boolean>";
    case LiteralHint::Number:
      return quoted + "^^<" + std::string(kXsd) + (isIntegerLexical(value_) ? "integer>" : "decimal>");
    default: return quoted;
  }
}

Graph::Graph(std::initializer_list<Triple> triples) {
  for (const auto& t : triples) insert(t);
}

bool Graph::insert(const Triple& t) {
  if (t.subject.isVariable() || t.predicate.isVariable() || t.object.isVariable()) {
    throw GraphError("graphs may not contain variables: " + t.subject.toString() + " " +
                     t.predicate.toString() + " " + t.object.toString());
  }
  if (t.subject.isLiteral() || t.predicate.isLiteral()) {
    throw GraphError("literal in subject or predicate position: " + t.subject.toString() + " " +
                     t.predicate.toString());
  }
  return triples_.insert(t).second;
}

std::vector<Triple> Graph::withSubject(const Term& subject) const {
  std::vector<Triple> out;
  for (auto it = triples_.lower_bound(Triple{subject, Term::lowest(), Term::lowest()});
       it != triples_.end() && it->subject == subject; ++it) {
    out.push_back(*it);
  }
  return out;
}

std::set<std::string> Graph::blankLabels() const {
  std::set<std::string> labels;
  for (const auto& t : triples_) {
    for (const Term* term : {&t.subject, &t.predicate, &t.object}) {
      if (term->isBlank()) labels.insert(term->value());
    }
  }
  return labels;
}

std::set<Term> Graph::terms() const {
  std::set<Term> out;
  for (const auto& t : triples_) {
    out.insert(t.subject);
    out.insert(t.predicate);
    out.insert(t.object);
  }
  return out;
}

bool Graph::hasBlanks() const {
  return std::any_of(triples_.begin(), triples_.end(), [](const Triple& t) {
    return t.subject.isBlank() || t.predicate.isBlank() || t.object.isBlank();
  });
}

namespace {

// Backtracking matcher shared by match() and entails(). Pattern positions
// holding a Variable or (when `blanksAreSlots`) a blank node are open slots;
// everything else must match exactly. Slot names are prefixed to keep the
// variable and blank namespaces apart.
class Solver {
 public:
  Solver(const Pattern& pattern, const Graph& data, bool blanksAreSlots)
      : pattern_(pattern), blanksAreSlots_(blanksAreSlots) {
    for (const auto& t : data) {
      all_.push_back(&t);
      byPredicate_[t.predicate].push_back(&t);
    }
    order();
  }

  // Calls `visit` for every complete assignment until it returns false.
  void solve(const std::function<bool(const std::map<std::string, Term>&)>& visit) {
    std::map<std::string, Term> assignment;
    step(0, assignment, visit);
  }

 private:
  std::optional<std::string> slotName(const Term& term) const {
    if (term.isVariable()) return "?" + term.value();
    if (blanksAreSlots_ && term.isBlank()) return "_:" + term.value();
    return std::nullopt;
  }

  // Most-constrained-first static ordering of pattern triples.
  void order() {
    std::vector<bool> used(pattern_.size(), false);
    std::set<std::string> bound;
    for (std::size_t n = 0; n < pattern_.size(); ++n) {
      int best = -1;
      int bestScore = -1;
      for (std::size_t i = 0; i < pattern_.size(); ++i) {
        if (used[i]) continue;
        int score = 0;
        const Triple& t = pattern_[i];
        for (const Term* term : {&t.subject, &t.predicate, &t.object}) {
          auto slot = slotName(*term);
          if (!slot || bound.count(*slot)) ++score;
        }
        if (!slotName(t.predicate)) score += 1;  // predicate index hit
        if (score > bestScore) {
          bestScore = score;
          best = static_cast<int>(i);
        }
      }
      used[best] = true;
      order_.push_back(static_cast<std::size_t>(best));
      const Triple& t = pattern_[best];
      for (const Term* term : {&t.subject, &t.predicate, &t.object}) {
        if (auto slot = slotName(*term)) bound.insert(*slot);
      }
    }
  }

  // Unifies `want` against `have`, recording new slot values in `assignment`
  // and the names it added in `added`.
  bool unify(const Term& want, const Term& have, std::map<std::string, Term>& assignment,
             std::vector<std::string>& added) const {
    auto slot = slotName(want);
    if (!slot) return want == have;
    auto it = assignment.find(*slot);
    if (it != assignment.end()) return it->second == have;
    assignment.emplace(*slot, have);
    added.push_back(*slot);
    return true;
  }

  const Term* resolved(const Term& term, const std::map<std::string, Term>& assignment) const {
    auto slot = slotName(term);
    if (!slot) return &term;
    auto it = assignment.find(*slot);
    return it == assignment.end() ? nullptr : &it->second;
  }

  bool step(std::size_t depth, std::map<std::string, Term>& assignment,
            const std::function<bool(const std::map<std::string, Term>&)>& visit) {
    if (depth == order_.size()) return visit(assignment);
    const Triple& want = pattern_[order_[depth]];

    const std::vector<const Triple*>* candidates = &all_;
    if (const Term* p = resolved(want.predicate, assignment)) {
      auto it = byPredicate_.find(*p);
      if (it == byPredicate_.end()) return true;
      candidates = &it->second;
    }
    const Term* s = resolved(want.subject, assignment);
    const Term* o = resolved(want.object, assignment);

    for (const Triple* have : *candidates) {
      if (s && *s != have->subject) continue;
      if (o && *o != have->object) continue;
      std::vector<std::string> added;
      bool ok = unify(want.subject, have->subject, assignment, added) &&
                unify(want.predicate, have->predicate, assignment, added) &&
                unify(want.object, have->object, assignment, added);
      bool keepGoing = true;
      if (ok) keepGoing = step(depth + 1, assignment, visit);
      for (const auto& name : added) assignment.erase(name);
      if (!keepGoing) return false;
    }
    return true;
  }

  const Pattern& pattern_;
  bool blanksAreSlots_;
  std::vector<const Triple*> all_;
  std::map<Term, std::vector<const Triple*>> byPredicate_;
  std::vector<std::size_t> order_;
};

}  // namespace

std::vector<Binding> match(const Pattern& pattern, const Graph& data) {
  for (const auto& t : pattern) {
    if (t.subject.isLiteral() || t.predicate.isLiteral()) {
      throw PatternError("literal in subject or predicate position of pattern: " +
                         t.subject.toString() + " " + t.predicate.toString());
    }
  }
  std::set<Binding> solutions;
  Solver solver(pattern, data, /*blanksAreSlots=*/true);
  solver.solve([&](const std::map<std::string, Term>& assignment) {
    Binding binding;
    for (const auto& [slot, term] : assignment) {
      if (slot.front() == '?') binding.emplace(slot.substr(1), term);
    }
    solutions.insert(std::move(binding));
    return true;
  });
  return {solutions.begin(), solutions.end()};
}

Entailment entails(const Graph& premise, const Graph& conclusion) {
  Entailment result;
  if (!conclusion.hasBlanks()) {
    result.holds = std::all_of(conclusion.begin(), conclusion.end(),
                               [&](const Triple& t) { return premise.contains(t); });
    return result;
  }
  Pattern pattern(conclusion.begin(), conclusion.end());
  Solver solver(pattern, premise, /*blanksAreSlots=*/true);
  solver.solve([&](const std::map<std::string, Term>& assignment) {
    result.holds = true;
    for (const auto& [slot, term] : assignment) result.witness.emplace(slot.substr(2), term);
    return false;
  });
  return result;
}

Graph unionOf(const Graph& first, const Graph& second) {
  Graph out = first;
  out.name = first.name;
  auto firstLabels = first.blankLabels();
  auto secondLabels = second.blankLabels();
  std::map<std::string, std::string> rename;
  for (const auto& label : secondLabels) {
    if (!firstLabels.count(label)) continue;
    std::string fresh;
    for (std::size_t n = 1;; ++n) {
      fresh = label + "_" + std::to_string(n);
      if (!firstLabels.count(fresh) && !secondLabels.count(fresh)) break;
    }
    firstLabels.insert(fresh);
    rename.emplace(label, fresh);
  }
  auto relabel = [&](const Term& t) {
    if (!t.isBlank()) return t;
    auto it = rename.find(t.value());
    return it == rename.end() ? t : Term::blank(it->second);
  };
  for (const auto& t : second) {
    out.insert(Triple{relabel(t.subject), relabel(t.predicate), relabel(t.object)});
  }
  return out;
}

std::optional<Triple> instantiate(const Triple& triple, const Binding& binding) {
  auto sub = [&](const Term& t) -> std::optional<Term> {
    if (!t.isVariable()) return t;
    auto it = binding.find(t.value());
    if (it == binding.end()) return std::nullopt;
    return it->second;
  };
  auto s = sub(triple.subject);
  auto p = sub(triple.predicate);
  auto o = sub(triple.object);
  if (!s || !p || !o) return std::nullopt;
  if (s->isLiteral() || p->isLiteral()) return std::nullopt;
  return Triple{*s, *p, *o};
}

Graph applyUpdate(const Graph& state, const Pattern& del, const Pattern& ins, const Pattern& where) {
  for (const auto& t : del) {
    if (t.subject.isBlank() || t.predicate.isBlank() || t.object.isBlank()) {
      throw UpdateError("blank nodes are not allowed in a DELETE template: " + t.subject.toString() +
                        " " + t.predicate.toString() + " " + t.object.toString());
    }
  }
  std::vector<Binding> solutions = match(where, state);

  std::set<std::string> usedLabels = state.blankLabels();
  std::size_t freshCounter = 0;
  auto freshLabel = [&](const std::string& base) {
    std::string label;
    do {
      label = base + "_u" + std::to_string(freshCounter++);
    } while (usedLabels.count(label));
    usedLabels.insert(label);
    return label;
  };

  std::set<Triple> removals;
  std::set<Triple> additions;
  for (const auto& solution : solutions) {
    for (const auto& t : del) {
      if (auto inst = instantiate(t, solution)) removals.insert(*inst);
    }
    std::map<std::string, Term> freshBlanks;
    auto freshen = [&](const Term& t) {
      if (!t.isBlank()) return t;
      auto it = freshBlanks.find(t.value());
      if (it == freshBlanks.end()) it = freshBlanks.emplace(t.value(), Term::blank(freshLabel(t.value()))).first;
      return it->second;
    };
    for (const auto& t : ins) {
      Triple fresh{freshen(t.subject), freshen(t.predicate), freshen(t.object)};
      if (auto inst = instantiate(fresh, solution)) additions.insert(*inst);
    }
  }

  Graph out;
  out.name = state.name;
  for (const auto& t : state) {
    if (!removals.count(t)) out.insert(t);
  }
  for (const auto& t : additions) out.insert(t);
  return out;
}

Pattern toPattern(const Graph& graph) { return Pattern(graph.begin(), graph.end()); }

}  // namespace aat::rdf
