#include <algorithm>
#include <cctype>
#include <vector>

#include "aat/semdoc.h"

namespace aat::semdoc {

using rdf::LiteralHint;
using rdf::Term;
using rdf::Triple;

PrefixTable::PrefixTable() { map_["rdf"] = std::string(ns::kRdf); }

std::string PrefixTable::expand(std::string_view prefixed) const {
  auto colon = prefixed.find(':');
  if (colon == std::string_view::npos) throw Error("not a prefixed name: " + std::string(prefixed));
  std::string label(prefixed.substr(0, colon));
  auto it = map_.find(label);
  if (it == map_.end()) throw Error("undeclared prefix '" + label + ":'");
  return it->second + std::string(prefixed.substr(colon + 1));
}

std::string PrefixTable::compact(const std::string& iri) const {
  std::string best;
  for (const auto& [label, ns] : map_) {
    if (iri.size() <= ns.size() || iri.compare(0, ns.size(), ns) != 0) continue;
    std::string local = iri.substr(ns.size());
    bool simple = std::all_of(local.begin(), local.end(), [](unsigned char c) {
      return std::isalnum(c) || c == '_' || c == '-';
    });
    if (!simple) continue;
    std::string candidate = label + ":" + local;
    if (best.empty() || candidate.size() < best.size()) best = candidate;
  }
  return best.empty() ? "<" + iri + ">" : best;
}

PrefixTable PrefixTable::wellKnown() {
  PrefixTable t;
  t.add("xsd", std::string(ns::kXsd));
  t.add("iot", std::string(ns::kIot));
  t.add("td", std::string(ns::kTd));
  t.add("usg", std::string(ns::kUsg));
  t.add("tools", std::string(ns::kTools));
  t.add("bot", std::string(ns::kBot));
  t.add("sh", std::string(ns::kSh));
  return t;
}

namespace {

class TurtleParser {
 public:
  TurtleParser(std::string_view text, const PrefixTable& initial) : text_(text) { doc_.prefixes = initial; }

  TurtleDocument run() {
    skipSpace();
    while (!atEnd()) {
      if (peek() == '@') {
        directive();
      } else {
        statement();
      }
      skipSpace();
    }
    return std::move(doc_);
  }

 private:
  bool atEnd() const { return pos_ >= text_.size(); }
  char peek(std::size_t ahead = 0) const { return pos_ + ahead < text_.size() ? text_[pos_ + ahead] : '\0'; }

  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  [[noreturn]] void fail(const std::string& message) const { throw ParseError(message, line_, col_); }

  void skipSpace() {
    while (!atEnd()) {
      char c = peek();
      if (c == '#') {
        while (!atEnd() && peek() != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  void expect(char c, const char* what) {
    skipSpace();
    if (peek() != c) fail(std::string("expected ") + what);
    advance();
  }

  static bool isNameChar(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.' || c == ':' ||
           c == '%' || (static_cast<unsigned char>(c) >= 0x80);
  }

  // Reads a run of name characters; a trailing '.' is left for the statement
  // terminator.
  std::string word() {
    std::size_t end = pos_;
    while (end < text_.size() && isNameChar(text_[end])) ++end;
    while (end > pos_ && text_[end - 1] == '.') --end;
    std::string w(text_.substr(pos_, end - pos_));
    while (pos_ < end) advance();
    return w;
  }

  void directive() {
    advance();  // '@'
    std::string keyword = word();
    if (keyword != "prefix") fail("unsupported directive '@" + keyword + "'");
    skipSpace();
    std::string label = word();
    if (label.empty() || label.back() != ':') fail("expected prefix label ending in ':'");
    label.pop_back();
    skipSpace();
    if (peek() != '<') fail("expected namespace IRI");
    doc_.prefixes.add(label, iriRef());
    expect('.', "'.' after @prefix");
  }

  std::string iriRef() {
    advance();  // '<'
    std::string iri;
    while (!atEnd() && peek() != '>') {
      char c = peek();
      if (std::isspace(static_cast<unsigned char>(c))) fail("whitespace inside IRI");
      iri += c;
      advance();
    }
    if (atEnd()) fail("unterminated IRI");
    advance();  // '>'
    if (iri.empty()) fail("empty IRI");
    return iri;
  }

  Term unsupportedOrName(bool allowKeywords) {
    char c = peek();
    if (c == '(') fail("collections are not supported");
    if (c == '[') fail("anonymous blank nodes are not supported");
    if (c == '\'') fail("single-quoted literals are not supported");
    std::size_t line = line_, col = col_;
    std::string w = word();
    if (w.empty()) fail(std::string("unexpected character '") + c + "'");
    if (allowKeywords && (w == "true" || w == "false")) return Term::literal(w, LiteralHint::Boolean);
    if (w.find(':') == std::string::npos) {
      throw ParseError("unexpected token '" + w + "'", line, col);
    }
    try {
      return Term::iri(doc_.prefixes.expand(w));
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      throw ParseError(e.what(), line, col);
    }
  }

  Term blankNode() {
    advance();  // '_'
    if (peek() != ':') fail("expected ':' after '_'");
    advance();
    std::string label = word();
    if (label.empty()) fail("empty blank node label");
    return Term::blank(label);
  }

  Term subjectTerm() {
    skipSpace();
    char c = peek();
    if (c == '<') return Term::iri(iriRef());
    if (c == '_' && peek(1) == ':') return blankNode();
    if (c == '"') fail("literal in subject position");
    return unsupportedOrName(false);
  }

  Term verbTerm() {
    skipSpace();
    char c = peek();
    if (c == 'a' && !isNameChar(peek(1))) {
      advance();
      return Term::iri(std::string(ns::kRdfType));
    }
    if (c == '<') return Term::iri(iriRef());
    if (c == '_' && peek(1) == ':') return blankNode();
    if (c == '"') fail("literal in predicate position");
    return unsupportedOrName(false);
  }

  Term stringLiteral() {
    if (peek(1) == '"' && peek(2) == '"') fail("multiline literals are not supported");
    advance();  // opening quote
    std::string value;
    while (true) {
      if (atEnd()) fail("unterminated string literal");
      char c = peek();
      if (c == '\n') fail("newline inside string literal");
      if (c == '"') break;
      if (c == '\\') {
        advance();
        char e = peek();
        switch (e) {
          case '"': value += '"'; break;
          case '\\': value += '\\'; break;
          case 'n': value += '\n'; break;
          case 'r': value += '\r'; break;
          case 't': value += '\t'; break;
          default: fail(std::string("unsupported escape '\\") + e + "'");
        }
        advance();
        continue;
      }
      value += c;
      advance();
    }
    advance();  // closing quote
    if (peek() == '@') fail("language tags are not supported");
    if (peek() == '^' && peek(1) == '^') {
      advance();
      advance();
      std::string datatype;
      if (peek() == '<') {
        datatype = iriRef();
      } else {
        datatype = unsupportedOrName(false).value();
      }
      return typedLiteral(value, datatype);
    }
    return Term::literal(value, LiteralHint::String);
  }

  Term typedLiteral(const std::string& lexical, const std::string& datatype) {
    const std::string xsd(ns::kXsd);
    if (datatype == xsd + "string") return Term::literal(lexical, LiteralHint::String);
    if (datatype == xsd + "boolean") {
      if (lexical != "true" && lexical != "false") fail("invalid boolean literal '" + lexical + "'");
      return Term::literal(lexical, LiteralHint::Boolean);
    }
    if (datatype == xsd + "integer" || datatype == xsd + "decimal" || datatype == xsd + "double") {
      return Term::literal(lexical, LiteralHint::Number);
    }
    fail("unsupported datatype <" + datatype + ">");
  }

  Term numberLiteral() {
    std::string lexical;
    if (peek() == '+' || peek() == '-') {
      lexical += peek();
      advance();
    }
    auto digits = [&] {
      std::size_t n = 0;
      while (std::isdigit(static_cast<unsigned char>(peek()))) {
        lexical += peek();
        advance();
        ++n;
      }
      return n;
    };
    std::size_t intDigits = digits();
    if (peek() == '.' && std::isdigit(static_cast<unsigned char>(peek(1)))) {
      lexical += '.';
      advance();
      digits();
    } else if (intDigits == 0) {
      fail("malformed number");
    }
    if (peek() == 'e' || peek() == 'E') {
      lexical += peek();
      advance();
      if (peek() == '+' || peek() == '-') {
        lexical += peek();
        advance();
      }
      if (digits() == 0) fail("malformed exponent");
    }
    return Term::literal(lexical, LiteralHint::Number);
  }

  Term objectTerm() {
    skipSpace();
    char c = peek();
    if (c == '<') return Term::iri(iriRef());
    if (c == '_' && peek(1) == ':') return blankNode();
    if (c == '"') return stringLiteral();
    if (std::isdigit(static_cast<unsigned char>(c)) || ((c == '+' || c == '-' || c == '.') &&
                                                        std::isdigit(static_cast<unsigned char>(peek(1))))) {
      return numberLiteral();
    }
    return unsupportedOrName(true);
  }

  void statement() {
    Term subject = subjectTerm();
    while (true) {
      Term verb = verbTerm();
      while (true) {
        Term object = objectTerm();
        doc_.graph.insert(Triple{subject, verb, object});
        skipSpace();
        if (peek() != ',') break;
        advance();
      }
      skipSpace();
      if (peek() == ';') {
        while (peek() == ';') {
          advance();
          skipSpace();
        }
        if (peek() == '.') break;
        continue;
      }
      break;
    }
    expect('.', "'.' at end of statement");
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t col_ = 1;
  TurtleDocument doc_;
};

}  // namespace

TurtleDocument parseTurtle(std::string_view text, const PrefixTable& initial) {
  return TurtleParser(text, initial).run();
}

std::string serializeNTriples(const rdf::Graph& graph) {
  auto shape = [](const Term& t) { return t.isBlank() ? std::string("_:") : t.toString(); };
  std::vector<const Triple*> ordered;
  for (const auto& t : graph) ordered.push_back(&t);
  std::stable_sort(ordered.begin(), ordered.end(), [&](const Triple* a, const Triple* b) {
    auto ka = shape(a->subject) + " " + shape(a->predicate) + " " + shape(a->object);
    auto kb = shape(b->subject) + " " + shape(b->predicate) + " " + shape(b->object);
    return ka < kb;
  });

  std::map<std::string, std::string> labels;
  auto render = [&](const Term& t) {
    if (!t.isBlank()) return t.toString();
    auto it = labels.find(t.value());
    if (it == labels.end()) it = labels.emplace(t.value(), "_:b" + std::to_string(labels.size())).first;
    return it->second;
  };
  std::vector<std::string> lines;
  for (const Triple* t : ordered) {
    std::string s = render(t->subject);
    std::string p = render(t->predicate);
    std::string o = render(t->object);
    lines.push_back(s + " " + p + " " + o + " .");
  }
  std::sort(lines.begin(), lines.end());
  std::string out;
  for (const auto& l : lines) out += l + "\n";
  return out;
}

}  // namespace aat::semdoc
