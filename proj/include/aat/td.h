#pragma once

// Typed Thing Description model, its structural validation, and the data
// values exchanged with Things.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "aat/error.h"
#include "json.hpp"

namespace aat::td {

class TdError : public Error {
 public:
  using Error::Error;
};

// A value exchanged with a Thing: boolean, number, text, object or array.
class DataValue {
 public:
  using List = std::vector<DataValue>;
  using Map = std::map<std::string, DataValue>;

  DataValue() : value_(false) {}
  DataValue(bool b) : value_(b) {}
  DataValue(double d) : value_(d) {}
  DataValue(int i) : value_(static_cast<double>(i)) {}
  DataValue(std::string s) : value_(std::move(s)) {}
  DataValue(const char* s) : value_(std::string(s)) {}
  DataValue(List l) : value_(std::move(l)) {}
  DataValue(Map m) : value_(std::move(m)) {}

  bool isBool() const { return std::holds_alternative<bool>(value_); }
  bool isNumber() const { return std::holds_alternative<double>(value_); }
  bool isText() const { return std::holds_alternative<std::string>(value_); }
  bool isList() const { return std::holds_alternative<List>(value_); }
  bool isMap() const { return std::holds_alternative<Map>(value_); }

  bool asBool() const { return std::get<bool>(value_); }
  double asNumber() const { return std::get<double>(value_); }
  const std::string& asText() const { return std::get<std::string>(value_); }
  const List& asList() const { return std::get<List>(value_); }
  const Map& asMap() const { return std::get<Map>(value_); }

  // Canonical JSON: integral numbers without a fraction, keys sorted.
  nlohmann::json toJson() const;
  std::string toJsonText() const { return toJson().dump(); }
  // Throws TdError for null or otherwise unrepresentable JSON.
  static DataValue fromJson(const nlohmann::json& json);
  static DataValue parse(std::string_view jsonText);

  bool operator==(const DataValue& other) const { return value_ == other.value_; }

 private:
  std::variant<bool, double, std::string, List, Map> value_;
};

enum class SchemaType { Boolean, Number, String, Object, Array };

std::string_view toString(SchemaType type);

struct DataSchema {
  SchemaType type = SchemaType::Boolean;
  std::set<std::string> semanticTypes;
  // Present iff type == Object.
  std::optional<std::map<std::string, DataSchema>> fields;
  // Element schema for arrays; absent means any element.
  std::vector<DataSchema> items;  // zero or one entry

  static DataSchema of(SchemaType type) {
    DataSchema s;
    s.type = type;
    if (type == SchemaType::Object) s.fields.emplace();
    return s;
  }
};

bool conformsTo(const DataValue& value, const DataSchema& schema);

// Zero-ish value of a schema: false, 0, "", {fields...}, [].
DataValue defaultValue(const DataSchema& schema);

enum class InteractionKind { Property, Action, Event };

std::string_view toString(InteractionKind kind);

struct Form {
  std::string href;
  std::vector<std::string> rel;
  std::string mediaType = "application/json";
};

struct Interaction {
  std::string name;
  InteractionKind kind = InteractionKind::Property;
  // Expanded IRIs from @type, without the td: kind marker.
  std::set<std::string> semanticTypes;
  bool writable = false;
  bool observable = true;
  std::optional<DataSchema> inputSchema;
  std::optional<DataSchema> outputSchema;
  std::vector<Form> forms;

  // The schema of a property's value, whichever spelling carried it.
  const std::optional<DataSchema>& valueSchema() const { return outputSchema ? outputSchema : inputSchema; }
};

struct ThingDescription {
  std::string name;
  std::string baseIri;
  std::set<std::string> types;
  std::vector<Interaction> interactions;
  // Members that were present but not understood.
  std::vector<std::string> warnings;

  const Interaction* find(std::string_view interactionName) const;
  std::vector<const Interaction*> ofKind(InteractionKind kind) const;
  // Lowercased scheme of baseIri, or "" when it has none.
  std::string scheme() const;
};

// Parses the JSON document shape of the listings ("td:name", "td:base",
// "interaction", "td:form", ...). Compact @type values are expanded with the
// prefixes declared inline in @context plus the well-known ones.
ThingDescription parseTd(std::string_view text);

struct Diagnostic {
  enum class Severity { Warning, Error };
  Severity severity = Severity::Error;
  std::string path;
  std::string message;
};

std::vector<Diagnostic> validate(const ThingDescription& td);
bool hasErrors(const std::vector<Diagnostic>& diagnostics);

// baseIri + href for relative hrefs, href itself when absolute.
std::string effectiveTarget(const std::string& baseIri, const std::string& href);

}  // namespace aat::td
