#include "aat/td.h"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "aat/semdoc.h"

namespace aat::td {

using nlohmann::json;

nlohmann::json DataValue::toJson() const {
  return std::visit(
      [](const auto& v) -> json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, double>) {
          if (std::trunc(v) == v && std::fabs(v) < 9e15) return json(static_cast<std::int64_t>(v));
          return json(v);
        } else if constexpr (std::is_same_v<T, List>) {
          json arr = json::array();
          for (const auto& e : v) arr.push_back(e.toJson());
          return arr;
        } else if constexpr (std::is_same_v<T, Map>) {
          json obj = json::object();
          for (const auto& [k, e] : v) obj[k] = e.toJson();
          return obj;
        } else {
          return json(v);
        }
      },
      value_);
}

DataValue DataValue::fromJson(const json& j) {
  switch (j.type()) {
    case json::value_t::boolean: return DataValue(j.get<bool>());
    case json::value_t::number_integer:
    case json::value_t::number_unsigned:
    case json::value_t::number_float: return DataValue(j.get<double>());
    case json::value_t::string: return DataValue(j.get<std::string>());
    case json::value_t::array: {
      List list;
      for (const auto& e : j) list.push_back(fromJson(e));
      return DataValue(std::move(list));
    }
    case json::value_t::object: {
      Map map;
      for (const auto& [k, e] : j.items()) map.emplace(k, fromJson(e));
      return DataValue(std::move(map));
    }
    default: throw TdError("value has no data representation: " + j.dump());
  }
}

DataValue DataValue::parse(std::string_view jsonText) {
  json j = json::parse(jsonText, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) throw TdError("malformed JSON value: " + std::string(jsonText));
  return fromJson(j);
}

std::string_view toString(SchemaType type) {
  switch (type) {
    case SchemaType::Boolean: return "boolean";
    case SchemaType::Number: return "number";
    case SchemaType::String: return "string";
    case SchemaType::Object: return "object";
    case SchemaType::Array: return "array";
  }
  return "?";
}

std::string_view toString(InteractionKind kind) {
  switch (kind) {
    case InteractionKind::Property: return "Property";
    case InteractionKind::Action: return "Action";
    case InteractionKind::Event: return "Event";
  }
  return "?";
}

bool conformsTo(const DataValue& value, const DataSchema& schema) {
  switch (schema.type) {
    case SchemaType::Boolean: return value.isBool();
    case SchemaType::Number: return value.isNumber();
    case SchemaType::String: return value.isText();
    case SchemaType::Array:
      if (!value.isList()) return false;
      if (schema.items.empty()) return true;
      return std::all_of(value.asList().begin(), value.asList().end(),
                         [&](const DataValue& e) { return conformsTo(e, schema.items.front()); });
    case SchemaType::Object: {
      if (!value.isMap()) return false;
      if (!schema.fields) return true;
      for (const auto& [key, fieldSchema] : *schema.fields) {
        auto it = value.asMap().find(key);
        if (it != value.asMap().end() && !conformsTo(it->second, fieldSchema)) return false;
      }
      return true;
    }
  }
  return false;
}

DataValue defaultValue(const DataSchema& schema) {
  switch (schema.type) {
    case SchemaType::Boolean: return DataValue(true);
    case SchemaType::Number: return DataValue(0.0);
    case SchemaType::String: return DataValue(std::string());
    case SchemaType::Array: return DataValue(DataValue::List{});
    case SchemaType::Object: {
      DataValue::Map m;
      if (schema.fields) {
        for (const auto& [k, s] : *schema.fields) m.emplace(k, defaultValue(s));
      }
      return DataValue(std::move(m));
    }
  }
  return DataValue(true);
}

const Interaction* ThingDescription::find(std::string_view interactionName) const {
  for (const auto& i : interactions) {
    if (i.name == interactionName) return &i;
  }
  return nullptr;
}

std::vector<const Interaction*> ThingDescription::ofKind(InteractionKind kind) const {
  std::vector<const Interaction*> out;
  for (const auto& i : interactions) {
    if (i.kind == kind) out.push_back(&i);
  }
  return out;
}

std::string ThingDescription::scheme() const {
  auto colon = baseIri.find(':');
  if (colon == std::string::npos || colon == 0) return "";
  std::string s = baseIri.substr(0, colon);
  if (!std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isalnum(c) || c == '+' || c == '-' || c == '.'; })) {
    return "";
  }
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::string effectiveTarget(const std::string& baseIri, const std::string& href) {
  if (href.find("://") != std::string::npos) return href;
  if (href.empty()) return baseIri;
  bool baseSlash = !baseIri.empty() && baseIri.back() == '/';
  bool hrefSlash = href.front() == '/';
  if (baseSlash && hrefSlash) return baseIri + href.substr(1);
  if (!baseSlash && !hrefSlash) return baseIri + "/" + href;
  return baseIri + href;
}

namespace {

const std::string kTdNs(semdoc::ns::kTd);

class TdReader {
 public:
  explicit TdReader(const json& doc) : doc_(doc), prefixes_(semdoc::PrefixTable::wellKnown()) {}

  ThingDescription read() {
    if (!doc_.is_object()) throw TdError("TD document must be a JSON object");
    readContext();

    ThingDescription td;
    for (const auto& [key, value] : doc_.items()) {
      if (key == "@context") continue;
      if (key == "@type") {
        for (const auto& t : typeList(value, "@type")) td.types.insert(expand(t));
      } else if (key == "td:name") {
        td.name = text(value, "td:name");
      } else if (key == "td:base" || key == "interaction") {
        // read below, after the mandatory-member checks
      } else {
        warnings_.push_back("unknown member '" + key + "' ignored");
      }
    }
    if (td.name.empty()) throw TdError("missing td:name");
    if (!doc_.contains("td:base")) throw TdError("missing td:base");
    td.baseIri = text(doc_.at("td:base"), "td:base");

    if (!doc_.contains("interaction") || !doc_.at("interaction").is_array() || doc_.at("interaction").empty()) {
      throw TdError("no interactions");
    }
    std::size_t index = 0;
    for (const auto& item : doc_.at("interaction")) {
      td.interactions.push_back(interaction(item, "interaction[" + std::to_string(index++) + "]"));
    }
    td.warnings = std::move(warnings_);
    return td;
  }

 private:
  void readContext() {
    if (!doc_.contains("@context")) return;
    const json& ctx = doc_.at("@context");
    auto absorb = [&](const json& entry) {
      if (!entry.is_object()) return;
      for (const auto& [k, v] : entry.items()) {
        if (v.is_string()) prefixes_.add(k, v.get<std::string>());
      }
    };
    if (ctx.is_array()) {
      for (const auto& e : ctx) absorb(e);
    } else {
      absorb(ctx);
    }
  }

  std::string expand(const std::string& compact) const {
    auto colon = compact.find(':');
    if (colon == std::string::npos || compact.find("://") != std::string::npos) return compact;
    auto label = compact.substr(0, colon);
    if (!prefixes_.has(label)) return compact;
    return prefixes_.expand(compact);
  }

  static std::string text(const json& v, const std::string& path) {
    if (!v.is_string()) throw TdError(path + " must be a string");
    return v.get<std::string>();
  }

  static std::vector<std::string> typeList(const json& v, const std::string& path) {
    std::vector<std::string> out;
    if (v.is_string()) {
      out.push_back(v.get<std::string>());
    } else if (v.is_array()) {
      for (const auto& e : v) out.push_back(text(e, path));
    } else {
      throw TdError(path + " must be a string or an array of strings");
    }
    return out;
  }

  DataSchema schema(const json& v, const std::string& path) {
    if (!v.is_object()) throw TdError(path + " must be an object");
    DataSchema s;
    if (!v.contains("type")) throw TdError(path + " has no type");
    std::string type = text(v.at("type"), path + ".type");
    if (type == "boolean") {
      s.type = SchemaType::Boolean;
    } else if (type == "number" || type == "integer") {
      s.type = SchemaType::Number;
    } else if (type == "string") {
      s.type = SchemaType::String;
    } else if (type == "object") {
      s.type = SchemaType::Object;
      s.fields.emplace();
    } else if (type == "array") {
      s.type = SchemaType::Array;
    } else {
      throw TdError(path + ": unknown schema type '" + type + "'");
    }
    for (const auto& [key, value] : v.items()) {
      if (key == "type") continue;
      if (key == "@type") {
        for (const auto& t : typeList(value, path + ".@type")) s.semanticTypes.insert(expand(t));
      } else if (key == "properties" && s.type == SchemaType::Object && value.is_object()) {
        for (const auto& [field, fs] : value.items()) s.fields->emplace(field, schema(fs, path + "." + field));
      } else if (key == "items" && s.type == SchemaType::Array) {
        s.items.push_back(schema(value, path + ".items"));
      } else {
        warnings_.push_back(path + ": unknown member '" + key + "' ignored");
      }
    }
    return s;
  }

  Form form(const json& v, const std::string& path) {
    if (!v.is_object()) throw TdError(path + " must be an object");
    Form f;
    for (const auto& [key, value] : v.items()) {
      if (key == "href") {
        f.href = text(value, path + ".href");
      } else if (key == "rel") {
        for (const auto& r : typeList(value, path + ".rel")) f.rel.push_back(r);
      } else if (key == "mediaType") {
        f.mediaType = text(value, path + ".mediaType");
      } else {
        warnings_.push_back(path + ": unknown member '" + key + "' ignored");
      }
    }
    if (f.href.empty()) throw TdError(path + " has no href");
    return f;
  }

  Interaction interaction(const json& v, const std::string& path) {
    if (!v.is_object()) throw TdError(path + " must be an object");
    Interaction i;
    if (!v.contains("td:name")) throw TdError(path + " has no td:name");
    i.name = text(v.at("td:name"), path + ".td:name");

    int kinds = 0;
    if (v.contains("@type")) {
      for (const auto& t : typeList(v.at("@type"), path + ".@type")) {
        std::string iri = expand(t);
        if (iri == kTdNs + "Property") {
          i.kind = InteractionKind::Property;
          ++kinds;
        } else if (iri == kTdNs + "Action") {
          i.kind = InteractionKind::Action;
          ++kinds;
        } else if (iri == kTdNs + "Event") {
          i.kind = InteractionKind::Event;
          ++kinds;
        } else {
          i.semanticTypes.insert(iri);
        }
      }
    }
    if (kinds != 1) throw TdError(path + " ('" + i.name + "'): unknown interaction kind");

    std::optional<DataSchema> legacy;
    for (const auto& [key, value] : v.items()) {
      if (key == "td:name" || key == "@type") continue;
      if (key == "td:schema") {
        legacy = schema(value, path + ".td:schema");
      } else if (key == "inputSchema") {
        i.inputSchema = schema(value, path + ".inputSchema");
      } else if (key == "outputSchema") {
        i.outputSchema = schema(value, path + ".outputSchema");
      } else if (key == "writable" || key == "td:writable") {
        if (!value.is_boolean()) throw TdError(path + "." + key + " must be boolean");
        i.writable = value.get<bool>();
      } else if (key == "observable" || key == "td:observable") {
        if (!value.is_boolean()) throw TdError(path + "." + key + " must be boolean");
        i.observable = value.get<bool>();
      } else if (key == "td:form") {
        if (!value.is_array()) throw TdError(path + ".td:form must be an array");
        std::size_t n = 0;
        for (const auto& f : value) i.forms.push_back(form(f, path + ".td:form[" + std::to_string(n++) + "]"));
      } else {
        warnings_.push_back(path + ": unknown member '" + key + "' ignored");
      }
    }
    // td:schema describes the action input or the property/event value.
    if (legacy) {
      if (i.kind == InteractionKind::Action) {
        if (!i.inputSchema) i.inputSchema = legacy;
      } else if (!i.outputSchema) {
        i.outputSchema = legacy;
      }
    }
    if (i.forms.empty()) throw TdError(path + " ('" + i.name + "') has no form");
    return i;
  }

  const json& doc_;
  semdoc::PrefixTable prefixes_;
  std::vector<std::string> warnings_;
};

}  // namespace

ThingDescription parseTd(std::string_view text) {
  json doc = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded()) throw TdError("TD is not valid JSON");
  return TdReader(doc).read();
}

std::vector<Diagnostic> validate(const ThingDescription& td) {
  std::vector<Diagnostic> out;
  auto error = [&](std::string path, std::string message) {
    out.push_back({Diagnostic::Severity::Error, std::move(path), std::move(message)});
  };
  auto warning = [&](std::string path, std::string message) {
    out.push_back({Diagnostic::Severity::Warning, std::move(path), std::move(message)});
  };

  if (td.name.empty()) error("td:name", "name must not be empty");
  if (td.scheme().empty()) error("td:base", "base IRI '" + td.baseIri + "' has no scheme");
  if (td.interactions.empty()) error("interaction", "no interactions");

  std::set<std::string> seen;
  for (std::size_t n = 0; n < td.interactions.size(); ++n) {
    const auto& i = td.interactions[n];
    std::string path = "interaction[" + std::to_string(n) + "]";
    if (i.name.empty()) error(path, "interaction name must not be empty");
    if (!seen.insert(i.name).second) error(path, "duplicate interaction name '" + i.name + "'");
    if (i.forms.empty()) error(path, "interaction '" + i.name + "' has no form");
    for (std::size_t f = 0; f < i.forms.size(); ++f) {
      if (i.forms[f].href.empty()) error(path + ".td:form[" + std::to_string(f) + "]", "empty href");
    }
    if (i.kind == InteractionKind::Property && !i.writable && !i.observable) {
      warning(path, "property neither readable-observed nor writable is unusable");
    }
    auto checkSchema = [&](const std::optional<DataSchema>& s, const std::string& where) {
      if (!s) return;
      bool isObject = s->type == SchemaType::Object;
      if (isObject != s->fields.has_value()) error(path + "." + where, "fields must be present exactly for object schemas");
    };
    checkSchema(i.inputSchema, "inputSchema");
    checkSchema(i.outputSchema, "outputSchema");
  }
  return out;
}

bool hasErrors(const std::vector<Diagnostic>& diagnostics) {
  return std::any_of(diagnostics.begin(), diagnostics.end(),
                     [](const Diagnostic& d) { return d.severity == Diagnostic::Severity::Error; });
}

}  // namespace aat::td
