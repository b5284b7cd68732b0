#include <gtest/gtest.h>

#include "aat/td.h"
#include "oracles.h"

using namespace aat::td;

namespace {

ThingDescription load(const std::string& relative) { return parseTd(oracle::slurp(oracle::fixture(relative))); }

const std::string kIot = "http://iotschema.org/";
const std::string kTdNs = "http://www.w3.org/ns/td#";

std::string minimalTd(const std::string& interactions, const std::string& name = "thing") {
  return R"({"@context": [{"iot": "http://iotschema.org/"}], "@type": ["td:Thing"], "td:base": "http://h/x", "td:name": ")" +
         name + R"(", "interaction": [)" + interactions + "]}";
}

// Reference for conformsTo: JSON-typed values against schema trees, absent
// object fields allowed.
bool conforms(const DataValue& v, const DataSchema& s) {
  if (s.type == SchemaType::Boolean) return v.isBool();
  if (s.type == SchemaType::Number) return v.isNumber();
  if (s.type == SchemaType::String) return v.isText();
  if (s.type == SchemaType::Array) {
    if (!v.isList()) return false;
    for (const auto& e : v.asList()) {
      if (!s.items.empty() && !conforms(e, s.items[0])) return false;
    }
    return true;
  }
  if (!v.isMap()) return false;
  for (const auto& [k, e] : v.asMap()) {
    if (s.fields && s.fields->count(k) && !conforms(e, s.fields->at(k))) return false;
  }
  return true;
}

DataSchema randomSchema(oracle::Gen& gen, int depth) {
  auto type = static_cast<SchemaType>(gen.pick(0, depth > 0 ? 4 : 2));
  auto s = DataSchema::of(type);
  if (type == SchemaType::Array && gen.chance(0.7)) s.items.push_back(randomSchema(gen, depth - 1));
  if (type == SchemaType::Object) {
    for (int k = gen.pick(0, 2); k > 0; --k) s.fields->emplace("f" + std::to_string(gen.pick(0, 2)), randomSchema(gen, depth - 1));
  }
  return s;
}

DataValue randomValue(oracle::Gen& gen, int depth) {
  switch (gen.pick(0, depth > 0 ? 4 : 2)) {
    case 0: return DataValue(gen.chance(0.5));
    case 1: return DataValue(gen.pick(-3, 3));
    case 2: return DataValue(gen.chance(0.5) ? "on" : "");
    case 3: {
      DataValue::List l;
      for (int k = gen.pick(0, 2); k > 0; --k) l.push_back(randomValue(gen, depth - 1));
      return DataValue(l);
    }
    default: {
      DataValue::Map m;
      for (int k = gen.pick(0, 2); k > 0; --k) m["f" + std::to_string(gen.pick(0, 2))] = randomValue(gen, depth - 1);
      return DataValue(m);
    }
  }
}

}  // namespace

TEST(ParseTd, OldLampListing) {
  auto td = load("home/sos/lamp_old.json");
  EXPECT_EQ(td.name, "emergency_light");
  EXPECT_EQ(td.baseIri, "http://localhost/TD");
  EXPECT_EQ(td.scheme(), "http");
  EXPECT_EQ(td.types, (std::set<std::string>{kTdNs + "Thing", kIot + "Light"}));
  ASSERT_EQ(td.interactions.size(), 3u);

  const auto* state = td.find("Switch State");
  ASSERT_NE(state, nullptr);
  EXPECT_EQ(state->kind, InteractionKind::Property);
  EXPECT_TRUE(state->semanticTypes.count(kIot + "SwitchStatus"));
  ASSERT_TRUE(state->valueSchema());
  EXPECT_EQ(state->valueSchema()->type, SchemaType::Boolean);
  EXPECT_TRUE(state->valueSchema()->semanticTypes.count(kIot + "SwitchData"));
  ASSERT_EQ(state->forms.size(), 1u);
  EXPECT_EQ(state->forms[0].href, "/currentswitch");
  EXPECT_EQ(state->forms[0].rel, std::vector<std::string>{"readtd:Property"});

  const auto* on = td.find("Switch On");
  ASSERT_NE(on, nullptr);
  EXPECT_EQ(on->kind, InteractionKind::Action);
  ASSERT_TRUE(on->inputSchema);
  EXPECT_EQ(on->inputSchema->type, SchemaType::Boolean);
  EXPECT_EQ(td.ofKind(InteractionKind::Action).size(), 2u);
  EXPECT_FALSE(hasErrors(validate(td)));
}

TEST(ParseTd, NewLampDiffersOnlyInBinding) {
  auto oldTd = load("home/sos/lamp_old.json");
  auto newTd = load("home/sos/lamp_new.json");
  EXPECT_EQ(newTd.scheme(), "coap");
  EXPECT_EQ(newTd.name, oldTd.name);
  EXPECT_EQ(newTd.types, oldTd.types);
  ASSERT_EQ(newTd.interactions.size(), oldTd.interactions.size());
  for (std::size_t k = 0; k < newTd.interactions.size(); ++k) {
    EXPECT_EQ(newTd.interactions[k].name, oldTd.interactions[k].name);
    EXPECT_EQ(newTd.interactions[k].semanticTypes, oldTd.interactions[k].semanticTypes);
  }
  EXPECT_FALSE(hasErrors(validate(newTd)));
}

TEST(ParseTd, EveryFixtureTdIsValid) {
  for (const auto& entry : std::filesystem::recursive_directory_iterator(oracle::fixture("home"))) {
    if (entry.path().extension() != ".json" || entry.path().filename().string().find("script") != std::string::npos ||
        entry.path().filename() == "welcome_home.json") {
      continue;
    }
    auto td = parseTd(oracle::slurp(entry.path()));
    EXPECT_FALSE(hasErrors(validate(td))) << entry.path();
  }
}

TEST(ParseTd, StructuralErrors) {
  EXPECT_THROW(parseTd("not json"), TdError);
  EXPECT_THROW(parseTd("[]"), TdError);
  EXPECT_THROW(parseTd(R"({"td:name": "x", "interaction": []})"), TdError);
  EXPECT_THROW(parseTd(minimalTd(R"({"@type": ["td:Property"], "td:schema": {"type": "boolean"},
                                    "td:form": [{"href": "/s"}]})")),
               TdError);
  EXPECT_THROW(parseTd(minimalTd(R"({"td:name": "p", "@type": ["td:Property"], "td:schema": {"type": "bogus"},
                                    "td:form": [{"href": "/s"}]})")),
               TdError);
}

TEST(Validate, ReportsDuplicatesAndMissingForms) {
  auto td = parseTd(minimalTd(R"(
    {"td:name": "p", "@type": ["td:Property"], "td:schema": {"type": "boolean"}, "td:form": [{"href": "/a"}]},
    {"td:name": "p", "@type": ["td:Action"], "td:form": [{"href": "/b"}]})"));
  Interaction formless;
  formless.name = "q";
  formless.kind = InteractionKind::Action;
  td.interactions.push_back(formless);
  auto diagnostics = validate(td);
  EXPECT_TRUE(hasErrors(diagnostics));
  int duplicate = 0, missing = 0;
  for (const auto& d : diagnostics) {
    duplicate += d.message.find("duplicate") != std::string::npos;
    missing += d.message.find("no form") != std::string::npos;
  }
  EXPECT_EQ(duplicate, 1);
  EXPECT_EQ(missing, 1);
  // The parser refuses the same shape outright.
  EXPECT_THROW(parseTd(minimalTd(R"({"td:name": "q", "@type": ["td:Action"], "td:form": []})")), TdError);
}

TEST(Validate, EmptyNameAndSchemelessBase) {
  auto td = load("home/sos/lamp_old.json");
  td.name.clear();
  td.baseIri = "localhost/TD";
  auto diagnostics = validate(td);
  ASSERT_EQ(diagnostics.size(), 2u);
  EXPECT_EQ(diagnostics[0].path, "td:name");
  EXPECT_EQ(diagnostics[1].path, "td:base");
}

TEST(Validate, ObjectSchemasNeedFields) {
  auto td = load("home/sos/lamp_old.json");
  td.interactions[1].inputSchema = DataSchema::of(SchemaType::Boolean);
  td.interactions[1].inputSchema->fields.emplace();
  EXPECT_TRUE(hasErrors(validate(td)));
}

TEST(EffectiveTarget, JoinsBaseAndHref) {
  EXPECT_EQ(effectiveTarget("http://localhost/TD", "/switchOn"), "http://localhost/TD/switchOn");
  EXPECT_EQ(effectiveTarget("http://localhost/TD/", "/switchOn"), "http://localhost/TD/switchOn");
  EXPECT_EQ(effectiveTarget("coap://exampleHost/light", "switchOn"), "coap://exampleHost/light/switchOn");
  EXPECT_EQ(effectiveTarget("coap://exampleHost/light", "http://other/x"), "http://other/x");
  EXPECT_EQ(effectiveTarget("coap://exampleHost/light", ""), "coap://exampleHost/light");
}

TEST(DataValue, JsonRoundTrip) {
  auto v = DataValue::parse(R"({"a": [1, true, "x"], "b": {"c": 2.5}})");
  EXPECT_TRUE(v.isMap());
  EXPECT_EQ(DataValue::parse(v.toJsonText()), v);
  EXPECT_THROW(DataValue::parse("{"), aat::Error);
}

TEST(Schemas, DefaultValueConforms) {
  oracle::Gen gen(3);
  for (int k = 0; k < 300; ++k) {
    auto s = randomSchema(gen, 2);
    EXPECT_TRUE(conformsTo(defaultValue(s), s));
  }
  EXPECT_EQ(defaultValue(DataSchema::of(SchemaType::Boolean)), DataValue(true));
}

TEST(Schemas, ConformsToAgreesWithReference) {
  oracle::Gen gen(17);
  int accepted = 0;
  for (int k = 0; k < 2000; ++k) {
    auto s = randomSchema(gen, 2);
    auto v = randomValue(gen, 2);
    bool expected = conforms(v, s);
    ASSERT_EQ(conformsTo(v, s), expected) << v.toJsonText();
    accepted += expected;
  }
  EXPECT_GT(accepted, 100);
}
