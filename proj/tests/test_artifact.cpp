#include <gtest/gtest.h>

#include <thread>

#include "aat/artifact.h"
#include "aat/sim.h"
#include "oracles.h"

using namespace aat;
using namespace aat::artifact;

namespace {

// The SOS world behind every scheme.
struct SosHome {
  SosHome() : world(sim::World::load(oracle::fixture("home/sos/world.txt"))) {
    auto sim = std::make_shared<sim::SimBinding>(world);
    bindings.add("http", sim);
    bindings.add("coap", sim);
  }
  td::ThingDescription td(const std::string& file) const {
    return td::parseTd(oracle::slurp(oracle::fixture("home/sos/" + file)));
  }
  std::shared_ptr<sim::World> world;
  binding::BindingRegistry bindings;
  Registry registry;
};

class Refusing : public binding::ProtocolBinding {
 public:
  binding::Response invoke(const std::string&, binding::Verb, const std::optional<std::string>&,
                           const std::string&) override {
    return {503, ""};
  }
};

const std::string kLb1 = "http://localhost/td/lb1";

}  // namespace

TEST(Instantiate, BuildsMapsAndReadsProperties) {
  SosHome home;
  auto lamp = instantiate(home.td("lamp_old.json"), home.bindings, kLb1);
  EXPECT_EQ(lamp->name(), "emergency_light");
  EXPECT_EQ(lamp->sourceIri(), kLb1);
  EXPECT_EQ(lamp->generation(), 1u);
  EXPECT_EQ(lamp->operations().size(), 2u);
  EXPECT_TRUE(lamp->operations().count("Switch On"));
  EXPECT_TRUE(lamp->events().empty());
  auto props = lamp->properties();
  ASSERT_EQ(props.count("Switch State"), 1u);
  EXPECT_EQ(props.at("Switch State").value, td::DataValue(false));
  EXPECT_FALSE(props.at("Switch State").stale);
  EXPECT_EQ(lamp->operationFor("http://iotschema.org/SwitchOn"), "Switch On");
  EXPECT_FALSE(lamp->operationFor("http://iotschema.org/Open"));

  auto fire = instantiate(home.td("fire_detector.json"), home.bindings, "http://localhost/td/fire");
  EXPECT_EQ(fire->events().count("fireEvent"), 1u);
}

TEST(Instantiate, RejectsInvalidTdsAndMissingBindings) {
  SosHome home;
  auto broken = home.td("lamp_old.json");
  broken.name.clear();
  try {
    instantiate(broken, home.bindings, kLb1);
    FAIL() << "expected InvalidTd";
  } catch (const InvalidTd& e) {
    EXPECT_FALSE(e.diagnostics().empty());
  }
  binding::BindingRegistry httpOnly;
  httpOnly.add("http", std::make_shared<sim::SimBinding>(home.world));
  EXPECT_THROW(instantiate(home.td("lamp_new.json"), httpOnly, kLb1), binding::NoBindingError);
}

TEST(Instantiate, FailedInitialReadLeavesStaleProperty) {
  SosHome home;
  binding::BindingRegistry refusing;
  refusing.add("http", std::make_shared<Refusing>());
  try {
    home.registry.add(home.td("lamp_old.json"), refusing, kLb1);
    FAIL() << "expected InstantiationError";
  } catch (const InstantiationError& e) {
    ASSERT_TRUE(e.instance());
    EXPECT_TRUE(e.instance()->properties().at("Switch State").stale);
    EXPECT_FALSE(e.instance()->warnings().empty());
  }
  // Still registered, so a later replacement can repair it.
  EXPECT_EQ(home.registry.size(), 1u);
}

TEST(Act, InvokesThroughTheBinding) {
  SosHome home;
  home.registry.add(home.td("lamp_old.json"), home.bindings, kLb1);
  EXPECT_FALSE(act(home.registry, "emergency_light", "Switch On", td::DataValue(true)));
  EXPECT_EQ(home.world->state("lb1").at("Switch State"), td::DataValue(true));
  EXPECT_EQ(readProperty(home.registry, "emergency_light", "Switch State"), td::DataValue(true));
  act(home.registry, "emergency_light", "Switch Off", td::DataValue(true));
  EXPECT_EQ(readProperty(home.registry, "emergency_light", "Switch State"), td::DataValue(false));
}

TEST(Act, ReportsUnknownNamesAndBadInput) {
  SosHome home;
  home.registry.add(home.td("lamp_old.json"), home.bindings, kLb1);
  try {
    act(home.registry, "emergency_light", "Blink", td::DataValue(true));
    FAIL() << "expected UnknownOperation";
  } catch (const UnknownOperation& e) {
    EXPECT_EQ(e.available(), (std::vector<std::string>{"Switch Off", "Switch On"}));
  }
  EXPECT_THROW(act(home.registry, "emergency_light", "Switch On", td::DataValue("yes")), SchemaMismatch);
  EXPECT_THROW(act(home.registry, "emergency_light", "Switch On", std::nullopt), SchemaMismatch);
  EXPECT_THROW(act(home.registry, "nobody", "Switch On", td::DataValue(true)), UnknownArtifact);
  EXPECT_THROW(readProperty(home.registry, "emergency_light", "Colour"), UnknownProperty);
  EXPECT_EQ(home.world->log().size(), 0u);
}

TEST(WriteProperty, HonoursWritability) {
  auto world = sim::World::load(oracle::fixture("home/welcome/world.txt"));
  binding::BindingRegistry bindings;
  bindings.add("http", std::make_shared<sim::SimBinding>(world));
  Registry registry;
  sim::populateRegistry(*world, registry, bindings);
  writeProperty(registry, "hall_heater", "Target Temperature", td::DataValue(23));
  EXPECT_EQ(world->state("heater").at("Target Temperature"), td::DataValue(23));
  EXPECT_THROW(writeProperty(registry, "hall_heater", "Temperature", td::DataValue(5)), NotWritable);
  EXPECT_THROW(writeProperty(registry, "hall_heater", "Target Temperature", td::DataValue("hot")), SchemaMismatch);
}

TEST(Registry, DuplicatesAndReplacement) {
  SosHome home;
  auto first = home.registry.add(home.td("lamp_old.json"), home.bindings, kLb1);
  EXPECT_THROW(home.registry.add(home.td("lamp_old.json"), home.bindings, kLb1), DuplicateArtifact);

  auto renamed = home.td("lamp_new.json");
  renamed.name = "other";
  EXPECT_THROW(home.registry.replace("emergency_light", renamed, home.bindings), NameMismatch);
  renamed.name = "ghost";
  EXPECT_THROW(home.registry.replace("ghost", renamed, home.bindings), UnknownArtifact);

  auto second = home.registry.replace("emergency_light", home.td("lamp_new.json"), home.bindings);
  EXPECT_EQ(second->generation(), 2u);
  EXPECT_EQ(second->sourceIri(), kLb1);
  EXPECT_EQ(second->td().scheme(), "coap");
  EXPECT_EQ(home.registry.get("emergency_light"), second);
  EXPECT_EQ(home.registry.findBySource(kLb1), second);
  // The old snapshot is untouched.
  EXPECT_EQ(first->td().scheme(), "http");

  act(home.registry, "emergency_light", "Switch On", td::DataValue(true));
  EXPECT_EQ(home.world->state("lb2").at("Switch State"), td::DataValue(true));
  EXPECT_EQ(home.world->state("lb1").at("Switch State"), td::DataValue(false));

  home.registry.remove("emergency_light");
  EXPECT_EQ(home.registry.size(), 0u);
  EXPECT_FALSE(home.registry.find("emergency_light"));
}

TEST(Registry, ConcurrentActsAndReplacements) {
  SosHome home;
  home.registry.add(home.td("lamp_old.json"), home.bindings, kLb1);
  std::vector<std::thread> workers;
  std::atomic<int> failures{0};
  for (int t = 0; t < 4; ++t) {
    workers.emplace_back([&, t] {
      for (int k = 0; k < 50; ++k) {
        try {
          act(home.registry, "emergency_light", (k + t) % 2 ? "Switch On" : "Switch Off", td::DataValue(true));
        } catch (...) {
          ++failures;
        }
      }
    });
  }
  workers.emplace_back([&] {
    for (int k = 0; k < 10; ++k) {
      home.registry.replace("emergency_light", home.td(k % 2 ? "lamp_old.json" : "lamp_new.json"), home.bindings);
    }
  });
  for (auto& w : workers) w.join();
  EXPECT_EQ(failures.load(), 0);
  EXPECT_EQ(home.registry.get("emergency_light")->generation(), 11u);
}

TEST(Events, PollDrainsOldestFirst) {
  SosHome home;
  home.registry.add(home.td("fire_detector.json"), home.bindings, "http://localhost/td/fire");
  EXPECT_TRUE(pollEvents(home.registry, "fire_detector", "fireEvent").empty());
  home.world->emit("fire", "fireEvent", td::DataValue("kitchen"));
  home.world->tick(3);
  home.world->emit("fire", "fireEvent", td::DataValue("hall"));
  auto records = pollEvents(home.registry, "fire_detector", "fireEvent");
  ASSERT_EQ(records.size(), 2u);
  EXPECT_EQ(records[0].eventName, "fireEvent");
  EXPECT_EQ(records[0].payload, td::DataValue("kitchen"));
  EXPECT_LT(records[0].timestamp, records[1].timestamp);
  EXPECT_TRUE(pollEvents(home.registry, "fire_detector", "fireEvent").empty());
  EXPECT_THROW(pollEvents(home.registry, "fire_detector", "smoke"), UnknownEvent);
}

TEST(ExportContext, RendersStatusesThroughTheTable) {
  SosHome home;
  sim::populateRegistry(*home.world, home.registry, home.bindings);
  std::vector<std::string> warnings;
  auto graph = exportContext(home.registry, PredicateTable::defaults(), &warnings);
  EXPECT_EQ(graph, (rdf::Graph{{rdf::Term::iri(kLb1), rdf::Term::iri("http://iotschema.org/switchstatus"),
                                rdf::Term::literal("off")}}));
  act(home.registry, "emergency_light", "Switch On", td::DataValue(true));
  graph = exportContext(home.registry, PredicateTable::defaults());
  EXPECT_TRUE(graph.contains(
      {rdf::Term::iri(kLb1), rdf::Term::iri("http://iotschema.org/switchstatus"), rdf::Term::literal("on")}));
  // Agrees with the world's own projection.
  EXPECT_EQ(graph, home.world->deviceContext());
}

TEST(PredicateTable, ParseRenderAndInvert) {
  auto table = PredicateTable::parse(R"(
    # curtains publish under iot:status
    iot:CurtainStatus iot:status open closed
    <http://example.org/Level> <http://example.org/level> - -
  )");
  ASSERT_EQ(table.rules().size(), 2u);
  const auto* curtain = table.find("http://iotschema.org/CurtainStatus");
  ASSERT_NE(curtain, nullptr);
  EXPECT_EQ(curtain->predicate, "http://iotschema.org/status");
  EXPECT_EQ(table.render(*curtain, td::DataValue(true)), rdf::Term::literal("open"));
  EXPECT_EQ(table.render(*curtain, td::DataValue("closed")), rdf::Term::literal("closed"));
  auto boolean = td::DataSchema::of(td::SchemaType::Boolean);
  EXPECT_EQ(table.parseLiteral(*curtain, rdf::Term::literal("closed"), boolean), td::DataValue(false));
  EXPECT_FALSE(table.parseLiteral(*curtain, rdf::Term::literal("ajar"), boolean));

  const auto* level = table.find("http://example.org/Level");
  ASSERT_NE(level, nullptr);
  EXPECT_EQ(table.render(*level, td::DataValue(true)), rdf::Term::boolean(true));

  EXPECT_THROW(PredicateTable::parse("iot:A iot:b on"), ArtifactError);
  EXPECT_THROW(PredicateTable::parse("nope:A iot:b on off"), ArtifactError);
}
