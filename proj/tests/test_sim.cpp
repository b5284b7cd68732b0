#include <gtest/gtest.h>

#include "aat/sim.h"
#include "httplib.h"
#include "oracles.h"

using namespace aat;
using namespace aat::sim;
using binding::Verb;

namespace {

std::shared_ptr<World> inSos(const std::string& text) {
  return World::parse(text, oracle::fixture("home/sos"), "test.world");
}

std::size_t lineOf(const std::string& text) {
  try {
    inSos(text);
  } catch (const WorldSpecError& e) {
    return e.line();
  }
  return static_cast<std::size_t>(-1);
}

rdf::Graph turtle(const std::string& text) {
  return semdoc::parseTurtle(text, semdoc::PrefixTable::wellKnown()).graph;
}

}  // namespace

TEST(World, LoadsTheSosHome) {
  auto world = World::load(oracle::fixture("home/sos/world.txt"));
  EXPECT_EQ(world->deviceIds(), (std::vector<std::string>{"fire", "lb1", "lb2"}));
  EXPECT_TRUE(world->device("lb2").spare);
  EXPECT_EQ(world->device("lb1").tdIri, "http://localhost/td/lb1");
  EXPECT_EQ(world->state("lb1").at("Switch State"), td::DataValue(false));
  EXPECT_EQ(world->topology().size(), 3u);
  EXPECT_THROW(world->device("lb3"), UnknownDevice);
}

TEST(World, InitialValuesPrefixesAndAmbient) {
  auto world = World::load(oracle::fixture("home/simple/world.txt"));
  EXPECT_EQ(world->device("ceilingLight").tdIri, "http://localhost/TD/smart_home/kitchen/ceilingLight.jsonld");
  EXPECT_EQ(world->state("d_ceilingLight").at("Switch State"), td::DataValue(true));
  EXPECT_EQ(world->state("curtains").at("Curtain Status"), td::DataValue("closed"));
  EXPECT_EQ(world->ambient().size(), 2u);
  // The projection covers the listed kitchen and dining context.
  auto listed = turtle(oracle::slurp(oracle::fixture("home/simple/context.ttl")));
  EXPECT_TRUE(rdf::entails(world->contextProjection(), listed));
  EXPECT_FALSE(rdf::entails(world->deviceContext(), listed));
}

TEST(World, ErrorsNameTheLine) {
  EXPECT_EQ(lineOf("# ok\n\nbogus directive\n"), 3u);
  EXPECT_EQ(lineOf("device lb1\n"), 1u);
  EXPECT_EQ(lineOf("device lb1 td=missing.json\n"), 1u);
  EXPECT_EQ(lineOf("\ndevice lb1 td=lamp_old.json \"Switch State\"=\"on\"\n"), 2u);
  EXPECT_EQ(lineOf("device lb1 td=lamp_old.json \"Brightness\"=3\n"), 1u);
  EXPECT_EQ(lineOf("zone nope:x\n"), 1u);
  EXPECT_EQ(lineOf("prefix x <http://x/>\n"), 1u);
  EXPECT_EQ(lineOf("ambient\nsh:a iot:b \"c\".\nsh:a 5 iot:c.\nend\n"), 3u);
  EXPECT_EQ(lineOf("ambient\nsh:a iot:b \"c\".\n"), 2u);
  // Two devices on the same route.
  EXPECT_EQ(lineOf("device a td=lamp_old.json\ndevice b td=lamp_old.json\n"), 2u);
  EXPECT_EQ(lineOf("device a td=lamp_old.json\ndevice a td=lamp_new.json\n"), 2u);
  EXPECT_THROW(World::load("/nonexistent/world.txt"), WorldSpecError);
}

TEST(World, RoutesRequestsByPath) {
  auto world = inSos("device lb1 td=lamp_old.json\ndevice fire td=fire_detector.json\n");
  EXPECT_EQ(world->handle("/TD/currentswitch", Verb::Read, std::nullopt).payload, "false");
  EXPECT_EQ(world->handle("/TD/switchOn", Verb::Invoke, "true").status, 200);
  EXPECT_EQ(world->handle("/TD/currentswitch", Verb::Read, std::nullopt).payload, "true");
  EXPECT_EQ(world->handle("/TD/nothing", Verb::Read, std::nullopt).status, 404);
  EXPECT_EQ(world->handle("/TD/switchOn", Verb::Read, std::nullopt).status, 405);
  EXPECT_EQ(world->handle("/TD/currentswitch", Verb::Write, "false").status, 405);
  EXPECT_EQ(world->handle("/TD/switchOff", Verb::Invoke, "\"yes\"").status, 400);
  EXPECT_EQ(world->handle("/TD/switchOff", Verb::Invoke, std::nullopt).status, 400);
  EXPECT_EQ(world->handle("/TD/switchOff", Verb::Invoke, "{").status, 400);
  EXPECT_EQ(world->log(), std::vector<std::string>{"INVOKE lb1 Switch On true"});
}

TEST(World, EventsQueueWithVirtualTime) {
  auto world = inSos("device fire td=fire_detector.json\n");
  world->tick(5);
  world->emit("fire", "fireEvent", td::DataValue("kitchen"));
  EXPECT_THROW(world->emit("fire", "smoke"), SimError);
  EXPECT_THROW(world->emit("nobody", "fireEvent"), UnknownDevice);
  auto drained = nlohmann::json::parse(world->handle("/fire/events/fire", Verb::Read, std::nullopt).payload);
  ASSERT_EQ(drained.size(), 1u);
  EXPECT_EQ(drained[0]["time"], 5);
  EXPECT_EQ(drained[0]["payload"], "kitchen");
  EXPECT_EQ(world->handle("/fire/events/fire", Verb::Read, std::nullopt).payload, "[]");
}

TEST(World, HeaterDriftsTowardItsTarget) {
  auto world = World::load(oracle::fixture("home/welcome/world.txt"));
  world->tick(2);
  EXPECT_EQ(world->state("heater").at("Temperature"), td::DataValue(17));
  auto turnOn = td::effectiveTarget(world->device("heater").td.baseIri, world->device("heater").td.find("Turn On")->forms[0].href);
  EXPECT_EQ(world->handle(turnOn, Verb::Invoke, std::nullopt).status, 200);
  EXPECT_EQ(world->state("heater").at("Heating Status"), td::DataValue(true));
  world->tick(3);
  EXPECT_EQ(world->state("heater").at("Temperature"), td::DataValue(20));
  world->tick(10);
  EXPECT_EQ(world->state("heater").at("Temperature"), td::DataValue(21));
  EXPECT_EQ(world->now(), 15);
}

TEST(World, CurtainRulesUseStringStatus) {
  auto world = World::load(oracle::fixture("home/simple/world.txt"));
  const auto td = world->device("curtains").td;
  EXPECT_EQ(world->handle(td::effectiveTarget(td.baseIri, td.find("Open")->forms[0].href), Verb::Invoke, std::nullopt).status,
            200);
  EXPECT_EQ(world->state("curtains").at("Curtain Status"), td::DataValue("open"));
  EXPECT_EQ(world->state("d_curtains").at("Curtain Status"), td::DataValue("closed"));
}

TEST(World, DeviceContextSkipsSpares) {
  auto world = World::load(oracle::fixture("home/sos/world.txt"));
  auto context = world->deviceContext();
  EXPECT_EQ(context, turtle("<http://localhost/td/lb1> iot:switchstatus \"off\"."));
}

TEST(World, PublishedDocuments) {
  auto world = World::load(oracle::fixture("home/welcome/world.txt"));
  ASSERT_TRUE(world->document("/protocols/welcome_home.json"));
  EXPECT_FALSE(world->document("/protocols/missing.json"));
  EXPECT_TRUE(world->tdText("heater"));
  EXPECT_FALSE(world->tdText("boiler"));
}

TEST(PopulateRegistry, RegistersNonSpareDevices) {
  auto world = World::load(oracle::fixture("home/sos/world.txt"));
  binding::BindingRegistry bindings;
  bindings.add("http", std::make_shared<SimBinding>(world));
  artifact::Registry registry;
  auto names = populateRegistry(*world, registry, bindings);
  std::sort(names.begin(), names.end());
  EXPECT_EQ(names, (std::vector<std::string>{"emergency_light", "fire_detector"}));
  EXPECT_EQ(registry.get("emergency_light")->sourceIri(), "http://localhost/td/lb1");
}

TEST(HttpFacade, ServesTdsDocumentsAndInteractions) {
  auto world = World::load(oracle::fixture("home/welcome/world.txt"));
  auto server = serveHttp(world, 0);
  ASSERT_GT(server->port(), 0);
  httplib::Client client("127.0.0.1", server->port());

  auto td = client.Get("/td/heater");
  ASSERT_TRUE(td);
  EXPECT_EQ(td->status, 200);
  EXPECT_EQ(td->body, *world->tdText("heater"));
  auto doc = client.Get("/protocols/goals/warm_up.ttl");
  ASSERT_TRUE(doc);
  EXPECT_EQ(doc->body, *world->document("/protocols/goals/warm_up.ttl"));
  EXPECT_EQ(client.Get("/td/boiler")->status, 404);

  auto heater = world->device("heater").td;
  auto path = [&](const char* name) {
    auto target = td::effectiveTarget(heater.baseIri, heater.find(name)->forms[0].href);
    return target.substr(target.find('/', target.find("//") + 2));
  };
  EXPECT_EQ(client.Post(path("Turn On"), "", "application/json")->status, 200);
  EXPECT_EQ(world->state("heater").at("Heating Status"), td::DataValue(true));
  EXPECT_EQ(client.Put(path("Target Temperature"), "25", "application/json")->status, 200);
  EXPECT_EQ(world->state("heater").at("Target Temperature"), td::DataValue(25));
  EXPECT_EQ(client.Get(path("Target Temperature"))->body, "25");

  // The port is taken while the server runs.
  EXPECT_THROW(serveHttp(world, server->port()), BindError);
  server->stop();
}
