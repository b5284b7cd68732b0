#include <gtest/gtest.h>

#include "aat/binding.h"
#include "aat/sim.h"
#include "httplib.h"
#include "oracles.h"

using namespace aat;
using namespace aat::binding;

namespace {

struct Recorded {
  std::string target;
  Verb verb;
  std::optional<std::string> payload;
  std::string mediaType;
};

// Remembers every request and answers with a canned response.
class Recorder : public ProtocolBinding {
 public:
  Response invoke(const std::string& target, Verb verb, const std::optional<std::string>& payload,
                  const std::string& mediaType) override {
    calls.push_back({target, verb, payload, mediaType});
    return reply;
  }
  std::vector<Recorded> calls;
  Response reply{200, ""};
};

td::ThingDescription oldLamp() { return td::parseTd(oracle::slurp(oracle::fixture("home/sos/lamp_old.json"))); }

}  // namespace

TEST(VerbFor, RelAndKindDefaults) {
  td::Form form;
  EXPECT_EQ(verbFor(form, td::InteractionKind::Action), Verb::Invoke);
  EXPECT_EQ(verbFor(form, td::InteractionKind::Property), Verb::Read);
  EXPECT_EQ(verbFor(form, td::InteractionKind::Event), Verb::Read);
  form.rel = {"readtd:Property"};
  EXPECT_EQ(verbFor(form, td::InteractionKind::Property), Verb::Read);
  form.rel = {"invoketd:Action"};
  EXPECT_EQ(verbFor(form, td::InteractionKind::Action), Verb::Invoke);
  form.rel = {"writeProperty"};
  EXPECT_EQ(verbFor(form, td::InteractionKind::Property), Verb::Write);
  form.rel = {"subscribe"};
  EXPECT_THROW(verbFor(form, td::InteractionKind::Event), RelError);
}

TEST(Resolve, BuildsTargetVerbAndPayload) {
  auto td = oldLamp();
  auto req = resolve(td.baseIri, *td.find("Switch On"), td::DataValue(true));
  EXPECT_EQ(req.target, "http://localhost/TD/switchOn");
  EXPECT_EQ(req.verb, Verb::Invoke);
  EXPECT_EQ(req.scheme(), "http");
  EXPECT_EQ(req.payload, "true");
  EXPECT_EQ(req.mediaType, "application/json");

  auto read = resolve(td.baseIri, *td.find("Switch State"), std::nullopt);
  EXPECT_EQ(read.verb, Verb::Read);
  EXPECT_FALSE(read.payload);
}

TEST(Resolve, SameInterfaceDifferentProtocol) {
  auto newTd = td::parseTd(oracle::slurp(oracle::fixture("home/sos/lamp_new.json")));
  auto req = resolve(newTd.baseIri, *newTd.find("Switch Off"), td::DataValue(true));
  EXPECT_EQ(req.target, "coap://exampleHost/light/switchOff");
  EXPECT_EQ(req.scheme(), "coap");
}

TEST(Resolve, RejectsMissingInputAndForeignMedia) {
  auto td = oldLamp();
  EXPECT_THROW(resolve(td.baseIri, *td.find("Switch On"), std::nullopt), MissingInput);
  auto odd = *td.find("Switch On");
  odd.forms[0].mediaType = "text/plain";
  EXPECT_THROW(resolve(td.baseIri, odd, td::DataValue(true)), UnsupportedMediaType);
  odd.forms.clear();
  EXPECT_THROW(resolve(td.baseIri, odd, td::DataValue(true)), BindingError);
}

TEST(ResolveFor, WriteUsesPropertySchema) {
  td::Interaction p;
  p.name = "Target";
  p.kind = td::InteractionKind::Property;
  p.outputSchema = td::DataSchema::of(td::SchemaType::Number);
  p.forms.push_back({"/target", {}, "application/json"});
  auto req = resolveFor(Verb::Write, "http://h", p, td::DataValue(21));
  EXPECT_EQ(req.verb, Verb::Write);
  EXPECT_EQ(req.payload, "21");
  EXPECT_THROW(resolveFor(Verb::Write, "http://h", p, std::nullopt), MissingInput);
}

TEST(Registry, SelectsBySchemeCaseInsensitively) {
  BindingRegistry registry;
  auto rec = std::make_shared<Recorder>();
  registry.add("COAP", rec);
  EXPECT_EQ(registry.find("coap"), rec);
  EXPECT_EQ(registry.schemes(), std::vector<std::string>{"coap"});
  try {
    registry.require("mqtt");
    FAIL() << "expected NoBindingError";
  } catch (const NoBindingError& e) {
    EXPECT_EQ(e.scheme(), "mqtt");
  }
}

TEST(Dispatch, StatusAndSchemaChecks) {
  BindingRegistry registry;
  auto rec = std::make_shared<Recorder>();
  registry.add("coap", rec);
  ResolvedRequest req{"coap://h/x", Verb::Read, "application/json", std::nullopt};
  auto boolean = td::DataSchema::of(td::SchemaType::Boolean);

  rec->reply = {200, "true"};
  EXPECT_EQ(dispatch(registry, req, boolean), td::DataValue(true));
  EXPECT_FALSE(dispatch(registry, req, std::nullopt));
  rec->reply = {200, "\"yes\""};
  EXPECT_THROW(dispatch(registry, req, boolean), ResponseSchemaMismatch);
  rec->reply = {200, "<html>"};
  EXPECT_THROW(dispatch(registry, req, boolean), ResponseSchemaMismatch);
  rec->reply = {503, "busy"};
  try {
    dispatch(registry, req, boolean);
    FAIL() << "expected TransportError";
  } catch (const TransportError& e) {
    EXPECT_EQ(e.status(), 503);
  }
  req.target = "ftp://h/x";
  EXPECT_THROW(dispatch(registry, req, boolean), NoBindingError);
  EXPECT_EQ(rec->calls.size(), 5u);
}

TEST(HttpBinding, MapsVerbsToMethods) {
  httplib::Server server;
  std::vector<std::string> seen;
  auto record = [&](const httplib::Request& req, httplib::Response& res) {
    seen.push_back(req.method + " " + req.path + " " + req.body + " " + req.get_header_value("Content-Type"));
    res.set_content("true", "application/json");
  };
  server.Get("/TD/currentswitch", record);
  server.Post("/TD/switchOn", record);
  server.Put("/TD/target", record);
  int port = server.bind_to_any_port("127.0.0.1");
  std::thread listener([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  HttpOptions options;
  options.authorityMap["localhost"] = "127.0.0.1:" + std::to_string(port);
  auto http = httpBinding(options);
  EXPECT_EQ(http->invoke("http://localhost/TD/currentswitch", Verb::Read, std::nullopt, "application/json").status, 200);
  EXPECT_EQ(http->invoke("http://localhost/TD/switchOn", Verb::Invoke, "true", "application/json").status, 200);
  EXPECT_EQ(http->invoke("http://localhost/TD/target", Verb::Write, "21", "application/json").status, 200);
  EXPECT_EQ(http->invoke("http://localhost/TD/nothing", Verb::Read, std::nullopt, "application/json").status, 404);
  server.stop();
  listener.join();

  ASSERT_EQ(seen.size(), 3u);
  EXPECT_EQ(seen[0], "GET /TD/currentswitch  ");
  EXPECT_EQ(seen[1], "POST /TD/switchOn true application/json");
  EXPECT_EQ(seen[2], "PUT /TD/target 21 application/json");
}

TEST(HttpBinding, UnreachableHostIsTransportError) {
  HttpOptions options;
  options.timeout = std::chrono::milliseconds(300);
  options.authorityMap["localhost"] = "127.0.0.1:1";
  auto http = httpBinding(options);
  try {
    http->invoke("http://localhost/x", Verb::Read, std::nullopt, "application/json");
    FAIL() << "expected TransportError";
  } catch (const TransportError& e) {
    EXPECT_EQ(e.status(), 0);
  }
  EXPECT_THROW(http->invoke("coap://h/x", Verb::Read, std::nullopt, "application/json"), TransportError);
}

TEST(SimBinding, FaultsComeFirstThenTheWorld) {
  auto world = sim::World::load(oracle::fixture("home/sos/world.txt"));
  sim::SimBinding binding(world);
  binding.injectFault(500);
  binding.injectFault(0);
  EXPECT_EQ(binding.invoke("http://localhost/TD/switchOn", Verb::Invoke, "true", "application/json").status, 500);
  EXPECT_THROW(binding.invoke("http://localhost/TD/switchOn", Verb::Invoke, "true", "application/json"),
               TransportError);
  EXPECT_EQ(binding.invoke("http://localhost/TD/switchOn", Verb::Invoke, "true", "application/json").status, 200);
  EXPECT_EQ(world->state("lb1").at("Switch State"), td::DataValue(true));
  // Same path routing regardless of scheme or host.
  EXPECT_EQ(binding.invoke("coap://exampleHost/light/switchOn", Verb::Invoke, "true", "application/json").status, 200);
  EXPECT_EQ(world->state("lb2").at("Switch State"), td::DataValue(true));
}
