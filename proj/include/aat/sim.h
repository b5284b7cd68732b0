#pragma once

// Simulated smart home: virtual devices that publish TDs, react to protocol
// requests with built-in rules, queue events, and advance on a virtual clock.

#include <cstdint>
#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "aat/artifact.h"
#include "aat/binding.h"
#include "aat/error.h"
#include "aat/rdf.h"
#include "aat/semdoc.h"
#include "aat/td.h"

namespace aat::sim {

class SimError : public Error {
 public:
  using Error::Error;
};

// Bad world file. `path` is the file (or "<inline>"), `line` 1-based, 0 when
// the problem is not tied to a line.
class WorldSpecError : public SimError {
 public:
  WorldSpecError(std::string path, std::size_t line, const std::string& message)
      : SimError(path + (line ? ":" + std::to_string(line) : std::string()) + ": " + message),
        path_(std::move(path)),
        line_(line) {}
  const std::string& path() const { return path_; }
  std::size_t line() const { return line_; }

 private:
  std::string path_;
  std::size_t line_;
};

class UnknownDevice : public SimError {
 public:
  explicit UnknownDevice(const std::string& id) : SimError("unknown device '" + id + "'") {}
};

class BindError : public SimError {
 public:
  using SimError::SimError;
};

struct DeviceSpec {
  std::string id;
  std::string tdText;
  // Identity of the device in context graphs; defaults to http://localhost/td/<id>.
  std::string tdIri;
  // Property name -> initial value; unset properties start at false/0/"".
  std::map<std::string, td::DataValue> initial;
  // Spare devices are reachable but not registered as artifacts at startup.
  bool spare = false;
};

struct QueuedEvent {
  std::string eventName;
  std::optional<td::DataValue> payload;
  std::int64_t time = 0;
};

struct Device {
  std::string id;
  std::string tdIri;
  std::string tdText;
  td::ThingDescription td;
  std::map<std::string, td::DataValue> state;
  std::map<std::string, std::deque<QueuedEvent>> events;
  bool spare = false;
};

struct Reply {
  int status = 200;
  std::string payload;
};

class World {
 public:
  World();

  // World file format, one directive per line (`#` comments):
  //   prefix p: <namespace>
  //   predicates <file>                     predicate table (default built-in)
  //   topology <file>                       Turtle merged into the topology
  //   zone <iri>                            <iri> a bot:Zone
  //   contains <zone> <zone>...             bot:containsZone
  //   element <zone> <iri>...               bot:hasElement
  //   device <id> td=<file> [iri=<iri>] [spare] [init] ["Prop Name"=<json>]...
  //   document <url-path> <file>            served verbatim by serveHttp
  //   ambient ... end                       Turtle block of ambient statements
  // Relative files resolve against `baseDir`. IRIs are <full> or prefixed.
  static std::shared_ptr<World> parse(std::string_view text, const std::filesystem::path& baseDir,
                                      const std::string& origin = "<inline>");
  static std::shared_ptr<World> load(const std::filesystem::path& file);

  // Throws WorldSpecError on invalid TDs, bad initial values or route clashes.
  void addDevice(const DeviceSpec& spec);
  void publish(const std::string& urlPath, std::string text);

  // Routes by the path of base+href. Errors are statuses: 404 unknown path,
  // 405 verb not allowed, 400 payload rejected by the schema.
  Reply handle(const std::string& path, binding::Verb verb, const std::optional<std::string>& payload);

  // Queues a record on the named event channel. Throws UnknownDevice, or
  // SimError when the device has no such event.
  void emit(const std::string& deviceId, const std::string& eventName,
            std::optional<td::DataValue> payload = std::nullopt);

  // Advances the virtual clock; heaters and coolers drift one unit per tick
  // toward their target temperature while switched on.
  void tick(int ticks = 1);
  std::int64_t now() const;

  std::vector<std::string> deviceIds() const;
  Device device(const std::string& id) const;  // throws UnknownDevice
  std::map<std::string, td::DataValue> state(const std::string& id) const;
  std::optional<std::string> document(const std::string& urlPath) const;
  std::optional<std::string> tdText(const std::string& deviceId) const;

  const rdf::Graph& topology() const { return topology_; }
  const rdf::Graph& ambient() const { return ambient_; }
  const artifact::PredicateTable& predicates() const { return predicates_; }
  void setPredicates(artifact::PredicateTable table);

  // Device statuses of non-spare devices rendered through the predicate
  // table, keyed by TD IRI; the same graph exportContext yields when every
  // artifact is backed by this world.
  rdf::Graph deviceContext() const;
  // deviceContext() plus the ambient statements.
  rdf::Graph contextProjection() const;

  // Successful state-changing requests, one line per request, oldest first.
  std::vector<std::string> log() const;

 private:
  struct Route {
    std::string deviceId;
    std::string interaction;
  };

  Reply handleLocked(const std::string& path, binding::Verb verb, const std::optional<std::string>& payload);
  void applyAction(Device& device, const td::Interaction& action, const std::optional<td::DataValue>& input);

  mutable std::mutex mutex_;
  std::map<std::string, Device> devices_;
  std::map<std::string, Route> routes_;
  std::map<std::string, std::string> documents_;
  rdf::Graph topology_;
  rdf::Graph ambient_;
  artifact::PredicateTable predicates_;
  std::int64_t clock_ = 0;
  std::vector<std::string> log_;
};

// Delivers requests straight to a world, whatever the target's scheme.
class SimBinding final : public binding::ProtocolBinding {
 public:
  explicit SimBinding(std::shared_ptr<World> world) : world_(std::move(world)) {}

  binding::Response invoke(const std::string& target, binding::Verb verb, const std::optional<std::string>& payload,
                           const std::string& mediaType) override;

  // The next call answers with `status` (0: no response) instead of
  // reaching the world; faults queue up in order.
  void injectFault(int status);

 private:
  std::shared_ptr<World> world_;
  std::mutex faultMutex_;
  std::deque<int> faults_;
};

// Registers every non-spare device as an artifact named by its TD, with the
// device's TD IRI as source. Returns the names added.
std::vector<std::string> populateRegistry(const World& world, artifact::Registry& registry,
                                          const binding::BindingRegistry& bindings);

class HttpServer {
 public:
  virtual ~HttpServer() = default;
  virtual int port() const = 0;
  virtual void stop() = 0;
};

// Serves `world` on 127.0.0.1: GET /td/<deviceId> returns the TD text, GET
// on a published document path returns it, other GET/POST/PUT requests go to
// handle() as READ/INVOKE/WRITE. Port 0 picks a free port. Throws BindError.
std::unique_ptr<HttpServer> serveHttp(std::shared_ptr<World> world, int port = 0);

}  // namespace aat::sim
