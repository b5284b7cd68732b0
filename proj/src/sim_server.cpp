#include <sys/socket.h>

#include <thread>

#include "aat/sim.h"
#include "http_util.h"

namespace aat::sim {

namespace {

constexpr const char* kJson = "application/json";

class EmbeddedServer final : public HttpServer {
 public:
  explicit EmbeddedServer(std::shared_ptr<World> world) : world_(std::move(world)) {
    // httplib's default also sets SO_REUSEPORT, which would let a second
    // server bind the same port silently.
    server_.set_socket_options([](socket_t sock) {
      int yes = 1;
      setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
    });
    server_.Get(".*", [this](const httplib::Request& req, httplib::Response& res) { get(req, res); });
    server_.Post(".*", [this](const httplib::Request& req, httplib::Response& res) {
      forward(req, res, binding::Verb::Invoke);
    });
    server_.Put(".*", [this](const httplib::Request& req, httplib::Response& res) {
      forward(req, res, binding::Verb::Write);
    });
  }

  ~EmbeddedServer() override { stop(); }

  void start(int port) {
    if (port == 0) {
      port_ = server_.bind_to_any_port("127.0.0.1");
      if (port_ < 0) throw BindError("cannot bind any port on 127.0.0.1");
    } else {
      if (!server_.bind_to_port("127.0.0.1", port)) throw BindError("cannot bind 127.0.0.1:" + std::to_string(port));
      port_ = port;
    }
    thread_ = std::thread([this] { server_.listen_after_bind(); });
  }

  int port() const override { return port_; }

  void stop() override {
    if (!thread_.joinable()) return;
    server_.stop();
    thread_.join();
  }

 private:
  void get(const httplib::Request& req, httplib::Response& res) {
    const std::string prefix = "/td/";
    if (req.path.rfind(prefix, 0) == 0) {
      if (auto text = world_->tdText(req.path.substr(prefix.size()))) {
        res.set_content(*text, "application/td+json");
        return;
      }
    }
    if (auto text = world_->document(req.path)) {
      res.set_content(*text, req.path.ends_with(".json") ? kJson : "text/turtle");
      return;
    }
    forward(req, res, binding::Verb::Read);
  }

  void forward(const httplib::Request& req, httplib::Response& res, binding::Verb verb) {
    std::optional<std::string> payload;
    if (!req.body.empty()) payload = req.body;
    auto reply = world_->handle(req.path, verb, payload);
    res.status = reply.status;
    res.set_content(reply.payload, kJson);
  }

  std::shared_ptr<World> world_;
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
};

}  // namespace

std::unique_ptr<HttpServer> serveHttp(std::shared_ptr<World> world, int port) {
  auto server = std::make_unique<EmbeddedServer>(std::move(world));
  server->start(port);
  return server;
}

}  // namespace aat::sim
