#include "aat/binding.h"
#include "http_util.h"

namespace aat::binding {

namespace {

class HttpBinding final : public ProtocolBinding {
 public:
  explicit HttpBinding(HttpOptions options) : options_(std::move(options)) {}

  Response invoke(const std::string& target, Verb verb, const std::optional<std::string>& payload,
                  const std::string& mediaType) override {
    detail::HttpTarget t;
    try {
      t = detail::splitIri(target);
    } catch (const Error& e) {
      throw TransportError(0, "invalid target " + target);
    }
    if (t.scheme != "http") throw TransportError(0, "scheme " + t.scheme + " is not http");
    auto mapped = options_.authorityMap.find(t.authority);
    std::string authority = mapped == options_.authorityMap.end() ? t.authority : mapped->second;

    httplib::Client client("http://" + authority);
    auto secs = std::chrono::duration_cast<std::chrono::seconds>(options_.timeout);
    auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(options_.timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());

    const std::string body = payload.value_or("");
    httplib::Result res;
    switch (verb) {
      case Verb::Read: res = client.Get(t.path); break;
      case Verb::Invoke: res = client.Post(t.path, body, mediaType); break;
      case Verb::Write: res = client.Put(t.path, body, mediaType); break;
    }
    if (!res) throw TransportError(0, detail::describe(res.error()));
    return Response{res->status, res->body};
  }

 private:
  HttpOptions options_;
};

}  // namespace

std::shared_ptr<ProtocolBinding> httpBinding(HttpOptions options) {
  return std::make_shared<HttpBinding>(std::move(options));
}

}  // namespace aat::binding
