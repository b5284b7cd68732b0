#include <filesystem>
#include <fstream>
#include <sstream>

#include "aat/semdoc.h"
#include "http_util.h"

namespace aat::detail {

HttpTarget splitIri(const std::string& iri) {
  auto schemeEnd = iri.find("://");
  if (schemeEnd == std::string::npos || schemeEnd == 0) throw Error("not an absolute IRI: " + iri);
  HttpTarget target;
  target.scheme = iri.substr(0, schemeEnd);
  for (auto& c : target.scheme) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  auto rest = iri.substr(schemeEnd + 3);
  auto slash = rest.find('/');
  target.authority = rest.substr(0, slash);
  target.path = slash == std::string::npos ? "/" : rest.substr(slash);
  if (target.authority.empty()) throw Error("IRI has no authority: " + iri);
  return target;
}

std::string describe(httplib::Error error) {
  switch (error) {
    case httplib::Error::Connection: return "connect";
    case httplib::Error::ConnectionTimeout: return "timeout";
    case httplib::Error::Read: return "read";
    case httplib::Error::Write: return "write";
    default: return httplib::to_string(error);
  }
}

}  // namespace aat::detail

namespace aat::semdoc {

DocumentSource DocumentSource::fromLocator(const std::string& locator) {
  if (locator.rfind("http://", 0) == 0 || locator.rfind("https://", 0) == 0) return http(locator);
  if (locator.rfind("file://", 0) == 0) return file(locator.substr(7));
  return file(locator);
}

MediaHint DocumentSource::media() const {
  if (mediaHint) return *mediaHint;
  std::string path = location;
  if (origin == Origin::Http) {
    auto q = path.find_first_of("?#");
    if (q != std::string::npos) path.resize(q);
  }
  auto ext = std::filesystem::path(path).extension().string();
  if (ext == ".nt") return MediaHint::NTriples;
  if (ext == ".json" || ext == ".jsonld") return MediaHint::TdJson;
  return MediaHint::Turtle;
}

std::string fetch(const DocumentSource& source, const FetchOptions& options) {
  switch (source.origin) {
    case DocumentSource::Origin::Inline:
      return source.location;
    case DocumentSource::Origin::File: {
      std::ifstream in(source.location, std::ios::binary);
      if (!in) throw FetchError(source.location, "open");
      std::ostringstream buf;
      buf << in.rdbuf();
      if (in.bad()) throw FetchError(source.location, "read");
      return buf.str();
    }
    case DocumentSource::Origin::Http: break;
  }

  detail::HttpTarget target;
  try {
    target = detail::splitIri(source.location);
  } catch (const Error& e) {
    throw FetchError(source.location, "invalid IRI");
  }
  if (target.scheme != "http") throw FetchError(source.location, "unsupported scheme " + target.scheme);

  httplib::Client client("http://" + target.authority);
  auto secs = std::chrono::duration_cast<std::chrono::seconds>(options.timeout);
  auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(options.timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  auto res = client.Get(target.path);
  if (!res) throw FetchError(source.location, detail::describe(res.error()));
  if (res->status < 200 || res->status >= 300) {
    throw FetchError(source.location, "status " + std::to_string(res->status));
  }
  return res->body;
}

std::string resolveReference(const std::string& base, const std::string& reference) {
  if (reference.find("://") != std::string::npos) return reference;
  if (base.rfind("http://", 0) == 0 || base.rfind("https://", 0) == 0) {
    auto target = detail::splitIri(base);
    std::string root = target.scheme + "://" + target.authority;
    if (!reference.empty() && reference.front() == '/') return root + reference;
    auto dir = target.path.substr(0, target.path.rfind('/') + 1);
    return root + dir + reference;
  }
  std::filesystem::path ref(reference);
  if (ref.is_absolute()) return reference;
  return (std::filesystem::path(base).parent_path() / ref).lexically_normal().string();
}

}  // namespace aat::semdoc
