#pragma once

// Internal helpers shared by the translation units that talk HTTP.

#include <string>

#include "httplib.h"

namespace aat::detail {

struct HttpTarget {
  std::string scheme;
  std::string authority;  // host[:port]
  std::string path;       // always starts with '/'
};

// Splits `scheme://authority/path?query`. Throws aat::Error when the IRI has
// no scheme or authority.
HttpTarget splitIri(const std::string& iri);

// Stable short name for an httplib transport failure ("connect", "timeout", ...).
std::string describe(httplib::Error error);

}  // namespace aat::detail
