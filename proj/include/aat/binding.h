#pragma once

// Protocol binding: turns an interaction's form into a concrete request,
// routes it by IRI scheme, and decodes the reply against the data schema.

#include <chrono>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "aat/error.h"
#include "aat/td.h"

namespace aat::binding {

enum class Verb { Read, Invoke, Write };

std::string_view toString(Verb verb);

class BindingError : public Error {
 public:
  using Error::Error;
};

class NoBindingError : public BindingError {
 public:
  explicit NoBindingError(std::string scheme)
      : BindingError("no protocol binding registered for scheme '" + scheme + "'"), scheme_(std::move(scheme)) {}
  const std::string& scheme() const { return scheme_; }

 private:
  std::string scheme_;
};

// Transport failure. `status` is the protocol status code, or 0 when no
// response arrived (then `cause` names the failure, e.g. "connect").
class TransportError : public BindingError {
 public:
  TransportError(int status, std::string cause)
      : BindingError(status ? "transport error: status " + std::to_string(status) + (cause.empty() ? "" : " (" + cause + ")")
                            : "transport error: " + cause),
        status_(status),
        cause_(std::move(cause)) {}
  int status() const { return status_; }
  const std::string& cause() const { return cause_; }

 private:
  int status_;
  std::string cause_;
};

class UnsupportedMediaType : public BindingError {
 public:
  using BindingError::BindingError;
};

class MissingInput : public BindingError {
 public:
  using BindingError::BindingError;
};

class ResponseSchemaMismatch : public BindingError {
 public:
  using BindingError::BindingError;
};

// A form whose rel cannot be mapped to a verb.
class RelError : public BindingError {
 public:
  using BindingError::BindingError;
};

struct Response {
  int status = 200;
  std::string payload;
};

// Transport adapter. Implementations must be safe for concurrent invoke and
// must report failures without partially mutating their own state.
class ProtocolBinding {
 public:
  virtual ~ProtocolBinding() = default;
  // Throws TransportError when no response could be obtained.
  virtual Response invoke(const std::string& target, Verb verb, const std::optional<std::string>& payload,
                          const std::string& mediaType) = 0;
  virtual std::set<Verb> capabilities() const { return {Verb::Read, Verb::Invoke, Verb::Write}; }
};

class BindingRegistry {
 public:
  // Schemes are stored lowercase.
  void add(std::string scheme, std::shared_ptr<ProtocolBinding> binding);
  std::shared_ptr<ProtocolBinding> find(std::string scheme) const;
  // Throws NoBindingError.
  std::shared_ptr<ProtocolBinding> require(const std::string& scheme) const;
  std::vector<std::string> schemes() const;

 private:
  mutable std::mutex mutex_;
  std::map<std::string, std::shared_ptr<ProtocolBinding>> bindings_;
};

struct ResolvedRequest {
  std::string target;
  Verb verb = Verb::Read;
  std::string mediaType;
  std::optional<std::string> payload;

  std::string scheme() const;
};

// "read" -> Read, "invoke" -> Invoke, "write" -> Write, matched as substrings
// of each rel in order. Without any rel the interaction kind decides.
Verb verbFor(const td::Form& form, td::InteractionKind kind);

// Uses the first form. Payload is the canonical JSON of `input` and is
// present exactly when the interaction declares an input schema.
ResolvedRequest resolve(const std::string& baseIri, const td::Interaction& interaction,
                        const std::optional<td::DataValue>& input);

// Like resolve(), but picks the first form whose rel maps to `verb`, falling
// back to the first form with `verb` forced.
ResolvedRequest resolveFor(Verb verb, const std::string& baseIri, const td::Interaction& interaction,
                           const std::optional<td::DataValue>& input);

// Sends through the binding for the target's scheme. Returns the decoded
// value when `outSchema` is given, nullopt (a bare acknowledgment) otherwise.
std::optional<td::DataValue> dispatch(const BindingRegistry& registry, const ResolvedRequest& request,
                                      const std::optional<td::DataSchema>& outSchema);
std::optional<td::DataValue> dispatch(ProtocolBinding& binding, const ResolvedRequest& request,
                                      const std::optional<td::DataSchema>& outSchema);

struct HttpOptions {
  std::chrono::milliseconds timeout{5000};
  // Rewrites a target authority before connecting, e.g. "localhost" to
  // "127.0.0.1:8081" when TDs name a host the test server does not own.
  std::map<std::string, std::string> authorityMap;
};

// READ -> GET, INVOKE -> POST, WRITE -> PUT.
std::shared_ptr<ProtocolBinding> httpBinding(HttpOptions options = {});

}  // namespace aat::binding
