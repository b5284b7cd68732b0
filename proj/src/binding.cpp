#include "aat/binding.h"

#include <algorithm>
#include <cctype>

namespace aat::binding {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

constexpr std::string_view kJson = "application/json";

}  // namespace

std::string_view toString(Verb verb) {
  switch (verb) {
    case Verb::Read: return "READ";
    case Verb::Invoke: return "INVOKE";
    case Verb::Write: return "WRITE";
  }
  return "?";
}

void BindingRegistry::add(std::string scheme, std::shared_ptr<ProtocolBinding> binding) {
  std::lock_guard lock(mutex_);
  bindings_[lower(std::move(scheme))] = std::move(binding);
}

std::shared_ptr<ProtocolBinding> BindingRegistry::find(std::string scheme) const {
  std::lock_guard lock(mutex_);
  auto it = bindings_.find(lower(std::move(scheme)));
  return it == bindings_.end() ? nullptr : it->second;
}

std::shared_ptr<ProtocolBinding> BindingRegistry::require(const std::string& scheme) const {
  auto b = find(scheme);
  if (!b) throw NoBindingError(lower(scheme));
  return b;
}

std::vector<std::string> BindingRegistry::schemes() const {
  std::lock_guard lock(mutex_);
  std::vector<std::string> out;
  for (const auto& [s, b] : bindings_) out.push_back(s);
  return out;
}

std::string ResolvedRequest::scheme() const {
  auto colon = target.find(':');
  return colon == std::string::npos ? std::string() : lower(target.substr(0, colon));
}

Verb verbFor(const td::Form& form, td::InteractionKind kind) {
  if (form.rel.empty()) return kind == td::InteractionKind::Action ? Verb::Invoke : Verb::Read;
  for (const auto& rel : form.rel) {
    auto r = lower(rel);
    if (r.find("read") != std::string::npos) return Verb::Read;
    if (r.find("invoke") != std::string::npos) return Verb::Invoke;
    if (r.find("write") != std::string::npos) return Verb::Write;
  }
  throw RelError("cannot map rel '" + form.rel.front() + "' to a verb");
}

namespace {

ResolvedRequest build(const td::Form& form, Verb verb, const std::string& baseIri, const td::Interaction& interaction,
                      const std::optional<td::DataValue>& input) {
  if (form.mediaType != kJson) throw UnsupportedMediaType("unsupported media type '" + form.mediaType + "'");
  ResolvedRequest req;
  req.target = td::effectiveTarget(baseIri, form.href);
  req.verb = verb;
  req.mediaType = form.mediaType;
  const auto& inSchema = verb == Verb::Write ? interaction.valueSchema() : interaction.inputSchema;
  bool wantsPayload = verb != Verb::Read && inSchema.has_value();
  if (wantsPayload) {
    if (!input) throw MissingInput("interaction '" + interaction.name + "' requires an input value");
    req.payload = input->toJsonText();
  }
  return req;
}

}  // namespace

ResolvedRequest resolve(const std::string& baseIri, const td::Interaction& interaction,
                        const std::optional<td::DataValue>& input) {
  if (interaction.forms.empty()) throw BindingError("interaction '" + interaction.name + "' has no form");
  const auto& form = interaction.forms.front();
  return build(form, verbFor(form, interaction.kind), baseIri, interaction, input);
}

ResolvedRequest resolveFor(Verb verb, const std::string& baseIri, const td::Interaction& interaction,
                           const std::optional<td::DataValue>& input) {
  if (interaction.forms.empty()) throw BindingError("interaction '" + interaction.name + "' has no form");
  for (const auto& form : interaction.forms) {
    try {
      if (verbFor(form, interaction.kind) == verb) return build(form, verb, baseIri, interaction, input);
    } catch (const RelError&) {
    }
  }
  return build(interaction.forms.front(), verb, baseIri, interaction, input);
}

std::optional<td::DataValue> dispatch(ProtocolBinding& binding, const ResolvedRequest& request,
                                      const std::optional<td::DataSchema>& outSchema) {
  Response res = binding.invoke(request.target, request.verb, request.payload, request.mediaType);
  if (res.status < 200 || res.status >= 300) throw TransportError(res.status, res.payload);
  if (!outSchema) return std::nullopt;
  td::DataValue value;
  try {
    value = td::DataValue::parse(res.payload);
  } catch (const td::TdError& e) {
    throw ResponseSchemaMismatch("response from " + request.target + " is not a data value: " + res.payload);
  }
  if (!td::conformsTo(value, *outSchema)) {
    throw ResponseSchemaMismatch("response from " + request.target + " does not match the " +
                                 std::string(td::toString(outSchema->type)) + " schema: " + res.payload);
  }
  return value;
}

std::optional<td::DataValue> dispatch(const BindingRegistry& registry, const ResolvedRequest& request,
                                      const std::optional<td::DataSchema>& outSchema) {
  auto binding = registry.require(request.scheme());
  return dispatch(*binding, request, outSchema);
}

}  // namespace aat::binding
