#include "demoforge/wire/canonical.hpp"

#include <cmath>

namespace demoforge::wire {

namespace {

void check_finite(const Json& v) {
  // Iterative walk: record payloads are shallow but decoded input is not.
  std::vector<const Json*> stack{&v};
  while (!stack.empty()) {
    const Json* j = stack.back();
    stack.pop_back();
    if (j->is_number_float() && !std::isfinite(j->get<double>())) {
      throw WireError(WireError::Kind::non_finite, "non-finite number cannot be encoded");
    }
    if (j->is_structured()) {
      for (const auto& child : *j) stack.push_back(&child);
    }
  }
}

}  // namespace

const char* to_string(WireError::Kind kind) {
  switch (kind) {
    case WireError::Kind::malformed: return "malformed";
    case WireError::Kind::unknown_type: return "unknown_type";
    case WireError::Kind::schema_violation: return "schema_violation";
    case WireError::Kind::out_of_range: return "out_of_range";
    case WireError::Kind::non_finite: return "non_finite";
  }
  return "unknown";
}

const char* WireError::code() const {
  return kind_ == Kind::out_of_range ? "out_of_range" : "schema_violation";
}

std::string encode_canonical(const Json& value) {
  check_finite(value);
  try {
    return value.dump(-1, ' ', false, Json::error_handler_t::strict);
  } catch (const Json::exception& e) {
    throw WireError(WireError::Kind::schema_violation, std::string("cannot encode: ") + e.what());
  }
}

Json parse_text(std::string_view text) {
  Json out;
  try {
    out = Json::parse(text.begin(), text.end(), nullptr, /*allow_exceptions=*/false);
  } catch (const std::exception& e) {
    throw WireError(WireError::Kind::malformed, std::string("malformed text: ") + e.what());
  }
  if (out.is_discarded()) throw WireError(WireError::Kind::malformed, "malformed text");
  return out;
}

double finite_number(const Json& v, const std::string& context) {
  if (!v.is_number()) throw WireError(WireError::Kind::schema_violation, context + ": expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw WireError(WireError::Kind::non_finite, context + ": number is not finite");
  return d;
}

FieldReader::FieldReader(const Json& object, std::string context) : object_(object), context_(std::move(context)) {
  if (!object_.is_object()) fail("expected an object");
}

void FieldReader::fail(const std::string& message) const {
  throw WireError(WireError::Kind::schema_violation, context_ + ": " + message);
}

void FieldReader::out_of_range(const std::string& message) const {
  throw WireError(WireError::Kind::out_of_range, context_ + ": " + message);
}

bool FieldReader::has(std::string_view key) const { return object_.contains(key); }

const Json& FieldReader::field(std::string_view key) {
  const auto it = object_.find(key);
  if (it == object_.end()) fail("missing field '" + std::string(key) + "'");
  consumed_.emplace(key);
  return *it;
}

const Json& FieldReader::raw(std::string_view key) { return field(key); }

std::int64_t FieldReader::integer(std::string_view key, std::int64_t min, std::int64_t max) {
  const Json& v = field(key);
  std::int64_t out = 0;
  if (v.is_number_unsigned()) {
    const auto u = v.get<std::uint64_t>();
    if (u > static_cast<std::uint64_t>(kMaxWireInteger)) out_of_range("'" + std::string(key) + "' too large");
    out = static_cast<std::int64_t>(u);
  } else if (v.is_number_integer()) {
    out = v.get<std::int64_t>();
  } else {
    fail("'" + std::string(key) + "' must be an integer");
  }
  if (out < min || out > max) {
    out_of_range("'" + std::string(key) + "'=" + std::to_string(out) + " outside [" + std::to_string(min) + ", " +
                 std::to_string(max) + "]");
  }
  return out;
}

double FieldReader::number(std::string_view key) {
  return finite_number(field(key), context_ + "." + std::string(key));
}

std::string FieldReader::string(std::string_view key) {
  const Json& v = field(key);
  if (!v.is_string()) fail("'" + std::string(key) + "' must be a string");
  return v.get<std::string>();
}

std::optional<std::string> FieldReader::nullable_string(std::string_view key) {
  const Json& v = field(key);
  if (v.is_null()) return std::nullopt;
  if (!v.is_string()) fail("'" + std::string(key) + "' must be a string or null");
  return v.get<std::string>();
}

bool FieldReader::boolean(std::string_view key) {
  const Json& v = field(key);
  if (!v.is_boolean()) fail("'" + std::string(key) + "' must be a boolean");
  return v.get<bool>();
}

std::vector<double> FieldReader::numbers(std::string_view key, std::optional<std::size_t> expected) {
  const Json& v = field(key);
  if (!v.is_array()) fail("'" + std::string(key) + "' must be an array");
  if (expected && v.size() != *expected) {
    fail("'" + std::string(key) + "' must have " + std::to_string(*expected) + " elements");
  }
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& item : v) out.push_back(finite_number(item, context_ + "." + std::string(key)));
  return out;
}

const Json& FieldReader::object(std::string_view key) {
  const Json& v = field(key);
  if (!v.is_object()) fail("'" + std::string(key) + "' must be an object");
  return v;
}

const Json& FieldReader::array(std::string_view key) {
  const Json& v = field(key);
  if (!v.is_array()) fail("'" + std::string(key) + "' must be an array");
  return v;
}

void FieldReader::finish() const {
  for (const auto& [key, _] : object_.items()) {
    if (!consumed_.contains(key)) fail("unknown field '" + key + "'");
  }
}

}  // namespace demoforge::wire
