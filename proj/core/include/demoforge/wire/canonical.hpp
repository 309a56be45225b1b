#pragma once

// Canonical text form used on the wire, in every on-disk record log and in
// HTTP bodies: one JSON object, keys sorted bytewise, no whitespace, UTF-8,
// doubles in shortest round-trip form.

#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace demoforge::wire {

using Json = nlohmann::json;

/// Largest integer carried on the wire (exactly representable as a double).
inline constexpr std::int64_t kMaxWireInteger = (std::int64_t{1} << 53) - 1;

class WireError : public std::runtime_error {
 public:
  enum class Kind { malformed, unknown_type, schema_violation, out_of_range, non_finite };

  WireError(Kind kind, const std::string& message) : std::runtime_error(message), kind_(kind) {}
  Kind kind() const { return kind_; }
  /// Wire error code reported to peers for this failure.
  const char* code() const;

 private:
  Kind kind_;
};

const char* to_string(WireError::Kind kind);

/// Serializes `value` canonically. Throws WireError(non_finite) if any number
/// is NaN or infinite and WireError(schema_violation) on invalid UTF-8.
std::string encode_canonical(const Json& value);

/// Parses text into a JSON value. Never throws anything but WireError.
Json parse_text(std::string_view text);

/// Strict field access over one JSON object: every accessor consumes a key;
/// finish() rejects keys nobody asked for.
class FieldReader {
 public:
  FieldReader(const Json& object, std::string context);

  bool has(std::string_view key) const;
  const Json& raw(std::string_view key);
  std::int64_t integer(std::string_view key, std::int64_t min = 0, std::int64_t max = kMaxWireInteger);
  double number(std::string_view key);
  std::string string(std::string_view key);
  std::optional<std::string> nullable_string(std::string_view key);
  bool boolean(std::string_view key);
  std::vector<double> numbers(std::string_view key, std::optional<std::size_t> expected = std::nullopt);
  const Json& object(std::string_view key);
  const Json& array(std::string_view key);

  void finish() const;
  [[noreturn]] void fail(const std::string& message) const;
  [[noreturn]] void out_of_range(const std::string& message) const;

  const std::string& context() const { return context_; }

 private:
  const Json& field(std::string_view key);

  const Json& object_;
  std::string context_;
  std::set<std::string, std::less<>> consumed_;
};

/// Numeric value check shared by readers: must be a JSON number and finite.
double finite_number(const Json& v, const std::string& context);

}  // namespace demoforge::wire
