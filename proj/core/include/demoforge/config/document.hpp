#pragma once

// Reader for the line-oriented declarative text format shared by robot specs,
// scene specs, command scripts and the service config file. The grammar is
// documented in docs/config-format.md.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace demoforge::config {

/// Raised for both syntax errors and schema violations; always carries the
/// offending line so callers can print "file:line: message".
class ParseError : public std::runtime_error {
 public:
  ParseError(std::string source, int line, const std::string& message);

  const std::string& source() const { return source_; }
  int line() const { return line_; }

 private:
  std::string source_;
  int line_;
};

struct Value {
  enum class Kind { integer, real, string, word, list };

  Kind kind = Kind::word;
  std::int64_t integer = 0;
  double real = 0.0;
  std::string text;  // string and word payload
  std::vector<Value> items;
  int line = 0;

  bool is_number() const { return kind == Kind::integer || kind == Kind::real; }
  double number() const { return kind == Kind::integer ? static_cast<double>(integer) : real; }
  /// Strings and bare words both read as text.
  bool is_text() const { return kind == Kind::string || kind == Kind::word; }
  std::string describe() const;
};

/// One statement. Either an assignment (`key = value`) or a section
/// (`key label... { ... }`, the brace block being optional).
struct Node {
  std::string key;
  std::vector<Value> labels;
  std::optional<Value> value;
  std::vector<Node> children;
  int line = 0;
  std::string source;

  bool is_assignment() const { return value.has_value(); }

  const Node* find(std::string_view name) const;
  const Node& require(std::string_view name) const;
  std::vector<const Node*> all(std::string_view name) const;

  // Typed accessors on child assignments. All throw ParseError on a missing
  // field or wrong type.
  double number(std::string_view name) const;
  std::optional<double> optional_number(std::string_view name) const;
  std::int64_t integer(std::string_view name) const;
  std::string text(std::string_view name) const;
  std::optional<std::string> optional_text(std::string_view name) const;
  bool boolean(std::string_view name) const;
  std::optional<bool> optional_boolean(std::string_view name) const;
  std::vector<double> numbers(std::string_view name, std::optional<std::size_t> expected = std::nullopt) const;

  /// Single label used as a section name (`joint shoulder { ... }`).
  std::string label_text(std::size_t index) const;

  /// Rejects any child key not in `allowed`.
  void expect_only(std::initializer_list<std::string_view> allowed) const;

  [[noreturn]] void fail(const std::string& message) const;
};

struct Document {
  Node root;  // key is empty; statements are the root's children
};

Document parse(std::string_view text, std::string source = "<memory>");
Document parse_file(const std::filesystem::path& path);

}  // namespace demoforge::config
