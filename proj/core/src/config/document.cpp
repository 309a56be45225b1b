#include "demoforge/config/document.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

namespace demoforge::config {

namespace {

constexpr int kMaxDepth = 32;

enum class Tok { ident, number, string, equals, lbrace, rbrace, lbracket, rbracket, comma, semicolon, newline, end };

struct Token {
  Tok kind;
  std::string text;
  int line;
};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '-';
}

class Lexer {
 public:
  Lexer(std::string_view text, const std::string& source) : text_(text), source_(source) {}

  Token next() {
    skip_blank();
    if (pos_ >= text_.size()) return {Tok::end, {}, line_};
    const char c = text_[pos_];
    const int line = line_;
    switch (c) {
      case '\n': ++pos_; ++line_; return {Tok::newline, {}, line};
      case '=': ++pos_; return {Tok::equals, "=", line};
      case '{': ++pos_; return {Tok::lbrace, "{", line};
      case '}': ++pos_; return {Tok::rbrace, "}", line};
      case '[': ++pos_; return {Tok::lbracket, "[", line};
      case ']': ++pos_; return {Tok::rbracket, "]", line};
      case ',': ++pos_; return {Tok::comma, ",", line};
      case ';': ++pos_; return {Tok::semicolon, ";", line};
      case '"': return lex_string();
      default: break;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '+' || c == '.') return lex_number();
    if (ident_start(c)) {
      const std::size_t start = pos_;
      while (pos_ < text_.size() && ident_char(text_[pos_])) ++pos_;
      return {Tok::ident, std::string(text_.substr(start, pos_ - start)), line};
    }
    throw ParseError(source_, line, std::string("unexpected character '") + c + "'");
  }

 private:
  void skip_blank() {
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (c == ' ' || c == '\t' || c == '\r') {
        ++pos_;
      } else if (c == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  Token lex_number() {
    const std::size_t start = pos_;
    if (text_[pos_] == '-' || text_[pos_] == '+') ++pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.' ||
            ((text_[pos_] == '-' || text_[pos_] == '+') && (text_[pos_ - 1] == 'e' || text_[pos_ - 1] == 'E')))) {
      ++pos_;
    }
    return {Tok::number, std::string(text_.substr(start, pos_ - start)), line_};
  }

  Token lex_string() {
    const int line = line_;
    ++pos_;
    std::string out;
    while (true) {
      if (pos_ >= text_.size() || text_[pos_] == '\n') throw ParseError(source_, line, "unterminated string");
      const char c = text_[pos_++];
      if (c == '"') break;
      if (c != '\\') {
        out.push_back(c);
        continue;
      }
      if (pos_ >= text_.size()) throw ParseError(source_, line, "unterminated escape");
      const char e = text_[pos_++];
      switch (e) {
        case 'n': out.push_back('\n'); break;
        case 't': out.push_back('\t'); break;
        case '"': out.push_back('"'); break;
        case '\\': out.push_back('\\'); break;
        default: throw ParseError(source_, line, std::string("unknown escape '\\") + e + "'");
      }
    }
    return {Tok::string, std::move(out), line};
  }

  std::string_view text_;
  const std::string& source_;
  std::size_t pos_ = 0;
  int line_ = 1;
};

class Parser {
 public:
  Parser(std::string_view text, std::string source) : source_(std::move(source)), lexer_(text, source_) {
    advance();
  }

  Document parse_document() {
    Document doc;
    doc.root.source = source_;
    doc.root.line = 1;
    parse_body(doc.root, 0, /*top_level=*/true);
    return doc;
  }

 private:
  void advance() { current_ = lexer_.next(); }

  [[noreturn]] void fail(const std::string& message) const { throw ParseError(source_, current_.line, message); }

  void parse_body(Node& parent, int depth, bool top_level) {
    if (depth > kMaxDepth) fail("sections nested too deeply");
    while (true) {
      while (current_.kind == Tok::newline || current_.kind == Tok::semicolon) advance();
      if (current_.kind == Tok::end) {
        if (!top_level) fail("missing '}'");
        return;
      }
      if (current_.kind == Tok::rbrace) {
        if (top_level) fail("unbalanced '}'");
        advance();
        return;
      }
      parent.children.push_back(parse_statement(depth));
    }
  }

  Node parse_statement(int depth) {
    if (current_.kind != Tok::ident) fail("expected a key, found '" + current_.text + "'");
    Node node;
    node.key = current_.text;
    node.line = current_.line;
    node.source = source_;
    advance();

    if (current_.kind == Tok::equals) {
      advance();
      node.value = parse_value(0);
      expect_statement_end();
      return node;
    }
    while (current_.kind == Tok::ident || current_.kind == Tok::number || current_.kind == Tok::string) {
      node.labels.push_back(parse_scalar());
    }
    if (current_.kind == Tok::lbrace) {
      advance();
      parse_body(node, depth + 1, false);
      return node;
    }
    expect_statement_end();
    return node;
  }

  void expect_statement_end() {
    switch (current_.kind) {
      case Tok::newline:
      case Tok::semicolon:
      case Tok::end:
      case Tok::rbrace:
        return;
      default:
        fail("expected end of statement, found '" + current_.text + "'");
    }
  }

  Value parse_scalar() {
    Value v;
    v.line = current_.line;
    switch (current_.kind) {
      case Tok::string:
        v.kind = Value::Kind::string;
        v.text = current_.text;
        break;
      case Tok::ident:
        v.kind = Value::Kind::word;
        v.text = current_.text;
        break;
      case Tok::number:
        parse_number(current_.text, v);
        break;
      default:
        fail("expected a value");
    }
    advance();
    return v;
  }

  void parse_number(const std::string& text, Value& v) const {
    const bool is_real = text.find_first_of(".eE") != std::string::npos;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    if (*first == '+') ++first;
    if (is_real) {
      v.kind = Value::Kind::real;
      // std::from_chars for double is available in GCC 11.
      const auto [ptr, ec] = std::from_chars(first, last, v.real);
      if (ec != std::errc() || ptr != last) fail("malformed number '" + text + "'");
    } else {
      v.kind = Value::Kind::integer;
      const auto [ptr, ec] = std::from_chars(first, last, v.integer);
      if (ec != std::errc() || ptr != last) fail("malformed integer '" + text + "'");
    }
  }

  Value parse_value(int depth) {
    if (depth > kMaxDepth) fail("lists nested too deeply");
    if (current_.kind != Tok::lbracket) return parse_scalar();
    Value list;
    list.kind = Value::Kind::list;
    list.line = current_.line;
    advance();
    skip_newlines();
    if (current_.kind == Tok::rbracket) {
      advance();
      return list;
    }
    while (true) {
      list.items.push_back(parse_value(depth + 1));
      skip_newlines();
      if (current_.kind == Tok::comma) {
        advance();
        skip_newlines();
        continue;
      }
      if (current_.kind == Tok::rbracket) {
        advance();
        return list;
      }
      fail("expected ',' or ']' in list");
    }
  }

  void skip_newlines() {
    while (current_.kind == Tok::newline) advance();
  }

  std::string source_;
  Lexer lexer_;
  Token current_{Tok::end, {}, 1};
};

const char* kind_name(Value::Kind k) {
  switch (k) {
    case Value::Kind::integer: return "integer";
    case Value::Kind::real: return "number";
    case Value::Kind::string: return "string";
    case Value::Kind::word: return "word";
    case Value::Kind::list: return "list";
  }
  return "value";
}

}  // namespace

ParseError::ParseError(std::string source, int line, const std::string& message)
    : std::runtime_error(source + ":" + std::to_string(line) + ": " + message), source_(std::move(source)), line_(line) {}

std::string Value::describe() const { return kind_name(kind); }

const Node* Node::find(std::string_view name) const {
  for (const auto& c : children) {
    if (c.key == name) return &c;
  }
  return nullptr;
}

const Node& Node::require(std::string_view name) const {
  const Node* n = find(name);
  if (n == nullptr) fail("missing field '" + std::string(name) + "'");
  return *n;
}

std::vector<const Node*> Node::all(std::string_view name) const {
  std::vector<const Node*> out;
  for (const auto& c : children) {
    if (c.key == name) out.push_back(&c);
  }
  return out;
}

void Node::fail(const std::string& message) const { throw ParseError(source, line, message); }

namespace {

const Value& assigned(const Node& parent, std::string_view name) {
  const Node& n = parent.require(name);
  if (!n.is_assignment()) n.fail("field '" + std::string(name) + "' must be assigned with '='");
  return *n.value;
}

double as_number(const Node& owner, std::string_view name, const Value& v) {
  if (!v.is_number()) {
    throw ParseError(owner.source, v.line, "field '" + std::string(name) + "' expected a number, found " + v.describe());
  }
  return v.number();
}

}  // namespace

double Node::number(std::string_view name) const { return as_number(*this, name, assigned(*this, name)); }

std::optional<double> Node::optional_number(std::string_view name) const {
  if (find(name) == nullptr) return std::nullopt;
  return number(name);
}

std::int64_t Node::integer(std::string_view name) const {
  const Value& v = assigned(*this, name);
  if (v.kind != Value::Kind::integer) {
    throw ParseError(source, v.line, "field '" + std::string(name) + "' expected an integer, found " + v.describe());
  }
  return v.integer;
}

std::string Node::text(std::string_view name) const {
  const Value& v = assigned(*this, name);
  if (!v.is_text()) {
    throw ParseError(source, v.line, "field '" + std::string(name) + "' expected text, found " + v.describe());
  }
  return v.text;
}

std::optional<std::string> Node::optional_text(std::string_view name) const {
  if (find(name) == nullptr) return std::nullopt;
  return text(name);
}

bool Node::boolean(std::string_view name) const {
  const Value& v = assigned(*this, name);
  if (v.kind == Value::Kind::word && (v.text == "true" || v.text == "false")) return v.text == "true";
  throw ParseError(source, v.line, "field '" + std::string(name) + "' expected true or false");
}

std::optional<bool> Node::optional_boolean(std::string_view name) const {
  if (find(name) == nullptr) return std::nullopt;
  return boolean(name);
}

std::vector<double> Node::numbers(std::string_view name, std::optional<std::size_t> expected) const {
  const Value& v = assigned(*this, name);
  if (v.kind != Value::Kind::list) {
    throw ParseError(source, v.line, "field '" + std::string(name) + "' expected a list, found " + v.describe());
  }
  if (expected && v.items.size() != *expected) {
    throw ParseError(source, v.line,
                     "field '" + std::string(name) + "' expected " + std::to_string(*expected) + " numbers, found " +
                         std::to_string(v.items.size()));
  }
  std::vector<double> out;
  out.reserve(v.items.size());
  for (const auto& item : v.items) out.push_back(as_number(*this, name, item));
  return out;
}

std::string Node::label_text(std::size_t index) const {
  if (index >= labels.size() || !labels[index].is_text()) {
    fail("section '" + key + "' expects a name label");
  }
  return labels[index].text;
}

void Node::expect_only(std::initializer_list<std::string_view> allowed) const {
  for (const auto& c : children) {
    bool ok = false;
    for (auto a : allowed) ok = ok || c.key == a;
    if (!ok) c.fail("unknown field '" + c.key + "' in '" + (key.empty() ? std::string("document") : key) + "'");
  }
}

Document parse(std::string_view text, std::string source) { return Parser(text, std::move(source)).parse_document(); }

Document parse_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path.string(), 0, "cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path.string());
}

}  // namespace demoforge::config
