#include "riskkit/toml_lite.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <set>

#include "riskkit/errors.hpp"

namespace riskkit {

namespace {

struct Parser {
  const std::string& text;
  std::size_t pos = 0;
  int line = 1;

  explicit Parser(const std::string& t) : text(t) {}

  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError("config line " + std::to_string(line) + ": " + msg);
  }

  bool eof() const { return pos >= text.size(); }
  char peek() const { return text[pos]; }

  char take() {
    char c = text[pos++];
    if (c == '\n') ++line;
    return c;
  }

  void skip_spaces() {
    while (!eof() && (peek() == ' ' || peek() == '\t' || peek() == '\r')) ++pos;
  }

  void skip_comment() {
    if (!eof() && peek() == '#')
      while (!eof() && peek() != '\n') ++pos;
  }

  // spaces, comments, and newlines -- between statements and inside arrays
  void skip_filler() {
    for (;;) {
      skip_spaces();
      skip_comment();
      if (!eof() && peek() == '\n') {
        take();
        continue;
      }
      return;
    }
  }

  // spaces and an optional trailing comment; the statement must end here
  void expect_eol() {
    skip_spaces();
    skip_comment();
    if (eof()) return;
    if (peek() != '\n') fail("unexpected text after value");
    take();
  }

  static bool is_bare(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
  }

  std::string bare_key() {
    std::size_t start = pos;
    while (!eof() && is_bare(peek())) ++pos;
    if (pos == start) fail("expected a key");
    return text.substr(start, pos - start);
  }

  // "a.b.c" -> path segments
  std::vector<std::string> dotted_key() {
    std::vector<std::string> path{bare_key()};
    for (;;) {
      skip_spaces();
      if (eof() || peek() != '.') return path;
      take();
      skip_spaces();
      path.push_back(bare_key());
    }
  }

  json string_value() {
    char quote = take();  // " or '
    std::string out;
    while (!eof() && peek() != quote && peek() != '\n') {
      char c = take();
      if (quote == '"' && c == '\\') {
        if (eof()) fail("unterminated escape");
        char e = take();
        switch (e) {
          case '"': out += '"'; break;
          case '\\': out += '\\'; break;
          case 'n': out += '\n'; break;
          case 't': out += '\t'; break;
          case 'r': out += '\r'; break;
          default: fail(std::string("unsupported escape \\") + e);
        }
      } else {
        out += c;
      }
    }
    if (eof() || peek() != quote) fail("unterminated string");
    take();
    return json(out);
  }

  json number_or_bool() {
    std::size_t start = pos;
    while (!eof() && (is_bare(peek()) || peek() == '+' || peek() == '.')) ++pos;
    std::string tok = text.substr(start, pos - start);
    if (tok.empty()) fail("expected a value");
    if (tok == "true") return json(true);
    if (tok == "false") return json(false);
    if (tok.find_first_of(".eE") == std::string::npos) {
      std::int64_t iv = 0;
      auto [ip, iec] = std::from_chars(tok.data(), tok.data() + tok.size(), iv);
      if (iec == std::errc{} && ip == tok.data() + tok.size()) return json(iv);
    }
    double dv = 0;
    auto [dp, dec] = std::from_chars(tok.data(), tok.data() + tok.size(), dv);
    if (dec == std::errc{} && dp == tok.data() + tok.size()) return json(dv);
    fail("malformed value '" + tok + "'");
  }

  json array_value() {
    take();  // [
    json arr = json::array();
    for (;;) {
      skip_filler();
      if (eof()) fail("unterminated array");
      if (peek() == ']') {
        take();
        return arr;
      }
      arr.push_back(value());
      skip_filler();
      if (eof()) fail("unterminated array");
      if (peek() == ',') {
        take();
        continue;
      }
      if (peek() == ']') {
        take();
        return arr;
      }
      fail("expected ',' or ']' in array");
    }
  }

  json value() {
    if (eof()) fail("expected a value");
    char c = peek();
    if (c == '"' || c == '\'') return string_value();
    if (c == '[') return array_value();
    if (c == '-' || c == '+' || c == '.' || is_bare(c)) return number_or_bool();
    fail(std::string("unexpected character '") + c + "'");
  }
};

json* descend(json& root, const std::vector<std::string>& path, Parser& p) {
  json* node = &root;
  for (const auto& seg : path) {
    if (!node->contains(seg)) (*node)[seg] = json::object();
    node = &(*node)[seg];
    if (!node->is_object()) p.fail("'" + seg + "' is already a value, not a table");
  }
  return node;
}

}  // namespace

json parse_toml(const std::string& text) {
  Parser p(text);
  json root = json::object();
  json* table = &root;
  std::set<std::string> headers_seen;
  for (;;) {
    p.skip_filler();
    if (p.eof()) return root;
    if (p.peek() == '[') {
      p.take();
      p.skip_spaces();
      auto path = p.dotted_key();
      p.skip_spaces();
      if (p.eof() || p.peek() != ']') p.fail("expected ']' to close table header");
      p.take();
      std::string joined;
      for (const auto& seg : path) joined += "." + seg;
      if (!headers_seen.insert(joined).second)
        p.fail("duplicate table header [" + joined.substr(1) + "]");
      table = descend(root, path, p);
      p.expect_eol();
      continue;
    }
    auto path = p.dotted_key();
    p.skip_spaces();
    if (p.eof() || p.peek() != '=') p.fail("expected '=' after key");
    p.take();
    p.skip_spaces();
    json v = p.value();
    json* parent = table;
    if (path.size() > 1)
      parent = descend(*table, {path.begin(), path.end() - 1}, p);
    const std::string& leaf = path.back();
    if (parent->contains(leaf)) p.fail("duplicate key '" + leaf + "'");
    (*parent)[leaf] = std::move(v);
    p.expect_eol();
  }
}

json load_toml(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_toml(text);
}

}  // namespace riskkit
