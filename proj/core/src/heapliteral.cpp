#include "jbc/heapliteral.hpp"

#include <cctype>
#include <functional>

namespace jbc {

namespace {

// Recursive-descent cursor over one literal.
struct Cursor {
  const std::string& s;
  std::size_t i = 0;

  void skip_ws() {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
  }
  bool eat(char c) {
    skip_ws();
    if (i < s.size() && s[i] == c) {
      ++i;
      return true;
    }
    return false;
  }
  char peek() {
    skip_ws();
    return i < s.size() ? s[i] : '\0';
  }
  std::string word() {
    skip_ws();
    std::size_t b = i;
    while (i < s.size() && (std::isalnum(static_cast<unsigned char>(s[i])) || s[i] == '_')) ++i;
    return s.substr(b, i - b);
  }
  std::string number() {
    skip_ws();
    std::size_t b = i;
    if (i < s.size() && s[i] == '-') ++i;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
    return s.substr(b, i - b);
  }
  [[noreturn]] void fail(const std::string& msg) {
    throw LiteralError(msg + " at offset " + std::to_string(i) + " in '" + s + "'");
  }
};

} // namespace

Value LiteralBuilder::parse(const std::string& text) {
  Cursor c{text};

  std::function<Value()> value = [&]() -> Value {
    c.skip_ws();
    char ch = c.peek();
    if (ch == '@') {
      ++c.i;
      std::string tag = c.word();
      auto it = tags_.find(tag);
      if (it == tags_.end()) c.fail("unknown back reference @" + tag);
      return Addr{it->second};
    }
    std::string tag;
    if (ch == '#') {
      ++c.i;
      tag = c.word();
      if (tag.empty()) c.fail("empty tag");
    }
    if (ch == '-' || std::isdigit(static_cast<unsigned char>(c.peek()))) {
      std::string n = c.number();
      if (n.empty() || n == "-") c.fail("bad number");
      return Int(n);
    }
    std::string w = c.word();
    if (w.empty()) c.fail("value expected");
    if (tag.empty()) {
      if (w == "null") return Null{};
      if (w == "unit") return Unit{};
      if (w == "true") return true;
      if (w == "false") return false;
    }
    const ClassDecl* cd = prog_.find_class(w);
    if (!cd) c.fail("unknown class " + w);
    if (!c.eat('{')) c.fail("'{' expected after " + w);

    auto table = prog_.field_table(w);
    std::uint32_t addr = next_addr_++;
    if (!tag.empty()) {
      if (tags_.count(tag)) c.fail("tag #" + tag + " reused");
      tags_[tag] = addr;
    }
    HeapObj obj;
    obj.cls = w;
    for (const auto& slot : table) obj.fields.push_back(default_field_value(prog_, slot.type));
    heap_.emplace(addr, obj);

    if (!c.eat('}')) {
      while (true) {
        std::string fname = c.word();
        if (fname.empty()) c.fail("field name expected");
        if (!c.eat(':')) c.fail("':' expected after " + fname);
        Value fv = value();
        bool found = false;
        for (std::size_t k = 0; k < table.size(); ++k)
          if (table[k].name == fname) {
            heap_.at(addr).fields[k] = fv;
            found = true;
            break;
          }
        if (!found) c.fail("no field " + fname + " in " + w);
        if (c.eat('}')) break;
        if (!c.eat(',')) c.fail("',' or '}' expected");
      }
    }
    return Addr{addr};
  };

  Value v = value();
  c.skip_ws();
  if (c.i != text.size()) c.fail("trailing input");
  return v;
}

} // namespace jbc
