#include "jbc/parser.hpp"

#include <cctype>
#include <cstring>
#include <sstream>

namespace jbc {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

bool is_int_literal(const std::string& s) {
  if (s.empty()) return false;
  std::size_t i = (s[0] == '-') ? 1 : 0;
  if (i == s.size()) return false;
  for (; i < s.size(); ++i)
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
  return true;
}

bool valid_name(const std::string& s) {
  if (s.empty()) return false;
  if (!std::isalpha(static_cast<unsigned char>(s[0])) && s[0] != '_') return false;
  for (char c : s)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
  return true;
}

struct LineParser {
  std::vector<std::pair<int, std::string>> lines; // (number, trimmed content)
  std::size_t pos = 0;

  explicit LineParser(const std::string& text) {
    std::istringstream in(text);
    std::string raw;
    int no = 0;
    while (std::getline(in, raw)) {
      ++no;
      std::string t = trim(raw);
      if (t.empty()) continue;
      lines.emplace_back(no, t);
    }
  }

  bool done() const { return pos >= lines.size(); }
  int line_no() const { return done() ? (lines.empty() ? 0 : lines.back().first) : lines[pos].first; }
  const std::string& peek() const { return lines[pos].second; }
  std::string take() { return lines[pos++].second; }
};

bool starts_with_key(const std::string& line, const char* key, std::string& rest) {
  std::size_t n = std::strlen(key);
  if (line.compare(0, n, key) != 0) return false;
  rest = trim(line.substr(n));
  return true;
}

Value parse_push_literal(int line, const std::string& tok) {
  if (tok == "unit") return Unit{};
  if (tok == "null") return Null{};
  if (tok == "true") return true;
  if (tok == "false") return false;
  if (is_int_literal(tok)) return Int(tok);
  throw ParseError(line, "bad Push literal '" + tok + "'");
}

Instruction parse_instruction(int line, const std::string& text, int index) {
  std::string body = text;
  // optional 'NN:' label
  std::size_t colon = body.find(':');
  if (colon != std::string::npos) {
    std::string label = trim(body.substr(0, colon));
    bool numeric = !label.empty();
    for (char ch : label)
      if (!std::isdigit(static_cast<unsigned char>(ch))) numeric = false;
    if (!numeric) throw ParseError(line, "bad instruction label '" + label + "'");
    if (std::stoi(label) != index)
      throw ParseError(line, "label " + label + " does not match position " + std::to_string(index));
    body = trim(body.substr(colon + 1));
  }
  auto toks = split_ws(body);
  if (toks.empty()) throw ParseError(line, "empty instruction");
  auto op = op_from_name(toks[0]);
  if (!op) throw ParseError(line, "unknown instruction '" + toks[0] + "'");
  Instruction ins;
  ins.op = *op;
  auto need = [&](std::size_t n) {
    if (toks.size() != n + 1)
      throw ParseError(line, std::string(op_name(ins.op)) + " takes " + std::to_string(n) +
                                 " operand(s)");
  };
  switch (ins.op) {
    case Op::Load:
    case Op::Store:
    case Op::Goto:
    case Op::IfFalse:
      need(1);
      if (!is_int_literal(toks[1])) throw ParseError(line, "numeric operand expected");
      ins.n = std::stoi(toks[1]);
      break;
    case Op::Push:
      need(1);
      ins.lit = parse_push_literal(line, toks[1]);
      break;
    case Op::New:
    case Op::Checkcast:
      need(1);
      if (!valid_name(toks[1])) throw ParseError(line, "class name expected");
      ins.name = toks[1];
      break;
    case Op::Getfield:
    case Op::Putfield:
      need(2);
      if (!valid_name(toks[1]) || !valid_name(toks[2]))
        throw ParseError(line, "field and class name expected");
      ins.name = toks[1];
      ins.cls = toks[2];
      break;
    case Op::Invoke:
      need(2);
      if (!valid_name(toks[1]) || !is_int_literal(toks[2]))
        throw ParseError(line, "method name and argument count expected");
      ins.name = toks[1];
      ins.n = std::stoi(toks[2]);
      if (ins.n < 0) throw ParseError(line, "negative argument count");
      break;
    default:
      need(0);
      break;
  }
  return ins;
}

Method parse_method(LineParser& lp, const std::string& header, int header_line) {
  auto toks = split_ws(header);
  if (toks.size() != 2 || !valid_name(toks[1]))
    throw ParseError(header_line, "Method: wants '<return type> <name>'");
  Method m;
  m.ret_type = toks[0];
  m.name = toks[1];

  std::string rest;
  if (!lp.done() && starts_with_key(lp.peek(), "Parameters:", rest)) {
    int ln = lp.line_no();
    lp.take();
    std::istringstream in(rest);
    std::string piece;
    while (std::getline(in, piece, ',')) {
      auto pt = split_ws(piece);
      if (pt.size() != 2 || !valid_name(pt[1]))
        throw ParseError(ln, "parameter wants '<type> <name>'");
      m.params.push_back({pt[0], pt[1]});
    }
  }
  if (lp.done() || !starts_with_key(lp.peek(), "Methodbody:", rest))
    throw ParseError(lp.line_no(), "Methodbody: expected");
  lp.take();
  if (lp.done() || !starts_with_key(lp.peek(), "MaxStack:", rest) || !is_int_literal(rest))
    throw ParseError(lp.line_no(), "MaxStack: <n> expected");
  m.max_stack = std::stoi(rest);
  lp.take();
  if (lp.done() || !starts_with_key(lp.peek(), "MaxVars:", rest) || !is_int_literal(rest))
    throw ParseError(lp.line_no(), "MaxVars: <n> expected");
  m.max_vars = std::stoi(rest);
  lp.take();
  if (lp.done() || !starts_with_key(lp.peek(), "Bytecode:", rest))
    throw ParseError(lp.line_no(), "Bytecode: expected");
  lp.take();

  while (!lp.done()) {
    const std::string& line = lp.peek();
    std::string r;
    if (starts_with_key(line, "Class:", r) || starts_with_key(line, "Method:", r)) break;
    int ln = lp.line_no();
    m.body.push_back(parse_instruction(ln, lp.take(), static_cast<int>(m.body.size())));
  }
  if (m.body.empty()) throw ParseError(lp.line_no(), "empty method body");
  if (m.max_stack < 0 || m.max_vars < 0)
    throw ParseError(header_line, "negative stack or variable bound");
  return m;
}

ClassDecl parse_class(LineParser& lp) {
  ClassDecl c;
  std::string rest;
  if (lp.done() || !starts_with_key(lp.peek(), "Name:", rest) || !valid_name(rest))
    throw ParseError(lp.line_no(), "Name: <class> expected");
  c.name = rest;
  lp.take();
  if (lp.done() || !starts_with_key(lp.peek(), "Classbody:", rest))
    throw ParseError(lp.line_no(), "Classbody: expected");
  lp.take();
  if (lp.done() || !starts_with_key(lp.peek(), "Superclass:", rest) || !valid_name(rest))
    throw ParseError(lp.line_no(), "Superclass: <class> expected");
  c.super = rest;
  lp.take();
  if (lp.done() || !starts_with_key(lp.peek(), "Fields:", rest))
    throw ParseError(lp.line_no(), "Fields: expected");
  lp.take();
  while (!lp.done() && !starts_with_key(lp.peek(), "Methods:", rest)) {
    int ln = lp.line_no();
    auto toks = split_ws(lp.take());
    if (toks.size() != 2 || !valid_name(toks[1]))
      throw ParseError(ln, "field wants '<type> <name>'");
    c.fields.push_back({toks[0], toks[1]});
  }
  if (lp.done()) throw ParseError(lp.line_no(), "Methods: expected");
  lp.take(); // Methods:
  while (!lp.done()) {
    const std::string& line = lp.peek();
    if (starts_with_key(line, "Class:", rest)) break;
    int ln = lp.line_no();
    if (!starts_with_key(line, "Method:", rest))
      throw ParseError(ln, "Method: or Class: expected");
    lp.take();
    c.methods.push_back(parse_method(lp, rest, ln));
  }
  return c;
}

} // namespace

Program parse_program(const std::string& text) {
  LineParser lp(text);
  Program p;
  std::string rest;
  while (!lp.done()) {
    if (!starts_with_key(lp.peek(), "Class:", rest))
      throw ParseError(lp.line_no(), "Class: expected");
    lp.take();
    p.classes.push_back(parse_class(lp));
  }
  if (p.classes.empty()) throw ParseError(0, "no classes");
  for (std::size_t i = 0; i < p.classes.size(); ++i)
    for (std::size_t j = i + 1; j < p.classes.size(); ++j)
      if (p.classes[i].name == p.classes[j].name)
        throw ParseError(0, "duplicate class " + p.classes[i].name);
  return p;
}

std::string render_instruction(const Instruction& ins) {
  std::string out = op_name(ins.op);
  switch (ins.op) {
    case Op::Load:
    case Op::Store:
    case Op::Goto:
    case Op::IfFalse:
      out += " " + std::to_string(ins.n);
      break;
    case Op::Push:
      out += " " + render_value(ins.lit);
      break;
    case Op::New:
    case Op::Checkcast:
      out += " " + ins.name;
      break;
    case Op::Getfield:
    case Op::Putfield:
      out += " " + ins.name + " " + ins.cls;
      break;
    case Op::Invoke:
      out += " " + ins.name + " " + std::to_string(ins.n);
      break;
    default:
      break;
  }
  return out;
}

std::string render_program(const Program& p) {
  std::ostringstream out;
  for (const auto& c : p.classes) {
    out << "Class:\n";
    out << "  Name: " << c.name << "\n";
    out << "  Classbody:\n";
    out << "    Superclass: " << c.super << "\n";
    out << "    Fields:\n";
    for (const auto& f : c.fields) out << "      " << f.type << " " << f.name << "\n";
    out << "    Methods:\n";
    for (const auto& m : c.methods) {
      out << "      Method: " << m.ret_type << " " << m.name << "\n";
      if (!m.params.empty()) {
        out << "        Parameters: ";
        for (std::size_t i = 0; i < m.params.size(); ++i) {
          if (i) out << ", ";
          out << m.params[i].type << " " << m.params[i].name;
        }
        out << "\n";
      }
      out << "        Methodbody:\n";
      out << "          MaxStack: " << m.max_stack << "\n";
      out << "          MaxVars: " << m.max_vars << "\n";
      out << "          Bytecode:\n";
      int width = m.body.size() > 100 ? static_cast<int>(std::to_string(m.body.size() - 1).size()) : 2;
      for (std::size_t i = 0; i < m.body.size(); ++i) {
        std::string label = std::to_string(i);
        while (static_cast<int>(label.size()) < width) label.insert(label.begin(), '0');
        out << "            " << label << ": " << render_instruction(m.body[i]) << "\n";
      }
    }
  }
  return out.str();
}

} // namespace jbc
