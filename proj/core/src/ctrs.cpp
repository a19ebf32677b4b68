#include "jbc/ctrs.hpp"

#include "jbc/heapprops.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <sstream>
#include <stdexcept>

namespace jbc {

namespace {

std::uint32_t fresh_base(const AbstractState& s) {
  std::uint32_t m = 0;
  for (const auto& [a, obj] : s.heap) m = std::max(m, a);
  return m + 1;
}

struct TermBuilder {
  const AnalysisContext& ctx;
  const AbstractState& s;
  std::uint32_t& fresh;

  Term value(const AbsValue& v) {
    if (std::holds_alternative<Unit>(v) || std::holds_alternative<Null>(v))
      return Term::null_sym();
    if (const Int* z = std::get_if<Int>(&v)) return Term::int_lit(*z);
    if (const bool* b = std::get_if<bool>(&v)) return Term::bool_lit(*b);
    if (const IntVar* iv = std::get_if<IntVar>(&v))
      return Term::var("i" + std::to_string(iv->id), Sort::Int);
    if (const BoolVar* bv = std::get_if<BoolVar>(&v))
      return Term::var("b" + std::to_string(bv->id), Sort::Bool);
    return object(std::get<Addr>(v).id);
  }

  Term object(std::uint32_t a) {
    auto it = s.heap.find(a);
    if (it == s.heap.end()) throw std::logic_error("dangling address in term translation");
    const AbsObject& o = it->second;
    if (!o.is_instance) return Term::var("l" + std::to_string(a), Sort::Univ);
    if (maybe_cyclic(ctx, s, a)) return Term::var("l" + std::to_string(fresh++), Sort::Univ);
    std::vector<Term> args;
    for (const auto& f : o.fields) args.push_back(value(f));
    return Term::app(o.cls, std::move(args));
  }
};

std::vector<Term> root_terms(const AnalysisContext& ctx, const AbstractState& s,
                             std::uint32_t& fresh) {
  std::vector<Term> out;
  TermBuilder tb{ctx, s, fresh};
  for_each_root(s, [&](const AbsValue& v) { out.push_back(tb.value(v)); });
  return out;
}

void subst_var(Term& t, const std::string& from, const Term& to) {
  if (t.kind == Term::Kind::Var) {
    if (t.name == from) t = to;
    return;
  }
  for (auto& a : t.args) subst_var(a, from, to);
}

std::string node_sym(int i) { return "f_" + std::to_string(i); }

} // namespace

std::vector<Term> tst(const AnalysisContext& ctx, const AbstractState& s) {
  if (s.kind != AbstractState::Kind::Triple) return {};
  std::uint32_t fresh = fresh_base(s);
  return root_terms(ctx, s, fresh);
}

CtrsRule corr_rule(const AnalysisContext& ctx, const CGraph& g, int edge_idx) {
  const CEdge& e = g.edges[edge_idx];
  const AbstractState& src = g.nodes[e.from].state;
  const AbstractState& tgt = g.nodes[e.to].state;
  if (src.kind != AbstractState::Kind::Triple)
    throw std::logic_error("rules only arise from ordinary states");

  CtrsRule r;
  r.constraint = e.constraint ? *e.constraint : Term::bool_lit(true);

  if (tgt.kind != AbstractState::Kind::Triple) {
    std::uint32_t fresh = fresh_base(src);
    r.lhs = Term::app(node_sym(e.from), root_terms(ctx, src, fresh));
    r.rhs = Term::app(tgt.kind == AbstractState::Kind::Top ? "f_top" : "f_fail", {});
    return r;
  }

  switch (e.kind) {
    case EdgeKind::Instance: {
      std::uint32_t fresh = fresh_base(src);
      auto args = root_terms(ctx, src, fresh);
      r.lhs = Term::app(node_sym(e.from), args);
      r.rhs = Term::app(node_sym(e.to), std::move(args));
      return r;
    }
    case EdgeKind::Refine: {
      std::uint32_t fresh = fresh_base(tgt);
      auto args = root_terms(ctx, tgt, fresh);
      r.lhs = Term::app(node_sym(e.from), args);
      r.rhs = Term::app(node_sym(e.to), std::move(args));
      return r;
    }
    case EdgeKind::Eval: {
      std::uint32_t fresh = std::max(fresh_base(src), fresh_base(tgt));
      auto largs = root_terms(ctx, src, fresh);
      auto rargs = root_terms(ctx, tgt, fresh);
      if (e.putfield_addr) {
        for (const auto& [q, obj] : src.heap) {
          if (obj.is_instance) continue;
          if (!may_reach(ctx, src, q, *e.putfield_addr)) continue;
          Term nv = Term::var("l" + std::to_string(fresh++), Sort::Univ);
          for (auto& t : rargs) subst_var(t, "l" + std::to_string(q), nv);
        }
      }
      r.lhs = Term::app(node_sym(e.from), std::move(largs));
      r.rhs = Term::app(node_sym(e.to), std::move(rargs));
      return r;
    }
  }
  throw std::logic_error("unhandled edge kind");
}

Ctrs emit_ctrs(const AnalysisContext& ctx, const CGraph& g) {
  Ctrs out;
  const Program& p = *ctx.prog;

  bool uses_fail = false, uses_top = false;
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    const AbstractState& s = g.nodes[i].state;
    std::ostringstream line;
    line << node_sym(static_cast<int>(i)) << ": ";
    switch (s.kind) {
      case AbstractState::Kind::Triple:
        if (!s.frames.empty()) {
          const AbsFrame& f = s.frames.back();
          line << f.cls << "." << f.method << " pc " << f.pc;
          if (is_abs_halt_state(p, s)) line << " (halted)";
        }
        break;
      case AbstractState::Kind::Failed:
        line << "failure: " << fail_reason_name(s.fail_reason) << " (written f_fail)";
        break;
      case AbstractState::Kind::Top:
        line << "overapproximation lost (written f_top)";
        break;
      case AbstractState::Kind::Bot:
        line << "unreachable";
        break;
    }
    if (g.nodes[i].widened) line << " (widened)";
    out.comments.push_back(line.str());
  }

  for (std::size_t i = 0; i < g.edges.size(); ++i) {
    const CEdge& e = g.edges[i];
    if (g.nodes[e.from].state.kind != AbstractState::Kind::Triple) continue;
    if (g.nodes[e.to].state.kind == AbstractState::Kind::Failed) uses_fail = true;
    if (g.nodes[e.to].state.kind == AbstractState::Kind::Top) uses_top = true;
    out.rules.push_back(corr_rule(ctx, g, static_cast<int>(i)));
  }

  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    const AbstractState& s = g.nodes[i].state;
    if (s.kind != AbstractState::Kind::Triple) continue;
    int arity = 0;
    for (const auto& f : s.frames)
      arity += static_cast<int>(f.stack.size() + f.regs.size());
    out.sig.push_back({node_sym(static_cast<int>(i)), arity, true});
  }
  if (uses_fail) out.sig.push_back({"f_fail", 0, true});
  if (uses_top) out.sig.push_back({"f_top", 0, true});
  out.sig.push_back({"null", 0, false});
  for (const auto& c : p.classes)
    if (c.name != "Object")
      out.sig.push_back({c.name, static_cast<int>(p.field_table(c.name).size()), false});
  return out;
}

std::string render_ctrs(const Ctrs& c) {
  std::ostringstream out;
  for (const auto& line : c.comments) out << "; " << line << "\n";
  out << "(SORTS int bool univ)\n";
  out << "(SIG\n";
  for (const auto& s : c.sig)
    out << "  (" << s.name << " " << s.arity << " " << (s.defined ? "defined" : "constructor")
        << ")\n";
  out << ")\n";
  out << "(RULES\n";
  for (const auto& r : c.rules) {
    std::set<std::pair<std::string, Sort>> vars;
    collect_vars(r.lhs, vars);
    collect_vars(r.rhs, vars);
    collect_vars(r.constraint, vars);
    if (!vars.empty()) {
      out << "  (VAR";
      for (const auto& [n, s] : vars)
        out << " " << n << ":" << (s == Sort::Int ? "int" : s == Sort::Bool ? "bool" : "univ");
      out << ")\n";
    }
    out << "  " << render_term(r.lhs) << " -> " << render_term(r.rhs) << " ["
        << render_constraint(r.constraint) << "]\n";
  }
  out << ")\n";
  return out.str();
}

// ---------------------------------------------------------------------------
// parsing

namespace {

struct Token {
  enum class Kind { LParen, RParen, LBrack, RBrack, Comma, Colon, Arrow, Op, Atom, Int, End };
  Kind kind;
  std::string text;
  int line;
};

struct Lexer {
  const std::string& src;
  std::size_t pos = 0;
  int line = 1;

  [[noreturn]] void fail(const std::string& msg) const {
    throw CtrsParseError("line " + std::to_string(line) + ": " + msg);
  }

  Token next() {
    while (pos < src.size()) {
      char c = src[pos];
      if (c == '\n') {
        ++line;
        ++pos;
        continue;
      }
      if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos;
        continue;
      }
      if (c == ';') {
        while (pos < src.size() && src[pos] != '\n') ++pos;
        continue;
      }
      break;
    }
    if (pos >= src.size()) return {Token::Kind::End, "", line};
    char c = src[pos];
    auto two = src.substr(pos, 2);
    if (c == '(') return ++pos, Token{Token::Kind::LParen, "(", line};
    if (c == ')') return ++pos, Token{Token::Kind::RParen, ")", line};
    if (c == '[') return ++pos, Token{Token::Kind::LBrack, "[", line};
    if (c == ']') return ++pos, Token{Token::Kind::RBrack, "]", line};
    if (c == ',') return ++pos, Token{Token::Kind::Comma, ",", line};
    if (c == ':') return ++pos, Token{Token::Kind::Colon, ":", line};
    if (two == "->") return pos += 2, Token{Token::Kind::Arrow, "->", line};
    if (two == "/\\" || two == "\\/" || two == "!=" || two == ">=")
      return pos += 2, Token{Token::Kind::Op, two, line};
    if (c == '=' || c == '+') return ++pos, Token{Token::Kind::Op, std::string(1, c), line};
    if (c == '-' && pos + 1 < src.size() && std::isdigit(static_cast<unsigned char>(src[pos + 1]))) {
      std::size_t start = pos++;
      while (pos < src.size() && std::isdigit(static_cast<unsigned char>(src[pos]))) ++pos;
      return {Token::Kind::Int, src.substr(start, pos - start), line};
    }
    if (c == '-') return ++pos, Token{Token::Kind::Op, "-", line};
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t start = pos;
      while (pos < src.size() && std::isdigit(static_cast<unsigned char>(src[pos]))) ++pos;
      return {Token::Kind::Int, src.substr(start, pos - start), line};
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos;
      while (pos < src.size() &&
             (std::isalnum(static_cast<unsigned char>(src[pos])) || src[pos] == '_'))
        ++pos;
      return {Token::Kind::Atom, src.substr(start, pos - start), line};
    }
    fail(std::string("unexpected character '") + c + "'");
  }
};

struct Parser {
  Lexer lex;
  Token tok;
  std::map<std::string, CtrsSym> sig;
  std::map<std::string, Sort> vars;

  explicit Parser(const std::string& src) : lex{src} { tok = lex.next(); }

  [[noreturn]] void fail(const std::string& msg) const {
    throw CtrsParseError("line " + std::to_string(tok.line) + ": " + msg);
  }

  void advance() { tok = lex.next(); }

  void expect(Token::Kind k, const std::string& what) {
    if (tok.kind != k) fail("expected " + what + ", got '" + tok.text + "'");
    advance();
  }

  std::string atom(const std::string& what) {
    if (tok.kind != Token::Kind::Atom) fail("expected " + what + ", got '" + tok.text + "'");
    std::string s = tok.text;
    advance();
    return s;
  }

  bool at_atom(const std::string& s) const {
    return tok.kind == Token::Kind::Atom && tok.text == s;
  }

  Sort sort_of(const std::string& name) {
    if (name == "int") return Sort::Int;
    if (name == "bool") return Sort::Bool;
    if (name == "univ") return Sort::Univ;
    fail("unknown sort '" + name + "'");
  }

  Term term() {
    if (tok.kind == Token::Kind::Int) {
      Term t = Term::int_lit(Int(tok.text));
      advance();
      return t;
    }
    if (tok.kind != Token::Kind::Atom) fail("expected a term, got '" + tok.text + "'");
    std::string name = tok.text;
    advance();
    if (name == "true") return Term::bool_lit(true);
    if (name == "false") return Term::bool_lit(false);
    if (tok.kind == Token::Kind::LParen) {
      advance();
      std::vector<Term> args;
      if (tok.kind != Token::Kind::RParen) {
        args.push_back(term());
        while (tok.kind == Token::Kind::Comma) {
          advance();
          args.push_back(term());
        }
      }
      expect(Token::Kind::RParen, "')'");
      auto it = sig.find(name);
      if (it == sig.end()) fail("symbol '" + name + "' not in signature");
      if (it->second.arity != static_cast<int>(args.size()))
        fail("symbol '" + name + "' wants " + std::to_string(it->second.arity) + " arguments");
      return Term::app(name, std::move(args));
    }
    auto vit = vars.find(name);
    if (vit != vars.end()) return Term::var(name, vit->second);
    auto it = sig.find(name);
    if (it == sig.end()) fail("symbol '" + name + "' not in signature");
    if (it->second.arity != 0)
      fail("symbol '" + name + "' wants " + std::to_string(it->second.arity) + " arguments");
    return Term::app(name, {});
  }

  Term cmp_operand() {
    if (tok.kind == Token::Kind::LParen) {
      advance();
      Term t = or_expr();
      expect(Token::Kind::RParen, "')'");
      return t;
    }
    return term();
  }

  Term sum_expr() {
    Term t = cmp_operand();
    while (tok.kind == Token::Kind::Op && (tok.text == "+" || tok.text == "-")) {
      std::string op = tok.text;
      advance();
      Term rhs = cmp_operand();
      t = Term::app(op, {std::move(t), std::move(rhs)});
    }
    return t;
  }

  Term cmp_expr() {
    if (at_atom("not")) {
      advance();
      return Term::app("not", {cmp_expr()});
    }
    Term t = sum_expr();
    if (tok.kind == Token::Kind::Op &&
        (tok.text == "=" || tok.text == "!=" || tok.text == ">=")) {
      std::string op = tok.text;
      advance();
      Term rhs = sum_expr();
      t = Term::app(op, {std::move(t), std::move(rhs)});
    }
    return t;
  }

  Term and_expr() {
    Term t = cmp_expr();
    while (tok.kind == Token::Kind::Op && tok.text == "/\\") {
      advance();
      Term rhs = cmp_expr();
      t = Term::app("/\\", {std::move(t), std::move(rhs)});
    }
    return t;
  }

  Term or_expr() {
    Term t = and_expr();
    while (tok.kind == Token::Kind::Op && tok.text == "\\/") {
      advance();
      Term rhs = and_expr();
      t = Term::app("\\/", {std::move(t), std::move(rhs)});
    }
    return t;
  }

  Ctrs parse() {
    Ctrs out;
    expect(Token::Kind::LParen, "'('");
    if (atom("section") != "SORTS") fail("expected SORTS");
    while (tok.kind == Token::Kind::Atom) advance();
    expect(Token::Kind::RParen, "')'");

    expect(Token::Kind::LParen, "'('");
    if (atom("section") != "SIG") fail("expected SIG");
    while (tok.kind == Token::Kind::LParen) {
      advance();
      CtrsSym s;
      s.name = atom("symbol name");
      if (tok.kind != Token::Kind::Int) fail("expected an arity");
      s.arity = std::stoi(tok.text);
      advance();
      std::string kind = atom("symbol kind");
      if (kind == "defined") s.defined = true;
      else if (kind == "constructor") s.defined = false;
      else fail("symbol kind must be defined or constructor");
      expect(Token::Kind::RParen, "')'");
      if (sig.count(s.name)) fail("duplicate symbol '" + s.name + "'");
      sig[s.name] = s;
      out.sig.push_back(s);
    }
    expect(Token::Kind::RParen, "')'");

    expect(Token::Kind::LParen, "'('");
    if (atom("section") != "RULES") fail("expected RULES");
    while (tok.kind != Token::Kind::RParen) {
      vars.clear();
      if (tok.kind == Token::Kind::LParen) {
        advance();
        if (atom("VAR") != "VAR") fail("expected VAR");
        while (tok.kind == Token::Kind::Atom) {
          std::string n = tok.text;
          advance();
          expect(Token::Kind::Colon, "':'");
          Sort s = sort_of(atom("sort"));
          if (vars.count(n)) fail("duplicate variable '" + n + "'");
          if (sig.count(n)) fail("variable '" + n + "' shadows a symbol");
          vars[n] = s;
        }
        expect(Token::Kind::RParen, "')'");
      }
      CtrsRule r;
      r.lhs = term();
      expect(Token::Kind::Arrow, "'->'");
      r.rhs = term();
      expect(Token::Kind::LBrack, "'['");
      r.constraint = or_expr();
      expect(Token::Kind::RBrack, "']'");
      if (r.lhs.kind != Term::Kind::App || !sig.count(r.lhs.name) || !sig[r.lhs.name].defined)
        fail("rule left side must be headed by a defined symbol");
      out.rules.push_back(std::move(r));
    }
    expect(Token::Kind::RParen, "')'");
    if (tok.kind != Token::Kind::End) fail("trailing input after RULES");
    return out;
  }
};

} // namespace

Ctrs parse_ctrs(const std::string& text) {
  Parser p(text);
  return p.parse();
}

} // namespace jbc
