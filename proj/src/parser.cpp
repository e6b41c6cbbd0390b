#include "tbp/parser.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>
#include <stdexcept>

namespace tbp {

namespace {

std::string upper(std::string s) {
  for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

enum class Tok {
  ident,
  variable,
  number,
  inf,
  lbrace,
  rbrace,
  lparen,
  rparen,
  lbracket,
  rbracket,
  comma,
  semicolon,
  colon,
  dot,
  eq,
  neq,
  end,
};

struct Lexeme {
  Tok kind = Tok::end;
  std::string text;
  ticks_t num = 0;
  SourceSpan span;
};

using Severity = ParseDiagnostic::Severity;

std::vector<Lexeme> lex(const std::string& text, const std::string& file,
                        std::vector<ParseDiagnostic>& diags) {
  std::vector<Lexeme> out;
  int line = 1, col = 1;
  std::size_t i = 0;
  auto span_at = [&](int l, int c, std::size_t len) {
    return SourceSpan{file, l, c, static_cast<int>(len)};
  };
  auto bump = [&](std::size_t n) {
    col += static_cast<int>(n);
    i += n;
  };
  while (i < text.size()) {
    const char ch = text[i];
    if (ch == '\n') {
      ++line;
      col = 1;
      ++i;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(ch))) {
      bump(1);
      continue;
    }
    if (ch == '/' && i + 1 < text.size() && text[i + 1] == '/') {
      while (i < text.size() && text[i] != '\n') ++i;
      continue;
    }
    const int l = line, c = col;
    if (std::isalpha(static_cast<unsigned char>(ch)) || ch == '_') {
      std::size_t j = i;
      while (j < text.size() &&
             (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '_'))
        ++j;
      std::string word = text.substr(i, j - i);
      bump(j - i);
      if (upper(word) == "INF")
        out.push_back({Tok::inf, word, 0, span_at(l, c, word.size())});
      else
        out.push_back({Tok::ident, std::move(word), 0, span_at(l, c, j - i)});
      continue;
    }
    if (ch == '?') {
      std::size_t j = i + 1;
      while (j < text.size() &&
             (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '_'))
        ++j;
      if (j == i + 1) {
        diags.push_back({Severity::error, "stray '?'", span_at(l, c, 1)});
        bump(1);
        continue;
      }
      std::string word = text.substr(i, j - i);
      bump(j - i);
      out.push_back({Tok::variable, std::move(word), 0, span_at(l, c, j - i)});
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(ch))) {
      std::size_t j = i;
      ticks_t v = 0;
      bool overflow = false;
      while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) {
        if (v > k_inf / 10)
          overflow = true;
        else
          v = v * 10 + (text[j] - '0');
        ++j;
      }
      if (overflow) {
        diags.push_back({Severity::error, "number too large", span_at(l, c, j - i)});
        v = k_inf - 1;
      }
      std::string word = text.substr(i, j - i);
      bump(j - i);
      out.push_back({Tok::number, std::move(word), v, span_at(l, c, j - i)});
      continue;
    }
    if (ch == '+') {
      std::size_t j = i + 1;
      while (j < text.size() &&
             (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '_'))
        ++j;
      if (upper(text.substr(i + 1, j - i - 1)) == "INF") {
        bump(j - i);
        out.push_back({Tok::inf, "+INF", 0, span_at(l, c, j - i)});
        continue;
      }
      diags.push_back({Severity::error, "stray '+'", span_at(l, c, 1)});
      bump(1);
      continue;
    }
    if (ch == '!' && i + 1 < text.size() && text[i + 1] == '=') {
      bump(2);
      out.push_back({Tok::neq, "!=", 0, span_at(l, c, 2)});
      continue;
    }
    Tok k = Tok::end;
    switch (ch) {
      case '{': k = Tok::lbrace; break;
      case '}': k = Tok::rbrace; break;
      case '(': k = Tok::lparen; break;
      case ')': k = Tok::rparen; break;
      case '[': k = Tok::lbracket; break;
      case ']': k = Tok::rbracket; break;
      case ',': k = Tok::comma; break;
      case ';': k = Tok::semicolon; break;
      case ':': k = Tok::colon; break;
      case '.': k = Tok::dot; break;
      case '=': k = Tok::eq; break;
      default:
        diags.push_back(
            {Severity::error, std::string("unexpected character '") + ch + "'", span_at(l, c, 1)});
        bump(1);
        continue;
    }
    bump(1);
    out.push_back({k, std::string(1, ch), 0, span_at(l, c, 1)});
  }
  out.push_back({Tok::end, "", 0, span_at(line, col, 0)});
  return out;
}

const char* tok_label(Tok t) {
  switch (t) {
    case Tok::ident: return "identifier";
    case Tok::variable: return "parameter";
    case Tok::number: return "number";
    case Tok::inf: return "+INF";
    case Tok::lbrace: return "'{'";
    case Tok::rbrace: return "'}'";
    case Tok::lparen: return "'('";
    case Tok::rparen: return "')'";
    case Tok::lbracket: return "'['";
    case Tok::rbracket: return "']'";
    case Tok::comma: return "','";
    case Tok::semicolon: return "';'";
    case Tok::colon: return "':'";
    case Tok::dot: return "'.'";
    case Tok::eq: return "'='";
    case Tok::neq: return "'!='";
    case Tok::end: return "end of file";
  }
  return "?";
}

class Parser {
 public:
  Parser(std::vector<Lexeme> lx, std::vector<ParseDiagnostic>& diags)
      : lx_(std::move(lx)), diags_(diags) {}

 protected:
  std::vector<Lexeme> lx_;
  std::vector<ParseDiagnostic>& diags_;
  std::size_t pos_ = 0;

  const Lexeme& peek(int k = 0) const {
    const std::size_t j = pos_ + static_cast<std::size_t>(k);
    return j < lx_.size() ? lx_[j] : lx_.back();
  }
  bool at(Tok t) const { return peek().kind == t; }
  const Lexeme& advance() {
    const Lexeme& l = lx_[pos_];
    if (pos_ + 1 < lx_.size()) ++pos_;
    return l;
  }
  bool accept(Tok t) {
    if (!at(t)) return false;
    advance();
    return true;
  }
  void error(const std::string& msg) { diags_.push_back({Severity::error, msg, peek().span}); }
  void error_at(const SourceSpan& span, const std::string& msg) {
    diags_.push_back({Severity::error, msg, span});
  }
  bool expect(Tok t, const char* what) {
    if (accept(t)) return true;
    error(std::string("expected ") + what + ", found " + tok_label(peek().kind));
    return false;
  }
  bool at_kw(const char* kw, int k = 0) const {
    return peek(k).kind == Tok::ident && upper(peek(k).text) == kw;
  }
  bool accept_kw(const char* kw) {
    if (!at_kw(kw)) return false;
    advance();
    return true;
  }
  bool expect_kw(const char* kw) {
    if (accept_kw(kw)) return true;
    error(std::string("expected ") + kw);
    return false;
  }

  std::optional<std::string> ident(const char* what) {
    if (at(Tok::ident)) return advance().text;
    error(std::string("expected ") + what + ", found " + tok_label(peek().kind));
    return std::nullopt;
  }
  std::optional<TimeValue> time_value() {
    if (at(Tok::number)) return TimeValue::of(advance().num);
    if (at(Tok::inf)) {
      advance();
      return TimeValue::inf();
    }
    error(std::string("expected a time value, found ") + tok_label(peek().kind));
    return std::nullopt;
  }
  std::optional<ticks_t> finite_number(const char* what) {
    if (at(Tok::number)) return advance().num;
    error(std::string("expected ") + what + ", found " + tok_label(peek().kind));
    return std::nullopt;
  }
  std::optional<Bound> bound() {
    const SourceSpan start = peek().span;
    if (!expect(Tok::lbracket, "'['")) return std::nullopt;
    auto lo = time_value();
    if (!expect(Tok::comma, "','")) return std::nullopt;
    auto hi = time_value();
    if (!expect(Tok::rbracket, "']'")) return std::nullopt;
    if (!lo || !hi) return std::nullopt;
    if (lo->infinite()) {
      error_at(start, "interval lower bound must be finite");
      return std::nullopt;
    }
    if (*hi < *lo) {
      error_at(start, "interval bounds are inverted");
      return std::nullopt;
    }
    return Bound(*lo, *hi);
  }
  // A constraint or argument term: ?parameter, identifier or number literal.
  std::optional<std::string> term() {
    if (at(Tok::variable) || at(Tok::ident) || at(Tok::number)) return advance().text;
    error(std::string("expected a parameter or literal, found ") + tok_label(peek().kind));
    return std::nullopt;
  }
  std::optional<RelKind> rel_kw(const Lexeme& l) const {
    if (l.kind != Tok::ident) return std::nullopt;
    return rel_from_name(lower(l.text));
  }

  // Statement-boundary recovery: drop tokens through the next ';' but stop
  // shy of a closing brace so block structure survives.
  void skip_statement() {
    while (!at(Tok::end) && !at(Tok::semicolon) && !at(Tok::rbrace)) advance();
    accept(Tok::semicolon);
  }
  // Consumes one balanced { ... } block, or one statement when no block opens.
  void skip_block() {
    if (!at(Tok::lbrace)) {
      skip_statement();
      return;
    }
    int depth = 0;
    while (!at(Tok::end)) {
      if (at(Tok::lbrace)) ++depth;
      if (at(Tok::rbrace) && --depth == 0) {
        advance();
        return;
      }
      advance();
    }
  }
};

// ---------------------------------------------------------------------------
// DDL
// ---------------------------------------------------------------------------

class DdlParser : public Parser {
 public:
  using Parser::Parser;
  LiftedDomain dom;

  void parse() {
    expect_kw("DOMAIN");
    if (auto n = ident("domain name")) dom.name = *n;
    expect(Tok::lbrace, "'{'");
    while (!at(Tok::rbrace) && !at(Tok::end)) section();
    expect(Tok::rbrace, "'}'");
  }

 private:
  void section() {
    if (accept_kw("TEMPORAL_MODULE"))
      temporal_module();
    else if (accept_kw("PAR_TYPE"))
      par_type();
    else if (accept_kw("COMP_TYPE"))
      comp_type();
    else if (accept_kw("COMPONENT"))
      component();
    else if (accept_kw("SYNCHRONIZE"))
      synchronize();
    else {
      error("expected TEMPORAL_MODULE, PAR_TYPE, COMP_TYPE, COMPONENT or SYNCHRONIZE");
      advance();
    }
  }

  void temporal_module() {
    auto name = ident("module name");
    expect(Tok::eq, "'='");
    const SourceSpan here = peek().span;
    auto b = bound();
    expect(Tok::semicolon, "';'");
    if (name) dom.module_name = *name;
    if (!b) return;
    if (!(b->lb == TimeValue::of(0))) error_at(here, "the temporal origin must be 0");
    if (b->ub.infinite()) {
      error_at(here, "the planning horizon must be finite");
      return;
    }
    dom.horizon = b->ub;
  }

  void par_type() {
    ParameterDomain pd;
    if (accept_kw("ENUMERATIONPARAMETER")) {
      pd.numeric = false;
      if (auto n = ident("parameter type name")) pd.name = *n;
      expect(Tok::eq, "'='");
      expect(Tok::lbrace, "'{'");
      while (true) {
        if (auto m = ident("symbol")) pd.symbols.push_back(*m);
        if (!accept(Tok::comma)) break;
      }
      expect(Tok::rbrace, "'}'");
      accept(Tok::semicolon);
    } else if (accept_kw("NUMERICPARAMETER")) {
      pd.numeric = true;
      if (auto n = ident("parameter type name")) pd.name = *n;
      expect(Tok::eq, "'='");
      expect(Tok::lbracket, "'['");
      if (auto lo = finite_number("lower bound")) pd.lo = *lo;
      expect(Tok::comma, "','");
      if (auto hi = finite_number("upper bound")) pd.hi = *hi;
      expect(Tok::rbracket, "']'");
      expect(Tok::semicolon, "';'");
    } else {
      error("expected EnumerationParameter or NumericParameter");
      skip_statement();
      return;
    }
    dom.parameters.push_back(std::move(pd));
  }

  void comp_type() {
    expect_kw("STATEVARIABLE");
    LiftedType type;
    type.external = accept_kw("EXTERNAL");
    if (auto n = ident("component type name")) type.name = *n;
    expect(Tok::lparen, "'('");
    struct Sig {
      std::string name;
      std::vector<std::string> param_types;
      SourceSpan span;
      bool defined = false;
    };
    std::vector<Sig> sigs;
    while (!at(Tok::rparen) && !at(Tok::end)) {
      Sig sig;
      sig.span = peek().span;
      if (auto n = ident("value name"))
        sig.name = *n;
      else
        break;
      expect(Tok::lparen, "'('");
      while (!at(Tok::rparen) && !at(Tok::end)) {
        if (auto t = ident("parameter type")) sig.param_types.push_back(*t);
        if (!accept(Tok::comma)) break;
      }
      expect(Tok::rparen, "')'");
      sigs.push_back(std::move(sig));
      if (!accept(Tok::comma)) break;
    }
    expect(Tok::rparen, "')'");
    expect(Tok::lbrace, "'{'");
    std::map<std::pair<std::string, std::size_t>, LiftedValue> bodies;
    while (at_kw("VALUE") && !at(Tok::end)) {
      auto v = value_block();
      if (!v) continue;
      auto key = std::make_pair(v->name, v->params.size());
      bool sig_found = false;
      for (auto& s : sigs) {
        if (s.name != v->name || s.param_types.size() != v->params.size()) continue;
        if (s.defined) {
          error("duplicate VALUE block for " + v->name);
          sig_found = true;
          break;
        }
        s.defined = true;
        v->param_types = s.param_types;
        bodies.emplace(key, std::move(*v));
        sig_found = true;
        break;
      }
      if (!sig_found) error("VALUE " + key.first + " is not declared in the type header");
    }
    expect(Tok::rbrace, "'}'");
    for (auto& s : sigs) {
      if (!s.defined) {
        error_at(s.span, "value " + s.name + " has no VALUE block");
        continue;
      }
      type.values.push_back(std::move(bodies.at({s.name, s.param_types.size()})));
    }
    dom.types.push_back(std::move(type));
  }

  std::optional<LiftedValue> value_block() {
    expect_kw("VALUE");
    LiftedValue v;
    if (accept_kw("UNCONTROLLABLE")) v.tag = Controllability::uncontrollable;
    if (auto n = ident("value name"))
      v.name = *n;
    else {
      skip_statement();
      return std::nullopt;
    }
    expect(Tok::lparen, "'('");
    while (!at(Tok::rparen) && !at(Tok::end)) {
      if (at(Tok::variable))
        v.params.push_back(advance().text);
      else {
        error("expected a ?parameter");
        break;
      }
      if (!accept(Tok::comma)) break;
    }
    expect(Tok::rparen, "')'");
    const SourceSpan dspan = peek().span;
    if (auto b = bound()) {
      if (b->lb == TimeValue::of(0)) error_at(dspan, "duration lower bound must be at least 1");
      v.dmin = b->lb;
      v.dmax = b->ub;
    }
    if (!expect_kw("MEETS")) {
      skip_block();
      return std::nullopt;
    }
    expect(Tok::lbrace, "'{'");
    while (!at(Tok::rbrace) && !at(Tok::end)) {
      if (at(Tok::variable) || at(Tok::number)) {
        constraint_stmt(v.constraints);
        continue;
      }
      if (at(Tok::ident)) {
        LiftedValue::Successor s;
        s.value = advance().text;
        expect(Tok::lparen, "'('");
        while (!at(Tok::rparen) && !at(Tok::end)) {
          if (auto t = term())
            s.args.push_back(*t);
          else
            break;
          if (!accept(Tok::comma)) break;
        }
        expect(Tok::rparen, "')'");
        expect(Tok::semicolon, "';'");
        v.successors.push_back(std::move(s));
        continue;
      }
      error("expected a successor value or a parameter constraint");
      skip_statement();
    }
    expect(Tok::rbrace, "'}'");
    return v;
  }

  template <typename C>
  void constraint_stmt(std::vector<C>& out) {
    C c;
    bool ok = true;
    if (auto l = term())
      c.lhs = *l;
    else
      ok = false;
    if (accept(Tok::eq))
      c.equal = true;
    else if (accept(Tok::neq))
      c.equal = false;
    else {
      error("expected '=' or '!='");
      ok = false;
    }
    if (auto r = term())
      c.rhs = *r;
    else
      ok = false;
    expect(Tok::semicolon, "';'");
    if (ok) out.push_back(std::move(c));
  }

  void component() {
    LiftedComponent c;
    if (auto n = ident("component name")) c.name = *n;
    expect(Tok::colon, "':'");
    if (auto t = ident("component type")) c.type = *t;
    expect(Tok::semicolon, "';'");
    dom.components.push_back(std::move(c));
  }

  void synchronize() {
    std::string comp;
    if (auto n = ident("component name")) comp = *n;
    expect(Tok::lbrace, "'{'");
    while (at_kw("VALUE") && !at(Tok::end)) sync_value(comp);
    expect(Tok::rbrace, "'}'");
  }

  void sync_value(const std::string& comp) {
    expect_kw("VALUE");
    LiftedRule r;
    r.component = comp;
    if (auto n = ident("trigger value")) r.trigger_value = *n;
    expect(Tok::lparen, "'('");
    while (!at(Tok::rparen) && !at(Tok::end)) {
      if (at(Tok::variable))
        r.trigger_params.push_back(advance().text);
      else {
        error("expected a ?parameter");
        break;
      }
      if (!accept(Tok::comma)) break;
    }
    expect(Tok::rparen, "')'");
    expect(Tok::lbrace, "'{'");
    while (!at(Tok::rbrace) && !at(Tok::end)) sync_stmt(r);
    expect(Tok::rbrace, "'}'");
    dom.rules.push_back(std::move(r));
  }

  void sync_stmt(LiftedRule& r) {
    if (at(Tok::variable) || at(Tok::number)) {
      constraint_stmt(r.constraints);
      return;
    }
    if (at(Tok::ident)) {
      if (rel_kw(peek())) {
        relation_stmt(r, "");
        return;
      }
      if (peek(1).kind == Tok::dot) {
        condition_stmt(r, "");
        return;
      }
      if (peek(1).kind == Tok::ident && rel_kw(peek(1))) {
        std::string label = advance().text;
        relation_stmt(r, label);
        return;
      }
      if (peek(1).kind == Tok::ident && peek(2).kind == Tok::dot) {
        std::string label = advance().text;
        condition_stmt(r, label);
        return;
      }
    }
    error("expected a condition, a relation or a parameter constraint");
    skip_statement();
  }

  void condition_stmt(LiftedRule& r, std::string label) {
    LiftedCondition c;
    c.label = std::move(label);
    if (auto n = ident("component name")) c.component = *n;
    expect(Tok::dot, "'.'");
    if (auto n = ident("value name")) c.value = *n;
    expect(Tok::lparen, "'('");
    while (!at(Tok::rparen) && !at(Tok::end)) {
      if (auto t = term())
        c.args.push_back(*t);
      else
        break;
      if (!accept(Tok::comma)) break;
    }
    expect(Tok::rparen, "')'");
    expect(Tok::semicolon, "';'");
    r.conditions.push_back(std::move(c));
  }

  void relation_stmt(LiftedRule& r, std::string left) {
    LiftedRelationStmt rel;
    rel.left = std::move(left);
    rel.kind = *rel_kw(peek());
    advance();
    for (int i = 0; i < rel_arity(rel.kind); ++i) {
      if (auto b = bound())
        rel.bounds.push_back(*b);
      else {
        skip_statement();
        return;
      }
    }
    if (rel_is_point(rel.kind)) {
      if (auto t = finite_number("an anchor time"))
        rel.anchor = TimeValue::of(*t);
      else {
        skip_statement();
        return;
      }
    } else {
      if (auto n = ident("a condition label"))
        rel.right = *n;
      else {
        skip_statement();
        return;
      }
    }
    expect(Tok::semicolon, "';'");
    r.relations.push_back(std::move(rel));
  }
};

// ---------------------------------------------------------------------------
// PDL
// ---------------------------------------------------------------------------

class PdlParser : public Parser {
 public:
  using Parser::Parser;
  LiftedProblem prob;

  void parse() {
    expect_kw("PROBLEM");
    if (auto n = ident("problem name")) prob.name = *n;
    expect(Tok::lparen, "'('");
    expect_kw("DOMAIN");
    if (auto n = ident("domain name")) prob.domain_name = *n;
    expect(Tok::rparen, "')'");
    expect(Tok::lbrace, "'{'");
    while (!at(Tok::rbrace) && !at(Tok::end)) statement();
    expect(Tok::rbrace, "'}'");
  }

 private:
  void statement() {
    if (at(Tok::variable)) {
      PdlBinding b;
      b.span = peek().span;
      b.var = advance().text;
      expect(Tok::eq, "'='");
      if (auto t = term()) b.value = *t;
      expect(Tok::semicolon, "';'");
      prob.bindings.push_back(std::move(b));
      return;
    }
    if (at(Tok::ident)) {
      if (at_kw("FACT", 1) || at_kw("GOAL", 1)) {
        token_stmt();
        return;
      }
      if (peek(1).kind == Tok::ident && rel_kw(peek(1))) {
        relation_stmt();
        return;
      }
    }
    error("expected a fact, a goal, a relation or a '?parameter = value' binding");
    skip_statement();
  }

  void token_stmt() {
    PdlTokenStmt s;
    s.span = peek().span;
    s.label = advance().text;
    s.is_goal = upper(peek().text) == "GOAL";
    advance();
    if (auto n = ident("component name")) s.component = *n;
    expect(Tok::dot, "'.'");
    if (auto n = ident("value name")) s.value = *n;
    expect(Tok::lparen, "'('");
    while (!at(Tok::rparen) && !at(Tok::end)) {
      if (auto t = term())
        s.args.push_back(*t);
      else
        break;
      if (!accept(Tok::comma)) break;
    }
    expect(Tok::rparen, "')'");
    if (accept_kw("AT")) {
      s.has_at = true;
      auto b1 = bound();
      auto b2 = bound();
      auto b3 = bound();
      if (!b1 || !b2 || !b3) {
        skip_statement();
        return;
      }
      s.start = *b1;
      s.end = *b2;
      s.duration = *b3;
    }
    expect(Tok::semicolon, "';'");
    prob.statements.push_back(std::move(s));
  }

  void relation_stmt() {
    PdlRelation rel;
    rel.span = peek().span;
    rel.left = advance().text;
    rel.kind = *rel_kw(peek());
    advance();
    for (int i = 0; i < rel_arity(rel.kind); ++i) {
      if (auto b = bound())
        rel.bounds.push_back(*b);
      else {
        skip_statement();
        return;
      }
    }
    if (rel_is_point(rel.kind)) {
      if (auto t = finite_number("an anchor time"))
        rel.anchor = TimeValue::of(*t);
      else {
        skip_statement();
        return;
      }
    } else {
      if (auto n = ident("a goal label"))
        rel.right = *n;
      else {
        skip_statement();
        return;
      }
    }
    expect(Tok::semicolon, "';'");
    prob.relations.push_back(std::move(rel));
  }
};

bool has_error(const std::vector<ParseDiagnostic>& diags) {
  return std::any_of(diags.begin(), diags.end(),
                     [](const ParseDiagnostic& d) { return d.severity == Severity::error; });
}

SourceSpan file_span(const std::string& file) { return {file, 1, 1, 0}; }

void wrap(const std::vector<Diagnostic>& in, const std::string& file,
          std::vector<ParseDiagnostic>& out) {
  for (const auto& d : in) out.push_back({Severity::error, to_string(d), file_span(file)});
}

// Rewrites one goal window triple into point-anchored atoms. Unbounded sides
// clamp to the horizon: every token lives within [0, H] anyway, so the clamp
// loses nothing while keeping the window expressible as an anchored atom.
void window_atoms(const PdlTokenStmt& s, TimeValue horizon, const std::string& file,
                  std::vector<ParseDiagnostic>& diags, std::vector<GoalAtom>& out) {
  const ticks_t H = horizon.value();
  auto side = [&](const Bound& w, RelKind kind) {
    const ticks_t hi = w.ub.infinite() ? H : w.ub.value();
    if (w.lb.value() > hi) {
      diags.push_back({Severity::error,
                       s.label + ": window [" + to_string(w.lb) + ", " + to_string(w.ub) +
                           "] is empty within the horizon",
                       s.span});
      return;
    }
    out.push_back(
        {s.label, "", Relation(kind, {Bound(0, hi - w.lb.value())}, TimeValue::of(hi))});
  };
  side(s.start, RelKind::starts_before);
  side(s.end, RelKind::ends_before);
  out.push_back({s.label, s.label, Relation(RelKind::start_before_end, {s.duration})});
  (void)file;
}

void resolve_problem(const LiftedProblem& lp, std::shared_ptr<const PlanningDomain> domain,
                     const std::string& file, std::vector<ParseDiagnostic>& diags,
                     std::optional<PlanningProblem>& out) {
  PlanningProblem p;
  p.name = lp.name;
  p.domain = domain;
  p.horizon = domain->horizon;
  if (lp.domain_name != domain->name)
    diags.push_back({Severity::error,
                     "problem references domain " + lp.domain_name + " but " + domain->name +
                         " was loaded",
                     file_span(file)});

  struct Binding {
    std::string value;
    SourceSpan span;
    bool used = false;
  };
  std::map<std::string, Binding> binds;
  for (const auto& b : lp.bindings) {
    if (!binds.emplace(b.var, Binding{b.value, b.span, false}).second)
      diags.push_back({Severity::error, "duplicate binding for " + b.var, b.span});
  }

  std::set<std::string> labels;
  std::set<std::string> goal_labels;
  std::vector<GoalAtom> windows;
  std::map<std::string, std::vector<TokenSpec>> obs_tokens;
  std::vector<std::string> obs_order;

  for (const auto& s : lp.statements) {
    if (!labels.insert(s.label).second)
      diags.push_back({Severity::error, "duplicate label " + s.label, s.span});
    const StateVariable* sv = domain->find_variable(s.component);
    if (!sv) {
      diags.push_back({Severity::error, "unknown component " + s.component, s.span});
      continue;
    }
    std::vector<std::string> args;
    bool args_ok = true;
    for (const auto& a : s.args) {
      if (a.empty() || a[0] != '?') {
        args.push_back(a);
        continue;
      }
      auto it = binds.find(a);
      if (it == binds.end()) {
        diags.push_back({Severity::error, "parameter " + a + " is never bound", s.span});
        args_ok = false;
        break;
      }
      it->second.used = true;
      args.push_back(it->second.value);
    }
    if (!args_ok) continue;
    const std::string value = render_value_name(s.value, args);
    if (!sv->value_index(value)) {
      diags.push_back(
          {Severity::error, "component " + s.component + " has no value " + value, s.span});
      continue;
    }
    if (s.is_goal) {
      if (sv->external) {
        diags.push_back(
            {Severity::error, "goals may only target planned variables", s.span});
        continue;
      }
      goal_labels.insert(s.label);
      p.goal.accomplishments.push_back({s.label, s.component, value});
      if (s.has_at) window_atoms(s, domain->horizon, file, diags, windows);
      continue;
    }
    if (!s.has_at) {
      diags.push_back({Severity::error, "facts need an AT clause", s.span});
      continue;
    }
    TokenSpec tok{s.component, value, s.start, s.end, s.duration};
    if (sv->external) {
      if (!obs_tokens.count(s.component)) obs_order.push_back(s.component);
      obs_tokens[s.component].push_back(std::move(tok));
    } else {
      p.facts.push_back(std::move(tok));
    }
  }

  std::vector<GoalAtom> conjunction;
  for (const auto& rel : lp.relations) {
    if (!goal_labels.count(rel.left)) {
      diags.push_back(
          {Severity::error, "relational statements relate goal labels; " + rel.left + " is not one",
           rel.span});
      continue;
    }
    if (!rel_is_point(rel.kind) && !goal_labels.count(rel.right)) {
      diags.push_back(
          {Severity::error,
           "relational statements relate goal labels; " + rel.right + " is not one", rel.span});
      continue;
    }
    conjunction.push_back({rel.left, rel.right, Relation(rel.kind, rel.bounds, rel.anchor)});
  }
  conjunction.insert(conjunction.end(), windows.begin(), windows.end());
  if (!conjunction.empty()) p.goal.relational = {std::move(conjunction)};

  for (const auto& comp : obs_order) p.observations.push_back({comp, std::move(obs_tokens[comp])});

  for (const auto& [var, b] : binds) {
    if (!b.used)
      diags.push_back({Severity::warning, "binding " + var + " is never used", b.span});
  }

  if (has_error(diags)) return;
  wrap(validate_problem(p), file, diags);
  if (!has_error(diags)) out = std::move(p);
}

}  // namespace

std::string to_string(const ParseDiagnostic& d) {
  const char* sev = d.severity == Severity::error ? "error" : "warning";
  return d.span.file + ":" + std::to_string(d.span.line) + ":" + std::to_string(d.span.column) +
         ": " + sev + ": " + d.message;
}

DdlParseResult parse_ddl(const std::string& text, const std::string& file) {
  DdlParseResult res;
  auto lexemes = lex(text, file, res.diagnostics);
  DdlParser parser(std::move(lexemes), res.diagnostics);
  parser.parse();
  if (has_error(res.diagnostics)) return res;
  GroundResult g = ground(parser.dom);
  wrap(g.diagnostics, file, res.diagnostics);
  if (g.domain) wrap(validate_domain(*g.domain), file, res.diagnostics);
  if (has_error(res.diagnostics)) return res;
  res.domain = std::move(g.domain);
  res.lifted = std::move(parser.dom);
  return res;
}

PdlParseResult parse_pdl(const std::string& text, std::shared_ptr<const PlanningDomain> domain,
                         const std::string& file) {
  PdlParseResult res;
  if (!domain) {
    res.diagnostics.push_back({Severity::error, "no domain loaded", file_span(file)});
    return res;
  }
  auto lexemes = lex(text, file, res.diagnostics);
  PdlParser parser(std::move(lexemes), res.diagnostics);
  parser.parse();
  if (has_error(res.diagnostics)) return res;
  resolve_problem(parser.prob, domain, file, res.diagnostics, res.problem);
  if (res.problem) res.lifted = std::move(parser.prob);
  return res;
}

}  // namespace tbp
