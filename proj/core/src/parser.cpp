#include "sccp/parser.hpp"

#include <cctype>
#include <cstdlib>
#include <set>

namespace sccp {

std::string format(const Diagnostic& d) {
  return std::to_string(d.line) + ":" + std::to_string(d.col) + ": " + d.message;
}

bool ParseResult::has_semantic_error() const {
  for (const Diagnostic& d : diagnostics)
    if (d.kind == Diagnostic::Kind::Semantic) return true;
  return false;
}

namespace {

enum class Tok {
  End, Newline, Ident, Number,
  Plus, Minus, Star, Slash, Caret, Comma, Dot, Prime,
  LParen, RParen, LBracket, RBracket, LBrace, RBrace,
  Arrow, AndAnd, OrOr, Not, Assign,
  Lt, Le, Gt, Ge, EqEq, Ne,
};

struct Token {
  Tok kind = Tok::End;
  std::string text;
  double number = 0.0;
  int line = 1;
  int col = 1;
};

const char* tok_name(Tok t) {
  switch (t) {
    case Tok::End: return "end of input";
    case Tok::Newline: return "end of line";
    case Tok::Ident: return "identifier";
    case Tok::Number: return "number";
    case Tok::Plus: return "'+'";
    case Tok::Minus: return "'-'";
    case Tok::Star: return "'*'";
    case Tok::Slash: return "'/'";
    case Tok::Caret: return "'^'";
    case Tok::Comma: return "','";
    case Tok::Dot: return "'.'";
    case Tok::Prime: return "'''";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::LBracket: return "'['";
    case Tok::RBracket: return "']'";
    case Tok::LBrace: return "'{'";
    case Tok::RBrace: return "'}'";
    case Tok::Arrow: return "'->'";
    case Tok::AndAnd: return "'&&'";
    case Tok::OrOr: return "'||'";
    case Tok::Not: return "'!'";
    case Tok::Assign: return "'='";
    case Tok::Lt: return "'<'";
    case Tok::Le: return "'<='";
    case Tok::Gt: return "'>'";
    case Tok::Ge: return "'>='";
    case Tok::EqEq: return "'=='";
    case Tok::Ne: return "'!='";
  }
  return "?";
}

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) { tokenize(); }

  const std::vector<Token>& tokens() const { return tokens_; }
  const std::vector<Diagnostic>& diagnostics() const { return diags_; }

 private:
  void error(int line, int col, std::string msg) {
    diags_.push_back({Diagnostic::Kind::Syntax, line, col, std::move(msg)});
  }

  void push(Tok kind, std::string text, int line, int col, double num = 0.0) {
    tokens_.push_back({kind, std::move(text), num, line, col});
  }

  // Newlines are statement separators except inside brackets and around
  // explicit continuations ('+' or '||' at the end of a line or the start
  // of the next one).
  bool newline_is_separator() const {
    if (depth_ > 0) return false;
    if (tokens_.empty()) return false;
    switch (tokens_.back().kind) {
      case Tok::Plus:
      case Tok::OrOr:
      case Tok::Newline:
        return false;
      default:
        return true;
    }
  }

  void tokenize() {
    size_t i = 0;
    int line = 1, col = 1;
    auto advance = [&](size_t n = 1) {
      for (size_t k = 0; k < n; ++k) {
        if (i < text_.size() && text_[i] == '\n') {
          ++line;
          col = 1;
        } else {
          ++col;
        }
        ++i;
      }
    };
    while (i < text_.size()) {
      const char c = text_[i];
      const int tl = line, tc = col;
      if (c == '#') {
        while (i < text_.size() && text_[i] != '\n') advance();
        continue;
      }
      if (c == '\n') {
        advance();
        if (!newline_is_separator()) continue;
        // Peek: a following line starting with '+' or '||' continues the
        // current statement.
        size_t j = i;
        while (j < text_.size() && (text_[j] == ' ' || text_[j] == '\t' || text_[j] == '\r'))
          ++j;
        if (j < text_.size() &&
            (text_[j] == '+' || (text_[j] == '|' && j + 1 < text_.size() && text_[j + 1] == '|')))
          continue;
        push(Tok::Newline, "\n", tl, tc);
        continue;
      }
      if (c == ' ' || c == '\t' || c == '\r') {
        advance();
        continue;
      }
      if (std::isdigit(static_cast<unsigned char>(c)) ||
          (c == '.' && i + 1 < text_.size() &&
           std::isdigit(static_cast<unsigned char>(text_[i + 1])))) {
        size_t start = i;
        while (i < text_.size() && (std::isdigit(static_cast<unsigned char>(text_[i])) ||
                                    text_[i] == '.'))
          advance();
        if (i < text_.size() && (text_[i] == 'e' || text_[i] == 'E')) {
          size_t save = i;
          advance();
          if (i < text_.size() && (text_[i] == '+' || text_[i] == '-')) advance();
          if (i < text_.size() && std::isdigit(static_cast<unsigned char>(text_[i]))) {
            while (i < text_.size() && std::isdigit(static_cast<unsigned char>(text_[i])))
              advance();
          } else {
            // not an exponent after all
            col -= static_cast<int>(i - save);
            i = save;
          }
        }
        std::string s(text_.substr(start, i - start));
        char* end = nullptr;
        const double v = std::strtod(s.c_str(), &end);
        if (end != s.c_str() + s.size()) error(tl, tc, "malformed number '" + s + "'");
        push(Tok::Number, std::move(s), tl, tc, v);
        continue;
      }
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        size_t start = i;
        while (i < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[i])) ||
                                    text_[i] == '_'))
          advance();
        push(Tok::Ident, std::string(text_.substr(start, i - start)), tl, tc);
        continue;
      }
      auto two = [&](char a, char b) {
        return c == a && i + 1 < text_.size() && text_[i + 1] == b;
      };
      if (two('-', '>')) { push(Tok::Arrow, "->", tl, tc); advance(2); continue; }
      if (two('&', '&')) { push(Tok::AndAnd, "&&", tl, tc); advance(2); continue; }
      if (two('|', '|')) { push(Tok::OrOr, "||", tl, tc); advance(2); continue; }
      if (two('<', '=')) { push(Tok::Le, "<=", tl, tc); advance(2); continue; }
      if (two('>', '=')) { push(Tok::Ge, ">=", tl, tc); advance(2); continue; }
      if (two('=', '=')) { push(Tok::EqEq, "==", tl, tc); advance(2); continue; }
      if (two('!', '=')) { push(Tok::Ne, "!=", tl, tc); advance(2); continue; }
      switch (c) {
        case '+': push(Tok::Plus, "+", tl, tc); break;
        case '-': push(Tok::Minus, "-", tl, tc); break;
        case '*': push(Tok::Star, "*", tl, tc); break;
        case '/': push(Tok::Slash, "/", tl, tc); break;
        case '^': push(Tok::Caret, "^", tl, tc); break;
        case ',': push(Tok::Comma, ",", tl, tc); break;
        case '.': push(Tok::Dot, ".", tl, tc); break;
        case '\'': push(Tok::Prime, "'", tl, tc); break;
        case '(': push(Tok::LParen, "(", tl, tc); ++depth_; break;
        case ')': push(Tok::RParen, ")", tl, tc); --depth_; break;
        case '[': push(Tok::LBracket, "[", tl, tc); ++depth_; break;
        case ']': push(Tok::RBracket, "]", tl, tc); --depth_; break;
        case '{': push(Tok::LBrace, "{", tl, tc); ++depth_; break;
        case '}': push(Tok::RBrace, "}", tl, tc); --depth_; break;
        case '!': push(Tok::Not, "!", tl, tc); break;
        case '=': push(Tok::Assign, "=", tl, tc); break;
        case '<': push(Tok::Lt, "<", tl, tc); break;
        case '>': push(Tok::Gt, ">", tl, tc); break;
        default:
          error(tl, tc, std::string("unexpected character '") + c + "'");
          break;
      }
      advance();
    }
    push(Tok::Newline, "\n", line, col);
    push(Tok::End, "", line, col);
  }

  std::string_view text_;
  std::vector<Token> tokens_;
  std::vector<Diagnostic> diags_;
  int depth_ = 0;
};

// Unresolved (name-only) AST pieces produced by the first pass.
struct RawAssign {
  std::string var;
  Expr rhs;
  int line, col;
};

struct Parser {
  explicit Parser(std::string_view text) : lexer(text), toks(lexer.tokens()) {
    diags = lexer.diagnostics();
  }

  Lexer lexer;
  const std::vector<Token>& toks;
  size_t pos = 0;
  std::vector<Diagnostic> diags;

  SccpProgram prog;
  std::vector<std::string> network_names;
  std::vector<Token> network_tokens;
  bool saw_system = false;
  bool saw_header = false;

  const Token& cur() const { return toks[pos]; }
  const Token& peek(size_t n = 1) const {
    return toks[std::min(pos + n, toks.size() - 1)];
  }
  bool at(Tok k) const { return cur().kind == k; }
  Token take() { return toks[pos++]; }

  void error_at(const Token& t, std::string msg,
                Diagnostic::Kind kind = Diagnostic::Kind::Syntax) {
    diags.push_back({kind, t.line, t.col, std::move(msg)});
  }

  bool expect(Tok k, const char* what) {
    if (at(k)) {
      ++pos;
      return true;
    }
    error_at(cur(), std::string("expected ") + tok_name(k) + " " + what + ", found " +
                        tok_name(cur().kind));
    return false;
  }

  void sync_to_line_end() {
    while (!at(Tok::Newline) && !at(Tok::End)) ++pos;
    if (at(Tok::Newline)) ++pos;
  }

  // --- expressions (names resolved in a later pass) ---

  Expr parse_expr() {
    Expr e = parse_term();
    while (at(Tok::Plus) || at(Tok::Minus)) {
      const Tok op = take().kind;
      Expr r = parse_term();
      e = Expr::binary(op == Tok::Plus ? ExprOp::Add : ExprOp::Sub, std::move(e), std::move(r));
    }
    return e;
  }

  Expr parse_term() {
    Expr e = parse_factor();
    while (at(Tok::Star) || at(Tok::Slash)) {
      const Tok op = take().kind;
      Expr r = parse_factor();
      e = Expr::binary(op == Tok::Star ? ExprOp::Mul : ExprOp::Div, std::move(e), std::move(r));
    }
    return e;
  }

  Expr parse_factor() {
    if (at(Tok::Minus)) {
      ++pos;
      return Expr::unary(ExprOp::Neg, parse_factor());
    }
    Expr base = parse_primary();
    if (at(Tok::Caret)) {
      const Token caret = take();
      Expr exponent = parse_factor();  // right associative
      if (exponent.depends_on_vars())
        error_at(caret, "power exponent must be constant (no store variables)",
                 Diagnostic::Kind::Semantic);
      return Expr::binary(ExprOp::Pow, std::move(base), std::move(exponent));
    }
    return base;
  }

  Expr parse_primary() {
    if (at(Tok::Number)) {
      const Token t = take();
      return Expr::literal(t.number);
    }
    if (at(Tok::LParen)) {
      ++pos;
      Expr e = parse_expr();
      expect(Tok::RParen, "to close parenthesized expression");
      return e;
    }
    if (at(Tok::Ident)) {
      const Token t = take();
      if ((t.text == "min" || t.text == "max") && at(Tok::LParen)) {
        ++pos;
        Expr a = parse_expr();
        expect(Tok::Comma, "between min/max arguments");
        Expr b = parse_expr();
        expect(Tok::RParen, "to close min/max");
        return Expr::binary(t.text == "min" ? ExprOp::Min : ExprOp::Max, std::move(a),
                            std::move(b));
      }
      // Var vs param resolved later; mark as Var with unresolved index.
      return Expr::var(-1, t.text, t.line, t.col);
    }
    error_at(cur(), std::string("expected an expression, found ") + tok_name(cur().kind));
    ++pos;
    return Expr::literal(0.0);
  }

  // --- guards ---

  Guard parse_guard() {
    Guard g = parse_guard_and();
    while (at(Tok::OrOr)) {
      ++pos;
      g = Guard::g_or(std::move(g), parse_guard_and());
    }
    return g;
  }

  Guard parse_guard_and() {
    Guard g = parse_guard_not();
    while (at(Tok::AndAnd)) {
      ++pos;
      g = Guard::g_and(std::move(g), parse_guard_not());
    }
    return g;
  }

  Guard parse_guard_not() {
    if (at(Tok::Not)) {
      ++pos;
      return Guard::g_not(parse_guard_not());
    }
    if (at(Tok::Star)) {  // '*' is the constant true
      ++pos;
      return Guard::truth();
    }
    if (at(Tok::Ident) && cur().text == "true" && !is_cmp(peek().kind)) {
      ++pos;
      return Guard::truth();
    }
    if (at(Tok::LParen)) {
      // Could be a parenthesized guard or a parenthesized expression that
      // starts a comparison atom; try guard first by scanning for a
      // comparison operator at depth 0 before the closing paren.
      if (!paren_starts_atom()) {
        ++pos;
        Guard g = parse_guard();
        expect(Tok::RParen, "to close guard");
        return g;
      }
    }
    Expr lhs = parse_expr();
    if (!is_cmp(cur().kind)) {
      error_at(cur(), "expected a comparison operator in guard");
      return Guard::truth();
    }
    const Tok op = take().kind;
    Expr rhs = parse_expr();
    return Guard::cmp(cmp_of(op), std::move(lhs), std::move(rhs));
  }

  static bool is_reserved(const std::string& s) {
    return s == "param" || s == "var" || s == "system" || s == "true" || s == "min" ||
           s == "max" || s == "sccp";
  }

  static bool is_cmp(Tok k) {
    return k == Tok::Lt || k == Tok::Le || k == Tok::Gt || k == Tok::Ge || k == Tok::EqEq ||
           k == Tok::Ne;
  }

  static CmpOp cmp_of(Tok k) {
    switch (k) {
      case Tok::Lt: return CmpOp::Lt;
      case Tok::Le: return CmpOp::Le;
      case Tok::Gt: return CmpOp::Gt;
      case Tok::Ge: return CmpOp::Ge;
      case Tok::EqEq: return CmpOp::Eq;
      default: return CmpOp::Ne;
    }
  }

  // Whether a '(' at the current position opens an arithmetic atom, i.e.
  // after the matching ')' an arithmetic or comparison token follows.
  bool paren_starts_atom() const {
    int depth = 0;
    for (size_t j = pos; j < toks.size(); ++j) {
      const Tok k = toks[j].kind;
      if (k == Tok::LParen) ++depth;
      if (k == Tok::RParen) {
        --depth;
        if (depth == 0) {
          const Tok after = toks[std::min(j + 1, toks.size() - 1)].kind;
          return after == Tok::Plus || after == Tok::Minus || after == Tok::Star ||
                 after == Tok::Slash || after == Tok::Caret || is_cmp(after);
        }
      }
      if (k == Tok::End) break;
    }
    return false;
  }

  // --- updates / actions / definitions ---

  std::vector<RawAssign> parse_update() {
    std::vector<RawAssign> assigns;
    if (at(Tok::Star)) {
      ++pos;
      return assigns;
    }
    if (at(Tok::Ident) && cur().text == "true" && peek().kind != Tok::Prime) {
      ++pos;
      return assigns;
    }
    while (true) {
      const Token name = cur();
      if (!expect(Tok::Ident, "on the left of an assignment")) return assigns;
      expect(Tok::Prime, "after updated variable name");
      expect(Tok::Assign, "in assignment");
      Expr rhs = parse_expr();
      assigns.push_back({name.text, std::move(rhs), name.line, name.col});
      if (at(Tok::AndAnd)) {
        ++pos;
        continue;
      }
      break;
    }
    return assigns;
  }

  struct RawAction {
    Guard guard;
    std::vector<RawAssign> update;
    Expr rate;
    Token target;
    int line, col;
  };

  std::optional<RawAction> parse_action() {
    const Token open = cur();
    if (!expect(Tok::LBracket, "to open an action")) return std::nullopt;
    Guard g = parse_guard();
    expect(Tok::Arrow, "between guard and update");
    std::vector<RawAssign> upd = parse_update();
    expect(Tok::RBracket, "to close the action");
    expect(Tok::LBrace, "to open the rate");
    Expr rate = parse_expr();
    expect(Tok::RBrace, "to close the rate");
    expect(Tok::Dot, "before the continuation agent");
    const Token target = cur();
    if (!expect(Tok::Ident, "as the continuation agent")) return std::nullopt;
    return RawAction{std::move(g), std::move(upd), std::move(rate), target, open.line, open.col};
  }

  struct RawDef {
    Token name;
    std::vector<RawAction> actions;
  };
  std::vector<RawDef> raw_defs;

  void parse_definition(const Token& name) {
    ++pos;  // name
    expect(Tok::Assign, "after agent name");
    RawDef def{name, {}};
    while (true) {
      auto a = parse_action();
      if (a) def.actions.push_back(std::move(*a));
      if (at(Tok::Plus)) {
        ++pos;
        continue;
      }
      if (at(Tok::OrOr)) {
        error_at(cur(),
                 "parallel composition '||' is only allowed in the system line, not inside a "
                 "definition",
                 Diagnostic::Kind::Semantic);
        while (!at(Tok::Newline) && !at(Tok::End)) ++pos;
      }
      break;
    }
    raw_defs.push_back(std::move(def));
  }

  void parse_statement() {
    if (at(Tok::Newline)) {
      ++pos;
      return;
    }
    if (!at(Tok::Ident)) {
      error_at(cur(), std::string("expected a statement, found ") + tok_name(cur().kind));
      sync_to_line_end();
      return;
    }
    const Token head = cur();
    if (head.text == "param" || head.text == "var") {
      ++pos;
      const Token name = cur();
      if (!expect(Tok::Ident, "name")) {
        sync_to_line_end();
        return;
      }
      if (is_reserved(name.text))
        error_at(name, "'" + name.text + "' is a reserved word", Diagnostic::Kind::Semantic);
      expect(Tok::Assign, "in declaration");
      double sign = 1.0;
      if (at(Tok::Minus)) {
        ++pos;
        sign = -1.0;
      }
      const Token num = cur();
      if (!expect(Tok::Number, "as initial value")) {
        sync_to_line_end();
        return;
      }
      if (head.text == "param") {
        if (prog.param_index(name.text) >= 0 || prog.var_index(name.text) >= 0)
          error_at(name, "duplicate declaration of '" + name.text + "'",
                   Diagnostic::Kind::Semantic);
        prog.param_names.push_back(name.text);
        prog.param_values.push_back(sign * num.number);
      } else {
        if (prog.param_index(name.text) >= 0 || prog.var_index(name.text) >= 0)
          error_at(name, "duplicate declaration of '" + name.text + "'",
                   Diagnostic::Kind::Semantic);
        prog.store_vars.push_back(name.text);
        prog.init.push_back(sign * num.number);
      }
      end_statement();
      return;
    }
    if (head.text == "system") {
      ++pos;
      if (saw_system)
        error_at(head, "duplicate system line", Diagnostic::Kind::Semantic);
      saw_system = true;
      if (!at(Tok::Newline) && !at(Tok::End)) {
        while (true) {
          const Token name = cur();
          if (!expect(Tok::Ident, "in system line")) break;
          network_names.push_back(name.text);
          network_tokens.push_back(name);
          if (at(Tok::OrOr)) {
            ++pos;
            continue;
          }
          break;
        }
      }
      end_statement();
      return;
    }
    if (peek().kind == Tok::Assign) {
      parse_definition(head);
      end_statement();
      return;
    }
    error_at(head, "expected 'param', 'var', 'system', or an agent definition");
    sync_to_line_end();
  }

  void end_statement() {
    if (at(Tok::Newline)) {
      ++pos;
      return;
    }
    if (at(Tok::End)) return;
    error_at(cur(), std::string("unexpected ") + tok_name(cur().kind) + " at end of statement");
    sync_to_line_end();
  }

  void parse_header() {
    while (at(Tok::Newline)) ++pos;
    if (at(Tok::Ident) && cur().text == "sccp" && peek().kind == Tok::Ident &&
        peek().text == "v1") {
      pos += 2;
      saw_header = true;
      end_statement();
      return;
    }
    error_at(cur(), "missing 'sccp v1' header line");
  }

  // --- name resolution (second pass) ---

  Expr resolve_expr(const Expr& e) {
    const ExprNode& n = e.node();
    switch (n.op) {
      case ExprOp::Literal:
        return e;
      case ExprOp::Var: {
        int vi = prog.var_index(n.name);
        if (vi >= 0) return Expr::var(vi, n.name, n.line, n.col);
        int pi = prog.param_index(n.name);
        if (pi >= 0) return Expr::param(pi, n.name, n.line, n.col);
        diags.push_back({Diagnostic::Kind::Semantic, n.line, n.col,
                         "undefined variable or parameter '" + n.name + "'"});
        return Expr::var(0, n.name, n.line, n.col);
      }
      default: {
        Expr l = n.lhs ? resolve_expr(Expr::from_node(n.lhs)) : Expr();
        if (!n.rhs) return Expr::unary(n.op, std::move(l));
        Expr r = resolve_expr(Expr::from_node(n.rhs));
        return Expr::binary(n.op, std::move(l), std::move(r));
      }
    }
  }

  Guard resolve_guard(const Guard& g) {
    const GuardNode& n = g.node();
    switch (n.kind) {
      case GuardNode::Kind::True:
        return g;
      case GuardNode::Kind::Cmp:
        return Guard::cmp(n.cmp, resolve_expr(n.lhs), resolve_expr(n.rhs));
      case GuardNode::Kind::And:
        return Guard::g_and(resolve_guard(Guard::from_node(n.a)),
                            resolve_guard(Guard::from_node(n.b)));
      case GuardNode::Kind::Or:
        return Guard::g_or(resolve_guard(Guard::from_node(n.a)),
                           resolve_guard(Guard::from_node(n.b)));
      case GuardNode::Kind::Not:
        return Guard::g_not(resolve_guard(Guard::from_node(n.a)));
    }
    return g;
  }

  SccpProgram finish() {
    // Register agents first so that forward references resolve.
    std::set<std::string> names;
    for (const RawDef& d : raw_defs) {
      if (!names.insert(d.name.text).second) {
        error_at(d.name, "duplicate definition of agent '" + d.name.text + "'",
                 Diagnostic::Kind::Semantic);
        continue;
      }
      if (is_reserved(d.name.text))
        error_at(d.name, "'" + d.name.text + "' is a reserved word", Diagnostic::Kind::Semantic);
      if (prog.var_index(d.name.text) >= 0 || prog.param_index(d.name.text) >= 0)
        error_at(d.name, "agent name '" + d.name.text + "' collides with a declaration",
                 Diagnostic::Kind::Semantic);
      AgentDef def;
      def.name = d.name.text;
      def.line = d.name.line;
      prog.agents.push_back(std::move(def));
    }
    for (const RawDef& d : raw_defs) {
      const int ai = prog.agent_index(d.name.text);
      if (ai < 0) continue;
      AgentDef& def = prog.agents[static_cast<size_t>(ai)];
      if (!def.actions.empty()) continue;  // duplicate already reported
      for (const RawAction& ra : d.actions) {
        Action a;
        a.guard = resolve_guard(ra.guard);
        a.rate = resolve_expr(ra.rate);
        a.line = ra.line;
        a.col = ra.col;
        for (const RawAssign& asg : ra.update) {
          const int vi = prog.var_index(asg.var);
          if (vi < 0) {
            diags.push_back({Diagnostic::Kind::Semantic, asg.line, asg.col,
                             "update assigns undeclared variable '" + asg.var + "'"});
            continue;
          }
          if (a.update.assigns_var(vi))
            diags.push_back({Diagnostic::Kind::Semantic, asg.line, asg.col,
                             "variable '" + asg.var + "' assigned twice in one update"});
          a.update.assigns.push_back({vi, asg.var, resolve_expr(asg.rhs)});
        }
        a.target = prog.agent_index(ra.target.text);
        a.target_name = ra.target.text;
        if (a.target < 0)
          error_at(ra.target, "undefined agent '" + ra.target.text + "'",
                   Diagnostic::Kind::Semantic);
        def.actions.push_back(std::move(a));
      }
    }
    if (!saw_system && saw_header)
      diags.push_back({Diagnostic::Kind::Semantic, 0, 0, "missing system line"});
    for (size_t i = 0; i < network_names.size(); ++i) {
      const int ai = prog.agent_index(network_names[i]);
      if (ai < 0) {
        error_at(network_tokens[i], "undefined agent '" + network_names[i] + "' in system line",
                 Diagnostic::Kind::Semantic);
        continue;
      }
      prog.network.push_back(ai);
    }
    return std::move(prog);
  }

  ParseResult run() {
    parse_header();
    if (!saw_header) return {std::nullopt, std::move(diags)};
    while (!at(Tok::End)) parse_statement();
    SccpProgram p = finish();
    if (!diags.empty()) return {std::nullopt, std::move(diags)};
    return {std::move(p), {}};
  }
};

}  // namespace

ParseResult parse_program(std::string_view text) {
  Parser parser(text);
  return parser.run();
}

}  // namespace sccp
