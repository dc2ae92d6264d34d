#include <cctype>
#include <optional>
#include <set>
#include <string>

#include "geobound/lang.hpp"

namespace geobound {
namespace {

enum class Tok {
  Ident, Number, LBrace, RBrace, LParen, RParen, LBracket, RBracket, Semi, Comma,
  Bang, AndAnd, OrOr, Eq, EqEq, NotEq, Lt, Le, Gt, Ge, Assign, PlusEq, MinusEq, Tilde, End
};

struct Token {
  Tok kind;
  std::string text;
  std::size_t line;
  std::size_t column;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_space();
      const std::size_t l = line_, c = col_;
      if (pos_ >= src_.size()) {
        out.push_back({Tok::End, "", l, c});
        return out;
      }
      const char ch = src_[pos_];
      if (std::isalpha(static_cast<unsigned char>(ch)) || ch == '_') {
        std::string s;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
          s += get();
        }
        out.push_back({Tok::Ident, s, l, c});
        continue;
      }
      if (std::isdigit(static_cast<unsigned char>(ch))) {
        std::string s;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) s += get();
        if (pos_ + 1 < src_.size() && (src_[pos_] == '/' || src_[pos_] == '.') &&
            std::isdigit(static_cast<unsigned char>(src_[pos_ + 1]))) {
          s += get();
          while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) s += get();
        }
        out.push_back({Tok::Number, s, l, c});
        continue;
      }
      const auto two = [&](char next) { return pos_ + 1 < src_.size() && src_[pos_ + 1] == next; };
      Tok kind;
      std::size_t len = 1;
      switch (ch) {
        case '{': kind = Tok::LBrace; break;
        case '}': kind = Tok::RBrace; break;
        case '(': kind = Tok::LParen; break;
        case ')': kind = Tok::RParen; break;
        case '[': kind = Tok::LBracket; break;
        case ']': kind = Tok::RBracket; break;
        case ';': kind = Tok::Semi; break;
        case ',': kind = Tok::Comma; break;
        case '~': kind = Tok::Tilde; break;
        case '!':
          if (two('=')) { kind = Tok::NotEq; len = 2; } else { kind = Tok::Bang; }
          break;
        case '&':
          if (!two('&')) throw ParseError("expected '&&'", l, c);
          kind = Tok::AndAnd; len = 2;
          break;
        case '|':
          if (!two('|')) throw ParseError("expected '||'", l, c);
          kind = Tok::OrOr; len = 2;
          break;
        case '=':
          if (two('=')) { kind = Tok::EqEq; len = 2; } else { kind = Tok::Eq; }
          break;
        case '<':
          if (two('=')) { kind = Tok::Le; len = 2; } else { kind = Tok::Lt; }
          break;
        case '>':
          if (two('=')) { kind = Tok::Ge; len = 2; } else { kind = Tok::Gt; }
          break;
        case ':':
          if (!two('=')) throw ParseError("expected ':='", l, c);
          kind = Tok::Assign; len = 2;
          break;
        case '+':
          if (!two('=')) throw ParseError("expected '+='", l, c);
          kind = Tok::PlusEq; len = 2;
          break;
        case '-':
          if (!two('=')) throw ParseError("expected '-='", l, c);
          kind = Tok::MinusEq; len = 2;
          break;
        default:
          throw ParseError(std::string("unexpected character '") + ch + "'", l, c);
      }
      std::string s;
      for (std::size_t i = 0; i < len; ++i) s += get();
      out.push_back({kind, s, l, c});
    }
  }

 private:
  char get() {
    const char ch = src_[pos_++];
    if (ch == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return ch;
  }

  void skip_space() {
    while (pos_ < src_.size()) {
      if (std::isspace(static_cast<unsigned char>(src_[pos_]))) {
        get();
      } else if (src_[pos_] == '#') {
        while (pos_ < src_.size() && src_[pos_] != '\n') get();
      } else {
        break;
      }
    }
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t col_ = 1;
};

const std::set<std::string, std::less<>> kKeywords = {
    "skip", "fail", "observe", "if", "else", "while", "in", "flip",
    "true", "false", "bernoulli", "geometric", "uniform"};

class Parser {
 public:
  Parser(std::vector<Token> toks, CoreProgram* prog, bool allow_new_vars)
      : toks_(std::move(toks)), prog_(prog), allow_new_vars_(allow_new_vars) {}

  StmtPtr program() {
    std::vector<StmtPtr> items;
    while (peek().kind != Tok::End) items.push_back(statement());
    return sequence(items);
  }

  EventPtr lone_event() {
    EventPtr e = event();
    expect(Tok::End, "end of input");
    return e;
  }

  std::size_t loops = 0;
  std::set<std::size_t> assigned;
  std::vector<std::pair<std::size_t, Token>> read;

 private:
  const Token& peek() const { return toks_[pos_]; }
  const Token& next() { return toks_[pos_++]; }
  bool at_keyword(std::string_view kw) const {
    return peek().kind == Tok::Ident && peek().text == kw;
  }
  bool accept(Tok k) {
    if (peek().kind != k) return false;
    ++pos_;
    return true;
  }
  const Token& expect(Tok k, std::string_view what) {
    if (peek().kind != k) fail_at(peek(), "expected " + std::string(what));
    return next();
  }
  void expect_keyword(std::string_view kw) {
    if (!at_keyword(kw)) fail_at(peek(), "expected '" + std::string(kw) + "'");
    ++pos_;
  }
  [[noreturn]] static void fail_at(const Token& t, const std::string& msg) {
    throw ParseError(t.kind == Tok::End ? msg + " at end of input" : msg + " near '" + t.text + "'",
                     t.line, t.column);
  }

  static StmtPtr sequence(const std::vector<StmtPtr>& items) {
    // Flatten nested sequences, drop skips, rebuild right-nested.
    std::vector<StmtPtr> flat;
    const auto push = [&](const auto& self, const StmtPtr& s) -> void {
      if (const auto* q = std::get_if<Seq>(&s->node)) {
        self(self, q->first);
        self(self, q->second);
      } else if (!std::holds_alternative<Skip>(s->node)) {
        flat.push_back(s);
      }
    };
    for (const auto& s : items) push(push, s);
    if (flat.empty()) return Statement::skip();
    StmtPtr acc = flat.back();
    for (std::size_t i = flat.size() - 1; i-- > 0;) acc = Statement::seq(flat[i], acc);
    return acc;
  }

  std::size_t variable(const Token& t, bool assigning) {
    if (kKeywords.count(t.text)) fail_at(t, "keyword used as variable");
    for (std::size_t i = 0; i < prog_->var_names.size(); ++i) {
      if (prog_->var_names[i] == t.text) {
        if (assigning) assigned.insert(i);
        else read.emplace_back(i, t);
        return i;
      }
    }
    if (!allow_new_vars_) fail_at(t, "unknown variable");
    prog_->var_names.push_back(t.text);
    const std::size_t i = prog_->var_names.size() - 1;
    if (assigning) assigned.insert(i);
    else read.emplace_back(i, t);
    return i;
  }

  std::uint64_t natural() {
    const Token& t = expect(Tok::Number, "natural number");
    if (t.text.find_first_of("./") != std::string::npos) fail_at(t, "expected natural number");
    try {
      return std::stoull(t.text);
    } catch (const std::exception&) {
      fail_at(t, "number too large");
    }
  }

  Rational probability() {
    const Token& t = next();
    if (t.kind != Tok::Number) fail_at(t, "expected probability literal");
    Rational p;
    try {
      p = parse_rational(t.text);
    } catch (const std::exception&) {
      fail_at(t, "malformed probability literal");
    }
    if (p < 0 || p > 1) fail_at(t, "probability literal outside [0,1]");
    return p;
  }

  StmtPtr block() {
    expect(Tok::LBrace, "'{'");
    std::vector<StmtPtr> items;
    while (peek().kind != Tok::RBrace) {
      if (peek().kind == Tok::End) fail_at(peek(), "expected '}'");
      items.push_back(statement());
    }
    next();
    return sequence(items);
  }

  StmtPtr assign_const(std::size_t v, std::uint64_t c) {
    if (c == 0) return Statement::set_zero(v);
    return Statement::seq(Statement::set_zero(v), Statement::add_const(v, c));
  }

  StmtPtr statement() {
    if (at_keyword("skip")) {
      next();
      expect(Tok::Semi, "';'");
      return Statement::skip();
    }
    if (at_keyword("fail")) {
      next();
      expect(Tok::Semi, "';'");
      return Statement::fail();
    }
    if (at_keyword("observe")) {
      next();
      EventPtr e = event();
      expect(Tok::Semi, "';'");
      return Statement::ite(e, Statement::skip(), Statement::fail());
    }
    if (at_keyword("if")) return if_statement();
    if (at_keyword("while")) {
      next();
      EventPtr e = event();
      const std::size_t id = loops++;
      StmtPtr body = block();
      return Statement::loop(e, body, id);
    }
    if (peek().kind == Tok::LBrace) {
      StmtPtr lhs = block();
      if (!accept(Tok::LBracket)) return lhs;
      Rational p = probability();
      expect(Tok::RBracket, "']'");
      StmtPtr rhs = block();
      return Statement::ite(Event::flip(p), lhs, rhs);
    }
    if (peek().kind != Tok::Ident) fail_at(peek(), "expected statement");
    const Token& name = next();
    const std::size_t v = variable(name, true);
    StmtPtr out;
    switch (next().kind) {
      case Tok::Assign:
        out = assign_const(v, natural());
        break;
      case Tok::PlusEq: {
        const std::uint64_t c = natural();
        out = c == 0 ? Statement::skip() : Statement::add_const(v, c);
        break;
      }
      case Tok::MinusEq: {
        const std::uint64_t c = natural();
        std::vector<StmtPtr> decs(c, Statement::dec(v));
        out = sequence(decs);
        break;
      }
      case Tok::Tilde:
        out = distribution(v);
        break;
      default:
        fail_at(toks_[pos_ - 1], "expected ':=', '+=', '-=' or '~'");
    }
    expect(Tok::Semi, "';'");
    return out;
  }

  StmtPtr if_statement() {
    expect_keyword("if");
    EventPtr e = event();
    StmtPtr then_b = block();
    StmtPtr else_b = Statement::skip();
    if (at_keyword("else")) {
      next();
      else_b = at_keyword("if") ? if_statement() : block();
    }
    return Statement::ite(e, then_b, else_b);
  }

  StmtPtr distribution(std::size_t v) {
    if (peek().kind != Tok::Ident) fail_at(peek(), "expected distribution");
    const Token& d = next();
    expect(Tok::LParen, "'('");
    StmtPtr out;
    if (d.text == "bernoulli") {
      Rational p = probability();
      out = Statement::ite(Event::flip(p), assign_const(v, 1), assign_const(v, 0));
    } else if (d.text == "geometric") {
      const Token& at = peek();
      Rational p = probability();
      if (p == 0) fail_at(at, "geometric parameter must be positive");
      const std::size_t id = loops++;
      out = Statement::seq(Statement::set_zero(v),
                           Statement::loop(Event::negate(Event::flip(p)),
                                           Statement::add_const(v, 1), id));
    } else if (d.text == "uniform") {
      const Token& at = peek();
      const std::uint64_t a = natural();
      expect(Tok::Comma, "','");
      const std::uint64_t b = natural();
      if (a > b) fail_at(at, "empty uniform range");
      out = assign_const(v, b);
      for (std::uint64_t k = b; k-- > a;) {
        const std::uint64_t n = b - k + 1;
        out = Statement::ite(Event::flip(ratio(1, n)), assign_const(v, k), out);
      }
    } else {
      fail_at(d, "unknown distribution");
    }
    expect(Tok::RParen, "')'");
    return out;
  }

  EventPtr event() {
    EventPtr e = conjunction();
    while (accept(Tok::OrOr)) e = Event::disj(e, conjunction());
    return e;
  }

  EventPtr conjunction() {
    EventPtr e = unary();
    while (accept(Tok::AndAnd)) e = Event::conj(e, unary());
    return e;
  }

  EventPtr unary() {
    if (accept(Tok::Bang)) return Event::negate(unary());
    return atom();
  }

  static EventPtr any_of(std::size_t v, const std::vector<std::uint64_t>& values) {
    if (values.empty()) return Event::flip(0);
    EventPtr e = Event::var_eq(v, values[0]);
    for (std::size_t i = 1; i < values.size(); ++i) e = Event::disj(e, Event::var_eq(v, values[i]));
    return e;
  }

  static std::vector<std::uint64_t> upto(std::uint64_t n) {
    std::vector<std::uint64_t> vs;
    for (std::uint64_t i = 0; i < n; ++i) vs.push_back(i);
    return vs;
  }

  EventPtr atom() {
    if (accept(Tok::LParen)) {
      EventPtr e = event();
      expect(Tok::RParen, "')'");
      return e;
    }
    if (at_keyword("true")) {
      next();
      return Event::flip(1);
    }
    if (at_keyword("false")) {
      next();
      return Event::flip(0);
    }
    if (at_keyword("flip")) {
      next();
      expect(Tok::LParen, "'('");
      Rational p = probability();
      expect(Tok::RParen, "')'");
      return Event::flip(p);
    }
    if (peek().kind != Tok::Ident) fail_at(peek(), "expected event");
    const Token& name = next();
    const std::size_t v = variable(name, false);
    if (at_keyword("in")) {
      next();
      expect(Tok::LBrace, "'{'");
      std::vector<std::uint64_t> vs{natural()};
      while (accept(Tok::Comma)) vs.push_back(natural());
      expect(Tok::RBrace, "'}'");
      return any_of(v, vs);
    }
    const Token& op = next();
    const std::uint64_t c = natural();
    switch (op.kind) {
      case Tok::Eq:
      case Tok::EqEq: return Event::var_eq(v, c);
      case Tok::NotEq: return Event::negate(Event::var_eq(v, c));
      case Tok::Lt: return any_of(v, upto(c));
      case Tok::Le: return any_of(v, upto(c + 1));
      case Tok::Ge: return Event::negate(any_of(v, upto(c)));
      case Tok::Gt: return Event::negate(any_of(v, upto(c + 1)));
      default: fail_at(op, "expected comparison");
    }
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  CoreProgram* prog_;
  bool allow_new_vars_;
};

}  // namespace

CoreProgram parse(std::string_view source) {
  CoreProgram prog;
  Parser p(Lexer(source).run(), &prog, true);
  prog.body = p.program();
  for (const auto& [v, tok] : p.read) {
    if (!p.assigned.count(v)) throw ParseError("unknown variable '" + tok.text + "'", tok.line, tok.column);
  }
  if (prog.var_names.empty()) prog.var_names.push_back("_");
  prog.var_count = prog.var_names.size();
  prog.loop_count = p.loops;
  return prog;
}

EventPtr parse_event(std::string_view source, const CoreProgram& program) {
  CoreProgram copy = program;
  Parser p(Lexer(source).run(), &copy, false);
  return p.lone_event();
}

}  // namespace geobound
