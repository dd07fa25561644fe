// Surface syntax for temporal stream formulas.
//
//   formula   := iff
//   iff       := impl ("<->" impl)*                 left-assoc
//   impl      := or ("->" impl)?                    right-assoc
//   or        := and ("||" and)*
//   and       := untilrel ("&&" untilrel)*
//   untilrel  := unary (("U" | "R") untilrel)?      right-assoc
//   unary     := ("!" | "X" | "F" | "G") unary | atom
//   atom      := "true" | "false" | "(" formula ")"
//              | "[" cell "<-" term "]"
//              | ident "(" terms? ")"               predicate application
//   term      := ident "(" terms? ")"               function application
//              | ident                              cell reference
//
// "//" starts a line comment. X F G U R are reserved operator tokens.
// Without an explicit signature, symbol roles and arities are inferred from
// use; conflicting uses are errors.
#pragma once

#include <optional>

#include "tslsat/core.hpp"

namespace tslsat {

class ParseError : public Error {
 public:
  ParseError(const std::string& msg, int line, int col)
      : Error("parse error at " + std::to_string(line) + ":" + std::to_string(col) + ": " + msg),
        line(line),
        col(col) {}
  int line, col;
};

namespace detail {

struct Token {
  enum Kind {
    End, Ident, True, False, Not, AndOp, OrOp, Implies, Iff,
    Next, Finally, Globally, UntilOp, ReleaseOp,
    LParen, RParen, LBracket, RBracket, Arrow, Comma,
  } kind;
  std::string text;
  int line, col;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  Token next() {
    skip_ws();
    int line = line_, col = col_;
    if (pos_ >= src_.size()) return {Token::End, "", line, col};
    char c = src_[pos_];
    auto tok = [&](Token::Kind k, std::size_t len) {
      Token t{k, std::string(src_.substr(pos_, len)), line, col};
      advance(len);
      return t;
    };
    if (c == '(') return tok(Token::LParen, 1);
    if (c == ')') return tok(Token::RParen, 1);
    if (c == '[') return tok(Token::LBracket, 1);
    if (c == ']') return tok(Token::RBracket, 1);
    if (c == ',') return tok(Token::Comma, 1);
    if (c == '!') return tok(Token::Not, 1);
    if (src_.substr(pos_, 2) == "&&") return tok(Token::AndOp, 2);
    if (src_.substr(pos_, 2) == "||") return tok(Token::OrOp, 2);
    if (src_.substr(pos_, 3) == "<->") return tok(Token::Iff, 3);
    if (src_.substr(pos_, 2) == "<-") return tok(Token::Arrow, 2);
    if (src_.substr(pos_, 2) == "->") return tok(Token::Implies, 2);
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t len = 1;
      while (pos_ + len < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_ + len])) || src_[pos_ + len] == '_'))
        ++len;
      std::string_view word = src_.substr(pos_, len);
      if (word == "true") return tok(Token::True, len);
      if (word == "false") return tok(Token::False, len);
      if (word == "X") return tok(Token::Next, len);
      if (word == "F") return tok(Token::Finally, len);
      if (word == "G") return tok(Token::Globally, len);
      if (word == "U") return tok(Token::UntilOp, len);
      if (word == "R") return tok(Token::ReleaseOp, len);
      return tok(Token::Ident, len);
    }
    throw ParseError(std::string("unexpected character '") + c + "'", line, col);
  }

 private:
  void skip_ws() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == '/' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '/') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance(1);
      } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        advance(1);
      } else {
        break;
      }
    }
  }
  void advance(std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
      if (src_[pos_] == '\n') {
        ++line_;
        col_ = 1;
      } else {
        ++col_;
      }
      ++pos_;
    }
  }
  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1, col_ = 1;
};

class Parser {
 public:
  Parser(std::string_view src, const Signature* fixed_sig)
      : lex_(src), fixed_(fixed_sig) {
    if (fixed_) sig_ = *fixed_;
    cur_ = lex_.next();
  }

  TslFormula run() {
    FormulaPtr f = parse_iff();
    expect(Token::End, "end of input");
    auto sig = std::make_shared<Signature>(std::move(sig_));
    return TslFormula{std::move(f), std::move(sig)};
  }

 private:
  [[noreturn]] void fail(const std::string& msg) { throw ParseError(msg, cur_.line, cur_.col); }
  void bump() { cur_ = lex_.next(); }
  bool accept(Token::Kind k) {
    if (cur_.kind != k) return false;
    bump();
    return true;
  }
  void expect(Token::Kind k, const char* what) {
    if (cur_.kind != k) fail(std::string("expected ") + what);
    bump();
  }

  FormulaPtr parse_iff() {
    FormulaPtr f = parse_impl();
    while (accept(Token::Iff)) f = f_iff(std::move(f), parse_impl());
    return f;
  }
  FormulaPtr parse_impl() {
    FormulaPtr f = parse_or();
    if (accept(Token::Implies)) return f_implies(std::move(f), parse_impl());
    return f;
  }
  FormulaPtr parse_or() {
    FormulaPtr f = parse_and();
    while (accept(Token::OrOp)) f = f_or(std::move(f), parse_and());
    return f;
  }
  FormulaPtr parse_and() {
    FormulaPtr f = parse_until();
    while (accept(Token::AndOp)) f = f_and(std::move(f), parse_until());
    return f;
  }
  FormulaPtr parse_until() {
    FormulaPtr f = parse_unary();
    if (accept(Token::UntilOp)) return f_until(std::move(f), parse_until());
    if (accept(Token::ReleaseOp)) return f_release(std::move(f), parse_until());
    return f;
  }
  FormulaPtr parse_unary() {
    if (accept(Token::Not)) return f_not(parse_unary());
    if (accept(Token::Next)) return f_next(parse_unary());
    if (accept(Token::Finally)) return f_eventually(parse_unary());
    if (accept(Token::Globally)) return f_globally(parse_unary());
    return parse_atom();
  }

  FormulaPtr parse_atom() {
    if (accept(Token::True)) return f_true();
    if (accept(Token::False)) return f_false();
    if (accept(Token::LParen)) {
      FormulaPtr f = parse_iff();
      expect(Token::RParen, "')'");
      return f;
    }
    if (cur_.kind == Token::LBracket) return parse_update();
    if (cur_.kind == Token::Ident) {
      Token name = cur_;
      bump();
      if (cur_.kind != Token::LParen)
        throw ParseError("bare identifier in formula position (predicates need parentheses)",
                         name.line, name.col);
      std::vector<TermId> args = parse_args();
      use_predicate(name, static_cast<unsigned>(args.size()));
      return f_pred(arena().apply(name.text, std::move(args)));
    }
    fail("expected a formula");
  }

  FormulaPtr parse_update() {
    expect(Token::LBracket, "'['");
    if (cur_.kind != Token::Ident) fail("expected a cell name");
    Token cell = cur_;
    bump();
    expect(Token::Arrow, "'<-'");
    TermId t = parse_term();
    expect(Token::RBracket, "']'");
    std::uint32_t idx = use_cell(cell);
    return f_update(idx, t);
  }

  TermId parse_term() {
    if (cur_.kind != Token::Ident) fail("expected a term");
    Token name = cur_;
    bump();
    if (cur_.kind == Token::LParen) {
      std::vector<TermId> args = parse_args();
      use_function(name, static_cast<unsigned>(args.size()));
      return arena().apply(name.text, std::move(args));
    }
    use_cell(name);
    return arena().cell(name.text);
  }

  std::vector<TermId> parse_args() {
    expect(Token::LParen, "'('");
    std::vector<TermId> args;
    if (!accept(Token::RParen)) {
      args.push_back(parse_term());
      while (accept(Token::Comma)) args.push_back(parse_term());
      expect(Token::RParen, "')'");
    }
    return args;
  }

  void check_reserved(const Token& name) {
    if (is_reserved_name(name.text))
      throw ParseError("reserved name: " + name.text, name.line, name.col);
  }

  void use_function(const Token& name, unsigned arity) {
    check_reserved(name);
    if (sig_.has_function(name.text)) {
      if (sig_.function_arity(name.text) != arity)
        throw ParseError("function " + name.text + " used at arities " +
                             std::to_string(sig_.function_arity(name.text)) + " and " +
                             std::to_string(arity),
                         name.line, name.col);
      return;
    }
    if (sig_.has_name(name.text))
      throw ParseError(name.text + " used both as a function and as something else", name.line,
                       name.col);
    if (fixed_) throw ParseError("unknown function: " + name.text, name.line, name.col);
    sig_.add_function(name.text, arity);
  }

  void use_predicate(const Token& name, unsigned arity) {
    check_reserved(name);
    if (sig_.has_predicate(name.text)) {
      if (sig_.predicate_arity(name.text) != arity)
        throw ParseError("predicate " + name.text + " used at arities " +
                             std::to_string(sig_.predicate_arity(name.text)) + " and " +
                             std::to_string(arity),
                         name.line, name.col);
      return;
    }
    if (sig_.has_name(name.text))
      throw ParseError(name.text + " used both as a predicate and as something else", name.line,
                       name.col);
    if (fixed_) throw ParseError("unknown predicate: " + name.text, name.line, name.col);
    sig_.add_predicate(name.text, arity);
  }

  std::uint32_t use_cell(const Token& name) {
    check_reserved(name);
    if (sig_.has_cell(name.text)) return sig_.cell_index(name.text);
    if (sig_.has_name(name.text))
      throw ParseError(name.text + " used both as a cell and as something else", name.line,
                       name.col);
    if (fixed_) throw ParseError("unknown cell: " + name.text, name.line, name.col);
    return sig_.add_cell(name.text);
  }

  Lexer lex_;
  Token cur_;
  const Signature* fixed_;
  Signature sig_;
};

}  // namespace detail

// Parse with symbol inference: bare identifiers in term position become
// cells, applied identifiers become functions (in terms) or predicates (in
// formula position); arities must be consistent across uses.
inline TslFormula parse_formula(std::string_view text) {
  return detail::Parser(text, nullptr).run();
}

// Parse against a fixed signature; unknown symbols are errors.
inline TslFormula parse_formula(std::string_view text, const Signature& sig) {
  return detail::Parser(text, &sig).run();
}

}  // namespace tslsat
