#include <catch2/catch_amalgamated.hpp>

#include "tslsat/parser.hpp"

using namespace tslsat;

namespace {

TslFormula rt(const std::string& text) {
  TslFormula f = parse_formula(text);
  TslFormula g = parse_formula(formula_to_string(f));
  REQUIRE(formula_equal(f.root, g.root));
  REQUIRE(*f.sig == *g.sig);
  return f;
}

}  // namespace

TEST_CASE("parse and print round-trip") {
  rt("p(x)");
  rt("[x <- f(x)]");
  rt("G [x <- f(x)] && G F (p(x) && X !p(x))");
  rt("a(x) U (b(x) R c(x))");
  rt("false -> (p(x) <-> q(x))");
  rt("p(g(x, h(y))) || !q(c())");
  rt("true U [y <- y]");
}

TEST_CASE("operator precedence and associativity") {
  // ! binds tighter than &&, && tighter than ||, || tighter than ->.
  TslFormula f = parse_formula("!p(x) && q(x) || r(x) -> s(x)");
  TslFormula g = parse_formula("(((!p(x)) && q(x)) || r(x)) -> s(x)");
  CHECK(formula_equal(f.root, g.root));

  // U is right-associative and binds tighter than &&.
  CHECK(formula_equal(parse_formula("a(x) U b(x) U c(x)").root,
                      parse_formula("a(x) U (b(x) U c(x))").root));
  CHECK(formula_equal(parse_formula("a(x) && b(x) U c(x)").root,
                      parse_formula("a(x) && (b(x) U c(x))").root));

  // -> is right-associative; <-> is looser than ->.
  CHECK(formula_equal(parse_formula("a(x) -> b(x) -> c(x)").root,
                      parse_formula("a(x) -> (b(x) -> c(x))").root));
  CHECK(formula_equal(parse_formula("a(x) <-> b(x) -> c(x)").root,
                      parse_formula("a(x) <-> (b(x) -> c(x))").root));

  // Temporal prefixes stack.
  CHECK(formula_equal(parse_formula("G F X p(x)").root,
                      parse_formula("G (F (X p(x)))").root));
}

TEST_CASE("signature is inferred from use") {
  TslFormula f = parse_formula("p(f(x), y) && [y <- g(c())]");
  CHECK(f.sig->num_cells() == 2);
  CHECK(f.sig->cell_index("x") == 0);
  CHECK(f.sig->cell_index("y") == 1);
  CHECK(f.sig->function_arity("f") == 1);
  CHECK(f.sig->function_arity("g") == 1);
  CHECK(f.sig->function_arity("c") == 0);
  CHECK(f.sig->predicate_arity("p") == 2);
}

TEST_CASE("inference rejects inconsistent use") {
  CHECK_THROWS_AS(parse_formula("p(x) && p(x, y)"), ParseError);      // arity clash
  CHECK_THROWS_AS(parse_formula("p(p(x))"), ParseError);              // predicate as function
  CHECK_THROWS_AS(parse_formula("[f(x) <- x]"), ParseError);          // non-cell update target
  CHECK_THROWS_AS(parse_formula("p(x) && x(y)"), ParseError);         // cell used as symbol
  CHECK_THROWS_AS(parse_formula("[n <- f(n)]"), ParseError);          // reserved name
  CHECK_THROWS_AS(parse_formula("p(new(x))"), ParseError);            // reserved name
  CHECK_THROWS_AS(parse_formula("p(x"), ParseError);                  // unbalanced
  CHECK_THROWS_AS(parse_formula(""), ParseError);                     // empty input
  CHECK_THROWS_AS(parse_formula("p(x) q(x)"), ParseError);            // trailing tokens
}

TEST_CASE("parse errors carry position info") {
  try {
    parse_formula("p(x) &&\n  #");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line == 2);
    CHECK(e.col == 3);
    CHECK(std::string(e.what()).find("2:3") != std::string::npos);
  }
}

TEST_CASE("parsing against a fixed signature") {
  Signature sig;
  sig.add_cell("x");
  sig.add_function("f", 1);
  sig.add_predicate("p", 1);

  TslFormula f = parse_formula("p(f(x))", sig);
  CHECK(*f.sig == sig);

  // Symbols outside the fixed signature are rejected instead of inferred.
  CHECK_THROWS_AS(parse_formula("q(x)", sig), ParseError);
  CHECK_THROWS_AS(parse_formula("p(f(x, y))", sig), ParseError);
}

TEST_CASE("comments and whitespace are skipped") {
  TslFormula f = parse_formula("// leading note\np(x) // trailing\n&& q(x)\n");
  CHECK(formula_equal(f.root, parse_formula("p(x) && q(x)").root));
}
