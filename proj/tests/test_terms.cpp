#include <catch2/catch_amalgamated.hpp>

#include "tslsat/core.hpp"

using namespace tslsat;

TEST_CASE("arena interning is content-addressed") {
  TermId x1 = arena().cell("x");
  TermId x2 = arena().cell("x");
  CHECK(x1 == x2);

  TermId fx = arena().apply("f", {x1});
  TermId fx2 = arena().apply("f", {x2});
  CHECK(fx == fx2);
  CHECK(fx != x1);

  TermId gx = arena().apply("g", {x1});
  CHECK(gx != fx);

  TermId ffx = arena().apply("f", {fx});
  CHECK(ffx != fx);
  CHECK(arena().node(ffx).args == std::vector<TermId>{fx});

  CHECK(arena().star() == 0);
  CHECK(arena().node(arena().star()).kind == TermKind::Star);
}

TEST_CASE("term printing") {
  TermId x = arena().cell("x");
  TermId c = arena().apply("c", {});
  TermId h = arena().apply("h", {x, c});
  CHECK(term_to_string(x) == "x");
  CHECK(term_to_string(c) == "c()");
  CHECK(term_to_string(h) == "h(x, c())");
  CHECK(term_to_string(arena().star()) == "*");
}

TEST_CASE("signature role and reserved-name rules") {
  Signature sig;
  sig.add_cell("x");
  sig.add_function("f", 1);
  sig.add_predicate("p", 2);

  CHECK(sig.num_cells() == 1);
  CHECK(sig.function_arity("f") == 1);
  CHECK(sig.predicate_arity("p") == 2);
  CHECK(sig.cell_index("x") == 0);

  CHECK_THROWS_AS(sig.add_function("x", 0), Error);   // name already a cell
  CHECK_THROWS_AS(sig.add_cell("p"), Error);          // name already a predicate
  CHECK_THROWS_AS(sig.add_predicate("f", 1), Error);  // name already a function

  CHECK_THROWS_AS(sig.add_cell("n"), Error);
  CHECK_THROWS_AS(sig.add_function("new", 1), Error);
  CHECK_THROWS_AS(sig.add_predicate("pick_x", 1), Error);
  CHECK_NOTHROW(sig.add_cell_reserved("n"));

  CHECK(sig.cell_index_of_term(arena().cell("x")) == 0);
  CHECK(sig.cell_index_of_term(arena().cell("zz")) == -1);
  CHECK(sig.cell_index_of_term(arena().apply("f", {arena().cell("x")})) == -1);
}

TEST_CASE("sugar desugars into the five-connective core") {
  TermId p = arena().apply("p", {arena().cell("x")});
  FormulaPtr fp = f_pred(p);

  CHECK(f_false()->kind == FKind::Not);
  CHECK(f_false()->a->kind == FKind::True);

  FormulaPtr orr = f_or(fp, fp);
  CHECK(orr->kind == FKind::Not);
  CHECK(orr->a->kind == FKind::And);

  FormulaPtr ev = f_eventually(fp);
  CHECK(ev->kind == FKind::Until);
  CHECK(ev->a->kind == FKind::True);

  FormulaPtr glob = f_globally(fp);
  CHECK(glob->kind == FKind::Not);
  CHECK(glob->a->kind == FKind::Until);

  CHECK(formula_equal(f_iff(fp, fp), f_and(f_implies(fp, fp), f_implies(fp, fp))));
  CHECK_FALSE(formula_equal(f_not(fp), fp));
}

TEST_CASE("predicate, update, and cell collectors") {
  auto sig = std::make_shared<Signature>();
  std::uint32_t x = sig->add_cell("x");
  std::uint32_t y = sig->add_cell("y");
  sig->add_function("f", 1);
  sig->add_predicate("p", 1);
  TermId xt = arena().cell("x");
  TermId yt = arena().cell("y");
  TermId fx = arena().apply("f", {xt});
  TermId px = arena().apply("p", {xt});

  // p(x) && ([x <- f(x)] U [y <- x]) && p(x)
  FormulaPtr f = f_and(f_pred(px), f_and(f_until(f_update(x, fx), f_update(y, xt)), f_pred(px)));
  TslFormula tf{f, sig};

  auto preds = all_predicates(tf);
  REQUIRE(preds.size() == 1);  // duplicates collapse
  CHECK(preds[0] == px);

  auto ups = all_updates(tf);
  REQUIRE(ups.size() == 2);
  CHECK(ups[0].cell == x);
  CHECK(ups[0].term == fx);
  CHECK(ups[1].cell == y);
  CHECK(ups[1].term == xt);

  auto cs = cells_of(tf);
  CHECK(cs == std::vector<std::uint32_t>{x, y});

  CHECK(formula_to_string(tf).find("[x <- f(x)]") != std::string::npos);
  CHECK(formula_to_string(tf).find("p(x)") != std::string::npos);
}

TEST_CASE("substitute replaces cells simultaneously") {
  Signature sig;
  sig.add_cell("x");
  sig.add_cell("y");
  sig.add_function("f", 2);
  TermId xt = arena().cell("x");
  TermId yt = arena().cell("y");
  TermId fxy = arena().apply("f", {xt, yt});

  // Swap map: x -> y, y -> x. f(x,y) must become f(y,x), not f(x,x)/f(y,y).
  Assignment swap{yt, xt};
  TermId sub = substitute(fxy, swap, sig);
  CHECK(sub == arena().apply("f", {yt, xt}));

  // Constants stay put and hit the memo path.
  std::unordered_map<TermId, TermId> memo;
  TermId c = arena().apply("c", {});
  CHECK(substitute(c, swap, sig, &memo) == c);
  CHECK(substitute(c, swap, sig, &memo) == c);

  CHECK_THROWS_AS(substitute(arena().star(), swap, sig), Error);
}
