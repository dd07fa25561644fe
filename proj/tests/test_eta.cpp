#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "tslsat/bsa.hpp"
#include "tslsat/parser.hpp"

using namespace tslsat;

namespace {

// Independent re-statement of symbolic evaluation, used as the oracle: a cell
// at step t denotes its step-(t-1) update term evaluated at t-1; application
// is homomorphic. Written without substitute() on purpose.
TermId eta_oracle(const std::vector<Assignment>& prefix, std::size_t t, TermId term,
                  const Signature& sig) {
  const auto& n = arena().node(term);
  if (n.kind == TermKind::Cell) {
    if (t == 0) return term;
    auto idx = sig.cell_index_of_term(term);
    REQUIRE(idx >= 0);
    return eta_oracle(prefix, t - 1, prefix[t - 1][static_cast<std::uint32_t>(idx)], sig);
  }
  REQUIRE(n.kind == TermKind::Apply);
  std::vector<TermId> args;
  for (TermId a : n.args) args.push_back(eta_oracle(prefix, t, a, sig));
  return arena().apply(n.sym, std::move(args));
}

}  // namespace

TEST_CASE("eta base cases") {
  Signature sig;
  sig.add_cell("x");
  sig.add_function("f", 1);
  TermId xt = arena().cell("x");
  TermId fx = arena().apply("f", {xt});

  std::vector<Assignment> prefix;
  CHECK(eta(prefix, 0, xt, sig) == xt);      // step 0: cells denote themselves
  CHECK(eta(prefix, 0, fx, sig) == fx);

  prefix.push_back({fx});                    // x <- f(x)
  CHECK(eta(prefix, 1, xt, sig) == fx);
  CHECK(eta(prefix, 1, fx, sig) == arena().apply("f", {fx}));

  prefix.push_back({fx});
  CHECK(eta(prefix, 2, xt, sig) == arena().apply("f", {fx}));

  CHECK_THROWS_AS(eta(prefix, 3, xt, sig), Error);    // beyond the prefix
  CHECK_THROWS_AS(eta(prefix, 1, arena().star(), sig), Error);
}

TEST_CASE("eta distributes over application") {
  Signature sig;
  sig.add_cell("x");
  sig.add_cell("y");
  sig.add_function("g", 2);
  TermId xt = arena().cell("x"), yt = arena().cell("y");
  TermId gxy = arena().apply("g", {xt, yt});

  std::vector<Assignment> prefix{{yt, xt}};  // swap step
  TermId got = eta(prefix, 1, gxy, sig);
  CHECK(got == arena().apply("g", {yt, xt}));
  CHECK(eta(prefix, 1, gxy, sig) ==
        arena().apply("g", {eta(prefix, 1, xt, sig), eta(prefix, 1, yt, sig)}));
}

TEST_CASE("eta equals the independent oracle on random prefixes") {
  Signature sig;
  sig.add_cell("a");
  sig.add_cell("b");
  sig.add_function("f", 1);
  sig.add_function("h", 2);
  sig.add_function("z", 0);
  TermId at = arena().cell("a"), bt = arena().cell("b");
  TermId zt = arena().apply("z", {});

  std::mt19937_64 rng(20240817);
  auto random_term = [&](auto&& self, int depth) -> TermId {
    switch (rng() % (depth > 0 ? 5 : 3)) {
      case 0: return at;
      case 1: return bt;
      case 2: return zt;
      case 3: return arena().apply("f", {self(self, depth - 1)});
      default: return arena().apply("h", {self(self, depth - 1), self(self, depth - 1)});
    }
  };

  for (int run = 0; run < 200; ++run) {
    std::vector<Assignment> prefix;
    std::size_t len = rng() % 7;
    for (std::size_t i = 0; i < len; ++i)
      prefix.push_back({random_term(random_term, 2), random_term(random_term, 2)});
    TermId term = random_term(random_term, 3);
    for (std::size_t t = 0; t <= len; ++t)
      CHECK(eta(prefix, t, term, sig) == eta_oracle(prefix, t, term, sig));
  }
}

TEST_CASE("effect composition equals from-scratch evaluation") {
  // Walk random transition words of a converted automaton and compare the
  // incrementally composed execution effect against direct eta evaluation of
  // the induced assignment prefix.
  TslFormula f = parse_formula(
      "G ([x <- f(x)] || [x <- c()] || [y <- g(x, y)] || [y <- y]) && G F (p(x) && q(y, x))");
  LtlApproximation approx = approximate(f, ApproxMode::Finitary);
  Nba nba = ltl_to_nba(*approx.store, approx.root, approx.universe.size());
  Bsa bsa = nba_to_bsa(trim(nba), approx.universe, f.sig, 4096, true);
  REQUIRE(bsa.num_states > 0);
  REQUIRE(!bsa.transitions.empty());

  std::mt19937_64 rng(7);
  for (int run = 0; run < 100; ++run) {
    // A structurally valid word: chained transitions from a random start.
    std::vector<std::uint32_t> word;
    std::uint32_t q = bsa.transitions[rng() % bsa.transitions.size()].src;
    for (int i = 0; i < 8; ++i) {
      auto out = bsa.out(q);
      if (out.empty()) break;
      std::uint32_t pick = static_cast<std::uint32_t>(rng() % out.size());
      std::uint32_t ti = bsa.state_begin[q] + pick;
      word.push_back(ti);
      q = bsa.transitions[ti].dst;
    }

    ExecutionEffect eff = effect_of_word(bsa, word);

    std::vector<Assignment> prefix;
    for (auto ti : word) prefix.push_back(bsa.transitions[ti].updates);

    // Cell terms are the cells evaluated at the end of the prefix.
    for (std::uint32_t c = 0; c < bsa.sig->num_cells(); ++c) {
      TermId cell = arena().cell(bsa.sig->cells()[c]);
      CHECK(eff.cell_terms[c] == eta(prefix, prefix.size(), cell, *bsa.sig));
    }

    // Constraints are the step-indexed guards evaluated back to step 0.
    std::vector<std::pair<TermId, bool>> expect;
    for (std::size_t i = 0; i < word.size(); ++i)
      for (auto [g, v] : bsa.transitions[word[i]].guards)
        insert_constraint(expect, {eta_pred(prefix, i, bsa.guard_terms[g], *bsa.sig), v});
    CHECK(eff.constraints == expect);
  }
}
