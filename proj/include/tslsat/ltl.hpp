// Propositional abstraction of stream formulas: predicate terms and cell
// updates become atomic propositions. The exactly-one-update-per-cell
// discipline is part of the alphabet (ApUniverse::legal, and the stream
// automaton only ever enumerates legal letters), not of the formula;
// conjoining it as LTL cardinality constraints would blow the tableau up
// exponentially in the number of update atoms for no semantic gain. Also:
// the reduction that turns general satisfiability into finitary
// satisfiability by routing every otherwise-unconstrained cell through a
// fresh chooser function.
#pragma once

#include <algorithm>

#include "tslsat/core.hpp"

namespace tslsat {

struct AtomicProposition {
  enum Kind : std::uint8_t { Pred, Update } kind;
  TermId term = kNoTerm;   // Pred: predicate term. Update: value term (cell ref = self, star = wildcard).
  std::uint32_t cell = 0;  // Update only.
  bool operator==(const AtomicProposition&) const = default;
};

// Letters assign a truth value to every atomic proposition.
using Letter = std::vector<bool>;

// Ordered AP universe: predicate atoms first (guard order), then update atoms
// grouped by cell. Within a group: formula-occurrence order, with the
// synthetic self-update (finitary mode) or wildcard (general mode) last.
struct ApUniverse {
  std::vector<AtomicProposition> aps;
  std::uint32_t num_preds = 0;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> cell_aps;  // per cell: [begin,end)

  std::uint32_t size() const { return static_cast<std::uint32_t>(aps.size()); }

  std::int32_t index_of(const AtomicProposition& ap) const {
    for (std::uint32_t i = 0; i < aps.size(); ++i)
      if (aps[i] == ap) return static_cast<std::int32_t>(i);
    return -1;
  }
  std::int32_t pred_index(TermId t) const {
    return index_of(AtomicProposition{AtomicProposition::Pred, t, 0});
  }
  std::int32_t update_index(std::uint32_t cell, TermId t) const {
    return index_of(AtomicProposition{AtomicProposition::Update, t, cell});
  }

  std::string ap_name(std::uint32_t i, const Signature& sig) const {
    const auto& ap = aps[i];
    if (ap.kind == AtomicProposition::Pred) return term_to_string(ap.term);
    return "[" + sig.cells()[ap.cell] + " <- " + term_to_string(ap.term) + "]";
  }

  // A letter is legal when every cell has exactly one true update atom.
  bool legal(const Letter& l) const {
    for (const auto& [b, e] : cell_aps) {
      int cnt = 0;
      for (std::uint32_t i = b; i < e; ++i) cnt += l[i] ? 1 : 0;
      if (cnt != 1) return false;
    }
    return true;
  }
};

// ---------------------------------------------------------------------------
// Hash-consed LTL nodes (used as tableau input and for lasso evaluation).

using LtlId = std::uint32_t;

enum class LKind : std::uint8_t { True, Ap, Not, And, Next, Until };

class LtlStore {
 public:
  struct Node {
    LKind kind;
    std::uint32_t ap = 0;  // Ap only
    LtlId a = 0, b = 0;
  };

  LtlId mk_true() { return intern({LKind::True}); }
  LtlId mk_ap(std::uint32_t ap) { return intern({LKind::Ap, ap}); }
  LtlId mk_not(LtlId a) { return intern({LKind::Not, 0, a}); }
  LtlId mk_and(LtlId a, LtlId b) { return intern({LKind::And, 0, a, b}); }
  LtlId mk_next(LtlId a) { return intern({LKind::Next, 0, a}); }
  LtlId mk_until(LtlId a, LtlId b) { return intern({LKind::Until, 0, a, b}); }

  LtlId mk_false() { return mk_not(mk_true()); }
  LtlId mk_or(LtlId a, LtlId b) { return mk_not(mk_and(mk_not(a), mk_not(b))); }
  LtlId mk_implies(LtlId a, LtlId b) { return mk_not(mk_and(a, mk_not(b))); }
  LtlId mk_eventually(LtlId a) { return mk_until(mk_true(), a); }
  LtlId mk_globally(LtlId a) { return mk_not(mk_eventually(mk_not(a))); }

  // Conjunction of a list; empty list is true.
  LtlId mk_conj(const std::vector<LtlId>& xs) {
    if (xs.empty()) return mk_true();
    LtlId f = xs[0];
    for (std::size_t i = 1; i < xs.size(); ++i) f = mk_and(f, xs[i]);
    return f;
  }
  LtlId mk_disj(const std::vector<LtlId>& xs) {
    if (xs.empty()) return mk_false();
    LtlId f = xs[0];
    for (std::size_t i = 1; i < xs.size(); ++i) f = mk_or(f, xs[i]);
    return f;
  }

  const Node& node(LtlId id) const { return nodes_[id]; }
  std::size_t size() const { return nodes_.size(); }

 private:
  LtlId intern(Node n) {
    std::uint64_t h = detail::hash_mix(static_cast<std::uint64_t>(n.kind), n.ap);
    h = detail::hash_mix(h, n.a);
    h = detail::hash_mix(h, n.b);
    auto [it, inserted] = map_.try_emplace(h);
    if (!inserted) {
      for (LtlId cand : it->second) {
        const Node& c = nodes_[cand];
        if (c.kind == n.kind && c.ap == n.ap && c.a == n.a && c.b == n.b) return cand;
      }
    }
    LtlId id = static_cast<LtlId>(nodes_.size());
    nodes_.push_back(n);
    it->second.push_back(id);
    return id;
  }
  std::vector<Node> nodes_;
  std::unordered_map<std::uint64_t, std::vector<LtlId>> map_;
};

enum class ApproxMode { Finitary, General };

// The abstraction result: formula over the AP universe, in its own store.
// root is the structural image of the input; evaluated only on legal letters
// (exactly one update per cell), which is all the automaton pipeline emits.
struct LtlApproximation {
  std::shared_ptr<LtlStore> store;
  LtlId root = 0;
  ApUniverse universe;
  SignaturePtr sig;
};

inline ApUniverse build_universe(const TslFormula& f, ApproxMode mode) {
  ApUniverse u;
  for (TermId p : all_predicates(f))
    u.aps.push_back({AtomicProposition::Pred, p, 0});
  u.num_preds = static_cast<std::uint32_t>(u.aps.size());
  auto updates = all_updates(f);
  const auto& cells = f.sig->cells();
  for (std::uint32_t c = 0; c < cells.size(); ++c) {
    std::uint32_t begin = u.size();
    for (const auto& up : updates)
      if (up.cell == c) u.aps.push_back({AtomicProposition::Update, up.term, c});
    if (mode == ApproxMode::Finitary) {
      TermId self = arena().cell(cells[c]);
      if (u.update_index(c, self) < 0) u.aps.push_back({AtomicProposition::Update, self, c});
    } else {
      u.aps.push_back({AtomicProposition::Update, arena().star(), c});
    }
    u.cell_aps.emplace_back(begin, u.size());
  }
  return u;
}

inline LtlId map_formula_to_ltl(const FormulaPtr& f, const ApUniverse& u, LtlStore& st) {
  switch (f->kind) {
    case FKind::True: return st.mk_true();
    case FKind::Not: return st.mk_not(map_formula_to_ltl(f->a, u, st));
    case FKind::And:
      return st.mk_and(map_formula_to_ltl(f->a, u, st), map_formula_to_ltl(f->b, u, st));
    case FKind::Next: return st.mk_next(map_formula_to_ltl(f->a, u, st));
    case FKind::Until:
      return st.mk_until(map_formula_to_ltl(f->a, u, st), map_formula_to_ltl(f->b, u, st));
    case FKind::Pred: {
      std::int32_t i = u.pred_index(f->term);
      detail::require(i >= 0, "predicate term missing from universe");
      return st.mk_ap(static_cast<std::uint32_t>(i));
    }
    case FKind::Update: {
      std::int32_t i = u.update_index(f->cell, f->term);
      detail::require(i >= 0, "update atom missing from universe");
      return st.mk_ap(static_cast<std::uint32_t>(i));
    }
  }
  throw Error("bad formula node");
}

inline LtlApproximation approximate(const TslFormula& f, ApproxMode mode) {
  LtlApproximation out;
  out.store = std::make_shared<LtlStore>();
  out.sig = f.sig;
  out.universe = build_universe(f, mode);
  LtlStore& st = *out.store;
  const ApUniverse& u = out.universe;

  out.root = map_formula_to_ltl(f.root, u, st);
  return out;
}

// ---------------------------------------------------------------------------
// Finitary reduction: conjoin a clock cell driven by a fresh unary function
// and, for every cell of the formula, the choice between its own updates and
// a fresh chooser applied to the clock. Satisfiability over uninterpreted
// functions of the input equals finitary satisfiability of the result.

inline TslFormula finitarize(const TslFormula& f) {
  const Signature& old = *f.sig;
  if (old.has_cell("n") || old.has_name("new"))
    throw Error("finitarize: reserved symbols already present");
  auto sig = std::make_shared<Signature>(old);
  std::uint32_t n_idx = sig->add_cell_reserved("n");
  sig->add_function_reserved("new", 1);

  TermId n_cell = arena().cell("n");
  TermId new_n = arena().apply("new", {n_cell});

  // G [n <- new(n)]
  FormulaPtr fin = f_globally(f_update(n_idx, new_n));

  auto phi_updates = all_updates(f);
  for (std::uint32_t c : cells_of(f)) {
    std::string pick = "pick_" + old.cells()[c];
    sig->add_function_reserved(pick, 1);
    FormulaPtr choice = f_update(c, arena().apply(pick, {n_cell}));
    std::vector<FormulaPtr> own;
    for (const auto& up : phi_updates)
      if (up.cell == c) own.push_back(f_update(up.cell, up.term));
    FormulaPtr disj = choice;
    if (!own.empty()) {
      FormulaPtr d = own[0];
      for (std::size_t i = 1; i < own.size(); ++i) d = f_or(d, own[i]);
      disj = f_or(d, choice);
    }
    fin = f_and(fin, f_globally(disj));
  }
  return TslFormula{f_and(f.root, fin), sig};
}

// ---------------------------------------------------------------------------
// LTL evaluation on ultimately periodic words (stem . loop^omega). Until is
// the least fixpoint of val = b || (a && X val) over the lasso graph.

inline bool ltl_lasso_check(const LtlStore& st, LtlId root, const std::vector<Letter>& stem,
                            const std::vector<Letter>& loop) {
  detail::require(!loop.empty(), "lasso needs a nonempty loop");
  const std::size_t S = stem.size(), L = loop.size(), N = S + L;
  auto letter_at = [&](std::size_t i) -> const Letter& { return i < S ? stem[i] : loop[i - S]; };
  auto succ = [&](std::size_t i) { return i + 1 < N ? i + 1 : S; };

  // Subformulas in dependency (children-first) order.
  std::vector<LtlId> order;
  std::vector<char> seen(st.size(), 0);
  struct Walk {
    const LtlStore& st;
    std::vector<char>& seen;
    std::vector<LtlId>& order;
    void go(LtlId f) {
      if (seen[f]) return;
      seen[f] = 1;
      const auto& n = st.node(f);
      if (n.kind == LKind::Not || n.kind == LKind::Next) go(n.a);
      if (n.kind == LKind::And || n.kind == LKind::Until) {
        go(n.a);
        go(n.b);
      }
      order.push_back(f);
    }
  };
  Walk{st, seen, order}.go(root);

  std::unordered_map<LtlId, std::vector<char>> val;
  for (LtlId f : order) {
    const auto& n = st.node(f);
    std::vector<char> v(N, 0);
    switch (n.kind) {
      case LKind::True:
        std::fill(v.begin(), v.end(), 1);
        break;
      case LKind::Ap:
        for (std::size_t i = 0; i < N; ++i) v[i] = letter_at(i)[n.ap] ? 1 : 0;
        break;
      case LKind::Not: {
        const auto& a = val[n.a];
        for (std::size_t i = 0; i < N; ++i) v[i] = a[i] ? 0 : 1;
        break;
      }
      case LKind::And: {
        const auto& a = val[n.a];
        const auto& b = val[n.b];
        for (std::size_t i = 0; i < N; ++i) v[i] = (a[i] && b[i]) ? 1 : 0;
        break;
      }
      case LKind::Next: {
        const auto& a = val[n.a];
        for (std::size_t i = 0; i < N; ++i) v[i] = a[succ(i)];
        break;
      }
      case LKind::Until: {
        const auto& a = val[n.a];
        const auto& b = val[n.b];
        bool changed = true;
        while (changed) {
          changed = false;
          for (std::size_t k = N; k-- > 0;) {
            char nv = (b[k] || (a[k] && v[succ(k)])) ? 1 : 0;
            if (nv != v[k]) {
              v[k] = nv;
              changed = true;
            }
          }
        }
        break;
      }
    }
    val.emplace(f, std::move(v));
  }
  return val[root][0] != 0;
}

}  // namespace tslsat
