// Benchmark generation: the two scalable families, a seeded random formula
// generator, the GOTO-program encodings into temporal stream formulas, and
// the corpus file loader.
#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>

#include "tslsat/parser.hpp"

namespace tslsat {

// (G [x <- f(x)]) ∧ (F !p(x)) ∧ p(x) ∧ p(f(x)) ∧ ... ∧ p(f^n(x)).
// Satisfiable for every n: a lasso may run through n+1 fresh values before
// revisiting one on which p fails.
inline TslFormula gen_scal_sat(std::uint64_t n) {
  auto sig = std::make_shared<Signature>();
  std::uint32_t x = sig->add_cell("x");
  sig->add_function("f", 1);
  sig->add_predicate("p", 1);
  TermId xt = arena().cell("x");
  FormulaPtr out = f_globally(f_update(x, arena().apply("f", {xt})));
  out = f_and(out, f_eventually(f_not(f_pred(arena().apply("p", {xt})))));
  TermId fi = xt;
  for (std::uint64_t i = 0; i <= n; ++i) {
    out = f_and(out, f_pred(arena().apply("p", {fi})));
    fi = arena().apply("f", {fi});
  }
  return TslFormula{out, sig};
}

// (G (q(x) <-> !q(f^n(x)))) ∧ (G [x <- f(x)]) ∧ F (q(x) ∧ X^n q(x)).
// Unsatisfiable: the invariant forces q to flip every n steps along the f
// chain while the eventuality demands a non-flip.
inline TslFormula gen_scal_unsat(std::uint64_t n) {
  detail::require(n >= 1, "scal-unsat requires n >= 1");
  auto sig = std::make_shared<Signature>();
  std::uint32_t x = sig->add_cell("x");
  sig->add_function("f", 1);
  sig->add_predicate("q", 1);
  TermId xt = arena().cell("x");
  TermId fnx = xt;
  for (std::uint64_t i = 0; i < n; ++i) fnx = arena().apply("f", {fnx});
  FormulaPtr qx = f_pred(arena().apply("q", {xt}));
  FormulaPtr out = f_globally(f_iff(qx, f_not(f_pred(arena().apply("q", {fnx})))));
  out = f_and(out, f_globally(f_update(x, arena().apply("f", {xt}))));
  FormulaPtr xn_q = qx;
  for (std::uint64_t i = 0; i < n; ++i) xn_q = f_next(xn_q);
  out = f_and(out, f_eventually(f_and(qx, xn_q)));
  return TslFormula{out, sig};
}

struct RandomSpec {
  std::uint64_t seed = 0;
  std::uint32_t tree_size = 10;      // node count of the temporal skeleton
  std::uint32_t cell_count = 1;      // 1..3
  std::uint32_t update_count = 1;    // 1..3 distinct update functions
  std::uint32_t predicate_count = 1; // 1..3 distinct predicates
};

// A weighted size-budgeted skeleton over atom placeholders; each placeholder
// is then fixed to a random predicate-on-cell or update atom. The weights
// (!:1, &&:2, ||:2, X:1, U:1, F:1, G:1) are a declared constant of this
// generator, not tuned against anything.
inline TslFormula gen_random(const RandomSpec& spec) {
  detail::require(spec.tree_size >= 1, "tree size must be positive");
  detail::require(spec.cell_count >= 1 && spec.cell_count <= 3, "cell count out of range");
  detail::require(spec.update_count >= 1 && spec.update_count <= 3, "update count out of range");
  detail::require(spec.predicate_count >= 1 && spec.predicate_count <= 3,
                  "predicate count out of range");
  std::mt19937_64 rng(spec.seed);

  auto sig = std::make_shared<Signature>();
  std::vector<std::uint32_t> cells;
  for (std::uint32_t i = 1; i <= spec.cell_count; ++i)
    cells.push_back(sig->add_cell("c" + std::to_string(i)));
  for (std::uint32_t i = 1; i <= spec.update_count; ++i)
    sig->add_function("u" + std::to_string(i), 1);
  for (std::uint32_t i = 1; i <= spec.predicate_count; ++i)
    sig->add_predicate("p" + std::to_string(i), 1);

  // Placeholder atoms, drawn before the skeleton so the shapes of both are
  // independent functions of the seed.
  std::uint32_t k = spec.predicate_count + spec.update_count;
  std::vector<FormulaPtr> atoms;
  for (std::uint32_t i = 0; i < k; ++i) {
    std::uint32_t c = static_cast<std::uint32_t>(rng() % spec.cell_count);
    TermId ct = arena().cell(sig->cells()[cells[c]]);
    if (i < spec.predicate_count) {
      atoms.push_back(f_pred(arena().apply("p" + std::to_string(i + 1), {ct})));
    } else {
      std::string u = "u" + std::to_string(i - spec.predicate_count + 1);
      atoms.push_back(f_update(cells[c], arena().apply(u, {ct})));
    }
  }

  // Operator pick by cumulative weight; binary operators need size >= 3.
  struct Op {
    char tag;
    std::uint32_t weight;
    bool binary;
  };
  static constexpr Op ops[] = {{'!', 1, false}, {'&', 2, true}, {'|', 2, true}, {'X', 1, false},
                               {'U', 1, true},  {'F', 1, false}, {'G', 1, false}};

  std::function<FormulaPtr(std::uint32_t)> build = [&](std::uint32_t size) -> FormulaPtr {
    if (size <= 1) return atoms[rng() % k];
    std::uint32_t total = 0;
    for (const Op& o : ops)
      if (size >= 3 || !o.binary) total += o.weight;
    std::uint32_t pick = static_cast<std::uint32_t>(rng() % total);
    char tag = 0;
    for (const Op& o : ops) {
      if (size < 3 && o.binary) continue;
      if (pick < o.weight) {
        tag = o.tag;
        break;
      }
      pick -= o.weight;
    }
    if (tag == '!') return f_not(build(size - 1));
    if (tag == 'X') return f_next(build(size - 1));
    if (tag == 'F') return f_eventually(build(size - 1));
    if (tag == 'G') return f_globally(build(size - 1));
    std::uint32_t left = 1 + static_cast<std::uint32_t>(rng() % (size - 2));
    FormulaPtr a = build(left), b = build(size - 1 - left);
    if (tag == '&') return f_and(std::move(a), std::move(b));
    if (tag == '|') return f_or(std::move(a), std::move(b));
    return f_until(std::move(a), std::move(b));
  };

  return TslFormula{build(spec.tree_size), sig};
}

// ---------------------------------------------------------------------------
// GOTO programs (reduced form: Inc, Reset, GotoIfEq) and the classic-syntax
// front end that lowers assignments, constants, and unconditional jumps.

struct GotoAction {
  enum Kind : std::uint8_t { Inc, Reset, GotoIfEq } kind;
  std::uint32_t var = 0, var2 = 0, target = 0;  // GotoIfEq compares var/var2
};

struct GotoProgram {
  std::vector<std::string> vars;     // first entry is the input variable
  std::vector<GotoAction> actions;   // one per location; location actions.size() terminates

  std::uint32_t num_locations() const {  // including the terminating one
    return static_cast<std::uint32_t>(actions.size()) + 1;
  }
  void validate() const {
    detail::require(!vars.empty(), "program declares no variables");
    for (const auto& a : actions) {
      detail::require(a.var < vars.size(), "action references an undeclared variable");
      if (a.kind == GotoAction::GotoIfEq) {
        detail::require(a.var2 < vars.size(), "action references an undeclared variable");
        detail::require(a.target < num_locations(), "jump target out of range");
      }
    }
  }
};

namespace detail {

struct ClassicStmt {
  std::string op;                 // INC RESET GOTOEQ GOTO SET DEC ADDC SUBC GOTOEQC
  std::vector<std::string> args;  // variables, labels, or a numeric constant
  std::size_t line = 0;
};

struct ClassicProgram {
  std::vector<ClassicStmt> stmts;
  std::map<std::string, std::uint32_t> label_at;  // label -> statement index (or end)
};

inline ClassicProgram parse_classic_goto(const std::string& text) {
  ClassicProgram p;
  std::istringstream in(text);
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (auto c = raw.find("//"); c != std::string::npos) raw = raw.substr(0, c);
    std::istringstream ls(raw);
    std::string tok;
    std::vector<std::string> toks;
    while (ls >> tok) toks.push_back(tok);
    if (toks.empty()) continue;
    std::size_t i = 0;
    while (i < toks.size() && toks[i].back() == ':') {
      std::string label = toks[i].substr(0, toks[i].size() - 1);
      require(!label.empty(), "empty label");
      require(p.label_at.emplace(label, static_cast<std::uint32_t>(p.stmts.size())).second,
              "duplicate label");
      ++i;
    }
    if (i == toks.size()) continue;  // label-only line: names the next location
    ClassicStmt s;
    s.op = toks[i++];
    s.args.assign(toks.begin() + static_cast<std::ptrdiff_t>(i), toks.end());
    s.line = line_no;
    static const std::map<std::string, std::size_t> arity = {
        {"INC", 1}, {"RESET", 1}, {"GOTOEQ", 3}, {"GOTO", 1}, {"SET", 2},
        {"DEC", 1}, {"ADDC", 3},  {"SUBC", 3},   {"GOTOEQC", 3}};
    auto it = arity.find(s.op);
    if (it == arity.end())
      throw Error("line " + std::to_string(line_no) + ": unknown action '" + s.op + "'");
    if (s.args.size() != it->second)
      throw Error("line " + std::to_string(line_no) + ": '" + s.op + "' expects " +
                  std::to_string(it->second) + " arguments");
    p.stmts.push_back(std::move(s));
  }
  return p;
}

// Lowers a classic program to the reduced action set. Jump targets are kept
// symbolic during emission and resolved once all gadget labels are known.
class GotoLowering {
 public:
  explicit GotoLowering(const ClassicProgram& p) : prog_(p) {}

  GotoProgram run() {
    for (std::uint32_t si = 0; si < prog_.stmts.size(); ++si) {
      stmt_begin_.push_back(static_cast<std::uint32_t>(emitted_.size()));
      emit_stmt(prog_.stmts[si]);
    }
    stmt_begin_.push_back(static_cast<std::uint32_t>(emitted_.size()));
    if (vars_.empty()) vars_.push_back("v0");  // the input variable always exists

    GotoProgram out;
    out.vars = vars_;
    for (const auto& [a, sym] : emitted_) {
      GotoAction r = a;
      if (a.kind == GotoAction::GotoIfEq) r.target = resolve(sym);
      out.actions.push_back(r);
    }
    out.validate();
    return out;
  }

 private:
  // Symbolic targets: user labels, or gadget-internal labels ("@<n>").
  using Emitted = std::pair<GotoAction, std::string>;

  std::uint32_t var(const std::string& name) {
    for (std::uint32_t i = 0; i < vars_.size(); ++i)
      if (vars_[i] == name) return i;
    vars_.push_back(name);
    return static_cast<std::uint32_t>(vars_.size() - 1);
  }

  std::string fresh_label() { return "@" + std::to_string(next_label_++); }

  void place(const std::string& label) {
    require(gadget_label_at_.emplace(label, static_cast<std::uint32_t>(emitted_.size())).second,
            "internal label placed twice");
  }

  void emit(GotoAction a, std::string target = {}) { emitted_.emplace_back(a, std::move(target)); }

  void emit_inc(std::uint32_t v) { emit({GotoAction::Inc, v}); }
  void emit_reset(std::uint32_t v) { emit({GotoAction::Reset, v}); }
  void emit_ifeq(std::uint32_t a, std::uint32_t b, std::string target) {
    emit({GotoAction::GotoIfEq, a, b}, std::move(target));
  }

  void emit_goto(const std::string& target) {
    std::uint32_t t = var("t0");
    emit_reset(t);
    emit_ifeq(t, t, target);
  }

  // v_i := v_j by counting v_i up from zero until it matches v_j.
  void emit_set(std::uint32_t vi, std::uint32_t vj) {
    std::string ls = fresh_label(), ln = fresh_label();
    emit_reset(vi);
    place(ls);
    emit_ifeq(vi, vj, ln);
    emit_inc(vi);
    emit_goto(ls);
    place(ln);
  }

  // v := v - 1 (zero stays zero): count a scratch pair up to the predecessor.
  void emit_dec(std::uint32_t v) {
    std::uint32_t f = var("t1"), g = var("t2");
    std::string ls = fresh_label(), ln = fresh_label();
    emit_set(f, v);
    emit_reset(v);
    emit_ifeq(v, f, ln);
    place(ls);
    emit_set(g, v);
    emit_inc(g);
    emit_ifeq(f, g, ln);
    emit_inc(v);
    emit_goto(ls);
    place(ln);
  }

  void emit_stmt(const ClassicStmt& s) {
    if (s.op == "INC") {
      emit_inc(var(s.args[0]));
    } else if (s.op == "RESET") {
      emit_reset(var(s.args[0]));
    } else if (s.op == "GOTOEQ") {
      emit_ifeq(var(s.args[0]), var(s.args[1]), s.args[2]);
    } else if (s.op == "GOTO") {
      emit_goto(s.args[0]);
    } else if (s.op == "SET") {
      emit_set(var(s.args[0]), var(s.args[1]));
    } else if (s.op == "DEC") {
      emit_dec(var(s.args[0]));
    } else if (s.op == "ADDC" || s.op == "SUBC") {
      std::uint32_t vi = var(s.args[0]), vj = var(s.args[1]);
      std::uint64_t c = parse_const(s);
      emit_set(vi, vj);
      for (std::uint64_t k = 0; k < c; ++k)
        s.op == "ADDC" ? emit_inc(vi) : emit_dec(vi);
    } else if (s.op == "GOTOEQC") {
      std::uint32_t v = var(s.args[0]), t = var("t3");
      std::uint64_t c = parse_const(s, 1);
      emit_reset(t);
      for (std::uint64_t k = 0; k < c; ++k) emit_inc(t);
      emit_ifeq(v, t, s.args[2]);
    } else {
      throw Error("unknown action '" + s.op + "'");
    }
  }

  std::uint64_t parse_const(const ClassicStmt& s, std::size_t idx = 2) const {
    const std::string& a = s.args[idx];
    require(!a.empty() && a.find_first_not_of("0123456789") == std::string::npos,
            "constant operand must be a natural number");
    return std::stoull(a);
  }

  std::uint32_t resolve(const std::string& label) const {
    if (auto it = gadget_label_at_.find(label); it != gadget_label_at_.end()) return it->second;
    auto it = prog_.label_at.find(label);
    if (it == prog_.label_at.end()) throw Error("undefined label '" + label + "'");
    return stmt_begin_[it->second];
  }

  const ClassicProgram& prog_;
  std::vector<std::string> vars_;
  std::vector<Emitted> emitted_;
  std::vector<std::uint32_t> stmt_begin_;
  std::map<std::string, std::uint32_t> gadget_label_at_;
  std::uint32_t next_label_ = 0;
};

}  // namespace detail

inline GotoProgram desugar_goto(const std::string& classic_text) {
  auto parsed = detail::parse_classic_goto(classic_text);
  return detail::GotoLowering(parsed).run();
}

// ---------------------------------------------------------------------------
// Number encodings. `encode_num_tu` forces, over uninterpreted functions,
// that eqn behaves as equality of iterated-f terms: eqn(f^a(z), f^b(z)) holds
// iff a = b. `encode_enc_te` forces, over equality, that distinct f-chains
// from z stay distinct.

namespace detail {

inline TermId c0(const std::string& f) { return arena().apply(f, {}); }

// e is pinned to the f-chain: [e <- z()] ∧ X G ([e <- f(e)] ∧ body(e)).
inline FormulaPtr chain_cell(std::uint32_t e, TermId et, FormulaPtr body) {
  FormulaPtr step = f_and(f_update(e, arena().apply("f", {et})), std::move(body));
  return f_and(f_update(e, c0("z")), f_next(f_globally(std::move(step))));
}

}  // namespace detail

inline TslFormula encode_num_tu() {
  auto sig = std::make_shared<Signature>();
  std::uint32_t e = sig->add_cell("e"), x = sig->add_cell("x"), b = sig->add_cell("b");
  sig->add_function("f", 1);
  sig->add_function("z", 0);
  sig->add_predicate("eqn", 2);
  TermId et = arena().cell("e"), xt = arena().cell("x"), bt = arena().cell("b");
  auto eqn = [](TermId l, TermId r) { return f_pred(arena().apply("eqn", {l, r})); };
  TermId fb = arena().apply("f", {bt});

  FormulaPtr part1 = detail::chain_cell(e, et, eqn(et, et));
  FormulaPtr phi_eq = f_implies(
      eqn(xt, bt), f_and(f_and(f_update(x, detail::c0("z")), f_update(b, fb)),
                         f_and(f_not(eqn(bt, fb)), f_not(eqn(fb, bt)))));
  FormulaPtr phi_neq = f_implies(
      f_not(eqn(xt, bt)), f_and(f_and(f_update(x, arena().apply("f", {xt})), f_update(b, bt)),
                                f_and(f_not(eqn(xt, fb)), f_not(eqn(fb, xt)))));
  FormulaPtr part2 = f_and(f_and(f_update(x, detail::c0("z")), f_update(b, detail::c0("z"))),
                           f_next(f_globally(f_and(phi_eq, phi_neq))));
  return TslFormula{f_and(part1, part2), sig};
}

inline TslFormula encode_enc_te() {
  auto sig = std::make_shared<Signature>();
  std::uint32_t e = sig->add_cell("e");
  sig->add_function("f", 1);
  sig->add_function("g", 1);
  sig->add_function("z", 0);
  sig->add_predicate("eq", 2);
  TermId et = arena().cell("e");
  auto eq = [](TermId l, TermId r) { return f_pred(arena().apply("eq", {l, r})); };
  TermId fe = arena().apply("f", {et});
  FormulaPtr body = f_and(eq(et, arena().apply("g", {fe})), f_not(eq(fe, detail::c0("z"))));
  return TslFormula{detail::chain_cell(e, et, std::move(body)), sig};
}

enum class GotoTheory { TU, TE };

// The halting-encoding formula: the program-counter cell walks the location
// constants, variables walk f-chains, and the number-encoding conjunct pins
// down zero/increment/equality. Satisfiable iff the program halts on every
// input, so the checker is not expected to terminate on these in general.
inline TslFormula encode_goto(const GotoProgram& g, GotoTheory theory) {
  g.validate();
  std::uint32_t m = g.num_locations() - 1;  // terminating location index
  auto sig = std::make_shared<Signature>();

  // Program cells first, then the bookkeeping cells, then the theory cells.
  std::vector<std::uint32_t> vc;
  for (const auto& v : g.vars) vc.push_back(sig->add_cell(v));
  std::uint32_t lc = sig->add_cell("l"), ic = sig->add_cell("i");
  std::uint32_t ec = sig->add_cell("e");
  std::uint32_t xc = 0, bc = 0;
  if (theory == GotoTheory::TU) {
    xc = sig->add_cell("x");
    bc = sig->add_cell("b");
  }
  sig->add_function("f", 1);
  sig->add_function("z", 0);
  if (theory == GotoTheory::TE) sig->add_function("g", 1);
  std::string eqp = theory == GotoTheory::TU ? "eqn" : "eq";
  sig->add_predicate(eqp, 2);
  for (std::uint32_t a = 0; a <= m; ++a) {
    sig->add_function("l" + std::to_string(a), 0);
    sig->add_predicate("p" + std::to_string(a), 1);
  }

  auto lconst = [&](std::uint32_t a) { return arena().apply("l" + std::to_string(a), {}); };
  auto pat = [&](std::uint32_t a, TermId t) {
    return f_pred(arena().apply("p" + std::to_string(a), {t}));
  };
  auto eq = [&](TermId l, TermId r) { return f_pred(arena().apply(eqp, {l, r})); };
  auto land = [](std::vector<FormulaPtr> xs) {
    detail::require(!xs.empty(), "empty conjunction");
    FormulaPtr out = xs[0];
    for (std::size_t i = 1; i < xs.size(); ++i) out = f_and(std::move(out), xs[i]);
    return out;
  };
  TermId lt = arena().cell("l"), it = arena().cell("i");
  auto vt = [&](std::uint32_t v) { return arena().cell(g.vars[v]); };

  // Location constants are pairwise distinguishable by their predicates.
  std::vector<FormulaPtr> distinct;
  for (std::uint32_t a = 0; a <= m; ++a) {
    distinct.push_back(pat(a, lconst(a)));
    for (std::uint32_t b = 0; b <= m; ++b)
      if (b != a) distinct.push_back(f_not(pat(a, lconst(b))));
  }
  FormulaPtr phi1 = land(std::move(distinct));

  // One simulation step per non-terminating location.
  std::vector<FormulaPtr> steps;
  for (std::uint32_t k = 0; k < m; ++k) {
    const GotoAction& act = g.actions[k];
    std::vector<FormulaPtr> effect;
    if (act.kind == GotoAction::Inc || act.kind == GotoAction::Reset) {
      effect.push_back(f_update(lc, lconst(k + 1)));
      TermId val = act.kind == GotoAction::Inc ? arena().apply("f", {vt(act.var)})
                                               : detail::c0("z");
      effect.push_back(f_update(vc[act.var], val));
      for (std::uint32_t v = 0; v < g.vars.size(); ++v)
        if (v != act.var) effect.push_back(f_update(vc[v], vt(v)));
    } else {
      FormulaPtr cmp = eq(vt(act.var), vt(act.var2));
      effect.push_back(f_implies(f_not(cmp), f_update(lc, lconst(k + 1))));
      effect.push_back(f_implies(cmp, f_update(lc, lconst(act.target))));
      for (std::uint32_t v = 0; v < g.vars.size(); ++v)
        effect.push_back(f_update(vc[v], vt(v)));
    }
    steps.push_back(f_implies(pat(k, lt), f_and(f_update(ic, it), land(std::move(effect)))));
  }
  FormulaPtr phi2 = m > 0 ? f_next(f_globally(land(std::move(steps)))) : f_true();

  // Termination restarts the simulation on the incremented input.
  std::vector<FormulaPtr> restart{f_update(ic, arena().apply("f", {it})),
                                  f_update(lc, lconst(0)), f_update(vc[0], it)};
  for (std::uint32_t v = 1; v < g.vars.size(); ++v)
    restart.push_back(f_update(vc[v], detail::c0("z")));
  FormulaPtr phi3 = f_next(f_globally(f_implies(pat(m, lt), land(std::move(restart)))));

  FormulaPtr phi4 = f_and(f_update(ic, detail::c0("z")), f_update(lc, lconst(m)));
  FormulaPtr phi5 = f_globally(f_eventually(pat(m, lt)));

  // The number-encoding conjunct, re-stated over this signature.
  TermId et = arena().cell("e");
  FormulaPtr encnum;
  if (theory == GotoTheory::TU) {
    TermId xt = arena().cell("x"), bt = arena().cell("b");
    TermId fb = arena().apply("f", {bt});
    FormulaPtr part1 = detail::chain_cell(ec, et, eq(et, et));
    FormulaPtr phi_eq = f_implies(
        eq(xt, bt), f_and(f_and(f_update(xc, detail::c0("z")), f_update(bc, fb)),
                          f_and(f_not(eq(bt, fb)), f_not(eq(fb, bt)))));
    FormulaPtr phi_neq = f_implies(
        f_not(eq(xt, bt)), f_and(f_and(f_update(xc, arena().apply("f", {xt})), f_update(bc, bt)),
                                 f_and(f_not(eq(xt, fb)), f_not(eq(fb, xt)))));
    encnum = f_and(part1, f_and(f_and(f_update(xc, detail::c0("z")),
                                      f_update(bc, detail::c0("z"))),
                                f_next(f_globally(f_and(phi_eq, phi_neq)))));
  } else {
    TermId fe = arena().apply("f", {et});
    FormulaPtr body = f_and(eq(et, arena().apply("g", {fe})), f_not(eq(fe, detail::c0("z"))));
    encnum = detail::chain_cell(ec, et, std::move(body));
  }

  FormulaPtr out = f_and(encnum, f_and(f_and(f_and(phi1, phi2), f_and(phi3, phi4)), phi5));
  return TslFormula{out, sig};
}

// ---------------------------------------------------------------------------
// Corpus files: `#!name:` (optional, defaults to the file stem) and
// `#!expect: SAT|UNSAT|UNKNOWN` headers, then a formula in the surface
// grammar. UNKNOWN marks stress inputs the checker need not decide.

struct CorpusEntry {
  std::string name;
  std::string path;
  std::string expect;  // "SAT" | "UNSAT" | "UNKNOWN"
  TslFormula formula;
};

inline CorpusEntry load_corpus_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read corpus file: " + path.string());
  std::ostringstream body;
  CorpusEntry e;
  e.path = path.string();
  e.name = path.stem().string();
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("#!", 0) == 0) {
      auto colon = line.find(':');
      if (colon == std::string::npos) throw Error(path.string() + ": malformed header line");
      std::string key = line.substr(2, colon - 2);
      std::string val = line.substr(colon + 1);
      std::size_t b = val.find_first_not_of(" \t");
      val = b == std::string::npos ? "" : val.substr(b, val.find_last_not_of(" \t\r") - b + 1);
      if (key == "name")
        e.name = val;
      else if (key == "expect")
        e.expect = val;
      else
        throw Error(path.string() + ": unknown header '" + key + "'");
    } else {
      body << line << '\n';
    }
  }
  if (e.expect != "SAT" && e.expect != "UNSAT" && e.expect != "UNKNOWN")
    throw Error(path.string() + ": missing or invalid #!expect header");
  e.formula = parse_formula(body.str());
  return e;
}

inline std::vector<CorpusEntry> load_corpus(const std::string& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw Error("not a corpus directory: " + dir);
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".tsl")
      files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw Error("corpus directory has no .tsl files: " + dir);
  std::vector<CorpusEntry> out;
  for (const auto& f : files) out.push_back(load_corpus_file(f));
  return out;
}

}  // namespace tslsat
