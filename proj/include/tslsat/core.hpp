// Core data model: hash-consed terms, signatures, the temporal stream formula
// AST, and symbolic evaluation of terms over finite computation prefixes.
#pragma once

#include <cassert>
#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace tslsat {

using TermId = std::uint32_t;
using NameId = std::uint32_t;

inline constexpr TermId kNoTerm = 0xffffffffu;

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Resource cap hit (letter explosion, node budgets, per-query term budget).
class CapError : public Error {
 public:
  explicit CapError(const std::string& msg) : Error(msg) {}
};

namespace detail {
inline void require(bool cond, const char* msg) {
  if (!cond) throw Error(std::string("internal invariant violated: ") + msg);
}
inline std::uint64_t hash_mix(std::uint64_t h, std::uint64_t v) {
  // 64-bit mix (splitmix64 finalizer over running state).
  h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  return h;
}
}  // namespace detail

enum class TermKind : std::uint8_t {
  Cell,   // cell reference; value at the current step
  Apply,  // function or predicate symbol applied to arguments
  Star,   // wildcard update target used by the general-mode automaton alphabet
};

// Terms are stored in a process-global, append-only, hash-consed arena.
// Ids are dense and content-addressed: re-creating the same term anywhere
// in the process yields the same id. Reads of existing nodes are lock-free
// (deque storage never moves elements); interning is serialized.
class TermArena {
 public:
  struct Node {
    TermKind kind;
    NameId sym;                 // symbol or cell name (unused for Star)
    std::vector<TermId> args;   // empty for Cell/Star
  };

  TermArena() {
    // Star is pre-interned at id 0 so it needs no lookup.
    nodes_.push_back(Node{TermKind::Star, 0, {}});
  }

  TermId star() const { return 0; }

  NameId name_id(std::string_view name) {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = name_ids_.find(std::string(name));
    if (it != name_ids_.end()) return it->second;
    NameId id = static_cast<NameId>(names_.size());
    names_.push_back(std::string(name));
    name_ids_.emplace(names_.back(), id);
    return id;
  }

  const std::string& name(NameId id) const { return names_[id]; }

  TermId cell(std::string_view cell_name) {
    return intern(TermKind::Cell, name_id(cell_name), {});
  }

  TermId apply(std::string_view sym, std::vector<TermId> args) {
    return intern(TermKind::Apply, name_id(sym), std::move(args));
  }

  TermId apply(NameId sym, std::vector<TermId> args) {
    return intern(TermKind::Apply, sym, std::move(args));
  }

  const Node& node(TermId id) const { return nodes_[id]; }
  std::size_t size() const {
    std::lock_guard<std::mutex> lock(mu_);
    return nodes_.size();
  }

 private:
  TermId intern(TermKind kind, NameId sym, std::vector<TermId> args) {
    std::uint64_t h = detail::hash_mix(static_cast<std::uint64_t>(kind), sym);
    for (TermId a : args) h = detail::hash_mix(h, a);
    std::lock_guard<std::mutex> lock(mu_);
    auto [it, inserted] = buckets_.try_emplace(h);
    if (!inserted) {
      for (TermId cand : it->second) {
        const Node& n = nodes_[cand];
        if (n.kind == kind && n.sym == sym && n.args == args) return cand;
      }
    }
    TermId id = static_cast<TermId>(nodes_.size());
    nodes_.push_back(Node{kind, sym, std::move(args)});
    it->second.push_back(id);
    return id;
  }

  mutable std::mutex mu_;
  std::deque<Node> nodes_;
  std::unordered_map<std::uint64_t, std::vector<TermId>> buckets_;
  std::deque<std::string> names_;
  std::unordered_map<std::string, NameId> name_ids_;
};

inline TermArena& arena() {
  static TermArena a;
  return a;
}

// Names the user may not take: the finitary-reduction symbols and the
// wildcard spelling. Enforced for every namespace (cells, functions,
// predicates) so the reduction can always extend a signature.
inline bool is_reserved_name(std::string_view s) {
  return s == "new" || s == "STAR" || s == "n" || s.starts_with("pick_");
}

// Function symbols, predicate symbols and cells with pairwise disjoint names.
// Cell order is significant (assignments and update maps index into it).
class Signature {
 public:
  Signature() = default;

  void add_function(const std::string& name, unsigned arity) {
    check_fresh(name, /*allow_reserved=*/false);
    functions_[name] = arity;
  }
  void add_predicate(const std::string& name, unsigned arity) {
    check_fresh(name, /*allow_reserved=*/false);
    predicates_[name] = arity;
  }
  std::uint32_t add_cell(const std::string& name) {
    check_fresh(name, /*allow_reserved=*/false);
    return add_cell_unchecked(name);
  }

  // Used by the finitary reduction, which introduces the reserved names.
  void add_function_reserved(const std::string& name, unsigned arity) {
    check_fresh(name, /*allow_reserved=*/true);
    functions_[name] = arity;
  }
  std::uint32_t add_cell_reserved(const std::string& name) {
    check_fresh(name, /*allow_reserved=*/true);
    return add_cell_unchecked(name);
  }

  bool has_function(const std::string& name) const { return functions_.count(name) != 0; }
  bool has_predicate(const std::string& name) const { return predicates_.count(name) != 0; }
  bool has_cell(const std::string& name) const { return cell_index_.count(name) != 0; }
  bool has_name(const std::string& name) const {
    return has_function(name) || has_predicate(name) || has_cell(name);
  }

  unsigned function_arity(const std::string& name) const { return functions_.at(name); }
  unsigned predicate_arity(const std::string& name) const { return predicates_.at(name); }

  const std::map<std::string, unsigned>& functions() const { return functions_; }
  const std::map<std::string, unsigned>& predicates() const { return predicates_; }
  const std::vector<std::string>& cells() const { return cells_; }
  std::size_t num_cells() const { return cells_.size(); }

  std::uint32_t cell_index(const std::string& name) const {
    auto it = cell_index_.find(name);
    if (it == cell_index_.end()) throw Error("unknown cell: " + name);
    return it->second;
  }
  // Cell index of a Cell term, or -1 if the name is not a cell of this signature.
  std::int32_t cell_index_of_term(TermId t) const {
    const auto& n = arena().node(t);
    if (n.kind != TermKind::Cell) return -1;
    auto it = cell_index_by_name_id_.find(n.sym);
    return it == cell_index_by_name_id_.end() ? -1 : static_cast<std::int32_t>(it->second);
  }

  bool operator==(const Signature& o) const {
    return functions_ == o.functions_ && predicates_ == o.predicates_ && cells_ == o.cells_;
  }

 private:
  void check_fresh(const std::string& name, bool allow_reserved) const {
    if (!allow_reserved && is_reserved_name(name))
      throw Error("reserved name: " + name);
    if (has_name(name)) throw Error("name declared twice or in two roles: " + name);
  }
  std::uint32_t add_cell_unchecked(const std::string& name) {
    std::uint32_t idx = static_cast<std::uint32_t>(cells_.size());
    cells_.push_back(name);
    cell_index_[name] = idx;
    cell_index_by_name_id_[arena().name_id(name)] = idx;
    return idx;
  }

  std::map<std::string, unsigned> functions_;
  std::map<std::string, unsigned> predicates_;
  std::vector<std::string> cells_;
  std::map<std::string, std::uint32_t> cell_index_;
  std::unordered_map<NameId, std::uint32_t> cell_index_by_name_id_;
};

using SignaturePtr = std::shared_ptr<const Signature>;

inline std::string term_to_string(TermId t) {
  const auto& n = arena().node(t);
  switch (n.kind) {
    case TermKind::Star:
      return "*";
    case TermKind::Cell:
      return arena().name(n.sym);
    case TermKind::Apply: {
      std::string out = arena().name(n.sym);
      out += '(';
      for (std::size_t i = 0; i < n.args.size(); ++i) {
        if (i) out += ", ";
        out += term_to_string(n.args[i]);
      }
      out += ')';
      return out;
    }
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Formulas. The AST is fully desugared: True, Not, And, Next, Until, plus the
// two atoms (predicate term, cell update). Everything else is construction
// sugar resolved by the builders below.

enum class FKind : std::uint8_t { True, Not, And, Next, Until, Pred, Update };

struct FormulaNode;
using FormulaPtr = std::shared_ptr<const FormulaNode>;

struct FormulaNode {
  FKind kind;
  FormulaPtr a, b;       // operands (a for unary, a/b for binary)
  TermId term = kNoTerm; // Pred: the predicate term; Update: the new value
  std::uint32_t cell = 0; // Update: target cell index in the signature
};

inline FormulaPtr f_true() {
  static FormulaPtr t = std::make_shared<FormulaNode>(FormulaNode{FKind::True, nullptr, nullptr});
  return t;
}
inline FormulaPtr f_not(FormulaPtr a) {
  return std::make_shared<FormulaNode>(FormulaNode{FKind::Not, std::move(a), nullptr});
}
inline FormulaPtr f_and(FormulaPtr a, FormulaPtr b) {
  return std::make_shared<FormulaNode>(FormulaNode{FKind::And, std::move(a), std::move(b)});
}
inline FormulaPtr f_next(FormulaPtr a) {
  return std::make_shared<FormulaNode>(FormulaNode{FKind::Next, std::move(a), nullptr});
}
inline FormulaPtr f_until(FormulaPtr a, FormulaPtr b) {
  return std::make_shared<FormulaNode>(FormulaNode{FKind::Until, std::move(a), std::move(b)});
}
inline FormulaPtr f_pred(TermId t) {
  return std::make_shared<FormulaNode>(FormulaNode{FKind::Pred, nullptr, nullptr, t});
}
inline FormulaPtr f_update(std::uint32_t cell, TermId t) {
  return std::make_shared<FormulaNode>(FormulaNode{FKind::Update, nullptr, nullptr, t, cell});
}

// Sugar, desugared on construction.
inline FormulaPtr f_false() { return f_not(f_true()); }
inline FormulaPtr f_or(FormulaPtr a, FormulaPtr b) {
  return f_not(f_and(f_not(std::move(a)), f_not(std::move(b))));
}
inline FormulaPtr f_implies(FormulaPtr a, FormulaPtr b) {
  return f_not(f_and(std::move(a), f_not(std::move(b))));
}
inline FormulaPtr f_iff(FormulaPtr a, FormulaPtr b) {
  // Two statements: argument evaluation order must not move a/b before the
  // first implication copies them.
  FormulaPtr ab = f_implies(a, b);
  FormulaPtr ba = f_implies(std::move(b), std::move(a));
  return f_and(std::move(ab), std::move(ba));
}
inline FormulaPtr f_eventually(FormulaPtr a) { return f_until(f_true(), std::move(a)); }
inline FormulaPtr f_globally(FormulaPtr a) {
  return f_not(f_eventually(f_not(std::move(a))));
}
inline FormulaPtr f_release(FormulaPtr a, FormulaPtr b) {
  return f_not(f_until(f_not(std::move(a)), f_not(std::move(b))));
}

struct TslFormula {
  FormulaPtr root;
  SignaturePtr sig;
};

inline bool formula_equal(const FormulaPtr& x, const FormulaPtr& y) {
  if (x == y) return true;
  if (!x || !y) return false;
  if (x->kind != y->kind || x->term != y->term || x->cell != y->cell) return false;
  return formula_equal(x->a, y->a) && formula_equal(x->b, y->b);
}

// Surface printing; parses back to an identical AST. Derived connectives are
// recognized by their desugared shapes so output reads like the input
// language (G/F/R, ||, ->, <->) instead of the Not/And/Until core.
inline std::string formula_to_string(const FormulaPtr& f, const Signature& sig) {
  // Precedence levels mirror the parser: <-> 0, -> 1, || 2, && 3, U/R 4,
  // unary 5, atoms 6. Left-assoc ops reopen at their own level on the left;
  // right-assoc ops on the right.
  struct P {
    const Signature& sig;
    static bool is_not(const FormulaPtr& f) { return f && f->kind == FKind::Not; }
    static bool is_and(const FormulaPtr& f) { return f && f->kind == FKind::And; }
    static bool is_until(const FormulaPtr& f) { return f && f->kind == FKind::Until; }
    static bool is_true(const FormulaPtr& f) { return f && f->kind == FKind::True; }
    // Matches Not(And(a, Not(b))), the shape of a -> b.
    static bool implies_parts(const FormulaPtr& f, FormulaPtr& a, FormulaPtr& b) {
      if (!is_not(f) || !is_and(f->a) || !is_not(f->a->b)) return false;
      a = f->a->a;
      b = f->a->b->a;
      return true;
    }
    std::string go(const FormulaPtr& f, int parent) {
      int lvl;
      std::string s;
      FormulaPtr a, b, a2, b2;
      switch (f->kind) {
        case FKind::True: lvl = 6; s = "true"; break;
        case FKind::Pred: lvl = 6; s = term_to_string(f->term); break;
        case FKind::Update:
          lvl = 6;
          s = "[" + sig.cells()[f->cell] + " <- " + term_to_string(f->term) + "]";
          break;
        case FKind::And:
          if (implies_parts(f->a, a, b) && implies_parts(f->b, b2, a2) &&
              formula_equal(a, a2) && formula_equal(b, b2)) {
            lvl = 0;
            s = go(a, 0) + " <-> " + go(b, 1);
          } else {
            lvl = 3;
            s = go(f->a, 3) + " && " + go(f->b, 4);
          }
          break;
        case FKind::Not:
          if (is_true(f->a)) {
            lvl = 6;
            s = "false";
          } else if (is_until(f->a) && is_true(f->a->a) && is_not(f->a->b)) {
            lvl = 5;
            s = "G " + go(f->a->b->a, 5);
          } else if (is_until(f->a) && is_not(f->a->a) && is_not(f->a->b)) {
            lvl = 4;
            s = go(f->a->a->a, 5) + " R " + go(f->a->b->a, 4);
          } else if (is_and(f->a) && is_not(f->a->a) && is_not(f->a->b)) {
            lvl = 2;
            s = go(f->a->a->a, 2) + " || " + go(f->a->b->a, 3);
          } else if (is_and(f->a) && is_not(f->a->b)) {
            lvl = 1;
            s = go(f->a->a, 2) + " -> " + go(f->a->b->a, 1);
          } else {
            lvl = 5;
            s = "!" + go(f->a, 5);
          }
          break;
        case FKind::Next: lvl = 5; s = "X " + go(f->a, 5); break;
        case FKind::Until:
          if (is_true(f->a)) {
            lvl = 5;
            s = "F " + go(f->b, 5);
          } else {
            lvl = 4;
            s = go(f->a, 5) + " U " + go(f->b, 4);
          }
          break;
        default: throw Error("unprintable formula node");
      }
      if (lvl < parent) return "(" + s + ")";
      return s;
    }
  };
  return P{sig}.go(f, 0);
}

inline std::string formula_to_string(const TslFormula& f) {
  return formula_to_string(f.root, *f.sig);
}

// Pre-order collection helpers; order is first occurrence, deduplicated.

inline void collect_predicates(const FormulaPtr& f, std::vector<TermId>& out) {
  if (!f) return;
  if (f->kind == FKind::Pred) {
    for (TermId t : out)
      if (t == f->term) return;
    out.push_back(f->term);
    return;
  }
  collect_predicates(f->a, out);
  collect_predicates(f->b, out);
}

inline std::vector<TermId> all_predicates(const TslFormula& f) {
  std::vector<TermId> out;
  collect_predicates(f.root, out);
  return out;
}

struct UpdateAtom {
  std::uint32_t cell;
  TermId term;
  bool operator==(const UpdateAtom&) const = default;
};

inline void collect_updates(const FormulaPtr& f, std::vector<UpdateAtom>& out) {
  if (!f) return;
  if (f->kind == FKind::Update) {
    UpdateAtom u{f->cell, f->term};
    for (const auto& v : out)
      if (v == u) return;
    out.push_back(u);
    return;
  }
  collect_updates(f->a, out);
  collect_updates(f->b, out);
}

inline std::vector<UpdateAtom> all_updates(const TslFormula& f) {
  std::vector<UpdateAtom> out;
  collect_updates(f.root, out);
  return out;
}

inline void collect_term_cells(TermId t, const Signature& sig, std::vector<std::uint32_t>& out) {
  const auto& n = arena().node(t);
  if (n.kind == TermKind::Cell) {
    std::int32_t idx = sig.cell_index_of_term(t);
    if (idx >= 0) {
      for (auto c : out)
        if (c == static_cast<std::uint32_t>(idx)) return;
      out.push_back(static_cast<std::uint32_t>(idx));
    }
    return;
  }
  for (TermId a : n.args) collect_term_cells(a, sig, out);
}

// Cells occurring in the formula (update targets, update values, predicate
// arguments), in first-occurrence order.
inline std::vector<std::uint32_t> cells_of(const TslFormula& f) {
  std::vector<std::uint32_t> out;
  struct W {
    const Signature& sig;
    std::vector<std::uint32_t>& out;
    void go(const FormulaPtr& f) {
      if (!f) return;
      if (f->kind == FKind::Update) {
        bool seen = false;
        for (auto c : out) seen = seen || c == f->cell;
        if (!seen) out.push_back(f->cell);
        collect_term_cells(f->term, sig, out);
        return;
      }
      if (f->kind == FKind::Pred) {
        collect_term_cells(f->term, sig, out);
        return;
      }
      go(f->a);
      go(f->b);
    }
  };
  W{*f.sig, out}.go(f.root);
  return out;
}

// ---------------------------------------------------------------------------
// Symbolic evaluation. An Assignment gives each cell its update term for one
// step; a computation prefix is a sequence of assignments.

using Assignment = std::vector<TermId>;  // indexed by cell, size = sig.num_cells()

// Simultaneous replacement of cell references by the given terms.
inline TermId substitute(TermId t, const Assignment& cell_map, const Signature& sig,
                         std::unordered_map<TermId, TermId>* memo = nullptr) {
  if (memo) {
    auto it = memo->find(t);
    if (it != memo->end()) return it->second;
  }
  const auto& n = arena().node(t);
  TermId out;
  switch (n.kind) {
    case TermKind::Star:
      throw Error("wildcard update target in a finitary context");
    case TermKind::Cell: {
      std::int32_t idx = sig.cell_index_of_term(t);
      detail::require(idx >= 0, "cell term not in signature");
      out = cell_map[static_cast<std::uint32_t>(idx)];
      break;
    }
    case TermKind::Apply: {
      std::vector<TermId> args;
      args.reserve(n.args.size());
      bool changed = false;
      for (TermId a : n.args) {
        TermId s = substitute(a, cell_map, sig, memo);
        changed = changed || s != a;
        args.push_back(s);
      }
      out = changed ? arena().apply(n.sym, std::move(args)) : t;
      break;
    }
  }
  if (memo) memo->emplace(t, out);
  return out;
}

// Value of term t at step t over the prefix: cells at step 0 denote
// themselves; one step later a cell denotes its previous update term,
// evaluated one step earlier. Function application is homomorphic.
inline TermId eta(std::span<const Assignment> prefix, std::size_t t, TermId term,
                  const Signature& sig) {
  detail::require(t <= prefix.size(), "eta: step beyond prefix");
  const auto& n = arena().node(term);
  switch (n.kind) {
    case TermKind::Star:
      throw Error("eta: wildcard has no evaluation");
    case TermKind::Cell: {
      if (t == 0) return term;
      std::int32_t idx = sig.cell_index_of_term(term);
      detail::require(idx >= 0, "eta: cell term not in signature");
      return eta(prefix, t - 1, prefix[t - 1][static_cast<std::uint32_t>(idx)], sig);
    }
    case TermKind::Apply: {
      std::vector<TermId> args;
      args.reserve(n.args.size());
      for (TermId a : n.args) args.push_back(eta(prefix, t, a, sig));
      return arena().apply(n.sym, std::move(args));
    }
  }
  throw Error("eta: bad term");
}

// eta on a predicate term is the same homomorphic evaluation.
inline TermId eta_pred(std::span<const Assignment> prefix, std::size_t t, TermId pred_term,
                       const Signature& sig) {
  return eta(prefix, t, pred_term, sig);
}

}  // namespace tslsat
