// Conjunctive queries over uninterpreted functions: signed predicate literals
// plus term equalities, decided by congruence closure. Predicate terms are
// ordinary terms equated with one of two sentinel constants; the query is
// unsatisfiable exactly when the sentinels merge.
#pragma once

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <optional>
#include <sstream>
#include <unistd.h>

#include "tslsat/core.hpp"

namespace tslsat {

struct EufQuery {
  std::vector<std::pair<TermId, bool>> predicates;  // signed predicate terms
  std::vector<std::pair<TermId, TermId>> equalities;

  void normalize() {
    std::sort(predicates.begin(), predicates.end());
    predicates.erase(std::unique(predicates.begin(), predicates.end()), predicates.end());
    std::sort(equalities.begin(), equalities.end());
    equalities.erase(std::unique(equalities.begin(), equalities.end()), equalities.end());
  }
  bool operator==(const EufQuery&) const = default;
  auto operator<=>(const EufQuery&) const = default;
};

enum class EufResult { Sat, Unsat };

// Union-find (union by rank, path compression) with congruence propagation
// over a growable local universe. mark()/revert() support reuse across
// queries sharing a prefix: revert rebuilds by replaying the surviving trail.
class CongruenceStore {
 public:
  CongruenceStore() {
    top_ = fresh_node();  // asserted-true sentinel
    bot_ = fresh_node();  // asserted-false sentinel
  }

  // Registers a term and its subterms; returns its local node.
  std::uint32_t add_term(TermId t) {
    auto it = local_.find(t);
    if (it != local_.end()) return it->second;
    const auto& n = arena().node(t);
    detail::require(n.kind != TermKind::Star, "wildcard term in an equality query");
    std::vector<std::uint32_t> args;
    if (n.kind == TermKind::Apply)
      for (TermId a : n.args) args.push_back(add_term(a));
    std::uint32_t id = fresh_node();
    local_.emplace(t, id);
    if (n.kind == TermKind::Apply) {
      apps_.push_back({id, n.sym, std::move(args)});
      propagate();
    }
    return id;
  }

  void assert_equal(TermId a, TermId b) {
    std::uint32_t x = add_term(a), y = add_term(b);
    eq_trail_.emplace_back(a, b);
    union_classes(x, y);
    propagate();
  }

  void assert_signed(TermId p, bool value) {
    std::uint32_t x = add_term(p);
    sign_trail_.emplace_back(p, value);
    union_classes(x, value ? top_ : bot_);
    propagate();
  }

  bool inconsistent() { return find(top_) == find(bot_); }

  std::size_t num_nodes() const { return parent_.size(); }

  bool same_class(TermId a, TermId b) { return find(add_term(a)) == find(add_term(b)); }

  // Equality classes over the registered terms, for model reporting.
  std::vector<std::vector<TermId>> classes() {
    std::map<std::uint32_t, std::vector<TermId>> by_rep;
    for (auto& [t, id] : local_) by_rep[find(id)].push_back(t);
    std::vector<std::vector<TermId>> out;
    for (auto& [rep, ts] : by_rep) {
      std::sort(ts.begin(), ts.end());
      out.push_back(std::move(ts));
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  struct Mark {
    std::size_t eq, sgn;
  };
  Mark mark() const { return {eq_trail_.size(), sign_trail_.size()}; }

  void revert(Mark m) {
    auto eqs = std::vector<std::pair<TermId, TermId>>(eq_trail_.begin(), eq_trail_.begin() + m.eq);
    auto sgs =
        std::vector<std::pair<TermId, bool>>(sign_trail_.begin(), sign_trail_.begin() + m.sgn);
    *this = CongruenceStore();
    for (auto& [a, b] : eqs) assert_equal(a, b);
    for (auto& [p, v] : sgs) assert_signed(p, v);
  }

 private:
  struct App {
    std::uint32_t node;
    NameId sym;
    std::vector<std::uint32_t> args;
  };

  std::uint32_t fresh_node() {
    std::uint32_t id = static_cast<std::uint32_t>(parent_.size());
    parent_.push_back(id);
    rank_.push_back(0);
    return id;
  }

  std::uint32_t find(std::uint32_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  void union_classes(std::uint32_t a, std::uint32_t b) {
    std::uint32_t ra = find(a), rb = find(b);
    if (ra == rb) return;
    if (rank_[ra] < rank_[rb]) std::swap(ra, rb);
    parent_[rb] = ra;
    if (rank_[ra] == rank_[rb]) ++rank_[ra];
  }

  // Merge congruent applications until fixpoint. Simple repeated pair scan;
  // queries stay small enough that clarity wins over an index.
  void propagate() {
    bool changed = true;
    while (changed) {
      changed = false;
      for (std::size_t i = 0; i < apps_.size(); ++i)
        for (std::size_t j = i + 1; j < apps_.size(); ++j) {
          const App& a = apps_[i];
          const App& b = apps_[j];
          if (a.sym != b.sym || a.args.size() != b.args.size()) continue;
          if (find(a.node) == find(b.node)) continue;
          bool all = true;
          for (std::size_t k = 0; k < a.args.size() && all; ++k)
            all = find(a.args[k]) == find(b.args[k]);
          if (all) {
            union_classes(a.node, b.node);
            changed = true;
          }
        }
    }
  }

  std::vector<std::uint32_t> parent_;
  std::vector<std::uint8_t> rank_;
  std::unordered_map<TermId, std::uint32_t> local_;
  std::vector<App> apps_;
  std::uint32_t top_ = 0, bot_ = 0;
  std::vector<std::pair<TermId, TermId>> eq_trail_;
  std::vector<std::pair<TermId, bool>> sign_trail_;
};

inline EufResult check_query(const EufQuery& q, CongruenceStore* out_store = nullptr) {
  CongruenceStore st;
  for (const auto& [p, v] : q.predicates) st.assert_signed(p, v);
  for (const auto& [a, b] : q.equalities) st.assert_equal(a, b);
  EufResult r = st.inconsistent() ? EufResult::Unsat : EufResult::Sat;
  if (out_store) *out_store = std::move(st);
  return r;
}

// Independent reference decision procedure: boolean equivalence matrix over
// the subterm universe, closed under transitivity and congruence by fixpoint.
inline EufResult naive_closure_oracle(const EufQuery& q) {
  std::vector<TermId> terms;
  std::unordered_map<TermId, std::size_t> index;
  std::function<void(TermId)> reg = [&](TermId t) {
    if (index.count(t)) return;
    index[t] = terms.size();
    terms.push_back(t);
    for (TermId a : arena().node(t).args) reg(a);
  };
  for (const auto& [p, v] : q.predicates) reg(p);
  for (const auto& [a, b] : q.equalities) {
    reg(a);
    reg(b);
  }
  const std::size_t n = terms.size();
  const std::size_t TOP = n, BOT = n + 1, N = n + 2;
  std::vector<std::vector<char>> eq(N, std::vector<char>(N, 0));
  for (std::size_t i = 0; i < N; ++i) eq[i][i] = 1;
  for (const auto& [p, v] : q.predicates) {
    std::size_t s = v ? TOP : BOT;
    eq[index[p]][s] = eq[s][index[p]] = 1;
  }
  for (const auto& [a, b] : q.equalities) eq[index[a]][index[b]] = eq[index[b]][index[a]] = 1;

  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t a = 0; a < N; ++a)
      for (std::size_t b = 0; b < N; ++b) {
        if (!eq[a][b]) continue;
        for (std::size_t c = 0; c < N; ++c)
          if (eq[b][c] && !eq[a][c]) {
            eq[a][c] = eq[c][a] = 1;
            changed = true;
          }
      }
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        if (eq[i][j]) continue;
        const auto& a = arena().node(terms[i]);
        const auto& b = arena().node(terms[j]);
        if (a.kind != TermKind::Apply || b.kind != TermKind::Apply) continue;
        if (a.sym != b.sym || a.args.size() != b.args.size()) continue;
        bool all = true;
        for (std::size_t k = 0; k < a.args.size() && all; ++k)
          all = eq[index[a.args[k]]][index[b.args[k]]];
        if (all) {
          eq[i][j] = eq[j][i] = 1;
          changed = true;
        }
      }
  }
  return eq[TOP][BOT] ? EufResult::Unsat : EufResult::Sat;
}

// ---------------------------------------------------------------------------
// SMT-LIB 2 export (QF_UF with a single uninterpreted sort).

inline std::string smt_sanitize(const std::string& name) {
  std::string out;
  for (char c : name)
    out += (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-') ? c : '_';
  if (out.empty() || std::isdigit(static_cast<unsigned char>(out[0]))) out = "s_" + out;
  return out;
}

inline void smt_term(std::ostream& os, TermId t) {
  const auto& n = arena().node(t);
  detail::require(n.kind != TermKind::Star, "wildcard term in export");
  if (n.kind == TermKind::Cell || n.args.empty()) {
    os << smt_sanitize(arena().name(n.sym));
    return;
  }
  os << '(' << smt_sanitize(arena().name(n.sym));
  for (TermId a : n.args) {
    os << ' ';
    smt_term(os, a);
  }
  os << ')';
}

inline std::string export_smtlib(const EufQuery& q, const Signature& sig) {
  std::ostringstream os;
  os << "(set-logic QF_UF)\n(declare-sort U 0)\n";
  auto args_of = [&](unsigned k) {
    std::string s = "(";
    for (unsigned i = 0; i < k; ++i) s += i ? " U" : "U";
    return s + ")";
  };
  for (const auto& c : sig.cells())
    os << "(declare-fun " << smt_sanitize(c) << " () U)\n";
  for (const auto& [f, k] : sig.functions())
    os << "(declare-fun " << smt_sanitize(f) << " " << args_of(k) << " U)\n";
  for (const auto& [p, k] : sig.predicates())
    os << "(declare-fun " << smt_sanitize(p) << " " << args_of(k) << " Bool)\n";
  for (const auto& [pt, v] : q.predicates) {
    os << "(assert ";
    if (!v) os << "(not ";
    smt_term(os, pt);
    if (!v) os << ")";
    os << ")\n";
  }
  for (const auto& [a, b] : q.equalities) {
    os << "(assert (= ";
    smt_term(os, a);
    os << ' ';
    smt_term(os, b);
    os << "))\n";
  }
  os << "(check-sat)\n";
  return os.str();
}

// Optional differential backend: pipe the script into an external command
// that answers sat/unsat/unknown on its first output line. Returns nullopt on
// unknown or any process trouble.
inline std::optional<EufResult> external_solver_check(const std::string& cmd, const EufQuery& q,
                                                      const Signature& sig) {
  std::string script = export_smtlib(q, sig);
  char path[] = "/tmp/tslsat_query_XXXXXX";
  int fd = mkstemp(path);
  if (fd < 0) return std::nullopt;
  FILE* f = fdopen(fd, "w");
  if (!f) {
    close(fd);
    unlink(path);
    return std::nullopt;
  }
  fwrite(script.data(), 1, script.size(), f);
  fclose(f);
  std::string full = cmd + " < " + path + " 2>/dev/null";
  FILE* p = popen(full.c_str(), "r");
  std::optional<EufResult> out;
  if (p) {
    char buf[64] = {0};
    if (fgets(buf, sizeof buf, p)) {
      std::string line(buf);
      if (line.find("unsat") != std::string::npos)
        out = EufResult::Unsat;
      else if (line.find("sat") != std::string::npos)
        out = EufResult::Sat;
    }
    pclose(p);
  }
  unlink(path);
  return out;
}

}  // namespace tslsat
