// Nondeterministic Buchi automata with symbolic edge labels (conjunctions of
// AP literals), built from LTL via an on-the-fly tableau and a counter-based
// degeneralization. Also: liveness (accepting-cycle reachability) used for
// the structural emptiness shortcut, trimming, and lasso acceptance checks.
#pragma once

#include <algorithm>
#include <queue>
#include <set>

#include "tslsat/ltl.hpp"

namespace tslsat {

struct NbaEdge {
  std::vector<std::uint32_t> pos, neg;  // sorted AP indices; conjunction of literals
  std::uint32_t dst = 0;
};

struct Nba {
  std::uint32_t num_states = 0;
  std::uint32_t num_aps = 0;
  std::vector<std::uint8_t> initial, accepting;
  std::vector<std::vector<NbaEdge>> edges;  // per source state

  bool letter_matches(const NbaEdge& e, const Letter& l) const {
    for (auto i : e.pos)
      if (!l[i]) return false;
    for (auto i : e.neg)
      if (l[i]) return false;
    return true;
  }
};

namespace detail {

// --- Negation normal form over a private store -----------------------------

enum class NKind : std::uint8_t { True, False, Lit, And, Or, Next, Until, Release };

struct NnfNode {
  NKind kind;
  std::uint32_t ap = 0;
  bool pol = true;  // Lit only
  std::uint32_t a = 0, b = 0;
};

class NnfStore {
 public:
  std::uint32_t mk(NnfNode n) {
    std::uint64_t h = hash_mix(static_cast<std::uint64_t>(n.kind), n.ap);
    h = hash_mix(h, n.pol ? 1 : 0);
    h = hash_mix(h, n.a);
    h = hash_mix(h, n.b);
    auto [it, inserted] = map_.try_emplace(h);
    if (!inserted)
      for (auto cand : it->second) {
        const NnfNode& c = nodes_[cand];
        if (c.kind == n.kind && c.ap == n.ap && c.pol == n.pol && c.a == n.a && c.b == n.b)
          return cand;
      }
    std::uint32_t id = static_cast<std::uint32_t>(nodes_.size());
    nodes_.push_back(n);
    it->second.push_back(id);
    return id;
  }
  const NnfNode& node(std::uint32_t id) const { return nodes_[id]; }
  std::size_t size() const { return nodes_.size(); }

 private:
  std::vector<NnfNode> nodes_;
  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> map_;
};

inline std::uint32_t to_nnf(const LtlStore& st, LtlId f, bool pol, NnfStore& out,
                            std::map<std::pair<LtlId, bool>, std::uint32_t>& memo) {
  auto key = std::make_pair(f, pol);
  auto it = memo.find(key);
  if (it != memo.end()) return it->second;
  const auto& n = st.node(f);
  std::uint32_t r;
  switch (n.kind) {
    case LKind::True:
      r = out.mk({pol ? NKind::True : NKind::False});
      break;
    case LKind::Ap:
      r = out.mk({NKind::Lit, n.ap, pol});
      break;
    case LKind::Not:
      r = to_nnf(st, n.a, !pol, out, memo);
      break;
    case LKind::And: {
      auto a = to_nnf(st, n.a, pol, out, memo), b = to_nnf(st, n.b, pol, out, memo);
      r = out.mk({pol ? NKind::And : NKind::Or, 0, true, a, b});
      break;
    }
    case LKind::Next: {
      auto a = to_nnf(st, n.a, pol, out, memo);
      r = out.mk({NKind::Next, 0, true, a});
      break;
    }
    case LKind::Until: {
      auto a = to_nnf(st, n.a, pol, out, memo), b = to_nnf(st, n.b, pol, out, memo);
      r = out.mk({pol ? NKind::Until : NKind::Release, 0, true, a, b});
      break;
    }
    default:
      throw Error("bad ltl node");
  }
  memo.emplace(key, r);
  return r;
}

// --- Tableau construction --------------------------------------------------
// Classic node expansion: each finished node holds the processed set (old)
// and the obligations for the next step (next); incoming records which nodes
// reach it. Nodes merge when (old, next) coincide.

struct TableauNode {
  std::set<std::uint32_t> incoming;  // node ids; kInit for the initial marker
  std::set<std::uint32_t> neu, old, next;
};

inline constexpr std::uint32_t kInit = 0xffffffffu;

struct Tableau {
  const NnfStore& st;
  std::size_t node_cap;
  std::vector<TableauNode> finished;
  std::map<std::pair<std::set<std::uint32_t>, std::set<std::uint32_t>>, std::uint32_t> index;

  // Worklist expansion (the branch tree can get deep; recursing on it
  // overflows the stack). The current branch continues in place and split
  // siblings are stacked, a fixed order, so finished-node numbering is
  // reproducible run to run.
  void expand(TableauNode start) {
    std::vector<TableauNode> work;
    work.push_back(std::move(start));
    std::uint64_t steps = 0;
    const std::uint64_t step_cap = 64 * static_cast<std::uint64_t>(node_cap);
    while (!work.empty()) {
      TableauNode node = std::move(work.back());
      work.pop_back();
      for (bool alive = true; alive;) {
        if (++steps > step_cap) throw CapError("tableau expansion budget exceeded");
        if (node.neu.empty()) {
          auto key = std::make_pair(node.old, node.next);
          auto it = index.find(key);
          if (it != index.end()) {
            finished[it->second].incoming.insert(node.incoming.begin(), node.incoming.end());
            break;
          }
          if (finished.size() >= node_cap) throw CapError("tableau node budget exceeded");
          std::uint32_t id = static_cast<std::uint32_t>(finished.size());
          finished.push_back(node);
          index.emplace(key, id);
          node = TableauNode{};
          node.incoming = {id};
          node.neu = finished[id].next;
          continue;
        }
        std::uint32_t eta = *node.neu.begin();
        node.neu.erase(node.neu.begin());
        if (node.old.count(eta)) continue;
        const NnfNode& n = st.node(eta);
        switch (n.kind) {
          case NKind::False:
            alive = false;  // contradiction, drop this branch
            break;
          case NKind::True:
            break;
          case NKind::Lit:
            for (auto o : node.old) {
              const NnfNode& on = st.node(o);
              if (on.kind == NKind::Lit && on.ap == n.ap && on.pol != n.pol) alive = false;
            }
            if (alive) node.old.insert(eta);
            break;
          case NKind::And:
            node.old.insert(eta);
            if (!node.old.count(n.a)) node.neu.insert(n.a);
            if (!node.old.count(n.b)) node.neu.insert(n.b);
            break;
          case NKind::Next:
            node.old.insert(eta);
            node.next.insert(n.a);
            break;
          case NKind::Or: {
            node.old.insert(eta);
            TableauNode right = node;
            if (!right.old.count(n.b)) right.neu.insert(n.b);
            work.push_back(std::move(right));
            if (!node.old.count(n.a)) node.neu.insert(n.a);
            break;
          }
          case NKind::Until: {
            node.old.insert(eta);
            TableauNode later = node;
            if (!later.old.count(n.a)) later.neu.insert(n.a);
            later.next.insert(eta);
            work.push_back(std::move(later));
            if (!node.old.count(n.b)) node.neu.insert(n.b);
            break;
          }
          case NKind::Release: {
            node.old.insert(eta);
            TableauNode hold = node;
            if (!hold.old.count(n.b)) hold.neu.insert(n.b);
            hold.next.insert(eta);
            work.push_back(std::move(hold));
            if (!node.old.count(n.a)) node.neu.insert(n.a);
            if (!node.old.count(n.b)) node.neu.insert(n.b);
            break;
          }
        }
      }
    }
  }
};

}  // namespace detail

// Quotient by forward bisimulation: states with the same acceptance flag and
// identical outgoing (label, class-of-target) sets collapse, iterated to a
// fixpoint. Language-preserving. The tableau below produces entry copies of
// recurring states (their node sets differ by already-discharged root
// conjuncts); collapsing them lets accepting lassos start at an initial
// state instead of dragging a one-step stem.
inline Nba nba_bisim_quotient(const Nba& a) {
  const std::uint32_t n = a.num_states;
  if (n == 0) return a;
  std::vector<std::uint32_t> cls(n), next_cls(n);
  for (std::uint32_t i = 0; i < n; ++i) cls[i] = a.accepting[i] ? 1 : 0;
  using Sig = std::pair<std::uint32_t,
                        std::vector<std::tuple<std::vector<std::uint32_t>,
                                               std::vector<std::uint32_t>, std::uint32_t>>>;
  while (true) {
    std::map<Sig, std::uint32_t> ids;
    std::uint32_t fresh = 0;
    for (std::uint32_t i = 0; i < n; ++i) {
      Sig sig;
      sig.first = cls[i];
      for (const auto& e : a.edges[i]) sig.second.emplace_back(e.pos, e.neg, cls[e.dst]);
      std::sort(sig.second.begin(), sig.second.end());
      sig.second.erase(std::unique(sig.second.begin(), sig.second.end()), sig.second.end());
      auto [it, fresh_sig] = ids.emplace(std::move(sig), fresh);
      if (fresh_sig) ++fresh;
      next_cls[i] = it->second;
    }
    if (next_cls == cls) break;
    cls.swap(next_cls);
  }
  // Renumber classes by first occurrence so state ids stay deterministic.
  std::vector<std::uint32_t> order(n, 0xffffffffu);
  std::uint32_t count = 0;
  for (std::uint32_t i = 0; i < n; ++i)
    if (order[cls[i]] == 0xffffffffu) order[cls[i]] = count++;
  Nba out;
  out.num_states = count;
  out.num_aps = a.num_aps;
  out.initial.assign(count, 0);
  out.accepting.assign(count, 0);
  out.edges.assign(count, {});
  std::vector<std::uint32_t> rep(count, 0xffffffffu);
  for (std::uint32_t i = 0; i < n; ++i) {
    std::uint32_t c = order[cls[i]];
    if (a.initial[i]) out.initial[c] = 1;
    if (a.accepting[i]) out.accepting[c] = 1;
    if (rep[c] == 0xffffffffu) rep[c] = i;
  }
  for (std::uint32_t c = 0; c < count; ++c) {
    for (const auto& e : a.edges[rep[c]])
      out.edges[c].push_back(NbaEdge{e.pos, e.neg, order[cls[e.dst]]});
    std::sort(out.edges[c].begin(), out.edges[c].end(),
              [](const NbaEdge& x, const NbaEdge& y) {
                if (x.pos != y.pos) return x.pos < y.pos;
                if (x.neg != y.neg) return x.neg < y.neg;
                return x.dst < y.dst;
              });
    out.edges[c].erase(std::unique(out.edges[c].begin(), out.edges[c].end(),
                                   [](const NbaEdge& x, const NbaEdge& y) {
                                     return x.pos == y.pos && x.neg == y.neg && x.dst == y.dst;
                                   }),
                       out.edges[c].end());
  }
  return out;
}

// Translate an LTL formula into an NBA over num_aps propositions. The
// intermediate automaton carries one acceptance set per Until subformula
// (nodes where the Until is absent or its right argument holds); a counter
// product folds them into plain Buchi acceptance. Tableau labels sit on
// states, so every edge out of a state carries that state's literals and the
// tableau's entry nodes become the initial states; initial states can then
// recur, which keeps accepting lassos free of artificial stems.
inline Nba ltl_to_nba(const LtlStore& st, LtlId root, std::uint32_t num_aps,
                      std::size_t node_cap = 500000) {
  detail::NnfStore nnf;
  std::map<std::pair<LtlId, bool>, std::uint32_t> memo;
  std::uint32_t nroot = detail::to_nnf(st, root, true, nnf, memo);

  detail::Tableau tb{nnf, node_cap, {}, {}};
  detail::TableauNode init;
  init.incoming = {detail::kInit};
  init.neu = {nroot};
  tb.expand(std::move(init));

  const auto& nodes = tb.finished;
  const std::uint32_t N = static_cast<std::uint32_t>(nodes.size());

  // Acceptance sets, one per Until node actually present in the tableau.
  std::vector<std::uint32_t> untils;
  for (std::uint32_t i = 0; i < nnf.size(); ++i)
    if (nnf.node(i).kind == detail::NKind::Until) untils.push_back(i);
  std::vector<std::vector<std::uint8_t>> fsets;
  for (auto u : untils) {
    std::vector<std::uint8_t> f(N, 0);
    const auto& un = nnf.node(u);
    for (std::uint32_t q = 0; q < N; ++q)
      f[q] = (!nodes[q].old.count(u) || nodes[q].old.count(un.b)) ? 1 : 0;
    fsets.push_back(std::move(f));
  }
  const std::uint32_t k = static_cast<std::uint32_t>(fsets.size());

  // Edge labels come from the source node's literals.
  auto lits_of = [&](std::uint32_t q) {
    std::pair<std::vector<std::uint32_t>, std::vector<std::uint32_t>> out;
    for (auto o : nodes[q].old) {
      const auto& n = nnf.node(o);
      if (n.kind == detail::NKind::Lit) (n.pol ? out.first : out.second).push_back(n.ap);
    }
    std::sort(out.first.begin(), out.first.end());
    std::sort(out.second.begin(), out.second.end());
    return out;
  };

  // Degeneralization product over counter values 0..k; state (q, c) is
  // accepting when c == k; entering q' advances the counter through every
  // acceptance set it belongs to.
  auto advance = [&](std::uint32_t c, std::uint32_t q) {
    std::uint32_t base = (c == k) ? 0 : c;
    while (base < k && fsets[base][q]) ++base;
    return base;
  };

  std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t> ids;  // (q,c) -> state
  std::vector<std::pair<std::uint32_t, std::uint32_t>> states;
  auto get_id = [&](std::uint32_t q, std::uint32_t c) {
    auto key = std::make_pair(q, c);
    auto it = ids.find(key);
    if (it != ids.end()) return it->second;
    std::uint32_t id = static_cast<std::uint32_t>(states.size());
    ids.emplace(key, id);
    states.push_back(key);
    return id;
  };

  // Successor tableau nodes by source; kInit marks the entry nodes.
  std::vector<std::vector<std::uint32_t>> succs(N);
  std::vector<std::uint32_t> init_nodes;
  for (std::uint32_t r = 0; r < N; ++r)
    for (auto q : nodes[r].incoming) {
      if (q == detail::kInit)
        init_nodes.push_back(r);
      else
        succs[q].push_back(r);
    }
  for (auto& s : succs) {
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
  }
  std::sort(init_nodes.begin(), init_nodes.end());
  init_nodes.erase(std::unique(init_nodes.begin(), init_nodes.end()), init_nodes.end());

  Nba out;
  out.num_aps = num_aps;
  std::queue<std::uint32_t> work;
  std::set<std::uint32_t> visited;
  std::vector<std::uint32_t> init_ids;
  for (auto r : init_nodes) {
    std::uint32_t id = get_id(r, advance(0, r));
    if (visited.insert(id).second) {
      init_ids.push_back(id);
      work.push(id);
    }
  }
  std::vector<std::vector<NbaEdge>> edges;
  while (!work.empty()) {
    std::uint32_t id = work.front();
    work.pop();
    auto [q, c] = states[id];
    if (edges.size() <= id) edges.resize(states.size());
    for (auto r : succs[q]) {
      std::uint32_t rid = get_id(r, advance(c, r));
      auto [pos, neg] = lits_of(q);
      if (edges.size() <= std::max(id, rid)) edges.resize(states.size());
      edges[id].push_back(NbaEdge{std::move(pos), std::move(neg), rid});
      if (visited.insert(rid).second) work.push(rid);
    }
  }
  edges.resize(states.size());

  out.num_states = static_cast<std::uint32_t>(states.size());
  out.initial.assign(out.num_states, 0);
  out.accepting.assign(out.num_states, 0);
  for (auto id : init_ids) out.initial[id] = 1;
  for (std::uint32_t id = 0; id < out.num_states; ++id)
    out.accepting[id] = (states[id].second == k) ? 1 : 0;
  out.edges = std::move(edges);
  // Deterministic edge order within a state.
  for (auto& es : out.edges)
    std::sort(es.begin(), es.end(), [](const NbaEdge& a, const NbaEdge& b) {
      if (a.pos != b.pos) return a.pos < b.pos;
      if (a.neg != b.neg) return a.neg < b.neg;
      return a.dst < b.dst;
    });
  return nba_bisim_quotient(out);
}

// ---------------------------------------------------------------------------
// Liveness: states from which an accepting cycle is reachable. Iterative
// Tarjan over the given adjacency; an SCC is live when it contains an
// accepting state and has an internal edge (size > 1 or a self-loop).

inline std::vector<std::uint8_t> live_states(const std::vector<std::vector<std::uint32_t>>& succ,
                                             const std::vector<std::uint8_t>& accepting) {
  const std::uint32_t N = static_cast<std::uint32_t>(succ.size());
  std::vector<std::uint32_t> idx(N, 0), low(N, 0), comp(N, 0);
  std::vector<std::uint8_t> on_stack(N, 0), live(N, 0);
  std::vector<std::uint32_t> stack;
  std::uint32_t counter = 1, ncomp = 0;
  std::vector<std::uint8_t> comp_live;

  struct Frame {
    std::uint32_t v;
    std::size_t child;
  };
  for (std::uint32_t root = 0; root < N; ++root) {
    if (idx[root]) continue;
    std::vector<Frame> frames{{root, 0}};
    idx[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = 1;
    while (!frames.empty()) {
      Frame& f = frames.back();
      if (f.child < succ[f.v].size()) {
        std::uint32_t w = succ[f.v][f.child++];
        if (!idx[w]) {
          idx[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = 1;
          frames.push_back({w, 0});
        } else if (on_stack[w]) {
          low[f.v] = std::min(low[f.v], idx[w]);
        }
      } else {
        std::uint32_t v = f.v;
        frames.pop_back();
        if (!frames.empty()) low[frames.back().v] = std::min(low[frames.back().v], low[v]);
        if (low[v] == idx[v]) {
          // Pop one component. Components complete in reverse topological
          // order, so successors' liveness is already known.
          std::vector<std::uint32_t> members;
          for (;;) {
            std::uint32_t w = stack.back();
            stack.pop_back();
            on_stack[w] = 0;
            comp[w] = ncomp;
            members.push_back(w);
            if (w == v) break;
          }
          bool has_acc = false, has_edge = false, reaches_live = false;
          for (auto m : members) {
            has_acc = has_acc || accepting[m];
            for (auto w : succ[m]) {
              if (comp[w] == ncomp && (members.size() > 1 || w == m)) has_edge = true;
              if (comp[w] != ncomp && comp_live[comp[w]]) reaches_live = true;
            }
          }
          bool self_live = (has_acc && has_edge) || reaches_live;
          comp_live.push_back(self_live ? 1 : 0);
          if (self_live)
            for (auto m : members) live[m] = 1;
          ++ncomp;
        }
      }
    }
  }
  return live;
}

inline std::vector<std::vector<std::uint32_t>> nba_adjacency(const Nba& a) {
  std::vector<std::vector<std::uint32_t>> succ(a.num_states);
  for (std::uint32_t q = 0; q < a.num_states; ++q)
    for (const auto& e : a.edges[q]) succ[q].push_back(e.dst);
  return succ;
}

// Is some accepting run reachable from the given state (edge labels ignored;
// every symbolic label is satisfiable by construction)?
inline bool nba_nonempty_from(const Nba& a, std::uint32_t state) {
  auto live = live_states(nba_adjacency(a), a.accepting);
  return live[state] != 0;
}

inline bool nba_structurally_empty(const Nba& a) {
  auto live = live_states(nba_adjacency(a), a.accepting);
  for (std::uint32_t q = 0; q < a.num_states; ++q)
    if (a.initial[q] && live[q]) return false;
  return true;
}

// Restrict to states reachable from an initial state and able to reach an
// accepting cycle. Language-preserving. State order is preserved.
inline Nba trim(const Nba& a) {
  auto live = live_states(nba_adjacency(a), a.accepting);
  std::vector<std::uint8_t> reach(a.num_states, 0);
  std::queue<std::uint32_t> work;
  for (std::uint32_t q = 0; q < a.num_states; ++q)
    if (a.initial[q] && live[q]) {
      reach[q] = 1;
      work.push(q);
    }
  while (!work.empty()) {
    std::uint32_t q = work.front();
    work.pop();
    for (const auto& e : a.edges[q])
      if (live[e.dst] && !reach[e.dst]) {
        reach[e.dst] = 1;
        work.push(e.dst);
      }
  }
  std::vector<std::uint32_t> remap(a.num_states, 0);
  std::uint32_t n = 0;
  for (std::uint32_t q = 0; q < a.num_states; ++q)
    if (reach[q]) remap[q] = n++;
  Nba out;
  out.num_states = n;
  out.num_aps = a.num_aps;
  out.initial.assign(n, 0);
  out.accepting.assign(n, 0);
  out.edges.resize(n);
  for (std::uint32_t q = 0; q < a.num_states; ++q) {
    if (!reach[q]) continue;
    out.initial[remap[q]] = a.initial[q];
    out.accepting[remap[q]] = a.accepting[q];
    for (const auto& e : a.edges[q])
      if (reach[e.dst] && live[e.dst])
        out.edges[remap[q]].push_back(NbaEdge{e.pos, e.neg, remap[e.dst]});
  }
  return out;
}

// Does the automaton accept stem . loop^omega? Product of the lasso positions
// with the automaton, then accepting-cycle reachability.
inline bool nba_accepts_lasso(const Nba& a, const std::vector<Letter>& stem,
                              const std::vector<Letter>& loop) {
  detail::require(!loop.empty(), "lasso needs a nonempty loop");
  const std::size_t S = stem.size(), L = loop.size(), N = S + L;
  auto letter_at = [&](std::size_t i) -> const Letter& { return i < S ? stem[i] : loop[i - S]; };
  auto succ_pos = [&](std::size_t i) { return i + 1 < N ? i + 1 : S; };

  std::map<std::pair<std::size_t, std::uint32_t>, std::uint32_t> ids;
  std::vector<std::pair<std::size_t, std::uint32_t>> nodes;
  auto get = [&](std::size_t p, std::uint32_t q) {
    auto key = std::make_pair(p, q);
    auto it = ids.find(key);
    if (it != ids.end()) return it->second;
    std::uint32_t id = static_cast<std::uint32_t>(nodes.size());
    ids.emplace(key, id);
    nodes.push_back(key);
    return id;
  };
  std::vector<std::vector<std::uint32_t>> adj;
  std::vector<std::uint8_t> acc;
  std::queue<std::uint32_t> work;
  std::vector<std::uint32_t> starts;
  for (std::uint32_t q = 0; q < a.num_states; ++q)
    if (a.initial[q]) {
      starts.push_back(get(0, q));
      work.push(starts.back());
    }
  std::set<std::uint32_t> seen(starts.begin(), starts.end());
  while (!work.empty()) {
    std::uint32_t id = work.front();
    work.pop();
    auto [p, q] = nodes[id];
    if (adj.size() <= id) adj.resize(nodes.size());
    for (const auto& e : a.edges[q]) {
      if (!a.letter_matches(e, letter_at(p))) continue;
      std::uint32_t nid = get(succ_pos(p), e.dst);
      if (adj.size() <= std::max(id, nid)) adj.resize(nodes.size());
      adj[id].push_back(nid);
      if (seen.insert(nid).second) work.push(nid);
    }
  }
  adj.resize(nodes.size());
  acc.resize(nodes.size());
  for (std::uint32_t i = 0; i < nodes.size(); ++i) acc[i] = a.accepting[nodes[i].second];
  auto live = live_states(adj, acc);
  for (auto s : starts)
    if (live[s]) return true;
  return false;
}

// All letters over n APs, in numeric order (LSB = AP 0). Test helper sizes.
inline std::vector<Letter> all_letters(std::uint32_t n) {
  detail::require(n <= 20, "letter enumeration too large");
  std::vector<Letter> out;
  for (std::uint32_t bits = 0; bits < (1u << n); ++bits) {
    Letter l(n);
    for (std::uint32_t i = 0; i < n; ++i) l[i] = (bits >> i) & 1;
    out.push_back(std::move(l));
  }
  return out;
}

}  // namespace tslsat
