// Buchi stream automata: transitions carry a guard valuation over the
// formula's predicate terms plus one update term per cell. Conversion from a
// propositional NBA expands each symbolic edge into the update combinations
// it permits; the guard valuation records exactly the predicate literals the
// edge constrains (unconstrained predicates stay free, which refines to the
// same set of executions and keeps search branching small).
#pragma once

#include <optional>

#include "tslsat/nba.hpp"

namespace tslsat {

struct BsaTransition {
  std::uint32_t src = 0, dst = 0;
  // (guard index, value) pairs sorted by guard index; guards absent from the
  // source edge are unconstrained.
  std::vector<std::pair<std::uint16_t, bool>> guards;
  std::vector<TermId> updates;  // per cell; cell-ref = self update, star = wildcard
};

struct Bsa {
  SignaturePtr sig;
  ApUniverse universe;              // the propositional alphabet this was built over
  std::vector<TermId> guard_terms;  // the predicate terms, universe order
  std::uint32_t num_states = 0;
  std::vector<std::uint8_t> initial, accepting;
  std::vector<BsaTransition> transitions;  // sorted by (src, guard rank, update rank, dst)
  std::vector<std::uint32_t> state_begin;  // CSR offsets into transitions, size num_states+1

  bool finitary() const {
    for (const auto& t : transitions)
      for (TermId u : t.updates)
        if (u == arena().star()) return false;
    return true;
  }

  std::span<const BsaTransition> out(std::uint32_t q) const {
    return std::span<const BsaTransition>(transitions.data() + state_begin[q],
                                          state_begin[q + 1] - state_begin[q]);
  }

  // The explicit letter of a transition under a default value for
  // unconstrained predicates.
  Letter letter_of(const BsaTransition& t, bool free_pred_value = false) const {
    Letter l(universe.size(), false);
    for (std::uint32_t i = 0; i < universe.num_preds; ++i) l[i] = free_pred_value;
    for (auto [g, v] : t.guards) l[g] = v;
    for (std::uint32_t c = 0; c < updates_size(); ++c) {
      auto [b, e] = universe.cell_aps[c];
      for (std::uint32_t i = b; i < e; ++i) l[i] = (universe.aps[i].term == t.updates[c]);
    }
    return l;
  }

  // Does the transition admit the explicit letter?
  bool matches_letter(const BsaTransition& t, const Letter& l) const {
    for (auto [g, v] : t.guards)
      if (l[g] != v) return false;
    for (std::uint32_t c = 0; c < updates_size(); ++c) {
      auto [b, e] = universe.cell_aps[c];
      for (std::uint32_t i = b; i < e; ++i)
        if (l[i] != (universe.aps[i].term == t.updates[c])) return false;
    }
    return true;
  }

  std::uint32_t updates_size() const { return static_cast<std::uint32_t>(universe.cell_aps.size()); }
};

// Convert a propositional NBA over the given universe. Each edge expands to
// one transition per legal update combination. With total_valuations, every
// free predicate bit is additionally enumerated both ways, so a transition
// carries a full predicate valuation; consistency checks over such runs see
// every predicate obligation. Without it, transitions keep only the literals
// the edge constrains, which keeps the branching small; satisfiability
// search is complete on that quotient because a model of the constrained
// literals fixes the free bits afterwards. Exceeding the per-edge cap is an
// error naming the edge.
inline Bsa nba_to_bsa(const Nba& nba, const ApUniverse& universe, SignaturePtr sig,
                      std::size_t letter_cap = 4096, bool total_valuations = true) {
  detail::require(nba.num_aps == universe.size(), "universe does not match automaton alphabet");
  Bsa out;
  out.sig = std::move(sig);
  out.universe = universe;
  for (std::uint32_t i = 0; i < universe.num_preds; ++i)
    out.guard_terms.push_back(universe.aps[i].term);
  out.num_states = nba.num_states;
  out.initial = nba.initial;
  out.accepting = nba.accepting;

  const std::uint32_t num_cells = static_cast<std::uint32_t>(universe.cell_aps.size());
  for (std::uint32_t q = 0; q < nba.num_states; ++q) {
    for (const auto& e : nba.edges[q]) {
      // Predicate literals the edge constrains.
      std::vector<std::pair<std::uint16_t, bool>> guards;
      bool contradictory = false;
      for (auto i : e.pos)
        if (i < universe.num_preds) guards.emplace_back(static_cast<std::uint16_t>(i), true);
      for (auto i : e.neg)
        if (i < universe.num_preds) guards.emplace_back(static_cast<std::uint16_t>(i), false);
      std::sort(guards.begin(), guards.end());
      for (std::size_t i = 0; i + 1 < guards.size(); ++i)
        if (guards[i].first == guards[i + 1].first && guards[i].second != guards[i + 1].second)
          contradictory = true;
      if (contradictory) continue;
      guards.erase(std::unique(guards.begin(), guards.end()), guards.end());

      // Predicates the edge leaves open; each enumerated bit doubles the
      // expansion.
      std::vector<std::uint16_t> free_preds;
      if (total_valuations)
        for (std::uint16_t i = 0; i < universe.num_preds; ++i) {
          bool mentioned = false;
          for (auto [g, v] : guards) mentioned = mentioned || g == i;
          if (!mentioned) free_preds.push_back(i);
        }

      // Per-cell update choices consistent with the edge's update literals.
      std::vector<std::vector<std::uint32_t>> choices(num_cells);
      bool dead = false;
      for (std::uint32_t c = 0; c < num_cells && !dead; ++c) {
        auto [b, en] = universe.cell_aps[c];
        std::int32_t forced = -1;
        for (auto i : e.pos)
          if (i >= b && i < en) {
            if (forced >= 0 && forced != static_cast<std::int32_t>(i)) dead = true;
            forced = static_cast<std::int32_t>(i);
          }
        for (std::uint32_t i = b; i < en && !dead; ++i) {
          bool denied = std::binary_search(e.neg.begin(), e.neg.end(), i);
          if (forced >= 0) {
            if (static_cast<std::uint32_t>(forced) == i && denied) dead = true;
            if (static_cast<std::uint32_t>(forced) == i && !denied) choices[c].push_back(i);
          } else if (!denied) {
            choices[c].push_back(i);
          }
        }
        if (!dead && choices[c].empty()) dead = true;
      }
      if (dead) continue;

      std::size_t combos = 1;
      for (const auto& ch : choices) {
        combos *= ch.size();
        if (combos > letter_cap)
          throw CapError("letter expansion cap exceeded on edge " + std::to_string(q) + " -> " +
                         std::to_string(e.dst) + " (" + std::to_string(letter_cap) + " letters)");
      }
      for (std::size_t i = 0; i < free_preds.size(); ++i) {
        combos *= 2;
        if (combos > letter_cap)
          throw CapError("letter expansion cap exceeded on edge " + std::to_string(q) + " -> " +
                         std::to_string(e.dst) + " (" + std::to_string(letter_cap) + " letters)");
      }

      for (std::size_t mask = 0; mask < (std::size_t{1} << free_preds.size()); ++mask) {
        std::vector<std::pair<std::uint16_t, bool>> full = guards;
        for (std::size_t i = 0; i < free_preds.size(); ++i)
          full.emplace_back(free_preds[i], (mask >> i) & 1);
        std::sort(full.begin(), full.end());
        std::vector<std::uint32_t> pick(num_cells, 0);
        for (;;) {
          BsaTransition t;
          t.src = q;
          t.dst = e.dst;
          t.guards = full;
          t.updates.resize(num_cells);
          for (std::uint32_t c = 0; c < num_cells; ++c)
            t.updates[c] = universe.aps[choices[c][pick[c]]].term;
          out.transitions.push_back(std::move(t));
          std::uint32_t c = 0;
          while (c < num_cells && ++pick[c] == choices[c].size()) pick[c++] = 0;
          if (c == num_cells) break;
        }
      }
    }
  }

  // Deterministic order: source state, then guard valuation with true before
  // false before unconstrained (lexicographic over guard order), then update
  // terms ranked by their universe position, then target.
  auto guard_rank = [&](const BsaTransition& t) {
    std::vector<std::uint8_t> rank(universe.num_preds, 2);
    for (auto [g, v] : t.guards) rank[g] = v ? 0 : 1;
    return rank;
  };
  auto update_rank = [&](const BsaTransition& t) {
    std::vector<std::uint32_t> rank(num_cells, 0);
    for (std::uint32_t c = 0; c < num_cells; ++c) {
      auto [b, e] = universe.cell_aps[c];
      for (std::uint32_t i = b; i < e; ++i)
        if (universe.aps[i].term == t.updates[c]) rank[c] = i - b;
    }
    return rank;
  };
  std::stable_sort(out.transitions.begin(), out.transitions.end(),
                   [&](const BsaTransition& a, const BsaTransition& b) {
                     if (a.src != b.src) return a.src < b.src;
                     auto ga = guard_rank(a), gb = guard_rank(b);
                     if (ga != gb) return ga < gb;
                     auto ua = update_rank(a), ub = update_rank(b);
                     if (ua != ub) return ua < ub;
                     return a.dst < b.dst;
                   });
  out.transitions.erase(std::unique(out.transitions.begin(), out.transitions.end(),
                                    [](const BsaTransition& a, const BsaTransition& b) {
                                      return a.src == b.src && a.dst == b.dst &&
                                             a.guards == b.guards && a.updates == b.updates;
                                    }),
                        out.transitions.end());

  out.state_begin.assign(out.num_states + 1, 0);
  for (const auto& t : out.transitions) out.state_begin[t.src + 1]++;
  for (std::uint32_t q = 0; q < out.num_states; ++q) out.state_begin[q + 1] += out.state_begin[q];
  return out;
}

// ---------------------------------------------------------------------------
// Execution effects: what a finite transition word does. cell_terms maps each
// cell to the term it holds after the word (relative to the values before
// it); constraints are the signed predicate obligations collected along the
// way, evaluated back to step-0 vocabulary.

struct ExecutionEffect {
  std::vector<TermId> cell_terms;
  std::vector<std::pair<TermId, bool>> constraints;  // sorted, deduplicated
};

inline ExecutionEffect effect_empty(const Signature& sig) {
  ExecutionEffect e;
  e.cell_terms.reserve(sig.num_cells());
  for (const auto& c : sig.cells()) e.cell_terms.push_back(arena().cell(c));
  return e;
}

inline void insert_constraint(std::vector<std::pair<TermId, bool>>& cs,
                              std::pair<TermId, bool> c) {
  auto it = std::lower_bound(cs.begin(), cs.end(), c);
  if (it == cs.end() || *it != c) cs.insert(it, c);
}

inline ExecutionEffect effect_extend(const ExecutionEffect& e, const BsaTransition& t,
                                     const Bsa& bsa) {
  ExecutionEffect out;
  out.constraints = e.constraints;
  std::unordered_map<TermId, TermId> memo;
  // Guards are evaluated before the step's updates land.
  for (auto [g, v] : t.guards)
    insert_constraint(out.constraints,
                      {substitute(bsa.guard_terms[g], e.cell_terms, *bsa.sig, &memo), v});
  out.cell_terms.resize(e.cell_terms.size());
  for (std::uint32_t c = 0; c < e.cell_terms.size(); ++c)
    out.cell_terms[c] = substitute(t.updates[c], e.cell_terms, *bsa.sig, &memo);
  return out;
}

inline ExecutionEffect effect_of_word(const Bsa& bsa, std::span<const std::uint32_t> word) {
  ExecutionEffect e = effect_empty(*bsa.sig);
  for (auto ti : word) e = effect_extend(e, bsa.transitions[ti], bsa);
  return e;
}

// First predicate term required both true and false, if any.
inline std::optional<TermId> find_syntactic_conflict(
    const std::vector<std::pair<TermId, bool>>& constraints) {
  // Sorted pairs: (t,false) < (t,true) are adjacent when both present.
  for (std::size_t i = 0; i + 1 < constraints.size(); ++i)
    if (constraints[i].first == constraints[i + 1].first &&
        constraints[i].second != constraints[i + 1].second)
      return constraints[i].first;
  return std::nullopt;
}

inline std::vector<std::vector<std::uint32_t>> bsa_adjacency(const Bsa& a) {
  std::vector<std::vector<std::uint32_t>> succ(a.num_states);
  for (const auto& t : a.transitions) succ[t.src].push_back(t.dst);
  return succ;
}

// Structural accepting-run reachability from a state (consistency ignored).
inline bool bsa_nonempty_from(const Bsa& a, std::uint32_t state) {
  auto live = live_states(bsa_adjacency(a), a.accepting);
  return live[state] != 0;
}

// Structural acceptance of an explicit letter lasso; used to cross-check the
// conversion against the propositional automaton.
inline bool bsa_accepts_lasso(const Bsa& a, const std::vector<Letter>& stem,
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
    for (const auto& t : a.out(q)) {
      if (!a.matches_letter(t, letter_at(p))) continue;
      std::uint32_t nid = get(succ_pos(p), t.dst);
      if (adj.size() <= std::max(id, nid)) adj.resize(nodes.size());
      adj[id].push_back(nid);
      if (seen.insert(nid).second) work.push(nid);
    }
  }
  adj.resize(nodes.size());
  std::vector<std::uint8_t> acc(nodes.size());
  for (std::uint32_t i = 0; i < nodes.size(); ++i) acc[i] = a.accepting[nodes[i].second];
  auto live = live_states(adj, acc);
  for (auto s : starts)
    if (live[s]) return true;
  return false;
}

}  // namespace tslsat
