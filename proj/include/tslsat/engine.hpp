// The satisfiability core runs two cooperating searches over a Buchi stream
// automaton. The exclusion search enumerates finite transition words in
// breadth-first block trees rooted at every state and records the words whose
// execution effects are syntactically contradictory; any run containing such
// a word as an infix is inconsistent. The model search hunts for an accepting
// lasso whose accumulated constraints are satisfiable over uninterpreted
// functions: first along the structurally shortest lassos, then by
// iterative-deepening DFS from the initial states, pruned by the exclusion
// set. Unsatisfiability is certified either when no accepting cycle survives
// the product with the exclusion automaton or when the deepening search
// exhausts a finite, fully dead tree.
#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <deque>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "tslsat/bsa.hpp"
#include "tslsat/euf.hpp"

namespace tslsat {

struct Witness {
  std::vector<std::uint32_t> pref, rec;  // transition indices; rec is the loop
  EufQuery query;
  std::vector<std::vector<TermId>> model_classes;
  std::vector<std::pair<TermId, bool>> model_predicates;
};

enum class Outcome { Sat, Unsat, Unknown };
enum class UnknownReason { None, Timeout, Cap, NbaEmptyShortcutDisabled };

struct Stats {
  std::uint64_t nba_states = 0, nba_live_states = 0;
  std::uint64_t bsa_states = 0, bsa_transitions = 0, guards = 0;
  std::uint64_t blocks_expanded = 0, blocks_allocated = 0;
  std::uint64_t exclusions = 0;
  std::uint64_t euf_queries = 0;
  std::uint64_t viability_checks = 0, viability_cache_hits = 0;
  std::uint64_t wall_ms = 0;
  bool nba_structurally_empty = false;
  bool every_cycle_accepting = false;  // logged, never enforced
};

struct Verdict {
  Outcome outcome = Outcome::Unknown;
  UnknownReason reason = UnknownReason::None;
  std::string detail;  // cap description etc.
  std::optional<Witness> witness;
  Stats stats;
};

struct RunConfig {
  ApproxMode mode = ApproxMode::Finitary;
  double timeout_seconds = 300.0;
  int workers = 1;  // 1 (deterministic) or 2
  std::size_t letter_cap = 4096;
  std::size_t block_budget = 5'000'000;
  std::size_t query_term_budget = 1'000'000;
  std::size_t tableau_node_cap = 500'000;
  std::size_t product_node_cap = 4'000'000;
  std::size_t search_visit_budget = 0;  // 0 = bounded only by the timeout
  int exclude_ratio = 8;  // exclusion batch size multiplier per model-search round
  bool nba_empty_shortcut = true;
  std::string solver_cmd;     // optional differential SMT backend
  std::string smt_dump_dir;   // optional per-query SMT-LIB dump
  const Nba* nba_override = nullptr;
  std::string nba_checksum;
};

namespace detail {

// Excluded transition words, shared between workers. Append-only and
// deduplicating; readers mirror it locally.
class ExclusionSet {
 public:
  // Returns true when the word was new.
  bool add(const std::vector<std::uint32_t>& w) {
    std::lock_guard<std::mutex> lock(mu_);
    if (!uniq_.insert(w).second) return false;
    words_.push_back(w);
    return true;
  }
  std::size_t size() const {
    std::lock_guard<std::mutex> lock(mu_);
    return words_.size();
  }
  // Copies words [from, size) into out; returns the new size.
  std::size_t sync(std::size_t from, std::vector<std::vector<std::uint32_t>>& out) const {
    std::lock_guard<std::mutex> lock(mu_);
    for (std::size_t i = from; i < words_.size(); ++i) out.push_back(words_[i]);
    return words_.size();
  }

 private:
  mutable std::mutex mu_;
  std::deque<std::vector<std::uint32_t>> words_;
  std::set<std::vector<std::uint32_t>> uniq_;
};

struct TimeoutSignal {};
struct StopSignal {};

// Deadline and cross-worker stop polling, threaded through every loop that
// can run long.
struct RunCtx {
  std::chrono::steady_clock::time_point deadline;
  const std::atomic<bool>* stop = nullptr;
  std::uint32_t tick = 0;
  void poll() {
    if ((++tick & 0x3ff) != 0) return;
    force_poll();
  }
  void force_poll() {
    if (stop && stop->load(std::memory_order_relaxed)) throw StopSignal{};
    if (std::chrono::steady_clock::now() > deadline) throw TimeoutSignal{};
  }
};

inline constexpr std::uint32_t kNoAcState = 0xffffffffu;

// Aho-Corasick automaton over transition words; the alphabet is the set of
// transition indices. A state is dead when some suffix of its spelled word
// is a full exclusion word, i.e. the scanned text contains an excluded
// infix. Scanning any text from the root visits a dead state iff the text
// contains some exclusion word as an infix.
class AcAutomaton {
 public:
  AcAutomaton() { clear(); }
  void clear() {
    go_.assign(1, {});
    fail_.assign(1, 0);
    dead_.assign(1, 0);
  }
  std::size_t num_states() const { return go_.size(); }
  bool dead(std::uint32_t s) const { return dead_[s] != 0; }

  void build(const std::vector<std::vector<std::uint32_t>>& words) {
    clear();
    for (const auto& w : words) {
      std::uint32_t s = 0;
      for (auto a : w) {
        std::uint32_t t = child(s, a);
        if (t == kNoAcState) {
          t = static_cast<std::uint32_t>(go_.size());
          go_.emplace_back();
          fail_.push_back(0);
          dead_.push_back(0);
          auto& v = go_[s];
          v.insert(std::lower_bound(v.begin(), v.end(), std::make_pair(a, 0u)),
                   std::make_pair(a, t));
        }
        s = t;
      }
      dead_[s] = 1;
    }
    // Fail links breadth-first; dead flags absorb along the suffix chain.
    std::queue<std::uint32_t> q;
    for (auto [a, t] : go_[0]) {
      fail_[t] = 0;
      q.push(t);
    }
    while (!q.empty()) {
      std::uint32_t s = q.front();
      q.pop();
      dead_[s] = dead_[s] || dead_[fail_[s]];
      for (auto [a, t] : go_[s]) {
        std::uint32_t f = fail_[s], x;
        while (true) {
          x = child(f, a);
          if (x != kNoAcState) break;
          if (f == 0) {
            x = 0;
            break;
          }
          f = fail_[f];
        }
        fail_[t] = (x == t) ? 0 : x;
        q.push(t);
      }
    }
  }

  // Longest-suffix scan step.
  std::uint32_t step(std::uint32_t s, std::uint32_t a) const {
    while (true) {
      std::uint32_t t = child(s, a);
      if (t != kNoAcState) return t;
      if (s == 0) return 0;
      s = fail_[s];
    }
  }

  // Whether the word is already covered: scanning it hits a dead state.
  bool covered(const std::vector<std::uint32_t>& w) const {
    std::uint32_t s = 0;
    for (auto a : w) {
      s = step(s, a);
      if (dead_[s]) return true;
    }
    return false;
  }

 private:
  std::uint32_t child(std::uint32_t s, std::uint32_t a) const {
    const auto& v = go_[s];
    auto it = std::lower_bound(v.begin(), v.end(), std::make_pair(a, 0u));
    if (it != v.end() && it->first == a) return it->second;
    return kNoAcState;
  }
  std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>> go_;
  std::vector<std::uint32_t> fail_;
  std::vector<std::uint8_t> dead_;
};

// Liveness on the product of the automaton with the exclusion scanner: a
// node (q, s) is live when an accepting cycle is reachable from it without
// entering a dead scanner state. Queried lazily; every node a query settles
// stays cached until the exclusion set grows. When the explored region would
// exceed the node cap the oracle disables itself and answers "live" from
// then on, which keeps the search sound (only pruning is lost).
class ProductOracle {
 public:
  ProductOracle(const Bsa& bsa, const AcAutomaton& ac, const std::vector<std::uint32_t>& lid,
                std::size_t node_cap)
      : bsa_(bsa), ac_(ac), lid_(lid), cap_(node_cap) {}

  void reset() {
    status_.clear();
    disabled_ = false;
  }
  bool disabled() const { return disabled_; }
  std::uint64_t checks = 0, cache_hits = 0;

  bool live(std::uint32_t q, std::uint32_t s, RunCtx& ctx) {
    if (disabled_) return true;
    std::uint64_t root = key(q, s);
    auto it = status_.find(root);
    if (it != status_.end()) {
      ++cache_hits;
      return it->second != 0;
    }
    ++checks;
    // Collect the unexplored reachable region; settled nodes act as
    // terminals (live ones as accepting self-loops).
    std::vector<std::uint64_t> nodes;
    std::unordered_map<std::uint64_t, std::uint32_t> local;
    std::vector<std::vector<std::uint32_t>> succ;
    std::vector<std::uint8_t> accepting;
    std::vector<std::uint8_t> settled;  // 1 = terminal, liveness already known
    auto intern = [&](std::uint64_t n) -> std::pair<std::uint32_t, bool> {
      auto [jt, fresh] = local.emplace(n, static_cast<std::uint32_t>(nodes.size()));
      if (fresh) {
        nodes.push_back(n);
        succ.emplace_back();
        accepting.push_back(0);
        settled.push_back(0);
      }
      return {jt->second, fresh};
    };
    std::queue<std::uint32_t> work;
    work.push(intern(root).first);
    while (!work.empty()) {
      ctx.poll();
      std::uint32_t id = work.front();
      work.pop();
      std::uint64_t n = nodes[id];
      auto kt = status_.find(n);
      if (kt != status_.end()) {
        settled[id] = 1;
        if (kt->second) {
          accepting[id] = 1;
          succ[id].push_back(id);  // live terminal: accepting self-loop
        }
        continue;
      }
      if (nodes.size() > cap_) {
        disabled_ = true;
        status_.clear();
        return true;
      }
      std::uint32_t state = static_cast<std::uint32_t>(n >> 32);
      std::uint32_t acs = static_cast<std::uint32_t>(n);
      accepting[id] = bsa_.accepting[state];
      for (std::uint32_t ti = bsa_.state_begin[state]; ti < bsa_.state_begin[state + 1]; ++ti) {
        std::uint32_t a2 = ac_.step(acs, lid_[ti]);
        if (ac_.dead(a2)) continue;
        auto [mid, fresh] = intern(key(bsa_.transitions[ti].dst, a2));
        succ[id].push_back(mid);
        if (fresh) work.push(mid);
      }
    }
    auto live_flags = live_states(succ, accepting);
    for (std::uint32_t id = 0; id < nodes.size(); ++id)
      if (!settled[id]) status_.emplace(nodes[id], live_flags[id]);
    return live_flags[local.at(root)] != 0;
  }

 private:
  static std::uint64_t key(std::uint32_t q, std::uint32_t s) {
    return (static_cast<std::uint64_t>(q) << 32) | s;
  }
  const Bsa& bsa_;
  const AcAutomaton& ac_;
  const std::vector<std::uint32_t>& lid_;
  std::size_t cap_;
  std::unordered_map<std::uint64_t, std::uint8_t> status_;
  bool disabled_ = false;
};

// Transitions with identical guards and updates induce identical constraint
// deltas, so exclusion words are stored over letter classes rather than raw
// transition indices: one excluded word prunes every placement of its letter
// sequence anywhere in the automaton.
inline std::vector<std::uint32_t> transition_letters(const Bsa& bsa) {
  std::map<std::pair<std::vector<std::pair<std::uint16_t, bool>>, std::vector<TermId>>,
           std::uint32_t>
      ids;
  std::vector<std::uint32_t> out(bsa.transitions.size());
  for (std::size_t i = 0; i < bsa.transitions.size(); ++i) {
    const auto& t = bsa.transitions[i];
    auto it = ids.emplace(std::make_pair(t.guards, t.updates),
                          static_cast<std::uint32_t>(ids.size()))
                  .first;
    out[i] = it->second;
  }
  return out;
}

// Guard literals of a transition substituted under the pre-step cell terms,
// sorted and deduplicated.
inline void delta_of(const Bsa& bsa, const std::vector<TermId>& cells, const BsaTransition& t,
                     std::vector<std::pair<TermId, bool>>& out) {
  out.clear();
  const Signature& sig = *bsa.sig;
  for (auto [g, v] : t.guards) out.emplace_back(substitute(bsa.guard_terms[g], cells, sig), v);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
}

inline void apply_updates(const Bsa& bsa, const std::vector<TermId>& cells,
                          const BsaTransition& t, std::vector<TermId>& out) {
  const Signature& sig = *bsa.sig;
  out.resize(cells.size());
  for (std::size_t c = 0; c < cells.size(); ++c) out[c] = substitute(t.updates[c], cells, sig);
}

inline std::vector<TermId> identity_cells(const Signature& sig) {
  std::vector<TermId> cells;
  for (const auto& name : sig.cells()) cells.push_back(arena().cell(name));
  return cells;
}

// ---------------------------------------------------------------------------
// Exclusion side: breadth-first block forest rooted at every state with
// identity cells. A conflicting word's effects stay contradictory under any
// prefix substitution, so the word is excluded as an infix everywhere.

struct XBlock {
  std::uint32_t state = 0;
  std::int64_t parent = -1;
  std::uint32_t trans = 0;  // transition taken into this block
  std::uint32_t ac = 0;
  std::uint64_t gen = 0;  // exclusion generation the ac state was computed in
  std::vector<TermId> cells;
  std::vector<std::pair<TermId, bool>> delta;  // sorted, deduplicated
};

class ExcludeSide {
 public:
  ExcludeSide(const Bsa& bsa, const std::vector<std::uint32_t>& lid, const RunConfig& cfg,
              ExclusionSet& shared)
      : bsa_(bsa), lid_(lid), cfg_(cfg), shared_(shared),
        oracle_(bsa, ac_, lid, cfg.product_node_cap) {}

  std::uint64_t expanded = 0;
  bool frozen = false;  // block budget exhausted; the word set stays useful

  // Pulls fresh words and rebuilds the scanner once the set grew by a
  // geometric margin (or immediately when forced). Scanner rebuilds and the
  // product re-exploration that follows are the expensive part, so they are
  // rationed; a stale scanner only delays pruning. Returns true on rebuild.
  bool sync(bool force = false) {
    synced_ = shared_.sync(synced_, words_);
    if (words_.size() == built_) return false;
    if (!force && words_.size() < next_rebuild_) return false;
    built_ = words_.size();
    next_rebuild_ = built_ + 64 + built_ / 4;
    ac_.build(words_);
    oracle_.reset();
    ++gen_;
    return true;
  }

  // All runs start at an initial state with an empty scan context; when no
  // accepting cycle survives from any of them the language is empty.
  bool product_empty(RunCtx& ctx) {
    if (oracle_.disabled()) return false;
    for (std::uint32_t q = 0; q < bsa_.num_states; ++q)
      if (bsa_.initial[q] && oracle_.live(q, 0, ctx)) return false;
    return !oracle_.disabled();
  }

  // Expands up to n blocks. Returns false once the queue is empty or the
  // budget is gone (the forest is then frozen for good).
  bool step(std::size_t n, RunCtx& ctx, std::atomic<std::uint64_t>& allocated) {
    if (frozen) return false;
    if (!seeded_) seed(ctx, allocated);
    std::vector<std::pair<TermId, bool>> delta;
    std::vector<std::uint32_t> word;
    while (n-- > 0) {
      if (queue_.empty()) return false;
      if (frozen) return false;
      ctx.poll();
      std::uint64_t id = queue_.front();
      queue_.pop();
      ++expanded;
      // Blocks enqueued before the last sync carry stale scanner states.
      if (blocks_[id].gen != gen_) refresh(id);
      XBlock& b = blocks_[id];
      if (ac_.dead(b.ac) || !oracle_.live(b.state, b.ac, ctx)) continue;
      for (std::uint32_t ti = bsa_.state_begin[b.state]; ti < bsa_.state_begin[b.state + 1];
           ++ti) {
        const BsaTransition& t = bsa_.transitions[ti];
        std::uint32_t a2 = ac_.step(b.ac, lid_[ti]);
        if (ac_.dead(a2)) continue;  // word already covered by the set
        delta_of(bsa_, b.cells, t, delta);
        if (conflicts(id, delta)) {
          trace(id, lid_[ti], word);
          if (!ac_.covered(word)) shared_.add(word);
          continue;
        }
        if (!oracle_.live(t.dst, a2, ctx)) continue;
        if (allocated.fetch_add(1, std::memory_order_relaxed) + 1 > cfg_.block_budget) {
          frozen = true;
          return false;
        }
        XBlock child;
        child.state = t.dst;
        child.parent = static_cast<std::int64_t>(id);
        child.trans = ti;
        child.ac = a2;
        child.gen = gen_;
        apply_updates(bsa_, b.cells, t, child.cells);
        child.delta = delta;
        queue_.push(blocks_.size());
        blocks_.push_back(std::move(child));
      }
    }
    return true;
  }

  ProductOracle& oracle() { return oracle_; }

 private:
  void seed(RunCtx& ctx, std::atomic<std::uint64_t>& allocated) {
    seeded_ = true;
    std::vector<TermId> id_cells = identity_cells(*bsa_.sig);
    for (std::uint32_t q = 0; q < bsa_.num_states; ++q) {
      if (allocated.fetch_add(1, std::memory_order_relaxed) + 1 > cfg_.block_budget) {
        frozen = true;
        return;
      }
      XBlock root;
      root.state = q;
      root.cells = id_cells;
      root.gen = gen_;
      queue_.push(blocks_.size());
      blocks_.push_back(std::move(root));
      ctx.poll();
    }
  }

  void refresh(std::uint64_t id) {
    std::vector<std::uint32_t> word;
    trace_to(id, word);
    std::uint32_t s = 0;
    for (auto a : word) s = ac_.step(s, a);
    blocks_[id].ac = s;
    blocks_[id].gen = gen_;
  }

  // delta against itself and against every ancestor delta.
  bool conflicts(std::uint64_t id, const std::vector<std::pair<TermId, bool>>& delta) {
    if (find_syntactic_conflict(delta)) return true;
    for (const auto& [term, value] : delta) {
      std::int64_t a = static_cast<std::int64_t>(id);
      while (a >= 0) {
        const XBlock& anc = blocks_[static_cast<std::uint64_t>(a)];
        if (std::binary_search(anc.delta.begin(), anc.delta.end(),
                               std::make_pair(term, !value)))
          return true;
        a = anc.parent;
      }
    }
    return false;
  }

  // Letter-class word from root to the block.
  void trace_to(std::uint64_t id, std::vector<std::uint32_t>& out) {
    out.clear();
    std::int64_t a = static_cast<std::int64_t>(id);
    while (a >= 0) {
      const XBlock& b = blocks_[static_cast<std::uint64_t>(a)];
      if (b.parent >= 0) out.push_back(lid_[b.trans]);
      a = b.parent;
    }
    std::reverse(out.begin(), out.end());
  }
  void trace(std::uint64_t id, std::uint32_t last, std::vector<std::uint32_t>& out) {
    trace_to(id, out);
    out.push_back(last);
  }

  const Bsa& bsa_;
  const std::vector<std::uint32_t>& lid_;
  const RunConfig& cfg_;
  ExclusionSet& shared_;
  std::deque<XBlock> blocks_;
  std::queue<std::uint64_t> queue_;
  bool seeded_ = false;
  std::vector<std::vector<std::uint32_t>> words_;
  std::size_t synced_ = 0;
  std::size_t built_ = 0;
  std::size_t next_rebuild_ = 1;
  AcAutomaton ac_;
  ProductOracle oracle_;
  std::uint64_t gen_ = 0;
};

// ---------------------------------------------------------------------------
// Model search: a lasso is reported satisfiable when the constraints of its
// whole word plus the per-cell equalities between loop entry and loop end
// form a consistent query over uninterpreted functions. Runs on the quotient
// automaton (constrained guards only) and prunes by constraint conflicts
// alone; exhausting the conflict-pruned tree proves every run inconsistent.

class SearchSide {
 public:
  SearchSide(const Bsa& bsa, const RunConfig& cfg) : bsa_(bsa), cfg_(cfg) {}

  std::uint64_t visits = 0, queries = 0;
  std::uint64_t query_cache_hits = 0;

  // Structurally shortest accepting lassos, one per accepting state, in
  // order of total length. Cheap, exclusion-free, and catches most
  // satisfiable instances before any deepening round runs.
  std::optional<Witness> shortest_lassos(RunCtx& ctx) {
    auto [dist, via] = bfs_from_initials();
    struct Cand {
      std::uint64_t len;
      std::uint32_t acc;
    };
    std::vector<Cand> cands;
    for (std::uint32_t a = 0; a < bsa_.num_states; ++a) {
      if (!bsa_.accepting[a] || dist[a] == kInf) continue;
      std::uint64_t cyc = shortest_cycle_len(a);
      if (cyc == kInf) continue;
      cands.push_back({dist[a] + cyc, a});
    }
    std::sort(cands.begin(), cands.end(), [](const Cand& x, const Cand& y) {
      if (x.len != y.len) return x.len < y.len;
      return x.acc < y.acc;
    });
    for (const auto& c : cands) {
      ctx.force_poll();
      std::vector<std::uint32_t> stem = path_from_initials(c.acc, dist, via);
      std::vector<std::uint32_t> loop = cycle_at(c.acc);
      if (auto w = try_lasso(stem, loop)) return w;
    }
    return std::nullopt;
  }

  // One deepening round: DFS to depth_limit, at most visit_cap node visits.
  // Fills exhausted=true when the whole tree was explored and every branch
  // died before the depth limit: then no run at all survives, so the
  // instance is unsatisfiable.
  bool exhausted = false;
  std::optional<Witness> round(std::uint32_t depth_limit, std::uint64_t visit_cap, RunCtx& ctx) {
    exhausted = false;
    bool boundary_alive = false, capped = false;
    std::uint64_t round_visits = 0;

    const std::uint32_t cells_n = static_cast<std::uint32_t>(bsa_.sig->cells().size());
    std::vector<std::uint32_t> states(depth_limit + 1), trans(depth_limit + 1),
        acc_cnt(depth_limit + 1);
    std::vector<std::vector<TermId>> cells(depth_limit + 1,
                                           std::vector<TermId>(cells_n ? cells_n : 1));
    std::vector<std::vector<std::pair<TermId, std::uint8_t>>> journal(depth_limit + 1);
    std::vector<std::vector<std::uint32_t>> occ(bsa_.num_states);
    std::unordered_map<TermId, std::uint8_t> flags;
    std::vector<std::pair<TermId, bool>> delta;

    auto merge = [&](std::uint32_t d) -> bool {
      // Adds delta to flags, journaling old values; rolls back on conflict.
      auto& j = journal[d];
      j.clear();
      for (auto [term, value] : delta) {
        std::uint8_t& f = flags[term];
        std::uint8_t bit = value ? 1 : 2;
        if (f & (value ? 2 : 1)) {
          for (auto it = j.rbegin(); it != j.rend(); ++it) flags[it->first] = it->second;
          j.clear();
          return false;
        }
        j.emplace_back(term, f);
        f |= bit;
      }
      return true;
    };
    auto unmerge = [&](std::uint32_t d) {
      auto& j = journal[d];
      for (auto it = j.rbegin(); it != j.rend(); ++it) {
        if (it->second == 0)
          flags.erase(it->first);
        else
          flags[it->first] = it->second;
      }
      j.clear();
    };

    struct Frame {
      std::uint32_t ti, ti_end;
    };
    std::vector<Frame> stack;

    std::vector<TermId> id_cells = identity_cells(*bsa_.sig);
    for (std::uint32_t seed = 0; seed < bsa_.num_states && !capped; ++seed) {
      if (!bsa_.initial[seed]) continue;
      ctx.force_poll();
      states[0] = seed;
      acc_cnt[0] = 0;
      cells[0] = id_cells;
      occ[seed].push_back(0);
      stack.push_back({bsa_.state_begin[seed], bsa_.state_begin[seed + 1]});
      while (!stack.empty()) {
        std::uint32_t d = static_cast<std::uint32_t>(stack.size()) - 1;
        Frame& f = stack.back();
        if (f.ti == f.ti_end) {
          occ[states[d]].pop_back();
          if (d > 0) unmerge(d);
          stack.pop_back();
          continue;
        }
        std::uint32_t ti = f.ti++;
        const BsaTransition& t = bsa_.transitions[ti];
        ctx.poll();
        ++visits;
        ++round_visits;
        if (cfg_.search_visit_budget && visits > cfg_.search_visit_budget)
          throw CapError("model search visit budget exceeded");
        if (round_visits > visit_cap) {
          capped = true;
          break;
        }
        delta_of(bsa_, cells[d], t, delta);
        std::uint32_t nd = d + 1;
        if (!merge(nd)) continue;
        states[nd] = t.dst;
        trans[nd] = ti;
        acc_cnt[nd] = acc_cnt[d] + (bsa_.accepting[t.dst] ? 1 : 0);
        apply_updates(bsa_, cells[d], t, cells[nd]);
        // Lasso candidates against every earlier visit of this state,
        // nearest first (shortest loop, and shortest query, first).
        const auto& prior = occ[t.dst];
        std::optional<Witness> found;
        for (auto it = prior.rbegin(); it != prior.rend() && !found; ++it) {
          std::uint32_t p = *it;
          if (acc_cnt[nd] == acc_cnt[p]) continue;  // no accepting state inside
          EufQuery q;
          for (const auto& [term, fl] : flags) {
            if (fl & 1) q.predicates.emplace_back(term, true);
            if (fl & 2) q.predicates.emplace_back(term, false);
          }
          for (std::uint32_t c = 0; c < cells_n; ++c)
            if (cells[p][c] != cells[nd][c])
              q.equalities.emplace_back(cells[p][c], cells[nd][c]);
          q.normalize();
          if (consistent(q, ctx)) {
            Witness w;
            for (std::uint32_t k = 1; k <= p; ++k) w.pref.push_back(trans[k]);
            for (std::uint32_t k = p + 1; k <= nd; ++k) w.rec.push_back(trans[k]);
            w.query = q;
            CongruenceStore store;
            check_query(q, &store);
            w.model_classes = store.classes();
            w.model_predicates = q.predicates;
            found = std::move(w);
          }
        }
        if (found) return found;
        if (nd < depth_limit) {
          occ[t.dst].push_back(nd);
          stack.push_back({bsa_.state_begin[t.dst], bsa_.state_begin[t.dst + 1]});
        } else {
          boundary_alive = true;
          unmerge(nd);
        }
      }
      // A capped round abandons the stack mid-flight; clean up for the next.
      while (!stack.empty()) {
        std::uint32_t d = static_cast<std::uint32_t>(stack.size()) - 1;
        occ[states[d]].pop_back();
        if (d > 0) unmerge(d);
        stack.pop_back();
      }
    }
    exhausted = !capped && !boundary_alive;
    return std::nullopt;
  }

 private:
  static constexpr std::uint64_t kInf = ~0ull;

  // Shortest distances from the initial states; via[q] = transition into q
  // on some shortest path.
  std::pair<std::vector<std::uint64_t>, std::vector<std::uint32_t>> bfs_from_initials() {
    std::vector<std::uint64_t> dist(bsa_.num_states, kInf);
    std::vector<std::uint32_t> via(bsa_.num_states, 0);
    std::queue<std::uint32_t> q;
    for (std::uint32_t s = 0; s < bsa_.num_states; ++s)
      if (bsa_.initial[s]) {
        dist[s] = 0;
        q.push(s);
      }
    while (!q.empty()) {
      std::uint32_t s = q.front();
      q.pop();
      for (std::uint32_t ti = bsa_.state_begin[s]; ti < bsa_.state_begin[s + 1]; ++ti) {
        std::uint32_t d = bsa_.transitions[ti].dst;
        if (dist[d] != kInf) continue;
        dist[d] = dist[s] + 1;
        via[d] = ti;
        q.push(d);
      }
    }
    return {std::move(dist), std::move(via)};
  }

  std::vector<std::uint32_t> path_from_initials(std::uint32_t target,
                                                const std::vector<std::uint64_t>& dist,
                                                const std::vector<std::uint32_t>& via) {
    std::vector<std::uint32_t> out;
    std::uint32_t s = target;
    while (dist[s] != 0) {
      out.push_back(via[s]);
      s = bsa_.transitions[via[s]].src;
    }
    std::reverse(out.begin(), out.end());
    return out;
  }

  std::uint64_t shortest_cycle_len(std::uint32_t a) {
    std::vector<std::uint64_t> dist(bsa_.num_states, kInf);
    std::queue<std::uint32_t> q;
    // distance from a without counting a as reached
    for (std::uint32_t ti = bsa_.state_begin[a]; ti < bsa_.state_begin[a + 1]; ++ti) {
      std::uint32_t d = bsa_.transitions[ti].dst;
      if (d == a) return 1;
      if (dist[d] == kInf) {
        dist[d] = 1;
        q.push(d);
      }
    }
    while (!q.empty()) {
      std::uint32_t s = q.front();
      q.pop();
      for (std::uint32_t ti = bsa_.state_begin[s]; ti < bsa_.state_begin[s + 1]; ++ti) {
        std::uint32_t d = bsa_.transitions[ti].dst;
        if (d == a) return dist[s] + 1;
        if (dist[d] == kInf) {
          dist[d] = dist[s] + 1;
          q.push(d);
        }
      }
    }
    return kInf;
  }

  std::vector<std::uint32_t> cycle_at(std::uint32_t a) {
    // Shortest cycle through a, lexicographically first by transition index:
    // BFS back-pointers from a, then the first closing edge at the shallowest
    // depth wins; ties resolved by transition order.
    std::vector<std::uint64_t> dist(bsa_.num_states, kInf);
    std::vector<std::uint32_t> via(bsa_.num_states, 0);
    std::queue<std::uint32_t> q;
    std::uint64_t best_len = kInf;
    std::uint32_t best_close = 0;
    for (std::uint32_t ti = bsa_.state_begin[a]; ti < bsa_.state_begin[a + 1]; ++ti) {
      std::uint32_t d = bsa_.transitions[ti].dst;
      if (d == a) {
        best_len = 1;
        best_close = ti;
        break;
      }
      if (dist[d] == kInf) {
        dist[d] = 1;
        via[d] = ti;
        q.push(d);
      }
    }
    while (best_len == kInf && !q.empty()) {
      std::uint32_t s = q.front();
      q.pop();
      for (std::uint32_t ti = bsa_.state_begin[s]; ti < bsa_.state_begin[s + 1]; ++ti) {
        std::uint32_t d = bsa_.transitions[ti].dst;
        if (d == a) {
          best_len = dist[s] + 1;
          best_close = ti;
          break;
        }
        if (dist[d] == kInf) {
          dist[d] = dist[s] + 1;
          via[d] = ti;
          q.push(d);
        }
      }
    }
    std::vector<std::uint32_t> out;
    if (best_len == kInf) return out;
    out.push_back(best_close);
    std::uint32_t s = bsa_.transitions[best_close].src;
    while (s != a && dist[s] != 0) {
      out.push_back(via[s]);
      s = bsa_.transitions[via[s]].src;
    }
    if (s != a) return {};  // no cycle through a after all
    std::reverse(out.begin(), out.end());
    return out;
  }

  // Replays a concrete lasso candidate; returns a witness when consistent.
  std::optional<Witness> try_lasso(const std::vector<std::uint32_t>& stem,
                                   const std::vector<std::uint32_t>& loop) {
    if (loop.empty()) return std::nullopt;
    bool has_acc = false;
    for (auto ti : loop) has_acc = has_acc || bsa_.accepting[bsa_.transitions[ti].dst];
    if (!has_acc) return std::nullopt;
    const std::uint32_t cells_n = static_cast<std::uint32_t>(bsa_.sig->cells().size());
    std::vector<TermId> cur = identity_cells(*bsa_.sig), next, entry;
    std::vector<std::pair<TermId, bool>> delta;
    EufQuery q;
    auto step = [&](std::uint32_t ti) {
      const BsaTransition& t = bsa_.transitions[ti];
      delta_of(bsa_, cur, t, delta);
      for (auto& e : delta) q.predicates.push_back(e);
      apply_updates(bsa_, cur, t, next);
      cur.swap(next);
    };
    for (auto ti : stem) step(ti);
    entry = cur;
    for (auto ti : loop) step(ti);
    for (std::uint32_t c = 0; c < cells_n; ++c)
      if (entry[c] != cur[c]) q.equalities.emplace_back(entry[c], cur[c]);
    q.normalize();
    RunCtx dummy{std::chrono::steady_clock::now() + std::chrono::hours(24), nullptr};
    if (!consistent(q, dummy)) return std::nullopt;
    Witness w;
    w.pref = stem;
    w.rec = loop;
    w.query = q;
    CongruenceStore store;
    check_query(q, &store);
    w.model_classes = store.classes();
    w.model_predicates = q.predicates;
    return w;
  }

  // Cached consistency check with optional SMT dump and differential solver.
  bool consistent(const EufQuery& q, RunCtx&) {
    if (q.predicates.size() + 2 * q.equalities.size() > cfg_.query_term_budget)
      throw CapError("query term budget exceeded");
    if (unsat_cache_.count(q)) {
      ++query_cache_hits;
      return false;
    }
    ++queries;
    EufResult r = check_query(q);
    if (!cfg_.smt_dump_dir.empty()) dump_query(q);
    if (!cfg_.solver_cmd.empty()) {
      auto ext = external_solver_check(cfg_.solver_cmd, q, *bsa_.sig);
      if (ext && *ext != r) throw Error("external solver disagrees on a query");
    }
    if (r == EufResult::Sat) return true;
    unsat_cache_.insert(q);
    return false;
  }

  void dump_query(const EufQuery& q) {
    char name[64];
    std::snprintf(name, sizeof name, "query_%06llu.smt2",
                  static_cast<unsigned long long>(dumped_++));
    std::ofstream out(cfg_.smt_dump_dir + "/" + name);
    out << export_smtlib(q, *bsa_.sig);
  }

  const Bsa& bsa_;
  const RunConfig& cfg_;
  std::set<EufQuery> unsat_cache_;
  std::uint64_t dumped_ = 0;
};

// ---------------------------------------------------------------------------

class Engine {
 public:
  // The model search runs on the quotient automaton; the exclusion search
  // and its emptiness certificate run on the total-valuation automaton.
  Engine(const Bsa& search_bsa, const Bsa& exclude_bsa, const RunConfig& cfg)
      : cfg_(cfg), lid_(transition_letters(exclude_bsa)),
        ex_(exclude_bsa, lid_, cfg, exclusions_), se_(search_bsa, cfg) {}

  Stats& stats() { return stats_; }

  Verdict run() {
    start_ = std::chrono::steady_clock::now();
    deadline_ = start_ + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                             std::chrono::duration<double>(cfg_.timeout_seconds));
    if (cfg_.workers <= 1) {
      run_single();
    } else {
      std::thread t1([this] { exclude_loop(); });
      std::thread t2([this] { search_loop(); });
      t1.join();
      t2.join();
    }
    if (!published_) publish_unknown(UnknownReason::Timeout, "timed out");
    finish_stats();
    return verdict_;
  }

 private:
  // Deterministic interleaving: one exclusion batch, one emptiness check,
  // one search round per iteration; round depth and visit allowance grow so
  // the two sides dovetail regardless of which certificate exists.
  void run_single() {
    RunCtx ctx{deadline_, &stop_};
    try {
      if (auto w = se_.shortest_lassos(ctx)) {
        publish_sat(std::move(*w));
        return;
      }
      std::uint32_t depth = 8;
      std::uint64_t cap = 1ull << 15;
      std::size_t batch = static_cast<std::size_t>(cfg_.exclude_ratio) * 4096;
      while (!stop_.load(std::memory_order_relaxed)) {
        ctx.force_poll();
        bool had_queue = ex_.step(batch, ctx, blocks_allocated_);
        if (ex_.sync(!had_queue) || !checked_empty_) {
          checked_empty_ = true;
          if (ex_.product_empty(ctx)) {
            publish(Outcome::Unsat);
            return;
          }
        }
        if (auto w = se_.round(depth, cap, ctx)) {
          publish_sat(std::move(*w));
          return;
        }
        if (se_.exhausted) {
          publish(Outcome::Unsat);
          return;
        }
        if (depth < (1u << 20)) depth += 8;
        if (cap < (1ull << 40)) cap <<= 1;
        (void)had_queue;
      }
    } catch (const TimeoutSignal&) {
      publish_unknown(UnknownReason::Timeout, "timed out");
    } catch (const StopSignal&) {
    } catch (const CapError& e) {
      publish_unknown(UnknownReason::Cap, e.what());
    }
  }

  void exclude_loop() {
    RunCtx ctx{deadline_, &stop_};
    try {
      std::size_t batch = static_cast<std::size_t>(cfg_.exclude_ratio) * 4096;
      while (!stop_.load(std::memory_order_relaxed)) {
        ctx.force_poll();
        bool progress = ex_.step(batch, ctx, blocks_allocated_);
        if (ex_.sync(!progress) || !checked_empty_) {
          checked_empty_ = true;
          if (ex_.product_empty(ctx)) {
            publish(Outcome::Unsat);
            return;
          }
        }
        if (!progress && ex_.frozen) {
          // Nothing further to add; keep polling so a timeout still lands.
          std::this_thread::sleep_for(std::chrono::milliseconds(20));
        }
      }
    } catch (const TimeoutSignal&) {
      publish_unknown(UnknownReason::Timeout, "timed out");
    } catch (const StopSignal&) {
    } catch (const CapError& e) {
      publish_unknown(UnknownReason::Cap, e.what());
    }
  }

  void search_loop() {
    RunCtx ctx{deadline_, &stop_};
    try {
      if (auto w = se_.shortest_lassos(ctx)) {
        publish_sat(std::move(*w));
        return;
      }
      std::uint32_t depth = 8;
      std::uint64_t cap = 1ull << 15;
      while (!stop_.load(std::memory_order_relaxed)) {
        ctx.force_poll();
        if (auto w = se_.round(depth, cap, ctx)) {
          publish_sat(std::move(*w));
          return;
        }
        if (se_.exhausted) {
          publish(Outcome::Unsat);
          return;
        }
        if (depth < (1u << 20)) depth += 8;
        if (cap < (1ull << 40)) cap <<= 1;
      }
    } catch (const TimeoutSignal&) {
      publish_unknown(UnknownReason::Timeout, "timed out");
    } catch (const StopSignal&) {
    } catch (const CapError& e) {
      publish_unknown(UnknownReason::Cap, e.what());
    }
  }

  void publish(Outcome o) {
    std::lock_guard<std::mutex> lock(verdict_mu_);
    if (published_) return;
    published_ = true;
    verdict_.outcome = o;
    stop_.store(true, std::memory_order_relaxed);
  }
  void publish_sat(Witness w) {
    std::lock_guard<std::mutex> lock(verdict_mu_);
    if (published_) return;
    published_ = true;
    verdict_.outcome = Outcome::Sat;
    verdict_.witness = std::move(w);
    stop_.store(true, std::memory_order_relaxed);
  }
  void publish_unknown(UnknownReason r, const std::string& detail) {
    std::lock_guard<std::mutex> lock(verdict_mu_);
    if (published_) return;
    published_ = true;
    verdict_.outcome = Outcome::Unknown;
    verdict_.reason = r;
    verdict_.detail = detail;
    stop_.store(true, std::memory_order_relaxed);
  }

  void finish_stats() {
    stats_.blocks_expanded = ex_.expanded + se_.visits;
    stats_.blocks_allocated = blocks_allocated_.load(std::memory_order_relaxed);
    stats_.exclusions = exclusions_.size();
    stats_.euf_queries = se_.queries;
    stats_.viability_checks = ex_.oracle().checks;
    stats_.viability_cache_hits = ex_.oracle().cache_hits;
    stats_.wall_ms = static_cast<std::uint64_t>(
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_)
            .count());
    verdict_.stats = stats_;
  }

  RunConfig cfg_;
  std::vector<std::uint32_t> lid_;  // exclusion-side transition -> letter class
  ExclusionSet exclusions_;
  ExcludeSide ex_;
  SearchSide se_;
  std::atomic<bool> stop_{false};
  std::atomic<std::uint64_t> blocks_allocated_{0};
  bool checked_empty_ = false;
  std::mutex verdict_mu_;
  bool published_ = false;
  Verdict verdict_;
  Stats stats_;
  std::chrono::steady_clock::time_point start_, deadline_;
};

}  // namespace detail

using detail::Engine;

// ---------------------------------------------------------------------------
// Witness validation: recompute everything the witness claims from scratch.

inline bool witness_validate(const Witness& w, const Bsa& bsa, const LtlApproximation& approx,
                             std::string* why = nullptr) {
  auto fail = [&](const std::string& msg) {
    if (why) *why = msg;
    return false;
  };
  if (w.rec.empty()) return fail("empty loop");
  // Transitions must chain; the loop must return to its entry state.
  std::vector<std::uint32_t> word = w.pref;
  word.insert(word.end(), w.rec.begin(), w.rec.end());
  for (std::size_t i = 0; i + 1 < word.size(); ++i)
    if (bsa.transitions[word[i]].dst != bsa.transitions[word[i + 1]].src)
      return fail("transitions do not chain");
  std::uint32_t first_src = bsa.transitions[word.front()].src;
  if (w.pref.empty()) {
    if (!bsa.initial[first_src]) return fail("lasso does not start initial");
  } else {
    if (!bsa.initial[bsa.transitions[w.pref.front()].src])
      return fail("lasso does not start initial");
  }
  std::uint32_t loop_entry =
      w.pref.empty() ? first_src : bsa.transitions[w.pref.back()].dst;
  if (bsa.transitions[w.rec.back()].dst != loop_entry) return fail("loop does not close");
  bool has_accepting = false;
  for (auto ti : w.rec) has_accepting = has_accepting || bsa.accepting[bsa.transitions[ti].dst];
  if (!has_accepting) return fail("loop visits no accepting state");

  // Independent effect recomputation via step-wise evaluation.
  std::vector<Assignment> prefix;
  for (auto ti : word) prefix.push_back(bsa.transitions[ti].updates);
  const Signature& sig = *bsa.sig;
  EufQuery q;
  for (std::size_t step = 0; step < word.size(); ++step)
    for (auto [g, v] : bsa.transitions[word[step]].guards)
      q.predicates.emplace_back(eta(prefix, step, bsa.guard_terms[g], sig), v);
  for (std::uint32_t c = 0; c < sig.num_cells(); ++c) {
    TermId cell = arena().cell(sig.cells()[c]);
    TermId at_entry = eta(prefix, w.pref.size(), cell, sig);
    TermId at_end = eta(prefix, word.size(), cell, sig);
    if (at_entry != at_end) q.equalities.emplace_back(at_entry, at_end);
  }
  q.normalize();
  if (!(q == w.query)) return fail("query does not match recomputed effects");
  if (check_query(q) != EufResult::Sat) return fail("query unsatisfiable");

  // The lasso's letter word must satisfy the propositional approximation.
  std::vector<Letter> stem, loop;
  for (auto ti : w.pref) stem.push_back(bsa.letter_of(bsa.transitions[ti]));
  for (auto ti : w.rec) loop.push_back(bsa.letter_of(bsa.transitions[ti]));
  for (const auto& l : stem)
    if (!approx.universe.legal(l)) return fail("illegal stem letter");
  for (const auto& l : loop)
    if (!approx.universe.legal(l)) return fail("illegal loop letter");
  if (!ltl_lasso_check(*approx.store, approx.root, stem, loop))
    return fail("letter word violates the approximation");
  return true;
}

// ---------------------------------------------------------------------------
// Full pipeline: optional finitary reduction, propositional approximation,
// automaton construction, structural emptiness shortcut, dual search,
// witness validation.

struct CheckArtifacts {
  TslFormula effective;  // after the optional reduction
  LtlApproximation approx;
  Nba nba;
  Bsa bsa;
};

inline Verdict check(const TslFormula& formula, const RunConfig& cfg,
                     CheckArtifacts* artifacts = nullptr) {
  auto t0 = std::chrono::steady_clock::now();
  Verdict v;
  try {
    TslFormula eff = formula;
    if (cfg.mode == ApproxMode::General) eff = finitarize(formula);
    LtlApproximation approx = approximate(eff, ApproxMode::Finitary);
    Nba nba = cfg.nba_override ? *cfg.nba_override
                               : ltl_to_nba(*approx.store, approx.root, approx.universe.size(),
                                            cfg.tableau_node_cap);
    Stats pre;
    pre.nba_states = nba.num_states;
    bool empty = nba_structurally_empty(nba);
    pre.nba_structurally_empty = empty;
    if (empty && cfg.nba_empty_shortcut) {
      v.outcome = Outcome::Unsat;
      v.stats = pre;
      v.stats.wall_ms = static_cast<std::uint64_t>(
          std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
              .count());
      if (artifacts)
        *artifacts = CheckArtifacts{std::move(eff), std::move(approx), std::move(nba), Bsa{}};
      return v;
    }
    Nba trimmed = trim(nba);
    pre.nba_live_states = trimmed.num_states;
    // Quotient automaton for the model search and the reported witness;
    // total-valuation automaton for the exclusion search.
    Bsa bsa = nba_to_bsa(trimmed, approx.universe, eff.sig, cfg.letter_cap, false);
    Bsa full = nba_to_bsa(trimmed, approx.universe, eff.sig, cfg.letter_cap, true);
    pre.bsa_states = bsa.num_states;
    pre.bsa_transitions = bsa.transitions.size();
    pre.guards = bsa.guard_terms.size();
    {
      // Cycles confined to accepting states indicate the shapes on which the
      // search is known to terminate for eventually-style inputs; log only.
      auto adj = bsa_adjacency(bsa);
      std::vector<std::vector<std::uint32_t>> restricted(adj.size());
      for (std::uint32_t q = 0; q < adj.size(); ++q)
        if (!bsa.accepting[q])
          for (auto d : adj[q])
            if (!bsa.accepting[d]) restricted[q].push_back(d);
      std::vector<std::uint8_t> all(adj.size(), 1);
      auto live = live_states(restricted, all);
      bool cyc = false;
      for (auto l : live) cyc = cyc || l;
      pre.every_cycle_accepting = !cyc;
    }

    Engine engine(bsa, full, cfg);
    engine.stats() = pre;
    v = engine.run();
    if (v.outcome == Outcome::Sat) {
      std::string why;
      if (!witness_validate(*v.witness, bsa, approx, &why))
        throw Error("witness failed validation: " + why);
    }
    if (v.outcome == Outcome::Unknown && empty && !cfg.nba_empty_shortcut)
      v.reason = UnknownReason::NbaEmptyShortcutDisabled;
    if (artifacts)
      *artifacts =
          CheckArtifacts{std::move(eff), std::move(approx), std::move(nba), std::move(bsa)};
    return v;
  } catch (const CapError& e) {
    v.outcome = Outcome::Unknown;
    v.reason = UnknownReason::Cap;
    v.detail = e.what();
    v.stats.wall_ms = static_cast<std::uint64_t>(
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count());
    return v;
  }
}

}  // namespace tslsat
