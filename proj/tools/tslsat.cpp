// Command-line front end: check satisfiability/validity, generate benchmark
// formulas, encode GOTO programs, and run the corpus.
//
// Exit codes for `check`: 0 = SAT (or VALID with --validity), 1 = UNSAT (or
// NOT VALID), 2 = UNKNOWN, 3 = input error.
#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <iostream>

#include "tslsat/engine.hpp"
#include "tslsat/generators.hpp"
#include "tslsat/hoa.hpp"

namespace {

using nlohmann::json;
using namespace tslsat;

std::string read_input(const std::string& path) {
  if (path.empty() || path == "-") {
    std::ostringstream ss;
    ss << std::cin.rdbuf();
    return ss.str();
  }
  std::ifstream in(path);
  if (!in) throw Error("cannot read file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct CheckOptions {
  std::string file;
  std::string mode = "finitary";
  double timeout = 300.0;
  int workers = 1;
  bool deterministic = false;
  bool json_out = false;
  bool validity = false;
  bool no_shortcut = false;
  std::string nba_from, smt_dump, solver;
  std::size_t letter_cap = 4096;
  std::size_t block_budget = 5'000'000;
  std::size_t query_budget = 1'000'000;
  std::size_t visit_budget = 0;
};

void add_run_flags(CLI::App* cmd, CheckOptions& o) {
  cmd->add_option("--mode", o.mode, "Satisfiability mode: finitary or general")
      ->check(CLI::IsMember({"finitary", "general"}));
  cmd->add_option("--timeout", o.timeout, "Wall-clock budget in seconds")->check(CLI::PositiveNumber);
  cmd->add_option("--workers", o.workers, "Worker threads (1 or 2)")->check(CLI::Range(1, 2));
  cmd->add_flag("--deterministic", o.deterministic,
                "Single-worker fixed interleaving (implied by --workers 1)");
  cmd->add_flag("--json", o.json_out, "Emit a JSON report");
  cmd->add_option("--smt-dump", o.smt_dump, "Directory for per-query SMT-LIB dumps");
  cmd->add_option("--solver", o.solver, "External SMT solver command for differential checking");
  cmd->add_option("--letter-cap", o.letter_cap, "Per-edge explicit-letter cap");
  cmd->add_option("--block-budget", o.block_budget, "Total block allocation budget");
  cmd->add_option("--query-budget", o.query_budget, "Per-query term budget");
  cmd->add_option("--visit-budget", o.visit_budget,
                  "Model-search visit budget, 0 = unbounded (use for run-to-run comparisons)");
  cmd->add_flag("--no-nba-empty-shortcut", o.no_shortcut,
                "Disable the structural-emptiness shortcut (diagnostic)");
}

RunConfig to_config(const CheckOptions& o) {
  RunConfig cfg;
  cfg.mode = o.mode == "general" ? ApproxMode::General : ApproxMode::Finitary;
  cfg.timeout_seconds = o.timeout;
  cfg.workers = o.deterministic ? 1 : o.workers;
  cfg.letter_cap = o.letter_cap;
  cfg.block_budget = o.block_budget;
  cfg.query_term_budget = o.query_budget;
  cfg.search_visit_budget = o.visit_budget;
  cfg.nba_empty_shortcut = !o.no_shortcut;
  cfg.solver_cmd = o.solver;
  cfg.smt_dump_dir = o.smt_dump;
  return cfg;
}

const char* outcome_name(Outcome o, bool validity) {
  switch (o) {
    case Outcome::Sat:
      return validity ? "NOT VALID" : "SAT";
    case Outcome::Unsat:
      return validity ? "VALID" : "UNSAT";
    default:
      return "UNKNOWN";
  }
}

const char* reason_name(UnknownReason r) {
  switch (r) {
    case UnknownReason::Timeout:
      return "timeout";
    case UnknownReason::Cap:
      return "cap";
    case UnknownReason::NbaEmptyShortcutDisabled:
      return "nba-empty-shortcut-disabled";
    default:
      return "";
  }
}

std::string transition_text(const Bsa& bsa, std::uint32_t ti) {
  const BsaTransition& t = bsa.transitions[ti];
  std::string s = std::to_string(t.src) + " -[";
  bool first = true;
  for (auto [g, v] : t.guards) {
    if (!first) s += ' ';
    s += term_to_string(bsa.guard_terms[g]);
    s += v ? "=1" : "=0";
    first = false;
  }
  s += " | ";
  for (std::uint32_t c = 0; c < bsa.updates_size(); ++c) {
    if (c) s += ' ';
    s += bsa.sig->cells()[c] + "<-" + term_to_string(t.updates[c]);
  }
  s += "]-> " + std::to_string(t.dst);
  return s;
}

json stats_json(const Stats& s) {
  return json{{"nba_states", s.nba_states},
              {"nba_live_states", s.nba_live_states},
              {"bsa_states", s.bsa_states},
              {"bsa_transitions", s.bsa_transitions},
              {"guards", s.guards},
              {"blocks_expanded", s.blocks_expanded},
              {"blocks_allocated", s.blocks_allocated},
              {"exclusions", s.exclusions},
              {"euf_queries", s.euf_queries},
              {"viability_checks", s.viability_checks},
              {"viability_cache_hits", s.viability_cache_hits},
              {"nba_structurally_empty", s.nba_structurally_empty},
              {"every_cycle_accepting", s.every_cycle_accepting},
              {"wall_ms", s.wall_ms}};
}

json verdict_json(const Verdict& v, const CheckArtifacts& art, bool validity,
                  const std::string& checksum) {
  json out;
  out["outcome"] = outcome_name(v.outcome, validity);
  if (v.outcome == Outcome::Unknown) {
    out["reason"] = reason_name(v.reason);
    if (!v.detail.empty()) out["detail"] = v.detail;
  }
  if (!checksum.empty()) out["nba_checksum"] = checksum;
  if (v.witness) {
    const Witness& w = *v.witness;
    json jw;
    jw["pref"] = w.pref;
    jw["rec"] = w.rec;
    json pref_text = json::array(), rec_text = json::array();
    for (auto ti : w.pref) pref_text.push_back(transition_text(art.bsa, ti));
    for (auto ti : w.rec) rec_text.push_back(transition_text(art.bsa, ti));
    jw["pref_text"] = pref_text;
    jw["rec_text"] = rec_text;
    json preds = json::array();
    for (const auto& [t, val] : w.query.predicates)
      preds.push_back(json{{"term", term_to_string(t)}, {"value", val}});
    json eqs = json::array();
    for (const auto& [l, r] : w.query.equalities)
      eqs.push_back(json::array({term_to_string(l), term_to_string(r)}));
    jw["query"] = json{{"predicates", preds}, {"equalities", eqs}};
    json classes = json::array();
    for (const auto& cls : w.model_classes) {
      json c = json::array();
      for (TermId t : cls) c.push_back(term_to_string(t));
      classes.push_back(c);
    }
    jw["model"] = json{{"classes", classes}};
    out["witness"] = jw;
  }
  out["stats"] = stats_json(v.stats);
  return out;
}

void print_text(const Verdict& v, const CheckArtifacts& art, bool validity,
                const std::string& checksum) {
  std::cout << outcome_name(v.outcome, validity) << "\n";
  if (v.outcome == Outcome::Unknown) {
    std::cout << "reason: " << reason_name(v.reason);
    if (!v.detail.empty()) std::cout << " (" << v.detail << ")";
    std::cout << "\n";
  }
  if (!checksum.empty()) std::cout << "nba checksum: " << checksum << "\n";
  if (v.witness) {
    const Witness& w = *v.witness;
    std::cout << "witness:\n  pref:\n";
    for (auto ti : w.pref) std::cout << "    " << transition_text(art.bsa, ti) << "\n";
    std::cout << "  rec:\n";
    for (auto ti : w.rec) std::cout << "    " << transition_text(art.bsa, ti) << "\n";
    std::cout << "  query:\n";
    for (const auto& [t, val] : w.query.predicates)
      std::cout << "    " << term_to_string(t) << " = " << (val ? "true" : "false") << "\n";
    for (const auto& [l, r] : w.query.equalities)
      std::cout << "    " << term_to_string(l) << " == " << term_to_string(r) << "\n";
    std::cout << "  model classes:\n";
    for (const auto& cls : w.model_classes) {
      std::cout << "    {";
      for (std::size_t i = 0; i < cls.size(); ++i)
        std::cout << (i ? ", " : "") << term_to_string(cls[i]);
      std::cout << "}\n";
    }
  }
  const Stats& s = v.stats;
  std::cout << "stats: nba=" << s.nba_states << "/" << s.nba_live_states
            << " bsa=" << s.bsa_states << "s/" << s.bsa_transitions
            << "t blocks=" << s.blocks_expanded << "/" << s.blocks_allocated
            << " exclusions=" << s.exclusions << " queries=" << s.euf_queries
            << " every_cycle_accepting=" << (s.every_cycle_accepting ? 1 : 0)
            << " wall_ms=" << s.wall_ms << "\n";
}

int exit_code(Outcome o) {
  switch (o) {
    case Outcome::Sat:
      return 0;
    case Outcome::Unsat:
      return 1;
    default:
      return 2;
  }
}

int run_check(const CheckOptions& opts) {
  TslFormula formula = parse_formula(read_input(opts.file));
  if (opts.validity) {
    // Validity by duality: the formula is valid iff its negation has no model.
    formula.root = f_not(formula.root);
  }
  RunConfig cfg = to_config(opts);

  // An imported automaton must speak the universe of the effective formula.
  std::optional<Nba> imported;
  std::string checksum;
  if (!opts.nba_from.empty()) {
    TslFormula eff = cfg.mode == ApproxMode::General ? finitarize(formula) : formula;
    LtlApproximation approx = approximate(eff, ApproxMode::Finitary);
    imported = hoa_import(read_input(opts.nba_from), approx.universe, *approx.sig);
    checksum = nba_checksum(*imported);
    cfg.nba_override = &*imported;
    cfg.nba_checksum = checksum;
  }

  CheckArtifacts art;
  Verdict v = check(formula, cfg, &art);
  if (opts.json_out)
    std::cout << verdict_json(v, art, opts.validity, checksum).dump(2) << "\n";
  else
    print_text(v, art, opts.validity, checksum);
  return exit_code(v.outcome);
}

std::uint64_t default_seed() {
  if (const char* env = std::getenv("TSLSAT_SEED")) return std::strtoull(env, nullptr, 10);
  return 0;
}

int run_bench(const CheckOptions& opts, const std::string& dir, bool allow_timeout) {
  auto corpus = load_corpus(dir);
  int mismatches = 0;
  for (const auto& entry : corpus) {
    RunConfig cfg = to_config(opts);
    CheckArtifacts art;
    Verdict v = check(entry.formula, cfg, &art);
    std::string got = outcome_name(v.outcome, false);
    bool ok = entry.expect == "UNKNOWN" || got == entry.expect ||
              (allow_timeout && v.outcome == Outcome::Unknown);
    if (!ok) ++mismatches;
    if (opts.json_out) {
      json row{{"name", entry.name}, {"expect", entry.expect}, {"got", got},
               {"ok", ok},           {"stats", stats_json(v.stats)}};
      std::cout << row.dump() << "\n";
    } else {
      std::ostringstream line;
      line << entry.name;
      for (std::size_t i = entry.name.size(); i < 28; ++i) line << ' ';
      line << " expect=" << entry.expect << " got=" << got << (ok ? "" : "  MISMATCH")
           << "  wall_ms=" << v.stats.wall_ms;
      std::cout << line.str() << "\n";
    }
  }
  if (!opts.json_out)
    std::cout << (mismatches == 0 ? "all verdicts match" : "verdict mismatches present") << "\n";
  return mismatches == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Satisfiability checker for temporal stream formulas modulo uninterpreted functions"};
  app.require_subcommand(1);

  CheckOptions check_opts;
  CLI::App* c_check = app.add_subcommand("check", "Decide satisfiability of a formula");
  c_check->add_option("file", check_opts.file, "Formula file ('-' or absent for stdin)");
  add_run_flags(c_check, check_opts);
  c_check->add_flag("--validity", check_opts.validity, "Decide validity via duality");
  c_check->add_option("--nba-from", check_opts.nba_from,
                      "Import the automaton from an HOA file instead of building it");

  CLI::App* c_gen = app.add_subcommand("gen", "Generate benchmark formulas");
  c_gen->require_subcommand(1);
  std::uint64_t scal_n = 0;
  CLI::App* g_sat = c_gen->add_subcommand("scal-sat", "Satisfiable scalability family");
  g_sat->add_option("n", scal_n, "Family parameter")->required();
  CLI::App* g_unsat = c_gen->add_subcommand("scal-unsat", "Unsatisfiable scalability family");
  g_unsat->add_option("n", scal_n, "Family parameter (>= 1)")->required();
  RandomSpec rspec;
  rspec.seed = default_seed();
  std::uint32_t rcount = 1;
  CLI::App* g_rand = c_gen->add_subcommand("random", "Seeded random formulas");
  g_rand->add_option("--seed", rspec.seed, "RNG seed (default: TSLSAT_SEED or 0)");
  g_rand->add_option("--size", rspec.tree_size, "Skeleton node count")->check(CLI::PositiveNumber);
  g_rand->add_option("--cells", rspec.cell_count, "Cell count")->check(CLI::Range(1, 3));
  g_rand->add_option("--updates", rspec.update_count, "Update pool size")->check(CLI::Range(1, 3));
  g_rand->add_option("--preds", rspec.predicate_count, "Predicate pool size")
      ->check(CLI::Range(1, 3));
  g_rand->add_option("--count", rcount, "Number of formulas (seed increments per formula)")
      ->check(CLI::PositiveNumber);

  std::string goto_file, goto_theory = "tu";
  CLI::App* c_goto = app.add_subcommand("encode-goto", "Encode a GOTO program's halting problem");
  c_goto->add_option("file", goto_file, "Program file ('-' or absent for stdin)");
  c_goto->add_option("--theory", goto_theory, "Target theory: tu or te")
      ->check(CLI::IsMember({"tu", "te"}));

  CheckOptions bench_opts;
  std::string bench_dir;
  bool allow_timeout = false;
  CLI::App* c_bench = app.add_subcommand("bench", "Run a corpus directory");
  c_bench->add_option("dir", bench_dir, "Corpus directory")->required();
  add_run_flags(c_bench, bench_opts);
  c_bench->add_flag("--allow-timeout", allow_timeout, "Treat UNKNOWN results as soft failures");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 3;
  }

  try {
    if (c_check->parsed()) return run_check(check_opts);
    if (c_gen->parsed()) {
      if (g_sat->parsed()) {
        std::cout << formula_to_string(gen_scal_sat(scal_n)) << "\n";
      } else if (g_unsat->parsed()) {
        std::cout << formula_to_string(gen_scal_unsat(scal_n)) << "\n";
      } else {
        for (std::uint32_t i = 0; i < rcount; ++i) {
          RandomSpec s = rspec;
          s.seed = rspec.seed + i;
          std::cout << formula_to_string(gen_random(s)) << "\n";
        }
      }
      return 0;
    }
    if (c_goto->parsed()) {
      GotoProgram prog = desugar_goto(read_input(goto_file));
      GotoTheory th = goto_theory == "te" ? GotoTheory::TE : GotoTheory::TU;
      std::cout << formula_to_string(encode_goto(prog, th)) << "\n";
      return 0;
    }
    if (c_bench->parsed()) return run_bench(bench_opts, bench_dir, allow_timeout);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 3;
}
