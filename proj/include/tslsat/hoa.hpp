// HOA v1 import/export for state-based Buchi automata, so an externally built
// automaton can replace the built-in tableau construction. Imported AP names
// must match the formula's universe exactly (any order); labels are expanded
// to DNF cubes, one edge per cube.
#pragma once

#include <cstdio>
#include <sstream>
#include <tuple>

#include "tslsat/nba.hpp"

namespace tslsat {

namespace detail {

struct HoaCube {
  std::set<std::uint32_t> pos, neg;
  bool contradictory() const {
    for (auto p : pos)
      if (neg.count(p)) return true;
    return false;
  }
};

// Label expression parser producing a DNF (list of cubes). Grammar:
//   disj := conj ('|' conj)* ; conj := unit ('&' unit)*
//   unit := '!' unit | '(' disj ')' | 't' | 'f' | INT
class LabelParser {
 public:
  LabelParser(std::string_view s, std::size_t line) : s_(s), line_(line) {}

  std::vector<HoaCube> parse() {
    auto r = disj(false);
    skip();
    if (pos_ != s_.size()) err("trailing input in label");
    return r;
  }

 private:
  [[noreturn]] void err(const std::string& msg) const {
    throw Error("hoa line " + std::to_string(line_) + ": " + msg);
  }
  void skip() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
  }
  bool eat(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  // `neg` pushes negation down: !(a|b) = !a & !b etc., so the result is
  // always a plain cube list.
  std::vector<HoaCube> disj(bool neg) {
    std::vector<HoaCube> acc = conj(neg);
    while (eat('|')) {
      auto rhs = conj(neg);
      if (neg)
        acc = cube_and(acc, rhs);  // negation turned | into &
      else
        acc.insert(acc.end(), rhs.begin(), rhs.end());
    }
    return acc;
  }

  std::vector<HoaCube> conj(bool neg) {
    std::vector<HoaCube> acc = unit(neg);
    while (true) {
      skip();
      if (pos_ < s_.size() && s_[pos_] == '&') {
        ++pos_;
        auto rhs = unit(neg);
        if (neg)
          acc.insert(acc.end(), rhs.begin(), rhs.end());
        else
          acc = cube_and(acc, rhs);
      } else {
        return acc;
      }
    }
  }

  std::vector<HoaCube> unit(bool neg) {
    skip();
    if (pos_ >= s_.size()) err("label ended unexpectedly");
    char c = s_[pos_];
    if (c == '!') {
      ++pos_;
      return unit(!neg);
    }
    if (c == '(') {
      ++pos_;
      auto r = disj(neg);
      if (!eat(')')) err("expected ')'");
      return r;
    }
    if (c == 't' || c == 'f') {
      ++pos_;
      bool truth = (c == 't') != neg;
      if (truth) return {HoaCube{}};  // one empty cube = true
      return {};                      // empty DNF = false
    }
    if (c >= '0' && c <= '9') {
      std::uint32_t v = 0;
      while (pos_ < s_.size() && s_[pos_] >= '0' && s_[pos_] <= '9')
        v = v * 10 + static_cast<std::uint32_t>(s_[pos_++] - '0');
      HoaCube cube;
      (neg ? cube.neg : cube.pos).insert(v);
      return {cube};
    }
    err(std::string("unexpected character '") + c + "' in label");
  }

  static std::vector<HoaCube> cube_and(const std::vector<HoaCube>& a,
                                       const std::vector<HoaCube>& b) {
    std::vector<HoaCube> out;
    for (const auto& x : a)
      for (const auto& y : b) {
        HoaCube c = x;
        c.pos.insert(y.pos.begin(), y.pos.end());
        c.neg.insert(y.neg.begin(), y.neg.end());
        if (!c.contradictory()) out.push_back(std::move(c));
      }
    return out;
  }

  std::string_view s_;
  std::size_t pos_ = 0, line_;
};

inline std::string hoa_unquote(const std::string& s, std::size_t line) {
  require(s.size() >= 2 && s.front() == '"' && s.back() == '"',
          ("hoa line " + std::to_string(line) + ": expected a quoted string").c_str());
  std::string out;
  for (std::size_t i = 1; i + 1 < s.size(); ++i) {
    if (s[i] == '\\' && i + 2 < s.size()) ++i;
    out.push_back(s[i]);
  }
  return out;
}

}  // namespace detail

// Parses an HOA v1 automaton with state-based Buchi acceptance ("Acceptance: 1
// Inf(0)"). AP names must be exactly the universe's names; the permutation is
// resolved here so edge indices follow universe order.
inline Nba hoa_import(const std::string& text, const ApUniverse& universe, const Signature& sig) {
  std::istringstream in(text);
  std::string word;
  std::size_t line_no = 0;
  std::vector<std::string> lines;
  {
    std::string l;
    while (std::getline(in, l)) lines.push_back(l);
  }

  Nba nba;
  nba.num_aps = universe.size();
  std::vector<std::uint32_t> ap_map;  // hoa index -> universe index
  std::vector<std::uint32_t> starts;
  bool saw_states = false, saw_acc = false, in_body = false, done = false;
  std::int64_t cur_state = -1;

  auto fail = [&](const std::string& msg) -> void {
    throw Error("hoa line " + std::to_string(line_no) + ": " + msg);
  };

  for (std::size_t li = 0; li < lines.size(); ++li) {
    line_no = li + 1;
    std::string raw = lines[li];
    // Strip comments and whitespace.
    if (auto c = raw.find("/*"); c != std::string::npos) {
      auto e = raw.find("*/", c);
      if (e == std::string::npos) fail("unterminated comment");
      raw = raw.substr(0, c) + raw.substr(e + 2);
    }
    std::size_t b = raw.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    std::size_t e = raw.find_last_not_of(" \t\r");
    std::string ln = raw.substr(b, e - b + 1);
    if (ln.empty()) continue;

    if (!in_body) {
      std::istringstream hs(ln);
      std::string key;
      hs >> key;
      if (key == "HOA:") {
        std::string v;
        hs >> v;
        if (v != "v1") fail("unsupported HOA version '" + v + "'");
      } else if (key == "States:") {
        std::uint64_t n;
        if (!(hs >> n)) fail("bad States header");
        nba.num_states = static_cast<std::uint32_t>(n);
        saw_states = true;
      } else if (key == "Start:") {
        std::uint32_t s;
        if (!(hs >> s)) fail("bad Start header");
        std::string rest;
        if (hs >> rest) fail("only one start state per Start header is supported");
        starts.push_back(s);
      } else if (key == "AP:") {
        std::uint64_t n;
        if (!(hs >> n)) fail("bad AP header");
        std::vector<std::string> names;
        std::string rest;
        std::getline(hs, rest);
        // Quoted names may contain spaces; split on quote boundaries.
        std::size_t p = 0;
        while (p < rest.size()) {
          while (p < rest.size() && rest[p] != '"') ++p;
          if (p >= rest.size()) break;
          std::size_t q = p + 1;
          while (q < rest.size() && rest[q] != '"') {
            if (rest[q] == '\\') ++q;
            ++q;
          }
          if (q >= rest.size()) fail("unterminated AP name");
          names.push_back(detail::hoa_unquote(rest.substr(p, q - p + 1), line_no));
          p = q + 1;
        }
        if (names.size() != n) fail("AP count does not match the name list");
        if (names.size() != universe.size()) fail("AP count does not match the formula universe");
        ap_map.resize(names.size());
        std::vector<bool> used(universe.size(), false);
        for (std::size_t i = 0; i < names.size(); ++i) {
          std::int32_t found = -1;
          for (std::uint32_t u = 0; u < universe.size(); ++u)
            if (!used[u] && universe.ap_name(u, sig) == names[i]) {
              found = static_cast<std::int32_t>(u);
              break;
            }
          if (found < 0) fail("AP \"" + names[i] + "\" is not in the formula universe");
          used[found] = true;
          ap_map[i] = static_cast<std::uint32_t>(found);
        }
      } else if (key == "Acceptance:") {
        std::string rest;
        std::getline(hs, rest);
        std::string squeezed;
        for (char c : rest)
          if (c != ' ' && c != '\t') squeezed.push_back(c);
        if (squeezed != "1Inf(0)") fail("only state-based Buchi acceptance '1 Inf(0)' is supported");
        saw_acc = true;
      } else if (key == "acc-name:" || key == "name:" || key == "tool:" || key == "properties:") {
        // informative only
      } else if (key == "--BODY--") {
        if (!saw_states) fail("missing States header");
        if (!saw_acc) fail("missing Acceptance header");
        nba.initial.assign(nba.num_states, 0);
        nba.accepting.assign(nba.num_states, 0);
        nba.edges.assign(nba.num_states, {});
        for (auto s : starts) {
          if (s >= nba.num_states) fail("start state out of range");
          nba.initial[s] = 1;
        }
        in_body = true;
      } else {
        fail("unsupported header '" + key + "'");
      }
      continue;
    }

    if (ln == "--END--") {
      done = true;
      break;
    }
    if (ln.rfind("State:", 0) == 0) {
      std::string rest = ln.substr(6);
      std::istringstream ss(rest);
      std::uint32_t s;
      if (!(ss >> s)) fail("bad State line");
      if (s >= nba.num_states) fail("state out of range");
      cur_state = s;
      std::string tail;
      std::getline(ss, tail);
      auto lb = tail.find('{');
      if (lb != std::string::npos) {
        auto rb = tail.find('}', lb);
        if (rb == std::string::npos) fail("unterminated acceptance set");
        std::istringstream as(tail.substr(lb + 1, rb - lb - 1));
        std::uint32_t a;
        while (as >> a) {
          if (a != 0) fail("acceptance set out of range");
          nba.accepting[s] = 1;
        }
      }
      continue;
    }
    if (ln[0] == '[') {
      if (cur_state < 0) fail("edge before any State line");
      auto rb = ln.find(']');
      if (rb == std::string::npos) fail("unterminated label");
      std::string label = ln.substr(1, rb - 1);
      std::istringstream ts(ln.substr(rb + 1));
      std::uint32_t dst;
      if (!(ts >> dst)) fail("edge missing destination");
      std::string extra;
      if (ts >> extra) {
        if (extra[0] == '{') fail("edge acceptance marks are not supported");
        fail("unexpected trailing tokens on edge");
      }
      if (dst >= nba.num_states) fail("destination out of range");
      auto cubes = detail::LabelParser(label, line_no).parse();
      for (const auto& cube : cubes) {
        NbaEdge edge;
        edge.dst = dst;
        for (auto p : cube.pos) {
          if (p >= ap_map.size()) fail("AP index out of range in label");
          edge.pos.push_back(ap_map[p]);
        }
        for (auto p : cube.neg) {
          if (p >= ap_map.size()) fail("AP index out of range in label");
          edge.neg.push_back(ap_map[p]);
        }
        std::sort(edge.pos.begin(), edge.pos.end());
        std::sort(edge.neg.begin(), edge.neg.end());
        nba.edges[static_cast<std::uint32_t>(cur_state)].push_back(std::move(edge));
      }
      continue;
    }
    fail("unsupported body line '" + ln + "'");
  }
  if (!done) fail("missing --END--");
  return nba;
}

inline std::string hoa_export(const Nba& nba, const ApUniverse& universe, const Signature& sig) {
  std::ostringstream out;
  out << "HOA: v1\n";
  out << "States: " << nba.num_states << "\n";
  for (std::uint32_t q = 0; q < nba.num_states; ++q)
    if (nba.initial[q]) out << "Start: " << q << "\n";
  out << "AP: " << universe.size();
  for (std::uint32_t i = 0; i < universe.size(); ++i) {
    std::string name = universe.ap_name(i, sig);
    std::string quoted;
    for (char c : name) {
      if (c == '"' || c == '\\') quoted.push_back('\\');
      quoted.push_back(c);
    }
    out << " \"" << quoted << "\"";
  }
  out << "\n";
  out << "acc-name: Buchi\n";
  out << "Acceptance: 1 Inf(0)\n";
  out << "--BODY--\n";
  for (std::uint32_t q = 0; q < nba.num_states; ++q) {
    out << "State: " << q;
    if (nba.accepting[q]) out << " {0}";
    out << "\n";
    for (const auto& e : nba.edges[q]) {
      out << "[";
      bool first = true;
      for (auto p : e.pos) {
        if (!first) out << " & ";
        out << p;
        first = false;
      }
      for (auto p : e.neg) {
        if (!first) out << " & ";
        out << "!" << p;
        first = false;
      }
      if (first) out << "t";
      out << "] " << e.dst << "\n";
    }
  }
  out << "--END--\n";
  return out.str();
}

// Structural fingerprint (FNV-1a over a canonical rendering), reported when an
// imported automaton replaces the built-in construction.
inline std::string nba_checksum(const Nba& nba) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&](std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xffu;
      h *= 1099511628211ull;
    }
  };
  mix(nba.num_states);
  mix(nba.num_aps);
  for (std::uint32_t q = 0; q < nba.num_states; ++q) {
    mix(nba.initial[q]);
    mix(nba.accepting[q]);
    auto sorted = nba.edges[q];
    std::sort(sorted.begin(), sorted.end(), [](const NbaEdge& a, const NbaEdge& b) {
      return std::tie(a.dst, a.pos, a.neg) < std::tie(b.dst, b.pos, b.neg);
    });
    for (const auto& e : sorted) {
      mix(e.dst);
      for (auto p : e.pos) mix(p * 2 + 1);
      for (auto p : e.neg) mix(p * 2);
      mix(0xabcdu);
    }
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace tslsat
