#pragma once

// Independent reference implementations used to cross-check the library.
// They trade speed for obviousness and share no code with src/.

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

namespace oracle {

using Triple = std::tuple<std::string, std::string, std::string>;
using TripleSet = std::set<Triple>;

struct Turn {
  TripleSet pred;
  TripleSet gold;
};

inline TripleSet drop_none(const TripleSet& s) {
  TripleSet out;
  for (const auto& t : s) {
    if (std::get<2>(t) != "NONE") out.insert(t);
  }
  return out;
}

inline double jga(const std::vector<Turn>& turns) {
  int hit = 0;
  for (const auto& t : turns) hit += drop_none(t.pred) == drop_none(t.gold) ? 1 : 0;
  return static_cast<double>(hit) / static_cast<double>(turns.size());
}

struct Prf {
  double p, r, f;
};

inline Prf slot_f1(const std::vector<Turn>& turns) {
  long tp = 0, n_pred = 0, n_gold = 0;
  for (const auto& t : turns) {
    const auto pred = drop_none(t.pred);
    const auto gold = drop_none(t.gold);
    std::vector<Triple> both;
    std::set_intersection(pred.begin(), pred.end(), gold.begin(), gold.end(), std::back_inserter(both));
    tp += static_cast<long>(both.size());
    n_pred += static_cast<long>(pred.size());
    n_gold += static_cast<long>(gold.size());
  }
  if (n_pred == 0 && n_gold == 0) return {1, 1, 1};
  const double p = n_pred ? double(tp) / double(n_pred) : 0.0;
  const double r = n_gold ? double(tp) / double(n_gold) : 0.0;
  const double f = p + r > 0 ? 2 * p * r / (p + r) : 0.0;
  return {p, r, f};
}

// Gold-keyed: every (domain, slot) in gold, correct when pred has the same value for it.
inline double slot_accuracy(const std::vector<Turn>& turns) {
  long keys = 0, ok = 0;
  for (const auto& t : turns) {
    const auto pred = drop_none(t.pred);
    for (const auto& g : drop_none(t.gold)) {
      ++keys;
      ok += pred.count(g) ? 1 : 0;
    }
  }
  return keys ? double(ok) / double(keys) : -1.0;
}

// Pairwise concordance count over every positive/negative pair.
inline double auc(const std::vector<double>& s, const std::vector<bool>& y) {
  double num = 0.0;
  long pairs = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!y[i]) continue;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (y[j]) continue;
      ++pairs;
      num += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
    }
  }
  return num / double(pairs);
}

// Walk a ranking built by repeated selection of the largest remaining score
// (earliest index first on ties); average the precision at each hit.
inline double average_precision(const std::vector<double>& s, const std::vector<bool>& y) {
  std::vector<bool> used(s.size(), false);
  double sum = 0.0;
  int hits = 0;
  for (std::size_t rank = 1; rank <= s.size(); ++rank) {
    std::size_t best = s.size();
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (!used[i] && (best == s.size() || s[i] > s[best])) best = i;
    }
    used[best] = true;
    if (y[best]) {
      ++hits;
      sum += double(hits) / double(rank);
    }
  }
  return sum / hits;
}

inline std::string lower(std::string s) {
  for (auto& ch : s) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return s;
}

inline bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

// Denylist entries that occur in `text` as whole words, case-insensitively.
inline std::vector<std::string> denylist_hits(const std::string& text, const std::vector<std::string>& denylist) {
  const std::string hay = lower(text);
  std::vector<std::string> hits;
  for (const auto& entry : denylist) {
    const std::string needle = lower(entry);
    for (std::size_t pos = hay.find(needle); pos != std::string::npos; pos = hay.find(needle, pos + 1)) {
      const bool left = pos == 0 || !is_word_char(hay[pos - 1]);
      const std::size_t end = pos + needle.size();
      const bool right = end >= hay.size() || !is_word_char(hay[end]);
      if (left && right) {
        hits.push_back(entry);
        break;
      }
    }
  }
  return hits;
}

inline std::vector<std::string> read_lines(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] != '#') out.push_back(line);
  }
  return out;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// Small random turn sets over a tiny vocabulary so collisions are frequent.
struct TurnGen {
  std::mt19937_64 eng;
  explicit TurnGen(std::uint64_t seed) : eng(seed) {}

  int pick(int n) { return static_cast<int>(eng() % static_cast<std::uint64_t>(n)); }

  TripleSet state(int max_triples) {
    static const char* domains[] = {"hotel", "restaurant", "taxi"};
    static const char* slots[] = {"area", "food", "stars", "day"};
    static const char* values[] = {"east", "west", "4", "NONE", "cheap"};
    TripleSet s;
    std::set<std::pair<std::string, std::string>> keys;
    const int n = pick(max_triples + 1);
    for (int k = 0; k < n; ++k) {
      std::string d = domains[pick(3)], sl = slots[pick(4)];
      if (!keys.insert({d, sl}).second) continue;  // one value per key
      s.insert({d, sl, values[pick(5)]});
    }
    return s;
  }

  std::vector<Turn> turns(int n_turns, int max_triples) {
    std::vector<Turn> out;
    for (int t = 0; t < n_turns; ++t) {
      Turn turn{state(max_triples), state(max_triples)};
      // Bias toward overlap: copy some gold triples into pred.
      for (const auto& g : turn.gold) {
        if (pick(2) == 0) {
          std::erase_if(turn.pred, [&](const Triple& p) {
            return std::get<0>(p) == std::get<0>(g) && std::get<1>(p) == std::get<1>(g);
          });
          turn.pred.insert(g);
        }
      }
      out.push_back(std::move(turn));
    }
    return out;
  }
};

}  // namespace oracle
