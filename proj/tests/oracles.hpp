#pragma once

// Independent re-implementations used to check the library.

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "phrasecritic/explain.hpp"
#include "phrasecritic/foil.hpp"
#include "phrasecritic/pipeline.hpp"

namespace oracle {

using namespace phrasecritic;

inline bool region_has(const Region& r, const std::vector<std::string>& adjectives, const Taxonomy& t) {
  for (const auto& a : adjectives) {
    const LexEntry* e = t.lookup(a);
    if (e == nullptr || e->pos != Pos::Adj) return false;
    if (r.attributes[static_cast<size_t>(attribute_slot(e->category))] != e->index) return false;
  }
  return true;
}

inline bool phrase_true(const AttributePhrase& p, const Scene& s, const Taxonomy& t) {
  const LexEntry* n = t.lookup(p.noun);
  if (n == nullptr) return false;
  for (const auto& r : s.regions) {
    if (r.part == n->part && region_has(r, p.adjectives, t)) return true;
  }
  return false;
}

inline int match(const AttributePhrase& p, const Region& r, const Taxonomy& t) {
  int m = 0;
  for (const auto& a : p.adjectives) {
    const LexEntry* e = t.lookup(a);
    if (e != nullptr && e->pos == Pos::Adj &&
        r.attributes[static_cast<size_t>(attribute_slot(e->category))] == e->index) {
      ++m;
    }
  }
  const LexEntry* n = t.lookup(p.noun);
  if (n != nullptr && n->part == r.part) ++m;
  return m;
}

inline int ground_region(const AttributePhrase& p, const Scene& s, const Taxonomy& t) {
  int best = 0;
  for (size_t r = 1; r < s.regions.size(); ++r) {
    if (match(p, s.regions[r], t) > match(p, s.regions[static_cast<size_t>(best)], t)) best = static_cast<int>(r);
  }
  return best;
}

struct Selection {
  int index = 0;
  bool fallback = false;
};

// Discard S_f <= T, argmax S_r over the rest; argmax S_f when nothing survives.
inline Selection select(const std::vector<Candidate>& cands, const Scene& scene, const Dataset& d,
                        const CriticModel& m, double T) {
  SyntheticGrounder g(d.taxonomy, d.config.grounder);
  int best = -1;
  double best_s = 0.0;
  for (size_t i = 0; i < cands.size(); ++i) {
    if (cands[i].s_f <= T) continue;
    auto phrases = extract_phrases(cands[i].tokens, d.taxonomy);
    if (phrases.empty()) continue;
    double s = score(make_steps(ground_all(phrases, scene, g), m), m);
    if (best < 0 || s > best_s) {
      best = static_cast<int>(i);
      best_s = s;
    }
  }
  if (best >= 0) return {best, false};
  int arg = 0;
  for (size_t i = 1; i < cands.size(); ++i) {
    if (cands[i].s_f > cands[static_cast<size_t>(arg)].s_f) arg = static_cast<int>(i);
  }
  return {arg, true};
}

inline bool is_content(const std::string& w, const Taxonomy& t) {
  const LexEntry* e = t.lookup(w);
  return e != nullptr && (e->pos == Pos::Adj || e->pos == Pos::Noun);
}

// Position whose deletion raises the score most, smallest index on ties.
inline int detect(const std::vector<std::string>& tokens, const Taxonomy& t, const SentenceScorer& f) {
  double base = f(tokens);
  int best = -1;
  double gain = -std::numeric_limits<double>::infinity();
  for (size_t j = 0; j < tokens.size(); ++j) {
    if (!is_content(tokens[j], t)) continue;
    auto cut = tokens;
    cut.erase(cut.begin() + static_cast<long>(j));
    double g = f(cut) - base;
    if (g > gain) {
      gain = g;
      best = static_cast<int>(j);
    }
  }
  return best;
}

// Best-scoring substitute, lexicographically smallest on ties.
inline std::string correct(std::vector<std::string> tokens, int index,
                           const std::vector<std::string>& targets, const SentenceScorer& f) {
  std::string best;
  double top = -std::numeric_limits<double>::infinity();
  for (const auto& w : targets) {
    tokens[static_cast<size_t>(index)] = w;
    double s = f(tokens);
    if (s > top || (s == top && w < best)) {
      top = s;
      best = w;
    }
  }
  return best;
}

inline bool inside(const Box& b, const Point& p) {
  return p.x >= b.x && p.x <= b.x + b.w && p.y >= b.y && p.y <= b.y + b.h;
}

inline double center_distance(const Box& b, const Point& p) {
  double cx = b.x + b.w / 2.0;
  double cy = b.y + b.h / 2.0;
  return std::sqrt((p.x - cx) * (p.x - cx) + (p.y - cy) * (p.y - cy));
}

}  // namespace oracle
