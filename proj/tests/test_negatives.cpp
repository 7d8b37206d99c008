#include <doctest.h>

#include <set>

#include "fixtures.hpp"
#include "phrasecritic/errors.hpp"
#include "phrasecritic/negatives.hpp"
#include "phrasecritic/rng.hpp"

using namespace phrasecritic;
using fixtures::words;

namespace {

bool region_has(const Region& r, const std::vector<std::string>& adjectives, const Taxonomy& t) {
  for (const auto& a : adjectives) {
    const LexEntry* e = t.lookup(a);
    if (r.attributes[static_cast<size_t>(attribute_slot(e->category))] != e->index) return false;
  }
  return true;
}

bool oracle_true(const std::string& noun, const std::vector<std::string>& adjectives,
                 const Scene& s, const Taxonomy& t) {
  int part = t.lookup(noun)->part;
  for (const auto& r : s.regions) {
    if (r.part == part && region_has(r, adjectives, t)) return true;
  }
  return false;
}

// Replacement sentences for one phrase, each differing in one position.
std::vector<std::pair<int, std::string>> oracle_flips(const AttributePhrase& p, const Taxonomy& t,
                                                      const Scene* scene) {
  std::vector<std::pair<int, std::string>> out;
  for (size_t i = 0; i < p.adjectives.size(); ++i) {
    for (const auto& tok : t.tokens(t.lookup(p.adjectives[i])->category)) {
      if (tok != p.adjectives[i]) out.emplace_back(p.adjective_positions[i], tok);
    }
  }
  for (const auto& part : t.parts) {
    if (t.lookup(part)->part == t.lookup(p.noun)->part) continue;
    if (scene != nullptr && oracle_true(part, p.adjectives, *scene, t)) continue;
    out.emplace_back(p.noun_position, part);
  }
  return out;
}

// Every distinct sentence reachable by flipping one token in each of 1 or 2
// phrases, keeping one phrase intact when there are several.
std::set<std::vector<std::string>> oracle_space(const std::vector<std::string>& s, const Taxonomy& t,
                                                const Scene* scene) {
  auto phrases = extract_phrases(s, t);
  std::vector<std::vector<std::pair<int, std::string>>> opts;
  for (const auto& p : phrases) {
    auto f = oracle_flips(p, t, scene);
    if (!f.empty()) opts.push_back(f);
  }
  const int total = static_cast<int>(phrases.size());
  const int cap = std::min<int>({2, static_cast<int>(opts.size()), total > 1 ? total - 1 : 1});
  std::set<std::vector<std::string>> out;
  for (size_t i = 0; i < opts.size(); ++i) {
    for (const auto& [pos, tok] : opts[i]) {
      auto one = s;
      one[static_cast<size_t>(pos)] = tok;
      out.insert(one);
      if (cap < 2) continue;
      for (size_t j = i + 1; j < opts.size(); ++j) {
        for (const auto& [pos2, tok2] : opts[j]) {
          auto two = one;
          two[static_cast<size_t>(pos2)] = tok2;
          out.insert(two);
        }
      }
    }
  }
  return out;
}

AttributePhrase single(const std::string& text, const Taxonomy& t) {
  auto p = extract_phrases(words(text), t);
  REQUIRE(p.size() == 1);
  return p[0];
}

}  // namespace

TEST_CASE("worked-example flips are in the flip set and flips change the phrase") {
  const Taxonomy& t = fixtures::taxonomy();
  auto has = [](const std::vector<Flip>& fs, const std::string& to) {
    return std::any_of(fs.begin(), fs.end(), [&](const Flip& f) { return f.replacement == to; });
  };
  CHECK(has(phrase_flips(single("yellow belly", t), t), "beak"));
  CHECK(has(phrase_flips(single("red head", t), t), "black"));
  AttributePhrase p = single("red head", t);
  std::set<std::string> seen;
  for (std::uint64_t s = 0; s < 300; ++s) {
    AttributePhrase f = flip_phrase(p, t, s);
    CHECK_FALSE(f.same_content(p));
    int changed = (f.noun != p.noun) + (f.adjectives != p.adjectives);
    CHECK(changed == 1);
    if (f.noun != p.noun) {
      CHECK(t.lookup(f.noun)->category == Category::Part);
    } else {
      CHECK(t.lookup(f.adjectives[0])->category == Category::Color);
    }
    seen.insert(phrase_to_text(f));
  }
  // 7 other colors plus 7 other parts, drawn uniformly.
  CHECK(seen.size() == 14);
}

TEST_CASE("a phrase without a valid flip is an error") {
  TaxonomyConfig c;
  c.parts = 1;
  Taxonomy t = build_taxonomy(c, 1);
  AttributePhrase bare;
  bare.noun = "beak";
  CHECK_THROWS_AS(flip_phrase(bare, t, 1), InputError);
  CHECK_THROWS_AS(make_negatives(words("this is a bird"), t, 3, 1), InputError);
}

TEST_CASE("k = 10 over a three-phrase sentence gives 10 distinct negatives") {
  const Taxonomy& t = fixtures::taxonomy();
  auto s = words("this red bird has a red beak and a black face");
  auto negs = make_negatives(s, t, 10, 4);
  REQUIRE(negs.size() == 10);
  std::set<std::vector<std::string>> distinct;
  for (const auto& n : negs) {
    distinct.insert(n.tokens);
    CHECK(n.tokens != s);
    CHECK(extract_phrases(n.tokens, t).size() == 3);
    CHECK(!n.flips.empty());
    CHECK(n.flips.size() <= 2);
  }
  CHECK(distinct.size() == 10);
}

TEST_CASE("an exhausted space returns what exists") {
  TaxonomyConfig c;
  c.colors = 2;
  c.parts = 1;
  Taxonomy t = build_taxonomy(c, 1);
  auto negs = make_negatives(words("a red beak"), t, 10, 1);
  REQUIRE(negs.size() == 1);
  CHECK(join_tokens(negs[0].tokens) == "a black beak");
}

TEST_CASE("negatives match a brute-force enumeration of the flip space") {
  const Dataset& d = fixtures::small_dataset();
  const Taxonomy& t = d.taxonomy;
  int checked = 0;
  for (const auto& r : d.sentences) {
    if (r.sentence.foil) continue;
    const Scene& scene = d.scenes[static_cast<size_t>(r.scene_id)];
    for (const Scene* sp : {static_cast<const Scene*>(nullptr), &scene}) {
      auto space = oracle_space(r.sentence.tokens, t, sp);
      CHECK(negative_space(r.sentence.tokens, t, sp) == space.size());
      for (int k : {1, 10, 40}) {
        auto negs = make_negatives(r.sentence.tokens, t, k, static_cast<std::uint64_t>(checked), sp);
        CHECK(negs.size() == std::min<size_t>(static_cast<size_t>(k), space.size()));
        std::set<std::vector<std::string>> distinct;
        for (const auto& n : negs) {
          CHECK(space.count(n.tokens) == 1);
          distinct.insert(n.tokens);
          for (const auto& f : n.flips) {
            const LexEntry* a = t.lookup(f.original);
            const LexEntry* b = t.lookup(f.replacement);
            CHECK(a->category == b->category);
            CHECK(f.original != f.replacement);
            CHECK(r.sentence.tokens[static_cast<size_t>(f.position)] == f.original);
            CHECK(n.tokens[static_cast<size_t>(f.position)] == f.replacement);
          }
        }
        CHECK(distinct.size() == negs.size());
      }
    }
    if (++checked == 300) break;
  }
}

TEST_CASE("rank pairs: counts, truth, hardness and determinism") {
  const Dataset& d = fixtures::small_dataset();
  const Taxonomy& t = d.taxonomy;
  auto pairs = build_rank_pairs(d, 10, 5);
  CHECK(pairs.size() == d.scenes.size() * 10);
  CHECK(pairs == build_rank_pairs(d, 10, 5));
  for (const auto& p : pairs) {
    const Scene& s = d.scenes[static_cast<size_t>(p.scene_id)];
    CHECK(p.split == s.split);
    CHECK(p.positive == d.sentences[static_cast<size_t>(p.sentence)].sentence.tokens);
    auto pos = extract_phrases(p.positive, t);
    auto neg = extract_phrases(p.negative, t);
    REQUIRE(pos.size() == neg.size());
    int false_phrases = 0;
    for (const auto& ph : pos) CHECK(oracle_true(ph.noun, ph.adjectives, s, t));
    for (const auto& ph : neg) false_phrases += !oracle_true(ph.noun, ph.adjectives, s, t);
    CHECK(false_phrases >= 1);
    if (p.flips.size() == 1 && pos.size() >= 2) CHECK(false_phrases < static_cast<int>(neg.size()));
  }
}
