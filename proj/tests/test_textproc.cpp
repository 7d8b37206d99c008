#include <doctest.h>

#include <set>

#include "fixtures.hpp"
#include "phrasecritic/errors.hpp"
#include "phrasecritic/rng.hpp"
#include "phrasecritic/textproc.hpp"

using namespace phrasecritic;
using fixtures::words;

namespace {

std::vector<std::string> texts(const std::vector<AttributePhrase>& phrases) {
  std::vector<std::string> out;
  for (const auto& p : phrases) out.push_back(phrase_to_text(p));
  return out;
}

}  // namespace

TEST_CASE("taxonomy counts follow the configuration") {
  TaxonomyConfig c;
  Taxonomy t = build_taxonomy(c, 1);
  CHECK(t.category_size(Category::Color) == 8);
  CHECK(t.category_size(Category::Size) == 4);
  CHECK(t.category_size(Category::Pattern) == 4);
  CHECK(t.num_parts() == 8);
  CHECK(t.attribute_dim() == 8 + 4 + 4 + 8);
  CHECK(t.kappa.size() == 8);
  for (double k : t.kappa) {
    CHECK(k >= 0.3);
    CHECK(k <= 3.0);
  }
}

TEST_CASE("a singleton category is rejected") {
  TaxonomyConfig c;
  c.colors = 1;
  CHECK_THROWS_AS(build_taxonomy(c, 1), ConfigError);
  c.colors = 8;
  c.patterns = 1;
  CHECK_THROWS_AS(build_taxonomy(c, 1), ConfigError);
}

TEST_CASE("taxonomy is deterministic per seed") {
  CHECK(build_taxonomy({}, 9) == build_taxonomy({}, 9));
  CHECK(build_taxonomy({}, 9).kappa != build_taxonomy({}, 10).kappa);
}

TEST_CASE("lexicon tags every token and keeps attribute tokens unique") {
  const Taxonomy& t = fixtures::taxonomy();
  std::set<std::string> seen;
  for (Category c : kAttributeCategories) {
    for (const auto& tok : t.tokens(c)) {
      CHECK(seen.insert(tok).second);
      const LexEntry* e = t.lookup(tok);
      REQUIRE(e != nullptr);
      CHECK(e->pos == Pos::Adj);
      CHECK(e->category == c);
    }
  }
  for (const auto& p : t.parts) {
    REQUIRE(t.lookup(p) != nullptr);
    CHECK(t.lookup(p)->pos == Pos::Noun);
  }
  for (const char* w : {"is", "are", "with", "this", "a", "and", "bird"}) {
    CHECK_MESSAGE(t.lookup(w) != nullptr, w);
  }
}

TEST_CASE("tokenize lowercases and drops punctuation") {
  CHECK(tokenize("This is a Red bird.") == std::vector<std::string>{"this", "is", "a", "red", "bird"});
  CHECK(tokenize("").empty());
  CHECK(tokenize("red,  beak") == std::vector<std::string>{"red", "beak"});
}

TEST_CASE("pos_tag uses the lexicon") {
  const Taxonomy& t = fixtures::taxonomy();
  auto a = pos_tag(words("red beak"), t);
  REQUIRE(a.size() == 2);
  CHECK(a[0].pos == Pos::Adj);
  CHECK(a[0].category == Category::Color);
  CHECK(a[1].pos == Pos::Noun);
  CHECK(a[1].category == Category::Part);

  auto b = pos_tag(words("feathers are speckled"), t);
  REQUIRE(b.size() == 3);
  CHECK(b[0].pos == Pos::Noun);
  CHECK(b[1].pos == Pos::Verb);
  CHECK(b[2].pos == Pos::Adj);
  CHECK(b[2].category == Category::Pattern);

  auto c = pos_tag(words("qwerty"), t);
  REQUIRE(c.size() == 1);
  CHECK(c[0].pos == Pos::Other);
  CHECK(c[0].category == Category::None);
}

TEST_CASE("chunker extracts both phrase patterns in sentence order") {
  const Taxonomy& t = fixtures::taxonomy();
  CHECK(texts(extract_phrases(words("this red bird has a red beak and a black face"), t)) ==
        std::vector<std::string>{"red bird", "red beak", "black face"});

  auto speckled = extract_phrases(words("feathers are speckled"), t);
  REQUIRE(speckled.size() == 1);
  CHECK(speckled[0].adjectives == std::vector<std::string>{"speckled"});
  CHECK(speckled[0].noun == "feathers");

  CHECK(extract_phrases(words("this is a bird"), t).empty());

  auto ro = extract_phrases(words("red and orange head"), t);
  REQUIRE(ro.size() == 1);
  CHECK(ro[0].adjectives == std::vector<std::string>{"red", "orange"});
  CHECK(ro[0].noun == "head");
  CHECK(ro[0].span_begin == 0);
  CHECK(ro[0].span_end == 4);
}

TEST_CASE("phrase_to_text joins adjectives then noun") {
  AttributePhrase p;
  p.adjectives = {"red"};
  p.noun = "beak";
  CHECK(phrase_to_text(p) == "red beak");
  p.adjectives = {"speckled"};
  p.noun = "feathers";
  CHECK(phrase_to_text(p) == "speckled feathers");
}

TEST_CASE("chunking a phrase's text returns that phrase, also when concatenated") {
  const Taxonomy& t = fixtures::taxonomy();
  Rng rng = make_rng(5, {});
  std::vector<std::string> nouns = t.parts;
  for (const char* alias : {"bird", "feathers", "face", "bill", "wings"}) nouns.emplace_back(alias);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<AttributePhrase> made;
    std::vector<std::string> joined;
    const int count = 1 + uniform_index(rng, 3);
    for (int i = 0; i < count; ++i) {
      AttributePhrase p;
      for (Category c : kAttributeCategories) {
        if (uniform01(rng) < 0.5 || (c == Category::Pattern && p.adjectives.empty())) {
          const auto& list = t.tokens(c);
          p.adjectives.push_back(list[static_cast<size_t>(uniform_index(rng, static_cast<int>(list.size())))]);
        }
      }
      p.noun = nouns[static_cast<size_t>(uniform_index(rng, static_cast<int>(nouns.size())))];
      auto single = extract_phrases(tokenize(phrase_to_text(p)), t);
      REQUIRE(single.size() == 1);
      CHECK(single[0].same_content(p));
      made.push_back(p);
      for (const auto& tok : tokenize(phrase_to_text(p))) joined.push_back(tok);
    }
    auto all = extract_phrases(joined, t);
    REQUIRE(all.size() == made.size());
    for (size_t i = 0; i < made.size(); ++i) CHECK(all[i].same_content(made[i]));
  }
}

TEST_CASE("spans are ordered, disjoint and re-derive their phrase") {
  const Dataset& d = fixtures::small_dataset();
  for (const auto& r : d.sentences) {
    auto phrases = extract_phrases(r.sentence.tokens, d.taxonomy);
    int last_end = 0;
    for (const auto& p : phrases) {
      CHECK(p.span_begin >= last_end);
      CHECK(p.span_end > p.span_begin);
      CHECK(p.span_end <= static_cast<int>(r.sentence.tokens.size()));
      last_end = p.span_end;
      std::vector<std::string> inside(r.sentence.tokens.begin() + p.span_begin,
                                      r.sentence.tokens.begin() + p.span_end);
      auto again = extract_phrases(inside, d.taxonomy);
      REQUIRE(again.size() == 1);
      CHECK(again[0].same_content(p));
    }
    CHECK(extract_phrases(r.sentence.tokens, d.taxonomy) == phrases);
  }
}
