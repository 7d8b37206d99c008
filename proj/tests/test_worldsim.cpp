#include <doctest.h>

#include <cmath>
#include <set>

#include "fixtures.hpp"
#include "phrasecritic/errors.hpp"
#include "phrasecritic/io.hpp"
#include "phrasecritic/rng.hpp"
#include "phrasecritic/worldsim.hpp"

using namespace phrasecritic;

namespace {

int differing_assignments(const ClassProfile& a, const ClassProfile& b) {
  int n = 0;
  for (size_t p = 0; p < a.attributes.size(); ++p) {
    for (int k = 0; k < kNumAttributeCategories; ++k) {
      n += a.attributes[p][static_cast<size_t>(k)] != b.attributes[p][static_cast<size_t>(k)];
    }
  }
  return n;
}

bool inside_closed(const Box& b, const Point& p) {
  return b.x <= p.x && p.x <= b.x + b.w && b.y <= p.y && p.y <= b.y + b.h;
}

// Every phrase of a sentence names a region whose true attributes carry its adjectives.
bool all_true(const std::vector<std::string>& tokens, const Scene& scene, const Taxonomy& t) {
  for (const auto& p : extract_phrases(tokens, t)) {
    int part = t.lookup(p.noun)->part;
    const Region* r = nullptr;
    for (const auto& reg : scene.regions) {
      if (reg.part == part) r = &reg;
    }
    if (r == nullptr) return false;
    for (const auto& a : p.adjectives) {
      const LexEntry* e = t.lookup(a);
      if (t.tokens(e->category)[static_cast<size_t>(r->attributes[static_cast<size_t>(attribute_slot(e->category))])] != a) {
        return false;
      }
    }
  }
  return true;
}

}  // namespace

TEST_CASE("class profiles are pairwise at distance two or more") {
  const Taxonomy& t = fixtures::taxonomy();
  auto profiles = sample_class_profiles(t, 20, 4, 0.15);
  REQUIRE(profiles.size() == 20);
  for (size_t a = 0; a < profiles.size(); ++a) {
    CHECK(profiles[a].id == static_cast<int>(a));
    CHECK(profiles[a].attributes.size() == t.parts.size());
    for (size_t b = a + 1; b < profiles.size(); ++b) {
      CHECK(differing_assignments(profiles[a], profiles[b]) >= 2);
      CHECK(profile_distance(profiles[a], profiles[b]) == differing_assignments(profiles[a], profiles[b]));
    }
  }
}

TEST_CASE("profile sampling rejects a single class and an exhausted space") {
  const Taxonomy& t = fixtures::taxonomy();
  CHECK_THROWS_AS(sample_class_profiles(t, 1, 1), ConfigError);
  TaxonomyConfig tiny;
  tiny.colors = 2;
  tiny.sizes = 2;
  tiny.patterns = 2;
  tiny.parts = 1;
  Taxonomy small = build_taxonomy(tiny, 1);
  CHECK_THROWS_AS(sample_class_profiles(small, 20, 1), GenerationError);
}

TEST_CASE("different seeds give different profiles") {
  const Taxonomy& t = fixtures::taxonomy();
  int differ = 0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    auto a = sample_class_profiles(t, 5, s);
    auto b = sample_class_profiles(t, 5, s + 100);
    differ += a != b;
    CHECK(a == sample_class_profiles(t, 5, s));
  }
  CHECK(differ == 10);
}

TEST_CASE("noise-free scenes copy the profile") {
  const Taxonomy& t = fixtures::taxonomy();
  auto profiles = sample_class_profiles(t, 4, 2);
  for (std::uint64_t s = 0; s < 50; ++s) {
    Scene scene = render_scene(profiles[s % 4], t, 0.0, s);
    REQUIRE(scene.regions.size() == t.parts.size());
    for (const auto& r : scene.regions) CHECK(r.attributes == profiles[s % 4].attributes[static_cast<size_t>(r.part)]);
  }
}

TEST_CASE("full noise leaves (k-1)/k of attributes off profile") {
  const Taxonomy& t = fixtures::taxonomy();
  auto profiles = sample_class_profiles(t, 3, 8);
  std::array<int, kNumAttributeCategories> off{};
  int regions = 0;
  for (std::uint64_t s = 0; s < 1000; ++s) {
    const ClassProfile& prof = profiles[s % 3];
    Scene scene = render_scene(prof, t, 1.0, derive_seed(77, {s}));
    for (const auto& r : scene.regions) {
      ++regions;
      for (int k = 0; k < kNumAttributeCategories; ++k) {
        off[static_cast<size_t>(k)] +=
            r.attributes[static_cast<size_t>(k)] != prof.attributes[static_cast<size_t>(r.part)][static_cast<size_t>(k)];
      }
    }
  }
  for (int k = 0; k < kNumAttributeCategories; ++k) {
    double size = t.category_size(kAttributeCategories[static_cast<size_t>(k)]);
    double expected = (size - 1.0) / size;
    double got = static_cast<double>(off[static_cast<size_t>(k)]) / regions;
    // 8000 Bernoulli draws: 4 standard errors is below 0.02.
    CHECK(std::abs(got - expected) < 0.02);
  }
}

TEST_CASE("keypoints stay inside their own boxes and boxes on the canvas") {
  const Taxonomy& t = fixtures::taxonomy();
  auto profiles = sample_class_profiles(t, 5, 1);
  double head_y = 0.0;
  double feet_y = 0.0;
  for (std::uint64_t s = 0; s < 10000; ++s) {
    Scene scene = render_scene(profiles[s % 5], t, 0.15, derive_seed(3, {s}));
    REQUIRE(scene.keypoints.size() == scene.regions.size());
    std::set<int> parts;
    for (size_t i = 0; i < scene.regions.size(); ++i) {
      const Box& b = scene.regions[i].box;
      CHECK(parts.insert(scene.regions[i].part).second);
      CHECK((b.x >= 0.0 && b.y >= 0.0 && b.x + b.w <= 1.0 + 1e-12 && b.y + b.h <= 1.0 + 1e-12));
      CHECK(inside_closed(b, scene.keypoints[i]));
    }
    head_y += scene.region_for_part(t.part_index("head"))->box.center().y;
    feet_y += scene.region_for_part(t.part_index("feet"))->box.center().y;
  }
  // Canvas y grows downward: heads high, feet low.
  CHECK(head_y < feet_y);
}

TEST_CASE("ground-truth sentences mention 2 to 4 true attributes") {
  const Taxonomy& t = fixtures::taxonomy();
  auto profiles = sample_class_profiles(t, 5, 6);
  for (std::uint64_t s = 0; s < 400; ++s) {
    Scene scene = render_scene(profiles[s % 5], t, 0.3, s);
    Sentence gt = ground_truth_sentence(scene, t, derive_seed(s, {tag("gt")}));
    auto phrases = extract_phrases(gt.tokens, t);
    CHECK(phrases.size() >= 2);
    CHECK(phrases.size() <= 4);
    CHECK(all_true(gt.tokens, scene, t));
    CHECK_FALSE(gt.foil.has_value());
  }
}

TEST_CASE("template instantiation from true attributes") {
  const Taxonomy& t = fixtures::taxonomy();
  auto profiles = sample_class_profiles(t, 2, 6);
  Scene scene = render_scene(profiles[0], t, 0.0, 1);
  bool saw_bird_frame = false;
  for (std::uint64_t s = 0; s < 200; ++s) {
    Sentence gt = ground_truth_sentence(scene, t, s);
    std::string text = join_tokens(gt.tokens);
    if (text.rfind("this is a", 0) == 0 && text.find(" bird with ") != std::string::npos) {
      saw_bird_frame = true;
      const Region* body = scene.region_for_part(t.part_index("body"));
      auto phrases = extract_phrases(gt.tokens, t);
      CHECK(phrases[0].noun == "bird");
      CHECK(phrases[0].adjectives.back() == t.tokens(Category::Color)[static_cast<size_t>(body->attributes[0])]);
    }
  }
  CHECK(saw_bird_frame);
}

TEST_CASE("foil sentences replace one token within its category") {
  const Dataset& d = fixtures::small_dataset();
  const Taxonomy& t = d.taxonomy;
  int checked = 0;
  for (const auto& r : d.sentences) {
    if (r.sentence.foil) continue;
    for (std::uint64_t s = 0; s < 3; ++s) {
      Sentence f = make_foil_sentence(r.sentence, t, s);
      REQUIRE(f.foil.has_value());
      REQUIRE(f.tokens.size() == r.sentence.tokens.size());
      int diffs = 0;
      for (size_t i = 0; i < f.tokens.size(); ++i) diffs += f.tokens[i] != r.sentence.tokens[i];
      CHECK(diffs == 1);
      size_t idx = static_cast<size_t>(f.foil->index);
      CHECK(f.foil->original == r.sentence.tokens[idx]);
      CHECK(f.tokens[idx] != f.foil->original);
      const LexEntry* a = t.lookup(f.tokens[idx]);
      const LexEntry* b = t.lookup(f.foil->original);
      CHECK(a->category == b->category);
      CHECK((a->pos == Pos::Adj || a->pos == Pos::Noun));
      CHECK(f.corrected() == r.sentence);
      ++checked;
    }
  }
  CHECK(checked > 1000);
}

TEST_CASE("a sentence of function words cannot be foiled") {
  Sentence s{fixtures::words("this is a bird"), std::nullopt};
  CHECK_THROWS_AS(make_foil_sentence(s, fixtures::taxonomy(), 1), InputError);
  Sentence none{fixtures::words("this is the"), std::nullopt};
  CHECK_THROWS_AS(make_foil_sentence(none, fixtures::taxonomy(), 1), InputError);
}

TEST_CASE("dataset counts, splits and soundness") {
  const Dataset& d = fixtures::small_dataset();
  const DatasetConfig& c = d.config;
  REQUIRE(d.scenes.size() == static_cast<size_t>(c.num_classes * c.scenes_per_class));
  for (size_t i = 0; i < d.scenes.size(); ++i) CHECK(d.scenes[i].id == static_cast<int>(i));
  for (const auto& s : d.scenes) {
    CHECK(d.ground_truth(s.id).size() == static_cast<size_t>(c.sentences_per_scene));
    CHECK(d.foils(s.id).size() == static_cast<size_t>(c.foils_per_scene));
    for (const Sentence* gt : d.ground_truth(s.id)) CHECK(all_true(gt->tokens, s, d.taxonomy));
  }
  for (int cls = 0; cls < c.num_classes; ++cls) {
    std::array<int, 3> counts{};
    for (const auto& s : d.scenes) {
      if (s.class_id == cls) ++counts[static_cast<size_t>(s.split)];
    }
    CHECK(std::abs(counts[0] - c.train_fraction * c.scenes_per_class) <= 1.0);
    CHECK(std::abs(counts[1] - c.val_fraction * c.scenes_per_class) <= 1.0);
    CHECK(std::abs(counts[2] - c.test_fraction * c.scenes_per_class) <= 1.0);
  }
}

TEST_CASE("default dataset has 3000 scenes with 10 ground-truth sentences") {
  Dataset d = generate_dataset(DatasetConfig{}, 7);
  CHECK(d.scenes.size() == 3000);
  int gt = 0;
  for (const auto& r : d.sentences) gt += !r.sentence.foil.has_value();
  CHECK(gt == 30000);
}

TEST_CASE("dataset generation is byte-deterministic and validates splits") {
  auto a = dataset_to_json(generate_dataset(fixtures::small_config(), 21)).dump();
  auto b = dataset_to_json(generate_dataset(fixtures::small_config(), 21)).dump();
  CHECK(a == b);
  CHECK(a != dataset_to_json(generate_dataset(fixtures::small_config(), 22)).dump());
  DatasetConfig bad = fixtures::small_config();
  bad.test_fraction = 0.5;
  CHECK_THROWS_AS(generate_dataset(bad, 1), ConfigError);
}
