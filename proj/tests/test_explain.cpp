#include <doctest.h>

#include <algorithm>
#include <limits>

#include "fixtures.hpp"
#include "phrasecritic/errors.hpp"
#include "phrasecritic/explain.hpp"

using namespace phrasecritic;

namespace {

struct OracleChoice {
  int index = 0;
  bool fallback = false;
};

// Discard S_f <= T, argmax S_r over the rest; argmax S_f when nothing survives.
OracleChoice oracle_select(const std::vector<Candidate>& cands, const Scene& scene,
                           const Dataset& d, const CriticModel& m, double T) {
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

int distance(const Scene& s, const std::vector<AttributeSet>& attrs) {
  int n = 0;
  for (const auto& r : s.regions) {
    for (int k = 0; k < kNumAttributeCategories; ++k) {
      n += r.attributes[static_cast<size_t>(k)] != attrs[static_cast<size_t>(r.part)][static_cast<size_t>(k)];
    }
  }
  return n;
}

int distance(const Scene& a, const Scene& b) {
  int n = 0;
  for (const auto& r : a.regions) {
    const Region* o = nullptr;
    for (const auto& q : b.regions) {
      if (q.part == r.part) o = &q;
    }
    for (int k = 0; k < kNumAttributeCategories; ++k) {
      n += o == nullptr || r.attributes[static_cast<size_t>(k)] != o->attributes[static_cast<size_t>(k)];
    }
  }
  return n;
}

}  // namespace

TEST_CASE("the gate removes a disfluent candidate however relevant") {
  std::vector<double> sf = {-10.0, -2.0};
  std::vector<std::optional<double>> sr = {100.0, 0.5};
  GatedChoice c = gated_argmax(sf, sr, -5.0);
  CHECK(c.index == 1);
  CHECK_FALSE(c.fallback);
  CHECK(c.survivors == 1);
}

TEST_CASE("all candidates gated: fallback to the most fluent") {
  std::vector<double> sf = {-10.0, -6.0, -7.0, -6.0};
  std::vector<std::optional<double>> sr = {1.0, 2.0, 3.0, 4.0};
  GatedChoice c = gated_argmax(sf, sr, -5.0);
  CHECK(c.fallback);
  CHECK(c.index == 1);
  CHECK(c.survivors == 0);
  std::vector<double> boundary = {-5.0};
  std::vector<std::optional<double>> one = {1.0};
  CHECK(gated_argmax(boundary, one, -5.0).fallback);
  CHECK_THROWS_AS(gated_argmax({}, {}, -5.0), InputError);
}

TEST_CASE("ties go to the first index") {
  std::vector<double> sf = {-1.0, -1.0, -1.0};
  std::vector<std::optional<double>> sr = {0.2, 0.7, 0.7};
  CHECK(gated_argmax(sf, sr, -5.0).index == 1);
}

TEST_CASE("select_explanation equals the brute-force rule on 100-candidate pools") {
  const Dataset& d = fixtures::small_dataset();
  const CriticModel& m = fixtures::small_ranker();
  auto lms = fit_class_models(d);
  ExplainConfig cfg;
  cfg.seed = 3;
  int fallbacks = 0;
  for (const auto& s : d.scenes) {
    if (s.split != Split::Test) continue;
    auto cands = scene_candidates(s, d, lms, cfg);
    REQUIRE(cands.size() == 100);
    for (double T : {-5.0, -9.0, -1.0}) {
      Explanation e = select_explanation(cands, s, d, m, T);
      OracleChoice o = oracle_select(cands, s, d, m, T);
      CHECK(e.index == o.index);
      CHECK(e.fallback == o.fallback);
      CHECK(e.candidate.tokens == cands[static_cast<size_t>(o.index)].tokens);
      CHECK(e.s_f == cands[static_cast<size_t>(o.index)].s_f);
      if (!e.fallback) {
        CHECK(e.s_f > T);
        CHECK(e.s == *e.s_r);
      } else {
        CHECK(e.s == 0.0);
        ++fallbacks;
      }
      CHECK(e.grounded.size() == e.candidate.phrases.size());
      CHECK(e.phrase_scores.size() == e.grounded.size());
    }
  }
  MESSAGE("fallbacks " << fallbacks);
}

TEST_CASE("selection is invariant to candidate order up to ties") {
  const Dataset& d = fixtures::small_dataset();
  const CriticModel& m = fixtures::small_ranker();
  auto lms = fit_class_models(d);
  ExplainConfig cfg;
  const Scene& s = d.scenes[5];
  auto cands = scene_candidates(s, d, lms, cfg);
  Explanation a = select_explanation(cands, s, d, m);
  std::reverse(cands.begin(), cands.end());
  Explanation b = select_explanation(cands, s, d, m);
  CHECK(a.candidate.tokens == b.candidate.tokens);
  CHECK_THROWS_AS(select_explanation(std::vector<Candidate>{}, s, d, m), InputError);
}

TEST_CASE("counterfactual class and neighbor equal brute-force scans") {
  const Dataset& d = fixtures::small_dataset();
  for (const auto& s : d.scenes) {
    int c = counterfactual_class(s, d.profiles);
    CHECK(c != s.class_id);
    int best = -1;
    int best_d = std::numeric_limits<int>::max();
    for (const auto& p : d.profiles) {
      if (p.id == s.class_id) continue;
      int dist = distance(s, p.attributes);
      if (dist < best_d) {
        best_d = dist;
        best = p.id;
      }
    }
    CHECK(c == best);
    int n = nearest_scene_of_class(s, d, c);
    int nb = -1;
    int nb_d = std::numeric_limits<int>::max();
    for (const auto& o : d.scenes) {
      if (o.class_id != c) continue;
      int dist = distance(s, o);
      if (dist < nb_d) {
        nb_d = dist;
        nb = o.id;
      }
    }
    CHECK(n == nb);
  }
  std::vector<ClassProfile> one(d.profiles.begin(), d.profiles.begin() + 1);
  CHECK_THROWS_AS(counterfactual_class(d.scenes[0], one), InputError);
}

TEST_CASE("a profile two parts away beats one five parts away") {
  const Dataset& d = fixtures::small_dataset();
  Scene s = d.scenes[0];
  s.class_id = 0;
  std::vector<ClassProfile> profiles(3);
  for (int i = 0; i < 3; ++i) {
    profiles[static_cast<size_t>(i)].id = i;
    profiles[static_cast<size_t>(i)].attributes.resize(static_cast<size_t>(d.taxonomy.num_parts()));
    for (const auto& r : s.regions) profiles[static_cast<size_t>(i)].attributes[static_cast<size_t>(r.part)] = r.attributes;
  }
  auto shift = [&](ClassProfile& p, int parts) {
    for (int q = 0; q < parts; ++q) {
      auto& a = p.attributes[static_cast<size_t>(q)][0];
      a = (a + 1) % d.taxonomy.category_size(Category::Color);
    }
  };
  shift(profiles[1], 5);
  shift(profiles[2], 2);
  CHECK(counterfactual_class(s, profiles) == 2);
}

TEST_CASE("counterfactual evidence is the argmin over the neighbor's phrases") {
  const Dataset& d = fixtures::small_dataset();
  const CriticModel& m = fixtures::small_ranker();
  auto lms = fit_class_models(d);
  ExplainConfig cfg;
  SyntheticGrounder g(d.taxonomy, d.config.grounder);
  for (const auto& s : d.scenes) {
    if (s.split != Split::Test) continue;
    Counterfactual cf = explain_counterfactual(s, d, m, lms, cfg);
    CHECK(cf.class_id == counterfactual_class(s, d.profiles));
    CHECK(cf.neighbor_scene == nearest_scene_of_class(s, d, cf.class_id));
    REQUIRE(!cf.phrases.empty());
    REQUIRE(cf.scores.size() == cf.phrases.size());
    int arg = 0;
    for (size_t i = 0; i < cf.phrases.size(); ++i) {
      std::vector<StepInput> one = {make_step(g.ground(cf.phrases[i], s, static_cast<int>(i)), m)};
      CHECK(cf.scores[i] == score(one, m));
      if (cf.scores[i] < cf.scores[static_cast<size_t>(arg)]) arg = static_cast<int>(i);
    }
    CHECK(cf.evidence == arg);
    CHECK(cf.evidence_text == phrase_to_text(cf.phrases[static_cast<size_t>(arg)]));
    CHECK(cf.negation.find(cf.evidence_text) != std::string::npos);
    CHECK(cf.conditional.find(cf.evidence_text) != std::string::npos);
    CHECK(cf.conditional.find(cf.class_name) != std::string::npos);
  }
}

TEST_CASE("negation and conditional templates") {
  const Taxonomy& t = fixtures::taxonomy();
  AttributePhrase p;
  p.adjectives = {"long", "flat"};
  p.noun = "bill";
  NegatedPhrase n = negate_phrase(p, "red faced cormorant", t);
  CHECK(n.negation == "this bird does not have a long flat bill");
  CHECK(n.conditional == "if this bird had been a red faced cormorant, it would have had a long flat bill");
  AttributePhrase wings;
  wings.adjectives = {"black"};
  wings.noun = "wings";
  CHECK(negate_phrase(wings, "x", t).negation == "this bird does not have black wings");
  AttributePhrase orange;
  orange.adjectives = {"orange"};
  orange.noun = "eye";
  CHECK(negate_phrase(orange, "orange eyed auklet", t).conditional ==
        "if this bird had been an orange eyed auklet, it would have had an orange eye");
  CHECK_THROWS_AS(negate_phrase(AttributePhrase{}, "x", t), InputError);
}

TEST_CASE("svg shows every region and every grounded phrase") {
  const Dataset& d = fixtures::small_dataset();
  const Scene& s = d.scenes[3];
  auto grounded = ground_sentence(d.ground_truth(s.id)[0]->tokens, s, d);
  std::string svg = render_svg(s, d.taxonomy, grounded, "a <caption> & more");
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("&lt;caption&gt; &amp; more") != std::string::npos);
  size_t rects = 0;
  for (size_t pos = svg.find("<rect"); pos != std::string::npos; pos = svg.find("<rect", pos + 1)) ++rects;
  CHECK(rects == 1 + s.regions.size() + grounded.size());
  for (const auto& g : grounded) CHECK(svg.find(">" + phrase_to_text(g.phrase) + "<") != std::string::npos);
}
