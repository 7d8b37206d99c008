#include "phrasecritic/grounding.hpp"

#include <cmath>

#include "phrasecritic/errors.hpp"
#include "phrasecritic/rng.hpp"

namespace phrasecritic {

AttributeVector embed_phrase(const AttributePhrase& phrase, const Taxonomy& taxonomy) {
  AttributeVector v(static_cast<size_t>(taxonomy.attribute_dim()), 0.0);
  for (const auto& a : phrase.adjectives) {
    int f = taxonomy.feature_index(a);
    if (f >= 0) v[static_cast<size_t>(f)] = 1.0;
  }
  int f = taxonomy.feature_index(phrase.noun);
  if (f >= 0) v[static_cast<size_t>(f)] = 1.0;
  return v;
}

std::vector<double> region_features(const Region& region, const Taxonomy& taxonomy,
                                    double feature_noise, std::uint64_t seed) {
  const int da = taxonomy.attribute_dim();
  std::vector<double> f(static_cast<size_t>(da) + 4, 0.0);
  Rng rng(seed);
  for (int k = 0; k < kNumAttributeCategories; ++k) {
    int idx = taxonomy.feature_index(kAttributeCategories[static_cast<size_t>(k)],
                                     region.attributes[static_cast<size_t>(k)]);
    bool dropped = feature_noise > 0.0 && uniform01(rng) < feature_noise;
    if (!dropped) f[static_cast<size_t>(idx)] = 1.0;
  }
  f[static_cast<size_t>(taxonomy.feature_index(Category::Part, region.part))] = 1.0;
  f[static_cast<size_t>(da)] = region.box.x;
  f[static_cast<size_t>(da) + 1] = region.box.y;
  f[static_cast<size_t>(da) + 2] = region.box.w;
  f[static_cast<size_t>(da) + 3] = region.box.h;
  return f;
}

GroundedPhrase SyntheticGrounder::ground(const AttributePhrase& phrase, const Scene& scene,
                                         int phrase_index) const {
  if (scene.regions.empty()) throw InputError("cannot ground in a scene without regions");
  const Taxonomy& t = *taxonomy_;
  const auto sid = static_cast<std::uint64_t>(scene.id);
  AttributeVector e = embed_phrase(phrase, t);

  GroundedPhrase best;
  bool have = false;
  for (size_t r = 0; r < scene.regions.size(); ++r) {
    auto feats = region_features(scene.regions[r], t, config_.feature_noise,
                                 derive_seed(config_.seed, {tag("features"), sid, r}));
    double m = 0.0;
    for (size_t i = 0; i < e.size(); ++i) m += e[i] * feats[i];
    if (!have || m > best.match) {
      have = true;
      best.region = static_cast<int>(r);
      best.match = m;
      best.features = std::move(feats);
    }
  }
  const Region& region = scene.regions[static_cast<size_t>(best.region)];
  best.phrase = phrase;
  best.part = region.part;
  best.box = region.box;
  Rng rng = make_rng(config_.seed,
                     {tag("score"), sid, static_cast<std::uint64_t>(phrase_index)});
  double noise = config_.score_sigma > 0.0
                     ? std::normal_distribution<double>(0.0, config_.score_sigma)(rng)
                     : 0.0;
  best.score = t.kappa.at(static_cast<size_t>(region.part)) * best.match + noise;
  return best;
}

GroundedPhrase ground_phrase(const AttributePhrase& phrase, const Scene& scene,
                             const Taxonomy& taxonomy, const GrounderConfig& config,
                             int phrase_index) {
  return SyntheticGrounder(taxonomy, config).ground(phrase, scene, phrase_index);
}

std::vector<GroundedPhrase> ground_all(std::span<const AttributePhrase> phrases,
                                       const Scene& scene, const Grounder& grounder) {
  std::vector<GroundedPhrase> out;
  out.reserve(phrases.size());
  for (size_t i = 0; i < phrases.size(); ++i) {
    out.push_back(grounder.ground(phrases[i], scene, static_cast<int>(i)));
  }
  return out;
}

}  // namespace phrasecritic
