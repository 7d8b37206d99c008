#include "phrasecritic/generation.hpp"

#include <cmath>

#include "phrasecritic/errors.hpp"
#include "phrasecritic/rng.hpp"

namespace phrasecritic {

int BigramLM::id(std::string_view token) const {
  auto it = ids.find(token);
  return it == ids.end() ? kUnk : it->second;
}

BigramLM fit_language_model(std::span<const std::vector<std::string>> corpus,
                            std::span<const std::string> vocabulary, double alpha) {
  if (corpus.empty()) throw InputError("cannot fit a language model on an empty corpus");
  if (!(alpha > 0.0)) throw ConfigError("smoothing alpha must be > 0");
  BigramLM lm;
  lm.alpha = alpha;
  lm.tokens = {"<s>", "</s>", "<unk>"};
  for (const auto& t : vocabulary) {
    if (lm.ids.count(t) || t == "<s>" || t == "</s>" || t == "<unk>") continue;
    lm.ids.emplace(t, static_cast<int>(lm.tokens.size()));
    lm.tokens.push_back(t);
  }
  for (int i = 0; i < 3; ++i) lm.ids.emplace(lm.tokens[static_cast<size_t>(i)], i);

  const size_t v = lm.tokens.size();
  std::vector<std::vector<double>> counts(v, std::vector<double>(v, 0.0));
  for (const auto& sentence : corpus) {
    int prev = BigramLM::kStart;
    for (const auto& tok : sentence) {
      int cur = lm.id(tok);
      counts[static_cast<size_t>(prev)][static_cast<size_t>(cur)] += 1.0;
      prev = cur;
    }
    counts[static_cast<size_t>(prev)][BigramLM::kEnd] += 1.0;
  }

  // <s> is never a continuation, so each row normalizes over v - 1 outcomes.
  lm.log_prob.assign(v, std::vector<double>(v, -INFINITY));
  for (size_t c = 0; c < v; ++c) {
    double total = 0.0;
    for (size_t n = 1; n < v; ++n) total += counts[c][n];
    double denom = total + alpha * static_cast<double>(v - 1);
    for (size_t n = 1; n < v; ++n) lm.log_prob[c][n] = std::log((counts[c][n] + alpha) / denom);
  }
  return lm;
}

double fluency(std::span<const std::string> tokens, const BigramLM& lm) {
  double s = 0.0;
  int prev = BigramLM::kStart;
  for (const auto& tok : tokens) {
    int cur = lm.id(tok);
    s += lm.conditional(prev, cur);
    prev = cur;
  }
  return s + lm.conditional(prev, BigramLM::kEnd);
}

std::vector<BigramLM> fit_class_models(const Dataset& dataset, double alpha) {
  std::vector<std::vector<std::vector<std::string>>> corpora(dataset.profiles.size());
  for (const auto& rec : dataset.sentences) {
    const Scene& s = dataset.scenes.at(static_cast<size_t>(rec.scene_id));
    if (s.split != Split::Train || rec.sentence.foil) continue;
    corpora[static_cast<size_t>(s.class_id)].push_back(rec.sentence.tokens);
  }
  auto vocab = dataset.taxonomy.vocabulary();
  std::vector<BigramLM> models;
  for (size_t c = 0; c < corpora.size(); ++c) {
    if (corpora[c].empty()) {
      throw InputError("class " + std::to_string(c) + " has no training sentences");
    }
    models.push_back(fit_language_model(corpora[c], vocab, alpha));
  }
  return models;
}

std::vector<Candidate> sample_candidates(const Scene& scene, const ClassProfile& profile,
                                         const Taxonomy& taxonomy, const BigramLM& lm,
                                         const SamplerConfig& config, std::uint64_t seed) {
  if (config.n < 1) throw ConfigError("candidate count must be >= 1");
  if (!(config.error_rate >= 0.0 && config.error_rate <= 1.0)) {
    throw ConfigError("error_rate must be in [0, 1]");
  }
  std::vector<double> weights(static_cast<size_t>(taxonomy.num_parts()), 0.0);
  for (const auto& r : scene.regions) {
    weights[static_cast<size_t>(r.part)] =
        profile.salience.empty() ? 1.0 : profile.salience[static_cast<size_t>(r.part)];
  }

  std::vector<Candidate> out;
  out.reserve(static_cast<size_t>(config.n));
  for (int i = 0; i < config.n; ++i) {
    const auto ci = static_cast<std::uint64_t>(i);
    MentionPlan plan =
        sample_mention_plan(taxonomy, derive_seed(seed, {tag("plan"), ci}), weights);
    Rng rng = make_rng(seed, {tag("fill"), ci});
    for (auto& m : plan.mentions) {
      const Region* r = scene.region_for_part(m.part);
      for (auto& [cat, idx] : m.attributes) {
        auto slot = static_cast<size_t>(attribute_slot(cat));
        bool from_prior = uniform01(rng) < config.error_rate;
        idx = from_prior ? profile.attributes.at(static_cast<size_t>(m.part))[slot]
                         : r->attributes[slot];
      }
    }
    if (uniform01(rng) < config.repeat_rate) {
      Mention again = plan.mentions[static_cast<size_t>(
          uniform_index(rng, static_cast<int>(plan.mentions.size())))];
      // The bird mention renders with "bird"; repeat it as its canonical part.
      plan.mentions.push_back(std::move(again));
    }
    Candidate c;
    c.tokens = render_frame(plan.frame, plan.mentions, taxonomy);
    c.s_f = fluency(c.tokens, lm);
    c.phrases = extract_phrases(c.tokens, taxonomy);
    c.class_id = profile.id;
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace phrasecritic
