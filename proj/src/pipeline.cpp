#include "phrasecritic/pipeline.hpp"

#include "phrasecritic/rng.hpp"

namespace phrasecritic {

std::vector<GroundedPhrase> ground_sentence(std::span<const std::string> tokens,
                                            const Scene& scene, const Dataset& dataset) {
  auto phrases = extract_phrases(tokens, dataset.taxonomy);
  return ground_all(phrases, scene, SyntheticGrounder(dataset.taxonomy, dataset.config.grounder));
}

std::vector<StepInput> sentence_steps(std::span<const std::string> tokens, const Scene& scene,
                                      const Dataset& dataset, const CriticModel& model) {
  auto grounded = ground_sentence(tokens, scene, dataset);
  return make_steps(grounded, model);
}

bool phrase_true(const AttributePhrase& phrase, const Scene& scene, const Taxonomy& taxonomy) {
  const LexEntry* noun = taxonomy.lookup(phrase.noun);
  if (noun == nullptr || noun->part < 0) return false;
  std::vector<std::pair<Category, int>> attrs;
  for (const auto& a : phrase.adjectives) {
    const LexEntry* e = taxonomy.lookup(a);
    if (e == nullptr || attribute_slot(e->category) < 0) return false;
    attrs.emplace_back(e->category, e->index);
  }
  return scene_supports(scene, noun->part, attrs);
}

std::optional<double> mean_grounding_score(std::span<const std::string> tokens,
                                           const Scene& scene, const Dataset& dataset) {
  auto grounded = ground_sentence(tokens, scene, dataset);
  if (grounded.empty()) return std::nullopt;
  double sum = 0.0;
  for (const auto& g : grounded) sum += g.score;
  return sum / static_cast<double>(grounded.size());
}

int region_feature_dim(const Taxonomy& taxonomy) { return taxonomy.attribute_dim() + 4; }

PairSets pair_examples(const Dataset& dataset, std::span<const RankPair> pairs,
                       const CriticModel& vocab_model) {
  PairSets out;
  for (const auto& p : pairs) {
    const Scene& scene = dataset.scenes.at(static_cast<size_t>(p.scene_id));
    PairExample ex{sentence_steps(p.positive, scene, dataset, vocab_model),
                   sentence_steps(p.negative, scene, dataset, vocab_model)};
    if (ex.positive.empty() || ex.negative.empty()) continue;
    switch (p.split) {
      case Split::Train:
        out.train.push_back(std::move(ex));
        break;
      case Split::Val:
        out.val.push_back(std::move(ex));
        break;
      case Split::Test:
        out.test.push_back(std::move(ex));
        break;
    }
  }
  return out;
}

TrainedCritic train_on_pairs(const Dataset& dataset, std::span<const RankPair> pairs,
                             const CriticHyper& hyper, std::uint64_t seed) {
  auto vocab = dataset.taxonomy.vocabulary();
  const int fd = region_feature_dim(dataset.taxonomy);
  CriticModel shell = init_critic(vocab, fd, hyper, LossKind::Rank, 0);
  PairSets sets = pair_examples(dataset, pairs, shell);
  return train_ranker(sets.train, sets.val, vocab, fd, hyper, derive_seed(seed, {tag("critic")}));
}

RankingRun train_ranking_critic(const Dataset& dataset, int k, const CriticHyper& hyper,
                                std::uint64_t seed) {
  RankingRun run;
  run.pairs = build_rank_pairs(dataset, k, derive_seed(seed, {tag("pairs")}));
  run.critic = train_on_pairs(dataset, run.pairs, hyper, seed);
  return run;
}

RankingAccuracy ranking_accuracy(const Dataset& dataset, std::span<const RankPair> pairs,
                                 const CriticModel& model, Split split) {
  RankingAccuracy out;
  int critic_hits = 0;
  int mean_hits = 0;
  for (const auto& p : pairs) {
    if (p.split != split) continue;
    const Scene& scene = dataset.scenes.at(static_cast<size_t>(p.scene_id));
    auto pos = sentence_steps(p.positive, scene, dataset, model);
    auto neg = sentence_steps(p.negative, scene, dataset, model);
    if (pos.empty() || neg.empty()) continue;
    ++out.pairs;
    if (score(pos, model) > score(neg, model)) ++critic_hits;
    if (*mean_grounding_score(p.positive, scene, dataset) > *mean_grounding_score(p.negative, scene, dataset)) {
      ++mean_hits;
    }
  }
  if (out.pairs > 0) {
    out.critic = static_cast<double>(critic_hits) / out.pairs;
    out.mean_score = static_cast<double>(mean_hits) / out.pairs;
  }
  return out;
}

}  // namespace phrasecritic
