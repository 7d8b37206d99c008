#include "phrasecritic/foil.hpp"

#include <algorithm>
#include <cstdio>

#include "phrasecritic/errors.hpp"
#include "phrasecritic/pipeline.hpp"
#include "phrasecritic/rng.hpp"

namespace phrasecritic {
namespace {

std::vector<std::string> without(std::span<const std::string> tokens, int index) {
  std::vector<std::string> out;
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (static_cast<int>(i) != index) out.push_back(tokens[i]);
  }
  return out;
}

}  // namespace

std::vector<FoilExample> foil_examples(const Dataset& dataset, Split split) {
  std::vector<FoilExample> out;
  for (const auto& scene : dataset.scenes) {
    if (scene.split != split) continue;
    auto foils = dataset.foils(scene.id);
    auto gt = dataset.ground_truth(scene.id);
    for (size_t i = 0; i < foils.size() && i < gt.size(); ++i) {
      out.push_back({scene.id, gt[i]->tokens, 1, -1, ""});
    }
    for (const Sentence* f : foils) {
      out.push_back({scene.id, f->tokens, 0, f->foil->index, f->foil->original});
    }
  }
  return out;
}

std::vector<LabeledExample> labeled_examples(const Dataset& dataset,
                                             std::span<const FoilExample> examples,
                                             const CriticModel& vocab_model) {
  std::vector<LabeledExample> out;
  for (const auto& e : examples) {
    const Scene& scene = dataset.scenes.at(static_cast<size_t>(e.scene_id));
    auto steps = sentence_steps(e.tokens, scene, dataset, vocab_model);
    if (steps.empty()) continue;
    out.push_back({std::move(steps), e.label});
  }
  return out;
}

TrainedCritic train_foil_classifier(const Dataset& dataset, const CriticHyper& hyper,
                                    std::uint64_t seed) {
  auto vocab = dataset.taxonomy.vocabulary();
  const int fd = region_feature_dim(dataset.taxonomy);
  CriticModel shell = init_critic(vocab, fd, hyper, LossKind::Binary, 0);
  auto train = foil_examples(dataset, Split::Train);
  auto val = foil_examples(dataset, Split::Val);
  auto lt = labeled_examples(dataset, train, shell);
  auto lv = labeled_examples(dataset, val, shell);
  return train_classifier(lt, lv, vocab, fd, hyper, derive_seed(seed, {tag("foil-critic")}));
}

double sentence_logit(std::span<const std::string> tokens, const Scene& scene,
                      const Dataset& dataset, const CriticModel& model) {
  auto steps = sentence_steps(tokens, scene, dataset, model);
  return steps.empty() ? 0.0 : score(steps, model);
}

Classification classify(std::span<const std::string> tokens, const Scene& scene,
                        const Dataset& dataset, const CriticModel& model) {
  auto steps = sentence_steps(tokens, scene, dataset, model);
  if (steps.empty()) return {0.0, false, true};
  double p = sigmoid(score(steps, model));
  return {p, p > 0.5, false};
}

std::vector<int> content_positions(std::span<const std::string> tokens, const Taxonomy& taxonomy) {
  std::vector<int> out;
  for (size_t i = 0; i < tokens.size(); ++i) {
    const LexEntry* e = taxonomy.lookup(tokens[i]);
    if (e != nullptr && (e->pos == Pos::Adj || e->pos == Pos::Noun)) out.push_back(static_cast<int>(i));
  }
  return out;
}

int detect_foil_word(std::span<const std::string> tokens, const Taxonomy& taxonomy,
                     const SentenceScorer& scorer) {
  if (tokens.size() < 2) throw InputError("foil detection needs at least two tokens");
  auto positions = content_positions(tokens, taxonomy);
  if (positions.empty()) throw InputError("sentence has no content word");
  // The base score is common to every deletion, so the largest increase is
  // the largest post-deletion score.
  int best = -1;
  double best_score = 0.0;
  for (int j : positions) {
    double s = scorer(without(tokens, j));
    if (best < 0 || s > best_score) {
      best = j;
      best_score = s;
    }
  }
  return best;
}

int detect_foil_word(std::span<const std::string> tokens, const Scene& scene,
                     const Dataset& dataset, const CriticModel& model) {
  return detect_foil_word(tokens, dataset.taxonomy, [&](std::span<const std::string> t) {
    return sentence_logit(t, scene, dataset, model);
  });
}

std::vector<std::string> target_vocabulary(const std::string& word, const Taxonomy& taxonomy) {
  const LexEntry* e = taxonomy.lookup(word);
  if (e == nullptr || (e->pos != Pos::Adj && e->pos != Pos::Noun)) return {};
  std::vector<std::string> out;
  for (const auto& t : taxonomy.tokens(e->category)) {
    if (t != word) out.push_back(t);
  }
  return out;
}

std::string correct_foil_word(std::span<const std::string> tokens, int index,
                              std::span<const std::string> targets, const SentenceScorer& scorer) {
  if (targets.empty()) throw InputError("empty target vocabulary");
  if (index < 0 || static_cast<size_t>(index) >= tokens.size()) throw InputError("foil index out of range");
  std::vector<std::string> sorted(targets.begin(), targets.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::string> work(tokens.begin(), tokens.end());
  std::string best;
  double best_score = 0.0;
  for (const auto& t : sorted) {
    work[static_cast<size_t>(index)] = t;
    double s = scorer(work);
    if (best.empty() || s > best_score) {
      best = t;
      best_score = s;
    }
  }
  return best;
}

std::string correct_foil_word(std::span<const std::string> tokens, int index,
                              std::span<const std::string> targets, const Scene& scene,
                              const Dataset& dataset, const CriticModel& model) {
  return correct_foil_word(tokens, index, targets, [&](std::span<const std::string> t) {
    return sentence_logit(t, scene, dataset, model);
  });
}

bool baseline_classify(std::span<const std::string> tokens, const Scene& scene,
                       const Dataset& dataset, double tau) {
  auto m = mean_grounding_score(tokens, scene, dataset);
  return m && *m > tau;
}

double tune_tau(std::span<const double> mean_scores, std::span<const int> labels) {
  if (mean_scores.empty()) throw InputError("cannot tune a threshold on an empty set");
  std::vector<double> v(mean_scores.begin(), mean_scores.end());
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  std::vector<double> candidates;
  for (size_t i = 0; i + 1 < v.size(); ++i) candidates.push_back(0.5 * (v[i] + v[i + 1]));
  if (candidates.empty()) candidates.push_back(v.front());
  double best_tau = candidates.front();
  size_t best_ok = 0;
  for (double tau : candidates) {
    size_t ok = 0;
    for (size_t i = 0; i < mean_scores.size(); ++i) ok += (mean_scores[i] > tau) == (labels[i] == 1);
    if (ok > best_ok) {
      best_ok = ok;
      best_tau = tau;
    }
  }
  return best_tau;
}

FoilReport evaluate_foil(const Dataset& dataset, const CriticModel& model, Split split) {
  // Baseline threshold from the train split; phrase-less sentences are foils
  // and take no part in the sweep.
  std::vector<double> means;
  std::vector<int> labels;
  for (const auto& e : foil_examples(dataset, Split::Train)) {
    auto m = mean_grounding_score(e.tokens, dataset.scenes[static_cast<size_t>(e.scene_id)], dataset);
    if (!m) continue;
    means.push_back(*m);
    labels.push_back(e.label);
  }
  FoilReport r;
  r.tau = tune_tau(means, labels);

  auto examples = foil_examples(dataset, split);
  if (examples.empty()) throw InputError(std::string("no foil examples in split ") + to_string(split));
  int cls = 0, base_cls = 0, det = 0, base_det = 0, cor = 0, base_cor = 0;
  for (const auto& e : examples) {
    const Scene& scene = dataset.scenes[static_cast<size_t>(e.scene_id)];
    Classification c = classify(e.tokens, scene, dataset, model);
    r.fallbacks += c.fallback;
    cls += c.relevant == (e.label == 1);
    base_cls += baseline_classify(e.tokens, scene, dataset, r.tau) == (e.label == 1);
    if (e.label == 1) continue;
    ++r.foils;
    auto mean_scorer = [&](std::span<const std::string> t) {
      auto m = mean_grounding_score(t, scene, dataset);
      return m ? *m : r.tau;
    };
    det += detect_foil_word(e.tokens, scene, dataset, model) == e.gold_index;
    base_det += detect_foil_word(e.tokens, dataset.taxonomy, mean_scorer) == e.gold_index;
    auto targets = target_vocabulary(e.tokens[static_cast<size_t>(e.gold_index)], dataset.taxonomy);
    cor += correct_foil_word(e.tokens, e.gold_index, targets, scene, dataset, model) == e.gold_correction;
    base_cor += correct_foil_word(e.tokens, e.gold_index, targets, mean_scorer) == e.gold_correction;
  }
  r.examples = static_cast<int>(examples.size());
  const double n = r.examples;
  const double nf = std::max(1, r.foils);
  r.classification = cls / n;
  r.baseline_classification = base_cls / n;
  r.detection = det / nf;
  r.baseline_detection = base_det / nf;
  r.correction = cor / nf;
  r.baseline_correction = base_cor / nf;
  return r;
}

std::string format_foil_table(const FoilReport& r) {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "%-16s %14s %14s %15s\n"
                "%-16s %14.2f %14.2f %15.2f\n"
                "%-16s %14.2f %14.2f %15.2f\n",
                "Method", "Classification", "Word Detection", "Word Correction", "Grounding mean",
                100 * r.baseline_classification, 100 * r.baseline_detection,
                100 * r.baseline_correction, "Phrase critic", 100 * r.classification,
                100 * r.detection, 100 * r.correction);
  return buf;
}

}  // namespace phrasecritic
