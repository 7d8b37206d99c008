#include "phrasecritic/metrics.hpp"

#include <cmath>
#include <cstdio>

#include "phrasecritic/pipeline.hpp"

namespace phrasecritic {

void KeypointReport::add(const KeypointReport& other) {
  for (const auto& [part, s] : other.parts) {
    auto& mine = parts[part];
    mine.groundings += s.groundings;
    mine.hits += s.hits;
    mine.distance_sum += s.distance_sum;
  }
  excluded += other.excluded;
}

KeypointReport keypoint_metrics(std::span<const GroundedPhrase> grounded, const Scene& scene,
                                const Taxonomy& taxonomy) {
  KeypointReport r;
  for (const auto& g : grounded) {
    const LexEntry* noun = taxonomy.lookup(g.phrase.noun);
    int region = noun != nullptr ? scene.region_index_for_part(noun->part) : -1;
    if (region < 0 || static_cast<size_t>(region) >= scene.keypoints.size()) {
      ++r.excluded;
      continue;
    }
    const Point& k = scene.keypoints[static_cast<size_t>(region)];
    Point c = g.box.center();
    auto& s = r.parts[noun->part];
    ++s.groundings;
    s.hits += g.box.contains(k);
    s.distance_sum += std::hypot(k.x - c.x, k.y - c.y);
  }
  return r;
}

void add_sentence(CnpCs& acc, std::span<const AttributePhrase> phrases, const Scene& scene,
                  const Taxonomy& taxonomy) {
  ++acc.sentences;
  int ok = 0;
  for (const auto& p : phrases) ok += phrase_true(p, scene, taxonomy);
  acc.phrases += static_cast<int>(phrases.size());
  acc.correct_phrases += ok;
  acc.correct_sentences += !phrases.empty() && ok == static_cast<int>(phrases.size());
}

MetricReport compare_methods(const Dataset& dataset, const CriticModel& model,
                             std::span<const BigramLM> class_models, const ExplainConfig& config,
                             Split split) {
  MetricReport report;
  report.threshold = config.threshold;
  report.methods = {{"fluency-only", {}, 0}, {"grounding-mean", {}, 0}, {"phrase-critic", {}, 0}};
  report.ungated_grounding = {"grounding-mean-ungated", {}, 0};
  const Taxonomy& t = dataset.taxonomy;
  for (const auto& scene : dataset.scenes) {
    if (scene.split != split) continue;
    ++report.scenes;
    auto candidates = scene_candidates(scene, dataset, class_models, config);
    std::vector<double> s_f;
    std::vector<std::optional<double>> mean_s;
    for (const auto& c : candidates) {
      s_f.push_back(c.s_f);
      mean_s.push_back(mean_grounding_score(c.tokens, scene, dataset));
    }

    size_t best_f = 0;
    for (size_t i = 1; i < s_f.size(); ++i) {
      if (s_f[i] > s_f[best_f]) best_f = i;
    }
    add_sentence(report.methods[0].scores, candidates[best_f].phrases, scene, t);

    GatedChoice g = gated_argmax(s_f, mean_s, config.threshold);
    report.methods[1].fallbacks += g.fallback;
    add_sentence(report.methods[1].scores, candidates[static_cast<size_t>(g.index)].phrases, scene, t);

    GatedChoice u = gated_argmax(s_f, mean_s, -INFINITY);
    report.ungated_grounding.fallbacks += u.fallback;
    add_sentence(report.ungated_grounding.scores, candidates[static_cast<size_t>(u.index)].phrases,
                 scene, t);

    Explanation e = select_explanation(candidates, scene, dataset, model, config.threshold);
    report.methods[2].fallbacks += e.fallback;
    add_sentence(report.methods[2].scores, e.candidate.phrases, scene, t);
    report.keypoints.add(keypoint_metrics(e.grounded, scene, t));
  }
  return report;
}

std::string format_selection_table(const MetricReport& report) {
  std::string out;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-24s %8s %8s %10s\n", "Method", "CNP (%)", "CS (%)", "Fallbacks");
  out += buf;
  auto row = [&](const MethodResult& m) {
    std::snprintf(buf, sizeof buf, "%-24s %8.2f %8.2f %10d\n", m.name.c_str(), m.scores.cnp(),
                  m.scores.cs(), m.fallbacks);
    out += buf;
  };
  for (const auto& m : report.methods) row(m);
  row(report.ungated_grounding);
  return out;
}

std::string format_keypoint_table(const MetricReport& report, const Taxonomy& taxonomy) {
  std::string out;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-8s %10s %12s %10s\n", "Part", "% Accuracy", "Distance", "Groundings");
  out += buf;
  for (const auto& [part, s] : report.keypoints.parts) {
    std::snprintf(buf, sizeof buf, "%-8s %10.2f %12.4f %10d\n",
                  taxonomy.parts[static_cast<size_t>(part)].c_str(), s.accuracy(), s.mean_distance(),
                  s.groundings);
    out += buf;
  }
  return out;
}

}  // namespace phrasecritic
