#include "phrasecritic/explain.hpp"

#include <cstdio>
#include <limits>
#include <sstream>

#include "phrasecritic/errors.hpp"
#include "phrasecritic/pipeline.hpp"
#include "phrasecritic/rng.hpp"

namespace phrasecritic {
namespace {

std::string with_article(const std::string& text, bool plural) {
  if (plural || text.empty()) return text;
  bool vowel = std::string_view("aeiou").find(text[0]) != std::string_view::npos;
  return (vowel ? "an " : "a ") + text;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", v);
  return buf;
}

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '&':
        out += "&amp;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

}  // namespace

GatedChoice gated_argmax(std::span<const double> s_f, std::span<const std::optional<double>> s_r,
                         double threshold) {
  if (s_f.empty()) throw InputError("no candidates to select from");
  GatedChoice out;
  int best = -1;
  for (size_t i = 0; i < s_f.size(); ++i) {
    if (!(s_f[i] > threshold)) continue;
    ++out.survivors;
    if (!s_r[i]) continue;
    if (best < 0 || *s_r[i] > *s_r[static_cast<size_t>(best)]) best = static_cast<int>(i);
  }
  if (best >= 0) {
    out.index = best;
    return out;
  }
  out.fallback = true;
  for (size_t i = 1; i < s_f.size(); ++i) {
    if (s_f[i] > s_f[static_cast<size_t>(out.index)]) out.index = static_cast<int>(i);
  }
  return out;
}

Explanation select_explanation(std::span<const Candidate> candidates, const Scene& scene,
                               const Dataset& dataset, const CriticModel& model,
                               double threshold) {
  if (candidates.empty()) throw InputError("select_explanation needs at least one candidate");
  const SyntheticGrounder grounder(dataset.taxonomy, dataset.config.grounder);
  std::vector<double> s_f;
  std::vector<std::optional<double>> s_r(candidates.size());
  for (size_t i = 0; i < candidates.size(); ++i) {
    s_f.push_back(candidates[i].s_f);
    // Only survivors are grounded and scored.
    if (!(candidates[i].s_f > threshold) || candidates[i].phrases.empty()) continue;
    auto grounded = ground_all(candidates[i].phrases, scene, grounder);
    s_r[i] = score(make_steps(grounded, model), model);
  }
  GatedChoice choice = gated_argmax(s_f, s_r, threshold);

  Explanation e;
  e.scene_id = scene.id;
  e.index = choice.index;
  e.candidate = candidates[static_cast<size_t>(choice.index)];
  e.s_f = e.candidate.s_f;
  e.fallback = choice.fallback;
  e.survivors = choice.survivors;
  e.grounded = ground_all(e.candidate.phrases, scene, grounder);
  if (!e.grounded.empty()) {
    auto steps = make_steps(e.grounded, model);
    e.s_r = score(steps, model);
    for (const auto& st : steps) e.phrase_scores.push_back(score(std::span(&st, 1), model));
  }
  e.s = (e.s_f > threshold && e.s_r) ? *e.s_r : 0.0;
  return e;
}

int counterfactual_class(const Scene& query, std::span<const ClassProfile> profiles) {
  if (profiles.size() < 2) throw InputError("counterfactuals need at least two classes");
  int best = -1;
  int best_d = std::numeric_limits<int>::max();
  for (size_t c = 0; c < profiles.size(); ++c) {
    if (profiles[c].id == query.class_id) continue;
    int d = attribute_distance(query, profiles[c]);
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(c);
    }
  }
  return best;
}

int nearest_scene_of_class(const Scene& query, const Dataset& dataset, int class_id) {
  int best = -1;
  int best_d = std::numeric_limits<int>::max();
  for (const auto& s : dataset.scenes) {
    if (s.class_id != class_id) continue;
    int d = attribute_distance(query, s);
    if (d < best_d) {
      best_d = d;
      best = s.id;
    }
  }
  if (best < 0) throw InputError("class " + std::to_string(class_id) + " has no scenes");
  return best;
}

std::vector<Candidate> scene_candidates(const Scene& scene, const Dataset& dataset,
                                        std::span<const BigramLM> class_models,
                                        const ExplainConfig& config) {
  const auto c = static_cast<size_t>(scene.class_id);
  return sample_candidates(scene, dataset.profiles.at(c), dataset.taxonomy, class_models[c],
                           config.sampler,
                           derive_seed(config.seed, {tag("candidates"), static_cast<std::uint64_t>(scene.id)}));
}

Counterfactual counterfactual_evidence(const Scene& query, int class_id, const Dataset& dataset,
                                       const CriticModel& model,
                                       std::span<const BigramLM> class_models,
                                       const ExplainConfig& config) {
  Counterfactual cf;
  cf.scene_id = query.id;
  cf.class_id = class_id;
  cf.class_name = dataset.profiles.at(static_cast<size_t>(class_id)).name;
  cf.neighbor_scene = nearest_scene_of_class(query, dataset, class_id);
  const Scene& neighbor = dataset.scenes.at(static_cast<size_t>(cf.neighbor_scene));
  auto candidates = scene_candidates(neighbor, dataset, class_models, config);
  Explanation ex = select_explanation(candidates, neighbor, dataset, model, config.threshold);
  cf.neighbor_sentence = ex.candidate.tokens;
  cf.phrases = ex.candidate.phrases;
  if (cf.phrases.empty()) {
    throw InputError("explanation of neighbor scene " + std::to_string(neighbor.id) +
                     " has no attribute phrase");
  }
  auto grounded = ground_all(cf.phrases, query, SyntheticGrounder(dataset.taxonomy, dataset.config.grounder));
  auto steps = make_steps(grounded, model);
  for (const auto& st : steps) cf.scores.push_back(score(std::span(&st, 1), model));
  for (size_t i = 1; i < cf.scores.size(); ++i) {
    if (cf.scores[i] < cf.scores[static_cast<size_t>(cf.evidence)]) cf.evidence = static_cast<int>(i);
  }
  const AttributePhrase& p = cf.phrases[static_cast<size_t>(cf.evidence)];
  cf.evidence_text = phrase_to_text(p);
  NegatedPhrase n = negate_phrase(p, cf.class_name, dataset.taxonomy);
  cf.negation = n.negation;
  cf.conditional = n.conditional;
  return cf;
}

Counterfactual explain_counterfactual(const Scene& query, const Dataset& dataset,
                                      const CriticModel& model,
                                      std::span<const BigramLM> class_models,
                                      const ExplainConfig& config) {
  int c = counterfactual_class(query, dataset.profiles);
  return counterfactual_evidence(query, c, dataset, model, class_models, config);
}

NegatedPhrase negate_phrase(const AttributePhrase& phrase, const std::string& class_name,
                            const Taxonomy& taxonomy) {
  std::string text = phrase_to_text(phrase);
  if (text.empty()) throw InputError("cannot negate an empty phrase");
  const LexEntry* noun = taxonomy.lookup(phrase.noun);
  std::string object = with_article(text, noun != nullptr && noun->plural);
  return {"this bird does not have " + object,
          "if this bird had been " + with_article(class_name, false) + ", it would have had " + object};
}

std::string render_svg(const Scene& scene, const Taxonomy& taxonomy,
                       std::span<const GroundedPhrase> grounded, const std::string& caption) {
  constexpr double kSize = 400.0;
  constexpr double kTop = 30.0;
  static const char* kColors[] = {"#d62728", "#1f77b4", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kSize << "\" height=\""
     << kSize + kTop << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  os << "<text x=\"4\" y=\"18\" font-size=\"13\">" << escape_xml(caption) << "</text>\n";
  os << "<rect x=\"0\" y=\"" << kTop << "\" width=\"" << kSize << "\" height=\"" << kSize
     << "\" fill=\"#fafafa\" stroke=\"#999\"/>\n";
  for (size_t r = 0; r < scene.regions.size(); ++r) {
    const Box& b = scene.regions[r].box;
    os << "<rect x=\"" << fmt(b.x * kSize) << "\" y=\"" << fmt(kTop + b.y * kSize) << "\" width=\""
       << fmt(b.w * kSize) << "\" height=\"" << fmt(b.h * kSize)
       << "\" fill=\"none\" stroke=\"#ccc\" stroke-dasharray=\"3,2\"/>\n";
    const Point& k = scene.keypoints[r];
    os << "<circle cx=\"" << fmt(k.x * kSize) << "\" cy=\"" << fmt(kTop + k.y * kSize)
       << "\" r=\"2.5\" fill=\"#666\"><title>"
       << escape_xml(taxonomy.parts[static_cast<size_t>(scene.regions[r].part)]) << "</title></circle>\n";
  }
  for (size_t i = 0; i < grounded.size(); ++i) {
    const Box& b = grounded[i].box;
    const char* color = kColors[i % std::size(kColors)];
    os << "<rect x=\"" << fmt(b.x * kSize) << "\" y=\"" << fmt(kTop + b.y * kSize) << "\" width=\""
       << fmt(b.w * kSize) << "\" height=\"" << fmt(b.h * kSize) << "\" fill=\"none\" stroke=\""
       << color << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << fmt(b.x * kSize + 2) << "\" y=\"" << fmt(kTop + b.y * kSize + 12)
       << "\" fill=\"" << color << "\">" << escape_xml(phrase_to_text(grounded[i].phrase))
       << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace phrasecritic
