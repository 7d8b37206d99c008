#include "phrasecritic/negatives.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "phrasecritic/errors.hpp"
#include "phrasecritic/rng.hpp"

namespace phrasecritic {
namespace {

bool phrase_true(const Scene& scene, const Taxonomy& t, int part,
                 std::span<const std::string> adjectives) {
  std::vector<std::pair<Category, int>> attrs;
  for (const auto& a : adjectives) {
    const LexEntry* e = t.lookup(a);
    if (e == nullptr) return false;
    attrs.emplace_back(e->category, e->index);
  }
  return scene_supports(scene, part, attrs);
}

// Phrase-count choices for a sentence with `total` phrases, `flippable` of
// which have at least one flip.
std::vector<int> flip_counts(int total, int flippable) {
  std::vector<int> out;
  int cap = std::min(flippable, total > 1 ? total - 1 : 1);
  for (int c = 1; c <= std::min(2, cap); ++c) out.push_back(c);
  return out;
}

}  // namespace

std::vector<Flip> phrase_flips(const AttributePhrase& phrase, const Taxonomy& taxonomy,
                               const Scene* scene) {
  std::vector<Flip> out;
  for (size_t i = 0; i < phrase.adjectives.size(); ++i) {
    const LexEntry* e = taxonomy.lookup(phrase.adjectives[i]);
    if (e == nullptr || attribute_slot(e->category) < 0) continue;
    for (const auto& tok : taxonomy.tokens(e->category)) {
      if (tok != phrase.adjectives[i]) {
        out.push_back({phrase.adjective_positions[i], phrase.adjectives[i], tok});
      }
    }
  }
  const LexEntry* noun = taxonomy.lookup(phrase.noun);
  if (noun != nullptr && noun->part >= 0) {
    for (int q = 0; q < taxonomy.num_parts(); ++q) {
      if (q == noun->part) continue;
      if (scene != nullptr && phrase_true(*scene, taxonomy, q, phrase.adjectives)) continue;
      out.push_back({phrase.noun_position, phrase.noun, taxonomy.parts[static_cast<size_t>(q)]});
    }
  }
  return out;
}

AttributePhrase flip_phrase(const AttributePhrase& phrase, const Taxonomy& taxonomy,
                            std::uint64_t seed) {
  auto flips = phrase_flips(phrase, taxonomy);
  if (flips.empty()) throw InputError("phrase '" + phrase_to_text(phrase) + "' has no valid flip");
  Rng rng(seed);
  const Flip& f = flips[static_cast<size_t>(uniform_index(rng, static_cast<int>(flips.size())))];
  AttributePhrase out = phrase;
  if (f.position == phrase.noun_position) {
    out.noun = f.replacement;
  } else {
    for (size_t i = 0; i < out.adjectives.size(); ++i) {
      if (out.adjective_positions[i] == f.position) out.adjectives[i] = f.replacement;
    }
  }
  return out;
}

std::uint64_t negative_space(std::span<const std::string> sentence, const Taxonomy& taxonomy,
                             const Scene* scene) {
  auto phrases = extract_phrases(sentence, taxonomy);
  std::vector<std::uint64_t> sizes;
  for (const auto& p : phrases) {
    auto n = phrase_flips(p, taxonomy, scene).size();
    if (n > 0) sizes.push_back(n);
  }
  std::uint64_t space = 0;
  for (int c : flip_counts(static_cast<int>(phrases.size()), static_cast<int>(sizes.size()))) {
    if (c == 1) {
      for (auto s : sizes) space += s;
    } else {
      for (size_t i = 0; i < sizes.size(); ++i) {
        for (size_t j = i + 1; j < sizes.size(); ++j) space += sizes[i] * sizes[j];
      }
    }
  }
  return space;
}

std::vector<Negative> make_negatives(std::span<const std::string> sentence,
                                     const Taxonomy& taxonomy, int k, std::uint64_t seed,
                                     const Scene* scene) {
  if (k < 1) throw ConfigError("k must be >= 1");
  auto phrases = extract_phrases(sentence, taxonomy);
  std::vector<std::vector<Flip>> options;
  for (const auto& p : phrases) {
    auto f = phrase_flips(p, taxonomy, scene);
    if (!f.empty()) options.push_back(std::move(f));
  }
  if (options.empty()) throw InputError("sentence has no flippable phrase");
  const auto counts = flip_counts(static_cast<int>(phrases.size()), static_cast<int>(options.size()));
  const std::uint64_t space = negative_space(sentence, taxonomy, scene);
  const auto want = static_cast<size_t>(std::min<std::uint64_t>(static_cast<std::uint64_t>(k), space));

  auto build = [&](std::vector<Flip> flips) {
    std::sort(flips.begin(), flips.end(),
              [](const Flip& a, const Flip& b) { return a.position < b.position; });
    Negative n{std::vector<std::string>(sentence.begin(), sentence.end()), std::move(flips)};
    for (const auto& f : n.flips) n.tokens[static_cast<size_t>(f.position)] = f.replacement;
    return n;
  };

  std::vector<Negative> out;
  std::set<std::vector<std::string>> seen;
  Rng rng(seed);
  const size_t max_draws = 2000 * want + 1000;
  for (size_t draw = 0; draw < max_draws && out.size() < want; ++draw) {
    int c = counts[static_cast<size_t>(uniform_index(rng, static_cast<int>(counts.size())))];
    std::vector<size_t> which(options.size());
    std::iota(which.begin(), which.end(), 0);
    std::shuffle(which.begin(), which.end(), rng);
    std::vector<Flip> flips;
    for (int i = 0; i < c; ++i) {
      const auto& opts = options[which[static_cast<size_t>(i)]];
      flips.push_back(opts[static_cast<size_t>(uniform_index(rng, static_cast<int>(opts.size())))]);
    }
    Negative n = build(std::move(flips));
    if (seen.insert(n.tokens).second) out.push_back(std::move(n));
  }
  // Small spaces the random draws did not exhaust: fill in enumeration order.
  if (out.size() < want) {
    std::vector<std::vector<Flip>> all;
    for (int c : counts) {
      for (size_t i = 0; i < options.size(); ++i) {
        if (c == 1) {
          for (const auto& f : options[i]) all.push_back({f});
          continue;
        }
        for (size_t j = i + 1; j < options.size(); ++j) {
          for (const auto& a : options[i]) {
            for (const auto& b : options[j]) all.push_back({a, b});
          }
        }
      }
    }
    for (auto& flips : all) {
      if (out.size() >= want) break;
      Negative n = build(std::move(flips));
      if (seen.insert(n.tokens).second) out.push_back(std::move(n));
    }
  }
  return out;
}

std::vector<RankPair> build_rank_pairs(const Dataset& dataset, int k, std::uint64_t seed,
                                       int sentences_per_scene) {
  std::vector<RankPair> pairs;
  std::vector<int> used(dataset.scenes.size(), 0);
  for (size_t i = 0; i < dataset.sentences.size(); ++i) {
    const auto& rec = dataset.sentences[i];
    if (rec.sentence.foil) continue;
    int& u = used.at(static_cast<size_t>(rec.scene_id));
    if (u >= sentences_per_scene) continue;
    ++u;
    const Scene& scene = dataset.scenes[static_cast<size_t>(rec.scene_id)];
    auto negs = make_negatives(rec.sentence.tokens, dataset.taxonomy, k,
                               derive_seed(seed, {tag("negatives"), static_cast<std::uint64_t>(i)}),
                               &scene);
    for (auto& n : negs) {
      pairs.push_back({rec.scene_id, static_cast<int>(i), rec.sentence.tokens, std::move(n.tokens),
                       std::move(n.flips), scene.split});
    }
  }
  return pairs;
}

}  // namespace phrasecritic
