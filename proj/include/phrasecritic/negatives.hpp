#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "phrasecritic/textproc.hpp"
#include "phrasecritic/worldsim.hpp"

namespace phrasecritic {

// One within-category substitution at a sentence position.
struct Flip {
  int position = 0;
  std::string original;
  std::string replacement;
  bool operator==(const Flip&) const = default;
};

// Valid flips of one phrase: every adjective to another token of its
// category, and the head noun to any other canonical part. When a scene is
// given, noun flips that leave the phrase true of the scene are dropped.
std::vector<Flip> phrase_flips(const AttributePhrase& phrase, const Taxonomy& taxonomy,
                               const Scene* scene = nullptr);

// Applies one uniformly chosen valid flip. Throws InputError if none exists.
AttributePhrase flip_phrase(const AttributePhrase& phrase, const Taxonomy& taxonomy,
                            std::uint64_t seed);

struct Negative {
  std::vector<std::string> tokens;
  std::vector<Flip> flips;
  bool operator==(const Negative&) const = default;
};

// Number of distinct negatives make_negatives can produce.
std::uint64_t negative_space(std::span<const std::string> sentence, const Taxonomy& taxonomy,
                             const Scene* scene = nullptr);

// Up to k distinct negatives, each flipping one or two phrases (count drawn
// uniformly) while leaving at least one phrase intact when the sentence has
// more than one. Returns min(k, negative_space()) negatives.
std::vector<Negative> make_negatives(std::span<const std::string> sentence,
                                     const Taxonomy& taxonomy, int k, std::uint64_t seed,
                                     const Scene* scene = nullptr);

struct RankPair {
  int scene_id = 0;
  int sentence = 0;  // index into Dataset::sentences
  std::vector<std::string> positive;
  std::vector<std::string> negative;
  std::vector<Flip> flips;
  Split split = Split::Train;
  bool operator==(const RankPair&) const = default;
};

// k pairs for each of the first `sentences_per_scene` ground-truth sentences
// of every scene. Negatives are checked against the scene so none is true.
std::vector<RankPair> build_rank_pairs(const Dataset& dataset, int k, std::uint64_t seed,
                                       int sentences_per_scene = 1);

}  // namespace phrasecritic
