#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "phrasecritic/taxonomy.hpp"

namespace phrasecritic {

struct TaggedToken {
  std::string text;
  Pos pos = Pos::Other;
  Category category = Category::None;

  bool operator==(const TaggedToken&) const = default;
};

// An adjective list plus head noun extracted from a sentence. Pattern
// "NOUN VERB ADJ" is normalized into the same shape as "ADJ... NOUN".
struct AttributePhrase {
  std::vector<std::string> adjectives;
  std::vector<Category> categories;  // one per adjective
  std::string noun;
  int span_begin = 0;  // [span_begin, span_end) in the source token list
  int span_end = 0;
  std::vector<int> adjective_positions;
  int noun_position = 0;

  // Same adjectives and noun, regardless of where they came from.
  bool same_content(const AttributePhrase& other) const {
    return adjectives == other.adjectives && noun == other.noun;
  }
  bool operator==(const AttributePhrase&) const = default;
};

// Lowercases and splits on whitespace and punctuation; punctuation is dropped.
std::vector<std::string> tokenize(std::string_view text);

std::vector<TaggedToken> pos_tag(std::span<const std::string> tokens, const Taxonomy& taxonomy);

// Left-to-right, longest-match, non-overlapping extraction of
//   A: NOUN VERB ADJ (CONJ? ADJ)*   (only when the adjectives do not run into a noun)
//   B: ADJ (CONJ? ADJ)* NOUN
std::vector<AttributePhrase> chunk_attribute_phrases(std::span<const TaggedToken> tagged);

// Convenience: pos_tag followed by chunk_attribute_phrases.
std::vector<AttributePhrase> extract_phrases(std::span<const std::string> tokens,
                                             const Taxonomy& taxonomy);

// "red orange head"
std::string phrase_to_text(const AttributePhrase& phrase);

std::string join_tokens(std::span<const std::string> tokens);

}  // namespace phrasecritic
