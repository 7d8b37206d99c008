#include "phrasecritic/textproc.hpp"

#include <cctype>

namespace phrasecritic {
namespace {

// Extends an adjective run starting at `i` over ADJ and CONJ ADJ.
// Returns one past the last adjective; appends adjective positions.
size_t adjective_run(std::span<const TaggedToken> t, size_t i, std::vector<int>& positions) {
  size_t k = i;
  while (k < t.size()) {
    if (t[k].pos == Pos::Adj) {
      positions.push_back(static_cast<int>(k));
      ++k;
    } else if (t[k].pos == Pos::Conj && k + 1 < t.size() && t[k + 1].pos == Pos::Adj &&
               !positions.empty()) {
      positions.push_back(static_cast<int>(k + 1));
      k += 2;
    } else {
      break;
    }
  }
  return k;
}

AttributePhrase make_phrase(std::span<const TaggedToken> t, const std::vector<int>& adjectives,
                            size_t noun, size_t begin, size_t end) {
  AttributePhrase p;
  for (int a : adjectives) {
    p.adjectives.push_back(t[static_cast<size_t>(a)].text);
    p.categories.push_back(t[static_cast<size_t>(a)].category);
  }
  p.adjective_positions = adjectives;
  p.noun = t[noun].text;
  p.noun_position = static_cast<int>(noun);
  p.span_begin = static_cast<int>(begin);
  p.span_end = static_cast<int>(end);
  return p;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c)) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::vector<TaggedToken> pos_tag(std::span<const std::string> tokens, const Taxonomy& taxonomy) {
  std::vector<TaggedToken> out;
  out.reserve(tokens.size());
  for (const auto& tok : tokens) {
    TaggedToken t{tok, Pos::Other, Category::None};
    if (const LexEntry* e = taxonomy.lookup(tok)) {
      t.pos = e->pos;
      t.category = e->category;
    }
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<AttributePhrase> chunk_attribute_phrases(std::span<const TaggedToken> t) {
  std::vector<AttributePhrase> phrases;
  size_t i = 0;
  while (i < t.size()) {
    if (t[i].pos == Pos::Adj) {
      std::vector<int> adjs;
      size_t k = adjective_run(t, i, adjs);
      if (k < t.size() && t[k].pos == Pos::Noun) {
        phrases.push_back(make_phrase(t, adjs, k, i, k + 1));
        i = k + 1;
        continue;
      }
    } else if (t[i].pos == Pos::Noun && i + 2 < t.size() && t[i + 1].pos == Pos::Verb &&
               t[i + 2].pos == Pos::Adj) {
      std::vector<int> adjs;
      size_t k = adjective_run(t, i + 2, adjs);
      // "bird has red wings": the adjectives belong to the following noun.
      if (!(k < t.size() && t[k].pos == Pos::Noun)) {
        phrases.push_back(make_phrase(t, adjs, i, i, k));
        i = k;
        continue;
      }
    }
    ++i;
  }
  return phrases;
}

std::vector<AttributePhrase> extract_phrases(std::span<const std::string> tokens,
                                             const Taxonomy& taxonomy) {
  auto tagged = pos_tag(tokens, taxonomy);
  return chunk_attribute_phrases(tagged);
}

std::string phrase_to_text(const AttributePhrase& phrase) {
  std::string s;
  for (const auto& a : phrase.adjectives) {
    s += a;
    s += ' ';
  }
  s += phrase.noun;
  return s;
}

std::string join_tokens(std::span<const std::string> tokens) {
  std::string s;
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (i) s += ' ';
    s += tokens[i];
  }
  return s;
}

}  // namespace phrasecritic
