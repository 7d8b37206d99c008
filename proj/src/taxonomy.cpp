#include "phrasecritic/taxonomy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "phrasecritic/errors.hpp"
#include "phrasecritic/rng.hpp"

namespace phrasecritic {
namespace {

const std::vector<std::string> kColorPool = {"red",   "black", "yellow", "white",
                                             "blue",  "brown", "grey",   "orange",
                                             "green", "purple", "pink",  "olive"};
const std::vector<std::string> kSizePool = {"small", "large", "long", "short", "tiny", "big"};
const std::vector<std::string> kPatternPool = {"speckled", "striped", "spotted",
                                               "plain",    "barred",  "mottled"};
const std::vector<std::string> kPartPool = {"beak", "head", "belly", "eye",
                                            "wing", "feet", "neck",  "body"};

struct Alias {
  const char* token;
  const char* part;
  bool plural;
};
const Alias kAliases[] = {{"bird", "body", false},
                          {"feathers", "body", true},
                          {"face", "head", false},
                          {"bill", "beak", false},
                          {"wings", "wing", true}};

struct FunctionWord {
  const char* token;
  Pos pos;
};
const FunctionWord kFunctionWords[] = {
    {"this", Pos::Det}, {"a", Pos::Det},     {"an", Pos::Det},   {"the", Pos::Det},
    {"its", Pos::Det},  {"is", Pos::Verb},   {"are", Pos::Verb}, {"has", Pos::Verb},
    {"have", Pos::Verb}, {"and", Pos::Conj}, {"with", Pos::Other}};

const std::vector<std::string>& pool(Category c) {
  switch (c) {
    case Category::Color:
      return kColorPool;
    case Category::Size:
      return kSizePool;
    case Category::Pattern:
      return kPatternPool;
    default:
      return kPartPool;
  }
}

}  // namespace

int attribute_slot(Category c) {
  switch (c) {
    case Category::Color:
      return 0;
    case Category::Size:
      return 1;
    case Category::Pattern:
      return 2;
    default:
      return -1;
  }
}

const char* to_string(Pos p) {
  switch (p) {
    case Pos::Noun:
      return "NOUN";
    case Pos::Adj:
      return "ADJ";
    case Pos::Verb:
      return "VERB";
    case Pos::Conj:
      return "CONJ";
    case Pos::Det:
      return "DET";
    case Pos::Other:
      return "OTHER";
  }
  return "OTHER";
}

const char* to_string(Category c) {
  switch (c) {
    case Category::Color:
      return "color";
    case Category::Size:
      return "size";
    case Category::Pattern:
      return "pattern";
    case Category::Part:
      return "part";
    case Category::None:
      return "none";
  }
  return "none";
}

Category category_from_string(std::string_view s) {
  for (Category c : {Category::Color, Category::Size, Category::Pattern, Category::Part}) {
    if (s == to_string(c)) return c;
  }
  return Category::None;
}

const std::vector<std::string>& Taxonomy::tokens(Category c) const {
  if (c == Category::Part) return parts;
  int slot = attribute_slot(c);
  if (slot < 0) throw ConfigError("category has no token list");
  return attributes[static_cast<size_t>(slot)];
}

const LexEntry* Taxonomy::lookup(std::string_view token) const {
  auto it = lexicon.find(token);
  return it == lexicon.end() ? nullptr : &it->second;
}

int Taxonomy::part_index(std::string_view name) const {
  auto it = std::find(parts.begin(), parts.end(), name);
  return it == parts.end() ? -1 : static_cast<int>(it - parts.begin());
}

int Taxonomy::attribute_dim() const {
  int d = num_parts();
  for (const auto& list : attributes) d += static_cast<int>(list.size());
  return d;
}

int Taxonomy::feature_index(Category c, int index) const {
  int offset = 0;
  for (Category a : kAttributeCategories) {
    if (a == c) return offset + index;
    offset += category_size(a);
  }
  if (c == Category::Part) return offset + index;
  return -1;
}

int Taxonomy::feature_index(std::string_view token) const {
  const LexEntry* e = lookup(token);
  if (e == nullptr) return -1;
  if (e->pos == Pos::Noun && e->part >= 0) return feature_index(Category::Part, e->part);
  if (e->pos == Pos::Adj) return feature_index(e->category, e->index);
  return -1;
}

std::string Taxonomy::feature_name(int feature) const {
  int offset = 0;
  for (Category a : kAttributeCategories) {
    int n = category_size(a);
    if (feature < offset + n) return tokens(a)[static_cast<size_t>(feature - offset)];
    offset += n;
  }
  return parts.at(static_cast<size_t>(feature - offset));
}

std::vector<std::string> Taxonomy::vocabulary() const {
  std::vector<std::string> v;
  v.reserve(lexicon.size());
  for (const auto& [token, entry] : lexicon) v.push_back(token);
  return v;
}

void rebuild_lexicon(Taxonomy& t) {
  t.lexicon.clear();
  for (Category c : kAttributeCategories) {
    const auto& list = t.tokens(c);
    for (size_t i = 0; i < list.size(); ++i) {
      LexEntry e;
      e.pos = Pos::Adj;
      e.category = c;
      e.index = static_cast<int>(i);
      if (!t.lexicon.emplace(list[i], e).second) {
        throw ConfigError("attribute token '" + list[i] + "' appears in two categories");
      }
    }
  }
  for (size_t p = 0; p < t.parts.size(); ++p) {
    LexEntry e;
    e.pos = Pos::Noun;
    e.category = Category::Part;
    e.index = static_cast<int>(p);
    e.part = static_cast<int>(p);
    e.plural = t.parts[p] == "feet";
    t.lexicon[t.parts[p]] = e;
  }
  for (const Alias& a : kAliases) {
    int part = t.part_index(a.part);
    LexEntry e;
    e.pos = Pos::Noun;
    e.category = Category::Part;
    e.part = part;
    e.plural = a.plural;
    e.alias = true;
    // "bird" stays a noun even when its part is absent so that the chunker
    // still sees "X bird" as a phrase shape.
    if (part < 0 && std::string_view(a.token) != "bird") continue;
    t.lexicon[a.token] = e;
  }
  for (const FunctionWord& w : kFunctionWords) {
    LexEntry e;
    e.pos = w.pos;
    t.lexicon[w.token] = e;
  }
}

Taxonomy build_taxonomy(const TaxonomyConfig& config, std::uint64_t seed) {
  const std::array<int, 3> counts = {config.colors, config.sizes, config.patterns};
  for (size_t i = 0; i < counts.size(); ++i) {
    Category c = kAttributeCategories[i];
    if (counts[i] < 2) {
      throw ConfigError(std::string("category '") + to_string(c) +
                        "' needs at least 2 tokens to allow flipping");
    }
    if (counts[i] > static_cast<int>(pool(c).size())) {
      throw ConfigError(std::string("category '") + to_string(c) + "' supports at most " +
                        std::to_string(pool(c).size()) + " tokens");
    }
  }
  if (config.parts < 1 || config.parts > static_cast<int>(kPartPool.size())) {
    throw ConfigError("part count must be in [1, 8]");
  }
  if (!(config.kappa_min > 0.0) || !(config.kappa_max >= config.kappa_min)) {
    throw ConfigError("kappa range must be positive and ordered");
  }

  Taxonomy t;
  t.parts.assign(kPartPool.begin(), kPartPool.begin() + config.parts);
  for (size_t i = 0; i < counts.size(); ++i) {
    const auto& src = pool(kAttributeCategories[i]);
    t.attributes[i].assign(src.begin(), src.begin() + counts[i]);
  }

  // Stratified log-uniform scales: every part gets its own stratum of the
  // range so the spread across parts does not depend on seed luck.
  Rng rng = make_rng(seed, {tag("kappa")});
  std::vector<int> strata(static_cast<size_t>(config.parts));
  std::iota(strata.begin(), strata.end(), 0);
  std::shuffle(strata.begin(), strata.end(), rng);
  const double lo = std::log(config.kappa_min);
  const double hi = std::log(config.kappa_max);
  for (int p = 0; p < config.parts; ++p) {
    double u = (strata[static_cast<size_t>(p)] + uniform01(rng)) / config.parts;
    t.kappa.push_back(std::exp(lo + u * (hi - lo)));
  }
  rebuild_lexicon(t);
  return t;
}

}  // namespace phrasecritic
