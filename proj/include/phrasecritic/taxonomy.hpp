#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace phrasecritic {

enum class Pos { Noun, Adj, Verb, Conj, Det, Other };

enum class Category { None, Color, Size, Pattern, Part };

// Attribute categories that live on a region, in feature order.
inline constexpr std::array<Category, 3> kAttributeCategories = {
    Category::Color, Category::Size, Category::Pattern};
inline constexpr int kNumAttributeCategories = 3;

// Slot of an attribute category in kAttributeCategories, -1 otherwise.
int attribute_slot(Category c);

const char* to_string(Pos p);
const char* to_string(Category c);
Category category_from_string(std::string_view s);

struct LexEntry {
  Pos pos = Pos::Other;
  Category category = Category::None;
  int index = -1;  // position inside the category list (attributes, parts)
  int part = -1;   // canonical part for nouns, including aliases
  bool plural = false;
  bool alias = false;  // noun that names a part without being its canonical token

  bool operator==(const LexEntry&) const = default;
};

struct TaxonomyConfig {
  int colors = 8;
  int sizes = 4;
  int patterns = 4;
  int parts = 8;
  double kappa_min = 0.3;
  double kappa_max = 3.0;
};

class Taxonomy {
 public:
  std::vector<std::string> parts;
  std::array<std::vector<std::string>, kNumAttributeCategories> attributes;
  // Per-part raw-score scale of the synthetic grounder.
  std::vector<double> kappa;
  std::map<std::string, LexEntry, std::less<>> lexicon;

  int num_parts() const { return static_cast<int>(parts.size()); }
  const std::vector<std::string>& tokens(Category c) const;
  int category_size(Category c) const { return static_cast<int>(tokens(c).size()); }

  const LexEntry* lookup(std::string_view token) const;
  int part_index(std::string_view name) const;  // canonical names only, -1 if absent

  // Indicator space shared by phrase embeddings and region features:
  // colors, sizes, patterns, then parts.
  int attribute_dim() const;
  int feature_index(Category c, int index) const;
  // Feature index of an attribute token or (possibly aliased) noun, -1 otherwise.
  int feature_index(std::string_view token) const;
  std::string feature_name(int feature) const;

  // Lexicon tokens in sorted order.
  std::vector<std::string> vocabulary() const;

  bool operator==(const Taxonomy&) const = default;
};

// Builds the closed-vocabulary taxonomy. Throws ConfigError when an attribute
// category has fewer than two tokens or more than the pool provides.
Taxonomy build_taxonomy(const TaxonomyConfig& config, std::uint64_t seed);

// Rebuilds the lexicon from parts and attribute lists (used after loading).
void rebuild_lexicon(Taxonomy& taxonomy);

}  // namespace phrasecritic
