#include "phrasecritic/worldsim.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "phrasecritic/errors.hpp"
#include "phrasecritic/rng.hpp"
#include "phrasecritic/textproc.hpp"

namespace phrasecritic {
namespace {

enum class Piece { Word, Bird, Phrase, Clause };

struct FramePiece {
  Piece kind;
  const char* word = nullptr;
};

// Frame slots: Bird renders "a <adjs> bird" about the body, Phrase renders
// "a <adjs> <part>", Clause renders "<part> is <adj> [and <adj>]".
const std::vector<std::vector<FramePiece>> kFrames = {
    {{Piece::Word, "this"}, {Piece::Word, "is"}, {Piece::Bird}, {Piece::Word, "with"},
     {Piece::Phrase}},
    {{Piece::Word, "this"}, {Piece::Word, "is"}, {Piece::Bird}, {Piece::Word, "with"},
     {Piece::Phrase}, {Piece::Word, "and"}, {Piece::Phrase}},
    {{Piece::Word, "this"}, {Piece::Word, "bird"}, {Piece::Word, "has"}, {Piece::Phrase},
     {Piece::Word, "and"}, {Piece::Phrase}},
    {{Piece::Word, "this"}, {Piece::Word, "bird"}, {Piece::Word, "has"}, {Piece::Phrase},
     {Piece::Phrase}, {Piece::Word, "and"}, {Piece::Phrase}},
    {{Piece::Bird}, {Piece::Word, "with"}, {Piece::Phrase}, {Piece::Phrase},
     {Piece::Word, "and"}, {Piece::Phrase}},
    {{Piece::Word, "this"}, {Piece::Word, "bird"}, {Piece::Word, "has"}, {Piece::Phrase},
     {Piece::Word, "and"}, {Piece::Word, "its"}, {Piece::Clause}},
};

const double kFrameWeights[kNumFrames] = {0.08, 0.03, 0.75, 0.03, 0.02, 0.09};

struct CategoryCombo {
  std::vector<Category> categories;
  double weight;
};
const std::vector<CategoryCombo> kCombos = {
    {{Category::Color}, 0.85},
    {{Category::Size, Category::Color}, 0.07},
    {{Category::Pattern}, 0.02},
    {{Category::Pattern, Category::Color}, 0.06},
};

constexpr int kPaletteSize = 3;
// Mention weights of the three most distinctive parts; the rest weigh 1.
constexpr std::array<double, 3> kSalience = {25.0, 25.0, 25.0};

const char* part_adjective(std::string_view part) {
  if (part == "beak") return "billed";
  if (part == "head") return "headed";
  if (part == "belly") return "bellied";
  if (part == "eye") return "eyed";
  if (part == "wing") return "winged";
  if (part == "feet") return "footed";
  if (part == "neck") return "necked";
  return "bodied";
}

const char* kBirdNouns[] = {"finch",   "warbler", "tanager",    "sparrow", "grebe",
                            "auklet",  "cormorant", "kingfisher", "wren",  "thrush",
                            "oriole",  "vireo",   "flycatcher", "bunting", "gull",
                            "tern",    "swallow", "jay",        "plover",  "heron"};

struct LayoutPrior {
  const char* part;
  Box mean;
};
const LayoutPrior kLayout[] = {
    {"beak", {0.78, 0.20, 0.12, 0.06}},  {"head", {0.58, 0.08, 0.24, 0.22}},
    {"belly", {0.38, 0.52, 0.26, 0.18}}, {"eye", {0.68, 0.14, 0.06, 0.06}},
    {"wing", {0.28, 0.36, 0.32, 0.18}},  {"feet", {0.42, 0.80, 0.16, 0.12}},
    {"neck", {0.54, 0.28, 0.14, 0.12}},  {"body", {0.22, 0.32, 0.46, 0.36}},
};

Box layout_mean(std::string_view part) {
  for (const auto& l : kLayout) {
    if (part == l.part) return l.mean;
  }
  return {0.25, 0.25, 0.5, 0.5};
}

int weighted_pick(Rng& rng, std::span<const double> weights) {
  double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  double r = uniform01(rng) * total;
  for (size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    r -= weights[i];
    if (r < 0.0) return static_cast<int>(i);
  }
  for (size_t i = weights.size(); i-- > 0;) {
    if (weights[i] > 0.0) return static_cast<int>(i);
  }
  return -1;
}

std::string article_for(const std::string& next) {
  return (!next.empty() && std::string_view("aeiou").find(next[0]) != std::string_view::npos)
             ? "an"
             : "a";
}

void render_adjectives(const Mention& m, const Taxonomy& t, std::vector<std::string>& out) {
  for (const auto& [cat, idx] : m.attributes) out.push_back(t.tokens(cat).at(static_cast<size_t>(idx)));
}

void render_phrase(const Mention& m, const Taxonomy& t, std::string noun,
                   std::vector<std::string>& out) {
  std::vector<std::string> words;
  render_adjectives(m, t, words);
  words.push_back(noun);
  const LexEntry* e = t.lookup(noun);
  if (!(e && e->plural)) out.push_back(article_for(words.front()));
  out.insert(out.end(), words.begin(), words.end());
}

void render_clause(const Mention& m, const Taxonomy& t, std::vector<std::string>& out) {
  const std::string& noun = t.parts.at(static_cast<size_t>(m.part));
  const LexEntry* e = t.lookup(noun);
  out.push_back(noun);
  out.push_back(e && e->plural ? "are" : "is");
  std::vector<std::string> adjs;
  render_adjectives(m, t, adjs);
  for (size_t i = 0; i < adjs.size(); ++i) {
    if (i) out.push_back("and");
    out.push_back(adjs[i]);
  }
}

}  // namespace

int profile_distance(const ClassProfile& a, const ClassProfile& b) {
  int d = 0;
  size_t n = std::min(a.attributes.size(), b.attributes.size());
  for (size_t p = 0; p < n; ++p) {
    for (int c = 0; c < kNumAttributeCategories; ++c) d += a.attributes[p][c] != b.attributes[p][c];
  }
  return d;
}

const char* to_string(Split s) {
  switch (s) {
    case Split::Train:
      return "train";
    case Split::Val:
      return "val";
    case Split::Test:
      return "test";
  }
  return "train";
}

Split split_from_string(std::string_view s) {
  if (s == "train") return Split::Train;
  if (s == "val") return Split::Val;
  if (s == "test") return Split::Test;
  throw FormatError("unknown split '" + std::string(s) + "'");
}

const Region* Scene::region_for_part(int part) const {
  int i = region_index_for_part(part);
  return i < 0 ? nullptr : &regions[static_cast<size_t>(i)];
}

int Scene::region_index_for_part(int part) const {
  for (size_t i = 0; i < regions.size(); ++i) {
    if (regions[i].part == part) return static_cast<int>(i);
  }
  return -1;
}

int attribute_distance(const Scene& scene, const ClassProfile& profile) {
  int d = 0;
  for (const auto& r : scene.regions) {
    const auto& want = profile.attributes.at(static_cast<size_t>(r.part));
    for (int c = 0; c < kNumAttributeCategories; ++c) d += r.attributes[c] != want[c];
  }
  return d;
}

int attribute_distance(const Scene& a, const Scene& b) {
  int d = 0;
  for (const auto& r : a.regions) {
    const Region* o = b.region_for_part(r.part);
    if (o == nullptr) {
      d += kNumAttributeCategories;
      continue;
    }
    for (int c = 0; c < kNumAttributeCategories; ++c) d += r.attributes[c] != o->attributes[c];
  }
  return d;
}

bool scene_supports(const Scene& scene, int part,
                    std::span<const std::pair<Category, int>> attributes) {
  for (const auto& r : scene.regions) {
    if (r.part != part) continue;
    bool all = std::all_of(attributes.begin(), attributes.end(), [&](const auto& a) {
      int slot = attribute_slot(a.first);
      return slot >= 0 && r.attributes[static_cast<size_t>(slot)] == a.second;
    });
    if (all) return true;
  }
  return false;
}

Sentence Sentence::corrected() const {
  Sentence s{tokens, std::nullopt};
  if (foil) s.tokens.at(static_cast<size_t>(foil->index)) = foil->original;
  return s;
}

std::vector<const Sentence*> Dataset::ground_truth(int scene_id) const {
  std::vector<const Sentence*> out;
  for (const auto& r : sentences) {
    if (r.scene_id == scene_id && !r.sentence.foil) out.push_back(&r.sentence);
  }
  return out;
}

std::vector<const Sentence*> Dataset::foils(int scene_id) const {
  std::vector<const Sentence*> out;
  for (const auto& r : sentences) {
    if (r.scene_id == scene_id && r.sentence.foil) out.push_back(&r.sentence);
  }
  return out;
}

int frame_mentions(int frame) {
  int n = 0;
  for (const auto& p : kFrames.at(static_cast<size_t>(frame))) n += p.kind != Piece::Word;
  return n;
}

bool frame_needs_body(int frame) {
  const auto& pieces = kFrames.at(static_cast<size_t>(frame));
  return std::any_of(pieces.begin(), pieces.end(),
                     [](const FramePiece& p) { return p.kind == Piece::Bird; });
}

std::vector<std::string> render_frame(int frame, std::span<const Mention> mentions,
                                      const Taxonomy& taxonomy) {
  const auto& pieces = kFrames.at(static_cast<size_t>(frame));
  std::vector<std::string> out;
  size_t next = 0;
  for (const auto& piece : pieces) {
    switch (piece.kind) {
      case Piece::Word:
        out.emplace_back(piece.word);
        break;
      case Piece::Bird:
        render_phrase(mentions[next++], taxonomy, "bird", out);
        break;
      case Piece::Phrase: {
        const Mention& m = mentions[next++];
        render_phrase(m, taxonomy, taxonomy.parts.at(static_cast<size_t>(m.part)), out);
        break;
      }
      case Piece::Clause:
        render_clause(mentions[next++], taxonomy, out);
        break;
    }
  }
  for (; next < mentions.size(); ++next) {
    out.emplace_back("and");
    const Mention& m = mentions[next];
    render_phrase(m, taxonomy, taxonomy.parts.at(static_cast<size_t>(m.part)), out);
  }
  return out;
}

MentionPlan sample_mention_plan(const Taxonomy& taxonomy, std::uint64_t seed,
                                std::span<const double> part_weights) {
  Rng rng(seed);
  const int body = taxonomy.part_index("body");
  std::vector<double> frame_w(kFrameWeights, kFrameWeights + kNumFrames);
  for (int f = 0; f < kNumFrames; ++f) {
    if (frame_mentions(f) > taxonomy.num_parts() || (frame_needs_body(f) && body < 0)) {
      frame_w[static_cast<size_t>(f)] = 0.0;
    }
  }
  MentionPlan plan;
  plan.frame = weighted_pick(rng, frame_w);
  if (plan.frame < 0) throw InputError("no sentence frame fits this taxonomy");

  std::vector<double> pw(static_cast<size_t>(taxonomy.num_parts()), 1.0);
  if (!part_weights.empty()) pw.assign(part_weights.begin(), part_weights.end());
  std::vector<int> parts;
  if (frame_needs_body(plan.frame)) {
    parts.push_back(body);
    pw[static_cast<size_t>(body)] = 0.0;
  }
  while (static_cast<int>(parts.size()) < frame_mentions(plan.frame)) {
    int p = weighted_pick(rng, pw);
    if (p < 0) throw InputError("not enough parts for sentence frame");
    parts.push_back(p);
    pw[static_cast<size_t>(p)] = 0.0;
  }

  // Parts are described in a fixed anatomical order after the body.
  std::sort(parts.begin() + (frame_needs_body(plan.frame) ? 1 : 0), parts.end());

  std::vector<double> combo_w;
  for (const auto& c : kCombos) combo_w.push_back(c.weight);
  for (int p : parts) {
    Mention m;
    m.part = p;
    for (Category c : kCombos[static_cast<size_t>(weighted_pick(rng, combo_w))].categories) {
      m.attributes.emplace_back(c, -1);
    }
    plan.mentions.push_back(std::move(m));
  }
  return plan;
}

std::vector<ClassProfile> sample_class_profiles(const Taxonomy& taxonomy, int num_classes,
                                                std::uint64_t seed, double noise) {
  if (num_classes < 2) throw ConfigError("need at least 2 classes");
  constexpr int kMaxTries = 1000;
  Rng rng = make_rng(seed, {tag("profiles")});
  std::vector<ClassProfile> profiles;
  for (int c = 0; c < num_classes; ++c) {
    bool placed = false;
    for (int attempt = 0; attempt < kMaxTries && !placed; ++attempt) {
      ClassProfile prof;
      prof.id = c;
      prof.noise = noise;
      // Colors come from a small per-class palette, as a species shows only
      // a few colors across its parts.
      const int num_colors = taxonomy.category_size(Category::Color);
      std::vector<int> palette(static_cast<size_t>(num_colors));
      std::iota(palette.begin(), palette.end(), 0);
      std::shuffle(palette.begin(), palette.end(), rng);
      palette.resize(static_cast<size_t>(std::min(kPaletteSize, num_colors)));
      for (int p = 0; p < taxonomy.num_parts(); ++p) {
        AttributeSet a{};
        a[0] = palette[static_cast<size_t>(uniform_index(rng, static_cast<int>(palette.size())))];
        for (int k = 1; k < kNumAttributeCategories; ++k) {
          a[static_cast<size_t>(k)] = uniform_index(rng, taxonomy.category_size(kAttributeCategories[static_cast<size_t>(k)]));
        }
        prof.attributes.push_back(a);
      }
      placed = std::all_of(profiles.begin(), profiles.end(), [&](const ClassProfile& o) {
        return profile_distance(prof, o) >= 2;
      });
      if (placed) profiles.push_back(std::move(prof));
    }
    if (!placed) {
      throw GenerationError("could not place class " + std::to_string(c) +
                            " at profile distance >= 2 after " + std::to_string(kMaxTries) +
                            " tries; attribute space too small");
    }
  }

  // Salient parts are those whose attributes are shared by the fewest other
  // classes; they are mentioned more often, as discriminative descriptions are.
  // Sharing is weighted by how often a category is mentioned at all.
  constexpr std::array<double, kNumAttributeCategories> kMentionWeight = {1.0, 0.1, 0.1};
  const int parts = taxonomy.num_parts();
  const int salient = std::min(3, parts);
  for (auto& prof : profiles) {
    std::vector<std::pair<double, int>> sharing;  // (weighted shared count, part)
    for (int p = 0; p < parts; ++p) {
      double shared = 0.0;
      for (const auto& o : profiles) {
        if (o.id == prof.id) continue;
        for (int k = 0; k < kNumAttributeCategories; ++k) {
          if (o.attributes[static_cast<size_t>(p)][static_cast<size_t>(k)] ==
              prof.attributes[static_cast<size_t>(p)][static_cast<size_t>(k)]) {
            shared += kMentionWeight[static_cast<size_t>(k)];
          }
        }
      }
      sharing.emplace_back(shared, p);
    }
    std::sort(sharing.begin(), sharing.end());
    prof.salience.assign(static_cast<size_t>(parts), 1.0);
    for (int i = 0; i < salient; ++i) {
      prof.salience[static_cast<size_t>(sharing[static_cast<size_t>(i)].second)] =
          kSalience[static_cast<size_t>(i)];
    }

    int top = sharing.front().second;
    const std::string& color =
        taxonomy.tokens(Category::Color)[static_cast<size_t>(prof.attributes[static_cast<size_t>(top)][0])];
    prof.name = color + " " + part_adjective(taxonomy.parts[static_cast<size_t>(top)]) + " " +
                kBirdNouns[prof.id % 20];
    if (prof.id >= 20) prof.name += " " + std::to_string(prof.id / 20 + 1);
  }
  return profiles;
}

Scene render_scene(const ClassProfile& profile, const Taxonomy& taxonomy, double noise,
                   std::uint64_t seed, int scene_id) {
  if (!(noise >= 0.0 && noise <= 1.0)) throw ConfigError("noise rate must be in [0, 1]");
  Rng rng(seed);
  std::normal_distribution<double> jitter(0.0, 1.0);
  Scene s;
  s.id = scene_id;
  s.class_id = profile.id;
  for (int p = 0; p < taxonomy.num_parts(); ++p) {
    Region r;
    r.part = p;
    Box mean = layout_mean(taxonomy.parts[static_cast<size_t>(p)]);
    Box b;
    b.w = std::clamp(mean.w * (1.0 + 0.1 * jitter(rng)), 0.02, 1.0);
    b.h = std::clamp(mean.h * (1.0 + 0.1 * jitter(rng)), 0.02, 1.0);
    b.x = std::clamp(mean.x + 0.03 * jitter(rng), 0.0, 1.0 - b.w);
    b.y = std::clamp(mean.y + 0.03 * jitter(rng), 0.0, 1.0 - b.h);
    r.box = b;
    r.attributes = profile.attributes.at(static_cast<size_t>(p));
    for (int k = 0; k < kNumAttributeCategories; ++k) {
      if (uniform01(rng) < noise) {
        r.attributes[static_cast<size_t>(k)] =
            uniform_index(rng, taxonomy.category_size(kAttributeCategories[static_cast<size_t>(k)]));
      }
    }
    Point c = b.center();
    std::uniform_real_distribution<double> dx(-0.25 * b.w, 0.25 * b.w);
    std::uniform_real_distribution<double> dy(-0.25 * b.h, 0.25 * b.h);
    s.keypoints.push_back({c.x + dx(rng), c.y + dy(rng)});
    s.regions.push_back(r);
  }
  return s;
}

Sentence ground_truth_sentence(const Scene& scene, const Taxonomy& taxonomy, std::uint64_t seed,
                               std::span<const double> part_weights) {
  if (scene.regions.size() < 2) throw InputError("ground-truth sentence needs >= 2 regions");
  // Only parts present in the scene can be mentioned.
  std::vector<double> w(static_cast<size_t>(taxonomy.num_parts()), 0.0);
  for (const auto& r : scene.regions) {
    w[static_cast<size_t>(r.part)] =
        part_weights.empty() ? 1.0 : part_weights[static_cast<size_t>(r.part)];
  }
  MentionPlan plan = sample_mention_plan(taxonomy, seed, w);
  for (auto& m : plan.mentions) {
    const Region* r = scene.region_for_part(m.part);
    for (auto& [cat, idx] : m.attributes) idx = r->attributes[static_cast<size_t>(attribute_slot(cat))];
  }
  return Sentence{render_frame(plan.frame, plan.mentions, taxonomy), std::nullopt};
}

Sentence make_foil_sentence(const Sentence& sentence, const Taxonomy& taxonomy,
                            std::uint64_t seed) {
  std::vector<int> positions;
  for (size_t i = 0; i < sentence.tokens.size(); ++i) {
    const LexEntry* e = taxonomy.lookup(sentence.tokens[i]);
    if (e == nullptr) continue;
    bool attr = e->pos == Pos::Adj && attribute_slot(e->category) >= 0;
    bool part = e->pos == Pos::Noun && !e->alias && taxonomy.num_parts() >= 2;
    if (attr || part) positions.push_back(static_cast<int>(i));
  }
  if (positions.empty()) throw InputError("sentence has no attribute or part token to foil");

  Rng rng = make_rng(seed, {tag("foil")});
  int pos = positions[static_cast<size_t>(uniform_index(rng, static_cast<int>(positions.size())))];
  const std::string& original = sentence.tokens[static_cast<size_t>(pos)];
  const LexEntry* e = taxonomy.lookup(original);
  const auto& pool = taxonomy.tokens(e->category);
  int pick = uniform_index(rng, static_cast<int>(pool.size()) - 1);
  if (pick >= e->index) ++pick;

  Sentence foil = sentence;
  foil.tokens[static_cast<size_t>(pos)] = pool[static_cast<size_t>(pick)];
  foil.foil = FoilMark{pos, original};
  return foil;
}

Dataset generate_dataset(const DatasetConfig& config, std::uint64_t seed) {
  const double fsum = config.train_fraction + config.val_fraction + config.test_fraction;
  if (config.train_fraction < 0 || config.val_fraction < 0 || config.test_fraction < 0 ||
      std::abs(fsum - 1.0) > 1e-9) {
    throw ConfigError("split fractions must be non-negative and sum to 1");
  }
  if (config.scenes_per_class < 1) throw ConfigError("scenes_per_class must be >= 1");
  if (config.sentences_per_scene < 1) throw ConfigError("sentences_per_scene must be >= 1");
  if (config.foils_per_scene < 0 || config.foils_per_scene > config.sentences_per_scene) {
    throw ConfigError("foils_per_scene must be in [0, sentences_per_scene]");
  }

  Dataset d;
  d.config = config;
  d.seed = seed;
  d.taxonomy = build_taxonomy(config.taxonomy, derive_seed(seed, {tag("taxonomy")}));
  d.profiles = sample_class_profiles(d.taxonomy, config.num_classes,
                                     derive_seed(seed, {tag("profiles")}), config.noise);

  const int n = config.scenes_per_class;
  const int n_train = static_cast<int>(std::lround(n * config.train_fraction));
  const int n_val = std::min(n - n_train, static_cast<int>(std::lround(n * config.val_fraction)));
  for (const auto& prof : d.profiles) {
    std::vector<int> order(static_cast<size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    Rng split_rng = make_rng(seed, {tag("split"), static_cast<std::uint64_t>(prof.id)});
    std::shuffle(order.begin(), order.end(), split_rng);
    std::vector<Split> split_of(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
      int j = order[static_cast<size_t>(i)];
      split_of[static_cast<size_t>(j)] =
          i < n_train ? Split::Train : (i < n_train + n_val ? Split::Val : Split::Test);
    }
    for (int j = 0; j < n; ++j) {
      int id = prof.id * n + j;
      Scene s = render_scene(prof, d.taxonomy, config.noise,
                             derive_seed(seed, {tag("scene"), static_cast<std::uint64_t>(id)}), id);
      s.split = split_of[static_cast<size_t>(j)];
      d.scenes.push_back(std::move(s));
    }
  }

  for (const auto& scene : d.scenes) {
    const auto& prof = d.profiles[static_cast<size_t>(scene.class_id)];
    const auto sid = static_cast<std::uint64_t>(scene.id);
    std::vector<Sentence> gt;
    for (int j = 0; j < config.sentences_per_scene; ++j) {
      gt.push_back(ground_truth_sentence(
          scene, d.taxonomy, derive_seed(seed, {tag("gt"), sid, static_cast<std::uint64_t>(j)}),
          prof.salience));
    }
    for (auto& g : gt) d.sentences.push_back({scene.id, g});

    for (int f = 0; f < config.foils_per_scene; ++f) {
      const Sentence& src = gt[static_cast<size_t>(f)];
      bool made = false;
      for (std::uint64_t attempt = 0; attempt < 64 && !made; ++attempt) {
        Sentence foil = make_foil_sentence(
            src, d.taxonomy, derive_seed(seed, {tag("foil"), sid, static_cast<std::uint64_t>(f), attempt}));
        // A foil must actually be wrong about the scene.
        auto phrases = extract_phrases(foil.tokens, d.taxonomy);
        bool all_true = std::all_of(phrases.begin(), phrases.end(), [&](const AttributePhrase& p) {
          const LexEntry* noun = d.taxonomy.lookup(p.noun);
          std::vector<std::pair<Category, int>> attrs;
          for (const auto& a : p.adjectives) {
            const LexEntry* e = d.taxonomy.lookup(a);
            attrs.emplace_back(e->category, e->index);
          }
          return noun && noun->part >= 0 && scene_supports(scene, noun->part, attrs);
        });
        if (all_true) continue;
        d.sentences.push_back({scene.id, std::move(foil)});
        made = true;
      }
      if (!made) {
        throw GenerationError("could not build a wrong foil for scene " + std::to_string(scene.id));
      }
    }
  }
  return d;
}

}  // namespace phrasecritic
