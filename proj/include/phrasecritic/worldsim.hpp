#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "phrasecritic/taxonomy.hpp"

namespace phrasecritic {

struct Point {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point&) const = default;
};

// Axis-aligned box on the unit canvas, (x_min, y_min, width, height); y grows
// downward so small y is high on the canvas.
struct Box {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  // Closed containment: points on an edge are inside.
  bool contains(Point p) const {
    return p.x >= x && p.x <= x + w && p.y >= y && p.y <= y + h;
  }
  Point center() const { return {x + 0.5 * w, y + 0.5 * h}; }
  bool within_canvas() const {
    return x >= 0.0 && y >= 0.0 && w >= 0.0 && h >= 0.0 && x + w <= 1.0 && y + h <= 1.0;
  }
  bool operator==(const Box&) const = default;
};

// Token index per attribute category (color, size, pattern).
using AttributeSet = std::array<int, kNumAttributeCategories>;

struct ClassProfile {
  int id = 0;
  std::string name;
  std::vector<AttributeSet> attributes;  // per part
  std::vector<double> salience;          // per part, mention weight
  double noise = 0.0;

  bool operator==(const ClassProfile&) const = default;
};

// Number of differing (part, category) assignments.
int profile_distance(const ClassProfile& a, const ClassProfile& b);

enum class Split { Train, Val, Test };
const char* to_string(Split s);
Split split_from_string(std::string_view s);

struct Region {
  int part = 0;
  Box box;
  AttributeSet attributes{};

  bool operator==(const Region&) const = default;
};

struct Scene {
  int id = 0;
  int class_id = 0;
  std::vector<Region> regions;
  std::vector<Point> keypoints;  // one per region, same order
  Split split = Split::Train;

  const Region* region_for_part(int part) const;
  int region_index_for_part(int part) const;
  bool operator==(const Scene&) const = default;
};

// Distance between a scene's true attributes and a profile / another scene.
int attribute_distance(const Scene& scene, const ClassProfile& profile);
int attribute_distance(const Scene& a, const Scene& b);

// True when the scene has a region of `part` whose attributes include every
// listed attribute feature (category, index).
bool scene_supports(const Scene& scene, int part,
                    std::span<const std::pair<Category, int>> attributes);

struct FoilMark {
  int index = 0;
  std::string original;
  bool operator==(const FoilMark&) const = default;
};

struct Sentence {
  std::vector<std::string> tokens;
  std::optional<FoilMark> foil;

  // Applies the recorded correction; identity for non-foil sentences.
  Sentence corrected() const;
  bool operator==(const Sentence&) const = default;
};

struct SentenceRecord {
  int scene_id = 0;
  Sentence sentence;
  bool operator==(const SentenceRecord&) const = default;
};

struct GrounderConfig {
  std::uint64_t seed = 0;
  double score_sigma = 0.05;
  double feature_noise = 0.0;
  bool operator==(const GrounderConfig&) const = default;
};

struct DatasetConfig {
  TaxonomyConfig taxonomy;
  int num_classes = 20;
  int scenes_per_class = 150;
  double noise = 0.15;
  int sentences_per_scene = 10;
  int foils_per_scene = 2;
  double train_fraction = 0.7;
  double val_fraction = 0.1;
  double test_fraction = 0.2;
  GrounderConfig grounder;
};

struct Dataset {
  DatasetConfig config;
  std::uint64_t seed = 0;
  Taxonomy taxonomy;
  std::vector<ClassProfile> profiles;
  std::vector<Scene> scenes;  // scenes[i].id == i
  std::vector<SentenceRecord> sentences;

  // Ground-truth (non-foil) sentences of a scene, in dataset order.
  std::vector<const Sentence*> ground_truth(int scene_id) const;
  std::vector<const Sentence*> foils(int scene_id) const;
};

// ---- sentence frames shared by ground-truth and candidate generation ----

// One mentioned part with its adjectives, in rendering order.
struct Mention {
  int part = 0;
  std::vector<std::pair<Category, int>> attributes;
};

inline constexpr int kNumFrames = 6;

// Number of mentions frame `frame` takes; the first mention of frames that
// open with "a <adj> bird" must be the body.
int frame_mentions(int frame);
bool frame_needs_body(int frame);

// Renders a frame; mentions beyond the frame's slots are appended as
// "and a <adj> <part>" (used for repeated, disfluent mentions).
std::vector<std::string> render_frame(int frame, std::span<const Mention> mentions,
                                      const Taxonomy& taxonomy);

// A frame plus the parts and adjective categories it will mention; attribute
// values are filled in by the caller (scene truth, class prior...).
struct MentionPlan {
  int frame = 0;
  std::vector<Mention> mentions;
};

// Samples a frame, distinct parts (weighted by `part_weights`, uniform when
// empty) and an adjective-category combination per mention. Mention
// attribute indices are left at -1. Throws InputError when no frame fits.
MentionPlan sample_mention_plan(const Taxonomy& taxonomy, std::uint64_t seed,
                                std::span<const double> part_weights = {});

// ---- operations ----

std::vector<ClassProfile> sample_class_profiles(const Taxonomy& taxonomy, int num_classes,
                                                std::uint64_t seed, double noise = 0.0);

Scene render_scene(const ClassProfile& profile, const Taxonomy& taxonomy, double noise,
                   std::uint64_t seed, int scene_id = 0);

// Template sentence mentioning 2-4 true attributes of the scene. Part choice
// follows `part_weights` (uniform when empty).
Sentence ground_truth_sentence(const Scene& scene, const Taxonomy& taxonomy, std::uint64_t seed,
                               std::span<const double> part_weights = {});

// Replaces one attribute or canonical part token by a different token of the
// same category. Throws InputError when nothing is flippable.
Sentence make_foil_sentence(const Sentence& sentence, const Taxonomy& taxonomy,
                            std::uint64_t seed);

Dataset generate_dataset(const DatasetConfig& config, std::uint64_t seed);

}  // namespace phrasecritic
