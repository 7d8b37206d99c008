#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "phrasecritic/textproc.hpp"
#include "phrasecritic/worldsim.hpp"

namespace phrasecritic {

// Indicator over colors, sizes, patterns and parts (dimension attribute_dim()).
using AttributeVector = std::vector<double>;

struct GroundedPhrase {
  AttributePhrase phrase;
  int region = 0;  // index into scene.regions
  int part = 0;
  Box box;
  std::vector<double> features;  // region_features(), D_a + 4
  double match = 0.0;
  double score = 0.0;  // raw s_i
};

AttributeVector embed_phrase(const AttributePhrase& phrase, const Taxonomy& taxonomy);

// Attribute indicator of the region followed by (x, y, w, h). With
// feature_noise > 0 each active attribute bit is dropped with that
// probability; the part bit is kept.
std::vector<double> region_features(const Region& region, const Taxonomy& taxonomy,
                                    double feature_noise = 0.0, std::uint64_t seed = 0);

// Any grounder: returns one region of the scene and a finite score.
class Grounder {
 public:
  virtual ~Grounder() = default;
  virtual GroundedPhrase ground(const AttributePhrase& phrase, const Scene& scene,
                                int phrase_index) const = 0;
};

class SyntheticGrounder : public Grounder {
 public:
  SyntheticGrounder(const Taxonomy& taxonomy, GrounderConfig config)
      : taxonomy_(&taxonomy), config_(config) {}

  GroundedPhrase ground(const AttributePhrase& phrase, const Scene& scene,
                        int phrase_index) const override;

  const GrounderConfig& config() const { return config_; }

 private:
  const Taxonomy* taxonomy_;
  GrounderConfig config_;
};

GroundedPhrase ground_phrase(const AttributePhrase& phrase, const Scene& scene,
                             const Taxonomy& taxonomy, const GrounderConfig& config,
                             int phrase_index = 0);

std::vector<GroundedPhrase> ground_all(std::span<const AttributePhrase> phrases,
                                       const Scene& scene, const Grounder& grounder);

}  // namespace phrasecritic
