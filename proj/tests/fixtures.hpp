#pragma once

#include <string>
#include <vector>

#include "phrasecritic/foil.hpp"
#include "phrasecritic/pipeline.hpp"
#include "phrasecritic/textproc.hpp"
#include "phrasecritic/worldsim.hpp"

namespace fixtures {

inline phrasecritic::DatasetConfig small_config() {
  phrasecritic::DatasetConfig c;
  c.num_classes = 6;
  c.scenes_per_class = 20;
  return c;
}

inline const phrasecritic::Dataset& small_dataset() {
  static const phrasecritic::Dataset d = phrasecritic::generate_dataset(small_config(), 11);
  return d;
}

inline const phrasecritic::Taxonomy& taxonomy() {
  static const phrasecritic::Taxonomy t = phrasecritic::build_taxonomy({}, 3);
  return t;
}

inline const phrasecritic::CriticModel& small_ranker() {
  static const phrasecritic::CriticModel m = [] {
    phrasecritic::CriticHyper h;
    h.epochs = 8;
    return phrasecritic::train_ranking_critic(small_dataset(), 10, h, 5).critic.model;
  }();
  return m;
}

inline const phrasecritic::CriticModel& small_classifier() {
  static const phrasecritic::CriticModel m = [] {
    phrasecritic::CriticHyper h;
    h.epochs = 8;
    return phrasecritic::train_foil_classifier(small_dataset(), h, 5).model;
  }();
  return m;
}

inline std::vector<std::string> words(const std::string& text) { return phrasecritic::tokenize(text); }

}  // namespace fixtures
