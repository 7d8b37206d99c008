#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "phrasecritic/critic.hpp"
#include "phrasecritic/explain.hpp"
#include "phrasecritic/foil.hpp"
#include "phrasecritic/metrics.hpp"
#include "phrasecritic/negatives.hpp"

namespace phrasecritic {

using json = nlohmann::json;

inline constexpr int kDatasetFormat = 1;
inline constexpr int kReportFormat = 1;

json dataset_to_json(const Dataset& dataset, std::span<const RankPair> pairs = {}, int k = 0);

struct LoadedDataset {
  Dataset dataset;
  std::vector<RankPair> pairs;
  int k = 0;
};

// Throws FormatError on a wrong version or malformed content.
LoadedDataset dataset_from_json(const json& j);

LoadedDataset load_dataset(const std::filesystem::path& path);

// Compact single-line JSON plus newline; creates parent directories.
void write_json(const std::filesystem::path& path, const json& j);
void write_text(const std::filesystem::path& path, const std::string& text);
// MissingFileError when absent, FormatError when unparsable.
json read_json(const std::filesystem::path& path);

json explanation_to_json(const Explanation& e);
json counterfactual_to_json(const Counterfactual& c);
json candidates_to_json(const Scene& scene, std::span<const Candidate> candidates);
json train_report_to_json(const TrainReport& r, LossKind loss, int train_examples, int val_examples);
json foil_report_to_json(const FoilReport& r);
json metric_report_to_json(const MetricReport& r, const Taxonomy& taxonomy);

}  // namespace phrasecritic
