#include "phrasecritic/io.hpp"

#include <fstream>

#include "phrasecritic/errors.hpp"

namespace phrasecritic {
namespace {

json box_json(const Box& b) { return json::array({b.x, b.y, b.w, b.h}); }

Box box_from(const json& j) {
  if (!j.is_array() || j.size() != 4) throw FormatError("box must be [x, y, w, h]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

json attrs_json(const AttributeSet& a, const Taxonomy& t) {
  json out = json::object();
  for (int k = 0; k < kNumAttributeCategories; ++k) {
    Category c = kAttributeCategories[static_cast<size_t>(k)];
    out[to_string(c)] = t.tokens(c).at(static_cast<size_t>(a[static_cast<size_t>(k)]));
  }
  return out;
}

int token_index(const Taxonomy& t, Category c, const std::string& token) {
  const auto& list = t.tokens(c);
  auto it = std::find(list.begin(), list.end(), token);
  if (it == list.end()) throw FormatError("unknown " + std::string(to_string(c)) + " token '" + token + "'");
  return static_cast<int>(it - list.begin());
}

AttributeSet attrs_from(const json& j, const Taxonomy& t) {
  AttributeSet a{};
  for (int k = 0; k < kNumAttributeCategories; ++k) {
    Category c = kAttributeCategories[static_cast<size_t>(k)];
    a[static_cast<size_t>(k)] = token_index(t, c, j.at(to_string(c)).get<std::string>());
  }
  return a;
}

json flip_json(const Flip& f) {
  return {{"position", f.position}, {"original", f.original}, {"replacement", f.replacement}};
}

}  // namespace

json dataset_to_json(const Dataset& d, std::span<const RankPair> pairs, int k) {
  const Taxonomy& t = d.taxonomy;
  const DatasetConfig& c = d.config;
  json lexicon = json::object();
  for (const auto& [token, e] : t.lexicon) {
    lexicon[token] = {{"pos", to_string(e.pos)}, {"category", to_string(e.category)}};
  }
  json categories = json::object();
  for (Category cat : kAttributeCategories) categories[to_string(cat)] = t.tokens(cat);

  json profiles = json::array();
  for (const auto& p : d.profiles) {
    json attrs = json::array();
    for (size_t part = 0; part < p.attributes.size(); ++part) {
      json a = attrs_json(p.attributes[part], t);
      a["part"] = t.parts[part];
      attrs.push_back(std::move(a));
    }
    profiles.push_back({{"id", p.id}, {"name", p.name}, {"attributes", attrs},
                        {"salience", p.salience}, {"noise", p.noise}});
  }

  json scenes = json::array();
  for (const auto& s : d.scenes) {
    json regions = json::array();
    for (const auto& r : s.regions) {
      regions.push_back({{"part", t.parts[static_cast<size_t>(r.part)]}, {"box", box_json(r.box)},
                         {"attrs", attrs_json(r.attributes, t)}});
    }
    json keypoints = json::array();
    for (const auto& kp : s.keypoints) keypoints.push_back({kp.x, kp.y});
    scenes.push_back({{"id", s.id}, {"class", s.class_id}, {"regions", regions},
                      {"keypoints", keypoints}, {"split", to_string(s.split)}});
  }

  json sentences = json::array();
  for (const auto& r : d.sentences) {
    json foil = nullptr;
    if (r.sentence.foil) foil = {{"index", r.sentence.foil->index}, {"original", r.sentence.foil->original}};
    sentences.push_back({{"scene_id", r.scene_id}, {"tokens", r.sentence.tokens}, {"foil", foil}});
  }

  json jpairs = json::array();
  for (const auto& p : pairs) {
    json flips = json::array();
    for (const auto& f : p.flips) flips.push_back(flip_json(f));
    jpairs.push_back({{"scene_id", p.scene_id}, {"sentence", p.sentence}, {"negative", p.negative},
                      {"flips", flips}});
  }

  return {
      {"format", kDatasetFormat},
      {"seed", d.seed},
      {"config",
       {{"colors", c.taxonomy.colors}, {"sizes", c.taxonomy.sizes}, {"patterns", c.taxonomy.patterns},
        {"parts", c.taxonomy.parts}, {"kappa_min", c.taxonomy.kappa_min},
        {"kappa_max", c.taxonomy.kappa_max}, {"num_classes", c.num_classes},
        {"scenes_per_class", c.scenes_per_class}, {"noise", c.noise},
        {"sentences_per_scene", c.sentences_per_scene}, {"foils_per_scene", c.foils_per_scene},
        {"splits", {c.train_fraction, c.val_fraction, c.test_fraction}}}},
      {"grounder",
       {{"seed", c.grounder.seed}, {"score_sigma", c.grounder.score_sigma},
        {"feature_noise", c.grounder.feature_noise}}},
      {"taxonomy",
       {{"parts", t.parts}, {"categories", categories}, {"kappa", t.kappa}, {"lexicon", lexicon}}},
      {"profiles", profiles},
      {"scenes", scenes},
      {"sentences", sentences},
      {"negatives_per_sentence", k},
      {"pairs", jpairs},
  };
}

LoadedDataset dataset_from_json(const json& j) {
  try {
    if (!j.is_object() || !j.contains("format")) throw FormatError("dataset has no \"format\" field");
    int format = j.at("format").get<int>();
    if (format != kDatasetFormat) {
      throw FormatError("dataset format " + std::to_string(format) + " is not supported (expected " +
                        std::to_string(kDatasetFormat) + ")");
    }
    LoadedDataset out;
    Dataset& d = out.dataset;
    d.seed = j.at("seed").get<std::uint64_t>();
    const auto& c = j.at("config");
    DatasetConfig& cfg = d.config;
    cfg.taxonomy.colors = c.at("colors").get<int>();
    cfg.taxonomy.sizes = c.at("sizes").get<int>();
    cfg.taxonomy.patterns = c.at("patterns").get<int>();
    cfg.taxonomy.parts = c.at("parts").get<int>();
    cfg.taxonomy.kappa_min = c.at("kappa_min").get<double>();
    cfg.taxonomy.kappa_max = c.at("kappa_max").get<double>();
    cfg.num_classes = c.at("num_classes").get<int>();
    cfg.scenes_per_class = c.at("scenes_per_class").get<int>();
    cfg.noise = c.at("noise").get<double>();
    cfg.sentences_per_scene = c.at("sentences_per_scene").get<int>();
    cfg.foils_per_scene = c.at("foils_per_scene").get<int>();
    auto splits = c.at("splits").get<std::vector<double>>();
    if (splits.size() != 3) throw FormatError("config.splits must have three fractions");
    cfg.train_fraction = splits[0];
    cfg.val_fraction = splits[1];
    cfg.test_fraction = splits[2];
    const auto& g = j.at("grounder");
    cfg.grounder.seed = g.at("seed").get<std::uint64_t>();
    cfg.grounder.score_sigma = g.at("score_sigma").get<double>();
    cfg.grounder.feature_noise = g.at("feature_noise").get<double>();

    const auto& tj = j.at("taxonomy");
    Taxonomy& t = d.taxonomy;
    t.parts = tj.at("parts").get<std::vector<std::string>>();
    for (Category cat : kAttributeCategories) {
      t.attributes[static_cast<size_t>(attribute_slot(cat))] =
          tj.at("categories").at(to_string(cat)).get<std::vector<std::string>>();
    }
    t.kappa = tj.at("kappa").get<std::vector<double>>();
    if (t.kappa.size() != t.parts.size()) throw FormatError("taxonomy.kappa must have one scale per part");
    rebuild_lexicon(t);

    for (const auto& pj : j.at("profiles")) {
      ClassProfile p;
      p.id = pj.at("id").get<int>();
      p.name = pj.at("name").get<std::string>();
      for (const auto& a : pj.at("attributes")) p.attributes.push_back(attrs_from(a, t));
      p.salience = pj.at("salience").get<std::vector<double>>();
      p.noise = pj.at("noise").get<double>();
      if (p.id != static_cast<int>(d.profiles.size())) throw FormatError("profile ids must be 0..n-1 in order");
      d.profiles.push_back(std::move(p));
    }

    for (const auto& sj : j.at("scenes")) {
      Scene s;
      s.id = sj.at("id").get<int>();
      s.class_id = sj.at("class").get<int>();
      if (s.id != static_cast<int>(d.scenes.size())) throw FormatError("scene ids must be 0..n-1 in order");
      if (s.class_id < 0 || static_cast<size_t>(s.class_id) >= d.profiles.size()) {
        throw FormatError("scene " + std::to_string(s.id) + " has an unknown class");
      }
      for (const auto& rj : sj.at("regions")) {
        Region r;
        r.part = t.part_index(rj.at("part").get<std::string>());
        if (r.part < 0) throw FormatError("unknown part in scene " + std::to_string(s.id));
        r.box = box_from(rj.at("box"));
        r.attributes = attrs_from(rj.at("attrs"), t);
        s.regions.push_back(r);
      }
      for (const auto& kj : sj.at("keypoints")) s.keypoints.push_back({kj.at(0).get<double>(), kj.at(1).get<double>()});
      if (s.keypoints.size() != s.regions.size()) throw FormatError("one keypoint per region required");
      s.split = split_from_string(sj.at("split").get<std::string>());
      d.scenes.push_back(std::move(s));
    }

    for (const auto& rj : j.at("sentences")) {
      SentenceRecord r;
      r.scene_id = rj.at("scene_id").get<int>();
      if (r.scene_id < 0 || static_cast<size_t>(r.scene_id) >= d.scenes.size()) {
        throw FormatError("sentence refers to an unknown scene");
      }
      r.sentence.tokens = rj.at("tokens").get<std::vector<std::string>>();
      const auto& f = rj.at("foil");
      if (!f.is_null()) {
        r.sentence.foil = FoilMark{f.at("index").get<int>(), f.at("original").get<std::string>()};
        if (r.sentence.foil->index < 0 ||
            static_cast<size_t>(r.sentence.foil->index) >= r.sentence.tokens.size()) {
          throw FormatError("foil index out of range");
        }
      }
      d.sentences.push_back(std::move(r));
    }

    out.k = j.value("negatives_per_sentence", 0);
    if (j.contains("pairs")) {
      for (const auto& pj : j.at("pairs")) {
        RankPair p;
        p.scene_id = pj.at("scene_id").get<int>();
        p.sentence = pj.at("sentence").get<int>();
        if (p.sentence < 0 || static_cast<size_t>(p.sentence) >= d.sentences.size() ||
            p.scene_id < 0 || static_cast<size_t>(p.scene_id) >= d.scenes.size()) {
          throw FormatError("pair refers to an unknown sentence or scene");
        }
        p.positive = d.sentences[static_cast<size_t>(p.sentence)].sentence.tokens;
        p.negative = pj.at("negative").get<std::vector<std::string>>();
        for (const auto& fj : pj.at("flips")) {
          p.flips.push_back({fj.at("position").get<int>(), fj.at("original").get<std::string>(),
                             fj.at("replacement").get<std::string>()});
        }
        p.split = d.scenes[static_cast<size_t>(p.scene_id)].split;
        out.pairs.push_back(std::move(p));
      }
    }
    return out;
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed dataset: ") + e.what());
  } catch (const ConfigError& e) {
    throw FormatError(std::string("malformed dataset: ") + e.what());
  }
}

LoadedDataset load_dataset(const std::filesystem::path& path) { return dataset_from_json(read_json(path)); }

void write_json(const std::filesystem::path& path, const json& j) {
  write_text(path, j.dump() + "\n");
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw InputError("failed writing '" + path.string() + "'");
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingFileError("cannot open '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError("'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

json explanation_to_json(const Explanation& e) {
  json phrases = json::array();
  for (size_t i = 0; i < e.grounded.size(); ++i) {
    const auto& g = e.grounded[i];
    phrases.push_back({{"text", phrase_to_text(g.phrase)},
                       {"box", box_json(g.box)},
                       {"s_i", g.score},
                       {"critic_score", e.phrase_scores.at(i)}});
  }
  return {{"scene_id", e.scene_id},
          {"sentence", join_tokens(e.candidate.tokens)},
          {"candidate", e.index},
          {"s_f", e.s_f},
          {"s_r", e.s_r ? json(*e.s_r) : json(nullptr)},
          {"score", e.s},
          {"fallback", e.fallback},
          {"survivors", e.survivors},
          {"phrases", phrases}};
}

json counterfactual_to_json(const Counterfactual& c) {
  json scores = json::array();
  for (size_t i = 0; i < c.phrases.size(); ++i) {
    scores.push_back({{"text", phrase_to_text(c.phrases[i])}, {"critic_score", c.scores[i]}});
  }
  return {{"class", c.class_id},
          {"class_name", c.class_name},
          {"neighbor_scene", c.neighbor_scene},
          {"neighbor_sentence", join_tokens(c.neighbor_sentence)},
          {"evidence", c.evidence_text},
          {"negation", c.negation},
          {"conditional", c.conditional},
          {"phrase_scores", scores}};
}

json candidates_to_json(const Scene& scene, std::span<const Candidate> candidates) {
  json list = json::array();
  for (const auto& c : candidates) list.push_back({{"tokens", c.tokens}, {"s_f", c.s_f}});
  return {{"scene_id", scene.id}, {"class", scene.class_id}, {"candidates", list}};
}

json train_report_to_json(const TrainReport& r, LossKind loss, int train_examples, int val_examples) {
  return {{"format", kReportFormat},
          {"loss", to_string(loss)},
          {"train_examples", train_examples},
          {"val_examples", val_examples},
          {"epoch_loss", r.epoch_loss},
          {"val_accuracy", r.val_accuracy}};
}

json foil_report_to_json(const FoilReport& r) {
  return {{"format", kReportFormat},
          {"examples", r.examples},
          {"foils", r.foils},
          {"tau", r.tau},
          {"fallbacks", r.fallbacks},
          {"phrase_critic",
           {{"classification", r.classification}, {"detection", r.detection}, {"correction", r.correction}}},
          {"grounding_mean",
           {{"classification", r.baseline_classification},
            {"detection", r.baseline_detection},
            {"correction", r.baseline_correction}}}};
}

json metric_report_to_json(const MetricReport& r, const Taxonomy& taxonomy) {
  auto method = [](const MethodResult& m) {
    return json{{"name", m.name},
                {"cnp", m.scores.cnp()},
                {"cs", m.scores.cs()},
                {"sentences", m.scores.sentences},
                {"phrases", m.scores.phrases},
                {"fallbacks", m.fallbacks}};
  };
  json methods = json::array();
  for (const auto& m : r.methods) methods.push_back(method(m));
  json parts = json::array();
  for (const auto& [part, s] : r.keypoints.parts) {
    parts.push_back({{"part", taxonomy.parts[static_cast<size_t>(part)]},
                     {"accuracy", s.accuracy()},
                     {"distance", s.mean_distance()},
                     {"groundings", s.groundings}});
  }
  return {{"format", kReportFormat},
          {"scenes", r.scenes},
          {"threshold", r.threshold},
          {"methods", methods},
          {"ungated_grounding", method(r.ungated_grounding)},
          {"keypoints", {{"parts", parts}, {"excluded", r.keypoints.excluded}}}};
}

}  // namespace phrasecritic
