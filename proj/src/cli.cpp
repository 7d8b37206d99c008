#include "phrasecritic/cli.hpp"

#include <chrono>
#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "phrasecritic/errors.hpp"
#include "phrasecritic/foil.hpp"
#include "phrasecritic/io.hpp"
#include "phrasecritic/metrics.hpp"
#include "phrasecritic/pipeline.hpp"
#include "phrasecritic/rng.hpp"

namespace phrasecritic {
namespace fs = std::filesystem;

namespace {

void error_record(const std::string& kind, const std::string& message, int code) {
  json j = {{"error", kind}, {"message", message}, {"exit_code", code}};
  std::cerr << j.dump() << "\n";
}

void require_file(const fs::path& p, const char* what) {
  if (!fs::is_regular_file(p)) throw MissingFileError(std::string(what) + " '" + p.string() + "' not found");
}

fs::path output_path(const RunConfig& c, const char* name) {
  return c.out.empty() ? default_output_dir() / name : c.out;
}

fs::path sibling(const fs::path& p, const std::string& suffix) {
  return p.parent_path() / (p.stem().string() + suffix);
}

void validate(const RunConfig& c) {
  if (c.n < 1) throw ConfigError("--n must be at least 1");
  if (c.k < 1) throw ConfigError("--k must be at least 1");
  if (c.epochs < 1) throw ConfigError("--epochs must be at least 1");
  if (c.limit < 0) throw ConfigError("--limit must be non-negative");
  if (c.classes < 2) throw ConfigError("--classes must be at least 2");
  if (c.scenes_per_class < 1) throw ConfigError("--scenes-per-class must be at least 1");
}

CriticModel load_model(const RunConfig& c, const Dataset& d) {
  CriticModel m = load_checkpoint(c.model);
  if (m.feature_dim != region_feature_dim(d.taxonomy)) {
    throw FormatError("checkpoint '" + c.model.string() + "' was trained on a different taxonomy");
  }
  return m;
}

std::vector<const Scene*> test_scenes(const Dataset& d, int limit) {
  std::vector<const Scene*> out;
  for (const auto& s : d.scenes) {
    if (s.split != Split::Test) continue;
    if (limit > 0 && static_cast<int>(out.size()) >= limit) break;
    out.push_back(&s);
  }
  return out;
}

std::vector<RankPair> pairs_for(const LoadedDataset& data, const RunConfig& c) {
  if (!data.pairs.empty() && data.k == c.k) return data.pairs;
  return build_rank_pairs(data.dataset, c.k, derive_seed(c.seed, {tag("pairs")}));
}

ExplainConfig explain_config(const RunConfig& c) {
  ExplainConfig e;
  e.sampler.n = c.n;
  e.threshold = c.threshold;
  e.seed = c.seed;
  return e;
}

void cmd_synth(const RunConfig& c) {
  DatasetConfig dc;
  dc.num_classes = c.classes;
  dc.scenes_per_class = c.scenes_per_class;
  Dataset d = generate_dataset(dc, c.seed);
  auto pairs = build_rank_pairs(d, c.k, derive_seed(c.seed, {tag("pairs")}));
  fs::path out = output_path(c, "data.json");
  write_json(out, dataset_to_json(d, pairs, c.k));
  std::cout << "wrote " << d.scenes.size() << " scenes, " << d.sentences.size() << " sentences and "
            << pairs.size() << " ranking pairs to " << out.string() << "\n";
}

void cmd_train(const RunConfig& c) {
  require_file(c.data, "dataset");
  LoadedDataset data = load_dataset(c.data);
  const Dataset& d = data.dataset;
  CriticHyper hyper;
  hyper.epochs = c.epochs;
  TrainedCritic trained;
  int n_train = 0;
  int n_val = 0;
  if (c.loss == LossKind::Rank) {
    auto pairs = pairs_for(data, c);
    for (const auto& p : pairs) {
      n_train += p.split == Split::Train;
      n_val += p.split == Split::Val;
    }
    trained = train_on_pairs(d, pairs, hyper, c.seed);
  } else {
    n_train = static_cast<int>(foil_examples(d, Split::Train).size());
    n_val = static_cast<int>(foil_examples(d, Split::Val).size());
    trained = train_foil_classifier(d, hyper, c.seed);
  }
  fs::path out = output_path(c, "model.json");
  save_checkpoint(trained.model, out);
  write_json(sibling(out, ".report.json"), train_report_to_json(trained.report, c.loss, n_train, n_val));
  for (size_t e = 0; e < trained.report.epoch_loss.size(); ++e) {
    std::cerr << "epoch " << e + 1 << " loss " << trained.report.epoch_loss[e] << " val accuracy "
              << trained.report.val_accuracy[e] << "\n";
  }
  std::cout << "wrote " << to_string(c.loss) << " critic to " << out.string() << " (val accuracy "
            << (trained.report.val_accuracy.empty() ? 0.0 : trained.report.val_accuracy.back())
            << ")\n";
}

void cmd_rank(const RunConfig& c) {
  require_file(c.data, "dataset");
  require_file(c.model, "checkpoint");
  LoadedDataset data = load_dataset(c.data);
  const Dataset& d = data.dataset;
  CriticModel model = load_model(c, d);
  auto class_models = fit_class_models(d);
  ExplainConfig ec = explain_config(c);
  fs::path out = output_path(c, "explanations.json");
  json records = json::array();
  int fallbacks = 0;
  for (const Scene* s : test_scenes(d, c.limit)) {
    auto candidates = scene_candidates(*s, d, class_models, ec);
    Explanation ex = select_explanation(candidates, *s, d, model, c.threshold);
    fallbacks += ex.fallback;
    records.push_back(explanation_to_json(ex));
    if (c.svg) {
      std::string svg = render_svg(*s, d.taxonomy, ex.grounded, join_tokens(ex.candidate.tokens));
      write_text(sibling(out, "_svg") / ("scene_" + std::to_string(s->id) + ".svg"), svg);
    }
  }
  write_json(out, {{"format", kReportFormat},
                   {"threshold", c.threshold},
                   {"n", c.n},
                   {"seed", c.seed},
                   {"fallbacks", fallbacks},
                   {"explanations", records}});
  std::cout << "wrote " << records.size() << " explanations to " << out.string() << " (" << fallbacks
            << " fallbacks)\n";
}

void cmd_counterfactual(const RunConfig& c) {
  require_file(c.data, "dataset");
  require_file(c.model, "checkpoint");
  LoadedDataset data = load_dataset(c.data);
  const Dataset& d = data.dataset;
  CriticModel model = load_model(c, d);
  auto class_models = fit_class_models(d);
  ExplainConfig ec = explain_config(c);
  json records = json::array();
  int untrue = 0;
  for (const Scene* s : test_scenes(d, c.limit)) {
    Counterfactual cf = explain_counterfactual(*s, d, model, class_models, ec);
    bool holds = phrase_true(cf.phrases[static_cast<size_t>(cf.evidence)], *s, d.taxonomy);
    untrue += !holds;
    auto candidates = scene_candidates(*s, d, class_models, ec);
    json r = explanation_to_json(select_explanation(candidates, *s, d, model, c.threshold));
    r["counterfactual"] = counterfactual_to_json(cf);
    r["counterfactual"]["evidence_true_of_scene"] = holds;
    records.push_back(std::move(r));
  }
  fs::path out = output_path(c, "counterfactuals.json");
  write_json(out, {{"format", kReportFormat},
                   {"seed", c.seed},
                   {"untrue", untrue},
                   {"counterfactuals", records}});
  std::cout << "wrote " << records.size() << " counterfactuals to " << out.string() << " (" << untrue
            << " with evidence untrue of the scene)\n";
}

void cmd_foil(const RunConfig& c) {
  require_file(c.data, "dataset");
  require_file(c.model, "checkpoint");
  LoadedDataset data = load_dataset(c.data);
  const Dataset& d = data.dataset;
  CriticModel model = load_model(c, d);
  if (model.loss != LossKind::Binary) {
    throw ConfigError("foil needs a checkpoint trained with --loss binary");
  }
  FoilReport report = evaluate_foil(d, model);
  fs::path out = output_path(c, "foil.json");
  write_json(out, foil_report_to_json(report));
  std::cout << format_foil_table(report);
}

void cmd_eval(const RunConfig& c) {
  require_file(c.data, "dataset");
  require_file(c.model, "checkpoint");
  LoadedDataset data = load_dataset(c.data);
  const Dataset& d = data.dataset;
  CriticModel model = load_model(c, d);
  auto class_models = fit_class_models(d);
  MetricReport report = compare_methods(d, model, class_models, explain_config(c));
  RankingAccuracy acc = ranking_accuracy(d, pairs_for(data, c), model);
  json j = metric_report_to_json(report, d.taxonomy);
  j["ranking"] = {{"pairs", acc.pairs}, {"phrase_critic", acc.critic}, {"mean_score", acc.mean_score}};
  fs::path out = output_path(c, "eval.json");
  write_json(out, j);
  std::cout << format_selection_table(report) << "\n" << format_keypoint_table(report, d.taxonomy)
            << "\nheld-out pairwise accuracy: phrase critic " << acc.critic << ", mean s "
            << acc.mean_score << " over " << acc.pairs << " pairs\n";
}

}  // namespace

fs::path default_output_dir() {
  const char* env = std::getenv("PHRASECRITIC_OUT");
  return env != nullptr && *env != '\0' ? fs::path(env) : fs::path("out");
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const MissingFileError*>(&e)) return kExitMissingFile;
  if (dynamic_cast<const FormatError*>(&e)) return kExitFormat;
  if (dynamic_cast<const ConfigError*>(&e)) return kExitUsage;
  if (dynamic_cast<const CLI::ParseError*>(&e)) return kExitUsage;
  return kExitRuntime;
}

int run(const std::vector<std::string>& args) {
  RunConfig c;
  std::string loss = "rank";
  std::string data;
  std::string model;
  std::string out;

  CLI::App app{"Phrase-critic explanations on a synthetic bird world", "phrasecritic"};
  app.require_subcommand(1);
  auto common = [&](CLI::App* s, bool needs_data, bool needs_model) {
    s->add_option("--seed", c.seed, "random seed")->capture_default_str();
    s->add_option("--out", out, "output file (default under $PHRASECRITIC_OUT or ./out)");
    if (needs_data) s->add_option("--data", data, "dataset JSON (default <outdir>/data.json)");
    if (needs_model) s->add_option("--model", model, "critic checkpoint (default <outdir>/model.json)");
  };
  auto selection = [&](CLI::App* s) {
    s->add_option("--T", c.threshold, "fluency threshold")->capture_default_str();
    s->add_option("--n", c.n, "candidates per scene")->capture_default_str();
    s->add_option("--limit", c.limit, "only the first N test scenes (0 = all)");
  };

  CLI::App* synth = app.add_subcommand("synth", "generate a synthetic dataset");
  common(synth, false, false);
  synth->add_option("--k", c.k, "negatives per sentence")->capture_default_str();
  synth->add_option("--classes", c.classes, "number of classes")->capture_default_str();
  synth->add_option("--scenes-per-class", c.scenes_per_class, "scenes per class")->capture_default_str();

  CLI::App* train = app.add_subcommand("train", "train a critic");
  common(train, true, false);
  train->add_option("--k", c.k, "negatives per sentence")->capture_default_str();
  train->add_option("--epochs", c.epochs, "training epochs")->capture_default_str();
  train->add_option("--loss", loss, "rank or binary")
      ->check(CLI::IsMember({"rank", "binary"}))
      ->capture_default_str();

  CLI::App* rank = app.add_subcommand("rank", "select one explanation per test scene");
  common(rank, true, true);
  selection(rank);
  rank->add_flag("--svg", c.svg, "also write SVG annotations");

  CLI::App* cf = app.add_subcommand("counterfactual", "counterfactual explanation per test scene");
  common(cf, true, true);
  selection(cf);

  CLI::App* foil = app.add_subcommand("foil", "FOIL classification, detection and correction");
  common(foil, true, true);

  CLI::App* eval = app.add_subcommand("eval", "compare selectors and keypoint accuracy");
  common(eval, true, true);
  selection(eval);
  eval->add_option("--k", c.k, "negatives per sentence for the ranking pairs")->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    error_record("usage", e.what(), kExitUsage);
    return kExitUsage;
  }

  auto start = std::chrono::steady_clock::now();
  try {
    c.command = app.get_subcommands().front()->get_name();
    c.loss = loss_kind_from_string(loss);
    c.data = data.empty() ? default_output_dir() / "data.json" : fs::path(data);
    c.model = model.empty() ? default_output_dir() / "model.json" : fs::path(model);
    c.out = out;
    validate(c);
    if (c.command == "synth") cmd_synth(c);
    else if (c.command == "train") cmd_train(c);
    else if (c.command == "rank") cmd_rank(c);
    else if (c.command == "counterfactual") cmd_counterfactual(c);
    else if (c.command == "foil") cmd_foil(c);
    else cmd_eval(c);
  } catch (const Error& e) {
    int code = exit_code_for(e);
    error_record(e.kind(), e.what(), code);
    return code;
  } catch (const std::exception& e) {
    error_record("internal", e.what(), kExitRuntime);
    return kExitRuntime;
  }
  std::chrono::duration<double> dt = std::chrono::steady_clock::now() - start;
  std::cerr << json{{"command", c.command}, {"seconds", dt.count()}}.dump() << "\n";
  return kExitOk;
}

int run(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args);
}

}  // namespace phrasecritic
