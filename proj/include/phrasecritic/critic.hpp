#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "phrasecritic/grounding.hpp"

namespace phrasecritic {

struct CriticHyper {
  int d_e = 16;
  int d_in = 32;
  int d_h = 32;
  int d_m = 32;
  double learning_rate = 0.05;
  double momentum = 0.9;
  int batch_size = 32;
  int epochs = 30;
  double init_scale = 0.1;
  double forget_bias = 1.0;
  double clip_norm = 5.0;  // global gradient-norm clip, 0 disables
  bool operator==(const CriticHyper&) const = default;
};

enum class LossKind { Rank, Binary };
const char* to_string(LossKind k);
LossKind loss_kind_from_string(std::string_view s);

// Parameter tensors in a fixed order; vectors are stored as n x 1 matrices.
enum Param : int { kEmbed, kProj, kProjBias, kW, kU, kGateBias, kHead1, kHead1Bias, kHead2, kHead2Bias, kNumParams };
inline constexpr std::array<const char*, kNumParams> kParamNames = {
    "embedding", "projection", "projection_bias", "lstm_input", "lstm_recurrent",
    "lstm_bias", "head1", "head1_bias", "head2", "head2_bias"};

using Params = std::array<Eigen::MatrixXd, kNumParams>;

struct CriticModel {
  CriticHyper hyper;
  LossKind loss = LossKind::Rank;
  std::vector<std::string> vocab;  // vocab[0] == "<unk>"
  std::map<std::string, int, std::less<>> vocab_ids;
  int feature_dim = 0;  // region feature length (attributes + geometry)
  Params params;

  int token_id(std::string_view token) const;
  int raw_dim() const { return hyper.d_e + feature_dim + 1; }
  bool operator==(const CriticModel& o) const;
};

// Parameters drawn uniform(-init, init), biases zero, forget-gate bias set.
CriticModel init_critic(std::span<const std::string> vocabulary, int feature_dim,
                        const CriticHyper& hyper, LossKind loss, std::uint64_t seed);

// One (A_i, R_i, s_i) triple in model-ready form.
struct StepInput {
  std::vector<int> tokens;
  Eigen::VectorXd features;
  double s = 0.0;
};

StepInput make_step(const GroundedPhrase& g, const CriticModel& model);
std::vector<StepInput> make_steps(std::span<const GroundedPhrase> grounded,
                                  const CriticModel& model);

// Projected step vector (d_in).
Eigen::VectorXd encode_step(const StepInput& step, const CriticModel& model);

// Recurrent pass plus head. Throws InputError on an empty sequence.
double score(std::span<const StepInput> steps, const CriticModel& model);

double rank_loss(double s_pos, double s_neg);
double binary_loss(double s, int label);
double sigmoid(double x);

struct PairExample {
  std::vector<StepInput> positive;
  std::vector<StepInput> negative;
};

struct LabeledExample {
  std::vector<StepInput> steps;
  int label = 0;
};

struct GradientResult {
  double loss = 0.0;  // mean over the batch
  Params grads;       // gradient of the mean loss
};

GradientResult gradients(const CriticModel& model, std::span<const PairExample> batch);
GradientResult gradients(const CriticModel& model, std::span<const LabeledExample> batch);

struct TrainReport {
  std::vector<double> epoch_loss;
  std::vector<double> val_accuracy;  // pairwise for ranking, label accuracy for binary
  double seconds = 0.0;              // wall clock, not part of any output file
};

// Fraction of pairs with S_p > S_n.
double pairwise_accuracy(const CriticModel& model, std::span<const PairExample> pairs);
// Fraction with [sigmoid(S_r) > 0.5] == label.
double label_accuracy(const CriticModel& model, std::span<const LabeledExample> examples);

struct TrainedCritic {
  CriticModel model;
  TrainReport report;
};

TrainedCritic train_ranker(std::span<const PairExample> train, std::span<const PairExample> val,
                           std::span<const std::string> vocabulary, int feature_dim,
                           const CriticHyper& hyper, std::uint64_t seed);

TrainedCritic train_classifier(std::span<const LabeledExample> train,
                               std::span<const LabeledExample> val,
                               std::span<const std::string> vocabulary, int feature_dim,
                               const CriticHyper& hyper, std::uint64_t seed);

void save_checkpoint(const CriticModel& model, const std::filesystem::path& path);
CriticModel load_checkpoint(const std::filesystem::path& path);

}  // namespace phrasecritic
