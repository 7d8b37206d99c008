#include "phrasecritic/critic.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "phrasecritic/errors.hpp"
#include "phrasecritic/rng.hpp"

namespace phrasecritic {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using json = nlohmann::json;

constexpr int kCheckpointFormat = 1;

VectorXd sigmoid_vec(const VectorXd& a) {
  return a.unaryExpr([](double x) { return sigmoid(x); });
}

struct Trace {
  std::vector<VectorXd> raw, z, i, f, o, g, c, h;  // h[0], c[0] are the zero state
  VectorXd v;
  double s = 0.0;
};

VectorXd raw_input(const StepInput& step, const CriticModel& m) {
  const int de = m.hyper.d_e;
  VectorXd x = VectorXd::Zero(m.raw_dim());
  if (!step.tokens.empty()) {
    for (int t : step.tokens) x.head(de) += m.params[kEmbed].row(t).transpose();
    x.head(de) /= static_cast<double>(step.tokens.size());
  }
  if (step.features.size() != m.feature_dim) {
    throw InputError("region feature length " + std::to_string(step.features.size()) +
                     " does not match model feature_dim " + std::to_string(m.feature_dim));
  }
  x.segment(de, m.feature_dim) = step.features;
  x(de + m.feature_dim) = step.s;
  return x;
}

Trace forward(std::span<const StepInput> steps, const CriticModel& m) {
  if (steps.empty()) throw InputError("critic needs at least one grounded phrase");
  const auto& p = m.params;
  const int dh = m.hyper.d_h;
  Trace tr;
  tr.h.push_back(VectorXd::Zero(dh));
  tr.c.push_back(VectorXd::Zero(dh));
  for (const auto& step : steps) {
    VectorXd x = raw_input(step, m);
    VectorXd z = p[kProj] * x + p[kProjBias].col(0);
    VectorXd a = p[kW] * z + p[kU] * tr.h.back() + p[kGateBias].col(0);
    VectorXd i = sigmoid_vec(a.segment(0, dh));
    VectorXd f = sigmoid_vec(a.segment(dh, dh));
    VectorXd o = sigmoid_vec(a.segment(2 * dh, dh));
    VectorXd g = a.segment(3 * dh, dh).array().tanh();
    VectorXd c = f.cwiseProduct(tr.c.back()) + i.cwiseProduct(g);
    VectorXd h = o.cwiseProduct(c.array().tanh().matrix());
    tr.raw.push_back(std::move(x));
    tr.z.push_back(std::move(z));
    tr.i.push_back(std::move(i));
    tr.f.push_back(std::move(f));
    tr.o.push_back(std::move(o));
    tr.g.push_back(std::move(g));
    tr.c.push_back(std::move(c));
    tr.h.push_back(std::move(h));
  }
  tr.v = (p[kHead1] * tr.h.back() + p[kHead1Bias].col(0)).array().tanh();
  tr.s = p[kHead2].row(0).dot(tr.v) + p[kHead2Bias](0, 0);
  return tr;
}

void backward(std::span<const StepInput> steps, const Trace& tr, double ds, const CriticModel& m,
              Params& grads) {
  const auto& p = m.params;
  const int dh = m.hyper.d_h;
  const int de = m.hyper.d_e;
  grads[kHead2].row(0) += ds * tr.v.transpose();
  grads[kHead2Bias](0, 0) += ds;
  VectorXd du = (ds * p[kHead2].row(0).transpose()).cwiseProduct(
      (1.0 - tr.v.array().square()).matrix());
  grads[kHead1] += du * tr.h.back().transpose();
  grads[kHead1Bias].col(0) += du;
  VectorXd dh_next = p[kHead1].transpose() * du;
  VectorXd dc_next = VectorXd::Zero(dh);
  VectorXd da(4 * dh);
  for (size_t t = steps.size(); t-- > 0;) {
    const VectorXd& c = tr.c[t + 1];
    const VectorXd& c_prev = tr.c[t];
    VectorXd tc = c.array().tanh();
    VectorXd dc = dc_next + dh_next.cwiseProduct(tr.o[t]).cwiseProduct(
                                (1.0 - tc.array().square()).matrix());
    da.segment(0, dh) = dc.cwiseProduct(tr.g[t]).cwiseProduct(
        tr.i[t].cwiseProduct((1.0 - tr.i[t].array()).matrix()));
    da.segment(dh, dh) = dc.cwiseProduct(c_prev).cwiseProduct(
        tr.f[t].cwiseProduct((1.0 - tr.f[t].array()).matrix()));
    da.segment(2 * dh, dh) = dh_next.cwiseProduct(tc).cwiseProduct(
        tr.o[t].cwiseProduct((1.0 - tr.o[t].array()).matrix()));
    da.segment(3 * dh, dh) =
        dc.cwiseProduct(tr.i[t]).cwiseProduct((1.0 - tr.g[t].array().square()).matrix());
    grads[kW] += da * tr.z[t].transpose();
    grads[kU] += da * tr.h[t].transpose();
    grads[kGateBias].col(0) += da;
    VectorXd dz = p[kW].transpose() * da;
    grads[kProj] += dz * tr.raw[t].transpose();
    grads[kProjBias].col(0) += dz;
    const auto& toks = steps[t].tokens;
    if (!toks.empty()) {
      VectorXd dx = p[kProj].leftCols(de).transpose() * dz / static_cast<double>(toks.size());
      for (int tok : toks) grads[kEmbed].row(tok) += dx.transpose();
    }
    dh_next = p[kU].transpose() * da;
    dc_next = dc.cwiseProduct(tr.f[t]);
  }
}

Params zeros_like(const Params& p) {
  Params z;
  for (int k = 0; k < kNumParams; ++k) z[k] = MatrixXd::Zero(p[k].rows(), p[k].cols());
  return z;
}

void check_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw NumericError(std::string("non-finite ") + what);
}

template <class Example, class GradFn, class AccFn>
TrainedCritic train_impl(std::span<const Example> train, std::span<const Example> val,
                         CriticModel model, std::uint64_t seed, GradFn grad_fn, AccFn acc_fn) {
  const auto start = std::chrono::steady_clock::now();
  const CriticHyper& h = model.hyper;
  if (h.batch_size < 1 || h.epochs < 0) throw ConfigError("batch_size >= 1 and epochs >= 0 required");
  Params velocity = zeros_like(model.params);
  TrainReport report;
  std::vector<size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng = make_rng(seed, {tag("shuffle")});
  std::vector<Example> batch;
  for (int epoch = 0; epoch < h.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double total = 0.0;
    for (size_t b = 0; b < order.size(); b += static_cast<size_t>(h.batch_size)) {
      size_t e = std::min(order.size(), b + static_cast<size_t>(h.batch_size));
      batch.clear();
      for (size_t j = b; j < e; ++j) batch.push_back(train[order[j]]);
      GradientResult gr = grad_fn(model, std::span<const Example>(batch));
      if (!std::isfinite(gr.loss)) {
        throw NumericError("training diverged at epoch " + std::to_string(epoch + 1) +
                           ", batch starting at " + std::to_string(b) + " (loss is not finite)");
      }
      total += gr.loss * static_cast<double>(e - b);
      double norm2 = 0.0;
      for (const auto& g : gr.grads) norm2 += g.squaredNorm();
      double scale = 1.0;
      if (h.clip_norm > 0.0 && norm2 > h.clip_norm * h.clip_norm) {
        scale = h.clip_norm / std::sqrt(norm2);
      }
      for (int k = 0; k < kNumParams; ++k) {
        velocity[k] = h.momentum * velocity[k] - h.learning_rate * scale * gr.grads[k];
        model.params[k] += velocity[k];
      }
    }
    report.epoch_loss.push_back(train.empty() ? 0.0 : total / static_cast<double>(train.size()));
    report.val_accuracy.push_back(val.empty() ? 0.0 : acc_fn(model, val));
  }
  report.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {std::move(model), std::move(report)};
}

json matrix_to_json(const MatrixXd& m) {
  std::vector<double> flat;
  flat.reserve(static_cast<size_t>(m.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) flat.push_back(m(r, c));
  }
  return {{"shape", {m.rows(), m.cols()}}, {"data", flat}};
}

}  // namespace

const char* to_string(LossKind k) { return k == LossKind::Rank ? "rank" : "binary"; }

LossKind loss_kind_from_string(std::string_view s) {
  if (s == "rank") return LossKind::Rank;
  if (s == "binary") return LossKind::Binary;
  throw ConfigError("unknown loss '" + std::string(s) + "' (expected rank or binary)");
}

int CriticModel::token_id(std::string_view token) const {
  auto it = vocab_ids.find(token);
  return it == vocab_ids.end() ? 0 : it->second;
}

bool CriticModel::operator==(const CriticModel& o) const {
  if (!(hyper == o.hyper && loss == o.loss && vocab == o.vocab && feature_dim == o.feature_dim)) {
    return false;
  }
  for (int k = 0; k < kNumParams; ++k) {
    if (params[k].rows() != o.params[k].rows() || params[k].cols() != o.params[k].cols() ||
        params[k] != o.params[k]) {
      return false;
    }
  }
  return true;
}

CriticModel init_critic(std::span<const std::string> vocabulary, int feature_dim,
                        const CriticHyper& hyper, LossKind loss, std::uint64_t seed) {
  if (hyper.d_e < 1 || hyper.d_in < 1 || hyper.d_h < 1 || hyper.d_m < 1) {
    throw ConfigError("critic dimensions must be positive");
  }
  CriticModel m;
  m.hyper = hyper;
  m.loss = loss;
  m.feature_dim = feature_dim;
  m.vocab.push_back("<unk>");
  for (const auto& t : vocabulary) {
    if (t != "<unk>") m.vocab.push_back(t);
  }
  for (size_t i = 0; i < m.vocab.size(); ++i) m.vocab_ids.emplace(m.vocab[i], static_cast<int>(i));

  const int v = static_cast<int>(m.vocab.size());
  const int dh = hyper.d_h;
  const std::array<std::pair<int, int>, kNumParams> shapes = {{
      {v, hyper.d_e},
      {hyper.d_in, m.raw_dim()},
      {hyper.d_in, 1},
      {4 * dh, hyper.d_in},
      {4 * dh, dh},
      {4 * dh, 1},
      {hyper.d_m, dh},
      {hyper.d_m, 1},
      {1, hyper.d_m},
      {1, 1},
  }};
  Rng rng = make_rng(seed, {tag("init")});
  std::uniform_real_distribution<double> u(-hyper.init_scale, hyper.init_scale);
  for (int k = 0; k < kNumParams; ++k) {
    auto [r, c] = shapes[static_cast<size_t>(k)];
    m.params[k] = MatrixXd::Zero(r, c);
    bool bias = k == kProjBias || k == kGateBias || k == kHead1Bias || k == kHead2Bias;
    if (bias) continue;
    for (int i = 0; i < r; ++i) {
      for (int j = 0; j < c; ++j) m.params[k](i, j) = u(rng);
    }
  }
  m.params[kGateBias].block(dh, 0, dh, 1).setConstant(hyper.forget_bias);
  return m;
}

StepInput make_step(const GroundedPhrase& g, const CriticModel& model) {
  StepInput s;
  for (const auto& a : g.phrase.adjectives) s.tokens.push_back(model.token_id(a));
  s.tokens.push_back(model.token_id(g.phrase.noun));
  s.features = Eigen::Map<const VectorXd>(g.features.data(), static_cast<Eigen::Index>(g.features.size()));
  s.s = g.score;
  return s;
}

std::vector<StepInput> make_steps(std::span<const GroundedPhrase> grounded,
                                  const CriticModel& model) {
  std::vector<StepInput> out;
  out.reserve(grounded.size());
  for (const auto& g : grounded) out.push_back(make_step(g, model));
  return out;
}

Eigen::VectorXd encode_step(const StepInput& step, const CriticModel& model) {
  return model.params[kProj] * raw_input(step, model) + model.params[kProjBias].col(0);
}

double score(std::span<const StepInput> steps, const CriticModel& model) {
  return forward(steps, model).s;
}

double rank_loss(double s_pos, double s_neg) { return std::max(0.0, s_neg - s_pos + 1.0); }

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

double binary_loss(double s, int label) {
  // softplus(s) - label * s, written to avoid overflow.
  double softplus = s > 0 ? s + std::log1p(std::exp(-s)) : std::log1p(std::exp(s));
  return softplus - static_cast<double>(label) * s;
}

GradientResult gradients(const CriticModel& model, std::span<const PairExample> batch) {
  GradientResult out{0.0, zeros_like(model.params)};
  if (batch.empty()) return out;
  const double w = 1.0 / static_cast<double>(batch.size());
  for (const auto& ex : batch) {
    Trace tp = forward(ex.positive, model);
    Trace tn = forward(ex.negative, model);
    check_finite(tp.s, "critic score (positive)");
    check_finite(tn.s, "critic score (negative)");
    double l = rank_loss(tp.s, tn.s);
    out.loss += w * l;
    if (l <= 0.0) continue;
    backward(ex.positive, tp, -w, model, out.grads);
    backward(ex.negative, tn, w, model, out.grads);
  }
  return out;
}

GradientResult gradients(const CriticModel& model, std::span<const LabeledExample> batch) {
  GradientResult out{0.0, zeros_like(model.params)};
  if (batch.empty()) return out;
  const double w = 1.0 / static_cast<double>(batch.size());
  for (const auto& ex : batch) {
    Trace t = forward(ex.steps, model);
    check_finite(t.s, "critic score");
    out.loss += w * binary_loss(t.s, ex.label);
    backward(ex.steps, t, w * (sigmoid(t.s) - ex.label), model, out.grads);
  }
  return out;
}

double pairwise_accuracy(const CriticModel& model, std::span<const PairExample> pairs) {
  if (pairs.empty()) return 0.0;
  size_t ok = 0;
  for (const auto& p : pairs) ok += score(p.positive, model) > score(p.negative, model);
  return static_cast<double>(ok) / static_cast<double>(pairs.size());
}

double label_accuracy(const CriticModel& model, std::span<const LabeledExample> examples) {
  if (examples.empty()) return 0.0;
  size_t ok = 0;
  for (const auto& e : examples) {
    int predicted = sigmoid(score(e.steps, model)) > 0.5 ? 1 : 0;
    ok += predicted == e.label;
  }
  return static_cast<double>(ok) / static_cast<double>(examples.size());
}

TrainedCritic train_ranker(std::span<const PairExample> train, std::span<const PairExample> val,
                           std::span<const std::string> vocabulary, int feature_dim,
                           const CriticHyper& hyper, std::uint64_t seed) {
  if (train.empty()) throw InputError("no training pairs");
  CriticModel m = init_critic(vocabulary, feature_dim, hyper, LossKind::Rank, seed);
  return train_impl<PairExample>(
      train, val, std::move(m), seed,
      [](const CriticModel& mm, std::span<const PairExample> b) { return gradients(mm, b); },
      [](const CriticModel& mm, std::span<const PairExample> v) { return pairwise_accuracy(mm, v); });
}

TrainedCritic train_classifier(std::span<const LabeledExample> train,
                               std::span<const LabeledExample> val,
                               std::span<const std::string> vocabulary, int feature_dim,
                               const CriticHyper& hyper, std::uint64_t seed) {
  if (train.empty()) throw InputError("no training examples");
  bool pos = std::any_of(train.begin(), train.end(), [](const auto& e) { return e.label == 1; });
  bool neg = std::any_of(train.begin(), train.end(), [](const auto& e) { return e.label == 0; });
  if (!(pos && neg)) throw InputError("classifier training set needs both labels");
  CriticModel m = init_critic(vocabulary, feature_dim, hyper, LossKind::Binary, seed);
  return train_impl<LabeledExample>(
      train, val, std::move(m), seed,
      [](const CriticModel& mm, std::span<const LabeledExample> b) { return gradients(mm, b); },
      [](const CriticModel& mm, std::span<const LabeledExample> v) { return label_accuracy(mm, v); });
}

void save_checkpoint(const CriticModel& model, const std::filesystem::path& path) {
  const auto& h = model.hyper;
  json params = json::object();
  for (int k = 0; k < kNumParams; ++k) params[kParamNames[static_cast<size_t>(k)]] = matrix_to_json(model.params[k]);
  json j = {
      {"format", kCheckpointFormat},
      {"kind", "phrase_critic"},
      {"loss", to_string(model.loss)},
      {"margin", 1.0},
      {"hyper",
       {{"d_e", h.d_e}, {"d_in", h.d_in}, {"d_h", h.d_h}, {"d_m", h.d_m},
        {"learning_rate", h.learning_rate}, {"momentum", h.momentum},
        {"batch_size", h.batch_size}, {"epochs", h.epochs}, {"init_scale", h.init_scale},
        {"forget_bias", h.forget_bias}, {"clip_norm", h.clip_norm}}},
      {"vocab", model.vocab},
      {"feature_dim", model.feature_dim},
      {"params", params},
  };
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write checkpoint '" + path.string() + "'");
  out << j.dump() << '\n';
}

CriticModel load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingFileError("cannot open checkpoint '" + path.string() + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError("corrupt checkpoint '" + path.string() + "': " + e.what());
  }
  try {
    int format = j.at("format").get<int>();
    if (format != kCheckpointFormat) {
      throw FormatError("checkpoint format " + std::to_string(format) + " is not supported (expected " +
                        std::to_string(kCheckpointFormat) + ")");
    }
    CriticModel m;
    const auto& h = j.at("hyper");
    m.hyper.d_e = h.at("d_e").get<int>();
    m.hyper.d_in = h.at("d_in").get<int>();
    m.hyper.d_h = h.at("d_h").get<int>();
    m.hyper.d_m = h.at("d_m").get<int>();
    m.hyper.learning_rate = h.at("learning_rate").get<double>();
    m.hyper.momentum = h.at("momentum").get<double>();
    m.hyper.batch_size = h.at("batch_size").get<int>();
    m.hyper.epochs = h.at("epochs").get<int>();
    m.hyper.init_scale = h.at("init_scale").get<double>();
    m.hyper.forget_bias = h.at("forget_bias").get<double>();
    m.hyper.clip_norm = h.at("clip_norm").get<double>();
    m.loss = loss_kind_from_string(j.at("loss").get<std::string>());
    m.vocab = j.at("vocab").get<std::vector<std::string>>();
    if (m.vocab.empty() || m.vocab[0] != "<unk>") throw FormatError("checkpoint vocab must start with <unk>");
    for (size_t i = 0; i < m.vocab.size(); ++i) m.vocab_ids.emplace(m.vocab[i], static_cast<int>(i));
    m.feature_dim = j.at("feature_dim").get<int>();

    // Shapes implied by the hyperparameters must match what is stored.
    CriticModel ref = init_critic(std::vector<std::string>(m.vocab.begin() + 1, m.vocab.end()),
                                  m.feature_dim, m.hyper, m.loss, 0);
    for (int k = 0; k < kNumParams; ++k) {
      const auto& pj = j.at("params").at(kParamNames[static_cast<size_t>(k)]);
      auto shape = pj.at("shape").get<std::vector<Eigen::Index>>();
      auto data = pj.at("data").get<std::vector<double>>();
      const auto& want = ref.params[k];
      if (shape.size() != 2 || shape[0] != want.rows() || shape[1] != want.cols() ||
          static_cast<Eigen::Index>(data.size()) != want.size()) {
        throw FormatError(std::string("checkpoint tensor '") + kParamNames[static_cast<size_t>(k)] +
                          "' has inconsistent shape");
      }
      m.params[k].resize(shape[0], shape[1]);
      size_t n = 0;
      for (Eigen::Index r = 0; r < shape[0]; ++r) {
        for (Eigen::Index c = 0; c < shape[1]; ++c) {
          double v = data[n++];
          if (!std::isfinite(v)) throw FormatError("checkpoint holds a non-finite parameter");
          m.params[k](r, c) = v;
        }
      }
    }
    return m;
  } catch (const json::exception& e) {
    throw FormatError("corrupt checkpoint '" + path.string() + "': " + e.what());
  } catch (const ConfigError& e) {
    throw FormatError("corrupt checkpoint '" + path.string() + "': " + e.what());
  }
}

}  // namespace phrasecritic
