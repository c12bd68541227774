#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "astro/error.hpp"
#include "astro/rng.hpp"

namespace astro {

enum class InputMode { GraphOnly, PretrainedOnly, Concat };

inline std::string_view to_string(InputMode m) {
  switch (m) {
    case InputMode::GraphOnly: return "graph_only";
    case InputMode::PretrainedOnly: return "pretrained_only";
    case InputMode::Concat: return "concat";
  }
  return "graph_only";
}

inline InputMode parse_input_mode(std::string_view s) {
  if (s == "graph_only") return InputMode::GraphOnly;
  if (s == "pretrained_only") return InputMode::PretrainedOnly;
  if (s == "concat") return InputMode::Concat;
  throw ConfigError("unknown input mode '" + std::string(s) + "' (graph_only|pretrained_only|concat)");
}

inline bool needs_graph(InputMode m) { return m != InputMode::PretrainedOnly; }
inline bool needs_pretrained(InputMode m) { return m != InputMode::GraphOnly; }

using OptVec = std::optional<std::span<const float>>;

// Pair layout: graph_only [a | b], pretrained_only [pa | pb], concat [pa | a | pb | b].
inline void pair_vector_into(OptVec a, OptVec b, OptVec pa, OptVec pb, InputMode mode, std::span<double> out) {
  auto need = [](const OptVec& v, const char* what) -> std::span<const float> {
    if (!v) throw MissingComponent(std::string("pair is missing its ") + what + " embedding");
    return *v;
  };
  std::vector<std::span<const float>> parts;
  if (mode == InputMode::GraphOnly) {
    parts = {need(a, "graph"), need(b, "graph")};
  } else if (mode == InputMode::PretrainedOnly) {
    parts = {need(pa, "pretrained"), need(pb, "pretrained")};
  } else {
    parts = {need(pa, "pretrained"), need(a, "graph"), need(pb, "pretrained"), need(b, "graph")};
  }
  if (parts[0].size() != parts[parts.size() / 2].size() ||
      (parts.size() == 4 && parts[1].size() != parts[3].size()))
    throw DimMismatch("pair members have different embedding widths");
  std::size_t total = 0;
  for (auto p : parts) total += p.size();
  if (total != out.size())
    throw DimMismatch("pair vector has " + std::to_string(total) + " components, expected " +
                      std::to_string(out.size()));
  std::size_t off = 0;
  for (auto p : parts)
    for (float x : p) out[off++] = x;
}

inline std::vector<double> pair_vector(OptVec a, OptVec b, OptVec pa, OptVec pb, InputMode mode) {
  std::size_t n = 0;
  if (needs_graph(mode)) n += (a ? a->size() : 0) + (b ? b->size() : 0);
  if (needs_pretrained(mode)) n += (pa ? pa->size() : 0) + (pb ? pb->size() : 0);
  std::vector<double> out(n);
  pair_vector_into(a, b, pa, pb, mode, out);
  return out;
}

struct DenseLayer {
  std::size_t in = 0;
  std::size_t out = 0;
  std::vector<double> weights;  // out x in, row-major
  std::vector<double> bias;     // out
};

// Feed-forward clone detector: tanh hidden layers, one sigmoid output unit.
struct DetectorModel {
  std::vector<std::size_t> widths;  // [in, hidden..., 1]
  std::vector<DenseLayer> layers;
  double dropout_rate = 0.1;
  InputMode input_mode = InputMode::GraphOnly;
  std::uint64_t seed = 0;
  std::map<std::string, std::string> fingerprints;
  // Per-component input standardisation x' = (x - shift) * scale; empty means identity.
  std::vector<double> input_shift, input_scale;

  std::size_t input_dim() const { return widths.empty() ? 0 : widths.front(); }

  bool all_finite() const {
    for (const auto& l : layers) {
      for (double w : l.weights)
        if (!std::isfinite(w)) return false;
      for (double b : l.bias)
        if (!std::isfinite(b)) return false;
    }
    return true;
  }

  bool operator==(const DetectorModel& o) const {
    if (widths != o.widths || dropout_rate != o.dropout_rate || input_mode != o.input_mode || seed != o.seed ||
        input_shift != o.input_shift || input_scale != o.input_scale || layers.size() != o.layers.size())
      return false;
    for (std::size_t i = 0; i < layers.size(); ++i)
      if (layers[i].weights != o.layers[i].weights || layers[i].bias != o.layers[i].bias) return false;
    return true;
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["format"] = "astro-detector/1";
    j["widths"] = widths;
    j["mode"] = std::string(to_string(input_mode));
    j["dropout"] = dropout_rate;
    j["seed"] = seed;
    j["fingerprints"] = fingerprints;
    if (!input_shift.empty()) j["input_norm"] = {{"shift", input_shift}, {"scale", input_scale}};
    j["layers"] = nlohmann::json::array();
    for (const auto& l : layers) j["layers"].push_back({{"weights", l.weights}, {"bias", l.bias}});
    return j;
  }

  static DetectorModel from_json(const nlohmann::json& j) {
    DetectorModel m;
    try {
      m.widths = j.at("widths").get<std::vector<std::size_t>>();
      m.input_mode = parse_input_mode(j.at("mode").get<std::string>());
      m.dropout_rate = j.at("dropout").get<double>();
      m.seed = j.at("seed").get<std::uint64_t>();
      if (j.contains("fingerprints")) m.fingerprints = j["fingerprints"].get<std::map<std::string, std::string>>();
      if (j.contains("input_norm")) {
        m.input_shift = j["input_norm"].at("shift").get<std::vector<double>>();
        m.input_scale = j["input_norm"].at("scale").get<std::vector<double>>();
      }
      const auto& layers = j.at("layers");
      if (m.widths.size() < 2 || layers.size() != m.widths.size() - 1)
        throw FormatError("model", 0, "layer count does not match widths");
      for (std::size_t i = 0; i < layers.size(); ++i) {
        DenseLayer l{m.widths[i], m.widths[i + 1], layers[i].at("weights").get<std::vector<double>>(),
                     layers[i].at("bias").get<std::vector<double>>()};
        if (l.weights.size() != l.in * l.out || l.bias.size() != l.out)
          throw FormatError("model", 0, "layer " + std::to_string(i) + " has non-conforming shapes");
        m.layers.push_back(std::move(l));
      }
    } catch (const nlohmann::json::exception& e) {
      throw FormatError("model", 0, e.what());
    }
    if (m.widths.back() != 1) throw FormatError("model", 0, "output width must be 1");
    if (!m.input_shift.empty() &&
        (m.input_shift.size() != m.widths.front() || m.input_scale.size() != m.widths.front()))
      throw FormatError("model", 0, "input_norm width does not match the input layer");
    if (!(m.dropout_rate >= 0.0 && m.dropout_rate < 1.0)) throw FormatError("model", 0, "dropout must lie in [0,1)");
    return m;
  }

  void save(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << to_json().dump() << '\n';
  }

  static DetectorModel load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open model file " + path.string());
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(path.string(), 0, e.what());
    }
    return from_json(j);
  }
};

inline const std::vector<std::size_t>& default_hidden_widths() {
  static const std::vector<std::size_t> w = {512, 256, 128};
  return w;
}

// Hidden layers: U(-1/sqrt(fan_in), 1/sqrt(fan_in)). The output layer starts at
// zero, so an untrained model predicts exactly 0.5 everywhere.
inline DetectorModel make_detector(std::size_t input_dim, const std::vector<std::size_t>& hidden, double dropout,
                                   InputMode mode, std::uint64_t seed) {
  if (input_dim == 0) throw DimMismatch("detector input width must be positive");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dropout must lie in [0,1)");
  DetectorModel m;
  m.widths.push_back(input_dim);
  m.widths.insert(m.widths.end(), hidden.begin(), hidden.end());
  m.widths.push_back(1);
  m.dropout_rate = dropout;
  m.input_mode = mode;
  m.seed = seed;
  Rng rng(derive_seed(seed, "detector_init"));
  for (std::size_t i = 0; i + 1 < m.widths.size(); ++i) {
    DenseLayer l{m.widths[i], m.widths[i + 1], std::vector<double>(m.widths[i] * m.widths[i + 1], 0.0),
                 std::vector<double>(m.widths[i + 1], 0.0)};
    if (i + 2 < m.widths.size()) {
      const double bound = 1.0 / std::sqrt(static_cast<double>(l.in));
      std::uniform_real_distribution<double> uni(-bound, bound);
      for (auto& w : l.weights) w = uni(rng);
      for (auto& b : l.bias) b = uni(rng);
    }
    m.layers.push_back(std::move(l));
  }
  return m;
}

namespace detail {

inline double sigmoid_fn(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

// Activations of one forward pass, kept for backpropagation.
struct ForwardTrace {
  std::vector<std::vector<double>> post;  // post[0] = input, post[i] = layer i output after dropout
  std::vector<std::vector<double>> mask;  // dropout scale per hidden unit (empty in eval mode)
  double logit = 0.0;
  double prob = 0.5;
};

inline void affine(const DenseLayer& l, std::span<const double> x, std::vector<double>& y) {
  y.assign(l.out, 0.0);
  for (std::size_t r = 0; r < l.out; ++r) {
    const double* w = l.weights.data() + r * l.in;
    double s = l.bias[r];
    for (std::size_t c = 0; c < l.in; ++c) s += w[c] * x[c];
    y[r] = s;
  }
}

inline ForwardTrace forward_trace(const DetectorModel& m, std::span<const double> x, bool train_mode,
                                  std::uint64_t seed) {
  if (x.size() != m.input_dim())
    throw DimMismatch("input has " + std::to_string(x.size()) + " components, model expects " +
                      std::to_string(m.input_dim()));
  ForwardTrace t;
  t.post.emplace_back(x.begin(), x.end());
  if (!m.input_shift.empty())
    for (std::size_t c = 0; c < x.size(); ++c) t.post[0][c] = (x[c] - m.input_shift[c]) * m.input_scale[c];
  Rng rng(derive_seed(seed, "dropout"));
  std::bernoulli_distribution keep(1.0 - m.dropout_rate);
  const double scale = m.dropout_rate > 0.0 ? 1.0 / (1.0 - m.dropout_rate) : 1.0;
  std::vector<double> z;
  for (std::size_t i = 0; i + 1 < m.layers.size(); ++i) {
    affine(m.layers[i], t.post.back(), z);
    for (auto& v : z) v = std::tanh(v);
    std::vector<double> mask;
    if (train_mode && m.dropout_rate > 0.0) {
      mask.resize(z.size());
      for (std::size_t u = 0; u < z.size(); ++u) {
        mask[u] = keep(rng) ? scale : 0.0;
        z[u] *= mask[u];
      }
    }
    t.mask.push_back(std::move(mask));
    t.post.push_back(z);
  }
  affine(m.layers.back(), t.post.back(), z);
  t.logit = z[0];
  t.prob = sigmoid_fn(t.logit);
  return t;
}

}  // namespace detail

// Clone probability of one pair vector. In train mode inverted dropout is
// applied after each hidden activation with a mask drawn from `seed`.
inline double forward(const DetectorModel& m, std::span<const double> x, bool train_mode = false,
                      std::uint64_t seed = 0) {
  return detail::forward_trace(m, x, train_mode, seed).prob;
}

// Binary cross-entropy of one example; `pos_weight` scales the positive term.
inline double bce_loss(double logit, int label, double pos_weight = 1.0) {
  // -log s(z) = softplus(-z), -log(1 - s(z)) = softplus(z)
  auto softplus = [](double v) { return std::log1p(std::exp(-std::abs(v))) + std::max(v, 0.0); };
  return label ? pos_weight * softplus(-logit) : softplus(logit);
}

// Parameter gradients, same shapes as the model layers.
struct DetectorGradient {
  std::vector<DenseLayer> layers;

  static DetectorGradient zeros_like(const DetectorModel& m) {
    DetectorGradient g;
    for (const auto& l : m.layers)
      g.layers.push_back({l.in, l.out, std::vector<double>(l.weights.size(), 0.0), std::vector<double>(l.out, 0.0)});
    return g;
  }
};

// Loss of one example; accumulates d(loss)/d(params) * weight into `grad` and,
// if requested, writes d(loss)/d(input) into `input_grad`.
inline double accumulate_gradient(const DetectorModel& m, std::span<const double> x, int label, bool train_mode,
                                  std::uint64_t seed, double pos_weight, DetectorGradient* grad, double weight = 1.0,
                                  std::vector<double>* input_grad = nullptr) {
  auto t = detail::forward_trace(m, x, train_mode, seed);
  const double loss = bce_loss(t.logit, label, pos_weight);
  const double y = label ? 1.0 : 0.0;
  std::vector<double> delta = {t.prob * (pos_weight * y + 1.0 - y) - pos_weight * y};  // dL/dlogit
  for (std::size_t li = m.layers.size(); li-- > 0;) {
    const DenseLayer& l = m.layers[li];
    const auto& in = t.post[li];
    if (grad) {
      auto& gl = grad->layers[li];
      for (std::size_t r = 0; r < l.out; ++r) {
        const double d = delta[r] * weight;
        gl.bias[r] += d;
        double* gw = gl.weights.data() + r * l.in;
        for (std::size_t c = 0; c < l.in; ++c) gw[c] += d * in[c];
      }
    }
    std::vector<double> back(l.in, 0.0);
    for (std::size_t r = 0; r < l.out; ++r) {
      const double* w = l.weights.data() + r * l.in;
      for (std::size_t c = 0; c < l.in; ++c) back[c] += w[c] * delta[r];
    }
    if (li == 0) {
      if (input_grad) {
        if (!m.input_scale.empty())
          for (std::size_t c = 0; c < l.in; ++c) back[c] *= m.input_scale[c];
        *input_grad = std::move(back);
      }
      break;
    }
    // Through dropout and tanh of layer li-1: post = tanh(pre) * mask.
    const auto& mask = t.mask[li - 1];
    for (std::size_t c = 0; c < l.in; ++c) {
      const double scale = mask.empty() ? 1.0 : mask[c];
      const double act = scale == 0.0 ? 0.0 : in[c] / scale;  // tanh(pre)
      back[c] *= scale * (1.0 - act * act);
    }
    delta = std::move(back);
  }
  return loss;
}

struct Metrics {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  double precision = 0.0, recall = 0.0, f1 = 0.0;

  static Metrics from_counts(std::size_t tp, std::size_t fp, std::size_t tn, std::size_t fn) {
    Metrics m{tp, fp, tn, fn};
    m.precision = tp + fp ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    m.recall = tp + fn ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
    m.f1 = m.precision + m.recall > 0.0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
    return m;
  }

  nlohmann::json to_json() const {
    return {{"precision", precision}, {"recall", recall}, {"f1", f1},
            {"tp", tp},               {"fp", fp},         {"tn", tn}, {"fn", fn}};
  }
};

inline Metrics score(std::span<const double> probabilities, std::span<const int> labels, double threshold = 0.5) {
  if (probabilities.size() != labels.size()) throw DimMismatch("probability and label counts differ");
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool pred = probabilities[i] >= threshold;
    if (pred && labels[i]) ++tp;
    else if (pred) ++fp;
    else if (labels[i]) ++fn;
    else ++tn;
  }
  return Metrics::from_counts(tp, fp, tn, fn);
}

// A labeled feature source: any type with size(), dim(), label(i) and fill(i, span<double>).
template <typename D>
concept LabeledData = requires(const D& d, std::size_t i, std::span<double> out) {
  { d.size() } -> std::convertible_to<std::size_t>;
  { d.dim() } -> std::convertible_to<std::size_t>;
  { d.label(i) } -> std::convertible_to<int>;
  d.fill(i, out);
};

// Row-major in-memory feature matrix.
struct DenseData {
  std::size_t width = 0;
  std::vector<double> features;
  std::vector<int> labels;

  std::size_t size() const { return labels.size(); }
  std::size_t dim() const { return width; }
  int label(std::size_t i) const { return labels[i]; }
  void fill(std::size_t i, std::span<double> out) const {
    std::copy_n(features.begin() + static_cast<std::ptrdiff_t>(i * width), width, out.begin());
  }
  void add(std::span<const double> x, int y) {
    if (width == 0) width = x.size();
    if (x.size() != width) throw DimMismatch("row width differs from dataset width");
    features.insert(features.end(), x.begin(), x.end());
    labels.push_back(y);
  }
};

template <LabeledData D>
std::vector<double> predict(const DetectorModel& m, const D& data) {
  std::vector<double> probs(data.size());
  std::vector<double> x(data.dim());
  for (std::size_t i = 0; i < data.size(); ++i) {
    data.fill(i, x);
    probs[i] = forward(m, x);
  }
  return probs;
}

template <LabeledData D>
Metrics evaluate(const DetectorModel& m, const D& data, double threshold = 0.5) {
  auto probs = predict(m, data);
  std::vector<int> labels(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) labels[i] = data.label(i);
  return score(probs, labels, threshold);
}

// Mean eval-mode BCE over a dataset.
template <LabeledData D>
double mean_loss(const DetectorModel& m, const D& data, double pos_weight = 1.0) {
  std::vector<double> x(data.dim());
  double total = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    data.fill(i, x);
    total += bce_loss(detail::forward_trace(m, x, false, 0).logit, data.label(i), pos_weight);
  }
  return data.size() ? total / static_cast<double>(data.size()) : 0.0;
}

// Sets the model's input standardisation from the data's per-component mean
// and standard deviation. Components with no spread are centred only.
template <LabeledData D>
void standardize_inputs(DetectorModel& m, const D& data) {
  const std::size_t n = data.size(), d = data.dim();
  std::vector<double> mean(d, 0.0), sq(d, 0.0), x(d);
  for (std::size_t i = 0; i < n; ++i) {
    data.fill(i, x);
    for (std::size_t c = 0; c < d; ++c) mean[c] += x[c];
  }
  for (auto& v : mean) v /= static_cast<double>(std::max<std::size_t>(n, 1));
  for (std::size_t i = 0; i < n; ++i) {
    data.fill(i, x);
    for (std::size_t c = 0; c < d; ++c) sq[c] += (x[c] - mean[c]) * (x[c] - mean[c]);
  }
  m.input_shift = mean;
  m.input_scale.assign(d, 1.0);
  for (std::size_t c = 0; c < d; ++c) {
    const double sd = std::sqrt(sq[c] / static_cast<double>(std::max<std::size_t>(n, 1)));
    if (sd > 1e-12) m.input_scale[c] = 1.0 / sd;
  }
}

enum class Optimizer { Sgd, Adam };

inline Optimizer parse_optimizer(std::string_view s) {
  if (s == "sgd") return Optimizer::Sgd;
  if (s == "adam") return Optimizer::Adam;
  throw ConfigError("unknown optimizer '" + std::string(s) + "' (sgd|adam)");
}

inline std::string_view to_string(Optimizer o) { return o == Optimizer::Adam ? "adam" : "sgd"; }

struct FitConfig {
  double learning_rate = 1e-3;
  double dropout = 0.1;
  std::size_t batch_size = 512;
  std::size_t epochs = 50;
  std::uint64_t seed = 0;
  double pos_weight = 1.0;
  Optimizer optimizer = Optimizer::Sgd;
  std::vector<std::size_t> hidden = default_hidden_widths();
  bool standardize = true;  // z-score inputs with training-set statistics

  void validate() const {
    if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
    if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dropout must lie in [0,1)");
    if (batch_size == 0) throw ConfigError("batch_size must be positive");
    if (!(pos_weight > 0.0)) throw ConfigError("pos_weight must be positive");
  }

  nlohmann::json to_json() const {
    return {{"learning_rate", learning_rate}, {"dropout", dropout},     {"batch_size", batch_size},
            {"epochs", epochs},               {"seed", seed},           {"pos_weight", pos_weight},
            {"optimizer", std::string(to_string(optimizer))}, {"hidden", hidden}, {"standardize", standardize}};
  }
};

struct EpochRecord {
  double train_loss = 0.0;  // eval-mode mean BCE over the training set after the epoch
  std::optional<double> val_f1;
};

struct FitResult {
  DetectorModel model;
  std::vector<EpochRecord> history;
  std::size_t best_epoch = 0;  // 1-based; 0 means the initial model was kept
  double initial_train_loss = 0.0;
};

// Mini-batch training of the detector with binary cross-entropy. Returns the
// parameters with the best validation F1 (earliest on ties), or the last epoch
// when no validation set is given.
template <LabeledData D>
FitResult fit(const D& train, const D* val, const FitConfig& cfg, InputMode mode) {
  cfg.validate();
  if (train.size() == 0) throw DegenerateLabels("training set is empty");
  std::size_t positives = 0;
  for (std::size_t i = 0; i < train.size(); ++i) positives += train.label(i) ? 1 : 0;
  if (positives == 0 || positives == train.size())
    throw DegenerateLabels("training set contains a single class");

  FitResult result{make_detector(train.dim(), cfg.hidden, cfg.dropout, mode, cfg.seed), {}, 0, 0.0};
  if (cfg.standardize) standardize_inputs(result.model, train);
  result.initial_train_loss = mean_loss(result.model, train, cfg.pos_weight);
  if (cfg.epochs == 0) return result;

  DetectorModel model = result.model;
  std::optional<double> best_f1;

  // Adam state
  DetectorGradient m1 = DetectorGradient::zeros_like(model), m2 = DetectorGradient::zeros_like(model);
  std::size_t step = 0;
  constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;

  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> x(train.dim());
  const std::uint64_t fit_seed = derive_seed(cfg.seed, "fit");

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const std::uint64_t epoch_seed = derive_seed(fit_seed, epoch);
    Rng shuffle_rng(derive_seed(epoch_seed, "shuffle"));
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      const double w = 1.0 / static_cast<double>(end - start);
      auto grad = DetectorGradient::zeros_like(model);
      double batch_loss = 0.0;
      for (std::size_t p = start; p < end; ++p) {
        train.fill(order[p], x);
        batch_loss += accumulate_gradient(model, x, train.label(order[p]), true, derive_seed(epoch_seed, p + 1),
                                          cfg.pos_weight, &grad, w);
      }
      if (!std::isfinite(batch_loss))
        throw NonFiniteLoss("detector loss diverged at epoch " + std::to_string(epoch + 1));
      ++step;
      for (std::size_t li = 0; li < model.layers.size(); ++li) {
        auto update = [&](std::vector<double>& param, const std::vector<double>& g, std::vector<double>& s1,
                          std::vector<double>& s2) {
          if (cfg.optimizer == Optimizer::Sgd) {
            for (std::size_t i = 0; i < param.size(); ++i) param[i] -= cfg.learning_rate * g[i];
            return;
          }
          const double c1 = 1.0 - std::pow(beta1, static_cast<double>(step));
          const double c2 = 1.0 - std::pow(beta2, static_cast<double>(step));
          for (std::size_t i = 0; i < param.size(); ++i) {
            s1[i] = beta1 * s1[i] + (1.0 - beta1) * g[i];
            s2[i] = beta2 * s2[i] + (1.0 - beta2) * g[i] * g[i];
            param[i] -= cfg.learning_rate * (s1[i] / c1) / (std::sqrt(s2[i] / c2) + eps);
          }
        };
        update(model.layers[li].weights, grad.layers[li].weights, m1.layers[li].weights, m2.layers[li].weights);
        update(model.layers[li].bias, grad.layers[li].bias, m1.layers[li].bias, m2.layers[li].bias);
      }
    }
    if (!model.all_finite()) throw NonFiniteLoss("detector parameters became non-finite");

    EpochRecord rec{mean_loss(model, train, cfg.pos_weight), std::nullopt};
    if (val && val->size() > 0) {
      rec.val_f1 = evaluate(model, *val).f1;
      if (!best_f1 || *rec.val_f1 > *best_f1) {
        best_f1 = rec.val_f1;
        result.model = model;
        result.best_epoch = epoch + 1;
      }
    } else {
      result.model = model;
      result.best_epoch = epoch + 1;
    }
    result.history.push_back(rec);
  }
  return result;
}

}  // namespace astro
