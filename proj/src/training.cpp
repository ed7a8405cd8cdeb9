#include "rectex/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "rectex/errors.hpp"
#include "rectex/matrix.hpp"
#include "rectex/parallel.hpp"
#include "rectex/rng.hpp"
#include "rectex/sgn.hpp"

namespace rectex {

namespace {

constexpr std::uint64_t stream_net = 0x6e657477;
constexpr std::uint64_t stream_probe = 0x70726f62;
constexpr std::uint64_t stream_data = 0x64617461;
constexpr std::uint64_t stream_train = 0x74726169;

double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

double softplus(double t) {
  return std::max(t, 0.0) + std::log1p(std::exp(-std::abs(t)));
}

struct Params {
  Matrix w_hidden;               // h x d
  std::vector<double> b_hidden;  // h
  std::vector<double> w_out;     // h
  double b_out = 0.0;
};

struct RunOutcome {
  bool diverged = true;
  double val_error = 1.0;
  Params best;
  std::size_t epochs_run = 0;
  std::vector<double> loss_curve;
};

double activate(double z, Activation act, double scale) {
  return act == Activation::relu ? rectify(z) : compressed_tanh(z, scale);
}

// Rectifier slope at zero is taken as 1, matching sgn(0) = +1.
double activate_grad(double z, Activation act, double scale) {
  return act == Activation::relu ? (z >= 0.0 ? 1.0 : 0.0)
                                 : compressed_tanh_grad(z, scale);
}

double forward(const Params& p, std::span<const double> x, Activation act, double scale,
               std::vector<double>& pre, std::vector<double>& hid) {
  const std::size_t h = p.w_out.size();
  double z = p.b_out;
  for (std::size_t i = 0; i < h; ++i) {
    pre[i] = dot(p.w_hidden.row(i), x) + p.b_hidden[i];
    hid[i] = activate(pre[i], act, scale);
    z += p.w_out[i] * hid[i];
  }
  return z;
}

double classification_error(const Params& p, const Dataset& data, Activation act,
                            double scale, std::size_t begin, std::size_t end) {
  const std::size_t h = p.w_out.size();
  std::vector<double> pre(h), hid(h);
  std::size_t wrong = 0;
  for (std::size_t i = begin; i < end; ++i) {
    const double z = forward(p, data.points[i], act, scale, pre, hid);
    if (sgn(z) != data.labels[i]) ++wrong;
  }
  return end > begin ? static_cast<double>(wrong) / static_cast<double>(end - begin) : 0.0;
}

bool params_finite(const Params& p) {
  if (!all_finite(p.w_hidden) || !std::isfinite(p.b_out)) return false;
  for (double v : p.b_hidden) {
    if (!std::isfinite(v)) return false;
  }
  for (double v : p.w_out) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

double weight_norm_sq(const Params& p) {
  double s = 0.0;
  for (double v : p.w_hidden.data()) s += v * v;
  for (double v : p.w_out) s += v * v;
  return s;
}

RunOutcome run_one_rate(const Dataset& data, const TrainConfig& cfg, double lr,
                        std::size_t run_index, std::size_t val_count) {
  const std::size_t d = data.dim;
  const std::size_t h = cfg.hidden_units;
  const std::size_t train_total = data.train_count();
  const std::size_t core = train_total - val_count;
  const Activation act = cfg.activation;
  const double scale = cfg.ctanh_scale;

  SplitRng rng(cfg.seed, derive_stream(stream_train, run_index));
  Params p;
  p.w_hidden = Matrix(h, d);
  const double hidden_sd = 1.0 / std::sqrt(static_cast<double>(d));
  for (std::size_t i = 0; i < h; ++i) {
    for (std::size_t j = 0; j < d; ++j) p.w_hidden(i, j) = hidden_sd * rng.normal();
  }
  p.b_hidden.assign(h, 0.0);
  p.w_out.resize(h);
  const double out_sd = 1.0 / std::sqrt(static_cast<double>(h));
  for (std::size_t i = 0; i < h; ++i) p.w_out[i] = out_sd * rng.normal();
  p.b_out = 0.0;

  RunOutcome out;
  out.best = p;
  out.val_error = classification_error(p, data, act, scale, core, train_total);

  std::vector<std::size_t> order(core);
  std::iota(order.begin(), order.end(), 0);

  Matrix gw(h, d);
  std::vector<double> gb(h), gv(h), pre(h), hid(h);
  std::size_t epochs_since_best = 0;

  for (std::size_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    rng.shuffle(order);
    double loss_sum = 0.0;

    for (std::size_t start = 0; start < core; start += cfg.batch_size) {
      const std::size_t stop = std::min(core, start + cfg.batch_size);
      const double inv = 1.0 / static_cast<double>(stop - start);
      gw.fill(0.0);
      std::fill(gb.begin(), gb.end(), 0.0);
      std::fill(gv.begin(), gv.end(), 0.0);
      double g0 = 0.0;

      for (std::size_t bi = start; bi < stop; ++bi) {
        const std::size_t idx = order[bi];
        const std::vector<double>& x = data.points[idx];
        const double y = static_cast<double>(data.labels[idx]);
        const double z = forward(p, x, act, scale, pre, hid);
        loss_sum += softplus(-y * z);
        const double g = -y * sigmoid(-y * z);
        g0 += g;
        for (std::size_t i = 0; i < h; ++i) {
          gv[i] += g * hid[i];
          const double gp = g * p.w_out[i] * activate_grad(pre[i], act, scale);
          gb[i] += gp;
          auto grow = gw.row(i);
          for (std::size_t j = 0; j < d; ++j) grow[j] += gp * x[j];
        }
      }

      // Averaged data gradient plus weight decay (weights only, not biases).
      for (std::size_t i = 0; i < h; ++i) {
        auto wrow = p.w_hidden.row(i);
        auto grow = gw.row(i);
        for (std::size_t j = 0; j < d; ++j) {
          wrow[j] -= lr * (grow[j] * inv + cfg.l2 * wrow[j]);
        }
        p.b_hidden[i] -= lr * gb[i] * inv;
        p.w_out[i] -= lr * (gv[i] * inv + cfg.l2 * p.w_out[i]);
      }
      p.b_out -= lr * g0 * inv;
    }

    const double epoch_loss =
        loss_sum / static_cast<double>(core) + 0.5 * cfg.l2 * weight_norm_sq(p);
    out.loss_curve.push_back(epoch_loss);
    out.epochs_run = epoch + 1;
    if (!std::isfinite(epoch_loss) || !params_finite(p)) {
      out.diverged = true;
      return out;
    }

    const double val_error = classification_error(p, data, act, scale, core, train_total);
    if (val_error < out.val_error) {
      out.val_error = val_error;
      out.best = p;
      epochs_since_best = 0;
    } else {
      ++epochs_since_best;
    }
    if (epochs_since_best >= cfg.patience) break;
  }

  out.diverged = false;
  return out;
}

}  // namespace

void Dataset::validate() const {
  if (points.size() != labels.size()) {
    throw std::invalid_argument("dataset: point/label count mismatch");
  }
  if (test_count > points.size()) {
    throw std::invalid_argument("dataset: test split larger than dataset");
  }
  for (const auto& x : points) {
    if (x.size() != dim) throw std::invalid_argument("dataset: point dimension mismatch");
  }
  for (int y : labels) {
    if (y != 1 && y != -1) throw std::invalid_argument("dataset: labels must be +1 or -1");
  }
}

ReluNetwork random_labeling_network(std::size_t n, std::size_t d, std::uint64_t seed) {
  if (n < 1 || d < 1) throw std::invalid_argument("random_labeling_network: n and d must be positive");
  constexpr std::size_t max_attempts = 100;
  constexpr double min_minority = 0.05;
  for (std::size_t attempt = 0; attempt < max_attempts; ++attempt) {
    SplitRng rng(seed, derive_stream(stream_net, attempt));
    ReluNetwork net;
    net.dim = d;
    for (std::size_t k = 0; k < n; ++k) {
      AffineUnit unit;
      unit.weights.resize(d);
      for (std::size_t j = 0; j < d; ++j) unit.weights[j] = rng.normal();
      unit.bias = rng.normal();
      if (rng.coin()) {
        net.positive_units.push_back(std::move(unit));
      } else {
        net.negative_units.push_back(std::move(unit));
      }
    }
    net.output_bias = rng.normal();
    if (probe_minority_fraction(net, 10000, derive_stream(seed, attempt)) >= min_minority) {
      return net;
    }
  }
  throw std::runtime_error("random_labeling_network: no balanced draw after bounded retries");
}

double probe_minority_fraction(const ReluNetwork& net, std::size_t probe_count,
                               std::uint64_t seed) {
  SplitRng rng(seed, stream_probe);
  std::vector<double> x(net.dim);
  std::size_t positive = 0;
  for (std::size_t i = 0; i < probe_count; ++i) {
    for (double& v : x) v = rng.normal();
    if (net.evaluate(x) == 1) ++positive;
  }
  const std::size_t minority = std::min(positive, probe_count - positive);
  return static_cast<double>(minority) / static_cast<double>(probe_count);
}

Dataset make_dataset(const ReluNetwork& net, std::size_t total, std::size_t test,
                     std::uint64_t seed) {
  if (test >= total) throw std::invalid_argument("make_dataset: test split must be smaller than total");
  Dataset data;
  data.dim = net.dim;
  data.test_count = test;
  data.points.resize(total);
  data.labels.resize(total);
  SplitRng rng(seed, stream_data);
  for (std::size_t i = 0; i < total; ++i) {
    data.points[i].resize(net.dim);
    for (double& v : data.points[i]) v = rng.normal();
    data.labels[i] = net.evaluate(data.points[i]);
  }
  return data;
}

TrainResult train(const Dataset& data, const TrainConfig& cfg) {
  data.validate();
  if (cfg.activation != Activation::relu && cfg.activation != Activation::compressed_tanh) {
    throw std::invalid_argument("train: activation must be relu or compressed_tanh");
  }
  if (cfg.hidden_units < 1) throw std::invalid_argument("train: need at least one hidden unit");
  if (cfg.batch_size < 1) throw std::invalid_argument("train: batch size must be positive");
  if (cfg.lr_grid.empty()) throw std::invalid_argument("train: empty learning-rate grid");
  const std::size_t train_total = data.train_count();
  if (train_total < 2) throw std::invalid_argument("train: training split too small");

  std::size_t val_count = static_cast<std::size_t>(
      std::floor(cfg.validation_fraction * static_cast<double>(train_total)));
  val_count = std::clamp<std::size_t>(val_count, 1, train_total - 1);

  std::vector<RunOutcome> runs(cfg.lr_grid.size());
  parallel_for(cfg.lr_grid.size(), [&](std::size_t r) {
    runs[r] = run_one_rate(data, cfg, cfg.lr_grid[r], r, val_count);
  });

  std::size_t chosen = runs.size();
  for (std::size_t r = 0; r < runs.size(); ++r) {
    if (runs[r].diverged) continue;
    if (chosen == runs.size() || runs[r].val_error < runs[chosen].val_error) chosen = r;
  }
  if (chosen == runs.size()) {
    throw std::runtime_error("train: every learning rate diverged");
  }

  const RunOutcome& best = runs[chosen];
  TrainResult result;
  result.chosen_lr = cfg.lr_grid[chosen];
  result.epochs_run = best.epochs_run;
  result.loss_curve = best.loss_curve;

  GeneralNetwork net;
  net.dim = data.dim;
  ActivatedLayer hidden;
  hidden.linear.weights = best.best.w_hidden;
  hidden.linear.biases = best.best.b_hidden;
  hidden.activation = cfg.activation;
  if (cfg.activation == Activation::compressed_tanh) hidden.ctanh_scale = cfg.ctanh_scale;
  ActivatedLayer out;
  out.linear.weights = Matrix(1, cfg.hidden_units);
  for (std::size_t i = 0; i < cfg.hidden_units; ++i) {
    out.linear.weights(0, i) = best.best.w_out[i];
  }
  out.linear.biases = {best.best.b_out};
  out.activation = Activation::sign;
  net.layers = {std::move(hidden), std::move(out)};
  net.validate();
  result.network = std::move(net);

  result.train_error = classification_error(best.best, data, cfg.activation,
                                            cfg.ctanh_scale, 0, train_total);
  result.test_error = classification_error(best.best, data, cfg.activation,
                                           cfg.ctanh_scale, train_total, data.size());
  return result;
}

std::vector<ExperimentRow> run_experiment(
    const std::vector<std::size_t>& dims, const std::vector<std::size_t>& ns,
    std::uint64_t seed, const ExperimentOptions& options,
    const std::function<void(std::size_t, std::size_t, const ReluNetwork&,
                             const Dataset&)>& on_dataset) {
  std::vector<ExperimentRow> rows;
  std::size_t pair_index = 0;
  for (std::size_t n : ns) {
    if (n >= 31 || (static_cast<std::size_t>(1) << n) > options.hidden_cap) {
      throw guard_error("run_experiment: 2^n exceeds the hidden-width cap");
    }
    for (std::size_t d : dims) {
      const ReluNetwork labeler =
          random_labeling_network(n, d, derive_stream(seed, stream_net, pair_index));
      const Dataset data =
          make_dataset(labeler, options.total_examples, options.test_examples,
                       derive_stream(seed, stream_data, pair_index));
      if (on_dataset) on_dataset(n, d, labeler, data);

      struct Setting {
        const char* name;
        Activation act;
        std::size_t width;
      };
      const Setting settings[] = {
          {"relu", Activation::relu, n},
          {"ctanh", Activation::compressed_tanh, n},
          {"ctanh_wide", Activation::compressed_tanh, static_cast<std::size_t>(1) << n},
      };
      for (std::size_t s = 0; s < 3; ++s) {
        TrainConfig cfg;
        cfg.hidden_units = settings[s].width;
        cfg.activation = settings[s].act;
        cfg.max_epochs = options.max_epochs;
        cfg.seed = derive_stream(seed, pair_index, s);
        const TrainResult res = train(data, cfg);
        rows.push_back({n, d, settings[s].name, res.train_error, res.test_error,
                        res.chosen_lr, res.epochs_run});
      }
      ++pair_index;
    }
  }
  return rows;
}

}  // namespace rectex
