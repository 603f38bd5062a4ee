#pragma once

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "cnntag/corpus.hpp"
#include "cnntag/model.hpp"
#include "cnntag/optim.hpp"
#include "cnntag/random.hpp"

namespace cnntag {

struct TrainConfig {
  std::size_t batch_size = 100;
  double lr = 0.1;
  double momentum = 0.9;
  double l2 = 1e-5;
  std::size_t max_epochs = 30;
  std::size_t patience = 5;
  std::uint64_t seed = 1;

  void validate() const {
    if (batch_size < 1) throw std::invalid_argument("TrainConfig: batch_size must be >= 1");
    if (max_epochs < 1) throw std::invalid_argument("TrainConfig: max_epochs must be >= 1");
    if (patience > max_epochs)
      throw std::invalid_argument("TrainConfig: patience must not exceed max_epochs");
  }

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

struct EpochStats {
  std::size_t epoch = 0;
  /// Mean of the per-batch mean cross-entropy.
  double mean_loss = 0.0;
  double dev_accuracy = 0.0;
  double seconds = 0.0;
};

struct TrainReport {
  std::vector<EpochStats> epochs;
  std::size_t best_epoch = 0;

  /// Per-epoch TSV. Timing is optional so the default output is reproducible.
  std::string to_tsv(bool with_timing = false) const {
    std::string out = with_timing ? "epoch\tloss\tdev_accuracy\tseconds\n"
                                  : "epoch\tloss\tdev_accuracy\n";
    char buf[128];
    for (const EpochStats& e : epochs) {
      if (with_timing)
        std::snprintf(buf, sizeof buf, "%zu\t%.6f\t%.4f\t%.2f\n", e.epoch, e.mean_loss,
                      e.dev_accuracy, e.seconds);
      else
        std::snprintf(buf, sizeof buf, "%zu\t%.6f\t%.4f\n", e.epoch, e.mean_loss, e.dev_accuracy);
      out += buf;
    }
    out += "best_epoch\t" + std::to_string(best_epoch) + "\n";
    return out;
  }
};

struct EvalResult {
  double accuracy = 0.0;
  std::size_t correct = 0;
  std::size_t total = 0;
};

/// Everything needed to tag new text; the unit stored in a model file.
struct TrainedModel {
  Task task = Task::kPos;
  TrainConfig train_config;
  Vocabulary vocab;
  Tagger<float> tagger;
};

inline std::vector<EncodedSentence> encode_corpus(const std::vector<Sentence>& sentences,
                                                  const Vocabulary& vocab,
                                                  const ModelConfig& config, Task task) {
  std::vector<EncodedSentence> out;
  out.reserve(sentences.size());
  for (const Sentence& s : sentences) {
    const auto tags = gold_tags(s, task);
    out.push_back(encode_sentence(s, vocab, config, &tags));
  }
  return out;
}

/// Token accuracy. Gold tags outside the training tag set (id -1) are
/// always wrong.
template <typename T>
EvalResult evaluate_encoded(const Tagger<T>& tagger, const std::vector<EncodedSentence>& data) {
  EvalResult r;
  for (const EncodedSentence& s : data) {
    const auto pred = tagger.predict(s);
    for (std::size_t i = 0; i < s.size(); ++i) {
      ++r.total;
      if (s.gold[i] >= 0 && pred[i] == s.gold[i]) ++r.correct;
    }
  }
  r.accuracy = r.total ? static_cast<double>(r.correct) / static_cast<double>(r.total) : 0.0;
  return r;
}

inline EvalResult evaluate(const TrainedModel& model, const std::vector<Sentence>& data) {
  if (data.empty()) throw std::invalid_argument("evaluate: empty data");
  return evaluate_encoded(model.tagger,
                          encode_corpus(data, model.vocab, model.tagger.config(), model.task));
}

/// Copy of `tagger` whose live weights are its running averages.
template <typename T>
Tagger<T> averaged(const Tagger<T>& tagger) {
  Tagger<T> out = tagger;
  for (Param<T>* p : out.params().list()) {
    p->value = p->avg;
    p->grad.zero();
  }
  return out;
}

struct TrainResult {
  TrainedModel model;
  TrainReport report;
};

/// (sentence, token) training instance.
struct Instance {
  std::uint32_t sentence;
  std::uint32_t token;
};

inline std::vector<Instance> make_instances(const std::vector<EncodedSentence>& data) {
  std::vector<Instance> out;
  for (std::size_t s = 0; s < data.size(); ++s)
    for (std::size_t t = 0; t < data[s].size(); ++t)
      out.push_back({static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(t)});
  return out;
}

inline void shuffle_instances(std::vector<Instance>& xs, Rng& rng) {
  for (std::size_t i = xs.size(); i > 1; --i) std::swap(xs[i - 1], xs[rng.uniform_int(i)]);
}

/// Mini-batch ASGD with dev-set early stopping. Returns the averaged weights
/// of the epoch with the best dev accuracy (earliest on ties).
inline TrainResult train(const std::vector<Sentence>& train_data,
                         const std::vector<Sentence>& dev_data, Task task,
                         ModelConfig model_config, const TrainConfig& cfg,
                         const std::function<void(const EpochStats&)>& on_epoch = {}) {
  if (train_data.empty()) throw std::invalid_argument("train: empty training data");
  if (dev_data.empty()) throw std::invalid_argument("train: empty dev data");
  cfg.validate();

  Vocabulary vocab = build_vocab(train_data, task);
  if (vocab.tag_count() == 0) throw std::invalid_argument("train: empty tag set");
  model_config.tag_count = vocab.tag_count();

  Tagger<float> tagger = Tagger<float>::initialize(model_config, vocab.word_count(),
                                                   vocab.char_count(), derive_seed(cfg.seed, {0}));
  const auto train_enc = encode_corpus(train_data, vocab, model_config, task);
  const auto dev_enc = encode_corpus(dev_data, vocab, model_config, task);
  std::vector<Instance> instances = make_instances(train_enc);
  for (const Instance& in : instances)
    if (train_enc[in.sentence].gold[in.token] < 0)
      throw std::logic_error("train: training tag missing from tag set");

  const std::size_t steps_per_epoch = (instances.size() + cfg.batch_size - 1) / cfg.batch_size;
  OptState<float> opt;
  opt.learning_rate = cfg.lr;
  opt.momentum = cfg.momentum;
  opt.l2 = cfg.l2;
  opt.avg_start_step = static_cast<std::int64_t>(steps_per_epoch) + 1;
  const auto params = tagger.params().list();

  TrainResult result;
  Tagger<float> best;
  double best_acc = -1.0;
  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    const auto started = std::chrono::steady_clock::now();
    Rng shuffle_rng(derive_seed(cfg.seed, {1, epoch}));
    shuffle_instances(instances, shuffle_rng);

    double loss_sum = 0.0;
    for (std::size_t begin = 0; begin < instances.size(); begin += cfg.batch_size) {
      const std::size_t end = std::min(instances.size(), begin + cfg.batch_size);
      const float scale = 1.0f / static_cast<float>(end - begin);
      double batch_loss = 0.0;
      for (std::size_t k = begin; k < end; ++k) {
        const Instance in = instances[k];
        const EncodedSentence& s = train_enc[in.sentence];
        Rng rng(derive_seed(cfg.seed, {2, epoch, k}));
        batch_loss += tagger.accumulate_gradients(
            s, in.token, static_cast<std::size_t>(s.gold[in.token]), scale, true, rng);
      }
      loss_sum += batch_loss / static_cast<double>(end - begin);
      asgd_step<float>(params, opt);
    }

    Tagger<float> snapshot = averaged(tagger);
    EpochStats stats;
    stats.epoch = epoch;
    stats.mean_loss = loss_sum / static_cast<double>(steps_per_epoch);
    stats.dev_accuracy = evaluate_encoded(snapshot, dev_enc).accuracy;
    stats.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    result.report.epochs.push_back(stats);
    if (on_epoch) on_epoch(stats);

    if (stats.dev_accuracy > best_acc) {
      best_acc = stats.dev_accuracy;
      result.report.best_epoch = epoch;
      best = std::move(snapshot);
    }
    if (epoch - result.report.best_epoch >= cfg.patience) break;
  }

  result.model.task = task;
  result.model.train_config = cfg;
  result.model.vocab = std::move(vocab);
  result.model.tagger = std::move(best);
  return result;
}

}  // namespace cnntag
