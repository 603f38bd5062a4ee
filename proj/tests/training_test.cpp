#include "cnntag/training.hpp"

#include <gtest/gtest.h>

#include <algorithm>

#include "cnntag/serialize.hpp"
#include "tagger_check.hpp"
#include "test_util.hpp"

namespace cnntag {
namespace {

using testing::small_config;

TrainConfig quick(std::size_t epochs, std::size_t patience, std::uint64_t seed = 3) {
  TrainConfig tc;
  tc.batch_size = 20;
  tc.max_epochs = epochs;
  tc.patience = patience;
  tc.seed = seed;
  return tc;
}

TEST(TrainConfig, Validation) {
  TrainConfig tc;
  EXPECT_NO_THROW(tc.validate());
  tc.batch_size = 0;
  EXPECT_THROW(tc.validate(), std::invalid_argument);
  tc = TrainConfig{};
  tc.patience = tc.max_epochs + 1;
  EXPECT_THROW(tc.validate(), std::invalid_argument);
}

TEST(Instances, CountIsSumOfSentenceLengths) {
  const auto corpus = testing::toy_corpus(30, 1);
  const Vocabulary v = build_vocab(corpus, Task::kPos);
  ModelConfig c = small_config(InputMode::kChar, v.tag_count());
  const auto enc = encode_corpus(corpus, v, c, Task::kPos);
  std::size_t total = 0;
  for (const Sentence& s : corpus) total += s.tokens.size();
  EXPECT_EQ(make_instances(enc).size(), total);
}

TEST(Instances, ShuffleIsAPermutation) {
  const auto corpus = testing::toy_corpus(40, 2);
  const Vocabulary v = build_vocab(corpus, Task::kPos);
  const auto enc = encode_corpus(corpus, v, small_config(InputMode::kChar, v.tag_count()), Task::kPos);
  const auto original = make_instances(enc);
  auto shuffled = original;
  Rng rng(5);
  shuffle_instances(shuffled, rng);
  auto key = [](const Instance& a) { return (std::uint64_t(a.sentence) << 32) | a.token; };
  std::vector<std::uint64_t> a, b;
  for (const auto& x : original) a.push_back(key(x));
  for (const auto& x : shuffled) b.push_back(key(x));
  EXPECT_NE(a, b);
  std::sort(b.begin(), b.end());
  EXPECT_EQ(a, b);
}

TEST(Train, RejectsEmptyData) {
  const auto corpus = testing::toy_corpus(5, 3);
  const ModelConfig c = small_config(InputMode::kChar, 0);
  EXPECT_THROW(train({}, corpus, Task::kPos, c, quick(1, 0)), std::invalid_argument);
  EXPECT_THROW(train(corpus, {}, Task::kPos, c, quick(1, 0)), std::invalid_argument);
}

TEST(Train, ZeroPatienceRunsOneEpoch) {
  const auto corpus = testing::toy_corpus(20, 4);
  const auto r = train(corpus, corpus, Task::kPos, small_config(InputMode::kChar, 0), quick(10, 0));
  EXPECT_EQ(r.report.epochs.size(), 1u);
  EXPECT_EQ(r.report.best_epoch, 1u);
}

TEST(Train, LossDecreasesAndBestEpochIsMaximal) {
  const auto corpus = testing::toy_corpus(120, 5);
  const std::vector<Sentence> tr(corpus.begin(), corpus.begin() + 100);
  const std::vector<Sentence> dev(corpus.begin() + 100, corpus.end());
  const auto r = train(tr, dev, Task::kPos, small_config(InputMode::kChar, 0), quick(6, 6));
  ASSERT_EQ(r.report.epochs.size(), 6u);
  EXPECT_GT(r.report.epochs[0].mean_loss, r.report.epochs[2].mean_loss);

  double best = -1.0;
  std::size_t best_epoch = 0;
  for (const auto& e : r.report.epochs)
    if (e.dev_accuracy > best) {
      best = e.dev_accuracy;
      best_epoch = e.epoch;
    }
  EXPECT_EQ(r.report.best_epoch, best_epoch);
  EXPECT_EQ(evaluate(r.model, dev).accuracy, best);
}

TEST(Train, StopsAfterPatienceWithoutImprovement) {
  const auto corpus = testing::toy_corpus(40, 6);
  const auto r = train(corpus, corpus, Task::kPos, small_config(InputMode::kWord, 0), quick(30, 2));
  const auto& eps = r.report.epochs;
  ASSERT_FALSE(eps.empty());
  if (eps.size() < 30) {
    EXPECT_EQ(eps.size(), r.report.best_epoch + 2);
  }
  for (const auto& e : eps) EXPECT_LE(e.dev_accuracy, eps[r.report.best_epoch - 1].dev_accuracy);
}

TEST(Train, SameSeedIsBitIdentical) {
  const auto corpus = testing::toy_corpus(30, 7);
  const ModelConfig c = small_config(InputMode::kWordChar, 0);
  const auto a = train(corpus, corpus, Task::kMorph, c, quick(3, 3, 11));
  const auto b = train(corpus, corpus, Task::kMorph, c, quick(3, 3, 11));
  EXPECT_EQ(a.report.to_tsv(), b.report.to_tsv());
  EXPECT_EQ(serialize_model(a.model), serialize_model(b.model));
  const auto d = train(corpus, corpus, Task::kMorph, c, quick(3, 3, 12));
  EXPECT_NE(serialize_model(a.model), serialize_model(d.model));
}

class Evaluate : public ::testing::Test {
 protected:
  void SetUp() override {
    corpus_ = testing::toy_corpus(20, 8);
    result_ = train(corpus_, corpus_, Task::kPos, small_config(InputMode::kChar, 0), quick(1, 0));
  }

  /// Gold equal to the model's own predictions.
  Sentence self_labelled(const Sentence& s) const {
    Sentence out = s;
    const auto tags = predict_sentence(result_.model.tagger, result_.model.vocab, s);
    for (std::size_t i = 0; i < tags.size(); ++i) out.tokens[i].upos = tags[i];
    return out;
  }

  std::vector<Sentence> corpus_;
  TrainResult result_;
};

TEST_F(Evaluate, PerfectPredictionsScoreOne) {
  std::vector<Sentence> gold;
  for (const auto& s : corpus_) gold.push_back(self_labelled(s));
  const auto r = evaluate(result_.model, gold);
  EXPECT_EQ(r.accuracy, 1.0);
  EXPECT_EQ(r.correct, r.total);
}

TEST_F(Evaluate, ThreeOfFour) {
  Sentence s = corpus_[0];
  s.tokens.resize(4);
  s = self_labelled(s);
  const auto& tags = result_.model.vocab;
  const std::string wrong = tags.tag(0) == s.tokens[2].upos ? tags.tag(1) : tags.tag(0);
  s.tokens[2].upos = wrong;
  const auto r = evaluate(result_.model, {s});
  EXPECT_EQ(r.correct, 3u);
  EXPECT_EQ(r.total, 4u);
  EXPECT_EQ(r.accuracy, 0.75);
}

TEST_F(Evaluate, UnseenGoldTagIsWrong) {
  Sentence s = self_labelled(corpus_[1]);
  s.tokens[0].upos = "NEVER-SEEN";
  const auto r = evaluate(result_.model, {s});
  EXPECT_EQ(r.correct, r.total - 1);
}

TEST_F(Evaluate, RejectsEmptyData) {
  EXPECT_THROW(evaluate(result_.model, {}), std::invalid_argument);
}

TEST(Report, TsvLayout) {
  TrainReport r;
  r.epochs.push_back({1, 1.5, 0.25, 3.0});
  r.epochs.push_back({2, 0.75, 0.5, 2.0});
  r.best_epoch = 2;
  EXPECT_EQ(r.to_tsv(),
            "epoch\tloss\tdev_accuracy\n1\t1.500000\t0.2500\n2\t0.750000\t0.5000\nbest_epoch\t2\n");
  EXPECT_NE(r.to_tsv(true).find("seconds"), std::string::npos);
}

}  // namespace
}  // namespace cnntag
