#include "cnntag/serialize.hpp"

#include <gtest/gtest.h>

#include <filesystem>

#include "tagger_check.hpp"
#include "test_util.hpp"

namespace cnntag {
namespace {

/// Untrained model with random weights over a toy vocabulary.
TrainedModel random_model(InputMode mode, Task task, std::uint64_t seed) {
  const auto corpus = testing::toy_corpus(40, seed);
  TrainedModel m;
  m.task = task;
  m.train_config.seed = seed;
  m.vocab = build_vocab(corpus, task);
  ModelConfig c = testing::small_config(mode, m.vocab.tag_count());
  m.tagger = Tagger<float>::initialize(c, m.vocab.word_count(), m.vocab.char_count(), seed);
  return m;
}

std::string expect_format_error(std::string_view bytes) {
  try {
    deserialize_model(bytes);
  } catch (const ModelFormatError& e) {
    return e.what();
  }
  ADD_FAILURE() << "no ModelFormatError";
  return "";
}

TEST(Serialize, StartsWithMagicAndVersion) {
  const std::string bytes = serialize_model(random_model(InputMode::kChar, Task::kPos, 1));
  EXPECT_EQ(bytes.substr(0, 6), "CNNTAG");
  EXPECT_EQ(bytes.substr(6, 4), std::string("\x01\x00\x00\x00", 4));
}

TEST(Serialize, RoundTripIsByteIdentical) {
  for (InputMode mode : {InputMode::kWord, InputMode::kChar, InputMode::kWordChar}) {
    for (Task task : {Task::kPos, Task::kMorph, Task::kStag}) {
      const TrainedModel m = random_model(mode, task, 2);
      const std::string once = serialize_model(m);
      const TrainedModel loaded = deserialize_model(once);
      EXPECT_EQ(serialize_model(loaded), once);
      EXPECT_EQ(loaded.task, task);
      EXPECT_TRUE(loaded.vocab == m.vocab);
      EXPECT_TRUE(loaded.tagger.config() == m.tagger.config());
      EXPECT_TRUE(loaded.train_config == m.train_config);
    }
  }
}

TEST(Serialize, PredictionsAreBitEqualAfterLoad) {
  const TrainedModel m = random_model(InputMode::kWordChar, Task::kPos, 3);
  const TrainedModel loaded = deserialize_model(serialize_model(m));
  const auto sentences = testing::toy_corpus(100, 33);
  Rng unused(0);
  for (const Sentence& s : sentences) {
    const auto e = encode_sentence(s, m.vocab, m.tagger.config());
    for (std::size_t t = 0; t < e.size(); ++t) {
      const auto a = m.tagger.forward(e, t, false, unused);
      const auto b = loaded.tagger.forward(e, t, false, unused);
      ASSERT_EQ(a, b);
    }
    EXPECT_EQ(predict_sentence(m.tagger, m.vocab, s), predict_sentence(loaded.tagger, loaded.vocab, s));
  }
}

TEST(Serialize, FileRoundTrip) {
  const auto dir = std::filesystem::temp_directory_path() / "cnntag_serialize_test";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "m.bin").string();
  const TrainedModel m = random_model(InputMode::kChar, Task::kStag, 4);
  save_model(m, path);
  EXPECT_EQ(read_file(path), serialize_model(m));
  EXPECT_EQ(serialize_model(load_model(path)), serialize_model(m));
  std::filesystem::remove_all(dir);
}

TEST(Serialize, EveryTruncationIsAnError) {
  const std::string bytes = serialize_model(random_model(InputMode::kWord, Task::kPos, 5));
  for (std::size_t n = 0; n < bytes.size(); n += 1 + n / 16)
    EXPECT_THROW(deserialize_model(bytes.substr(0, n)), ModelFormatError) << n;
  EXPECT_THROW(deserialize_model(bytes.substr(0, bytes.size() - 1)), ModelFormatError);
}

TEST(Serialize, BadMagicVersionAndTrailingBytes) {
  std::string bytes = serialize_model(random_model(InputMode::kChar, Task::kPos, 6));
  std::string bad = bytes;
  bad[0] = 'X';
  EXPECT_NE(expect_format_error(bad).find("magic"), std::string::npos);
  bad = bytes;
  bad[6] = 2;
  EXPECT_NE(expect_format_error(bad).find("version"), std::string::npos);
  EXPECT_NE(expect_format_error(bytes + "x").find("trailing"), std::string::npos);
  EXPECT_NE(expect_format_error(bytes.substr(0, 40)).find("truncated"), std::string::npos);
}

TEST(Serialize, LoadErrorNamesFile) {
  const auto dir = std::filesystem::temp_directory_path() / "cnntag_serialize_bad";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "bad.bin").string();
  write_file(path, "not a model");
  try {
    load_model(path);
    FAIL();
  } catch (const ModelFormatError& e) {
    EXPECT_NE(std::string(e.what()).find(path), std::string::npos);
  }
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace cnntag
