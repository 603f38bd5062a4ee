// Acceptance gate: one PASS / FAIL / SKIP line per criterion. Exit status is
// nonzero when any criterion fails; skipped criteria do not fail the run.
//
// The treebank criterion needs a UD treebank supplied by the user:
//   CNNTAG_UD_TRAIN, CNNTAG_UD_DEV   CoNLL-U paths
//   CNNTAG_UD_EPOCHS                 epoch budget per model (default 8)

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cnntag/cli.hpp"
#include "tagger_check.hpp"
#include "test_util.hpp"

namespace {

using namespace cnntag;

enum class Status { kPass, kFail, kSkip };

struct Outcome {
  Status status;
  std::string detail;
};

Outcome pass_if(bool ok, std::string detail) {
  return {ok ? Status::kPass : Status::kFail, std::move(detail)};
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Outcome gradient_fidelity() {
  Rng rng(2024);
  double worst = 0.0;
  std::string worst_param;
  std::size_t coords = 0, kinks = 0;
  std::vector<std::string> unchecked;
  for (int rep = 0; rep < 5; ++rep) {
    const auto cs = testing::random_check_case(rng, 3, 10, 6);
    ModelConfig c;
    c.mode = InputMode::kWordChar;
    const auto r = testing::tagger_grad_check(c, cs, 500 + rep, 1e-4, 3);
    coords += r.coordinates;
    kinks += r.kinks_skipped;
    unchecked.insert(unchecked.end(), r.unchecked.begin(), r.unchecked.end());
    if (r.max_rel_error > worst) {
      worst = r.max_rel_error;
      worst_param = r.worst_param;
    }
  }
  return pass_if(worst < 1e-4 && unchecked.empty(),
                 fmt("max rel error %.2e (%s), %zu coordinates over 31 tensors, %zu kink probes "
                     "skipped, %zu tensors never checked",
                     worst, worst_param.c_str(), coords, kinks, unchecked.size()));
}

Outcome shape_suite() {
  const auto corpus = testing::toy_corpus(5, 1);
  const Vocabulary v = build_vocab(corpus, Task::kPos);
  std::vector<std::string> problems;
  for (InputMode m : {InputMode::kWord, InputMode::kChar, InputMode::kWordChar}) {
    ModelConfig c;
    c.mode = m;
    c.tag_count = v.tag_count();
    const std::string name(mode_name(m));
    auto expect = [&](bool ok, const std::string& what) {
      if (!ok) problems.push_back(name + ": " + what);
    };
    expect(c.composed_dim() == 100, "composed dim");
    expect(c.window() == 15, "window rows");
    expect(c.context_dim() == 512, "context dim");
    expect(c.hidden_dim == 512, "hidden dim");
    const std::size_t repr = (uses_words(m) ? 64 : 0) + (uses_chars(m) ? 100 : 0);
    expect(c.repr_dim() == repr, "word representation dim");

    const auto tagger = Tagger<float>::initialize(c, v.word_count(), v.char_count(), 1);
    const auto e = encode_sentence(corpus[0], v, c);
    Rng rng(0);
    if (uses_chars(m)) expect(tagger.compose_word(e.char_ids[0], false, rng).size() == 100, "composed vector");
    std::vector<Tensor<float>> reprs(e.size());
    for (std::size_t i = 0; i < e.size(); ++i) reprs[i] = tagger.word_repr(e, i, false, rng);
    const auto window = tagger.build_window(e.size(), 0, reprs);
    expect(window.rows() == 15 && window.cols() == c.row_dim(), "window tensor");
    Tagger<float>::ContextCache cache;
    const auto logits = tagger.window_logits(window, false, rng, &cache);
    expect(cache.context.size() == 512, "context vector");
    expect(cache.hidden.size() == 512, "hidden vector");
    expect(logits.size() == v.tag_count(), "logits");
  }
  std::string detail = "100 / 15 / 512 / 512 in w, c, wc";
  for (const auto& p : problems) detail += "; bad " + p;
  return pass_if(problems.empty(), detail);
}

Outcome corruption_exactness() {
  std::vector<std::string> problems;
  auto expect = [&](bool ok, const std::string& what) {
    if (!ok) problems.push_back(what);
  };
  expect(corrupt_word(std::string_view("abcdef"), EditOp::kInsert, 2, U'x') == "abxcdef", "insert example");
  expect(corrupt_word(std::string_view("abcdef"), EditOp::kDelete, 2) == "abdef", "delete example");
  expect(corrupt_word(std::string_view("abcdef"), EditOp::kSubstitute, 2, U'x') == "abxdef",
         "substitute example");

  const auto corpus = testing::toy_corpus(400, 3);
  const auto alphabet = default_alphabet(corpus);
  for (EditOp op : kEditOps) {
    expect(corrupt_corpus(corpus, {op, 0.0, 1, alphabet}) == corpus, "prob 0 identity");
    const auto out = corrupt_corpus(corpus, {op, 1.0, 2, alphabet});
    const long want = op == EditOp::kInsert ? 1 : op == EditOp::kDelete ? -1 : 0;
    for (std::size_t s = 0; s < corpus.size(); ++s)
      for (std::size_t i = 0; i < corpus[s].size(); ++i) {
        const auto a = utf8_decode(corpus[s].tokens[i].form);
        const auto b = utf8_decode(out[s].tokens[i].form);
        if (a.size() <= 2) {
          expect(a == b, "short word edited at prob 1");
          continue;
        }
        expect(a != b, "eligible word unchanged at prob 1");
        expect(static_cast<long>(b.size()) - static_cast<long>(a.size()) == want, "length delta");
      }
  }

  Rng rng(4);
  Sentence s;
  for (int i = 0; i < 100000; ++i) {
    Token t;
    t.form = testing::random_word(rng, 1, 4);
    s.tokens.push_back(t);
  }
  std::size_t short_words = 0;
  for (EditOp op : kEditOps) {
    const auto out = corrupt_corpus({s}, {op, 1.0, 5 + static_cast<std::uint64_t>(op), U"abcdefg"});
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s.tokens[i].form.size() > 2) continue;
      ++short_words;
      expect(out[0].tokens[i].form == s.tokens[i].form, "short word touched in fuzz");
    }
  }
  std::sort(problems.begin(), problems.end());
  problems.erase(std::unique(problems.begin(), problems.end()), problems.end());
  std::string detail = fmt("3 worked examples, prob 0/1 over 3 ops, %zu short tokens fuzzed", short_words);
  for (const auto& p : problems) detail += "; " + p;
  return pass_if(problems.empty(), detail);
}

Outcome supertag_oracle() {
  Rng rng(5);
  std::size_t tokens = 0, agree = 0;
  for (int iter = 0; iter < 10000; ++iter) {
    const Sentence s = testing::random_tree(rng, 1 + rng.uniform_int(8));
    const auto tags = gold_tags(s, Task::kStag);
    for (std::size_t i = 0; i < s.size(); ++i) {
      ++tokens;
      agree += tags[i] == testing::scan_supertag(s, i);
    }
  }
  return pass_if(agree == tokens, fmt("%zu / %zu tokens agree over 10000 trees", agree, tokens));
}

double majority_baseline(const std::vector<Sentence>& train, const std::vector<Sentence>& dev) {
  std::map<std::string, std::size_t> counts;
  for (const auto& s : train)
    for (const auto& t : s.tokens) ++counts[t.upos];
  std::string best;
  std::size_t best_count = 0;
  for (const auto& [tag, n] : counts)
    if (n > best_count) {
      best = tag;
      best_count = n;
    }
  std::size_t hit = 0, total = 0;
  for (const auto& s : dev)
    for (const auto& t : s.tokens) {
      ++total;
      hit += t.upos == best;
    }
  return static_cast<double>(hit) / static_cast<double>(total);
}

/// Shared with the serialization criterion.
std::optional<TrainedModel> toy_model;

Outcome learnability() {
  const auto corpus = testing::suffix_corpus(500, 6);
  const std::vector<Sentence> tr(corpus.begin(), corpus.begin() + 400);
  const std::vector<Sentence> dev(corpus.begin() + 400, corpus.end());
  const double majority = majority_baseline(tr, dev);
  ModelConfig mc;
  mc.mode = InputMode::kChar;
  TrainConfig tc;
  tc.seed = 1;
  const auto result = train(tr, dev, Task::kPos, mc, tc, [](const EpochStats& e) {
    std::fprintf(stderr, "  learnability epoch %zu loss %.4f dev %.4f (%.1fs)\n", e.epoch,
                 e.mean_loss, e.dev_accuracy, e.seconds);
  });
  const double acc = evaluate(result.model, dev).accuracy;
  toy_model = result.model;
  return pass_if(acc >= 0.95 && majority < 0.5,
                 fmt("dev accuracy %.4f at epoch %zu of %zu run (majority baseline %.4f)", acc,
                     result.report.best_epoch, result.report.epochs.size(), majority));
}

Outcome scaled_treebank() {
  const char* train_path = std::getenv("CNNTAG_UD_TRAIN");
  const char* dev_path = std::getenv("CNNTAG_UD_DEV");
  if (!train_path || !dev_path || !*train_path || !*dev_path)
    return {Status::kSkip, "set CNNTAG_UD_TRAIN and CNNTAG_UD_DEV to a UD treebank to run"};
  auto tr = read_conllu(train_path);
  const auto dev = read_conllu(dev_path);
  if (tr.size() > 2000) tr.resize(2000);
  TrainConfig tc;
  tc.max_epochs = 8;
  if (const char* e = std::getenv("CNNTAG_UD_EPOCHS")) tc.max_epochs = std::stoul(e);
  tc.patience = std::min<std::size_t>(3, tc.max_epochs);
  auto run_mode = [&](InputMode m) {
    ModelConfig mc;
    mc.mode = m;
    return train(tr, dev, Task::kPos, mc, tc, [m](const EpochStats& e) {
      std::fprintf(stderr, "  treebank %s epoch %zu dev %.4f (%.1fs)\n",
                   std::string(mode_name(m)).c_str(), e.epoch, e.dev_accuracy, e.seconds);
    });
  };
  const auto w = run_mode(InputMode::kWord);
  const auto c = run_mode(InputMode::kChar);
  const double acc_w = evaluate(w.model, dev).accuracy;
  const double acc_c = evaluate(c.model, dev).accuracy;
  const auto table = robustness_experiment(c.model, dev, vocab_alphabet(c.model.vocab), 1);
  const auto mean = table.mean_by_prob();
  bool monotone = true;
  for (std::size_t p = 1; p < mean.size(); ++p) monotone = monotone && mean[p] <= mean[p - 1];
  return pass_if(acc_c > acc_w && monotone,
                 fmt("%zu train sentences; dev C %.4f vs W %.4f; mean corrupted accuracy "
                     "%.4f %.4f %.4f %.4f",
                     tr.size(), acc_c, acc_w, mean[0], mean[1], mean[2], mean[3]));
}

struct CliRun {
  int code;
  std::string out;
};

CliRun cli(std::vector<std::string> args) {
  args.insert(args.begin(), "tagger");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str()};
}

Outcome determinism() {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "cnntag_acceptance_det";
  fs::remove_all(dir);
  fs::create_directories(dir);
  auto p = [&](const char* n) { return (dir / n).string(); };
  const auto corpus = testing::toy_corpus(90, 7);
  write_file(p("train.conllu"), write_conllu({corpus.begin(), corpus.begin() + 70}));
  write_file(p("dev.conllu"), write_conllu({corpus.begin() + 70, corpus.end()}));

  std::vector<std::string> outputs;
  bool ok = true;
  for (const char* model : {"a.bin", "b.bin"}) {
    const auto t = cli({"train", "--task", "pos", "--mode", "wc", "--train", p("train.conllu"),
                        "--dev", p("dev.conllu"), "--out", p(model), "--max-epochs", "3",
                        "--seed", "17"});
    const auto e = cli({"eval", "--model", p(model), "--gold", p("dev.conllu")});
    ok = ok && t.code == 0 && e.code == 0;
    outputs.push_back(t.out + e.out);
  }
  const bool same_files = read_file(p("a.bin")) == read_file(p("b.bin"));
  const std::size_t bytes = read_file(p("a.bin")).size();
  fs::remove_all(dir);
  return pass_if(ok && same_files && outputs[0] == outputs[1],
                 fmt("model files %s (%zu bytes), reports %s", same_files ? "identical" : "differ",
                     bytes, outputs[0] == outputs[1] ? "identical" : "differ"));
}

Outcome serialization() {
  if (!toy_model) return {Status::kFail, "no trained model available"};
  const std::string bytes = serialize_model(*toy_model);
  const TrainedModel loaded = deserialize_model(bytes);
  const bool same_bytes = serialize_model(loaded) == bytes;
  const auto sentences = testing::suffix_corpus(100, 8);
  std::size_t equal = 0, total = 0;
  Rng unused(0);
  for (const auto& s : sentences) {
    const auto e = encode_sentence(s, toy_model->vocab, toy_model->tagger.config());
    for (std::size_t t = 0; t < e.size(); ++t) {
      ++total;
      equal += toy_model->tagger.forward(e, t, false, unused) == loaded.tagger.forward(e, t, false, unused);
    }
  }
  return pass_if(same_bytes && equal == total,
                 fmt("reserialized bytes %s; %zu / %zu token distributions bit-equal on 100 sentences",
                     same_bytes ? "identical" : "differ", equal, total));
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"Gradient fidelity", gradient_fidelity},
      {"Shape suite", shape_suite},
      {"Corruption exactness", corruption_exactness},
      {"Supertag oracle", supertag_oracle},
      {"Learnability", learnability},
      {"Scaled treebank check", scaled_treebank},
      {"Determinism", determinism},
      {"Serialization", serialization},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    const auto started = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {Status::kFail, std::string("exception: ") + e.what()};
    }
    const double sec =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    const char* tag = o.status == Status::kPass ? "PASS" : o.status == Status::kFail ? "FAIL" : "SKIP";
    if (o.status == Status::kFail) ++failures;
    std::printf("%s  %s: %s [%.1fs]\n", tag, name, o.detail.c_str(), sec);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
