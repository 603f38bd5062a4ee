#pragma once

// Command-line front end: train / tag / eval / corrupt / robustness.
// Exit codes: 0 success, 1 usage error, 2 data or model error.
// Results go to stdout as TSV; progress and diagnostics go to stderr.

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cnntag/conllu.hpp"
#include "cnntag/corpus.hpp"
#include "cnntag/robustness.hpp"
#include "cnntag/serialize.hpp"
#include "cnntag/training.hpp"

namespace cnntag {

namespace detail {

inline std::string format_accuracy(double a) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "accuracy\t%.4f\n", a);
  return buf;
}

/// Replaces or appends `Stag=<tag>` in a MISC column.
inline std::string set_misc_stag(std::string_view misc, const std::string& tag) {
  std::vector<std::string> parts;
  if (misc != "_" && !misc.empty()) {
    std::size_t start = 0;
    while (true) {
      const std::size_t bar = misc.find('|', start);
      const std::string_view part = misc.substr(start, bar == std::string_view::npos ? bar : bar - start);
      if (part.substr(0, 5) != "Stag=") parts.emplace_back(part);
      if (bar == std::string_view::npos) break;
      start = bar + 1;
    }
  }
  parts.push_back("Stag=" + tag);
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += '|';
    out += parts[i];
  }
  return out;
}

}  // namespace detail

/// Tags `input_path` with the model and writes it to `output_path`. Only the
/// task's column changes: UPOS for pos, FEATS for morph, MISC (Stag=) for stag.
inline void tag_file(const std::string& model_path, const std::string& input_path,
                     const std::string& output_path) {
  const TrainedModel model = load_model(model_path);
  const std::string text = read_file(input_path);
  std::vector<Sentence> sentences;
  try {
    sentences = parse_conllu(text);
  } catch (const ParseError& e) {
    throw ParseError(e.line(), e.message(), input_path);
  }
  std::vector<std::vector<std::string>> predicted;
  predicted.reserve(sentences.size());
  for (const Sentence& s : sentences) predicted.push_back(predict_sentence(model.tagger, model.vocab, s));

  Column column = Column::kUpos;
  if (model.task == Task::kMorph) column = Column::kFeats;
  if (model.task == Task::kStag) column = Column::kMisc;
  const std::string out = rewrite_column(
      text, column, [&](std::size_t s, std::size_t t, std::string_view old) -> std::string {
        const std::string& tag = predicted[s][t];
        return model.task == Task::kStag ? detail::set_misc_stag(old, tag) : tag;
      });
  write_file(output_path, out);
}

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"CNN sequence tagger", "tagger"};
  app.require_subcommand(1);

  std::uint64_t seed = 1;

  // train
  auto* train_cmd = app.add_subcommand("train", "train a model");
  std::string task_str, mode_str, train_path, dev_path, out_path;
  std::size_t max_epochs = 30, patience = 5;
  train_cmd->add_option("--task", task_str, "pos | morph | stag")
      ->required()
      ->check(CLI::IsMember({"pos", "morph", "stag"}));
  train_cmd->add_option("--mode", mode_str, "w | c | wc")
      ->required()
      ->check(CLI::IsMember({"w", "c", "wc"}));
  train_cmd->add_option("--train", train_path, "training CoNLL-U")->required();
  train_cmd->add_option("--dev", dev_path, "dev CoNLL-U (early stopping)")->required();
  train_cmd->add_option("--out", out_path, "model file to write")->required();
  train_cmd->add_option("--seed", seed, "random seed");
  train_cmd->add_option("--max-epochs", max_epochs, "epoch budget")->check(CLI::PositiveNumber);
  train_cmd->add_option("--patience", patience,
                        "epochs without dev improvement before stopping (default 5, capped at "
                        "--max-epochs)");

  // tag
  auto* tag_cmd = app.add_subcommand("tag", "tag a CoNLL-U file");
  std::string model_path, input_path, output_path;
  tag_cmd->add_option("--model", model_path)->required();
  tag_cmd->add_option("--input", input_path)->required();
  tag_cmd->add_option("--output", output_path)->required();

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "token accuracy against gold CoNLL-U");
  std::string gold_path;
  eval_cmd->add_option("--model", model_path)->required();
  eval_cmd->add_option("--gold", gold_path)->required();

  // corrupt
  auto* corrupt_cmd = app.add_subcommand("corrupt", "write a misspelled copy of a CoNLL-U file");
  std::string op_str, alphabet_path;
  double prob = 0.0;
  corrupt_cmd->add_option("--input", input_path)->required();
  corrupt_cmd->add_option("--output", output_path)->required();
  corrupt_cmd->add_option("--op", op_str, "insert | delete | substitute")
      ->required()
      ->check(CLI::IsMember({"insert", "delete", "substitute"}));
  corrupt_cmd->add_option("--prob", prob, "edit probability per eligible word")
      ->required()
      ->check(CLI::Range(0.0, 1.0));
  corrupt_cmd->add_option("--seed", seed, "random seed");
  corrupt_cmd->add_option("--alphabet-from", alphabet_path,
                          "CoNLL-U file whose characters form the alphabet (default: input)");

  // robustness
  auto* robust_cmd = app.add_subcommand("robustness", "accuracy under corrupted dev data");
  std::string report_path;
  robust_cmd->add_option("--model", model_path)->required();
  robust_cmd->add_option("--dev", dev_path)->required();
  robust_cmd->add_option("--seed", seed, "random seed");
  robust_cmd->add_option("--out", report_path, "write the TSV here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    const CLI::App* sub = nullptr;
    for (const auto* s : app.get_subcommands()) sub = s;
    err << (sub ? sub->help() : app.help());
    return 1;
  }

  try {
    if (train_cmd->parsed()) {
      TrainConfig tc;
      tc.seed = seed;
      tc.max_epochs = max_epochs;
      tc.patience = patience;
      if (train_cmd->count("--patience") == 0) tc.patience = std::min(patience, max_epochs);
      if (tc.patience > tc.max_epochs) {
        err << "error: --patience must not exceed --max-epochs\n";
        return 1;
      }
      ModelConfig mc;
      mc.mode = *parse_mode(mode_str);
      const Task task = *parse_task(task_str);
      const auto train_data = read_conllu(train_path);
      const auto dev_data = read_conllu(dev_path);
      if (train_data.empty()) throw std::runtime_error(train_path + ": no sentences");
      if (dev_data.empty()) throw std::runtime_error(dev_path + ": no sentences");
      err << "training " << task_name(task) << "/" << mode_name(mc.mode) << " on "
          << train_data.size() << " sentences\n";
      const TrainResult result = train(train_data, dev_data, task, mc, tc, [&](const EpochStats& e) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "epoch %zu loss %.4f dev %.4f (%.1fs)\n", e.epoch,
                      e.mean_loss, e.dev_accuracy, e.seconds);
        err << buf << std::flush;
      });
      save_model(result.model, out_path);
      out << result.report.to_tsv();
      return 0;
    }
    if (tag_cmd->parsed()) {
      tag_file(model_path, input_path, output_path);
      return 0;
    }
    if (eval_cmd->parsed()) {
      const TrainedModel model = load_model(model_path);
      const auto gold = read_conllu(gold_path);
      if (gold.empty()) throw std::runtime_error(gold_path + ": no sentences");
      const EvalResult r = evaluate(model, gold);
      out << detail::format_accuracy(r.accuracy);
      err << "correct " << r.correct << " of " << r.total << "\n";
      return 0;
    }
    if (corrupt_cmd->parsed()) {
      const std::string text = read_file(input_path);
      const auto alphabet_source =
          alphabet_path.empty() ? read_conllu(input_path) : read_conllu(alphabet_path);
      CorruptionSpec spec{*parse_op(op_str), prob, seed, default_alphabet(alphabet_source)};
      if (spec.alphabet.empty()) throw std::runtime_error("empty alphabet");
      write_file(output_path, corrupt_conllu_text(text, spec));
      return 0;
    }
    if (robust_cmd->parsed()) {
      const TrainedModel model = load_model(model_path);
      const auto dev = read_conllu(dev_path);
      if (dev.empty()) throw std::runtime_error(dev_path + ": no sentences");
      const std::u32string alphabet = vocab_alphabet(model.vocab);
      if (alphabet.empty()) throw std::runtime_error("model has an empty character alphabet");
      const std::string tsv = robustness_experiment(model, dev, alphabet, seed).to_tsv();
      if (report_path.empty()) out << tsv;
      else write_file(report_path, tsv);
      return 0;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

}  // namespace cnntag
