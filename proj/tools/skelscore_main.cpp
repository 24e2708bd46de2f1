// Copyright 2026 The SkelScore Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// skelscore: pose-sequence anomaly scoring pipeline as one batch binary.
//
//   gen-toy   synthetic labeled clip JSONL (4 motion classes)
//   pretrain  train extractor + text alignment on labeled clips
//   embed     embed prompt strings with a trained checkpoint
//   fit       estimate the normal-feature Gaussian (weights stay frozen)
//   score     per-clip anomaly report (ood, prompt, joint columns)
//   eval      metrics: ROC-AUC / accuracy, robustness curve, domain shift
//   corrupt   synthetic detector/tracker errors + selection log
//
// Every run is deterministic given --seed and the input files.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "skelscore/anomaly.hpp"
#include "skelscore/clip.hpp"
#include "skelscore/corruption.hpp"
#include "skelscore/evaluation.hpp"
#include "skelscore/pretrainer.hpp"
#include "skelscore/text_alignment.hpp"
#include "skelscore/toy_dataset.hpp"

namespace {

using namespace skelscore;

std::vector<std::string> read_prompt_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw data::ParseError("cannot open prompt file: " + path);
  std::vector<std::string> prompts;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) prompts.push_back(line);
  }
  if (prompts.empty())
    throw data::ValidationError("prompt file is empty: " + path);
  return prompts;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write: " + path);
  out << text;
  if (!text.empty() && text.back() != '\n') out << '\n';
}

struct GenToyArgs {
  std::string out;
  toy::ToyConfig cfg;
};

void run_gen_toy(const GenToyArgs& a) {
  const auto clips = toy::gen_toy_dataset(a.cfg);
  data::write_clip_file(a.out, clips);
  std::cout << "wrote " << clips.size() << " clips to " << a.out << "\n";
}

struct PretrainArgs {
  std::string clips;
  std::string out;
  train::PretrainConfig cfg;
  std::vector<std::size_t> blocks;
};

void run_pretrain(PretrainArgs a) {
  if (!a.blocks.empty()) a.cfg.extractor.block_widths = a.blocks;
  const auto clips = data::parse_clip_file(a.clips, a.cfg.joint_count);
  const auto ckpt = train::train(clips, a.cfg);
  train::save_checkpoint(ckpt, a.out);
  std::cout << "trained on " << clips.size() << " clips ("
            << ckpt.classes.size() << " classes), final loss "
            << ckpt.final_loss.total << ", wrote " << a.out << "\n";
}

struct EmbedArgs {
  std::string checkpoint;
  std::string prompts;
  std::string mode = "abnormal";
  std::string out;
};

void run_embed(const EmbedArgs& a) {
  const auto ckpt = train::load_checkpoint(a.checkpoint);
  const auto prompts = read_prompt_lines(a.prompts);
  const auto set = text::embed_prompts_builtin(
      prompts, ckpt.params, ckpt.encoder, text::prompt_mode_from_name(a.mode));
  text::save_prompt_embeddings(a.out, set);
  std::cout << "embedded " << prompts.size() << " prompts (" << a.mode
            << " mode) to " << a.out << "\n";
}

struct FitArgs {
  std::string clips;
  std::string checkpoint;
  double epsilon = 1e-3;
  std::string out;
};

void run_fit(const FitArgs& a) {
  const auto ckpt = train::load_checkpoint(a.checkpoint);
  const auto clips = data::parse_clip_file(a.clips, ckpt.joint_count);
  std::vector<std::vector<double>> features;
  features.reserve(clips.size());
  for (const auto& c : clips)
    features.push_back(train::encode_clip_with(ckpt, c));
  const auto model = anomaly::fit_normal(features, a.epsilon);
  anomaly::save_gaussian(a.out, model);
  std::cout << "fit " << model.dim << "-dim gaussian on " << features.size()
            << " clips, wrote " << a.out << "\n";
}

struct ScoreArgs {
  std::string clips;
  std::string checkpoint;
  std::string gaussian;
  std::string prompts;
  anomaly::ScoreConfig cfg;
  std::string out;
  std::string format = "csv";
};

void run_score(const ScoreArgs& a) {
  a.cfg.validate();
  const auto ckpt = train::load_checkpoint(a.checkpoint);
  const auto model = anomaly::load_gaussian(a.gaussian);
  const auto prompts = text::load_prompt_embeddings(a.prompts);
  const auto clips = data::parse_clip_file(a.clips, ckpt.joint_count);
  std::vector<anomaly::AnomalyReportRow> rows;
  rows.reserve(clips.size());
  for (const auto& c : clips) {
    const auto x = train::encode_clip_with(ckpt, c);
    rows.push_back(anomaly::joint_anomaly_score(c.video_id, x, model, prompts,
                                                ckpt.params, a.cfg));
  }
  anomaly::write_report(a.out, rows, a.format);
  std::cout << "scored " << rows.size() << " clips, wrote " << a.out << "\n";
}

struct EvalArgs {
  std::string clips;
  std::string checkpoint;
  std::string gaussian;
  std::string prompts;
  std::string kind = "joint";
  std::vector<std::string> normal;
  anomaly::ScoreConfig cfg;
  double threshold = 0.5;
  std::vector<double> ratios;
  double sigma = -1.0;  // <0: default noise scale
  int period = 60;
  int subsets = 0;
  std::string fit_clips;
  double epsilon = 1e-3;
  std::uint64_t seed = 0;
  std::string dump_features;
  std::string out;
  std::string format = "json";
};

std::vector<eval::Truth> truths_from_labels(
    const std::vector<data::RawClip>& clips,
    const std::vector<std::string>& normal) {
  std::vector<eval::Truth> truths;
  truths.reserve(clips.size());
  for (const auto& c : clips) {
    if (!c.label)
      throw data::ValidationError("eval needs labeled clips; '" + c.video_id +
                                  "' has no label");
    const bool is_normal =
        std::find(normal.begin(), normal.end(), *c.label) != normal.end();
    truths.push_back(is_normal ? eval::Truth::kNormal
                               : eval::Truth::kAbnormal);
  }
  return truths;
}

void emit(const std::string& out, const std::string& text) {
  if (out.empty())
    std::cout << text << (text.empty() || text.back() == '\n' ? "" : "\n");
  else
    write_text(out, text);
}

void run_eval(const EvalArgs& a) {
  a.cfg.validate();
  const auto kind = eval::score_kind_from_name(a.kind);
  const auto ckpt = train::load_checkpoint(a.checkpoint);
  const auto model = anomaly::load_gaussian(a.gaussian);
  text::PromptSet prompts;
  if (kind != eval::ScoreKind::kOod) {
    if (a.prompts.empty())
      throw std::invalid_argument("score kind '" + a.kind +
                                  "' needs --prompts");
    prompts = text::load_prompt_embeddings(a.prompts);
  }
  const auto clips = data::parse_clip_file(a.clips, ckpt.joint_count);
  const auto truths = truths_from_labels(clips, a.normal);

  if (!a.dump_features.empty()) {
    eval::dump_features(ckpt, clips, a.dump_features);
    std::cout << "wrote features to " << a.dump_features << "\n";
  }

  if (!a.ratios.empty()) {
    corrupt::CorruptionSpec spec;
    if (a.sigma >= 0.0) spec.fp_sigma = a.sigma;
    spec.track_swap_period = a.period;
    spec.seed = a.seed;
    const auto rows = eval::robustness_curve(ckpt, model, prompts, a.cfg,
                                             kind, clips, truths, a.ratios,
                                             spec);
    if (a.format == "csv") {
      emit(a.out, eval::robustness_to_csv(rows));
    } else {
      nlohmann::json arr = nlohmann::json::array();
      for (const auto& r : rows)
        arr.push_back({{"ratio", r.ratio}, {"auc", r.auc}});
      emit(a.out, arr.dump(2));
    }
    return;
  }

  if (a.subsets > 0) {
    if (a.fit_clips.empty())
      throw std::invalid_argument("--subsets needs --fit-clips");
    const auto fit = data::parse_clip_file(a.fit_clips, ckpt.joint_count);
    const auto result =
        eval::domain_shift_eval(ckpt, prompts, a.cfg, kind, a.epsilon, fit,
                                a.subsets, a.seed, clips, truths);
    if (a.format == "csv") {
      emit(a.out, eval::domain_shift_to_csv(result));
    } else {
      nlohmann::json j{{"per_subset", result.per_subset},
                       {"mean", result.mean},
                       {"variance", result.variance}};
      emit(a.out, j.dump(2));
    }
    return;
  }

  const auto scored =
      eval::score_clips(ckpt, model, prompts, a.cfg, kind, clips, truths);
  const double auc = eval::roc_auc(scored);
  const double acc = eval::binary_accuracy(scored, a.threshold);
  const auto best = eval::best_threshold(scored);
  if (a.format == "csv") {
    std::ostringstream csv;
    csv << "metric,value\n";
    csv << "auc," << auc << "\n";
    csv << "accuracy," << acc << "\n";
    csv << "best_threshold," << best.threshold << "\n";
    csv << "best_accuracy," << best.accuracy << "\n";
    emit(a.out, csv.str());
  } else {
    nlohmann::json j{{"kind", a.kind},
                     {"count", scored.size()},
                     {"auc", auc},
                     {"threshold", a.threshold},
                     {"accuracy", acc},
                     {"best_threshold", best.threshold},
                     {"best_accuracy", best.accuracy}};
    emit(a.out, j.dump(2));
  }
}

struct CorruptArgs {
  std::string clips;
  int joints = 17;
  corrupt::CorruptionSpec spec;
  double sigma = -1.0;
  std::string out;
  std::string log;
};

void run_corrupt(CorruptArgs a) {
  if (a.sigma >= 0.0) a.spec.fp_sigma = a.sigma;
  a.spec.validate();
  const auto clips = data::parse_clip_file(a.clips, a.joints);
  std::vector<data::RawClip> out;
  std::vector<corrupt::SelectionLog> logs;
  out.reserve(clips.size());
  logs.reserve(clips.size());
  for (const auto& c : clips) {
    corrupt::SelectionLog log;
    out.push_back(corrupt::corrupt_clip(c, a.spec, &log));
    logs.push_back(std::move(log));
  }
  data::write_clip_file(a.out, out);
  const std::string log_path = a.log.empty() ? a.out + ".log.json" : a.log;
  corrupt::write_selection_log(log_path, logs);
  std::cout << "corrupted " << out.size() << " clips at ratio "
            << a.spec.error_ratio << ", wrote " << a.out << " and "
            << log_path << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "skelscore: prompt-guided anomaly scoring over pose sequences"};
  app.require_subcommand(1);

  GenToyArgs gen_toy;
  auto* cmd_gen = app.add_subcommand(
      "gen-toy", "Generate the synthetic 4-class labeled clip set");
  cmd_gen->add_option("--out", gen_toy.out, "Output clip JSONL path")
      ->required();
  cmd_gen->add_option("--per-class", gen_toy.cfg.clips_per_class,
                      "Clips per class");
  cmd_gen->add_option("--frames", gen_toy.cfg.frame_count, "Frames per clip");
  cmd_gen->add_option("--seed", gen_toy.cfg.seed, "Random seed");

  PretrainArgs pretrain;
  auto* cmd_pre = app.add_subcommand(
      "pretrain", "Train the extractor and text alignment on labeled clips");
  cmd_pre->add_option("--clips", pretrain.clips, "Labeled clip JSONL")
      ->required();
  cmd_pre->add_option("--out", pretrain.out, "Checkpoint output path")
      ->required();
  cmd_pre->add_option("--seed", pretrain.cfg.seed, "Random seed");
  cmd_pre->add_option("--epochs", pretrain.cfg.epochs, "Training epochs");
  cmd_pre->add_option("--batch", pretrain.cfg.batch_size, "Batch size");
  cmd_pre->add_option("--alpha", pretrain.cfg.alpha,
                      "Classification loss weight in [0,1]");
  cmd_pre->add_option("--lr", pretrain.cfg.learning_rate, "Learning rate");
  cmd_pre->add_option("--tau-init", pretrain.cfg.tau_init,
                      "Initial softmax temperature");
  cmd_pre->add_option("--joints", pretrain.cfg.joint_count,
                      "Skeleton joint count K");
  cmd_pre->add_option("--stem", pretrain.cfg.extractor.stem_width,
                      "Stem layer width");
  cmd_pre
      ->add_option("--blocks", pretrain.blocks,
                   "Residual block widths, comma separated")
      ->delimiter(',');
  cmd_pre->add_option("--bottleneck", pretrain.cfg.extractor.bottleneck_ratio,
                      "Bottleneck ratio in (0,1]");
  cmd_pre->add_option("--embed-dim", pretrain.cfg.encoder.embed_dim,
                      "Text embedding dimension E");
  cmd_pre->add_option("--hash-size", pretrain.cfg.encoder.hash_size,
                      "Text hash vocabulary size");

  EmbedArgs embed;
  auto* cmd_embed = app.add_subcommand(
      "embed", "Embed prompt strings (one per line) with a checkpoint");
  cmd_embed->add_option("--checkpoint", embed.checkpoint, "Checkpoint path")
      ->required();
  cmd_embed
      ->add_option("--prompts", embed.prompts, "Text file, one prompt per line")
      ->required();
  cmd_embed->add_option("--mode", embed.mode, "abnormal|normal")
      ->check(CLI::IsMember({"abnormal", "normal"}));
  cmd_embed->add_option("--out", embed.out, "Embedding JSON output path")
      ->required();

  FitArgs fit;
  auto* cmd_fit = app.add_subcommand(
      "fit", "Fit the normal-feature gaussian (checkpoint stays frozen)");
  cmd_fit->add_option("--clips", fit.clips, "Normal clip JSONL")->required();
  cmd_fit->add_option("--checkpoint", fit.checkpoint, "Checkpoint path")
      ->required();
  cmd_fit->add_option("--epsilon", fit.epsilon,
                      "Covariance shrinkage added to the diagonal");
  cmd_fit->add_option("--out", fit.out, "Gaussian JSON output path")
      ->required();

  ScoreArgs score;
  auto* cmd_score =
      app.add_subcommand("score", "Per-clip anomaly report (ood, prompt, joint)");
  cmd_score->add_option("--clips", score.clips, "Clip JSONL to score")
      ->required();
  cmd_score->add_option("--checkpoint", score.checkpoint, "Checkpoint path")
      ->required();
  cmd_score->add_option("--gaussian", score.gaussian, "Gaussian JSON path")
      ->required();
  cmd_score->add_option("--prompts", score.prompts, "Embedding JSON path")
      ->required();
  cmd_score->add_option("--w1", score.cfg.w1, "Score scale factor");
  cmd_score->add_option("--w2", score.cfg.w2, "Score root exponent");
  cmd_score->add_option("--prompt-w1", score.cfg.prompt_w1,
                        "Prompt-factor override of --w1");
  cmd_score->add_option("--prompt-w2", score.cfg.prompt_w2,
                        "Prompt-factor override of --w2");
  cmd_score->add_option("--out", score.out, "Report output path")->required();
  cmd_score->add_option("--format", score.format, "csv|json")
      ->check(CLI::IsMember({"csv", "json"}));

  EvalArgs eval_args;
  auto* cmd_eval = app.add_subcommand(
      "eval", "Metrics over labeled clips: AUC/accuracy, robustness, shift");
  cmd_eval->add_option("--clips", eval_args.clips, "Labeled eval clip JSONL")
      ->required();
  cmd_eval
      ->add_option("--checkpoint", eval_args.checkpoint, "Checkpoint path")
      ->required();
  cmd_eval->add_option("--gaussian", eval_args.gaussian, "Gaussian JSON path")
      ->required();
  cmd_eval->add_option("--prompts", eval_args.prompts,
                       "Embedding JSON (needed unless --kind ood)");
  cmd_eval->add_option("--kind", eval_args.kind, "ood|prompt|joint")
      ->check(CLI::IsMember({"ood", "prompt", "joint"}));
  cmd_eval
      ->add_option("--normal", eval_args.normal,
                   "Class labels counted as truth-normal, comma separated")
      ->required()
      ->delimiter(',');
  cmd_eval->add_option("--w1", eval_args.cfg.w1, "Score scale factor");
  cmd_eval->add_option("--w2", eval_args.cfg.w2, "Score root exponent");
  cmd_eval->add_option("--prompt-w1", eval_args.cfg.prompt_w1,
                       "Prompt-factor override of --w1");
  cmd_eval->add_option("--prompt-w2", eval_args.cfg.prompt_w2,
                       "Prompt-factor override of --w2");
  cmd_eval->add_option("--threshold", eval_args.threshold,
                       "Accuracy decision threshold");
  cmd_eval
      ->add_option("--ratios", eval_args.ratios,
                   "Corruption ratios for a robustness curve, comma separated")
      ->delimiter(',');
  cmd_eval->add_option("--sigma", eval_args.sigma,
                       "Corruption noise std in pixels (default 5% of frame "
                       "diagonal)");
  cmd_eval->add_option("--period", eval_args.period,
                       "Corruption tracking swap period");
  cmd_eval->add_option("--subsets", eval_args.subsets,
                       "Domain-shift subset count (needs --fit-clips)");
  cmd_eval->add_option("--fit-clips", eval_args.fit_clips,
                       "Clips split into per-subset gaussian fits");
  cmd_eval->add_option("--epsilon", eval_args.epsilon,
                       "Shrinkage for per-subset fits");
  cmd_eval->add_option("--seed", eval_args.seed,
                       "Seed for corruption / subset split");
  cmd_eval->add_option("--dump-features", eval_args.dump_features,
                       "Also write a feature CSV to this path");
  cmd_eval->add_option("--out", eval_args.out,
                       "Report output path (default stdout)");
  cmd_eval->add_option("--format", eval_args.format, "csv|json")
      ->check(CLI::IsMember({"csv", "json"}));

  CorruptArgs corrupt_args;
  auto* cmd_corrupt = app.add_subcommand(
      "corrupt", "Inject detector/tracker errors, write clips + selection log");
  cmd_corrupt->add_option("--clips", corrupt_args.clips, "Clip JSONL")
      ->required();
  cmd_corrupt->add_option("--joints", corrupt_args.joints,
                          "Skeleton joint count K");
  cmd_corrupt
      ->add_option("--ratio", corrupt_args.spec.error_ratio,
                   "Joint error ratio in [0,1]")
      ->required();
  cmd_corrupt->add_option("--sigma", corrupt_args.sigma,
                          "FP noise std in pixels (default 5% of frame "
                          "diagonal)");
  cmd_corrupt->add_option("--period", corrupt_args.spec.track_swap_period,
                          "Tracking swap period in frames");
  cmd_corrupt->add_option("--seed", corrupt_args.spec.seed, "Random seed");
  cmd_corrupt->add_option("--out", corrupt_args.out, "Corrupted JSONL path")
      ->required();
  cmd_corrupt->add_option("--log", corrupt_args.log,
                          "Selection log path (default OUT.log.json)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (cmd_gen->parsed()) run_gen_toy(gen_toy);
    if (cmd_pre->parsed()) run_pretrain(pretrain);
    if (cmd_embed->parsed()) run_embed(embed);
    if (cmd_fit->parsed()) run_fit(fit);
    if (cmd_score->parsed()) run_score(score);
    if (cmd_eval->parsed()) run_eval(eval_args);
    if (cmd_corrupt->parsed()) run_corrupt(corrupt_args);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
