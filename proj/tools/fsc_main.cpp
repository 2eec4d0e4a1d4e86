#include <CLI11.hpp>

#include <iostream>

#include "fsc/cli/commands.hpp"

int main(int argc, char** argv) {
  using namespace fsc::cli;
  CLI::App app{"fsc: classify compressed videos from their frame-size series"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "fsc 1.0.0");

  ExtractOptions ex;
  auto* extract = app.add_subcommand("extract", "Write the per-frame size series of a video to FSTS");
  extract->add_option("input", ex.input, "Annex-B elementary stream or MP4 file")->required();
  extract->add_option("-o,--output", ex.output, "Output .fsts path")->required();
  extract->add_option("--codec", ex.codec, "avc, hevc or auto")->capture_default_str();
  extract->add_option("--container", ex.container, "annexb, mp4 or auto")->capture_default_str();
  extract->add_option("--mp4-sizes", ex.mp4_sizes, "sample or overhead")->capture_default_str();

  GenOptions gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a synthetic labelled corpus");
  gen_cmd->add_option("-o,--output", gen.out_dir, "Output directory")->required();
  gen_cmd->add_option("--classes", gen.classes, "Number of classes (2-11)")->capture_default_str();
  gen_cmd->add_option("--clips", gen.clips, "Clips per class")->capture_default_str();
  gen_cmd->add_option("--frames", gen.frames, "Frames per clip")->capture_default_str();
  gen_cmd->add_option("--seed", gen.seed, "Random seed")->capture_default_str();

  TrainOptions tr;
  std::size_t tr_epochs = 0;
  std::uint64_t tr_seed = 0;
  auto* train = app.add_subcommand("train", "Train a ResNet classifier");
  train->add_option("--manifest", tr.manifest, "Labelled manifest (path,label)")->required();
  train->add_option("-o,--output", tr.output, "Output .bcnn model path")->required();
  train->add_option("--n-frames", tr.n_frames, "Window length N")->capture_default_str();
  train->add_option("--norm", tr.norm, "zscore or none")->capture_default_str();
  train->add_option("--config", tr.config, "JSON file with training settings");
  auto* epochs_opt = train->add_option("--epochs", tr_epochs, "Maximum epochs");
  auto* seed_opt = train->add_option("--seed", tr_seed, "Seed for split, init and shuffling");
  train->add_option("--filters", tr.filters, "Filters per block, e.g. --filters 64 128 128");
  train->add_option("--records", tr.records, "JSON Lines output");
  train->add_flag("-q,--quiet", tr.quiet, "Only print the summary");

  ClassifyOptions cl;
  std::size_t cl_frames = 0;
  auto* classify = app.add_subcommand("classify", "Classify FSTS files or videos");
  classify->add_option("--model", cl.model, "Model file")->required();
  classify->add_option("inputs", cl.inputs, "FSTS or video files")->required();
  auto* cl_frames_opt = classify->add_option("--n-frames", cl_frames, "Window length (defaults to the model's)");
  classify->add_option("--records", cl.records, "JSON Lines output");

  EvalOptions ev;
  std::size_t ev_frames = 0, ev_window = 0;
  auto* eval = app.add_subcommand("eval", "Evaluate a model on a labelled manifest");
  eval->add_option("--manifest", ev.manifest, "Labelled manifest")->required();
  eval->add_option("--model", ev.model, "Model file")->required();
  auto* ev_frames_opt = eval->add_option("--n-frames", ev_frames, "Window length (defaults to the model's)");
  eval->add_option("--baseline", ev.baseline, "dtw or none")->capture_default_str();
  eval->add_option("--train-manifest", ev.train_manifest, "Reference set for the DTW baseline");
  auto* ev_window_opt = eval->add_option("--dtw-window", ev_window, "Sakoe-Chiba band half-width");
  eval->add_option("--fps", ev.fps, "Frame rate for the real-time factor")->capture_default_str();
  eval->add_option("--records", ev.records, "JSON Lines output");

  KldOptions kl;
  auto* kld = app.add_subcommand("kld", "Class-to-class KL divergence of frame-size histograms");
  kld->add_option("--manifest", kl.manifest, "Labelled manifest")->required();
  kld->add_option("--bins", kl.bins, "Histogram bins")->capture_default_str();
  kld->add_option("--seed", kl.seed, "Seed for the split-half diagonal")->capture_default_str();
  kld->add_option("--records", kl.records, "JSON Lines output");

  BenchOptions be;
  std::size_t be_frames = 0;
  auto* bench = app.add_subcommand("bench", "Time inference and report the real-time factor");
  bench->add_option("--manifest", be.manifest, "Labelled manifest")->required();
  bench->add_option("--model", be.model, "Model file")->required();
  auto* be_frames_opt = bench->add_option("--n-frames", be_frames, "Window length (defaults to the model's)");
  bench->add_option("--repeat", be.repeat, "Timed repetitions")->capture_default_str();
  bench->add_option("--fps", be.fps, "Frame rate")->capture_default_str();
  bench->add_option("--records", be.records, "JSON Lines output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  if (*epochs_opt) tr.epochs = tr_epochs;
  if (*seed_opt) tr.seed = tr_seed;
  if (*cl_frames_opt) cl.n_frames = cl_frames;
  if (*ev_frames_opt) ev.n_frames = ev_frames;
  if (*ev_window_opt) ev.dtw_window = ev_window;
  if (*be_frames_opt) be.n_frames = be_frames;

  return guarded(std::cerr, [&] {
    if (*extract) return cmd_extract(ex, std::cout);
    if (*gen_cmd) return cmd_gen(gen, std::cout);
    if (*train) return cmd_train(tr, std::cout);
    if (*classify) return cmd_classify(cl, std::cout);
    if (*eval) return cmd_eval(ev, std::cout);
    if (*kld) return cmd_kld(kl, std::cout);
    return cmd_bench(be, std::cout);
  });
}
