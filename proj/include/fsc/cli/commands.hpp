#pragma once

// Subcommand implementations behind the `fsc` executable. Each command writes
// human-readable output to `out`, optional JSON Lines records to a file, and
// reports failure by throwing fsc::Error; guarded() maps that to exit codes.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fsc/bitstream/annexb.hpp"
#include "fsc/bitstream/mp4.hpp"
#include "fsc/cli/parallel.hpp"
#include "fsc/datagen.hpp"
#include "fsc/dataset.hpp"
#include "fsc/dtw.hpp"
#include "fsc/io/fsts.hpp"
#include "fsc/io/manifest.hpp"
#include "fsc/io/records.hpp"
#include "fsc/metrics.hpp"
#include "fsc/nn/serialize.hpp"
#include "fsc/nn/train.hpp"
#include "fsc/stats.hpp"

namespace fsc::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitNumeric = 3;

/// Runs `fn`, printing a one-line diagnostic for any failure. Numerical
/// divergence exits 3, every other error 2.
template <typename F>
int guarded(std::ostream& err, F&& fn) {
  try {
    return fn();
  } catch (const nn::DivergedLoss& e) {
    err << "fsc: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const Error& e) {
    err << "fsc: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    err << "fsc: " << e.what() << '\n';
    return kExitInput;
  }
}

namespace detail {

/// Writes records to a file when a path is given, otherwise discards them.
class RecordSink {
 public:
  explicit RecordSink(const std::string& path) {
    if (path.empty()) return;
    file_.open(path);
    if (!file_) fail(ErrorCode::IoFailure, "cannot write records to '" + path + "'");
    writer_.emplace(file_);
  }
  void write(const std::string& kind, nlohmann::ordered_json fields) {
    if (writer_) writer_->write(kind, std::move(fields));
  }

 private:
  std::ofstream file_;
  std::optional<io::RecordWriter> writer_;
};

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

inline std::size_t resolve_frames(std::optional<std::size_t> requested, const nn::Model<float>& m) {
  const std::size_t n = requested.value_or(m.input.n_frames);
  if (n == 0) fail(ErrorCode::InvalidArgument, "--n-frames is required (the model does not record it)");
  return n;
}

inline PreprocessSpec inference_spec(std::size_t n_frames, const nn::Model<float>& m) {
  PreprocessSpec spec;
  spec.n_frames = n_frames;
  spec.normalization = m.input.znorm ? Normalization::ZScore : Normalization::None;
  return spec;
}

/// Predictions for every sample, batched, split across the worker pool.
inline std::vector<std::size_t> predict_all(const nn::Model<float>& m, const nn::Samples& s, std::size_t batch = 64) {
  std::vector<std::size_t> out(s.size());
  const std::size_t chunks = (s.size() + batch - 1) / batch;
  parallel_for(chunks, [&](std::size_t c) {
    const std::size_t begin = c * batch, n = std::min(batch, s.size() - begin);
    const auto probs = nn::predict_proba(m, nn::make_batch<float>(std::span(s.x).subspan(begin, n)));
    for (std::size_t b = 0; b < n; ++b) out[begin + b] = nn::argmax_row(probs, b);
  });
  return out;
}

inline std::vector<std::size_t> dtw_predict_all(const nn::Samples& refs, const nn::Samples& queries,
                                                const dtw::DtwConfig& cfg) {
  std::vector<std::size_t> out(queries.size());
  parallel_for(queries.size(), [&](std::size_t i) { out[i] = dtw::knn_classify(refs.x, refs.y, queries.x[i], 1, cfg); });
  return out;
}

/// Loads a manifest against the model's class table, listing any label the
/// model does not know.
inline LabeledDataset load_for_model(const std::string& manifest, const nn::Model<float>& m) {
  const auto man = io::read_manifest(manifest);
  std::set<std::string> unknown;
  for (const auto& r : man.rows)
    if (std::find(m.class_names.begin(), m.class_names.end(), r.label) == m.class_names.end()) unknown.insert(r.label);
  if (!unknown.empty()) {
    std::string list;
    for (const auto& u : unknown) list += (list.empty() ? "" : ", ") + u;
    std::string known;
    for (const auto& k : m.class_names) known += (known.empty() ? "" : ", ") + k;
    fail(ErrorCode::ManifestError,
         "class mismatch: manifest labels not in model [" + list + "]; model classes are [" + known + "]");
  }
  return io::load_dataset(man, &m.class_names);
}

inline void print_metrics_table(std::ostream& out, const std::string& title, const metrics::EvalReport& r) {
  out << title << '\n';
  out << std::left << std::setw(16) << "class" << std::right << std::setw(8) << "support" << std::setw(11)
      << "precision" << std::setw(9) << "recall" << '\n';
  for (std::size_t c = 0; c < r.class_names.size(); ++c) {
    std::uint64_t support = 0;
    for (auto v : r.confusion[c]) support += v;
    out << std::left << std::setw(16) << r.class_names[c] << std::right << std::setw(8) << support << std::fixed
        << std::setprecision(4) << std::setw(11) << r.metrics.precision[c] << std::setw(9) << r.metrics.recall[c]
        << '\n';
  }
  out << std::fixed << std::setprecision(4) << "accuracy         " << r.metrics.accuracy << '\n'
      << "macro precision  " << r.metrics.macro_precision << "  (reported as performance)\n"
      << "macro recall     " << r.metrics.macro_recall << '\n';
  out << std::setprecision(6) << "wall time        " << r.wall_time_seconds << " s for " << r.items << " items\n";
  if (r.real_time_factor > 0)
    out << std::setprecision(1) << "real-time factor " << r.real_time_factor << " at " << r.fps << " fps\n";
  out.unsetf(std::ios::floatfield);
  out << std::setprecision(6);
}

inline nlohmann::ordered_json report_json(const std::string& method, const metrics::EvalReport& r) {
  nlohmann::ordered_json j;
  j["method"] = method;
  j["classes"] = r.class_names;
  j["confusion"] = r.confusion;
  j["accuracy"] = r.metrics.accuracy;
  j["precision"] = r.metrics.precision;
  j["recall"] = r.metrics.recall;
  j["macro_precision"] = r.metrics.macro_precision;
  j["macro_recall"] = r.metrics.macro_recall;
  j["never_predicted"] = r.metrics.never_predicted;
  j["absent"] = r.metrics.absent;
  j["items"] = r.items;
  j["frames_processed"] = r.frames_processed;
  j["wall_time_seconds"] = r.wall_time_seconds;
  j["fps"] = r.fps;
  j["real_time_factor"] = r.real_time_factor;
  return j;
}

}  // namespace detail

// ---------------------------------------------------------------- extract

struct ExtractOptions {
  std::string input;
  std::string codec = "auto";      // avc | hevc | auto
  std::string container = "auto";  // annexb | mp4 | auto
  std::string mp4_sizes = "sample";  // sample | overhead
  std::string output;
};

inline Codec parse_codec(const std::string& s) {
  if (s == "avc" || s == "h264") return Codec::AVC;
  if (s == "hevc" || s == "h265") return Codec::HEVC;
  if (s == "auto") return Codec::Unknown;
  fail(ErrorCode::InvalidArgument, "unknown codec '" + s + "' (expected avc, hevc or auto)");
}

/// Frame sizes of a video file, with the container chosen as configured.
inline FrameSizeSeries extract_series(std::span<const std::uint8_t> bytes, const ExtractOptions& o) {
  const Codec codec = parse_codec(o.codec);
  if (o.mp4_sizes != "sample" && o.mp4_sizes != "overhead")
    fail(ErrorCode::InvalidArgument, "--mp4-sizes must be 'sample' or 'overhead'");
  const auto mode = o.mp4_sizes == "overhead" ? bitstream::Mp4SizeMode::IncludeOverhead : bitstream::Mp4SizeMode::SampleBytes;

  auto from_annexb = [&] {
    const Codec c = codec == Codec::Unknown ? bitstream::detect_codec(bytes) : codec;
    if (c == Codec::Unknown) fail(ErrorCode::NoStartCode, "could not determine the codec; pass --codec");
    return bitstream::extract_frames_annexb(bytes, c);
  };
  auto from_mp4 = [&] {
    auto s = bitstream::extract_frames_mp4(bytes, mode);
    if (codec != Codec::Unknown) s.codec = codec;
    return s;
  };

  if (o.container == "mp4") {
    try {
      return from_mp4();
    } catch (const Error& e) {
      fail(e.code(), std::string("mp4 layer: ") + e.what());
    }
  }
  if (o.container == "annexb") {
    try {
      return from_annexb();
    } catch (const Error& e) {
      fail(e.code(), std::string("annexb layer: ") + e.what());
    }
  }
  if (o.container != "auto") fail(ErrorCode::InvalidArgument, "unknown container '" + o.container + "'");

  std::string mp4_reason;
  if (bitstream::looks_like_mp4(bytes)) {
    try {
      return from_mp4();
    } catch (const Error& e) {
      mp4_reason = e.what();
    }
  } else {
    mp4_reason = "first box is not an ISO-BMFF top-level box";
  }
  try {
    return from_annexb();
  } catch (const Error& e) {
    fail(e.code(), "unrecognised input: mp4 detector: " + mp4_reason + "; annexb detector: " + e.what());
  }
}

inline int cmd_extract(const ExtractOptions& o, std::ostream& out) {
  if (o.output.empty()) fail(ErrorCode::InvalidArgument, "-o/--output is required");
  const auto bytes = io::read_file(o.input);
  auto series = extract_series(bytes, o);
  io::write_fsts(o.output, series);
  out << o.input << ": " << series.length() << " frames, " << series.total_bits() << " bits, codec "
      << to_string(series.codec);
  if (series.fps > 0) out << ", " << series.fps << " fps";
  out << " -> " << o.output << '\n';
  return kExitOk;
}

// -------------------------------------------------------------------- gen

struct GenOptions {
  std::size_t classes = 11;
  std::size_t clips = 100;
  std::size_t frames = 3000;
  std::uint64_t seed = 0;
  std::string out_dir;
};

inline int cmd_gen(const GenOptions& o, std::ostream& out) {
  if (o.out_dir.empty()) fail(ErrorCode::InvalidArgument, "-o/--output directory is required");
  const auto ds = datagen::standard_benchmark(o.classes, o.clips, o.frames, o.seed);
  std::error_code ec;
  std::filesystem::create_directories(o.out_dir, ec);
  if (ec) fail(ErrorCode::IoFailure, "cannot create '" + o.out_dir + "': " + ec.message());
  std::vector<io::ManifestRow> rows(ds.size());
  parallel_for(ds.size(), [&](std::size_t i) {
    const auto& it = ds.items[i];
    const std::string name = it.series.source_id + ".fsts";
    io::write_fsts(std::filesystem::path(o.out_dir) / name, it.series);
    rows[i] = {name, ds.class_names[it.label]};
  });
  const auto manifest = std::filesystem::path(o.out_dir) / "manifest.csv";
  io::write_manifest(manifest, rows);
  out << "wrote " << ds.size() << " clips (" << o.classes << " classes x " << o.clips << ", " << o.frames
      << " frames) and " << manifest.string() << '\n';
  return kExitOk;
}

// ------------------------------------------------------------------ train

struct TrainOptions {
  std::string manifest;
  std::size_t n_frames = 3000;
  std::string norm = "zscore";  // zscore | none
  std::string config;           // optional JSON file
  std::string output;
  std::optional<std::size_t> epochs;
  std::optional<std::uint64_t> seed;
  std::vector<std::size_t> filters;  // empty = from config or default
  std::string records;
  bool quiet = false;
};

/// Training settings: defaults, then the JSON config file, then flags.
struct TrainSetup {
  nn::TrainConfig train;
  nn::Architecture arch;
  SplitFractions split;
};

inline TrainSetup load_train_setup(const TrainOptions& o) {
  TrainSetup s;
  if (!o.config.empty()) {
    std::ifstream in(o.config);
    if (!in) fail(ErrorCode::IoFailure, "cannot open config '" + o.config + "'");
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorCode::InvalidArgument, "config '" + o.config + "': " + e.what());
    }
    auto& t = s.train;
    t.init_lr = j.value("init_lr", t.init_lr);
    t.lr_factor = j.value("lr_factor", t.lr_factor);
    t.lr_patience = j.value("lr_patience", t.lr_patience);
    t.early_stop_patience = j.value("early_stop_patience", t.early_stop_patience);
    t.max_epochs = j.value("max_epochs", t.max_epochs);
    t.batch_size = j.value("batch_size", t.batch_size);
    t.seed = j.value("seed", t.seed);
    t.min_delta = j.value("min_delta", t.min_delta);
    s.arch.filters = j.value("filters", s.arch.filters);
    s.arch.kernels = j.value("kernels", s.arch.kernels);
    if (j.contains("split")) {
      const auto& sp = j["split"];
      s.split = {sp.value("train", 0.8), sp.value("val", 0.1), sp.value("test", 0.1)};
    }
  }
  if (o.epochs) s.train.max_epochs = *o.epochs;
  if (o.seed) s.train.seed = *o.seed;
  if (!o.filters.empty()) s.arch.filters = o.filters;
  s.train.validate();
  return s;
}

inline Normalization parse_norm(const std::string& s) {
  if (s == "zscore") return Normalization::ZScore;
  if (s == "none") return Normalization::None;
  fail(ErrorCode::InvalidArgument, "--norm must be 'zscore' or 'none'");
}

inline std::vector<io::ManifestRow> manifest_rows(const LabeledDataset& part, const io::Manifest& source) {
  std::vector<io::ManifestRow> rows;
  for (const auto& it : part.items) {
    const auto match = std::find_if(source.rows.begin(), source.rows.end(),
                                    [&](const io::ManifestRow& r) { return r.path == it.series.source_id; });
    rows.push_back({std::filesystem::absolute(source.resolve(*match)).string(), part.class_names[it.label]});
  }
  return rows;
}

inline int cmd_train(const TrainOptions& o, std::ostream& out) {
  if (o.output.empty()) fail(ErrorCode::InvalidArgument, "-o/--output is required");
  const auto setup = load_train_setup(o);
  const auto man = io::read_manifest(o.manifest);
  const auto ds = io::load_dataset(man);

  PreprocessSpec spec;
  spec.n_frames = o.n_frames;
  spec.normalization = parse_norm(o.norm);
  for (const auto& it : ds.items) window(it.series, spec);  // fail early with TooShort

  const auto parts = split(ds, setup.split, setup.train.seed);
  const auto train_set = nn::make_samples(parts.train, spec);
  const auto val_set = nn::make_samples(parts.val, spec);
  const auto test_set = nn::make_samples(parts.test, spec);

  const std::filesystem::path model_path(o.output);
  const auto stem = model_path.parent_path() / model_path.stem();
  io::write_manifest(stem.string() + ".train.csv", manifest_rows(parts.train, man));
  io::write_manifest(stem.string() + ".val.csv", manifest_rows(parts.val, man));
  io::write_manifest(stem.string() + ".test.csv", manifest_rows(parts.test, man));

  auto model = nn::make_initialized_model<float>(setup.arch, ds.class_names, setup.train.seed);
  model.input = {o.n_frames, spec.normalization == Normalization::ZScore};

  std::ofstream history(stem.string() + ".history.jsonl");
  if (!history) fail(ErrorCode::IoFailure, "cannot write training history next to '" + o.output + "'");
  io::RecordWriter hist_writer(history);
  detail::RecordSink records(o.records);
  auto on_epoch = [&](const nn::EpochReport& e) {
    nlohmann::ordered_json row{{"epoch", e.epoch},       {"train_loss", e.train_loss}, {"val_loss", e.val_loss},
                               {"val_accuracy", e.val_accuracy}, {"lr", e.lr},         {"improved", e.improved},
                               {"lr_reduced", e.lr_reduced}};
    hist_writer.write("epoch", row);
    records.write("epoch", row);
    if (!o.quiet)
      out << "epoch " << e.epoch << " train_loss " << e.train_loss << " val_loss " << e.val_loss << " val_acc "
          << e.val_accuracy << " lr " << e.lr << (e.improved ? " *" : "") << '\n';
  };

  const auto t0 = std::chrono::steady_clock::now();
  const auto result = nn::train(model, train_set, val_set, setup.train, on_epoch);
  const double train_seconds = detail::seconds_since(t0);
  nn::save_model(result.model, o.output);

  const auto& h = result.history;
  const auto val = nn::evaluate(result.model, val_set);
  const auto test = nn::evaluate(result.model, test_set);
  nlohmann::ordered_json summary{{"model", o.output},
                                 {"epochs", h.epochs()},
                                 {"best_epoch", h.best_epoch},
                                 {"early_stopped", h.early_stopped},
                                 {"lr_reductions", h.lr_reductions},
                                 {"best_val_loss", val.loss},
                                 {"best_val_accuracy", val.accuracy},
                                 {"test_accuracy", test.accuracy},
                                 {"train_seconds", train_seconds}};
  hist_writer.write("summary", summary);
  records.write("summary", summary);
  out << "best epoch " << h.best_epoch << " of " << h.epochs() << ": val_loss " << val.loss << " val_accuracy "
      << val.accuracy << ", test_accuracy " << test.accuracy << '\n'
      << "model written to " << o.output << '\n';
  return kExitOk;
}

// --------------------------------------------------------------- classify

struct ClassifyOptions {
  std::string model;
  std::vector<std::string> inputs;  // FSTS files or raw video
  std::optional<std::size_t> n_frames;
  std::string records;
};

inline FrameSizeSeries load_series_any(const std::string& path) {
  const auto bytes = io::read_file(path);
  if (bytes.size() >= 4 && std::memcmp(bytes.data(), io::kFstsMagic, 4) == 0) return io::decode_fsts(bytes, path);
  auto s = extract_series(bytes, ExtractOptions{});
  s.source_id = path;
  return s;
}

inline int cmd_classify(const ClassifyOptions& o, std::ostream& out) {
  const auto model = nn::load_model<float>(o.model);
  const auto spec = detail::inference_spec(detail::resolve_frames(o.n_frames, model), model);
  detail::RecordSink records(o.records);
  for (const auto& path : o.inputs) {
    const auto series = load_series_any(path);
    const auto pred = nn::predict(model, preprocess(series, spec));
    out << path << '\t' << pred.class_name << '\t' << std::fixed << std::setprecision(4)
        << pred.probabilities[pred.class_index] << '\n';
    out.unsetf(std::ios::floatfield);
    nlohmann::ordered_json probs;
    for (std::size_t c = 0; c < model.class_names.size(); ++c) probs[model.class_names[c]] = pred.probabilities[c];
    records.write("prediction", {{"input", path}, {"class", pred.class_name}, {"probabilities", probs}});
  }
  return kExitOk;
}

// ------------------------------------------------------------------- eval

struct EvalOptions {
  std::string manifest;
  std::string model;
  std::optional<std::size_t> n_frames;
  std::string baseline = "none";  // none | dtw
  std::string train_manifest;     // reference set for the DTW baseline
  std::optional<std::size_t> dtw_window;
  double fps = 30.0;
  std::string records;
};

inline int cmd_eval(const EvalOptions& o, std::ostream& out) {
  if (o.baseline != "none" && o.baseline != "dtw") fail(ErrorCode::InvalidArgument, "--baseline must be dtw or none");
  const auto model = nn::load_model<float>(o.model);
  const std::size_t n = detail::resolve_frames(o.n_frames, model);
  const auto spec = detail::inference_spec(n, model);
  const auto ds = detail::load_for_model(o.manifest, model);
  const auto samples = nn::make_samples(ds, spec);
  if (samples.empty()) fail(ErrorCode::EmptyDataset, "manifest has no items");

  const auto t0 = std::chrono::steady_clock::now();
  const auto pred = detail::predict_all(model, samples);
  const double wall = detail::seconds_since(t0);
  const auto report = metrics::make_report(model.class_names, samples.y, pred, wall, n, o.fps);
  detail::print_metrics_table(out, "resnet (" + std::to_string(samples.size()) + " items, N=" + std::to_string(n) + ")",
                              report);
  detail::RecordSink records(o.records);
  records.write("report", detail::report_json("resnet", report));

  if (o.baseline == "dtw") {
    if (o.train_manifest.empty()) fail(ErrorCode::InvalidArgument, "--baseline dtw needs --train-manifest for references");
    const auto refs = nn::make_samples(detail::load_for_model(o.train_manifest, model), spec);
    dtw::DtwConfig cfg;
    cfg.window = o.dtw_window;
    const auto t1 = std::chrono::steady_clock::now();
    const auto dtw_pred = detail::dtw_predict_all(refs, samples, cfg);
    const double dtw_wall = detail::seconds_since(t1);
    const auto dtw_report = metrics::make_report(model.class_names, samples.y, dtw_pred, dtw_wall, n, o.fps);
    out << '\n';
    detail::print_metrics_table(out, "1-NN DTW (" + std::to_string(refs.size()) + " references)", dtw_report);
    const double ratio = wall > 0 ? dtw_wall / wall : 0.0;
    out << "\nDTW / ResNet wall-time ratio: " << ratio << '\n';
    records.write("report", detail::report_json("dtw_1nn", dtw_report));
    nlohmann::ordered_json cmp;
    cmp["resnet_accuracy"] = report.metrics.accuracy;
    cmp["dtw_accuracy"] = dtw_report.metrics.accuracy;
    cmp["resnet_wall_seconds"] = wall;
    cmp["dtw_wall_seconds"] = dtw_wall;
    cmp["wall_time_ratio"] = ratio;
    records.write("comparison", cmp);
  }
  return kExitOk;
}

// -------------------------------------------------------------------- kld

struct KldOptions {
  std::string manifest;
  std::size_t bins = stats::kDefaultBins;
  std::uint64_t seed = 0;
  std::string records;
};

inline int cmd_kld(const KldOptions& o, std::ostream& out) {
  const auto ds = io::load_dataset(io::read_manifest(o.manifest));
  const auto m = stats::class_kld_matrix(ds, o.bins, o.seed);
  const std::size_t C = m.class_names.size();
  out << "KL(row || column) in nats, " << o.bins << " bins; diagonal is split-half intra-class\n";
  out << std::setw(14) << "";
  for (const auto& n : m.class_names) out << std::setw(14) << n.substr(0, 13);
  out << '\n' << std::scientific << std::setprecision(3);
  for (std::size_t i = 0; i < C; ++i) {
    out << std::setw(14) << m.class_names[i].substr(0, 13);
    for (std::size_t j = 0; j < C; ++j) out << std::setw(14) << m.values[i][j];
    out << '\n';
  }
  const double inter = stats::median(m.off_diagonal()), intra = stats::median(m.diagonal());
  out << "median inter-class " << inter << ", median intra-class " << intra;
  out.unsetf(std::ios::floatfield);
  out << std::setprecision(6);
  if (intra > 0) out << ", ratio " << inter / intra;
  out << '\n';

  detail::RecordSink records(o.records);
  for (std::size_t i = 0; i < C; ++i)
    for (std::size_t j = 0; j < C; ++j)
      records.write("kld", {{"from", m.class_names[i]}, {"to", m.class_names[j]}, {"nats", m.values[i][j]}});
  records.write("kld_summary", {{"median_inter", inter}, {"median_intra", intra}, {"bins", o.bins}});
  return kExitOk;
}

// ------------------------------------------------------------------ bench

struct BenchOptions {
  std::string manifest;
  std::string model;
  std::optional<std::size_t> n_frames;
  std::size_t repeat = 5;
  double fps = 30.0;
  std::string records;
};

inline int cmd_bench(const BenchOptions& o, std::ostream& out) {
  if (o.repeat < 1) fail(ErrorCode::InvalidArgument, "--repeat must be >= 1");
  const auto model = nn::load_model<float>(o.model);
  const std::size_t n = detail::resolve_frames(o.n_frames, model);
  const auto samples = nn::make_samples(detail::load_for_model(o.manifest, model), detail::inference_spec(n, model));
  if (samples.empty()) fail(ErrorCode::EmptyDataset, "manifest has no items");

  std::vector<double> timings;
  for (std::size_t r = 0; r < o.repeat; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    detail::predict_all(model, samples);
    timings.push_back(detail::seconds_since(t0));
  }
  const double median = stats::median(timings);
  const double items = static_cast<double>(samples.size());
  const double rtf = metrics::realtime_factor(items, static_cast<double>(n), o.fps, median);
  out << "timings (s):";
  for (double t : timings) out << ' ' << t;
  out << "\nmedian " << median << " s over " << o.repeat << " runs\n"
      << "items " << samples.size() << ", frames/item " << n << ", fps " << o.fps << '\n'
      << "items/s " << items / median << ", frames/s " << items * static_cast<double>(n) / median << '\n'
      << "real-time factor = (" << samples.size() << " x " << n << " / " << o.fps << ") / " << median << " = " << rtf
      << '\n';
  detail::RecordSink records(o.records);
  records.write("bench", {{"timings", timings},
                          {"median_seconds", median},
                          {"items", samples.size()},
                          {"frames_per_item", n},
                          {"fps", o.fps},
                          {"items_per_second", items / median},
                          {"frames_per_second", items * static_cast<double>(n) / median},
                          {"real_time_factor", rtf}});
  return kExitOk;
}

}  // namespace fsc::cli
