#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdio>
#include <istream>
#include <map>
#include <memory>
#include <ostream>
#include <sstream>

#include "timbre/dataset.hpp"
#include "timbre/error.hpp"
#include "timbre/io.hpp"
#include "timbre/streaming.hpp"
#include "timbre/synth.hpp"
#include "timbre/wav.hpp"

namespace timbre::cli {

namespace fs = std::filesystem;

namespace {

struct SvmFlags {
  double C = SvmParams{}.C;
  std::size_t epochs = SvmParams{}.max_epochs;
  std::uint64_t train_seed = SvmParams{}.seed;
  unsigned threads = 1;

  SvmParams params() const {
    SvmParams p;
    p.C = C;
    p.max_epochs = epochs;
    p.seed = train_seed;
    p.threads = threads;
    return p;
  }
  void add_to(CLI::App* cmd) {
    cmd->add_option("--C", C, "SVM regularization constant")->capture_default_str();
    cmd->add_option("--epochs", epochs, "maximum coordinate-descent epochs per SVM")
        ->capture_default_str();
    cmd->add_option("--train-seed", train_seed, "seed for the SVM visiting order")
        ->capture_default_str();
    cmd->add_option("--threads", threads, "worker threads (results do not depend on it)")
        ->capture_default_str();
  }
};

std::string fixed6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string svm_text(const SvmParams& p) {
  std::ostringstream s;
  s << "C = " << p.C << "\nepochs = " << p.max_epochs << "\ntrain_seed = " << p.seed << "\n";
  return s.str();
}

fs::path with_suffix(const fs::path& p, std::string_view suffix) {
  auto out = p;
  out += suffix;
  return out;
}

FeatureConfig feature_config_from(const std::string& path) {
  return path.empty() ? FeatureConfig{} : load_feature_config(path);
}

// Model and optional user config must describe the same extractor.
FeatureConfig config_for_model(const MulticlassModel& model, const std::string& config_path) {
  FeatureConfig cfg = parse_feature_config(model.feature_config);
  if (config_hash(cfg) != model.config_hash)
    throw ParseError("model file carries a feature config that does not match its hash");
  if (!config_path.empty()) {
    cfg = load_feature_config(config_path);
    require_config(model, config_hash(cfg));
  }
  return cfg;
}

std::vector<double> parse_pitch_list(const std::string& text) {
  std::vector<double> out;
  std::string_view rest = text;
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    auto tok = rest.substr(0, comma);
    rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || ptr != tok.data() + tok.size())
      throw ConfigError("bad pitch '" + std::string(tok) + "'");
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError("empty pitch list");
  return out;
}

void print_warnings(const LabeledDataset& d, std::ostream& err) {
  for (const auto& w : d.warnings) err << "warning: " << w << "\n";
}

// ----------------------------------------------------------------- synth

struct SynthArgs {
  std::string out;
  std::uint64_t seed = SynthOptions{}.seed;
  std::string pitches;
  std::size_t per_pitch = SynthOptions{}.per_pitch;
  int rate = SynthOptions{}.sample_rate;
  double seconds = SynthOptions{}.note_seconds;
};

int cmd_synth(const SynthArgs& a, std::ostream& out) {
  SynthOptions opts;
  opts.seed = a.seed;
  opts.per_pitch = a.per_pitch;
  opts.sample_rate = a.rate;
  opts.note_seconds = a.seconds;
  if (!a.pitches.empty()) opts.pitches = parse_pitch_list(a.pitches);

  const auto files = synth_corpus(default_profiles(), opts, a.out);

  std::ostringstream log;
  log << "command = synth\nseed = " << opts.seed << "\nrate = " << opts.sample_rate
      << "\nper_pitch = " << opts.per_pitch << "\nnote_seconds = " << opts.note_seconds
      << "\npitches =";
  for (double p : opts.pitches) log << " " << p;
  log << "\n";
  write_file_atomic(fs::path(a.out) / "synth.log", log.str());
  out << "wrote " << files.size() << " notes under " << a.out << "\n";
  return 0;
}

// ----------------------------------------------------------------- train

struct TrainArgs {
  std::string data, out, config, confusion;
  std::uint64_t split_seed = 1;
  SvmFlags svm;
};

int cmd_train(const TrainArgs& a, std::ostream& out, std::ostream& err) {
  const auto cfg = feature_config_from(a.config);
  const auto data = build_dataset(a.data, cfg);
  print_warnings(data, err);
  const auto params = a.svm.params();
  const auto cv = cross_validate(data, a.split_seed, params);

  const fs::path model_path = a.out;
  const fs::path confusion = a.confusion.empty() ? with_suffix(model_path, ".confusion.csv")
                                                 : fs::path(a.confusion);
  save_model_file(cv.model, model_path);
  write_file_atomic(confusion, cv.test.matrix.to_csv());
  write_file_atomic(with_suffix(model_path, ".log"),
                    "command = train\ndata = " + a.data + "\nsplit_seed = " +
                        std::to_string(a.split_seed) + "\n" + svm_text(params) +
                        to_config_text(cfg));

  out << "samples=" << data.size() << " classes=" << data.classes.size()
      << " train_accuracy=" << fixed6(cv.train.matrix.accuracy())
      << " test_accuracy=" << fixed6(cv.test.matrix.accuracy()) << "\n";
  return 0;
}

// -------------------------------------------------------------- evaluate

struct EvaluateArgs {
  std::string model, data, out, config;
};

int cmd_evaluate(const EvaluateArgs& a, std::ostream& out, std::ostream& err) {
  const auto model = load_model_file(a.model);
  const auto cfg = config_for_model(model, a.config);
  const auto data = build_dataset(a.data, cfg);
  print_warnings(data, err);
  const auto ev = evaluate(model, data);
  if (a.out.empty()) {
    out << ev.matrix.to_csv();
  } else {
    write_file_atomic(a.out, ev.matrix.to_csv());
    write_file_atomic(with_suffix(a.out, ".log"), "command = evaluate\nmodel = " + a.model +
                                                      "\ndata = " + a.data + "\n" +
                                                      to_config_text(cfg));
  }
  out << "samples=" << ev.matrix.total() << " accuracy=" << fixed6(ev.matrix.accuracy()) << "\n";
  return 0;
}

// ---------------------------------------------------------------- ablate

struct AblateArgs {
  std::string data, out, config;
  std::uint64_t split_seed = 1;
  SvmFlags svm;
};

int cmd_ablate(const AblateArgs& a, std::ostream& out, std::ostream& err) {
  const auto cfg = feature_config_from(a.config);
  const auto data = build_dataset(a.data, cfg);
  print_warnings(data, err);
  const auto params = a.svm.params();
  const auto rows = ablation_run(data, all_ablation_masks(), a.split_seed, params);
  const auto csv = ablation_csv(rows);
  if (a.out.empty()) {
    out << csv;
  } else {
    write_file_atomic(a.out, csv);
    write_file_atomic(with_suffix(a.out, ".log"),
                      "command = ablate\ndata = " + a.data + "\nsplit_seed = " +
                          std::to_string(a.split_seed) + "\n" + svm_text(params) +
                          to_config_text(cfg));
    for (const auto& r : rows) out << r.name << " " << fixed6(r.accuracy) << "\n";
  }
  return 0;
}

// --------------------------------------------------------------- predict

struct PredictArgs {
  std::string model, wav, config;
};

int cmd_predict(const PredictArgs& a, std::ostream& out) {
  const auto model = load_model_file(a.model);
  const auto cfg = config_for_model(model, a.config);
  const auto clip = load_wav(a.wav);
  const FeatureExtractor extractor(cfg, clip.sample_rate);
  const auto frames = frame_signal(clip, cfg.window_seconds, cfg.hop_seconds);

  std::vector<std::size_t> labels;
  std::vector<std::size_t> counts(model.classes.size(), 0);
  for (const auto& f : frames) {
    const auto p = predict(model, extractor.extract(f).values);
    labels.push_back(p.label);
    ++counts[p.label];
  }
  const auto label = majority(labels);
  out << "label=" << model.classes[label] << " windows=" << labels.size();
  for (std::size_t c = 0; c < counts.size(); ++c)
    out << " " << model.classes[c] << "=" << counts[c];
  out << "\n";
  return 0;
}

// ---------------------------------------------------------------- stream

struct StreamArgs {
  std::string model, wav, config;
  int rate = 16000;
};

int cmd_stream(const StreamArgs& a, std::istream& in, std::ostream& out) {
  auto model = std::make_shared<const MulticlassModel>(load_model_file(a.model));
  const auto cfg = config_for_model(*model, a.config);
  auto emit = [&](const std::vector<StreamEvent>& events) {
    for (const auto& ev : events) out << format_event(ev, model->classes) << "\n";
    out.flush();
  };

  if (!a.wav.empty()) {
    const auto clip = load_wav(a.wav);
    StreamPredictor sp(model, cfg, clip.sample_rate);
    emit(sp.push_samples(clip.samples));
    return 0;
  }

  if (a.rate <= 0) throw ConfigError("--rate must be positive");
  StreamPredictor sp(model, cfg, a.rate);
  std::array<char, 8192> buf{};
  std::vector<double> chunk;
  int carry = -1;  // dangling low byte from the previous read
  while (in.read(buf.data(), buf.size()) || in.gcount() > 0) {
    const auto n = static_cast<std::size_t>(in.gcount());
    chunk.clear();
    std::size_t i = 0;
    if (carry >= 0 && n > 0) {
      const auto v = static_cast<std::int16_t>(
          static_cast<std::uint16_t>(carry) | (static_cast<std::uint16_t>(static_cast<unsigned char>(buf[0])) << 8));
      chunk.push_back(v / 32768.0);
      carry = -1;
      i = 1;
    }
    for (; i + 1 < n; i += 2) {
      const auto lo = static_cast<unsigned char>(buf[i]);
      const auto hi = static_cast<unsigned char>(buf[i + 1]);
      chunk.push_back(static_cast<std::int16_t>(lo | (hi << 8)) / 32768.0);
    }
    if (i < n) carry = static_cast<unsigned char>(buf[i]);
    emit(sp.push_samples(chunk));
  }
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Instrument timbre features, pairwise SVM training and streaming prediction",
               "timbre"};
  app.require_subcommand(1);

  SynthArgs synth;
  auto* c_synth = app.add_subcommand("synth", "write the synthetic six-instrument corpus");
  c_synth->add_option("--out", synth.out, "output directory")->required();
  c_synth->add_option("--seed", synth.seed, "corpus seed")->capture_default_str();
  c_synth->add_option("--pitches", synth.pitches, "comma-separated pitches in Hz");
  c_synth->add_option("--per-pitch", synth.per_pitch, "notes per pitch")->capture_default_str();
  c_synth->add_option("--rate", synth.rate, "sample rate in Hz")->capture_default_str();
  c_synth->add_option("--seconds", synth.seconds, "note length")->capture_default_str();

  TrainArgs train;
  auto* c_train = app.add_subcommand("train", "50/50 split, train pairwise SVMs, save model");
  c_train->add_option("--data", train.data, "corpus root (<class>/*.wav)")->required();
  c_train->add_option("--out", train.out, "model file")->required();
  c_train->add_option("--seed", train.split_seed, "split seed")->capture_default_str();
  c_train->add_option("--config", train.config, "feature config file");
  c_train->add_option("--confusion", train.confusion, "confusion CSV (default <out>.confusion.csv)");
  train.svm.add_to(c_train);

  EvaluateArgs evaluate_args;
  auto* c_eval = app.add_subcommand("evaluate", "confusion matrix of a model on a corpus");
  c_eval->add_option("--model", evaluate_args.model, "model file")->required();
  c_eval->add_option("--data", evaluate_args.data, "corpus root")->required();
  c_eval->add_option("--out", evaluate_args.out, "confusion CSV (default stdout)");
  c_eval->add_option("--config", evaluate_args.config, "feature config; must match the model");

  AblateArgs ablate;
  auto* c_ablate = app.add_subcommand("ablate", "accuracy for every non-empty feature-group mask");
  c_ablate->add_option("--data", ablate.data, "corpus root")->required();
  c_ablate->add_option("--out", ablate.out, "ablation CSV (default stdout)");
  c_ablate->add_option("--seed", ablate.split_seed, "split seed")->capture_default_str();
  c_ablate->add_option("--config", ablate.config, "feature config file");
  ablate.svm.add_to(c_ablate);

  PredictArgs predict_args;
  auto* c_predict = app.add_subcommand("predict", "majority label over all windows of a WAV file");
  c_predict->add_option("--model", predict_args.model, "model file")->required();
  c_predict->add_option("--wav", predict_args.wav, "input WAV")->required();
  c_predict->add_option("--config", predict_args.config, "feature config; must match the model");

  StreamArgs stream;
  auto* c_stream = app.add_subcommand(
      "stream", "per-window predictions smoothed over the last second (raw s16le on stdin)");
  c_stream->add_option("--model", stream.model, "model file")->required();
  c_stream->add_option("--wav", stream.wav, "read a WAV file instead of stdin");
  c_stream->add_option("--rate", stream.rate, "stdin sample rate in Hz")->capture_default_str();
  c_stream->add_option("--config", stream.config, "feature config; must match the model");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (c_synth->parsed()) return cmd_synth(synth, out);
    if (c_train->parsed()) return cmd_train(train, out, err);
    if (c_eval->parsed()) return cmd_evaluate(evaluate_args, out, err);
    if (c_ablate->parsed()) return cmd_ablate(ablate, out, err);
    if (c_predict->parsed()) return cmd_predict(predict_args, out);
    if (c_stream->parsed()) return cmd_stream(stream, in, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace timbre::cli
