// Copyright 2026 The fdspeech Authors.
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

// fdspeech command line: corpus feature extraction, forest training and
// evaluation, ablations, the FIR simulation and a segmentation debug report.
//
// Exit codes: 0 success, 2 data error, 64 usage, 65 layout mismatch,
// 70 internal error.

#include <CLI11.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fdspeech/asvspoof.hpp"
#include "fdspeech/audio_io.hpp"
#include "fdspeech/cepstral.hpp"
#include "fdspeech/error.hpp"
#include "fdspeech/firsim.hpp"
#include "fdspeech/forest.hpp"
#include "fdspeech/segmentation.hpp"

namespace fs = std::filesystem;
using namespace fdspeech;

namespace {

constexpr const char* kVersion = "0.1.0";

enum Exit : int {
  kOk = 0,
  kDataError = 2,
  kUsage = 64,
  kLayout = 65,
  kInternal = 70,
};

std::uint64_t Fnv1a(std::uint64_t h, const char* data, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    h ^= static_cast<unsigned char>(data[i]);
    h *= 0x100000001b3ULL;
  }
  return h;
}

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;

std::uint64_t HashFile(const fs::path& path, std::uint64_t h = kFnvOffset) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    h = Fnv1a(h, buf, static_cast<std::size_t>(in.gcount()));
  }
  return h;
}

// Everything needed to replay a run. The option block is a config file
// section for the command, so `fdspeech --config <manifest>` reruns it.
struct Manifest {
  std::string command;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, std::uint64_t>> inputs;

  void AddInput(const std::string& label, std::uint64_t hash) { inputs.emplace_back(label, hash); }
  void AddFile(const fs::path& path) { AddInput(path.string(), HashFile(path)); }

  void Write(const fs::path& path, const CLI::App& sub) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
    out << "# fdspeech run manifest\n"
        << "# command: " << command << '\n'
        << "# version: " << kVersion << '\n'
        << "# seed: " << seed << '\n';
    for (const auto& [label, hash] : inputs) {
      out << fmt::format("# input: {} fnv1a64={:016x}\n", label, hash);
    }
    out << '[' << sub.get_name() << "]\n" << sub.config_to_str(true, false);
  }
};

fs::path ManifestPath(const fs::path& out) { return fs::path(out.string() + ".manifest"); }

std::ofstream OpenOut(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  return out;
}

const std::map<std::string, std::string> kSegmentChoices = {
    {"full", "full"}, {"silence", "silence"}, {"voiced", "voiced"}};

struct ExtractArgs {
  fs::path protocol, audio_root, out, skip_log;
  std::string segment = "full";
  std::string extension = "wav";
  std::size_t window_len = 101;
  double threshold_db = -40.0;
  std::vector<int> bases = {10, 20};
  std::vector<double> deltas = {1, 2, 3, 4};
  double alpha = 0.3;
  std::size_t min_digits = 10;
  bool balance = false;
  std::uint64_t seed = 0;
  unsigned jobs = 1;
};

int RunExtract(const ExtractArgs& a, const CLI::App& sub) {
  ExtractionConfig cfg = ExtractionConfig::ForSegment(ParseSegmentKind(a.segment));
  cfg.energy.window_len = a.window_len;
  cfg.energy.threshold_db = a.threshold_db;
  cfg.fd.bases = a.bases;
  cfg.fd.deltas = a.deltas;
  cfg.fd.alpha = a.alpha;
  cfg.fd.min_digits = a.min_digits;

  auto entries = ParseProtocol(a.protocol);
  if (a.balance) entries = BalanceTraining(entries, a.seed);
  BuildResult built = BuildDataset(entries, a.audio_root, cfg, a.jobs, a.extension);

  if (a.out.has_parent_path()) fs::create_directories(a.out.parent_path());
  WriteFeatureCsv(a.out, built.dataset);
  WriteFeatureSidecar(fs::path(a.out.string() + ".meta"), cfg, built.dataset);
  const fs::path skip_log = a.skip_log.empty() ? fs::path(a.out.string() + ".skips.csv") : a.skip_log;
  WriteSkipLog(skip_log, built.skips);

  Manifest m{"extract", a.seed, {}};
  m.AddFile(a.protocol);
  std::uint64_t audio = kFnvOffset;
  for (const auto& e : entries) {
    audio = HashFile(a.audio_root / (e.utterance_id + "." + a.extension), audio);
  }
  m.AddInput("audio:" + a.audio_root.string(), audio);
  m.Write(ManifestPath(a.out), sub);

  std::cerr << fmt::format("extract: {} rows, {} skipped, {} features, layout {}\n",
                           built.dataset.rows(), built.skips.size(), built.dataset.n_features,
                           built.dataset.layout_hash);
  if (built.diverged_fits > 0) {
    std::cerr << fmt::format("extract: {} Benford fits did not converge\n", built.diverged_fits);
  }
  return kOk;
}

struct GridArgs {
  std::vector<int> n_trees;
  std::vector<std::string> criteria;
  std::uint64_t seed = 0;
  int max_depth = 0;
  unsigned jobs = 1;

  std::vector<ForestConfig> Grid() const {
    ForestConfig base;
    base.seed = seed;
    base.max_depth = max_depth;
    if (n_trees.empty() && criteria.empty()) return DefaultGrid(base);
    const std::vector<int> trees = n_trees.empty() ? std::vector<int>{10, 100, 500, 1000} : n_trees;
    const std::vector<std::string> crits =
        criteria.empty() ? std::vector<std::string>{"gini", "entropy"} : criteria;
    std::vector<ForestConfig> grid;
    for (int t : trees) {
      for (const auto& c : crits) {
        ForestConfig cfg = base;
        cfg.n_trees = t;
        cfg.criterion = ParseCriterion(c);
        grid.push_back(cfg);
      }
    }
    return grid;
  }
};

void AddGridOptions(CLI::App* sub, GridArgs& g) {
  sub->add_option("--n-trees", g.n_trees, "Tree counts to search (default 10,100,500,1000)")
      ->delimiter(',');
  sub->add_option("--criterion", g.criteria, "Split criteria to search (default gini,entropy)")
      ->delimiter(',')
      ->check(CLI::IsMember({"gini", "entropy"}));
  sub->add_option("--seed", g.seed, "Forest seed")->capture_default_str();
  sub->add_option("--max-depth", g.max_depth, "Maximum tree depth, 0 for unlimited")
      ->capture_default_str();
  sub->add_option("--jobs", g.jobs, "Worker threads, 0 for all cores")->capture_default_str();
}

void WriteGridCsv(const fs::path& path, const GridResult& gr) {
  auto out = OpenOut(path);
  out << "n_trees,criterion,dev_accuracy\n";
  for (const auto& c : gr.cells) {
    out << fmt::format("{},{},{}\n", c.n_trees, CriterionName(c.criterion), c.dev_accuracy);
  }
}

void RequireSameLayout(const LabeledDataset& a, const std::string& a_name,
                       const LabeledDataset& b, const std::string& b_name) {
  if (a.layout_hash != b.layout_hash || a.n_features != b.n_features) {
    throw Error(ErrorCode::kLayoutMismatch,
                fmt::format("{} has layout {} ({} features), {} has layout {} ({} features)",
                            a_name, a.layout_hash, a.n_features, b_name, b.layout_hash,
                            b.n_features));
  }
}

struct TrainArgs {
  fs::path train, dev, model, grid_out;
  GridArgs grid;
};

int RunTrain(const TrainArgs& a, const CLI::App& sub) {
  const LabeledDataset train = ReadFeatureCsv(a.train);
  const LabeledDataset dev = ReadFeatureCsv(a.dev);
  RequireSameLayout(train, a.train.string(), dev, a.dev.string());
  const auto grid = a.grid.Grid();
  GridResult gr = GridSearch(train, dev, grid, a.grid.jobs);
  if (a.model.has_parent_path()) fs::create_directories(a.model.parent_path());
  SaveModel(a.model, gr.best);
  WriteGridCsv(a.grid_out.empty() ? fs::path(a.model.string() + ".grid.csv") : a.grid_out, gr);

  Manifest m{"train", a.grid.seed, {}};
  m.AddFile(a.train);
  m.AddFile(a.dev);
  m.Write(ManifestPath(a.model), sub);
  std::cerr << fmt::format("train: best {} trees, {}, dev accuracy {:.4f}\n",
                           gr.best.config.n_trees, CriterionName(gr.best.config.criterion),
                           Accuracy(gr.best, dev));
  return kOk;
}

struct EvaluateArgs {
  fs::path model, features, protocol, out;
  std::string segment = "full";
  std::string config = "all";
};

int RunEvaluate(const EvaluateArgs& a, const CLI::App& sub) {
  const TrainedModel model = LoadModel(a.model);
  LabeledDataset data = ReadFeatureCsv(a.features);
  if (data.layout_hash != model.layout_hash || data.n_features != model.n_features) {
    throw Error(ErrorCode::kLayoutMismatch,
                fmt::format("model layout {} ({} features), features layout {} ({} features)",
                            model.layout_hash, model.n_features, data.layout_hash,
                            data.n_features));
  }
  if (!a.protocol.empty()) {
    // Restrict to the protocol's records and take their keys from it.
    std::map<std::string, ProtocolEntry> by_id;
    for (auto& e : ParseProtocol(a.protocol)) by_id.emplace(e.utterance_id, std::move(e));
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < data.rows(); ++i) {
      if (by_id.count(data.record_ids[i])) keep.push_back(i);
    }
    LabeledDataset subset = data.SelectRows(keep);
    subset.column_names = data.column_names;
    subset.layout_hash = data.layout_hash;
    for (std::size_t i = 0; i < subset.rows(); ++i) {
      const auto& e = by_id.at(subset.record_ids[i]);
      subset.labels[i] = e.label();
      subset.system_ids[i] = e.system_or_dash();
    }
    data = std::move(subset);
  }
  const EvaluationReport report = OneVsOneEval(model, data, a.segment, a.config, true);
  auto out = OpenOut(a.out);
  WriteReportCsv(out, report);
  out.close();

  Manifest m{"evaluate", model.config.seed, {}};
  m.AddFile(a.model);
  m.AddFile(a.features);
  if (!a.protocol.empty()) m.AddFile(a.protocol);
  m.Write(ManifestPath(a.out), sub);
  return kOk;
}

struct AblateArgs {
  fs::path features_dir, out, eval_out;
  GridArgs grid;
};

// Looks for <segment>.train.csv, <segment>.dev.csv and optionally
// <segment>.eval.csv in the features directory.
int RunAblate(const AblateArgs& a, const CLI::App& sub) {
  Manifest m{"ablate", a.grid.seed, {}};
  std::vector<SegmentFeatures> features;
  for (SegmentKind kind : {SegmentKind::kFull, SegmentKind::kSilence, SegmentKind::kVoiced}) {
    const std::string name(SegmentKindName(kind));
    const fs::path train = a.features_dir / (name + ".train.csv");
    const fs::path dev = a.features_dir / (name + ".dev.csv");
    const fs::path eval = a.features_dir / (name + ".eval.csv");
    if (!fs::exists(train) || !fs::exists(dev)) continue;
    SegmentFeatures sf;
    sf.segment = kind;
    sf.train = ReadFeatureCsv(train);
    sf.dev = ReadFeatureCsv(dev);
    RequireSameLayout(sf.train, train.string(), sf.dev, dev.string());
    m.AddFile(train);
    m.AddFile(dev);
    if (fs::exists(eval)) {
      sf.eval = ReadFeatureCsv(eval);
      RequireSameLayout(sf.train, train.string(), *sf.eval, eval.string());
      m.AddFile(eval);
    }
    features.push_back(std::move(sf));
  }
  if (features.empty()) {
    throw Error(ErrorCode::kEmptyDataset,
                "no <segment>.train.csv / <segment>.dev.csv pairs in " + a.features_dir.string());
  }
  const auto grid = a.grid.Grid();
  const AblationResult result = AblationRun(features, DefaultAblations(), grid, a.grid.jobs);
  {
    auto out = OpenOut(a.out);
    WriteReportCsv(out, result.dev);
  }
  if (!result.eval.rows.empty()) {
    const fs::path eval_out =
        a.eval_out.empty() ? fs::path(a.out.string() + ".eval.csv") : a.eval_out;
    auto out = OpenOut(eval_out);
    WriteReportCsv(out, result.eval);
  }
  m.Write(ManifestPath(a.out), sub);
  return kOk;
}

struct SimulateArgs {
  SweepOptions sweep;
  fs::path out;
};

int RunSimulate(const SimulateArgs& a, const CLI::App& sub) {
  const SweepResult result = DivergenceSweep(a.sweep);
  {
    auto out = OpenOut(a.out);
    WriteSweepCsv(out, result);
  }
  Manifest m{"simulate", a.sweep.seed, {}};
  m.Write(ManifestPath(a.out), sub);
  return kOk;
}

struct SegmentReportArgs {
  fs::path input, out, cepstra;
  std::size_t window_len = 101;
  double threshold_db = -40.0;
  std::string segment = "full";
};

int RunSegmentReport(const SegmentReportArgs& a, const CLI::App& sub) {
  EnergyConfig energy;
  energy.window_len = a.window_len;
  energy.threshold_db = a.threshold_db;
  energy.Validate();
  const AudioBuffer audio = PeakNormalize(StripZeros(DecodeWav(a.input)));
  {
    auto out = OpenOut(a.out);
    out << "window_index,start_sample,energy_db,label\n";
    for (const auto& w : LabelWindows(audio, energy)) {
      const std::string energy_text =
          w.energy_db == kSilentEnergyDb ? std::string("-inf") : fmt::format("{}", w.energy_db);
      out << fmt::format("{},{},{},{}\n", w.index, w.start, energy_text,
                         w.voiced ? "voiced" : "silence");
    }
  }
  if (!a.cepstra.empty()) {
    const SegmentKind kind = ParseSegmentKind(a.segment);
    const Segmentation seg = Segment(audio, energy);
    const CepstralMatrix m = Mfcc(Extract(audio, seg.view(kind)), CepstralConfig::ForSegment(kind));
    auto out = OpenOut(a.cepstra);
    for (std::size_t c = 0; c < m.frequencies.size(); ++c) {
      out << (c ? "," : "") << 'f' << m.frequencies[c];
    }
    out << '\n';
    for (std::size_t t = 0; t < m.n_frames; ++t) {
      for (std::size_t c = 0; c < m.frequencies.size(); ++c) {
        out << (c ? "," : "") << fmt::format("{}", m.at(t, c));
      }
      out << '\n';
    }
  }
  Manifest m{"segment-report", 0, {}};
  m.AddFile(a.input);
  m.Write(ManifestPath(a.out), sub);
  return kOk;
}

// CLI11 reads config files on the top-level app only, where `[command]`
// sections address subcommands. This lifts `--config FILE` to the front of
// the arguments and wraps a section-less key=value file in the section of
// the command being run.
class ConfigArgs {
 public:
  ConfigArgs(int argc, char** argv, const std::vector<std::string>& commands) {
    std::vector<std::string> rest;
    std::string config;
    for (int i = 1; i < argc; ++i) {
      const std::string arg = argv[i];
      if (arg == "--config" && i + 1 < argc) {
        config = argv[++i];
      } else if (arg.rfind("--config=", 0) == 0) {
        config = arg.substr(9);
      } else {
        rest.push_back(arg);
      }
    }
    args_.push_back(argv[0]);
    if (!config.empty()) {
      args_.push_back("--config");
      args_.push_back(Normalize(config, rest, commands));
    }
    args_.insert(args_.end(), rest.begin(), rest.end());
    for (const auto& a : args_) argv_.push_back(a.c_str());
  }
  ~ConfigArgs() {
    std::error_code ec;
    if (!temp_.empty()) fs::remove(temp_, ec);
  }
  ConfigArgs(const ConfigArgs&) = delete;
  ConfigArgs& operator=(const ConfigArgs&) = delete;

  int argc() const { return static_cast<int>(argv_.size()); }
  const char* const* argv() const { return argv_.data(); }

 private:
  std::string Normalize(const std::string& path, std::vector<std::string>& rest,
                        const std::vector<std::string>& commands) {
    std::ifstream in(path);
    if (!in) return path;  // CLI11 reports the missing file
    std::stringstream text;
    text << in.rdbuf();
    const auto command = std::find_first_of(rest.begin(), rest.end(), commands.begin(),
                                            commands.end());
    std::string line;
    for (std::istringstream lines(text.str()); std::getline(lines, line);) {
      const auto first = line.find_first_not_of(" \t");
      if (first == std::string::npos || line[first] != '[') continue;
      // A manifest names its command; run it unless one was given.
      const auto close = line.find(']', first);
      const std::string section = line.substr(first + 1, close - first - 1);
      if (command == rest.end() &&
          std::find(commands.begin(), commands.end(), section) != commands.end()) {
        rest.insert(rest.begin(), section);
      }
      return path;
    }
    if (command == rest.end()) return path;
    temp_ = fs::temp_directory_path() /
            fmt::format("fdspeech-config-{:016x}.ini",
                        Fnv1a(kFnvOffset, path.data(), path.size()) ^
                            reinterpret_cast<std::uintptr_t>(this));
    std::ofstream out(temp_, std::ios::binary | std::ios::trunc);
    out << '[' << *command << "]\n" << text.str();
    return temp_.string();
  }

  std::vector<std::string> args_;
  std::vector<const char*> argv_;
  fs::path temp_;
};

int ExitCodeFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kLayoutMismatch:
      return kLayout;
    case ErrorCode::kInvalidConfig:
      return kUsage;
    case ErrorCode::kDesignFailure:
      return kInternal;
    default:
      return kDataError;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"First-digit (Benford) features of MFCCs for synthetic speech detection"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value config file; flags override it");

  ExtractArgs ex;
  auto* extract = app.add_subcommand("extract", "Extract feature CSVs for a protocol file");
  extract->add_option("--protocol", ex.protocol, "Protocol file")->required();
  extract->add_option("--audio-root", ex.audio_root, "Directory holding <utterance>.<ext>")
      ->required();
  extract->add_option("--segment", ex.segment, "full, silence or voiced")
      ->check(CLI::IsMember(kSegmentChoices))
      ->capture_default_str();
  extract->add_option("--out", ex.out, "Feature CSV to write")->required();
  extract->add_option("--skip-log", ex.skip_log, "Skip log CSV (default <out>.skips.csv)");
  extract->add_option("--ext", ex.extension, "Audio file extension")->capture_default_str();
  extract->add_option("--window-len", ex.window_len, "Energy window in samples")
      ->capture_default_str();
  extract->add_option("--threshold-db", ex.threshold_db, "Voiced threshold in dB")
      ->capture_default_str();
  extract->add_option("--bases", ex.bases, "Digit bases")->delimiter(',')->capture_default_str();
  extract->add_option("--deltas", ex.deltas, "Quantization steps")
      ->delimiter(',')
      ->capture_default_str();
  extract->add_option("--alpha", ex.alpha, "Renyi/Tsallis order")->capture_default_str();
  extract->add_option("--min-digits", ex.min_digits, "Minimum non-zero values per pmf")
      ->capture_default_str();
  extract->add_flag("--balance", ex.balance, "Class-balance the protocol before extraction");
  extract->add_option("--seed", ex.seed, "Balancing seed")->capture_default_str();
  extract->add_option("--jobs", ex.jobs, "Worker threads, 0 for all cores")->capture_default_str();

  TrainArgs tr;
  auto* train = app.add_subcommand("train", "Grid-search a random forest on train/dev features");
  train->add_option("--train", tr.train, "Training feature CSV")->required();
  train->add_option("--dev", tr.dev, "Development feature CSV")->required();
  train->add_option("--model", tr.model, "Model file to write")->required();
  train->add_option("--grid-out", tr.grid_out, "Grid report CSV (default <model>.grid.csv)");
  AddGridOptions(train, tr.grid);

  EvaluateArgs ev;
  auto* evaluate = app.add_subcommand("evaluate", "One-vs-one evaluation report");
  evaluate->add_option("--model", ev.model, "Model file")->required();
  evaluate->add_option("--features", ev.features, "Feature CSV")->required();
  evaluate->add_option("--protocol", ev.protocol, "Restrict to and relabel from this protocol");
  evaluate->add_option("--out", ev.out, "Report CSV")->required();
  evaluate->add_option("--segment", ev.segment, "Segment label for the report")
      ->check(CLI::IsMember(kSegmentChoices))
      ->capture_default_str();
  evaluate->add_option("--config-name", ev.config, "Config label for the report")
      ->capture_default_str();

  AblateArgs ab;
  auto* ablate = app.add_subcommand("ablate", "Delta/base/segment ablation with per-config grids");
  ablate->add_option("--features-dir", ab.features_dir,
                     "Directory with <segment>.{train,dev,eval}.csv")
      ->required();
  ablate->add_option("--out", ab.out, "Dev report CSV")->required();
  ablate->add_option("--eval-out", ab.eval_out, "Eval report CSV (default <out>.eval.csv)");
  AddGridOptions(ablate, ab.grid);

  SimulateArgs si;
  auto* simulate = app.add_subcommand("simulate", "FIR-filtered noise divergence sweep");
  simulate->add_option("--n-coeffs", si.sweep.n_coeffs, "FIR lengths")
      ->delimiter(',')
      ->capture_default_str();
  simulate->add_option("--deltas", si.sweep.deltas, "Quantization steps")
      ->delimiter(',')
      ->capture_default_str();
  simulate->add_option("--frequencies", si.sweep.frequencies, "MFCC coefficient indices")
      ->delimiter(',')
      ->capture_default_str();
  simulate->add_option("--trials", si.sweep.n_trials, "Trials per cell")->capture_default_str();
  simulate->add_option("--signal-len", si.sweep.signal_len, "Samples per trial")
      ->capture_default_str();
  simulate->add_option("--seed", si.sweep.seed, "Sweep seed")->capture_default_str();
  simulate->add_option("--base", si.sweep.base, "Digit base")->capture_default_str();
  simulate->add_option("--jobs", si.sweep.jobs, "Worker threads, 0 for all cores")
      ->capture_default_str();
  simulate->add_option("--out", si.out, "Sweep CSV")->required();

  SegmentReportArgs sr;
  auto* segrep = app.add_subcommand("segment-report", "Per-window energy labels of one file");
  segrep->add_option("--input", sr.input, "WAV file")->required()->check(CLI::ExistingFile);
  segrep->add_option("--out", sr.out, "Window report CSV")->required();
  segrep->add_option("--window-len", sr.window_len, "Energy window in samples")
      ->capture_default_str();
  segrep->add_option("--threshold-db", sr.threshold_db, "Voiced threshold in dB")
      ->capture_default_str();
  segrep->add_option("--cepstra", sr.cepstra, "Also dump the MFCC matrix of --segment here");
  segrep->add_option("--segment", sr.segment, "Segment whose MFCCs --cepstra dumps")
      ->check(CLI::IsMember(kSegmentChoices))
      ->capture_default_str();

  std::vector<std::string> commands;
  for (const auto* sub : app.get_subcommands([](const CLI::App*) { return true; })) {
    commands.push_back(sub->get_name());
  }
  try {
    const ConfigArgs args(argc, argv, commands);
    app.parse(args.argc(), args.argv());
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*extract) return RunExtract(ex, *extract);
    if (*train) return RunTrain(tr, *train);
    if (*evaluate) return RunEvaluate(ev, *evaluate);
    if (*ablate) return RunAblate(ab, *ablate);
    if (*simulate) return RunSimulate(si, *simulate);
    if (*segrep) return RunSegmentReport(sr, *segrep);
  } catch (const Error& e) {
    std::cerr << "fdspeech: " << e.what() << '\n';
    return ExitCodeFor(e.code());
  } catch (const std::exception& e) {
    std::cerr << "fdspeech: internal error: " << e.what() << '\n';
    return kInternal;
  }
  return kUsage;
}
