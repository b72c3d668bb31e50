// instaseg: split probability maps into instances, score them, and generate
// synthetic test maps.
//
// Exit codes: 0 ok, 1 I/O failure, 2 malformed or inconsistent data,
// 3 invalid command line.

#include <unistd.h>

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "instaseg/instaseg.hpp"

namespace fs = std::filesystem;
using instaseg::report::ordered_json;

namespace {

enum Exit : int { kOk = 0, kIo = 1, kData = 2, kUsage = 3 };

// Thrown for bad flag combinations detected after parsing.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

bool use_color() { return std::getenv("INSTASEG_NO_COLOR") == nullptr && ::isatty(STDERR_FILENO); }

void report_error(const std::string& message) {
  if (use_color()) std::cerr << "\033[31merror:\033[0m " << message << '\n';
  else std::cerr << "error: " << message << '\n';
}

void emit(const ordered_json& j) { std::cout << j.dump() << '\n'; }

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// Content lines of a small CSV file: blank lines and '#' comments dropped,
// fields trimmed.
std::vector<std::vector<std::string>> read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw instaseg::IoError("cannot open '" + path.string() + "' for reading");
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(trim(field));
    rows.push_back(std::move(fields));
  }
  return rows;
}

std::optional<double> parse_number(const std::string& s) {
  if (s.empty()) return std::nullopt;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size()) return std::nullopt;
  return v;
}

std::optional<std::uint64_t> parse_count(const std::string& s) {
  if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) return std::nullopt;
  return std::stoull(s);
}

// Drops a leading header row when its first field is not numeric.
void drop_header(std::vector<std::vector<std::string>>& rows) {
  if (!rows.empty() && !rows.front().empty() && !parse_number(rows.front().front())) {
    rows.erase(rows.begin());
  }
}

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

// ---------------------------------------------------------------------------

struct SplitOptions {
  std::vector<std::string> inputs;
  std::string output;
  std::string trace_dir;
  int se_size = instaseg::kDefaultSeSize;
  int erosions = instaseg::kDefaultErosionPasses;
  std::int64_t min_area = instaseg::kDefaultMinArea;
  int connectivity = 8;
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::optional<double> threshold;
  unsigned jobs = 1;
};

int run_split(const SplitOptions& opt) {
  instaseg::PipelineConfig cfg;
  cfg.se_size = opt.se_size;
  cfg.erosion_passes = opt.erosions;
  cfg.min_area = opt.min_area;
  cfg.connectivity = instaseg::connectivity_from_int(opt.connectivity);
  cfg.target_width = opt.width;
  cfg.target_height = opt.height;
  cfg.validate();
  if (opt.threshold && !opt.trace_dir.empty()) {
    throw UsageError("--trace-dir applies to the morphology pipeline, not --threshold");
  }

  const bool batch = opt.inputs.size() > 1;
  std::vector<instaseg::ProbMap> maps;
  maps.reserve(opt.inputs.size());
  for (const auto& in : opt.inputs) maps.push_back(instaseg::io::read_pmap(in));

  const bool keep_trace = !opt.trace_dir.empty();
  std::vector<instaseg::SplitResult> results(maps.size());
  instaseg::parallel_for(maps.size(), opt.jobs, [&](std::size_t i) {
    results[i] = opt.threshold ? instaseg::split_fixed(maps[i], cfg, *opt.threshold)
                               : instaseg::split_instances(maps[i], cfg, keep_trace);
  });

  if (batch) {
    std::error_code ec;
    fs::create_directories(opt.output, ec);
    if (ec) throw instaseg::IoError("cannot create output directory '" + opt.output + "'");
  }
  for (std::size_t i = 0; i < results.size(); ++i) {
    const std::string stem = fs::path(opt.inputs[i]).stem().string();
    const fs::path out = batch ? fs::path(opt.output) / (stem + ".pgm") : fs::path(opt.output);
    instaseg::io::write_label(results[i].labels, out);
    if (keep_trace) {
      instaseg::write_trace(*results[i].trace, batch ? fs::path(opt.trace_dir) / stem : fs::path(opt.trace_dir));
    }
    ordered_json j;
    if (batch) j["input"] = opt.inputs[i];
    j["count"] = instaseg::count_instances(results[i].labels);
    j["degenerate"] = results[i].degenerate;
    emit(j);
  }
  return kOk;
}

struct EvalOptions {
  std::string pred;
  std::string truth;
  std::string batch;
  std::string format = "json";
};

int run_eval(const EvalOptions& opt) {
  const bool csv = opt.format == "csv";
  if (!opt.batch.empty()) {
    if (!opt.pred.empty() || !opt.truth.empty()) {
      throw UsageError("give either PRED TRUTH or --batch, not both");
    }
    const fs::path base = fs::path(opt.batch).parent_path();
    auto rows = read_csv(opt.batch);
    if (!rows.empty() && rows.front().size() == 2 && rows.front()[0] == "pred") rows.erase(rows.begin());
    std::vector<instaseg::MetricsReport> folds;
    for (const auto& row : rows) {
      if (row.size() != 2) throw instaseg::DataError("batch rows need 2 fields: pred,truth");
      const auto c = instaseg::confusion(instaseg::io::read_mask(resolve(base, row[0])),
                                         instaseg::io::read_mask(resolve(base, row[1])));
      folds.push_back(instaseg::compute_metrics(c));
    }
    const auto summary = instaseg::aggregate_folds(folds);
    if (csv) {
      std::cout << "statistic," << instaseg::report::csv_header() << '\n';
      instaseg::MetricsReport mean, sd;
      std::array<instaseg::Metric*, 6> m = {&mean.sensitivity, &mean.specificity, &mean.ppv,
                                            &mean.npv, &mean.jaccard, &mean.dice};
      std::array<instaseg::Metric*, 6> s = {&sd.sensitivity, &sd.specificity, &sd.ppv,
                                            &sd.npv, &sd.jaccard, &sd.dice};
      for (std::size_t i = 0; i < 6; ++i) {
        *m[i] = summary.metrics[i].mean;
        *s[i] = summary.metrics[i].stddev;
      }
      std::cout << "mean," << instaseg::report::csv_row(mean) << '\n';
      std::cout << "std," << instaseg::report::csv_row(sd) << '\n';
    } else {
      emit(instaseg::report::to_json(summary));
    }
    return kOk;
  }
  if (opt.pred.empty() || opt.truth.empty()) throw UsageError("eval needs PRED and TRUTH");
  const auto c = instaseg::confusion(instaseg::io::read_mask(opt.pred), instaseg::io::read_mask(opt.truth));
  const auto r = instaseg::compute_metrics(c);
  if (csv) {
    std::cout << instaseg::report::csv_header() << '\n' << instaseg::report::csv_row(r) << '\n';
  } else {
    emit(instaseg::report::to_json(r));
  }
  return kOk;
}

struct CountErrorOptions {
  std::string manifest;
};

int run_count_error(const CountErrorOptions& opt) {
  const fs::path base = fs::path(opt.manifest).parent_path();
  auto rows = read_csv(opt.manifest);
  drop_header(rows);
  std::vector<instaseg::CountPair> series;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (row.size() != 2) throw instaseg::DataError("manifest row " + std::to_string(i + 1) + " needs truth_count,predicted_path");
    const auto truth = parse_count(row[0]);
    if (!truth) throw instaseg::DataError("manifest row " + std::to_string(i + 1) + ": bad truth count '" + row[0] + "'");
    if (*truth == 0) throw instaseg::DataError("manifest row " + std::to_string(i + 1) + ": truth count must be >= 1");
    const auto labels = instaseg::io::read_label(resolve(base, row[1]));
    series.push_back({*truth, instaseg::count_instances(labels)});
  }
  ordered_json j;
  j["mape_percent"] = instaseg::mape(series);
  j["n"] = series.size();
  emit(j);
  return kOk;
}

struct WilcoxonOptions {
  std::string csv;
  double alpha = instaseg::kSignificanceLevel;
};

int run_wilcoxon(const WilcoxonOptions& opt) {
  auto rows = read_csv(opt.csv);
  drop_header(rows);
  std::vector<double> a, b;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& row = rows[i];
    const auto x = row.size() == 2 ? parse_number(row[0]) : std::nullopt;
    const auto y = row.size() == 2 ? parse_number(row[1]) : std::nullopt;
    if (!x || !y) throw instaseg::DataError("row " + std::to_string(i + 1) + " needs two numeric columns");
    a.push_back(*x);
    b.push_back(*y);
  }
  emit(instaseg::report::to_json(instaseg::wilcoxon_signed_rank(a, b), opt.alpha));
  return kOk;
}

struct PhantomOptions {
  instaseg::PhantomSpec spec;
  std::string out;
};

int run_phantom(const PhantomOptions& opt) {
  const auto pair = instaseg::generate_phantom(opt.spec);
  const fs::path prefix(opt.out);
  if (prefix.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(prefix.parent_path(), ec);
  }
  const fs::path pmap = prefix.string() + ".pmap";
  const fs::path truth = prefix.string() + "_truth.pgm";
  const fs::path sidecar = prefix.string() + ".json";
  instaseg::io::write_pmap(pair.map, pmap);
  instaseg::io::write_label(pair.truth_labels, truth);
  ordered_json meta;
  meta["spec"] = instaseg::report::to_json(opt.spec);
  meta["truth_count"] = pair.truth_count;
  const std::string text = meta.dump(2) + "\n";
  instaseg::io::write_file(sidecar, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));

  ordered_json j;
  j["truth_count"] = pair.truth_count;
  j["pmap"] = pmap.string();
  j["truth"] = truth.string();
  j["sidecar"] = sidecar.string();
  emit(j);
  return kOk;
}

struct OverlayOptions {
  std::string background;
  std::string labels;
  std::string output;
};

int run_overlay(const OverlayOptions& opt) {
  const auto bg = instaseg::io::read_gray(opt.background);
  const auto labels = instaseg::io::read_label(opt.labels);
  instaseg::io::write_gray(instaseg::overlay_labels(bg, labels), opt.output);
  return kOk;
}

const CLI::Validator kOdd = CLI::Validator(
    [](std::string& s) -> std::string {
      int v = 0;
      const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      const bool ok = ec == std::errc() && end == s.data() + s.size() && v >= 1 && v % 2 == 1;
      return ok ? std::string() : "must be an odd integer >= 1";
    },
    "ODD");

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Instance splitting and evaluation for segmentation probability maps"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "instaseg 1.0.0");

  SplitOptions split;
  auto* split_cmd = app.add_subcommand("split", "Split PMAP probability maps into labeled instances");
  split_cmd->add_option("inputs", split.inputs, "PMAP files")->required();
  split_cmd->add_option("-o,--output", split.output, "Label PGM (one input) or directory (several)")->required();
  split_cmd->add_option("--trace-dir", split.trace_dir, "Write intermediate stage images here");
  split_cmd->add_option("--se-size", split.se_size, "Structuring element side")->check(kOdd)->capture_default_str();
  split_cmd->add_option("--erosions", split.erosions, "Erosion passes")->check(CLI::NonNegativeNumber)->capture_default_str();
  split_cmd->add_option("--min-area", split.min_area, "Smallest kept component, pixels")->check(CLI::NonNegativeNumber)->capture_default_str();
  split_cmd->add_option("--connectivity", split.connectivity, "4 or 8")->check(CLI::IsMember({4, 8}))->capture_default_str();
  split_cmd->add_option("--width", split.width, "Output width (default: input width)")->check(CLI::PositiveNumber);
  split_cmd->add_option("--height", split.height, "Output height (default: input height)")->check(CLI::PositiveNumber);
  split_cmd->add_option("--threshold", split.threshold, "Skip morphology; binarize at this probability")->check(CLI::Range(0.0, 1.0));
  split_cmd->add_option("--jobs", split.jobs, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();

  EvalOptions eval;
  auto* eval_cmd = app.add_subcommand("eval", "Pixel-wise metrics of a prediction against a truth mask");
  eval_cmd->add_option("pred", eval.pred, "Predicted mask or label PGM");
  eval_cmd->add_option("truth", eval.truth, "Truth mask or label PGM");
  eval_cmd->add_option("--batch", eval.batch, "CSV of pred,truth paths; prints mean and std");
  eval_cmd->add_option("--format", eval.format, "json or csv")->check(CLI::IsMember({"json", "csv"}))->capture_default_str();

  CountErrorOptions count;
  auto* count_cmd = app.add_subcommand("count-error", "MAPE of instance counts");
  count_cmd->add_option("manifest", count.manifest, "CSV of truth_count,predicted_label_path")->required();

  WilcoxonOptions wil;
  auto* wil_cmd = app.add_subcommand("wilcoxon", "Paired Wilcoxon signed-rank test of two CSV columns");
  wil_cmd->add_option("csv", wil.csv, "CSV with two numeric columns")->required();
  wil_cmd->add_option("--alpha", wil.alpha, "Significance level")->check(CLI::Range(0.0, 1.0))->capture_default_str();

  PhantomOptions ph;
  auto* ph_cmd = app.add_subcommand("phantom", "Write a synthetic probability map with known instances");
  ph_cmd->add_option("-o,--out", ph.out, "Output prefix: PREFIX.pmap, PREFIX_truth.pgm, PREFIX.json")->required();
  ph_cmd->add_option("--width", ph.spec.width)->check(CLI::PositiveNumber)->capture_default_str();
  ph_cmd->add_option("--height", ph.spec.height)->check(CLI::PositiveNumber)->capture_default_str();
  ph_cmd->add_option("--blobs", ph.spec.n_blobs)->capture_default_str();
  ph_cmd->add_option("--peak", ph.spec.blob_peak)->capture_default_str();
  ph_cmd->add_option("--sigma", ph.spec.blob_sigma)->capture_default_str();
  ph_cmd->add_option("--bridge", ph.spec.bridge_value)->capture_default_str();
  ph_cmd->add_option("--noise", ph.spec.noise_amplitude)->capture_default_str();
  ph_cmd->add_option("--seed", ph.spec.seed)->capture_default_str();

  OverlayOptions ov;
  auto* ov_cmd = app.add_subcommand("overlay", "Paint instance labels over a gray image");
  ov_cmd->add_option("background", ov.background, "8-bit gray PGM")->required();
  ov_cmd->add_option("labels", ov.labels, "16-bit label PGM")->required();
  ov_cmd->add_option("-o,--output", ov.output, "Output 8-bit PGM")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e, std::cerr, std::cerr);
    return kUsage;
  }

  try {
    if (*split_cmd) return run_split(split);
    if (*eval_cmd) return run_eval(eval);
    if (*count_cmd) return run_count_error(count);
    if (*wil_cmd) return run_wilcoxon(wil);
    if (*ph_cmd) return run_phantom(ph);
    if (*ov_cmd) return run_overlay(ov);
  } catch (const UsageError& e) {
    report_error(e.what());
    return kUsage;
  } catch (const instaseg::ConfigError& e) {
    report_error(e.what());
    return kUsage;
  } catch (const instaseg::IoError& e) {
    report_error(e.what());
    return kIo;
  } catch (const instaseg::FormatError& e) {
    report_error(e.what());
    return kData;
  } catch (const instaseg::DataError& e) {
    report_error(e.what());
    return kData;
  } catch (const std::exception& e) {
    report_error(e.what());
    return kData;
  }
  return kUsage;
}
