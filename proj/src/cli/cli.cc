#include "obbkit/cli.h"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "internal/text.h"
#include "obbkit/angle_codec.h"
#include "obbkit/annotation_files.h"
#include "obbkit/annotation_io.h"
#include "obbkit/dataset_stats.h"
#include "obbkit/errors.h"
#include "obbkit/evaluation.h"

namespace obb {
namespace {

namespace fs = std::filesystem;

struct Common {
  std::string in_format = "rolabelimg";
  std::string angle_scheme = "model";
  bool strict = false;
  unsigned jobs = 1;
  std::optional<int> image_width;
  std::optional<int> image_height;
};

struct ConvertArgs {
  std::string input;
  std::string output;
  std::string out_format;
};

struct EvaluateArgs {
  std::string gt;
  std::string detections;
  std::vector<double> thresholds;
  std::string iou_mode = "rotated";
  std::string json_path;
};

struct StatsArgs {
  std::string input;
  std::string json_path;
  std::string csv_path;
  std::optional<std::uint64_t> seed;
  double split_fraction = 0.8;
};

struct NmsArgs {
  std::string detections;
  double nms_iou = kDefaultNmsIou;
  std::string output;
};

struct BinArgs {
  std::vector<std::string> angles;
};

const CLI::Validator kFormatCheck =
    CLI::IsMember({"rolabelimg", "voc", "yolo", "csv"}, CLI::ignore_case);
const CLI::Validator kSchemeCheck = CLI::IsMember({"model", "dataset"}, CLI::ignore_case);
const CLI::Validator kIouModeCheck =
    CLI::IsMember({"rotated", "horizontal"}, CLI::ignore_case);

const CLI::Validator kUnitInterval(
    [](std::string& s) -> std::string {
      const auto v = internal::parse_double(s);
      if (!v || !(*v > 0.0 && *v <= 1.0)) return "value must be in (0, 1]";
      return {};
    },
    "(0,1]");

void add_common(CLI::App* cmd, Common& c, bool with_format) {
  if (with_format) {
    cmd->add_option("--in-format", c.in_format, "Input annotation format")
        ->check(kFormatCheck)
        ->capture_default_str();
  }
  cmd->add_option("--angle-scheme", c.angle_scheme, "Angle bin scheme")
      ->check(kSchemeCheck)
      ->capture_default_str();
  cmd->add_flag("--strict", c.strict,
                "Abort on the first bad file and reject unknown classes");
  cmd->add_option("--jobs", c.jobs, "Files read in parallel")
      ->check(CLI::Range(1u, 256u))
      ->capture_default_str();
  cmd->add_option("--image-width", c.image_width,
                  "Image width for YOLO files not listed in image_sizes.csv")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--image-height", c.image_height,
                  "Image height for YOLO files not listed in image_sizes.csv")
      ->check(CLI::PositiveNumber);
}

AnnotationFormat format_of(const std::string& s) {
  return *parse_annotation_format(internal::trim(s));
}

AngleScheme scheme_of(const std::string& s) { return *parse_angle_scheme(s); }

LoadOptions load_options(const Common& c) {
  LoadOptions o;
  o.parse.strict = c.strict;
  o.default_width = c.image_width;
  o.default_height = c.image_height;
  o.jobs = c.jobs;
  return o;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write " + path.string());
  f << text;
  f.close();
  if (!f) throw IoError("cannot write " + path.string());
}

void print_warnings(const LoadedFile& f, std::ostream& err) {
  for (const auto& w : f.warnings) err << "warning: " << f.path.string() << ": " << w << '\n';
}

int cmd_convert(const Common& c, const ConvertArgs& a, std::ostream& out,
                std::ostream& err) {
  const auto in_format = format_of(c.in_format);
  const auto out_format = format_of(a.out_format);
  const auto files = load_annotation_files(a.input, in_format, load_options(c));
  if (files.empty()) {
    err << "warning: no " << to_string(in_format) << " files found in " << a.input << '\n';
    out << "converted 0 of 0 files\n";
    return kExitOk;
  }

  AnnotationSet set(in_format);
  std::size_t converted = 0;
  std::size_t failed = 0;
  for (const auto& f : files) {
    print_warnings(f, err);
    std::string error = f.error;
    if (error.empty()) {
      try {
        AnnotationSet staged(in_format);
        for (const auto& ann : f.annotations) {
          if (set.find(ann.image_name())) {
            throw InputError("duplicate image name '" + ann.image_name() + "'");
          }
          staged.add(ann);
        }
        for (const auto& ann : staged.annotations()) set.add(ann);
      } catch (const Error& e) {
        error = e.what();
      }
    }
    if (!error.empty()) {
      ++failed;
      err << "error: " << f.path.string() << ": " << error << '\n';
      if (c.strict) {
        err << "aborting (strict)\n";
        return kExitFailure;
      }
      continue;
    }
    ++converted;
  }

  const auto units = render(set, out_format, scheme_of(c.angle_scheme));
  write_units(units, a.output);
  out << "converted " << converted << " of " << files.size() << " files, wrote "
      << units.size() << " outputs to " << a.output << '\n';
  return failed == 0 ? kExitOk : kExitFailure;
}

int cmd_validate(const Common& c, const std::string& input, std::ostream& out,
                 std::ostream& err) {
  const auto in_format = format_of(c.in_format);
  const auto files = load_annotation_files(input, in_format, load_options(c));
  if (files.empty()) {
    err << "warning: no " << to_string(in_format) << " files found in " << input << '\n';
  }
  std::vector<RawAnnotation> records;
  std::vector<Violation> parse_failures;
  for (const auto& f : files) {
    if (f.records.empty() && !f.ok()) {
      parse_failures.push_back(
          {ViolationKind::kParseError, f.path.string(), std::nullopt, f.error});
      continue;
    }
    records.insert(records.end(), f.records.begin(), f.records.end());
  }
  ValidationReport report = validate(records);
  report.violations.insert(report.violations.begin(), parse_failures.begin(),
                           parse_failures.end());
  out << report.to_text();
  return report.ok() ? kExitOk : kExitFailure;
}

std::vector<Detection> read_detections(const std::string& path, std::istream& in) {
  if (path == "-") return read_detections_jsonl(in);
  return read_detections_jsonl_file(path);
}

int cmd_evaluate(const Common& c, const EvaluateArgs& a, std::istream& in,
                 std::ostream& out) {
  const auto gts = load_annotation_set(a.gt, format_of(c.in_format), load_options(c));
  const auto dets = read_detections(a.detections, in);
  std::vector<double> thresholds = a.thresholds;
  if (thresholds.empty()) {
    thresholds.assign(kDefaultEvalThresholds.begin(), kDefaultEvalThresholds.end());
  }
  EvalOptions options;
  options.mode = *parse_iou_mode(a.iou_mode);
  options.threads = c.jobs;
  const auto reports = evaluate(dets, gts, thresholds, options);
  const std::string table = format_report_table(reports);
  if (!a.json_path.empty()) write_text(a.json_path, reports_to_json(reports));
  out << table;
  return kExitOk;
}

nlohmann::ordered_json summary_json(const DatasetSummary& s) {
  return nlohmann::ordered_json::parse(summary_to_json(s));
}

int cmd_stats(const Common& c, const StatsArgs& a, std::ostream& out,
              std::ostream& err) {
  const auto format = format_of(c.in_format);
  const auto scheme = scheme_of(c.angle_scheme);
  if (list_annotation_files(a.input, format).empty()) {
    err << "warning: no " << to_string(format) << " files found in " << a.input << '\n';
  }
  const auto set = load_annotation_set(a.input, format, load_options(c));
  const auto summary = summarize(set, scheme);

  std::string json;
  if (a.seed) {
    const auto parts = split(set, a.split_fraction, *a.seed);
    nlohmann::ordered_json j;
    j["all"] = summary_json(summary);
    j["split"] = {{"seed", *a.seed}, {"train_fraction", a.split_fraction}};
    j["train"] = summary_json(summarize(parts.train, scheme));
    j["test"] = summary_json(summarize(parts.test, scheme));
    json = j.dump(2) + "\n";
  } else {
    json = summary_to_json(summary);
  }
  if (!a.csv_path.empty()) write_text(a.csv_path, summary_to_chart_csv(summary));
  if (a.json_path.empty()) {
    out << json;
  } else {
    write_text(a.json_path, json);
  }
  return kExitOk;
}

int cmd_nms(const NmsArgs& a, std::istream& in, std::ostream& out) {
  const auto dets = read_detections(a.detections, in);
  const auto kept = rotated_nms(dets, a.nms_iou);
  std::ostringstream buf;
  write_detections_jsonl(buf, kept);
  if (a.output.empty()) {
    out << buf.str();
  } else {
    write_text(a.output, buf.str());
  }
  return kExitOk;
}

int cmd_bin_angles(const Common& c, const BinArgs& a, std::istream& in,
                   std::ostream& out) {
  const auto scheme = scheme_of(c.angle_scheme);
  std::vector<std::string> tokens = a.angles;
  if (tokens.empty()) {
    std::string tok;
    while (in >> tok) tokens.push_back(tok);
  }
  std::string text = "theta_deg,angle_class,representative_deg\n";
  for (const auto& tok : tokens) {
    const auto theta = internal::parse_double(tok);
    if (!theta) throw ParseError("not a number: '" + tok + "'", 0);
    const AngleClass cls = bin_angle(*theta, scheme);
    text += tok + ',' + std::to_string(cls.index()) + ',' +
            internal::format_shortest(representative_angle(cls)) + '\n';
  }
  out << text;
  return kExitOk;
}

}  // namespace

int run_cli(std::span<const std::string> args, std::istream& in, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"Oriented-box annotation and evaluation toolkit", "obbkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "obbkit 1.0.0");

  Common common;

  ConvertArgs conv;
  auto* convert = app.add_subcommand("convert", "Convert annotations between formats");
  convert->add_option("--in", conv.input, "Input file or directory")->required();
  convert->add_option("--out", conv.output, "Output directory")->required();
  convert->add_option("--out-format", conv.out_format, "Output format")
      ->required()
      ->check(kFormatCheck);
  add_common(convert, common, true);

  std::string validate_input;
  auto* validate_cmd = app.add_subcommand("validate", "Check annotations for violations");
  validate_cmd->add_option("--in", validate_input, "Input file or directory")->required();
  add_common(validate_cmd, common, true);

  EvaluateArgs eval;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Compute per-class AP and mAP");
  evaluate_cmd->add_option("--gt", eval.gt, "Ground-truth file or directory")->required();
  evaluate_cmd->add_option("--detections", eval.detections,
                           "Detections as line-delimited JSON, '-' for stdin")
      ->required();
  evaluate_cmd->add_option("--iou", eval.thresholds,
                           "IoU threshold, repeatable (default 0.25 0.5 0.75)")
      ->check(kUnitInterval)
      ->allow_extra_args(false);
  evaluate_cmd->add_option("--iou-mode", eval.iou_mode, "IoU used for matching")
      ->check(kIouModeCheck)
      ->capture_default_str();
  evaluate_cmd->add_option("--json", eval.json_path, "Write the JSON report here");
  add_common(evaluate_cmd, common, true);

  StatsArgs stats;
  auto* stats_cmd = app.add_subcommand("stats", "Dataset summary and seeded split");
  stats_cmd->add_option("--in", stats.input, "Input file or directory")->required();
  stats_cmd->add_option("--json", stats.json_path, "Write the JSON summary here");
  stats_cmd->add_option("--csv", stats.csv_path, "Write chart CSV here");
  stats_cmd->add_option("--seed", stats.seed, "Also summarize a seeded train/test split");
  stats_cmd->add_option("--split-fraction", stats.split_fraction, "Train fraction")
      ->check(CLI::Validator(
          [](std::string& s) -> std::string {
            const auto v = internal::parse_double(s);
            if (!v || !(*v > 0.0 && *v < 1.0)) return "value must be in (0, 1)";
            return {};
          },
          "(0,1)"))
      ->capture_default_str();
  add_common(stats_cmd, common, true);

  NmsArgs nms;
  auto* nms_cmd = app.add_subcommand("nms", "Rotated non-maximum suppression");
  nms_cmd->add_option("--detections", nms.detections,
                      "Detections as line-delimited JSON, '-' for stdin")
      ->required();
  nms_cmd->add_option("--nms-iou", nms.nms_iou, "Suppression IoU threshold")
      ->check(kUnitInterval)
      ->capture_default_str();
  nms_cmd->add_option("--out", nms.output, "Write kept detections here");

  BinArgs bins;
  auto* bin_cmd = app.add_subcommand("bin-angles", "Map angles in degrees to angle classes");
  bin_cmd->add_option("angles", bins.angles, "Angles; read from stdin when omitted");
  bin_cmd->add_option("--angle-scheme", common.angle_scheme, "Angle bin scheme")
      ->check(kSchemeCheck)
      ->capture_default_str();

  std::vector<std::string> argv_store(args.begin(), args.end());
  if (argv_store.empty()) argv_store.emplace_back("obbkit");
  std::vector<char*> argv;
  for (auto& s : argv_store) argv.push_back(s.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }
  if (common.image_width.has_value() != common.image_height.has_value()) {
    err << "error: --image-width and --image-height must be given together\n";
    return kExitUsage;
  }

  try {
    if (*convert) return cmd_convert(common, conv, out, err);
    if (*validate_cmd) return cmd_validate(common, validate_input, out, err);
    if (*evaluate_cmd) return cmd_evaluate(common, eval, in, out);
    if (*stats_cmd) return cmd_stats(common, stats, out, err);
    if (*nms_cmd) return cmd_nms(nms, in, out);
    if (*bin_cmd) return cmd_bin_angles(common, bins, in, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace obb
