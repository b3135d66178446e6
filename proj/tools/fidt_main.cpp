#include <CLI11.hpp>

#include "fidt/boxes.hpp"
#include "fidt/distance_transform.hpp"
#include "fidt/evaluation.hpp"
#include "fidt/fidt_transform.hpp"
#include "fidt/io.hpp"
#include "fidt/lmds.hpp"
#include "fidt/loss.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace fs = std::filesystem;

namespace {

unsigned resolve_jobs(int flag_value) {
  if (flag_value > 0) return static_cast<unsigned>(flag_value);
  if (const char* env = std::getenv("FIDT_JOBS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

// Sorted files with the given extension; a plain file is a one-element batch.
std::vector<fs::path> collect_inputs(const fs::path& spec, const std::string& extension) {
  if (fs::is_directory(spec)) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(spec))
      if (entry.is_regular_file() && entry.path().extension() == extension)
        files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    if (files.empty())
      throw fidt::IoError("no *" + extension + " files in " + spec.string());
    return files;
  }
  if (!fs::exists(spec)) throw fidt::IoError("input not found: " + spec.string());
  return {spec};
}

fs::path output_path(const fs::path& input, const fs::path& out_spec, bool batch,
                     const std::string& new_extension) {
  fs::path out = out_spec;
  if (batch || fs::is_directory(out_spec)) {
    fs::create_directories(out);
    out /= input.stem();
    out += new_extension;
  } else if (out.has_parent_path()) {
    fs::create_directories(out.parent_path());
  }
  return out;
}

struct TaskResult {
  bool ok = false;
  std::string error;
  std::string summary;  // printed to stdout in input order when non-empty
};

template <typename Fn>
std::vector<TaskResult> run_batch(std::size_t n, unsigned jobs, Fn&& fn) {
  std::vector<TaskResult> results(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
      try {
        results[i].summary = fn(i);
        results[i].ok = true;
      } catch (const std::exception& e) {
        results[i].error = e.what();
      }
    }
  };
  const unsigned threads = std::min<unsigned>(jobs, n > 0 ? static_cast<unsigned>(n) : 1u);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return results;
}

// Prints summaries (stdout) and failures (stderr) in input order.
int finish_batch(const std::vector<fs::path>& inputs, const std::vector<TaskResult>& results,
                 const std::string& verb) {
  int failures = 0;
  for (std::size_t i = 0; i < results.size(); ++i) {
    if (results[i].ok && !results[i].summary.empty())
      std::cout << results[i].summary << '\n';
    if (!results[i].ok) ++failures;
  }
  for (std::size_t i = 0; i < results.size(); ++i)
    if (!results[i].ok)
      std::cerr << verb << ": " << inputs[i].string() << ": " << results[i].error << '\n';
  return failures == 0 ? 0 : 1;
}

std::map<std::string, fs::path> index_by_stem(const std::vector<fs::path>& files) {
  std::map<std::string, fs::path> index;
  for (const auto& f : files) {
    if (!index.emplace(f.stem().string(), f).second)
      throw fidt::IoError("duplicate stem \"" + f.stem().string() + "\"");
  }
  return index;
}

// Stem-paired (prediction, ground-truth) files; unmatched stems are errors.
std::vector<std::pair<fs::path, fs::path>> pair_by_stem(const fs::path& pred_spec,
                                                        const std::string& pred_ext,
                                                        const fs::path& gt_spec,
                                                        const std::string& gt_ext) {
  const auto preds = collect_inputs(pred_spec, pred_ext);
  const auto gts = collect_inputs(gt_spec, gt_ext);
  if (!fs::is_directory(pred_spec) && !fs::is_directory(gt_spec))
    return {{preds.front(), gts.front()}};

  const auto pred_index = index_by_stem(preds);
  const auto gt_index = index_by_stem(gts);
  std::string missing;
  for (const auto& [stem, path] : pred_index)
    if (!gt_index.count(stem)) missing += " " + stem + " (no ground truth)";
  for (const auto& [stem, path] : gt_index)
    if (!pred_index.count(stem)) missing += " " + stem + " (no prediction)";
  if (!missing.empty()) throw fidt::IoError("unmatched stems:" + missing);

  std::vector<std::pair<fs::path, fs::path>> pairs;
  pairs.reserve(pred_index.size());
  for (const auto& [stem, path] : pred_index) pairs.emplace_back(path, gt_index.at(stem));
  return pairs;
}

std::string fmt(double v) { return fidt::format_real(v); }

constexpr const char* kMapExtension = ".fmap";

// ---------------------------------------------------------------------------
// gen-gt

struct GenGtOptions {
  std::string ann, out;
  std::string mode = "fidt";
  fidt::FidtParams params;
  int jobs = 0;
};

int run_gen_gt(const GenGtOptions& opt) {
  const auto inputs = collect_inputs(opt.ann, ".json");
  const bool batch = fs::is_directory(opt.ann);
  fidt::validate(opt.params);

  // The kind header reflects the map family actually produced: a focal map
  // with (alpha, beta) = (0, 1) is the plain inverse map.
  fidt::MapKind kind = fidt::MapKind::distance;
  if (opt.mode == "idt" || (opt.mode == "fidt" && opt.params.alpha == 0.0 &&
                            opt.params.beta == 1.0))
    kind = fidt::MapKind::idt;
  else if (opt.mode == "fidt")
    kind = fidt::MapKind::fidt;

  const auto results = run_batch(inputs.size(), resolve_jobs(opt.jobs), [&](std::size_t i) {
    const auto doc = fidt::read_annotations(inputs[i]);
    const fidt::DenseMap distance = fidt::distance_transform(doc.points);
    fidt::DenseMap map;
    if (opt.mode == "dt")
      map = distance;
    else if (opt.mode == "idt")
      map = fidt::idt_map(distance, opt.params.c);
    else
      map = fidt::fidt_map(distance, opt.params);
    fidt::write_map(map, kind, output_path(inputs[i], opt.out, batch, kMapExtension));
    return std::string{};
  });
  return finish_batch(inputs, results, "gen-gt");
}

// ---------------------------------------------------------------------------
// detect

struct DetectOptions {
  std::string map, out;
  fidt::LmdsParams params;
  int jobs = 0;
};

int run_detect(const DetectOptions& opt) {
  const auto inputs = collect_inputs(opt.map, kMapExtension);
  const bool batch = fs::is_directory(opt.map);
  fidt::validate(opt.params);

  const auto results = run_batch(inputs.size(), resolve_jobs(opt.jobs), [&](std::size_t i) {
    const auto [map, kind] = fidt::read_map(inputs[i]);
    (void)kind;
    const fidt::DetectionResult det = fidt::detect(map, opt.params);
    fidt::PointMatrix pts(2, det.count);
    for (int p = 0; p < det.count; ++p) {
      pts(0, p) = det.coordinates[static_cast<std::size_t>(p)].x();
      pts(1, p) = det.coordinates[static_cast<std::size_t>(p)].y();
    }
    fidt::write_points_csv(pts, output_path(inputs[i], opt.out, batch, ".csv"));
    return inputs[i].stem().string() + "," + std::to_string(det.count) + "," +
           (det.is_negative ? "1" : "0");
  });
  return finish_batch(inputs, results, "detect");
}

// ---------------------------------------------------------------------------
// boxes

struct BoxesOptions {
  std::string points, out;
  int img_w = 0, img_h = 0;
  fidt::BoxParams params;
};

int run_boxes(const BoxesOptions& opt) {
  fidt::PointSet ps;
  ps.width = opt.img_w;
  ps.height = opt.img_h;
  ps.points = fidt::read_points_csv(fs::path(opt.points));
  const auto boxes = fidt::generate_boxes(ps, opt.params);
  if (opt.out.empty() || opt.out == "-") {
    fidt::write_boxes_csv(boxes, std::cout);
  } else {
    fidt::write_boxes_csv(boxes, fs::path(opt.out));
  }
  return 0;
}

// ---------------------------------------------------------------------------
// loss

struct LossOptions {
  std::string pred, gt, ann;
  bool grad_check = false;
};

int run_loss(const LossOptions& opt) {
  const auto [pred, pk] = fidt::read_map(fs::path(opt.pred));
  const auto [gt, gk] = fidt::read_map(fs::path(opt.gt));
  (void)pk;
  (void)gk;
  const auto doc = fidt::read_annotations(fs::path(opt.ann));
  const fidt::SsimParams params;

  const fidt::LossReport report =
      fidt::total_loss(pred, gt, doc.points, params, opt.grad_check);
  std::cout << "mse=" << fmt(report.mse) << " issim="
            << (report.issim ? fmt(*report.issim) : std::string("skipped(N=0)"))
            << " total=" << fmt(report.total) << '\n';

  if (!opt.grad_check) return 0;

  // Deterministic stride sample keeps the quadratic cost bounded.
  const fidt::DenseMap fd = fidt::finite_difference_gradient(
      pred, gt, doc.points, params, 1e-4, 4096);
  double max_rel = 0.0;
  for (Eigen::Index i = 0; i < fd.size(); ++i) {
    const double f = fd.data()[i];
    if (std::isnan(f)) continue;  // pixel not sampled
    const double a = report.gradient->data()[i];
    const double denom = std::max(std::abs(a), std::abs(f));
    if (denom <= 1e-8) continue;
    max_rel = std::max(max_rel, std::abs(a - f) / denom);
  }
  std::cout << "grad_check_max_rel_error=" << fmt(max_rel) << '\n';
  return max_rel > 1e-3 ? 2 : 0;
}

// ---------------------------------------------------------------------------
// eval-loc

struct EvalLocOptions {
  std::string pred, gt;
  double sigma = 0.0;
  std::string sigma_mode;  // box-small | box-large
  std::string sweep;       // "A:B"
  std::string matching = "optimal";
  int jobs = 0;
};

std::pair<int, int> parse_sweep(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos)
    throw fidt::InvalidArgument("--sweep expects A:B, got \"" + text + "\"");
  try {
    return {std::stoi(text.substr(0, colon)), std::stoi(text.substr(colon + 1))};
  } catch (const std::exception&) {
    throw fidt::InvalidArgument("--sweep expects integers A:B, got \"" + text + "\"");
  }
}

int run_eval_loc(const EvalLocOptions& opt) {
  const int modes = (opt.sigma > 0.0 ? 1 : 0) + (!opt.sigma_mode.empty() ? 1 : 0) +
                    (!opt.sweep.empty() ? 1 : 0);
  if (modes != 1)
    throw fidt::InvalidArgument(
        "eval-loc: exactly one of --sigma, --sigma-mode, --sweep is required");
  const fidt::MatchAlgorithm algo = opt.matching == "greedy"
                                        ? fidt::MatchAlgorithm::greedy
                                        : fidt::MatchAlgorithm::optimal;

  const auto pairs = pair_by_stem(opt.pred, ".csv", opt.gt, ".json");

  struct ImageSets {
    std::string stem;
    fidt::PointSet pred, truth;
  };
  std::vector<ImageSets> images(pairs.size());
  const auto loaded = run_batch(pairs.size(), resolve_jobs(opt.jobs), [&](std::size_t i) {
    const auto doc = fidt::read_annotations(pairs[i].second);
    fidt::PointSet pred;
    pred.width = doc.points.width;
    pred.height = doc.points.height;
    pred.points = fidt::read_points_csv(pairs[i].first);
    images[i] = {pairs[i].first.stem().string(), std::move(pred), doc.points};
    return std::string{};
  });
  std::vector<fs::path> pred_paths;
  pred_paths.reserve(pairs.size());
  for (const auto& p : pairs) pred_paths.push_back(p.first);
  if (finish_batch(pred_paths, loaded, "eval-loc") != 0) return 1;

  if (!opt.sweep.empty()) {
    const auto range = parse_sweep(opt.sweep);
    if (range.first < 1 || range.first > range.second)
      throw fidt::InvalidArgument("eval-loc: invalid sweep range");
    double psum = 0.0, rsum = 0.0;
    for (int s = range.first; s <= range.second; ++s) {
      long tp = 0, fp = 0, fn = 0;
      for (const auto& img : images) {
        const auto r = fidt::match_points(img.pred, img.truth,
                                          fidt::SigmaPolicy::Fixed(double(s)), algo);
        tp += r.true_positives;
        fp += r.false_positives;
        fn += r.false_negatives;
      }
      double p, r, f;
      fidt::derive_rates(static_cast<int>(tp), static_cast<int>(fp), static_cast<int>(fn),
                         p, r, f);
      psum += p;
      rsum += r;
    }
    const double steps = double(range.second - range.first + 1);
    const double ap = psum / steps, ar = rsum / steps;
    const double f1 = (ap + ar > 0.0) ? 2.0 * ap * ar / (ap + ar) : 0.0;
    std::cout << "av_precision=" << fmt(ap) << '\n';
    std::cout << "av_recall=" << fmt(ar) << '\n';
    std::cout << "f1=" << fmt(f1) << '\n';
    return 0;
  }

  fidt::SigmaPolicy policy = fidt::SigmaPolicy::Fixed(opt.sigma);
  if (opt.sigma_mode == "box-small") policy = fidt::SigmaPolicy::BoxSmall();
  else if (opt.sigma_mode == "box-large") policy = fidt::SigmaPolicy::BoxLarge();
  else if (!opt.sigma_mode.empty())
    throw fidt::InvalidArgument("eval-loc: unknown --sigma-mode \"" + opt.sigma_mode + "\"");

  long tp = 0, fp = 0, fn = 0;
  for (const auto& img : images) {
    const auto r = fidt::match_points(img.pred, img.truth, policy, algo);
    std::cout << img.stem << ',' << r.true_positives << ',' << r.false_positives << ','
              << r.false_negatives << '\n';
    tp += r.true_positives;
    fp += r.false_positives;
    fn += r.false_negatives;
  }
  double p, r, f;
  fidt::derive_rates(static_cast<int>(tp), static_cast<int>(fp), static_cast<int>(fn), p, r,
                     f);
  std::cout << "tp=" << tp << '\n' << "fp=" << fp << '\n' << "fn=" << fn << '\n';
  std::cout << "precision=" << fmt(p) << '\n';
  std::cout << "recall=" << fmt(r) << '\n';
  std::cout << "f1=" << fmt(f) << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// eval-count

struct EvalCountOptions {
  std::string pred, gt;
  bool scene_report = false;
};

// "image_id,count[,is_negative]" lines, as emitted by detect.
std::map<std::string, double> read_count_summary(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw fidt::IoError("cannot open " + path.string() + " for reading");
  std::map<std::string, double> counts;
  std::string line;
  long long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string id, count_text;
    if (!std::getline(ss, id, ',') || !std::getline(ss, count_text, ','))
      throw fidt::FormatError(path.string(), line_no, "expected image_id,count");
    try {
      std::size_t used = 0;
      const double c = std::stod(count_text, &used);
      if (used != count_text.size()) throw std::invalid_argument(count_text);
      if (!counts.emplace(id, c).second)
        throw fidt::FormatError(path.string(), line_no, "duplicate image_id \"" + id + "\"");
    } catch (const std::invalid_argument&) {
      throw fidt::FormatError(path.string(), line_no,
                              "malformed count \"" + count_text + "\"");
    }
  }
  if (counts.empty()) throw fidt::FormatError(path.string(), 0, "no count records");
  return counts;
}

int run_eval_count(const EvalCountOptions& opt) {
  const auto counts = read_count_summary(fs::path(opt.pred));
  const auto gts = collect_inputs(opt.gt, ".json");
  const auto gt_index = index_by_stem(gts);

  std::string missing;
  for (const auto& [stem, unused] : counts)
    if (!gt_index.count(stem)) missing += " " + stem + " (no ground truth)";
  for (const auto& [stem, unused] : gt_index)
    if (!counts.count(stem)) missing += " " + stem + " (no prediction)";
  if (!missing.empty()) throw fidt::IoError("unmatched stems:" + missing);

  std::vector<double> pred_counts, truth_counts;
  std::vector<std::pair<double, double>> per_image;
  for (const auto& [stem, path] : gt_index) {
    const auto doc = fidt::read_annotations(path);
    const double truth = double(doc.points.size());
    const double pred = counts.at(stem);
    pred_counts.push_back(pred);
    truth_counts.push_back(truth);
    per_image.emplace_back(pred, truth);
  }

  const fidt::CountingErrors err = fidt::counting_errors(pred_counts, truth_counts);
  std::cout << "mae=" << fmt(err.mae) << '\n';
  std::cout << "mse=" << fmt(err.mse) << '\n';

  if (opt.scene_report) {
    const fidt::SceneReport scene = fidt::scene_level_report(per_image);
    for (int b = 0; b < 5; ++b) {
      std::cout << 'S' << b << ',';
      if (scene.images[static_cast<std::size_t>(b)] > 0)
        std::cout << fmt(scene.mae[static_cast<std::size_t>(b)]);
      else
        std::cout << '-';
      std::cout << ',' << scene.images[static_cast<std::size_t>(b)] << '\n';
    }
    std::cout << "avg," << fmt(scene.average) << '\n';
  }
  return 0;
}

// ---------------------------------------------------------------------------
// profile

struct ProfileOptions {
  fidt::FidtParams params;
  double max_d = 100.0;
  double step = 1.0;
  std::string out;
};

int run_profile(const ProfileOptions& opt) {
  const auto rows = fidt::fidt_profile(opt.params, opt.max_d, opt.step);
  std::ostream* out = &std::cout;
  std::ofstream file;
  if (!opt.out.empty() && opt.out != "-") {
    file.open(opt.out);
    if (!file) throw fidt::IoError("cannot open " + opt.out + " for writing");
    out = &file;
  }
  *out << "distance,idt,fidt\n";
  for (const auto& r : rows)
    *out << fmt(r.distance) << ',' << fmt(r.idt) << ',' << fmt(r.fidt) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Focal inverse distance transform toolkit for crowd localization"};
  app.require_subcommand(1);

  GenGtOptions gen;
  auto* gen_cmd = app.add_subcommand(
      "gen-gt", "Generate ground-truth maps from point annotations");
  gen_cmd->add_option("--ann", gen.ann, "Annotation JSON file or directory")->required();
  gen_cmd->add_option("--out", gen.out, "Output map file or directory")->required();
  gen_cmd->add_option("--mode", gen.mode, "Map family: dt, idt or fidt")
      ->check(CLI::IsMember({"dt", "idt", "fidt"}));
  gen_cmd->add_option("--alpha", gen.params.alpha, "Focal exponent slope");
  gen_cmd->add_option("--beta", gen.params.beta, "Focal exponent offset");
  gen_cmd->add_option("--c", gen.params.c, "Denominator constant");
  gen_cmd->add_option("--jobs", gen.jobs, "Worker threads (0 = FIDT_JOBS or cores)");

  DetectOptions det;
  auto* det_cmd = app.add_subcommand("detect", "Extract coordinates and counts from maps");
  det_cmd->add_option("--map", det.map, "Map file or directory")->required();
  det_cmd->add_option("--out", det.out, "Output CSV file or directory")->required();
  det_cmd->add_option("--threshold-ratio", det.params.threshold_ratio,
                      "Adaptive threshold ratio");
  det_cmd->add_option("--negative-cutoff", det.params.negative_cutoff,
                      "Negative-sample cutoff");
  det_cmd->add_option("--pool-size", det.params.pool_size, "Maximum filter window");
  det_cmd->add_flag("--dedup-plateaus", det.params.dedup_plateaus,
                    "Keep one pixel per equal-valued plateau");
  det_cmd->add_option("--jobs", det.jobs, "Worker threads (0 = FIDT_JOBS or cores)");

  BoxesOptions box;
  auto* box_cmd = app.add_subcommand("boxes", "Pseudo boxes from detected coordinates");
  box_cmd->add_option("--points", box.points, "Coordinate CSV")->required();
  box_cmd->add_option("--img-w", box.img_w, "Image width in pixels")->required();
  box_cmd->add_option("--img-h", box.img_h, "Image height in pixels")->required();
  box_cmd->add_option("--k", box.params.k, "Neighbor count");
  box_cmd->add_option("--f", box.params.f, "Size scale factor");
  box_cmd->add_option("--out", box.out, "Output CSV (default stdout)");

  LossOptions loss;
  auto* loss_cmd = app.add_subcommand("loss", "Training objective for a map pair");
  loss_cmd->add_option("--pred", loss.pred, "Predicted map")->required();
  loss_cmd->add_option("--gt", loss.gt, "Ground-truth map")->required();
  loss_cmd->add_option("--ann", loss.ann, "Annotation JSON")->required();
  loss_cmd->add_flag("--grad-check", loss.grad_check,
                     "Compare the analytic gradient against finite differences");

  EvalLocOptions loc;
  auto* loc_cmd = app.add_subcommand("eval-loc", "Localization metrics");
  loc_cmd->add_option("--pred", loc.pred, "Prediction CSV file or directory")->required();
  loc_cmd->add_option("--gt", loc.gt, "Annotation JSON file or directory")->required();
  loc_cmd->add_option("--sigma", loc.sigma, "Fixed match threshold in pixels");
  loc_cmd->add_option("--sigma-mode", loc.sigma_mode, "box-small or box-large");
  loc_cmd->add_option("--sweep", loc.sweep, "Threshold sweep A:B");
  loc_cmd->add_option("--matching", loc.matching, "optimal or greedy")
      ->check(CLI::IsMember({"optimal", "greedy"}));
  loc_cmd->add_option("--jobs", loc.jobs, "Worker threads (0 = FIDT_JOBS or cores)");

  EvalCountOptions cnt;
  auto* cnt_cmd = app.add_subcommand("eval-count", "Counting metrics");
  cnt_cmd->add_option("--pred", cnt.pred, "Count summary CSV (image_id,count,...)")
      ->required();
  cnt_cmd->add_option("--gt", cnt.gt, "Annotation JSON file or directory")->required();
  cnt_cmd->add_flag("--scene-report", cnt.scene_report, "Append the S0-S4 bucket table");

  ProfileOptions prof;
  auto* prof_cmd = app.add_subcommand("profile", "Tabulate the 1-D transform curves");
  prof_cmd->add_option("--alpha", prof.params.alpha, "Focal exponent slope");
  prof_cmd->add_option("--beta", prof.params.beta, "Focal exponent offset");
  prof_cmd->add_option("--c", prof.params.c, "Denominator constant");
  prof_cmd->add_option("--max-d", prof.max_d, "Largest tabulated distance");
  prof_cmd->add_option("--step", prof.step, "Sample spacing");
  prof_cmd->add_option("--out", prof.out, "Output CSV (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen_cmd->parsed()) return run_gen_gt(gen);
    if (det_cmd->parsed()) return run_detect(det);
    if (box_cmd->parsed()) return run_boxes(box);
    if (loss_cmd->parsed()) return run_loss(loss);
    if (loc_cmd->parsed()) return run_eval_loc(loc);
    if (cnt_cmd->parsed()) return run_eval_count(cnt);
    if (prof_cmd->parsed()) return run_profile(prof);
  } catch (const std::exception& e) {
    std::cerr << "fidt: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
