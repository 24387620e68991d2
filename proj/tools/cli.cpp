#include "cli.hpp"

#include <sys/utsname.h>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <CLI11.hpp>

#include "edgepose/edge_detect.hpp"
#include "edgepose/line_extract.hpp"
#include "edgepose/pipeline.hpp"
#include "edgepose/pointcloud_io.hpp"
#include "edgepose/report_io.hpp"
#include "edgepose/scene_gen.hpp"
#include "edgepose/spatial_index.hpp"
#include "edgepose/waypoints.hpp"

namespace edgepose::cli {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string input;
  std::string output = ".";
  std::vector<double> dims;
  double rs = 0.02;
  double th = 0.35;
  double ransac_thresh = 0.01;
  std::uint64_t seed = 0;
  double noise = 0.0;
  std::size_t count = 1;
  bool sweep = false;
  std::vector<double> crop;
  // plan-pick
  std::vector<double> goal;
  std::vector<double> initial{0.0, 0.0, 0.3};
  std::vector<double> final_point{0.3, 0.0, 0.3};
  double approach = 0.1;
  double lift = 0.2;
};

const std::array<double, 5> kSweepRadii{0.010, 0.015, 0.020, 0.025, 0.030};
constexpr int kSweepRepeats = 3;
constexpr int kHistogramBins = 20;

std::string machine_info() {
  utsname u{};
  std::string sys = "unknown";
  if (uname(&u) == 0) sys = std::string(u.sysname) + " " + u.release + " " + u.machine;
  return sys + ", " + std::to_string(std::thread::hardware_concurrency()) + " hardware threads";
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

fs::path output_dir(const Options& o) {
  const fs::path dir(o.output);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
  return dir;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  f << text;
  if (!f) throw IoError("write failed for " + path.string());
}

template <class Fn>
void write_stream(const fs::path& path, Fn&& fn) {
  std::ostringstream ss;
  fn(ss);
  write_text(path, ss.str());
}

Point3 to_point(const std::vector<double>& v, const char* what) {
  if (v.size() != 3) throw UsageError(std::string(what) + " needs three comma-separated values");
  return Point3(v[0], v[1], v[2]);
}

CuboidDims require_dims(const Options& o) {
  if (o.dims.empty()) throw UsageError("--dims L,B,H is required");
  const Point3 d = to_point(o.dims, "--dims");
  CuboidDims dims{d.x(), d.y(), d.z()};
  dims.validate();
  return dims;
}

PointCloud load_input(const Options& o) {
  if (o.input.empty()) throw UsageError("--input is required");
  if (!fs::exists(o.input)) throw IoError("input not found: " + o.input);
  PointCloud cloud = read_cloud_file(o.input).cloud;
  if (!o.crop.empty()) {
    if (o.crop.size() != 6) throw UsageError("--crop needs six values: min x,y,z then max x,y,z");
    const CropBox box{Point3(o.crop[0], o.crop[1], o.crop[2]),
                      Point3(o.crop[3], o.crop[4], o.crop[5])};
    cloud = crop(cloud, box);
  }
  return cloud;
}

EdgeParams edge_params(const Options& o) {
  EdgeParams p;
  p.radius = o.rs;
  p.threshold = o.th;
  p.validate();
  return p;
}

ExtractParams extract_params(const Options& o) {
  ExtractParams p;
  p.distance_threshold = o.ransac_thresh;
  p.radius = o.rs;
  p.validate();
  return p;
}

int cmd_gen_scene(const Options& o, std::ostream& out) {
  const CuboidDims dims = require_dims(o);
  if (o.count < 1) throw UsageError("--count must be at least 1");
  const Scene scene = gen_clutter_scene(scene_spec_for(dims, o.count, o.noise, o.seed));
  const fs::path dir = output_dir(o);
  write_stream(dir / "cloud.ply", [&](std::ostream& s) { write_ply(s, scene.cloud); });
  write_text(dir / "truth.json", truth_to_json(scene.truth).dump(2) + "\n");
  out << "wrote " << scene.cloud.size() << " points, " << scene.truth.poses.size()
      << " cuboids to " << dir.string() << "\n";
  return kOk;
}

int cmd_detect_edges(const Options& o, std::ostream& out) {
  const PointCloud cloud = load_input(o);
  const EdgeParams params = edge_params(o);
  const EdgeExtraction ex = extract_edge_points(cloud, params);
  const fs::path dir = output_dir(o);

  std::vector<PointLabel> labels(cloud.size(), PointLabel::kNonEdge);
  for (std::size_t i : ex.source_index) labels[i] = PointLabel::kEdge;
  write_stream(dir / "edges.ply", [&](std::ostream& s) { write_annotated(s, cloud, labels); });

  write_stream(dir / "scores.csv", [&](std::ostream& s) {
    s << "index,x,y,z,score,neighbors,edge\n";
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      s << i << ',' << format_coord(cloud[i].x()) << ',' << format_coord(cloud[i].y()) << ','
        << format_coord(cloud[i].z()) << ',' << format_coord(ex.scored.scores[i]) << ','
        << ex.scored.neighbor_counts[i] << ',' << (ex.scored.is_edge[i] ? 1 : 0) << '\n';
    }
  });

  write_stream(dir / "score_histogram.csv", [&](std::ostream& s) {
    std::array<std::size_t, kHistogramBins> bins{};
    for (double v : ex.scored.scores) {
      const int b = std::clamp(static_cast<int>(v * kHistogramBins), 0, kHistogramBins - 1);
      ++bins[b];
    }
    s << "bin_low,bin_high,count\n";
    for (int b = 0; b < kHistogramBins; ++b) {
      s << format_coord(double(b) / kHistogramBins) << ','
        << format_coord(double(b + 1) / kHistogramBins) << ',' << bins[b] << '\n';
    }
  });

  if (o.sweep) {
    write_stream(dir / "sweep_timing.csv", [&](std::ostream& s) {
      s << "# machine: " << machine_info() << "; best of " << kSweepRepeats << " runs\n";
      s << "rs,seconds,edge_points\n";
      for (double r : kSweepRadii) {
        EdgeParams p = params;
        p.radius = r;
        double best = std::numeric_limits<double>::infinity();
        std::size_t n = 0;
        for (int rep = 0; rep < kSweepRepeats; ++rep) {
          const auto start = Clock::now();
          n = extract_edge_points(cloud, p).edges.size();
          best = std::min(best, seconds_since(start));
        }
        s << format_coord(r) << ',' << best << ',' << n << '\n';
      }
    });
  }
  out << ex.edges.size() << " of " << cloud.size() << " points are edges\n";
  return kOk;
}

int cmd_extract_lines(const Options& o, std::ostream& out) {
  const PointCloud cloud = load_input(o);
  const EdgeExtraction ex = extract_edge_points(cloud, edge_params(o));
  const auto segments = extract_all_segments(ex.edges, extract_params(o), o.seed);
  const fs::path dir = output_dir(o);

  std::vector<PointLabel> labels(cloud.size(), PointLabel::kNonEdge);
  for (std::size_t i : ex.source_index) labels[i] = PointLabel::kEdge;
  for (const auto& s : segments) {
    for (std::size_t m : s.members) labels[ex.source_index[m]] = PointLabel::kSegmentInlier;
  }
  write_stream(dir / "lines.ply", [&](std::ostream& s) { write_annotated(s, cloud, labels); });
  const json report{{"edge_points", ex.edges.size()}, {"segments", segments_to_json(segments)}};
  write_text(dir / "segments.json", report.dump(2) + "\n");
  out << segments.size() << " segments from " << ex.edges.size() << " edge points\n";
  return kOk;
}

// Points along the twelve edges of each posed cuboid, `step` apart.
void append_wireframe(const Pose& pose, const CuboidDims& dims, double step, PointCloud& cloud,
                      std::vector<PointLabel>& labels) {
  const auto corners = dims.corners();
  for (int a = 0; a < 8; ++a) {
    for (int bit = 1; bit < 8; bit <<= 1) {
      if (a & bit) continue;
      const Point3 p = pose.apply(corners[a]);
      const Point3 q = pose.apply(corners[a | bit]);
      const int n = std::max(1, static_cast<int>(std::ceil((q - p).norm() / step)));
      for (int i = 0; i <= n; ++i) {
        cloud.push_back(p + (q - p) * (double(i) / n));
        labels.push_back(PointLabel::kWireframe);
      }
    }
  }
}

int cmd_estimate_pose(const Options& o, std::ostream& out) {
  const CuboidDims dims = require_dims(o);
  const PointCloud cloud = load_input(o);
  PipelineParams params;
  params.edge = edge_params(o);
  params.extract = extract_params(o);
  const PipelineResult result = estimate_poses(cloud, dims, params, o.seed);
  const fs::path dir = output_dir(o);

  write_text(dir / "poses.json", estimates_to_json(result, dims).dump(2) + "\n");

  PointCloud model = cloud;
  std::vector<PointLabel> labels(cloud.size(), PointLabel::kNonEdge);
  for (std::size_t i : result.edge_source) labels[i] = PointLabel::kEdge;
  for (const auto& s : result.segments) {
    for (std::size_t m : s.members) labels[result.edge_source[m]] = PointLabel::kSegmentInlier;
  }
  for (const auto& est : result.poses) {
    for (const auto& c : result.groups[est.quality.group].corners) {
      model.push_back(c);
      labels.push_back(PointLabel::kCorner);
    }
    append_wireframe(est.pose, dims, 0.002, model, labels);
  }
  write_stream(dir / "model.ply", [&](std::ostream& s) { write_annotated(s, model, labels); });

  write_stream(dir / "timing.csv", [&](std::ostream& s) {
    s << "# machine: " << machine_info() << "; " << cloud.size() << " input points\n";
    s << "stage,seconds\n";
    s << "edge_points," << result.timings.edge_points << '\n';
    s << "all_edges," << result.timings.all_edges << '\n';
    s << "model_fitting," << result.timings.model_fitting << '\n';
    s << "total," << result.timings.total() << '\n';
  });

  out << result.poses.size() << " poses from " << result.segments.size() << " segments in "
      << result.groups.size() << " groups\n";
  for (const auto& d : result.diagnostics) out << "  " << d << "\n";
  return result.poses.empty() ? kEmpty : kOk;
}

struct MatchedRates {
  double threshold;
  double recall;
  double interior_fp;
};

MatchedRates rates_at(const std::vector<double>& scores, const std::vector<bool>& boundary,
                      double threshold) {
  std::size_t nb = 0, hit = 0, ni = 0, fp = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool on = scores[i] >= threshold;
    if (boundary[i]) {
      ++nb;
      hit += on;
    } else {
      ++ni;
      fp += on;
    }
  }
  return {threshold, nb ? double(hit) / nb : 0.0, ni ? double(fp) / ni : 0.0};
}

// Highest threshold whose boundary recall reaches `recall`, never below the
// floor, so exact-zero baseline scores do not count as detections.
double matched_threshold(const std::vector<double>& scores, const std::vector<bool>& boundary,
                         double recall, double floor) {
  std::vector<double> b;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (boundary[i]) b.push_back(scores[i]);
  }
  if (b.empty()) return floor;
  std::sort(b.begin(), b.end(), std::greater<>());
  const auto need = static_cast<std::size_t>(std::ceil(recall * b.size() - 1e-9));
  if (need == 0) return std::numeric_limits<double>::infinity();
  return std::max(b[std::min(need, b.size()) - 1], floor);
}

int cmd_compare_baseline(const Options& o, std::ostream& out) {
  const EdgeParams params = edge_params(o);
  const double side = std::sqrt(0.2);
  const std::array<double, 3> sigmas{0.0, 0.001, 0.002};
  const std::array<std::size_t, 4> ks{4, 5, 10, 30};
  const fs::path dir = output_dir(o);

  std::ostringstream s;
  s << "noise_m,k,proposed_threshold,proposed_recall,proposed_interior_fp,"
       "baseline_threshold,baseline_recall,baseline_interior_fp\n";
  for (std::size_t si = 0; si < sigmas.size(); ++si) {
    const PlanarPatch patch = sample_planar_patch(side, side, 0.002, sigmas[si], o.seed + si);
    const SpatialIndex index(patch.cloud);
    const ScoredCloud scored = score_cloud(index, params);
    const MatchedRates ours = rates_at(scored.scores, patch.boundary, params.threshold);
    for (std::size_t k : ks) {
      const auto base = covariance_edge_baseline(index, k);
      const double t = matched_threshold(base, patch.boundary, ours.recall, kResultantEpsilon);
      const MatchedRates theirs = rates_at(base, patch.boundary, t);
      s << format_coord(sigmas[si]) << ',' << k << ',' << format_coord(ours.threshold) << ','
        << format_coord(ours.recall) << ',' << format_coord(ours.interior_fp) << ','
        << format_coord(theirs.threshold) << ',' << format_coord(theirs.recall) << ','
        << format_coord(theirs.interior_fp) << '\n';
    }
  }
  write_text(dir / "comparison.csv", s.str());
  out << "wrote " << (dir / "comparison.csv").string() << "\n";
  return kOk;
}

int cmd_plan_pick(const Options& o, std::ostream& out) {
  Point3 goal;
  if (!o.goal.empty()) {
    goal = to_point(o.goal, "--goal");
  } else if (!o.input.empty()) {
    std::ifstream f(o.input);
    if (!f) throw IoError("cannot open " + o.input);
    json j;
    try {
      f >> j;
    } catch (const json::exception& e) {
      throw ParseError(0, std::string("poses file: ") + e.what());
    }
    const json& poses = j.at("poses");
    if (poses.empty()) return kEmpty;
    goal = pose_from_json(poses.at(0)).translation;
  } else {
    throw UsageError("plan-pick needs --goal x,y,z or --input poses.json");
  }
  const Waypoints w = plan_pick_waypoints(goal, o.approach, o.lift,
                                          to_point(o.initial, "--initial"),
                                          to_point(o.final_point, "--final"));
  const fs::path dir = output_dir(o);
  write_text(dir / "waypoints.json", waypoints_to_json(w).dump(2) + "\n");
  out << "wrote " << (dir / "waypoints.json").string() << "\n";
  return kOk;
}

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--output", o.output, "Output directory")->capture_default_str();
  sub->add_option("--seed", o.seed, "Random seed")->capture_default_str();
}

void add_input(CLI::App* sub, Options& o) {
  sub->add_option("--input", o.input, "Input cloud (.pcd or .ply)");
  sub->add_option("--crop", o.crop, "Crop box min x,y,z,max x,y,z")->delimiter(',');
}

void add_edge(CLI::App* sub, Options& o) {
  sub->add_option("--rs", o.rs, "Neighborhood radius r_s in meters")->capture_default_str();
  sub->add_option("--th", o.th, "Edge score threshold t_h")->capture_default_str();
}

void add_dims(CLI::App* sub, Options& o) {
  sub->add_option("--dims", o.dims, "Cuboid length,breadth,height in meters")->delimiter(',');
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Edge, corner and cuboid pose estimation in point clouds", "edgepose"};
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("gen-scene", "Generate a synthetic scene with ground truth");
  add_common(gen, o);
  add_dims(gen, o);
  gen->add_option("--count", o.count, "Number of cuboids")->capture_default_str();
  gen->add_option("--noise", o.noise, "Gaussian noise sigma in meters")->capture_default_str();

  auto* det = app.add_subcommand("detect-edges", "Score points and keep edge points");
  add_common(det, o);
  add_input(det, o);
  add_edge(det, o);
  det->add_flag("--sweep", o.sweep, "Time edge extraction over r_s 0.010 to 0.030");

  auto* lines = app.add_subcommand("extract-lines", "Fit line segments to edge points");
  add_common(lines, o);
  add_input(lines, o);
  add_edge(lines, o);
  lines->add_option("--ransac-thresh", o.ransac_thresh, "RANSAC inlier distance")
      ->capture_default_str();

  auto* pose = app.add_subcommand("estimate-pose", "Estimate cuboid poses");
  add_common(pose, o);
  add_input(pose, o);
  add_edge(pose, o);
  add_dims(pose, o);
  pose->add_option("--ransac-thresh", o.ransac_thresh, "RANSAC inlier distance")
      ->capture_default_str();

  auto* cmp = app.add_subcommand("compare-baseline",
                                 "Interior false positives against a covariance baseline");
  add_common(cmp, o);
  add_edge(cmp, o);

  auto* pick = app.add_subcommand("plan-pick", "Pick-and-place waypoints above a goal");
  pick->add_option("--output", o.output, "Output directory")->capture_default_str();
  pick->add_option("--input", o.input, "poses.json; the first pose is the goal");
  pick->add_option("--goal", o.goal, "Goal point x,y,z")->delimiter(',');
  pick->add_option("--initial", o.initial, "Initial point x,y,z")->delimiter(',');
  pick->add_option("--final", o.final_point, "Final point x,y,z")->delimiter(',');
  pick->add_option("--approach", o.approach, "Approach height above the goal")
      ->capture_default_str();
  pick->add_option("--lift", o.lift, "Retrieval height above the goal")->capture_default_str();

  std::vector<std::string> storage{"edgepose"};
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : storage) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (gen->parsed()) return cmd_gen_scene(o, out);
    if (det->parsed()) return cmd_detect_edges(o, out);
    if (lines->parsed()) return cmd_extract_lines(o, out);
    if (pose->parsed()) return cmd_estimate_pose(o, out);
    if (cmp->parsed()) return cmd_compare_baseline(o, out);
    if (pick->parsed()) return cmd_plan_pick(o, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::invalid_argument& e) {
    err << "invalid parameter: " << e.what() << "\n";
    return kUsage;
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << "\n";
    return kParse;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << "\n";
    return kParse;
  } catch (const json::exception& e) {
    err << "parse error: " << e.what() << "\n";
    return kParse;
  } catch (const std::exception& e) {
    err << "pipeline error: " << e.what() << "\n";
    return kPipeline;
  }
  return kUsage;
}

}  // namespace edgepose::cli
