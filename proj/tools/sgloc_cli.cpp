// sgloc: build cluster maps, localize scans, run synthetic Monte Carlo trials
// and evaluate trajectories.
//
// Exit codes: 0 success, 1 error, 2 explicit localization failure.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "sgloc/evaluation.hpp"
#include "sgloc/io.hpp"
#include "sgloc/localizer.hpp"

namespace fs = std::filesystem;
using namespace sgloc;

namespace {

constexpr int kExitError = 1;
constexpr int kExitLocalizationFailed = 2;

RunConfig configFrom(const std::string& path) {
  if (path.empty()) return RunConfig{};
  std::vector<std::string> warnings;
  RunConfig cfg = loadConfig(path, &warnings);
  for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
  return cfg;
}

std::vector<fs::path> scanFiles(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error("not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".bin") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

int buildMap(const std::string& clouds, const std::string& labels, const std::string& poses_path,
             const std::string& config_path, const std::string& out, const std::string& db_out) {
  const RunConfig cfg = configFrom(config_path);
  const auto scans = scanFiles(clouds);
  const auto poses = readPoses(fs::path(poses_path));
  if (scans.size() != poses.size()) {
    throw Error("build-map: " + std::to_string(scans.size()) + " scans but " + std::to_string(poses.size()) + " poses");
  }
  SemanticPointCloud world;
  for (std::size_t i = 0; i < scans.size(); ++i) {
    const fs::path label_path = fs::path(labels) / scans[i].stem().concat(".label");
    const SemanticPointCloud scan = readCloud(scans[i], label_path);
    const Eigen::Matrix3f r = poses[i].pose.rotation.cast<float>();
    const Eigen::Vector3f t = poses[i].pose.translation.cast<float>();
    for (std::size_t k = 0; k < scan.size(); ++k) {
      // Only whitelisted classes matter for clustering.
      if (!cfg.classes.classOf(scan.labels[k])) continue;
      Eigen::Vector4f p = scan.points[k];
      p.head<3>() = r * p.head<3>() + t;
      world.points.push_back(p);
      world.labels.push_back(scan.labels[k]);
    }
  }
  const ClusterMap map = clusterMapCloud(world, cfg.clustering, cfg.classes, cfg.hash());
  writeClusterMap(fs::path(out), map);
  std::cerr << "build-map: " << scans.size() << " scans, " << world.size() << " labeled points, "
            << map.clusters.size() << " clusters -> " << out << '\n';
  if (!db_out.empty()) {
    const DescriptorDb db = DescriptorDb::build(map, cfg.triangulation, cfg.retrieval.quantum);
    writeDescriptorDb(fs::path(db_out), db);
    std::cerr << "build-map: " << db.size() << " triangles -> " << db_out << '\n';
  }
  return 0;
}

int localizeCmd(const std::string& map_path, const std::string& scan, const std::string& scan_labels,
                const std::string& config_path, const std::string& out, const std::string& db_path, double stamp,
                const std::string& graph_out) {
  const RunConfig cfg = configFrom(config_path);
  const ClusterMap map = readClusterMap(fs::path(map_path));
  DescriptorDb db;
  if (!db_path.empty()) {
    db = readDescriptorDb(fs::path(db_path));
    if (std::abs(db.quantum() - cfg.retrieval.quantum) > 1e-12) throw Error("localize: db quantum differs from config");
  } else {
    db = DescriptorDb::build(map, cfg.triangulation, cfg.retrieval.quantum);
  }
  const SemanticPointCloud cloud = readCloud(scan, scan_labels);

  const LocalizationResult res = localizeScan(cloud, map, db, cfg);
  const auto& t = res.timings;
  std::cerr << "localize: status=" << toString(res.status) << " clusters=" << res.query_cluster_count
            << " triangles=" << res.query_triangle_count << " correspondences=" << res.correspondence_count
            << " clique=" << res.clique_size << (res.clique_exact ? "" : " (inexact)")
            << " inliers=" << (res.registration ? res.registration->inlier_count : 0) << '\n'
            << "timings_ms: clustering=" << t.clustering_ms << " query=" << t.query_ms << " graph=" << t.graph_ms
            << " clique=" << t.clique_ms << " solve=" << t.solve_ms << " total=" << t.total_ms << '\n';

  if (!graph_out.empty()) {
    const std::vector<Cluster> query = clusterCloud(cloud, cfg.clustering, cfg.classes);
    const auto raw = generateCorrespondences(query, db, cfg.triangulation, cfg.retrieval);
    std::ofstream g(graph_out);
    buildConsistencyGraph(raw.correspondences, query, map.clusters, cfg.consistency).writeEdgeList(g);
  }

  if (!res.ok()) return kExitLocalizationFailed;
  std::ofstream os(out);
  if (!os) throw Error("cannot open " + out);
  writePoseLine(os, TimedPose{stamp, res.pose()});
  return 0;
}

int synthCmd(const std::string& params_path, const std::string& config_path, std::size_t trials,
             const std::string& out, unsigned workers) {
  SynthParams params;
  if (!params_path.empty()) {
    std::ifstream in(params_path);
    if (!in) throw Error("cannot open " + params_path);
    std::stringstream ss;
    ss << in.rdbuf();
    std::vector<std::string> warnings;
    params = parseSynthParams(parseKeyValues(ss.str()), &warnings);
    for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
  }
  const RunConfig cfg = configFrom(config_path);
  const auto records = runSynthTrials(params, cfg, trials, workers);
  std::ofstream os(out);
  if (!os) throw Error("cannot open " + out);
  writeTrialCsv(os, records);
  const TrialSummary s = summarize(records);
  std::cout << "trials=" << s.trials << " successes=" << s.successes << " success_rate=" << s.success_rate
            << " median_e_trans=" << s.median_e_trans << " median_e_rot=" << s.median_e_rot
            << " ate=" << s.mean_e_trans << " are=" << s.mean_e_rot << '\n';
  return 0;
}

int evalCmd(const std::string& est, const std::string& gt, const std::string& out, double tolerance,
            double max_trans, double max_rot) {
  const auto report = evaluateTrajectory(readPoses(fs::path(est)), readPoses(fs::path(gt)), tolerance,
                                         SuccessThresholds{max_trans, max_rot});
  std::ofstream os(out);
  if (!os) throw Error("cannot open " + out);
  writeEvalCsv(os, report);
  std::cout << "estimates=" << report.rows.size() << " matched=" << report.matched
            << " unmatched=" << report.rows.size() - report.matched << " success_rate=" << report.success_rate
            << " ate=" << report.ate << " are=" << report.are << '\n';
  for (const auto& r : report.rows) {
    if (!r.gt_stamp) std::cerr << "unmatched estimate at stamp " << r.stamp << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scene-graph LiDAR global localization"};
  app.require_subcommand(1);

  std::string clouds, labels, poses, config, out, db_out;
  auto* build = app.add_subcommand("build-map", "Concatenate scans by pose, cluster, write a cluster map");
  build->add_option("--clouds", clouds, "Directory of .bin scans")->required()->check(CLI::ExistingDirectory);
  build->add_option("--labels", labels, "Directory of .label files (same stems)")->required()->check(CLI::ExistingDirectory);
  build->add_option("--poses", poses, "Scan poses, one TUM line per scan in file-name order")->required()->check(CLI::ExistingFile);
  build->add_option("--config", config, "Run configuration")->check(CLI::ExistingFile);
  build->add_option("--out", out, "Output cluster map")->required();
  build->add_option("--db-out", db_out, "Also write the descriptor db cache");

  std::string map_path, scan, scan_labels, db_path, graph_out;
  double stamp = 0.0;
  auto* loc = app.add_subcommand("localize", "One-shot localization of a scan against a cluster map");
  loc->add_option("--map", map_path, "Cluster map")->required()->check(CLI::ExistingFile);
  loc->add_option("--scan", scan, "Scan .bin")->required()->check(CLI::ExistingFile);
  loc->add_option("--scan-labels", scan_labels, "Scan .label")->required()->check(CLI::ExistingFile);
  loc->add_option("--config", config, "Run configuration")->check(CLI::ExistingFile);
  loc->add_option("--out", out, "Output TUM pose line")->required();
  loc->add_option("--db", db_path, "Descriptor db cache built from the same map")->check(CLI::ExistingFile);
  loc->add_option("--stamp", stamp, "Timestamp written with the pose");
  loc->add_option("--graph-out", graph_out, "Dump the consistency graph as an edge list");

  std::string params_path;
  std::size_t trials = 100;
  unsigned workers = 0;
  auto* synth = app.add_subcommand("synth", "Monte Carlo evaluation on synthetic scenes");
  synth->add_option("--params", params_path, "Synthetic scene parameters")->check(CLI::ExistingFile);
  synth->add_option("--config", config, "Run configuration")->check(CLI::ExistingFile);
  synth->add_option("--trials", trials, "Number of trials")->check(CLI::PositiveNumber);
  synth->add_option("--out", out, "Output report CSV")->required();
  synth->add_option("--workers", workers, "Worker threads (default: all cores; SGLOC_WORKERS overrides)");

  std::string est, gt;
  double tolerance = 0.05, max_trans = 5.0, max_rot = 10.0;
  auto* eval = app.add_subcommand("eval", "Pose errors and success rate of estimates against ground truth");
  eval->add_option("--est", est, "Estimated poses (TUM)")->required()->check(CLI::ExistingFile);
  eval->add_option("--gt", gt, "Ground-truth poses (TUM)")->required()->check(CLI::ExistingFile);
  eval->add_option("--out", out, "Output report CSV")->required();
  eval->add_option("--tolerance", tolerance, "Timestamp matching tolerance, s");
  eval->add_option("--max-trans", max_trans, "Success threshold on e_trans, m");
  eval->add_option("--max-rot", max_rot, "Success threshold on e_rot, deg");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitError;
  }

  try {
    if (*build) return buildMap(clouds, labels, poses, config, out, db_out);
    if (*loc) return localizeCmd(map_path, scan, scan_labels, config, out, db_path, stamp, graph_out);
    if (*synth) return synthCmd(params_path, config, trials, out, workers);
    if (*eval) return evalCmd(est, gt, out, tolerance, max_trans, max_rot);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}
