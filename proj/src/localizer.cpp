#include "sgloc/localizer.hpp"

namespace sgloc {

std::string_view toString(LocalizationStatus s) {
  switch (s) {
    case LocalizationStatus::Success: return "success";
    case LocalizationStatus::NoCorrespondences: return "no_correspondences";
    case LocalizationStatus::CliqueTooSmall: return "clique_too_small";
    case LocalizationStatus::Degenerate: return "degenerate";
  }
  return "unknown";
}

LocalizationResult localize(std::span<const Cluster> query, const ClusterMap& map, const DescriptorDb& db,
                            const RunConfig& config) {
  if (db.clusters().size() != map.clusters.size()) throw Error("localize: descriptor db was not built from this map");
  const Stopwatch total;
  LocalizationResult out;
  out.query_cluster_count = query.size();

  Stopwatch stage;
  const CorrespondenceSet raw = generateCorrespondences(query, db, config.triangulation, config.retrieval);
  out.timings.query_ms = stage.elapsedMs();
  out.query_triangle_count = raw.query_triangles.size();
  out.correspondence_count = raw.correspondences.size();
  if (raw.correspondences.empty()) {
    out.status = LocalizationStatus::NoCorrespondences;
    out.timings.total_ms = total.elapsedMs();
    return out;
  }

  stage.reset();
  const ConsistencyGraph graph = buildConsistencyGraph(raw.correspondences, query, map.clusters, config.consistency);
  out.timings.graph_ms = stage.elapsedMs();
  out.graph_edge_count = graph.edgeCount();

  stage.reset();
  const CliqueResult clique = maxClique(graph, std::chrono::duration<double>(config.clique_time_budget));
  out.timings.clique_ms = stage.elapsedMs();
  out.clique_size = clique.vertices.size();
  out.clique_exact = clique.exact;
  for (auto v : clique.vertices) out.inliers.push_back(graph.correspondences[v]);
  if (out.clique_size < 3) {
    out.status = LocalizationStatus::CliqueTooSmall;
    out.timings.total_ms = total.elapsedMs();
    return out;
  }

  stage.reset();
  std::vector<Vec3d> q, m;
  q.reserve(out.inliers.size());
  m.reserve(out.inliers.size());
  for (const auto& c : out.inliers) {
    q.push_back(query[c.query_id].centroid);
    m.push_back(map.clusters[c.map_id].centroid);
  }
  out.registration = gncTlsRegister(q, m, config.gnc);
  out.timings.solve_ms = stage.elapsedMs();
  out.status = out.registration->inlier_count < 3 ? LocalizationStatus::CliqueTooSmall
               : out.registration->degenerate    ? LocalizationStatus::Degenerate
                                                 : LocalizationStatus::Success;
  out.timings.total_ms = total.elapsedMs();
  return out;
}

LocalizationResult localizeScan(const SemanticPointCloud& scan, const ClusterMap& map, const DescriptorDb& db,
                                const RunConfig& config) {
  const Stopwatch total;
  const std::vector<Cluster> query = clusterCloud(scan, config.clustering, config.classes);
  const double clustering_ms = total.elapsedMs();
  LocalizationResult out = localize(query, map, db, config);
  out.timings.clustering_ms = clustering_ms;
  out.timings.total_ms = total.elapsedMs();
  return out;
}

}  // namespace sgloc
