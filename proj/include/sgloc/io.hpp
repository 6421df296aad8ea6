#ifndef SGLOC_IO_HPP
#define SGLOC_IO_HPP

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "sgloc/clustering.hpp"
#include "sgloc/scene_graph.hpp"

namespace sgloc {

struct TimedPose {
  double stamp = 0;
  Posed pose;
};

// Scans: packed little-endian float32 (x, y, z, intensity) per point; labels:
// packed little-endian uint32 per point, semantic class in the low 16 bits.
SemanticPointCloud readCloud(const std::filesystem::path& cloud_path, const std::filesystem::path& label_path);
void writeCloud(const SemanticPointCloud& cloud, const std::filesystem::path& cloud_path,
                const std::filesystem::path& label_path);

// Trajectories: "stamp tx ty tz qx qy qz qw" per line, stamps strictly increasing.
std::vector<TimedPose> readPoses(std::istream& is);
std::vector<TimedPose> readPoses(const std::filesystem::path& path);
void writePoses(std::ostream& os, const std::vector<TimedPose>& poses);
void writePoses(const std::filesystem::path& path, const std::vector<TimedPose>& poses);
void writePoseLine(std::ostream& os, const TimedPose& pose);

// Cluster maps: header "SGLOC_CLUSTER_MAP <version> <count> <config-hash> <frame>", then
// one "id class cx cy cz sxx sxy sxz syy syz szz n" record per cluster.
inline constexpr int kClusterMapVersion = 1;
void writeClusterMap(std::ostream& os, const ClusterMap& map);
void writeClusterMap(const std::filesystem::path& path, const ClusterMap& map);
ClusterMap readClusterMap(std::istream& is);
ClusterMap readClusterMap(const std::filesystem::path& path);

// Descriptor db cache: header "SGLOC_DESCRIPTOR_DB <version> <clusters> <triangles> <quantum>
// <k> <min-side> <max-side> <min-area>", cluster records as above, then "id1 id2 id3 d12 d23 d31".
inline constexpr int kDescriptorDbVersion = 1;
void writeDescriptorDb(std::ostream& os, const DescriptorDb& db);
void writeDescriptorDb(const std::filesystem::path& path, const DescriptorDb& db);
DescriptorDb readDescriptorDb(std::istream& is);
DescriptorDb readDescriptorDb(const std::filesystem::path& path);

}  // namespace sgloc

#endif  // SGLOC_IO_HPP
