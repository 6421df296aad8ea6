#include "sgloc/io.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace sgloc {
namespace {

std::string readFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

template <typename T>
T loadLittleEndian(const char* bytes) {
  std::uint32_t raw;
  static_assert(sizeof(T) == sizeof(raw));
  std::memcpy(&raw, bytes, sizeof(raw));
  if constexpr (std::endian::native == std::endian::big) raw = __builtin_bswap32(raw);
  T out;
  std::memcpy(&out, &raw, sizeof(out));
  return out;
}

template <typename T>
void storeLittleEndian(T value, std::string& out) {
  std::uint32_t raw;
  static_assert(sizeof(T) == sizeof(raw));
  std::memcpy(&raw, &value, sizeof(raw));
  if constexpr (std::endian::native == std::endian::big) raw = __builtin_bswap32(raw);
  char bytes[4];
  std::memcpy(bytes, &raw, 4);
  out.append(bytes, 4);
}

std::ofstream openForWrite(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw Error("failed writing " + path.string());
}

std::string clusterRecord(std::uint32_t id, const Cluster& c) {
  const Mat3d& s = c.covariance;
  char buf[320];
  std::snprintf(buf, sizeof(buf), "%u %d %.9g %.9g %.9g %.9g %.9g %.9g %.9g %.9g %.9g %zu", id, c.label,
                c.centroid.x(), c.centroid.y(), c.centroid.z(), s(0, 0), s(0, 1), s(0, 2), s(1, 1), s(1, 2), s(2, 2),
                c.point_count);
  return buf;
}

bool nextDataLine(std::istream& is, std::string& line, int& line_no) {
  while (std::getline(is, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first != std::string::npos) return true;
  }
  return false;
}

[[noreturn]] void lineError(const std::string& what, int line_no, const std::string& msg) {
  throw Error(what + " line " + std::to_string(line_no) + ": " + msg);
}

// Reads `count` cluster records; ids must be a permutation of 0..count-1.
std::vector<Cluster> readClusterRecords(std::istream& is, std::size_t count, int& line_no, const char* what) {
  std::vector<Cluster> clusters(count);
  std::vector<bool> seen(count, false);
  std::string line;
  for (std::size_t k = 0; k < count; ++k) {
    if (!nextDataLine(is, line, line_no)) throw Error(std::string(what) + ": truncated, expected " + std::to_string(count) + " cluster records");
    std::istringstream ls(line);
    long long id = -1;
    int label = 0;
    double v[9];
    long long n = -1;
    ls >> id >> label;
    for (double& x : v) ls >> x;
    ls >> n;
    std::string extra;
    if (!ls || (ls >> extra)) lineError(what, line_no, "malformed cluster record");
    if (id < 0 || static_cast<std::size_t>(id) >= count) lineError(what, line_no, "cluster id out of range");
    if (seen[id]) lineError(what, line_no, "duplicate cluster id " + std::to_string(id));
    if (n < 0 || label < 0) lineError(what, line_no, "negative label or point count");
    seen[id] = true;
    Cluster& c = clusters[id];
    c.label = label;
    c.centroid = Vec3d(v[0], v[1], v[2]);
    c.covariance << v[3], v[4], v[5], v[4], v[6], v[7], v[5], v[7], v[8];
    c.point_count = static_cast<std::size_t>(n);
    if (!c.centroid.allFinite() || !isPsd(c.covariance, 1e-6)) lineError(what, line_no, "invalid centroid or covariance");
  }
  return clusters;
}

}  // namespace

SemanticPointCloud readCloud(const std::filesystem::path& cloud_path, const std::filesystem::path& label_path) {
  const std::string cloud_bytes = readFile(cloud_path);
  const std::string label_bytes = readFile(label_path);
  if (cloud_bytes.size() % 16 != 0) throw Error(cloud_path.string() + ": size is not a multiple of 16 bytes");
  if (label_bytes.size() % 4 != 0) throw Error(label_path.string() + ": size is not a multiple of 4 bytes");
  const std::size_t n = cloud_bytes.size() / 16;
  if (label_bytes.size() / 4 != n) {
    throw Error("point/label count mismatch: " + std::to_string(n) + " points, " +
                std::to_string(label_bytes.size() / 4) + " labels");
  }
  SemanticPointCloud cloud;
  cloud.points.resize(n);
  cloud.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (int k = 0; k < 4; ++k) cloud.points[i][k] = loadLittleEndian<float>(cloud_bytes.data() + 16 * i + 4 * k);
    if (!cloud.points[i].head<3>().allFinite()) throw Error(cloud_path.string() + ": non-finite coordinate at point " + std::to_string(i));
    cloud.labels[i] = static_cast<std::uint16_t>(loadLittleEndian<std::uint32_t>(label_bytes.data() + 4 * i) & 0xFFFFu);
  }
  return cloud;
}

void writeCloud(const SemanticPointCloud& cloud, const std::filesystem::path& cloud_path,
                const std::filesystem::path& label_path) {
  if (cloud.points.size() != cloud.labels.size()) throw Error("writeCloud: label count does not match point count");
  std::string points, labels;
  points.reserve(cloud.size() * 16);
  labels.reserve(cloud.size() * 4);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    for (int k = 0; k < 4; ++k) storeLittleEndian<float>(cloud.points[i][k], points);
    storeLittleEndian<std::uint32_t>(cloud.labels[i], labels);
  }
  auto pout = openForWrite(cloud_path);
  pout.write(points.data(), static_cast<std::streamsize>(points.size()));
  finish(pout, cloud_path);
  auto lout = openForWrite(label_path);
  lout.write(labels.data(), static_cast<std::streamsize>(labels.size()));
  finish(lout, label_path);
}

std::vector<TimedPose> readPoses(std::istream& is) {
  std::vector<TimedPose> poses;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    double v[8];
    for (double& x : v) ls >> x;
    std::string extra;
    if (!ls || (ls >> extra)) lineError("pose file", line_no, "expected 'stamp tx ty tz qx qy qz qw'");
    for (double x : v) {
      if (!std::isfinite(x)) lineError("pose file", line_no, "non-finite value");
    }
    const Eigen::Quaterniond q(v[7], v[4], v[5], v[6]);
    if (std::abs(q.norm() - 1.0) > 1e-3) lineError("pose file", line_no, "quaternion is not unit length");
    if (!poses.empty() && !(v[0] > poses.back().stamp)) lineError("pose file", line_no, "timestamps must increase strictly");
    poses.push_back(TimedPose{v[0], Posed::FromQuaternion(q, Vec3d(v[1], v[2], v[3]))});
  }
  return poses;
}

std::vector<TimedPose> readPoses(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return readPoses(in);
}

void writePoseLine(std::ostream& os, const TimedPose& p) {
  const Eigen::Quaterniond q = p.pose.quaternion();
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%.9f %.17g %.17g %.17g %.17g %.17g %.17g %.17g\n", p.stamp, p.pose.translation.x(),
                p.pose.translation.y(), p.pose.translation.z(), q.x(), q.y(), q.z(), q.w());
  os << buf;
}

void writePoses(std::ostream& os, const std::vector<TimedPose>& poses) {
  for (const auto& p : poses) writePoseLine(os, p);
}

void writePoses(const std::filesystem::path& path, const std::vector<TimedPose>& poses) {
  auto out = openForWrite(path);
  writePoses(out, poses);
  finish(out, path);
}

void writeClusterMap(std::ostream& os, const ClusterMap& map) {
  char hash[32];
  std::snprintf(hash, sizeof(hash), "%016llx", static_cast<unsigned long long>(map.config_hash));
  os << "SGLOC_CLUSTER_MAP " << kClusterMapVersion << ' ' << map.clusters.size() << ' ' << hash << ' '
     << (map.frame_id.empty() ? "world" : map.frame_id) << '\n';
  for (std::size_t i = 0; i < map.clusters.size(); ++i) {
    os << clusterRecord(static_cast<std::uint32_t>(i), map.clusters[i]) << '\n';
  }
}

void writeClusterMap(const std::filesystem::path& path, const ClusterMap& map) {
  auto out = openForWrite(path);
  writeClusterMap(out, map);
  finish(out, path);
}

ClusterMap readClusterMap(std::istream& is) {
  std::string line;
  int line_no = 0;
  if (!nextDataLine(is, line, line_no)) throw Error("cluster map: empty file");
  std::istringstream hs(line);
  std::string magic, hash, frame;
  int version = 0;
  long long count = -1;
  hs >> magic >> version >> count >> hash >> frame;
  if (!hs || magic != "SGLOC_CLUSTER_MAP") lineError("cluster map", line_no, "bad header");
  if (version != kClusterMapVersion) lineError("cluster map", line_no, "unsupported version " + std::to_string(version));
  if (count < 0) lineError("cluster map", line_no, "bad cluster count");
  ClusterMap map;
  try {
    map.config_hash = std::stoull(hash, nullptr, 16);
  } catch (const std::exception&) {
    lineError("cluster map", line_no, "bad config hash");
  }
  map.frame_id = frame;
  map.clusters = readClusterRecords(is, static_cast<std::size_t>(count), line_no, "cluster map");
  if (nextDataLine(is, line, line_no)) lineError("cluster map", line_no, "more records than the header declares");
  return map;
}

ClusterMap readClusterMap(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return readClusterMap(in);
}

void writeDescriptorDb(std::ostream& os, const DescriptorDb& db) {
  const auto& tri = db.triangulation();
  char header[256];
  std::snprintf(header, sizeof(header), "SGLOC_DESCRIPTOR_DB %d %zu %zu %.17g %d %.17g %.17g %.17g\n",
                kDescriptorDbVersion, db.clusters().size(), db.triangles().size(), db.quantum(), tri.k_neighbors,
                tri.min_side, tri.max_side, tri.min_area);
  os << header;
  for (std::size_t i = 0; i < db.clusters().size(); ++i) {
    os << clusterRecord(static_cast<std::uint32_t>(i), db.clusters()[i]) << '\n';
  }
  char buf[160];
  for (const auto& t : db.triangles()) {
    std::snprintf(buf, sizeof(buf), "%u %u %u %.17g %.17g %.17g\n", t.vertices[0], t.vertices[1], t.vertices[2],
                  t.sides[0], t.sides[1], t.sides[2]);
    os << buf;
  }
}

void writeDescriptorDb(const std::filesystem::path& path, const DescriptorDb& db) {
  auto out = openForWrite(path);
  writeDescriptorDb(out, db);
  finish(out, path);
}

DescriptorDb readDescriptorDb(std::istream& is) {
  std::string line;
  int line_no = 0;
  if (!nextDataLine(is, line, line_no)) throw Error("descriptor db: empty file");
  std::istringstream hs(line);
  std::string magic;
  int version = 0;
  long long nc = -1, nt = -1;
  double quantum = 0;
  TriangulationParams tri;
  hs >> magic >> version >> nc >> nt >> quantum >> tri.k_neighbors >> tri.min_side >> tri.max_side >> tri.min_area;
  if (!hs || magic != "SGLOC_DESCRIPTOR_DB") lineError("descriptor db", line_no, "bad header");
  if (version != kDescriptorDbVersion) lineError("descriptor db", line_no, "unsupported version " + std::to_string(version));
  if (nc < 0 || nt < 0 || !(quantum > 0)) lineError("descriptor db", line_no, "bad header values");

  std::vector<Cluster> clusters = readClusterRecords(is, static_cast<std::size_t>(nc), line_no, "descriptor db");
  std::vector<TriangleDescriptor> triangles;
  triangles.reserve(static_cast<std::size_t>(nt));
  for (long long k = 0; k < nt; ++k) {
    if (!nextDataLine(is, line, line_no)) throw Error("descriptor db: truncated, expected " + std::to_string(nt) + " triangle records");
    std::istringstream ls(line);
    long long id[3];
    TriangleDescriptor t;
    ls >> id[0] >> id[1] >> id[2] >> t.sides[0] >> t.sides[1] >> t.sides[2];
    std::string extra;
    if (!ls || (ls >> extra)) lineError("descriptor db", line_no, "malformed triangle record");
    for (int i = 0; i < 3; ++i) {
      if (id[i] < 0 || id[i] >= nc) lineError("descriptor db", line_no, "triangle references unknown cluster");
      t.vertices[i] = static_cast<std::uint32_t>(id[i]);
      t.labels[i] = clusters[t.vertices[i]].label;
      t.covariances[i] = clusters[t.vertices[i]].covariance;
    }
    if (!(t.sides[0] <= t.sides[1] && t.sides[1] <= t.sides[2])) lineError("descriptor db", line_no, "sides not sorted");
    triangles.push_back(t);
  }
  if (nextDataLine(is, line, line_no)) lineError("descriptor db", line_no, "more records than the header declares");
  return DescriptorDb::fromTriangles(std::move(clusters), std::move(triangles), tri, quantum);
}

DescriptorDb readDescriptorDb(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return readDescriptorDb(in);
}

}  // namespace sgloc
