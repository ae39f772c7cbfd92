#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "ctbot/kinematics.hpp"
#include "ctbot/scene.hpp"

namespace ctbot {

/// One sampled configuration. Joints 1-6 are sampled, q7 stays at its home
/// value. `tip_pose` is the tool frame in the scene (bore) frame, i.e.
/// mounting · FK(q); with an identity mounting it is FK(q) itself.
struct SampleRecord {
  JointVector q;
  Pose tip_pose;
  bool collision_free = false;
};

/// Samples are generated in fixed-size chunks, each from its own generator
/// seeded by (seed, chunk index), so the stream does not depend on how many
/// workers produce it.
inline constexpr std::uint64_t kSampleChunk = 1024;

using SampleSink = std::function<void(std::uint64_t index, const SampleRecord&)>;

/// Streams N records in index order.
void sample_workspace(const Scene& scene, const RobotBody& body, const SerialChain& chain, std::uint64_t n,
                      std::uint64_t seed, const SampleSink& sink);

std::vector<SampleRecord> sample_workspace(const Scene& scene, const RobotBody& body, const SerialChain& chain,
                                           std::uint64_t n, std::uint64_t seed);

struct Heatmap {
  std::vector<Eigen::Vector3d> targets;
  std::vector<std::uint64_t> counts;
  double radius = 5e-3;

  std::uint64_t max_count() const;
  /// 100 · count / max count; all zero when nothing was reached.
  std::vector<double> percentages() const;
};

/// Accumulates counts of collision-free tip positions within `radius` of each
/// target. Uses a uniform grid over the targets.
class ReachabilityBinner {
 public:
  ReachabilityBinner(std::vector<Eigen::Vector3d> targets, double radius = 5e-3);

  void add(const SampleRecord& record);
  void add_position(const Eigen::Vector3d& tip);
  void merge(const ReachabilityBinner& other);
  /// Indices of targets within radius of `p`.
  void for_each_target_near(const Eigen::Vector3d& p, const std::function<void(std::size_t)>& fn) const;

  Heatmap heatmap() const;

 private:
  struct CellKey {
    std::int64_t x, y, z;
    bool operator==(const CellKey&) const = default;
  };
  struct CellHash {
    std::size_t operator()(const CellKey& k) const noexcept;
  };
  CellKey cell_of(const Eigen::Vector3d& p) const;

  std::vector<Eigen::Vector3d> targets_;
  std::vector<std::uint64_t> counts_;
  double radius_;
  std::unordered_map<CellKey, std::vector<std::size_t>, CellHash> grid_;
};

/// Records that are not collision-free are skipped. Throws InvalidArgument
/// on an empty target list.
Heatmap bin_reachability(const std::vector<SampleRecord>& records, const std::vector<Eigen::Vector3d>& targets,
                         double radius = 5e-3);

struct ApproachCone {
  std::vector<Eigen::Vector3d> directions;
  std::optional<Eigen::Vector3d> mean_direction;
  /// Largest angle (rad) between a direction and the mean; absent when empty.
  std::optional<double> half_angle;
};

/// Needle axes (tool z) of collision-free records whose tip is within radius of target.
ApproachCone approach_cones(const std::vector<SampleRecord>& records, const Eigen::Vector3d& target,
                            double radius = 5e-3);

/// CSV: header `x,y,z,count,percentage`, one row per target in target order.
void write_heatmap_csv(const Heatmap& heatmap, std::ostream& out);
void export_heatmap(const Heatmap& heatmap, const std::filesystem::path& path);

struct StudyResult {
  Heatmap heatmap;
  std::uint64_t samples = 0;
  std::uint64_t collision_free = 0;

  double collision_free_fraction() const {
    return samples == 0 ? 0.0 : static_cast<double>(collision_free) / static_cast<double>(samples);
  }
};

/// Samples, filters and bins in one pass, spread over `workers` threads
/// (0 = hardware concurrency). Results do not depend on the worker count.
StudyResult run_workspace_study(const Scene& scene, const RobotBody& body, const SerialChain& chain,
                                const std::vector<Eigen::Vector3d>& targets, std::uint64_t n, std::uint64_t seed,
                                double radius = 5e-3, unsigned workers = 0);

}  // namespace ctbot
