#include "ctbot/workspace.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <random>
#include <thread>

#include "ctbot/errors.hpp"

namespace ctbot {

namespace {

std::mt19937_64 chunk_generator(std::uint64_t seed, std::uint64_t chunk) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(chunk), static_cast<std::uint32_t>(chunk >> 32)};
  return std::mt19937_64(seq);
}

/// Uniform in [0, 1) from the top 53 bits; identical on every platform.
double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

JointVector sample_configuration(std::mt19937_64& rng, const JointLimits& limits) {
  JointVector q;
  for (int i = 0; i < kNumJoints - 1; ++i) {
    q[i] = limits.lower[i] + (limits.upper[i] - limits.lower[i]) * unit_uniform(rng);
  }
  q[kNumJoints - 1] = std::clamp(0.0, limits.lower[kNumJoints - 1], limits.upper[kNumJoints - 1]);
  return q;
}

SampleRecord evaluate(const Scene& scene, const RobotBody& body, const SerialChain& chain, const JointVector& q) {
  return {q, scene.mounting * forward_kinematics(chain, q), is_collision_free(scene, body, chain, q)};
}

template <typename Fn>
void for_chunk(const Scene& scene, const RobotBody& body, const SerialChain& chain, std::uint64_t n,
               std::uint64_t seed, std::uint64_t chunk, Fn&& fn) {
  auto rng = chunk_generator(seed, chunk);
  const std::uint64_t begin = chunk * kSampleChunk;
  const std::uint64_t end = std::min(n, begin + kSampleChunk);
  for (std::uint64_t i = begin; i < end; ++i) fn(i, evaluate(scene, body, chain, sample_configuration(rng, chain.limits)));
}

}  // namespace

void sample_workspace(const Scene& scene, const RobotBody& body, const SerialChain& chain, std::uint64_t n,
                      std::uint64_t seed, const SampleSink& sink) {
  const std::uint64_t chunks = (n + kSampleChunk - 1) / kSampleChunk;
  for (std::uint64_t c = 0; c < chunks; ++c) {
    for_chunk(scene, body, chain, n, seed, c, [&](std::uint64_t i, const SampleRecord& r) { sink(i, r); });
  }
}

std::vector<SampleRecord> sample_workspace(const Scene& scene, const RobotBody& body, const SerialChain& chain,
                                           std::uint64_t n, std::uint64_t seed) {
  std::vector<SampleRecord> out;
  out.reserve(n);
  sample_workspace(scene, body, chain, n, seed, [&](std::uint64_t, const SampleRecord& r) { out.push_back(r); });
  return out;
}

std::uint64_t Heatmap::max_count() const {
  return counts.empty() ? 0 : *std::max_element(counts.begin(), counts.end());
}

std::vector<double> Heatmap::percentages() const {
  const std::uint64_t top = max_count();
  std::vector<double> out(counts.size(), 0.0);
  if (top == 0) return out;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    out[i] = 100.0 * static_cast<double>(counts[i]) / static_cast<double>(top);
  }
  return out;
}

std::size_t ReachabilityBinner::CellHash::operator()(const CellKey& k) const noexcept {
  std::uint64_t h = static_cast<std::uint64_t>(k.x) * 0x9E3779B97F4A7C15ull;
  h ^= static_cast<std::uint64_t>(k.y) * 0xC2B2AE3D27D4EB4Full + (h << 6) + (h >> 2);
  h ^= static_cast<std::uint64_t>(k.z) * 0x165667B19E3779F9ull + (h << 6) + (h >> 2);
  return static_cast<std::size_t>(h);
}

ReachabilityBinner::ReachabilityBinner(std::vector<Eigen::Vector3d> targets, double radius)
    : targets_(std::move(targets)), counts_(targets_.size(), 0), radius_(radius) {
  if (targets_.empty()) throw InvalidArgument("reachability binning needs at least one target");
  if (!(radius_ > 0.0) || !std::isfinite(radius_)) throw InvalidArgument("binning radius must be positive");
  for (std::size_t i = 0; i < targets_.size(); ++i) grid_[cell_of(targets_[i])].push_back(i);
}

ReachabilityBinner::CellKey ReachabilityBinner::cell_of(const Eigen::Vector3d& p) const {
  return {static_cast<std::int64_t>(std::floor(p.x() / radius_)), static_cast<std::int64_t>(std::floor(p.y() / radius_)),
          static_cast<std::int64_t>(std::floor(p.z() / radius_))};
}

void ReachabilityBinner::for_each_target_near(const Eigen::Vector3d& p, const std::function<void(std::size_t)>& fn) const {
  if (!p.allFinite()) return;
  const CellKey c = cell_of(p);
  const double r2 = radius_ * radius_;
  for (std::int64_t dx = -1; dx <= 1; ++dx) {
    for (std::int64_t dy = -1; dy <= 1; ++dy) {
      for (std::int64_t dz = -1; dz <= 1; ++dz) {
        auto it = grid_.find({c.x + dx, c.y + dy, c.z + dz});
        if (it == grid_.end()) continue;
        for (std::size_t idx : it->second) {
          if ((targets_[idx] - p).squaredNorm() <= r2) fn(idx);
        }
      }
    }
  }
}

void ReachabilityBinner::add_position(const Eigen::Vector3d& tip) {
  for_each_target_near(tip, [&](std::size_t idx) { ++counts_[idx]; });
}

void ReachabilityBinner::add(const SampleRecord& record) {
  if (record.collision_free) add_position(record.tip_pose.position);
}

void ReachabilityBinner::merge(const ReachabilityBinner& other) {
  if (other.counts_.size() != counts_.size()) throw InvalidArgument("cannot merge binners over different targets");
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
}

Heatmap ReachabilityBinner::heatmap() const { return {targets_, counts_, radius_}; }

Heatmap bin_reachability(const std::vector<SampleRecord>& records, const std::vector<Eigen::Vector3d>& targets,
                         double radius) {
  ReachabilityBinner binner(targets, radius);
  for (const auto& r : records) binner.add(r);
  return binner.heatmap();
}

ApproachCone approach_cones(const std::vector<SampleRecord>& records, const Eigen::Vector3d& target, double radius) {
  ApproachCone cone;
  const double r2 = radius * radius;
  for (const auto& r : records) {
    if (r.collision_free && (r.tip_pose.position - target).squaredNorm() <= r2) {
      cone.directions.push_back(r.tip_pose.rotation.col(2).normalized());
    }
  }
  if (cone.directions.empty()) return cone;
  Eigen::Vector3d sum = Eigen::Vector3d::Zero();
  for (const auto& d : cone.directions) sum += d;
  // Opposing directions cancel; fall back to the first direction as the cone axis.
  const Eigen::Vector3d mean = sum.norm() > 1e-12 ? Eigen::Vector3d(sum.normalized()) : cone.directions.front();
  double widest = 0.0;
  for (const auto& d : cone.directions) {
    widest = std::max(widest, std::atan2(d.cross(mean).norm(), d.dot(mean)));
  }
  cone.mean_direction = mean;
  cone.half_angle = widest;
  return cone;
}

void write_heatmap_csv(const Heatmap& heatmap, std::ostream& out) {
  const auto pct = heatmap.percentages();
  out << "x,y,z,count,percentage\n";
  char line[160];
  for (std::size_t i = 0; i < heatmap.targets.size(); ++i) {
    const auto& t = heatmap.targets[i];
    std::snprintf(line, sizeof line, "%.6f,%.6f,%.6f,%llu,%.4f\n", t.x(), t.y(), t.z(),
                  static_cast<unsigned long long>(heatmap.counts[i]), pct[i]);
    out << line;
  }
}

void export_heatmap(const Heatmap& heatmap, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write heatmap to " + path.string());
  write_heatmap_csv(heatmap, out);
  out.flush();
  if (!out) throw IoError("failed writing heatmap to " + path.string());
}

StudyResult run_workspace_study(const Scene& scene, const RobotBody& body, const SerialChain& chain,
                                const std::vector<Eigen::Vector3d>& targets, std::uint64_t n, std::uint64_t seed,
                                double radius, unsigned workers) {
  if (n < 1) throw InvalidArgument("workspace study needs at least one sample");
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  const std::uint64_t chunks = (n + kSampleChunk - 1) / kSampleChunk;
  workers = static_cast<unsigned>(std::min<std::uint64_t>(workers, chunks));

  struct Partial {
    ReachabilityBinner binner;
    std::uint64_t collision_free = 0;
  };
  std::vector<Partial> partials;
  partials.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) partials.push_back({ReachabilityBinner(targets, radius), 0});

  std::atomic<std::uint64_t> next_chunk{0};
  auto work = [&](Partial& part) {
    for (std::uint64_t c = next_chunk++; c < chunks; c = next_chunk++) {
      for_chunk(scene, body, chain, n, seed, c, [&](std::uint64_t, const SampleRecord& r) {
        if (!r.collision_free) return;
        ++part.collision_free;
        part.binner.add(r);
      });
    }
  };
  if (workers == 1) {
    work(partials.front());
  } else {
    std::vector<std::jthread> threads;
    for (unsigned w = 0; w < workers; ++w) threads.emplace_back(work, std::ref(partials[w]));
  }

  StudyResult result{partials.front().binner.heatmap(), n, 0};
  ReachabilityBinner total(targets, radius);
  for (const auto& p : partials) {
    total.merge(p.binner);
    result.collision_free += p.collision_free;
  }
  result.heatmap = total.heatmap();
  return result;
}

}  // namespace ctbot
