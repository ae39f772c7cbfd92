#include "cli.hpp"

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "ctbot/angles.hpp"
#include "ctbot/errors.hpp"
#include "ctbot/kinematics.hpp"
#include "ctbot/net/service.hpp"
#include "ctbot/robot_model.hpp"
#include "ctbot/scene.hpp"
#include "ctbot/simulator.hpp"
#include "ctbot/statics.hpp"
#include "ctbot/workspace.hpp"

#ifndef CTBOT_DEFAULT_CONFIG_DIR
#define CTBOT_DEFAULT_CONFIG_DIR "config"
#endif

namespace ctbot::cli {

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string num(double v, const char* format = "%.9g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

std::vector<double> parse_numbers(const std::string& text, std::size_t expected, const std::string& what) {
  std::vector<double> out;
  std::string token;
  std::stringstream ss(text);
  while (ss >> token) {
    std::stringstream parts(token);
    std::string part;
    while (std::getline(parts, part, ',')) {
      if (part.empty()) continue;
      char* end = nullptr;
      const double v = std::strtod(part.c_str(), &end);
      if (end == part.c_str() || *end != '\0' || !std::isfinite(v)) {
        throw UsageError(what + ": '" + part + "' is not a number");
      }
      out.push_back(v);
    }
  }
  if (out.size() != expected) {
    throw UsageError(what + ": expected " + std::to_string(expected) + " numbers, got " + std::to_string(out.size()));
  }
  return out;
}

JointVector to_joints(const std::vector<double>& v) {
  JointVector q;
  for (int i = 0; i < kNumJoints; ++i) q[i] = v[static_cast<std::size_t>(i)];
  return q;
}

double parse_timestep(const std::string& text) {
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  const std::string unit(end);
  double scale = 0.0;
  if (unit.empty() || unit == "s") scale = 1.0;
  if (unit == "ms") scale = 1e-3;
  if (unit == "us") scale = 1e-6;
  if (end == text.c_str() || scale == 0.0 || !(v > 0.0)) throw UsageError("--timestep: expected e.g. 1ms, got '" + text + "'");
  const double dt = v * scale;
  if (dt > 0.01) throw UsageError("--timestep must be at most 10ms");
  return dt;
}

std::filesystem::path config_dir() {
  if (const char* env = std::getenv("CTBOT_CONFIG_DIR")) return env;
  return CTBOT_DEFAULT_CONFIG_DIR;
}

struct Inputs {
  std::string model_path;
  std::string scene_path;

  RobotModel model() const {
    if (!model_path.empty()) return load_robot_model(model_path);
    const auto shipped = config_dir() / "robot_model.json";
    return std::filesystem::exists(shipped) ? load_robot_model(shipped) : default_robot_model();
  }

  std::pair<Scene, RobotBody> scene() const {
    if (!scene_path.empty()) return load_scene(scene_path);
    const auto shipped = config_dir() / "scene.json";
    if (std::filesystem::exists(shipped)) return load_scene(shipped);
    return {default_scene(), default_robot_body()};
  }
};

void print_pose(std::ostream& out, const Pose& pose, bool compact) {
  if (compact) {
    for (int i = 0; i < 3; ++i) out << (i ? " " : "") << num(pose.position[i], "%.17g");
    for (int i = 0; i < 9; ++i) out << ' ' << num(pose.rotation(i / 3, i % 3), "%.17g");
    out << '\n';
    return;
  }
  out << "position: " << num(pose.position.x()) << ' ' << num(pose.position.y()) << ' ' << num(pose.position.z())
      << '\n';
  out << "rotation:\n";
  for (int r = 0; r < 3; ++r) {
    out << "  " << num(pose.rotation(r, 0)) << ' ' << num(pose.rotation(r, 1)) << ' ' << num(pose.rotation(r, 2))
        << '\n';
  }
}

void print_joints(std::ostream& out, const JointVector& q) {
  for (int i = 0; i < kNumJoints; ++i) out << (i ? " " : "") << num(q[i], "%.12g");
  out << '\n';
}

const char* type_name(JointType t) {
  switch (t) {
    case JointType::prismatic: return "p";
    case JointType::revolute: return "r";
    case JointType::fixed: return "-";
  }
  return "?";
}

int cmd_model(const Inputs& inputs, bool as_json, std::ostream& out) {
  const RobotModel model = inputs.model();
  if (as_json) {
    out << robot_model_to_json(model).dump(2) << '\n';
    return 0;
  }
  out << "frame type a alpha d theta lower upper\n";
  for (int f = 1; f <= kNumFrames; ++f) {
    const DhRow& row = model.chain.dh.row(f);
    out << f << ' ' << type_name(row.type) << ' ' << num(row.a) << ' ' << num(row.alpha) << ' ' << num(row.d_offset)
        << ' ' << num(row.theta_offset);
    if (f <= kNumJoints) out << ' ' << num(model.chain.limits.lower[f - 1]) << ' ' << num(model.chain.limits.upper[f - 1]);
    out << '\n';
  }
  out << "mixing matrix (q = M m):\n";
  for (int r = 0; r < kNumJoints; ++r) {
    out << ' ';
    for (int c = 0; c < kNumJoints; ++c) out << ' ' << num(model.mixing.matrix()(r, c), "%10.4g");
    out << '\n';
  }
  out << "encoder: " << model.encoder.counts_per_motor_rev << " counts/motor rev x " << model.encoder.gear_ratio
      << " = " << num(model.encoder.counts_per_output_rev()) << " counts/output rev, "
      << num(model.encoder.resolution_deg(), "%.4g") << " deg/count\n";
  return 0;
}

int cmd_fk(const Inputs& inputs, const std::vector<std::string>& values, int frame, bool compact, std::ostream& out) {
  std::string joined;
  for (const auto& v : values) joined += v + ' ';
  const JointVector q = to_joints(parse_numbers(joined, kNumJoints, "q"));
  if (frame < 1 || frame > kNumFrames) throw UsageError("--frame must be in 1..8");
  const RobotModel model = inputs.model();
  const Pose pose = forward_kinematics(model.chain, q, frame);
  if (!compact) out << "frame " << frame << " (base frame, m)\n";
  print_pose(out, pose, compact);
  return 0;
}

struct IkOptions {
  std::string target;
  std::string q0;
  IkParams params;
};

int cmd_ik(const Inputs& inputs, const IkOptions& opts, std::ostream& out) {
  const auto t = parse_numbers(opts.target, 12, "--target");
  Pose target;
  target.position = Eigen::Vector3d(t[0], t[1], t[2]);
  for (int i = 0; i < 9; ++i) target.rotation(i / 3, i % 3) = t[3 + static_cast<std::size_t>(i)];
  if (target.orthonormality_error() > 1e-6 || target.rotation.determinant() < 0.0) {
    throw UsageError("--target rotation is not a proper rotation matrix");
  }
  const RobotModel model = inputs.model();
  const JointVector q0 = opts.q0.empty() ? JointVector(JointVector::Zero()) : to_joints(parse_numbers(opts.q0, 7, "--q0"));
  const IkResult r = ik_dls(model.chain, q0, target, opts.params);
  out << "converged: " << (r.converged ? "yes" : "no") << '\n';
  out << "iterations: " << r.iterations << '\n';
  out << "q: ";
  print_joints(out, r.q);
  out << "residual: " << num(r.position_residual, "%.6g") << " m " << num(r.orientation_residual, "%.6g") << " rad\n";
  return r.converged ? 0 : 1;
}

int cmd_statics(const Inputs& inputs, double force, std::ostream& out) {
  const RobotModel model = inputs.model();
  const auto tau = needle_torque_bounds(force, model.thrust_levers);
  out << "needle thrust F = " << num(force) << " N\n";
  out << "torque bounds (N m): joint4 " << num(tau[0]) << "  joint5 " << num(tau[1]) << "  joint6 " << num(tau[2])
      << '\n';
  const CableRun& run = model.joint4_cable;
  const double compliance = joint_compliance(run);
  const double k = endeffector_stiffness(run, model.thrust_levers.joint4);
  out << "joint4 cable: " << run.material.name << ", L0 " << num(run.free_length) << " m, A " << num(run.cross_section)
      << " m^2, r " << num(run.drive_pulley_radius) << " m (calibrated)\n";
  out << "joint compliance: " << num(compliance, "%.6g") << " rad/(N m)\n";
  out << "tip stiffness: " << num(k, "%.4g") << " N/mm (" << num(1.0 / k, "%.4g") << " mm/N)\n";
  out << "encoder resolution: " << num(model.encoder.resolution_deg(), "%.4g") << " deg/count\n";

  const LoadRatingReport plain = check_load_rating(tau, force, model.load_rating);
  const LoadRatingReport margin = check_load_rating(tau, force, model.load_rating, kGravityTorqueMargin);
  out << "load rating (demand / limit, with " << num(kGravityTorqueMargin) << " N m gravity margin):\n";
  for (std::size_t i = 0; i < margin.checks.size(); ++i) {
    const auto& c = margin.checks[i];
    out << "  " << c.item << ' ' << num(plain.checks[i].demand) << " (" << num(c.demand) << ") / " << num(c.limit)
        << ' ' << (c.pass && plain.checks[i].pass ? "PASS" : "FAIL") << '\n';
  }
  out << "cable materials:\n";
  for (const auto& m : model.cable_catalog) {
    out << "  " << m.name << ": E " << num(m.tensile_modulus / 1e9) << " GPa, strength "
        << num(m.tensile_strength / 1e9) << " GPa, D:d " << num(m.dd_ratio) << ":1, creep "
        << to_string(m.creep_resistance) << ", sourcing " << to_string(m.sourcing) << '\n';
  }
  return plain.all_pass() && margin.all_pass() ? 0 : 1;
}

struct WorkspaceOptions {
  std::uint64_t samples = 100'000;
  std::uint64_t seed = 1;
  std::string targets;
  std::string out_path;
  double radius = 5e-3;
  unsigned workers = 0;
  std::size_t cones = 0;
};

int cmd_workspace(const Inputs& inputs, const WorkspaceOptions& opts, std::ostream& out) {
  if (opts.samples == 0) throw UsageError("--samples must be >= 1");
  if (!(opts.radius > 0.0)) throw UsageError("--radius must be positive");
  const RobotModel model = inputs.model();
  const auto [scene, body] = inputs.scene();
  const std::vector<Eigen::Vector3d> targets =
      opts.targets.empty() ? scene.patient_vertices : load_vertex_list(opts.targets);
  if (targets.empty()) throw ConfigError("no targets: the scene has no patient vertices and --targets is not set");

  const StudyResult study =
      run_workspace_study(scene, body, model.chain, targets, opts.samples, opts.seed, opts.radius, opts.workers);
  if (opts.out_path.empty()) {
    write_heatmap_csv(study.heatmap, out);
    return 0;
  }
  export_heatmap(study.heatmap, opts.out_path);

  std::uint64_t reached = 0;
  for (auto c : study.heatmap.counts) reached += c > 0 ? 1 : 0;
  out << "samples: " << study.samples << '\n';
  out << "collision-free: " << study.collision_free << " (" << num(100.0 * study.collision_free_fraction(), "%.2f")
      << "%)\n";
  out << "targets reached: " << reached << " / " << targets.size() << ", max count " << study.heatmap.max_count()
      << '\n';

  std::vector<std::size_t> region;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (!scene.lung_region || scene.lung_region->contains(targets[i])) region.push_back(i);
  }
  if (scene.lung_region) {
    std::uint64_t lung_reached = 0;
    for (auto i : region) lung_reached += study.heatmap.counts[i] > 0 ? 1 : 0;
    out << "lung region targets reached: " << lung_reached << " / " << region.size() << '\n';
  }
  if (opts.cones > 0) {
    std::stable_sort(region.begin(), region.end(),
                     [&](auto a, auto b) { return study.heatmap.counts[a] > study.heatmap.counts[b]; });
    region.resize(std::min(region.size(), opts.cones));
    std::vector<Eigen::Vector3d> picked;
    for (auto i : region) picked.push_back(targets[i]);
    std::vector<SampleRecord> near;
    ReachabilityBinner finder(picked, opts.radius);
    sample_workspace(scene, body, model.chain, opts.samples, opts.seed, [&](std::uint64_t, const SampleRecord& r) {
      if (!r.collision_free) return;
      bool hit = false;
      finder.for_each_target_near(r.tip_pose.position, [&](std::size_t) { hit = true; });
      if (hit) near.push_back(r);
    });
    out << "approach cones (target, count, half-angle deg):\n";
    for (std::size_t k = 0; k < picked.size(); ++k) {
      const ApproachCone cone = approach_cones(near, picked[k], opts.radius);
      out << "  " << num(picked[k].x(), "%.4f") << ' ' << num(picked[k].y(), "%.4f") << ' '
          << num(picked[k].z(), "%.4f") << "  " << cone.directions.size() << "  "
          << (cone.half_angle ? num(rad2deg(*cone.half_angle), "%.2f") : std::string("-")) << '\n';
    }
  }
  out << "heatmap written to " << opts.out_path << '\n';
  return 0;
}

std::atomic<bool> g_interrupted{false};

extern "C" void on_signal(int) { g_interrupted = true; }

struct ServeOptions {
  std::string address = "127.0.0.1";
  unsigned short port = 8080;
  int controller_port = -1;
  std::string timestep = "1ms";
  bool realtime = false;
  bool fast = false;
  std::string static_root;
  std::string heatmap;
  double duration = 0.0;
  std::string record;
  bool no_guard = false;
  double telemetry_rate = 50.0;
};

int cmd_serve(const Inputs& inputs, const ServeOptions& opts, std::ostream& out) {
  if (opts.realtime && opts.fast) throw UsageError("--realtime and --fast are exclusive");
  if (opts.duration < 0.0) throw UsageError("--duration must be >= 0");
  if (opts.controller_port > 65535) throw UsageError("--controller-port out of range");
  const RobotModel model = inputs.model();
  auto [scene, body] = inputs.scene();

  SimulatorConfig sim;
  sim.controller.dt = parse_timestep(opts.timestep);
  sim.teleop.collision_guard = !opts.no_guard;

  net::ServiceConfig cfg;
  cfg.fast = opts.fast;
  cfg.telemetry_rate = opts.telemetry_rate;
  cfg.cockpit.address = opts.address;
  cfg.cockpit.port = opts.port;
  cfg.controller_address = opts.address;
  if (!opts.static_root.empty()) cfg.cockpit.static_root = opts.static_root;
  cfg.cockpit.routes["/scene.json"] = {"application/json", scene_to_json(scene, body).dump()};
  cfg.cockpit.routes["/model.json"] = {"application/json", robot_model_to_json(model).dump()};
  if (!opts.heatmap.empty()) {
    std::ifstream in(opts.heatmap);
    if (!in) throw IoError("cannot read heatmap " + opts.heatmap);
    std::ostringstream body_text;
    body_text << in.rdbuf();
    cfg.cockpit.routes["/heatmap.csv"] = {"text/csv; charset=utf-8", body_text.str()};
  }
  if (opts.controller_port >= 0) cfg.controller_port = static_cast<unsigned short>(opts.controller_port);
  if (opts.duration > 0.0) cfg.duration = opts.duration;
  if (!opts.record.empty()) cfg.record_path = opts.record;

  net::TeleopService service(model, std::move(scene), std::move(body), sim, cfg);
  out << "cockpit: http://" << opts.address << ':' << service.cockpit_port() << "/ (websocket /ws)\n";
  if (auto p = service.controller_port()) out << "controller: tcp " << opts.address << ':' << *p << '\n';
  out << "mode: " << (opts.fast ? "fast (client-stepped)" : "realtime") << '\n' << std::flush;

  g_interrupted = false;
  auto previous_int = std::signal(SIGINT, on_signal);
  auto previous_term = std::signal(SIGTERM, on_signal);
  while (service.running() && !g_interrupted) std::this_thread::sleep_for(std::chrono::milliseconds(20));
  std::signal(SIGINT, previous_int);
  std::signal(SIGTERM, previous_term);
  service.stop();
  return 0;
}

int cmd_replay(const Inputs& inputs, const std::string& trace_path, std::uint64_t ticks, bool guard,
               const std::string& out_path, std::ostream& out) {
  const auto trace = load_trace(trace_path);
  const RobotModel model = inputs.model();
  auto [scene, body] = inputs.scene();
  SimulatorConfig sim_config;
  sim_config.teleop.collision_guard = guard;
  Simulator sim(model, std::move(scene), std::move(body), sim_config);
  const auto setpoints = sim.run_trace(trace, ticks);

  std::ofstream file;
  if (!out_path.empty()) {
    file.open(out_path);
    if (!file) throw IoError("cannot write " + out_path);
  }
  std::ostream& sink = out_path.empty() ? out : file;
  sink << "tick,a1,a2,a3,a4,a5,a6,a7,a8\n";
  for (std::size_t i = 0; i < setpoints.size(); ++i) {
    sink << i;
    for (auto c : setpoints[i]) sink << ',' << c;
    sink << '\n';
  }
  return 0;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Digital twin of a 7-DoF CT-guided biopsy arm"};
  app.require_subcommand(1);
  Inputs inputs;
  app.add_option("--model", inputs.model_path, "robot model file (JSON)");
  app.add_option("--scene", inputs.scene_path, "scene file (JSON)");

  bool model_json = false;
  auto* model_cmd = app.add_subcommand("model", "print the robot model");
  model_cmd->add_flag("--json", model_json, "print the model file instead of tables");

  std::vector<std::string> fk_q;
  int fk_frame = kToolFrame;
  bool fk_compact = false;
  auto* fk = app.add_subcommand("fk", "forward kinematics");
  fk->add_option("q", fk_q, "seven joint values (m, rad)")->required()->expected(1, 7);
  fk->add_option("--frame", fk_frame, "frame index 1..8")->capture_default_str();
  fk->add_flag("--compact", fk_compact, "print x y z r11..r33 on one line");

  IkOptions ik_opts;
  auto* ik = app.add_subcommand("ik", "damped-least-squares inverse kinematics");
  ik->add_option("--target", ik_opts.target, "target pose: x y z r11 r12 r13 r21 r22 r23 r31 r32 r33")->required();
  ik->add_option("--q0", ik_opts.q0, "initial joints (default zero)");
  ik->add_option("--damping", ik_opts.params.damping, "lambda")->capture_default_str();
  ik->add_option("--max-iterations", ik_opts.params.max_iterations, "")->capture_default_str();
  ik->add_option("--position-tol", ik_opts.params.position_tol, "m")->capture_default_str();
  ik->add_option("--orientation-tol", ik_opts.params.orientation_tol, "rad")->capture_default_str();
  ik->add_option("--step-clamp", ik_opts.params.step_clamp, "max joint step per iteration")->capture_default_str();

  double force = 8.0;
  auto* statics = app.add_subcommand("statics", "needle-load torques, stiffness and load ratings");
  statics->add_option("--force", force, "needle thrust in N")->capture_default_str()->check(CLI::NonNegativeNumber);

  WorkspaceOptions ws;
  auto* workspace = app.add_subcommand("workspace", "Monte Carlo collision-free reachability heat map");
  workspace->add_option("--samples", ws.samples, "joint configurations")->capture_default_str();
  workspace->add_option("--seed", ws.seed, "")->capture_default_str();
  workspace->add_option("--targets", ws.targets, "vertex list (x y z per line); default: scene patient vertices");
  workspace->add_option("--out", ws.out_path, "heat-map CSV; without it the CSV goes to stdout");
  workspace->add_option("--radius", ws.radius, "binning radius in m")->capture_default_str();
  workspace->add_option("--workers", ws.workers, "threads (0 = all cores)")->capture_default_str();
  workspace->add_option("--cones", ws.cones, "print approach cones for the K best lung-region targets")->capture_default_str();

  ServeOptions sv;
  auto* serve = app.add_subcommand("serve", "run the simulated controller, teleop loop and cockpit endpoint");
  serve->add_option("--address", sv.address, "")->capture_default_str();
  serve->add_option("--port", sv.port, "cockpit HTTP/WebSocket port (0 = any)")->capture_default_str();
  serve->add_option("--controller-port", sv.controller_port, "TCP setpoint server port (default off, 0 = any)");
  serve->add_option("--timestep", sv.timestep, "control period")->capture_default_str();
  serve->add_flag("--realtime", sv.realtime, "pace the loop against the wall clock (default)");
  serve->add_flag("--fast", sv.fast, "advance only on client step messages");
  serve->add_option("--static", sv.static_root, "directory served over HTTP (cockpit build)");
  serve->add_option("--heatmap", sv.heatmap, "heat-map CSV served at /heatmap.csv");
  serve->add_option("--duration", sv.duration, "stop after this many simulated seconds");
  serve->add_option("--record", sv.record, "append applied cockpit messages to a trace file");
  serve->add_option("--telemetry-rate", sv.telemetry_rate, "Hz")->capture_default_str();
  serve->add_flag("--no-guard", sv.no_guard, "disable the collision guard");

  std::string trace_path, replay_out;
  std::uint64_t replay_ticks = 0;
  bool replay_guard = false;
  auto* replay = app.add_subcommand("replay", "replay an input trace and print the setpoint trace");
  replay->add_option("--trace", trace_path, "input trace (JSON lines)")->required();
  replay->add_option("--ticks", replay_ticks, "teleop ticks to run")->required();
  replay->add_option("--out", replay_out, "CSV output (default stdout)");
  replay->add_flag("--guard", replay_guard, "enable the collision guard");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 2;
  }

  try {
    if (model_cmd->parsed()) return cmd_model(inputs, model_json, out);
    if (fk->parsed()) return cmd_fk(inputs, fk_q, fk_frame, fk_compact, out);
    if (ik->parsed()) return cmd_ik(inputs, ik_opts, out);
    if (statics->parsed()) return cmd_statics(inputs, force, out);
    if (workspace->parsed()) return cmd_workspace(inputs, ws, out);
    if (serve->parsed()) return cmd_serve(inputs, sv, out);
    if (replay->parsed()) return cmd_replay(inputs, trace_path, replay_ticks, replay_guard, replay_out, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const LimitViolation& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace ctbot::cli
