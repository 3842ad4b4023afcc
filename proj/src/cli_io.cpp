// Copyright 2026 The dexgrasp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dexgrasp/cli_io.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "dexgrasp/errors.hpp"

namespace dexgrasp {

using nlohmann::json;

namespace {

json vec3_to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Vec3 vec3_from_json(const json& j) {
  if (!j.is_array() || j.size() != 3) throw ParseError("expected a 3-vector");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

json rotation_to_json(const Rotation& r) {
  const Eigen::Vector4d q = r.quaternion();
  return json::array({q[0], q[1], q[2], q[3]});
}

Rotation rotation_from_json(const json& j) {
  if (!j.is_array() || j.size() != 4) throw ParseError("expected a quaternion (w,x,y,z)");
  return Rotation::from_quaternion(j[0].get<double>(), j[1].get<double>(),
                                   j[2].get<double>(), j[3].get<double>());
}

json transform_to_json(const RigidTransform& t) {
  return {{"q", rotation_to_json(t.rotation)}, {"t", vec3_to_json(t.translation)}};
}

RigidTransform transform_from_json(const json& j) {
  return RigidTransform(rotation_from_json(j.at("q")), vec3_from_json(j.at("t")));
}

json hand_pose_to_json(const HandPose& p) {
  json joints = json::array();
  for (int i = 0; i < p.q.size(); ++i) joints.push_back(p.q[i]);
  return {{"rq", rotation_to_json(p.root.rotation)},
          {"t", vec3_to_json(p.root.translation)},
          {"joints", joints}};
}

HandPose hand_pose_from_json(const json& j) {
  HandPose p;
  p.root = RigidTransform(rotation_from_json(j.at("rq")), vec3_from_json(j.at("t")));
  const json& joints = j.at("joints");
  p.q.resize(joints.size());
  for (std::size_t i = 0; i < joints.size(); ++i) p.q[i] = joints[i].get<double>();
  return p;
}

/// Key-checked reader: every key must be consumed exactly once.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string context)
      : j_(j), context_(std::move(context)) {
    if (!j.is_object()) throw ParseError(context_ + ": expected a JSON object");
  }
  const json* get(const char* key) {
    seen_.push_back(key);
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }
  const json& require(const char* key) {
    const json* v = get(key);
    if (!v) throw ParseError(context_ + ": missing key '" + key + "'");
    return *v;
  }
  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (std::find(seen_.begin(), seen_.end(), key) == seen_.end()) {
        throw ParseError(context_ + ": unknown key '" + key + "'");
      }
    }
  }

 private:
  const json& j_;
  std::string context_;
  std::vector<std::string> seen_;
};

void check_scale(double scale, bool strict) {
  if (!strict) return;
  for (double s : allowed_scales()) {
    if (std::abs(scale - s) <= 1e-12) return;
  }
  std::ostringstream msg;
  msg << "record scale " << scale << " is not in the allowed set "
      << "{0.06, 0.08, 0.10, 0.12, 0.15}";
  throw InvalidInputError(msg.str());
}

}  // namespace

json GraspRecord::to_json() const {
  json j;
  j["v"] = 1;
  j["object_id"] = object_id;
  j["scale"] = scale;
  j["object_pose"] = transform_to_json(object_pose);
  j["hand_pose"] = hand_pose_to_json(hand_pose);
  if (metrics) j["metrics"] = *metrics;
  j["seed"] = seed;
  j["config_hash"] = config_hash;
  return j;
}

GraspRecord GraspRecord::from_json(const json& j) {
  ObjectReader r(j, "grasp record");
  const int version = r.require("v").get<int>();
  if (version != 1) throw ParseError("grasp record: unsupported version");
  GraspRecord rec;
  rec.object_id = r.require("object_id").get<std::string>();
  rec.scale = r.require("scale").get<double>();
  rec.object_pose = transform_from_json(r.require("object_pose"));
  rec.hand_pose = hand_pose_from_json(r.require("hand_pose"));
  if (const json* m = r.get("metrics")) rec.metrics = *m;
  rec.seed = r.require("seed").get<std::uint64_t>();
  rec.config_hash = r.require("config_hash").get<std::string>();
  r.finish();
  return rec;
}

std::vector<GraspRecord> read_records(const std::string& path, bool strict) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open record file: " + path);
  std::vector<GraspRecord> records;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      GraspRecord rec = GraspRecord::from_json(j);
      check_scale(rec.scale, strict);
      records.push_back(std::move(rec));
    } catch (const json::exception& e) {
      throw ParseError(path + ":" + std::to_string(lineno) + ": " + e.what());
    } catch (const std::exception& e) {
      throw ParseError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return records;
}

void write_records(const std::string& path, const std::vector<GraspRecord>& records,
                   bool strict) {
  for (const GraspRecord& rec : records) check_scale(rec.scale, strict);
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open record file for writing: " + path);
  for (const GraspRecord& rec : records) out << rec.to_json().dump() << "\n";
}

// ---------------------------------------------------------------------------
// RunConfig

json RunConfig::to_json() const {
  json j;
  j["version"] = 1;
  j["synthesis_weights"] = {{"w_dis", synthesis_weights.w_dis},
                            {"w_pen", synthesis_weights.w_pen},
                            {"w_tpen", synthesis_weights.w_tpen},
                            {"w_joints", synthesis_weights.w_joints},
                            {"w_spen", synthesis_weights.w_spen}};
  j["tta_weights"] = {{"lambda_cmap", tta_weights.lambda_cmap},
                      {"lambda_pen", tta_weights.lambda_pen},
                      {"lambda_tpen", tta_weights.lambda_tpen},
                      {"lambda_spen", tta_weights.lambda_spen},
                      {"step_size", tta_weights.step_size}};
  j["joint_loss_weights"] = {{"lambda_cmap", joint_loss_weights.lambda_cmap},
                             {"lambda_pen", joint_loss_weights.lambda_pen},
                             {"lambda_tpen", joint_loss_weights.lambda_tpen},
                             {"lambda_spen", joint_loss_weights.lambda_spen}};
  auto optimizer_json = [](const OptimizerConfig& c) {
    return json{{"steps", c.steps},
                {"rot_step", c.rot_step},
                {"trans_step", c.trans_step},
                {"joint_step", c.joint_step},
                {"step_size", c.step_size},
                {"line_search", c.line_search},
                {"max_backtracks", c.max_backtracks},
                {"langevin", c.langevin},
                {"langevin_temperature", c.langevin_temperature}};
  };
  j["optimizer"] = optimizer_json(optimizer);
  j["tta_optimizer"] = optimizer_json(tta_optimizer);
  j["quality"] = {{"contact_tolerance", quality.contact_tolerance},
                  {"invalid_table_pen", quality.invalid_table_pen},
                  {"invalid_obj_pen", quality.invalid_obj_pen},
                  {"q1_directions", quality.q1_directions},
                  {"torque_scale", quality.torque_scale},
                  {"direction_seed", quality.direction_seed}};
  j["friction"] = {{"mu", friction.mu}, {"cone_edges", friction.cone_edges}};
  j["reward"] = {{"w_gq", reward.w_gq},   {"w_gt", reward.w_gt},
                 {"w_gR", reward.w_gr},   {"w_r", reward.w_r},
                 {"w_l", reward.w_l},     {"w_m", reward.w_m},
                 {"w_b", reward.w_b},     {"lambda_f1", reward.lambda_f1},
                 {"lambda_f2", reward.lambda_f2}, {"lambda_0", reward.lambda_0}};
  j["validation"] = {{"max_penetration", validation_max_penetration},
                     {"mass", validation_mass}};
  j["io"] = {{"hand_cloud_samples", hand_cloud_samples},
             {"strict_scales", strict_scales}};
  return j;
}

RunConfig RunConfig::from_json(const json& j) {
  RunConfig c;
  ObjectReader top(j, "config");
  const int version = top.require("version").get<int>();
  if (version != 1) throw ParseError("config: unsupported version");

  auto read_section = [&](const char* name, auto&& fill) {
    if (const json* section = top.get(name)) {
      ObjectReader r(*section, std::string("config.") + name);
      fill(r);
      r.finish();
    }
  };
  auto opt_double = [](ObjectReader& r, const char* key, double& dst) {
    if (const json* v = r.get(key)) dst = v->get<double>();
  };

  read_section("synthesis_weights", [&](ObjectReader& r) {
    opt_double(r, "w_dis", c.synthesis_weights.w_dis);
    opt_double(r, "w_pen", c.synthesis_weights.w_pen);
    opt_double(r, "w_tpen", c.synthesis_weights.w_tpen);
    opt_double(r, "w_joints", c.synthesis_weights.w_joints);
    opt_double(r, "w_spen", c.synthesis_weights.w_spen);
  });
  read_section("tta_weights", [&](ObjectReader& r) {
    opt_double(r, "lambda_cmap", c.tta_weights.lambda_cmap);
    opt_double(r, "lambda_pen", c.tta_weights.lambda_pen);
    opt_double(r, "lambda_tpen", c.tta_weights.lambda_tpen);
    opt_double(r, "lambda_spen", c.tta_weights.lambda_spen);
    opt_double(r, "step_size", c.tta_weights.step_size);
  });
  read_section("joint_loss_weights", [&](ObjectReader& r) {
    opt_double(r, "lambda_cmap", c.joint_loss_weights.lambda_cmap);
    opt_double(r, "lambda_pen", c.joint_loss_weights.lambda_pen);
    opt_double(r, "lambda_tpen", c.joint_loss_weights.lambda_tpen);
    opt_double(r, "lambda_spen", c.joint_loss_weights.lambda_spen);
  });
  auto read_optimizer = [&](const char* name, OptimizerConfig& dst) {
    read_section(name, [&](ObjectReader& r) {
      if (const json* v = r.get("steps")) dst.steps = v->get<int>();
      opt_double(r, "rot_step", dst.rot_step);
      opt_double(r, "trans_step", dst.trans_step);
      opt_double(r, "joint_step", dst.joint_step);
      opt_double(r, "step_size", dst.step_size);
      if (const json* v = r.get("line_search")) dst.line_search = v->get<bool>();
      if (const json* v = r.get("max_backtracks")) dst.max_backtracks = v->get<int>();
      if (const json* v = r.get("langevin")) dst.langevin = v->get<bool>();
      opt_double(r, "langevin_temperature", dst.langevin_temperature);
    });
  };
  read_optimizer("optimizer", c.optimizer);
  read_optimizer("tta_optimizer", c.tta_optimizer);
  read_section("quality", [&](ObjectReader& r) {
    opt_double(r, "contact_tolerance", c.quality.contact_tolerance);
    opt_double(r, "invalid_table_pen", c.quality.invalid_table_pen);
    opt_double(r, "invalid_obj_pen", c.quality.invalid_obj_pen);
    if (const json* v = r.get("q1_directions")) c.quality.q1_directions = v->get<int>();
    opt_double(r, "torque_scale", c.quality.torque_scale);
    if (const json* v = r.get("direction_seed")) {
      c.quality.direction_seed = v->get<std::uint64_t>();
    }
  });
  read_section("friction", [&](ObjectReader& r) {
    opt_double(r, "mu", c.friction.mu);
    if (const json* v = r.get("cone_edges")) c.friction.cone_edges = v->get<int>();
  });
  read_section("reward", [&](ObjectReader& r) {
    opt_double(r, "w_gq", c.reward.w_gq);
    opt_double(r, "w_gt", c.reward.w_gt);
    opt_double(r, "w_gR", c.reward.w_gr);
    opt_double(r, "w_r", c.reward.w_r);
    opt_double(r, "w_l", c.reward.w_l);
    opt_double(r, "w_m", c.reward.w_m);
    opt_double(r, "w_b", c.reward.w_b);
    opt_double(r, "lambda_f1", c.reward.lambda_f1);
    opt_double(r, "lambda_f2", c.reward.lambda_f2);
    opt_double(r, "lambda_0", c.reward.lambda_0);
  });
  read_section("validation", [&](ObjectReader& r) {
    opt_double(r, "max_penetration", c.validation_max_penetration);
    opt_double(r, "mass", c.validation_mass);
  });
  read_section("io", [&](ObjectReader& r) {
    if (const json* v = r.get("hand_cloud_samples")) {
      c.hand_cloud_samples = v->get<std::size_t>();
    }
    if (const json* v = r.get("strict_scales")) c.strict_scales = v->get<bool>();
  });
  top.finish();
  return c;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  return from_json(j);
}

std::string RunConfig::hash() const {
  const std::string canonical = to_json().dump();
  std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
  for (unsigned char ch : canonical) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---------------------------------------------------------------------------
// Scenes

namespace {

SceneBundle builtin_scene(const std::string& spec) {
  const std::size_t colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  double size = kind == "sphere" ? 0.04 : 0.08;
  std::size_t n = 512;
  std::uint64_t seed = 1;
  if (colon != std::string::npos) {
    std::stringstream args(spec.substr(colon + 1));
    std::string item;
    while (std::getline(args, item, ',')) {
      const std::size_t eq = item.find('=');
      if (eq == std::string::npos) throw ParseError("scene spec: expected key=value");
      const std::string key = item.substr(0, eq);
      const std::string val = item.substr(eq + 1);
      if (key == "r" || key == "edge") {
        size = std::stod(val);
      } else if (key == "n") {
        n = std::stoull(val);
      } else if (key == "seed") {
        seed = std::stoull(val);
      } else {
        throw ParseError("scene spec: unknown key '" + key + "'");
      }
    }
  }
  SceneBundle bundle;
  if (kind == "sphere") {
    bundle.scene = make_sphere_scene(size, n, seed);
    bundle.object_id = "sphere";
    bundle.scale = 2.0 * size;
  } else {
    bundle.scene = make_box_scene(size, n, seed);
    bundle.object_id = "box";
    bundle.scale = size;
  }
  return bundle;
}

}  // namespace

SceneBundle load_scene(const std::string& spec) {
  if (spec.rfind("sphere", 0) == 0 || spec.rfind("box", 0) == 0) {
    return builtin_scene(spec);
  }
  std::ifstream in(spec);
  if (!in) throw ParseError("cannot open scene file: " + spec);
  SceneBundle bundle;
  read_ply(in, bundle.scene.points, bundle.scene.normals);
  bundle.object_id = std::filesystem::path(spec).stem().string();
  const std::string sidecar = spec + ".json";
  if (std::ifstream side(sidecar); side) {
    json j;
    try {
      side >> j;
    } catch (const json::exception& e) {
      throw ParseError(sidecar + ": " + e.what());
    }
    ObjectReader r(j, sidecar);
    if (const json* v = r.get("object_id")) bundle.object_id = v->get<std::string>();
    if (const json* v = r.get("scale")) bundle.scale = v->get<double>();
    if (const json* v = r.get("object_pose")) {
      bundle.scene.object_pose = transform_from_json(*v);
    }
    r.finish();
  }
  return bundle;
}

void save_scene(const std::string& path, const SceneBundle& bundle) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open scene file for writing: " + path);
  write_ply(out, bundle.scene.points, bundle.scene.normals);
  json side;
  side["object_id"] = bundle.object_id;
  side["scale"] = bundle.scale;
  side["object_pose"] = transform_to_json(bundle.scene.object_pose);
  std::ofstream sout(path + ".json");
  sout << side.dump(2) << "\n";
}

ContactMap read_target_map(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open target map: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  ObjectReader r(j, path);
  if (r.require("v").get<int>() != 1) throw ParseError("target map: unsupported version");
  ContactMap map;
  for (const json& h : r.require("heat")) map.heat.push_back(h.get<double>());
  r.finish();
  return map;
}

void write_target_map(const std::string& path, const ContactMap& map) {
  json j;
  j["v"] = 1;
  j["heat"] = map.heat;
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open target map for writing: " + path);
  out << j.dump() << "\n";
}

RolloutState rollout_state_from_json(const json& j, const HandModel& model) {
  ObjectReader r(j, "rollout state");
  const HandPose hand = hand_pose_from_json(r.require("hand"));
  const Vec3 object_position = vec3_from_json(r.require("object_position"));
  const Rotation object_rotation = rotation_from_json(r.require("object_rotation"));
  const HandPose goal = hand_pose_from_json(r.require("goal"));
  const double a_z = r.require("a_z").get<double>();
  const Vec3 target = vec3_from_json(r.require("target_position"));

  RolloutState s = make_rollout_state(model, hand, object_position, object_rotation,
                                      goal, a_z, target);
  if (const json* v = r.get("fingertips")) {
    s.fingertips.clear();
    for (const json& p : *v) s.fingertips.push_back(vec3_from_json(p));
  }
  if (const json* v = r.get("keypoints")) {
    s.keypoints.clear();
    for (const json& p : *v) s.keypoints.push_back(vec3_from_json(p));
  }
  if (const json* v = r.get("goal_keypoints_obj")) {
    s.goal_keypoints_obj.clear();
    for (const json& p : *v) s.goal_keypoints_obj.push_back(vec3_from_json(p));
  }
  r.finish();
  return s;
}

std::size_t worker_count() {
  if (const char* env = std::getenv("DEXGRASP_WORKERS")) {
    const long n = std::strtol(env, nullptr, 10);
    if (n >= 1) return static_cast<std::size_t>(n);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? hw : 1;
}

void run_parallel(std::size_t jobs, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min(worker_count(), std::max<std::size_t>(jobs, 1));
  if (workers <= 1) {
    for (std::size_t i = 0; i < jobs; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      while (true) {
        const std::size_t i = next.fetch_add(1);
        if (i >= jobs) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (std::thread& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace dexgrasp
