// Copyright 2026 The warpfuse Authors
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

#include "warpfuse/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include <nlohmann/json.hpp>

#include "warpfuse/error.hpp"
#include "warpfuse/parallel.hpp"
#include "warpfuse/rng.hpp"

namespace warpfuse {

namespace {

constexpr double kPi = 3.141592653589793;

struct Hit {
  double t = std::numeric_limits<double>::infinity();
  int class_id = -1;
  int axis = -1;  // normal axis, for checker uv selection
};

// Exit point of a ray starting inside the room box; the room is watertight
// so an exit always exists for finite directions.
Hit intersect_room(const Eigen::Vector3d& origin, const Eigen::Vector3d& dir,
                   const SceneSpec& spec) {
  Hit hit;
  for (int a = 0; a < 3; ++a) {
    if (dir[a] == 0.0) continue;
    const double bound = dir[a] > 0.0 ? spec.room_max[a] : spec.room_min[a];
    const double t = (bound - origin[a]) / dir[a];
    if (t > 0.0 && t < hit.t) {
      hit.t = t;
      hit.axis = a;
      if (a == 2)
        hit.class_id = dir[a] > 0.0 ? spec.ceiling_class : spec.floor_class;
      else
        hit.class_id = spec.wall_class;
    }
  }
  return hit;
}

// Slab test for a ray starting outside the box; returns entry point only.
bool intersect_box(const Eigen::Vector3d& origin, const Eigen::Vector3d& dir,
                   const SceneBox& box, Hit* hit) {
  double t_near = -std::numeric_limits<double>::infinity();
  double t_far = std::numeric_limits<double>::infinity();
  int near_axis = -1;
  for (int a = 0; a < 3; ++a) {
    if (dir[a] == 0.0) {
      if (origin[a] < box.min[a] || origin[a] > box.max[a]) return false;
      continue;
    }
    double t0 = (box.min[a] - origin[a]) / dir[a];
    double t1 = (box.max[a] - origin[a]) / dir[a];
    if (t0 > t1) std::swap(t0, t1);
    if (t0 > t_near) {
      t_near = t0;
      near_axis = a;
    }
    t_far = std::min(t_far, t1);
    if (t_near > t_far) return false;
  }
  if (!(t_near > 0.0)) return false;  // behind or inside
  hit->t = t_near;
  hit->class_id = box.class_id;
  hit->axis = near_axis;
  return true;
}

double checker_factor(const TextureSpec& tex, const Eigen::Vector3d& point,
                      int normal_axis) {
  if (tex.type != TextureSpec::Type::kChecker) return 1.0;
  const int u_axis = normal_axis == 0 ? 1 : 0;
  const int v_axis = normal_axis == 2 ? 1 : 2;
  const long long cu =
      static_cast<long long>(std::floor(point[u_axis] / tex.period));
  const long long cv =
      static_cast<long long>(std::floor(point[v_axis] / tex.period));
  return ((cu + cv) % 2 + 2) % 2 == 0 ? 1.0 : tex.contrast;
}

std::uint8_t quantize8(double v) {
  return static_cast<std::uint8_t>(
      std::lround(std::min(1.0, std::max(0.0, v)) * 255.0));
}

}  // namespace

void SceneSpec::validate() const {
  intrinsics.validate();
  if (num_classes <= 0 || num_classes > 254)
    throw ContractError("scene spec: num_classes out of range");
  if (static_cast<int>(albedo.size()) < num_classes)
    throw ContractError("scene spec: missing albedo for some classes");
  for (int a = 0; a < 3; ++a)
    if (!(room_min[a] < room_max[a]))
      throw ContractError("scene spec: degenerate room extents");
  for (const SceneBox& box : boxes) {
    for (int a = 0; a < 3; ++a) {
      if (!(box.min[a] < box.max[a]))
        throw ContractError("scene spec: degenerate box");
      if (box.min[a] < room_min[a] || box.max[a] > room_max[a])
        throw ContractError("scene spec: box outside the room");
    }
    if (box.class_id < 0 || box.class_id >= num_classes)
      throw ContractError("scene spec: box class id out of range");
  }
  const auto check_class = [&](int c) {
    if (c < 0 || c >= num_classes)
      throw ContractError("scene spec: surface class id out of range");
  };
  check_class(floor_class);
  check_class(ceiling_class);
  check_class(wall_class);
  if (trajectory.frame_count < 1)
    throw ContractError("scene spec: trajectory needs at least one frame");
  if (!(trajectory.radius > 0.0))
    throw ContractError("scene spec: orbit radius must be positive");
  if (noise.color_sigma < 0.0 || noise.depth_dropout < 0.0 ||
      noise.depth_dropout > 1.0)
    throw ContractError("scene spec: invalid noise parameters");
}

RigidTransform orbit_pose(const OrbitTrajectory& traj, int i) {
  const double span = traj.angle_end - traj.angle_start;
  const double theta =
      traj.angle_start +
      span * static_cast<double>(i) / static_cast<double>(traj.frame_count);
  const Eigen::Vector3d position =
      traj.center + Eigen::Vector3d(traj.radius * std::cos(theta),
                                    traj.radius * std::sin(theta),
                                    traj.height);
  // Look-at with z-up world; camera axes: x right, y down, z forward.
  const Eigen::Vector3d forward = (traj.center - position).normalized();
  const Eigen::Vector3d up(0.0, 0.0, 1.0);
  Eigen::Vector3d right = forward.cross(up);
  const double norm = right.norm();
  if (norm < 1e-12)
    throw ContractError("orbit_pose: camera looks along the world up axis");
  right /= norm;
  const Eigen::Vector3d down = forward.cross(right);

  RigidTransform pose;
  pose.rotation.col(0) = right;
  pose.rotation.col(1) = down;
  pose.rotation.col(2) = forward;
  pose.translation = position;
  return pose;
}

SceneSequence render(const SceneSpec& spec) {
  spec.validate();
  const int w = spec.intrinsics.width, h = spec.intrinsics.height;
  const OrbitTrajectory& traj = spec.trajectory;

  SceneSequence seq;
  seq.num_classes = spec.num_classes;
  seq.frames.resize(static_cast<std::size_t>(traj.frame_count));

  parallel_for(0, traj.frame_count, [&](int i) {
    Frame frame;
    frame.index = i;
    frame.intrinsics = spec.intrinsics;
    frame.pose = orbit_pose(traj, i);
    frame.color = Field<float>(w, h, 3);
    frame.depth = Grid<float>(w, h);
    frame.labels = LabelMap(w, h, kIgnoreLabel);

    // Per-frame stream keeps rendering deterministic under parallelism.
    Rng rng(Rng::derive(spec.seed, static_cast<std::uint64_t>(i)));

    const Eigen::Vector3d origin = frame.pose.translation;
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        // Camera-frame direction with unit z: the ray parameter equals the
        // camera z-depth of the hit.
        const Eigen::Vector3d dir_cam((x - spec.intrinsics.cx) /
                                          spec.intrinsics.fx,
                                      (y - spec.intrinsics.cy) /
                                          spec.intrinsics.fy,
                                      1.0);
        const Eigen::Vector3d dir = frame.pose.rotation * dir_cam;

        Hit best = intersect_room(origin, dir, spec);
        for (const SceneBox& box : spec.boxes) {
          Hit hit;
          if (intersect_box(origin, dir, box, &hit) && hit.t < best.t)
            best = hit;
        }

        const Eigen::Vector3d point = origin + best.t * dir;
        const double factor = checker_factor(spec.texture, point, best.axis);
        const auto& base = spec.albedo[static_cast<std::size_t>(best.class_id)];
        for (int c = 0; c < 3; ++c) {
          double v = base[static_cast<std::size_t>(c)] * factor;
          if (spec.noise.color_sigma > 0.0)
            v += rng.normal(0.0, spec.noise.color_sigma);
          frame.color.at(x, y, c) = static_cast<float>(quantize8(v)) / 255.0f;
        }

        double depth = best.t;
        if (spec.noise.depth_dropout > 0.0 &&
            rng.uniform() < spec.noise.depth_dropout)
          depth = 0.0;
        // Quantize to the 16-bit millimeter storage format up front.
        const double mm =
            std::min(65535.0, std::max(0.0, std::round(depth * 1000.0)));
        frame.depth.at(x, y) = static_cast<float>(mm) / 1000.0f;
        frame.labels->at(x, y) = static_cast<std::uint8_t>(best.class_id);
      }
    }
    seq.frames[static_cast<std::size_t>(i)] = std::move(frame);
  });
  return seq;
}

SceneSpec load_scene_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open scene spec: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("scene spec is not valid JSON: " + std::string(e.what()));
  }

  const auto vec3 = [](const nlohmann::json& a) {
    return Eigen::Vector3d(a.at(0).get<double>(), a.at(1).get<double>(),
                           a.at(2).get<double>());
  };
  try {
    SceneSpec spec;
    spec.room_min = vec3(j.at("room").at("min"));
    spec.room_max = vec3(j.at("room").at("max"));
    spec.floor_class = j.value("floor_class", 0);
    spec.ceiling_class = j.value("ceiling_class", 1);
    spec.wall_class = j.value("wall_class", 2);
    spec.num_classes = j.value("num_classes", 4);
    spec.seed = j.value("seed", std::uint64_t{1});
    for (const auto& b : j.value("boxes", nlohmann::json::array())) {
      SceneBox box;
      box.min = vec3(b.at("min"));
      box.max = vec3(b.at("max"));
      box.class_id = b.at("class").get<int>();
      spec.boxes.push_back(box);
    }
    for (const auto& a : j.at("albedo"))
      spec.albedo.push_back({a.at(0).get<double>(), a.at(1).get<double>(),
                             a.at(2).get<double>()});
    if (j.contains("texture")) {
      const auto& t = j.at("texture");
      const std::string type = t.value("type", "flat");
      if (type == "checker")
        spec.texture.type = TextureSpec::Type::kChecker;
      else if (type != "flat")
        throw ContractError("scene spec: unknown texture type " + type);
      spec.texture.period = t.value("period", 0.5);
      spec.texture.contrast = t.value("contrast", 0.6);
    }
    const auto& traj = j.at("trajectory");
    spec.trajectory.center = vec3(traj.at("center"));
    spec.trajectory.radius = traj.at("radius").get<double>();
    spec.trajectory.height = traj.at("height").get<double>();
    spec.trajectory.angle_start = traj.value("angle_start", 0.0);
    spec.trajectory.angle_end = traj.value("angle_end", 2.0 * kPi);
    spec.trajectory.frame_count = traj.at("frames").get<int>();
    const auto& k = j.at("intrinsics");
    spec.intrinsics.fx = k.at("fx").get<double>();
    spec.intrinsics.fy = k.at("fy").get<double>();
    spec.intrinsics.cx = k.at("cx").get<double>();
    spec.intrinsics.cy = k.at("cy").get<double>();
    spec.intrinsics.width = k.at("width").get<int>();
    spec.intrinsics.height = k.at("height").get<int>();
    if (j.contains("noise")) {
      spec.noise.color_sigma = j.at("noise").value("color_sigma", 0.0);
      spec.noise.depth_dropout = j.at("noise").value("depth_dropout", 0.0);
    }
    spec.validate();
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("scene spec missing or mistyped field: " +
                      std::string(e.what()));
  }
}

namespace {

// Shared geometry of the benchmark scenes; only albedos and trajectories
// differ between the source and target variants.
SceneSpec benchmark_base(std::uint64_t seed) {
  Rng rng(Rng::derive(seed, 0xb5a5e));
  SceneSpec spec;
  spec.room_min = {0.0, 0.0, 0.0};
  spec.room_max = {6.0, 5.0, 3.0};
  spec.num_classes = 4;
  spec.seed = seed;

  SceneBox box_a;
  box_a.class_id = 3;
  const double bx = 1.3 + 0.4 * rng.uniform();
  const double by = 1.2 + 0.4 * rng.uniform();
  box_a.min = {bx, by, 0.0};
  box_a.max = {bx + 1.0, by + 0.9, 1.1};
  SceneBox box_b;
  box_b.class_id = 3;
  const double cx = 3.6 + 0.4 * rng.uniform();
  const double cy = 2.9 + 0.4 * rng.uniform();
  box_b.min = {cx, cy, 0.0};
  box_b.max = {cx + 0.9, cy + 1.0, 0.8};
  spec.boxes = {box_a, box_b};

  spec.intrinsics.fx = 110.0;
  spec.intrinsics.fy = 110.0;
  spec.intrinsics.cx = 59.5;
  spec.intrinsics.cy = 44.5;
  spec.intrinsics.width = 120;
  spec.intrinsics.height = 90;

  spec.noise.color_sigma = 0.02;
  spec.noise.depth_dropout = 0.01;
  return spec;
}

std::vector<std::array<double, 3>> benchmark_albedos(std::uint64_t seed,
                                                     bool shifted) {
  // Variant A: the colors the labeled source set teaches. Variant B shifts
  // every class off its source color, which is the domain gap under test.
  std::vector<std::array<double, 3>> albedo = {
      {0.55, 0.42, 0.28},  // floor
      {0.88, 0.88, 0.84},  // ceiling
      {0.35, 0.48, 0.70},  // wall
      {0.75, 0.22, 0.20},  // box
  };
  if (shifted) {
    albedo[0] = {0.40, 0.46, 0.24};
    albedo[1] = {0.78, 0.82, 0.93};
    albedo[2] = {0.46, 0.40, 0.58};
    albedo[3] = {0.68, 0.36, 0.14};
  }
  Rng rng(Rng::derive(seed, shifted ? 0xa1 : 0xa0));
  for (auto& a : albedo)
    for (double& v : a) v = std::min(0.98, std::max(0.02, v + rng.uniform(-0.03, 0.03)));
  return albedo;
}

}  // namespace

DomainShiftBenchmark make_domain_shift_benchmark(std::uint64_t seed) {
  DomainShiftBenchmark bench;
  Rng rng(Rng::derive(seed, 0x0ff5ec));

  SceneSpec source_spec = benchmark_base(seed);
  source_spec.albedo = benchmark_albedos(seed, /*shifted=*/false);
  source_spec.trajectory.center = {3.0, 2.5, 0.9};
  source_spec.trajectory.radius = 1.5;
  source_spec.trajectory.height = 1.0;
  source_spec.trajectory.angle_start = rng.uniform(0.0, 2.0 * kPi);
  source_spec.trajectory.angle_end = source_spec.trajectory.angle_start + 2.0 * kPi;
  source_spec.trajectory.frame_count = 20;
  source_spec.seed = Rng::derive(seed, 1);
  bench.source = render(source_spec);

  SceneSpec target_spec = benchmark_base(seed);
  target_spec.albedo = benchmark_albedos(seed, /*shifted=*/true);
  target_spec.trajectory.center = {3.0, 2.5, 0.9};
  target_spec.trajectory.radius = 1.9;
  target_spec.trajectory.height = 0.8;
  target_spec.trajectory.angle_start = rng.uniform(0.0, 2.0 * kPi);
  target_spec.trajectory.angle_end = target_spec.trajectory.angle_start + 2.0 * kPi;
  target_spec.trajectory.frame_count = 60;
  target_spec.seed = Rng::derive(seed, 2);
  bench.target = render(target_spec);
  for (Frame& frame : bench.target.frames) {
    bench.target_gt.push_back(std::move(*frame.labels));
    frame.labels.reset();
  }

  SceneSpec eval_spec = target_spec;
  eval_spec.trajectory.radius = 1.65;
  eval_spec.trajectory.height = 1.15;
  eval_spec.trajectory.angle_start = rng.uniform(0.0, 2.0 * kPi);
  eval_spec.trajectory.angle_end = eval_spec.trajectory.angle_start + 2.0 * kPi;
  eval_spec.trajectory.frame_count = 20;
  eval_spec.seed = Rng::derive(seed, 3);
  bench.eval = render(eval_spec);
  return bench;
}

void write_domain_shift_benchmark(const DomainShiftBenchmark& bench,
                                  const std::filesystem::path& out_dir) {
  namespace fs = std::filesystem;
  write_scene(bench.source, out_dir / "source");
  write_scene(bench.target, out_dir / "target");
  write_scene(bench.eval, out_dir / "eval");
  fs::create_directories(out_dir / "target_gt");
  for (std::size_t i = 0; i < bench.target_gt.size(); ++i)
    write_label_png(bench.target_gt[i],
                    out_dir / "target_gt" /
                        (frame_name(bench.target.frames[i].index) + ".png"));
}

}  // namespace warpfuse
