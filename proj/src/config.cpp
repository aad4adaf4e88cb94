// Copyright 2026 The nptray Authors
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


#include <cmath>
#include <fstream>
#include <set>
#include <string>

#include "nptray/error.hpp"
#include "nptray/harness.hpp"

namespace nptray {
namespace {

using nlohmann::json;

// Walks a JSON object, reporting errors with a dotted path.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_, "expected an object");
  }

  void allow(std::initializer_list<const char*> keys) const {
    std::set<std::string> ok(keys.begin(), keys.end());
    for (const auto& [k, v] : j_.items()) {
      if (!ok.count(k)) throw ConfigError(at(k), "unknown key");
    }
  }

  bool has(const char* key) const { return j_.contains(key); }
  const json& raw(const char* key) const { return j_.at(key); }
  std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  double number(const char* key, double fallback) const {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_number()) throw ConfigError(at(key), "expected a number");
    return v.get<double>();
  }

  bool boolean(const char* key, bool fallback) const {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_boolean()) throw ConfigError(at(key), "expected true or false");
    return v.get<bool>();
  }

  std::string string(const char* key, const std::string& fallback) const {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_string()) throw ConfigError(at(key), "expected a string");
    return v.get<std::string>();
  }

  Eigen::VectorXd vector(const char* key, const Eigen::VectorXd& fallback, int size) const {
    if (!has(key)) return fallback;
    return to_vector(j_.at(key), at(key), size);
  }

  Vec3 vec3(const char* key, const Vec3& fallback) const {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (v.is_number()) return Vec3::Constant(v.get<double>());
    return to_vector(v, at(key), 3);
  }

  static Eigen::VectorXd to_vector(const json& v, const std::string& path, int size) {
    if (!v.is_array()) throw ConfigError(path, "expected an array");
    if (size >= 0 && static_cast<int>(v.size()) != size) {
      throw ConfigError(path, "expected " + std::to_string(size) + " entries");
    }
    Eigen::VectorXd out(v.size());
    for (size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) throw ConfigError(path + "[" + std::to_string(i) + "]", "expected a number");
      out[i] = v[i].get<double>();
    }
    return out;
  }

 private:
  const json& j_;
  std::string path_;
};

BiquadCoeffs filter_from_json(const json& j, const std::string& path) {
  if (j.is_string()) {
    try {
      return BiquadCoeffs::preset(j.get<std::string>());
    } catch (const ConfigError& e) {
      throw ConfigError(path, "unknown filter preset \"" + j.get<std::string>() + "\"");
    }
  }
  Reader r(j, path);
  r.allow({"b0", "b1", "b2", "a1", "a2"});
  BiquadCoeffs c;
  c.b0 = r.number("b0", 1.0);
  c.b1 = r.number("b1", 0.0);
  c.b2 = r.number("b2", 0.0);
  c.a1 = r.number("a1", 0.0);
  c.a2 = r.number("a2", 0.0);
  if (!c.is_stable()) throw ConfigError(path, "filter poles must lie inside the unit circle");
  return c;
}

ObjectSpec object_from_json(const json& j, const std::string& path) {
  Reader r(j, path);
  r.allow({"id", "base_side", "height", "mu", "mass", "placement", "offset", "azimuth_deg"});
  ObjectSpec o;
  o.id = r.string("id", "");
  if (o.id.empty()) throw ConfigError(r.at("id"), "required");
  for (const char* key : {"base_side", "height", "mu"}) {
    if (!r.has(key)) throw ConfigError(r.at(key), "required");
  }
  o.base_side = r.number("base_side", 0.0);
  o.height = r.number("height", 0.0);
  o.mu = r.number("mu", 0.0);
  o.mass = r.number("mass", 1.0);
  if (r.has("placement")) {
    const Eigen::VectorXd p = r.vector("placement", Eigen::VectorXd(), -1);
    if (p.size() != 2 && p.size() != 3) throw ConfigError(r.at("placement"), "expected 2 or 3 entries");
    o.placement = Vec3(p[0], p[1], 0.0);
  } else {
    const double off = r.number("offset", 0.0);
    const double az = r.number("azimuth_deg", 0.0) * M_PI / 180.0;
    o.placement = Vec3(off * std::cos(az), off * std::sin(az), 0.0);
  }
  try {
    validate_object(o);
  } catch (const ValidationError& e) {
    throw ConfigError(path, e.what());
  }
  return o;
}

Joint joint_from_json(const json& j, const std::string& path) {
  Reader r(j, path);
  r.allow({"type", "axis", "xyz", "rpy", "lower", "upper"});
  Joint out;
  const std::string type = r.string("type", "revolute");
  if (type == "revolute") {
    out.type = JointType::kRevolute;
  } else if (type == "prismatic") {
    out.type = JointType::kPrismatic;
  } else {
    throw ConfigError(r.at("type"), "expected \"revolute\" or \"prismatic\"");
  }
  out.axis = r.vec3("axis", Vec3::UnitZ());
  const Vec3 xyz = r.vec3("xyz", Vec3::Zero());
  const Vec3 rpy = r.vec3("rpy", Vec3::Zero());
  out.origin = Transform::Identity();
  out.origin.translate(xyz);
  out.origin.rotate(Eigen::AngleAxisd(rpy.z(), Vec3::UnitZ()) *
                    Eigen::AngleAxisd(rpy.y(), Vec3::UnitY()) *
                    Eigen::AngleAxisd(rpy.x(), Vec3::UnitX()));
  out.lower = r.number("lower", -M_PI);
  out.upper = r.number("upper", M_PI);
  return out;
}

void smoother_from_json(const json& j, SmootherConfig& s) {
  Reader r(j, "smoother");
  r.allow({"horizon", "k_ex", "bounds", "w_x", "w_u", "slack", "qp"});
  s.horizon = static_cast<int>(r.number("horizon", s.horizon));
  if (r.number("horizon", s.horizon) != s.horizon) throw ConfigError(r.at("horizon"), "expected an integer");
  s.k_ex = r.vec3("k_ex", s.k_ex);
  if (r.has("w_x")) s.w_x = Mat9(r.vector("w_x", Eigen::VectorXd(), 9).asDiagonal());
  if (r.has("w_u")) s.w_u = Mat3(r.vector("w_u", Eigen::VectorXd(), 3).asDiagonal());
  if (r.has("bounds")) {
    Reader b(r.raw("bounds"), r.at("bounds"));
    b.allow({"v_max", "a_max", "j_max", "u_max"});
    s.bounds.v_max = b.number("v_max", s.bounds.v_max);
    s.bounds.a_max = b.number("a_max", s.bounds.a_max);
    s.bounds.j_max = b.number("j_max", s.bounds.j_max);
    s.bounds.u_max = b.number("u_max", s.bounds.u_max);
  }
  if (r.has("slack")) {
    Reader b(r.raw("slack"), r.at("slack"));
    b.allow({"quadratic", "linear"});
    s.slack.quadratic = b.number("quadratic", s.slack.quadratic);
    s.slack.linear = b.number("linear", s.slack.linear);
  }
  if (r.has("qp")) {
    Reader b(r.raw("qp"), r.at("qp"));
    b.allow({"max_iterations", "kkt_tol"});
    s.qp.max_iterations = static_cast<int>(b.number("max_iterations", s.qp.max_iterations));
    s.qp.kkt_tol = b.number("kkt_tol", s.qp.kkt_tol);
  }
}

void ik_from_json(const json& j, IkStage& ik) {
  Reader r(j, "ik");
  r.allow({"enabled", "chain", "q0", "k_x", "k_phi", "k_h", "damping", "origin", "yaw_deg",
           "settle_steps"});
  ik.enabled = r.boolean("enabled", ik.enabled);
  if (r.has("chain")) {
    const json& c = r.raw("chain");
    if (c.is_string()) {
      if (c.get<std::string>() != "panda") throw ConfigError(r.at("chain"), "unknown chain preset");
      ik.chain = KinematicChain::panda_like();
      ik.q0 = KinematicChain::panda_ready();
    } else {
      if (!c.is_array()) throw ConfigError(r.at("chain"), "expected \"panda\" or a joint list");
      ik.chain = KinematicChain{};
      for (size_t i = 0; i < c.size(); ++i) {
        ik.chain.joints.push_back(joint_from_json(c[i], r.at("chain") + "[" + std::to_string(i) + "]"));
      }
      ik.q0 = ik.chain.midrange();
    }
  }
  const int n = ik.chain.size();
  ik.q0 = r.vector("q0", ik.q0, n);
  const double k_x = r.number("k_x", ik.gains.k_e(0, 0));
  const double k_phi = r.number("k_phi", ik.gains.k_e(3, 3));
  const double k_h = r.number("k_h", ik.gains.k_h.size() ? ik.gains.k_h[0] : 0.05);
  const double damping = r.number("damping", ik.gains.damping);
  ik.gains = IkGains::uniform(n, k_x, k_phi, k_h);
  ik.gains.damping = damping;
  ik.origin = r.vector("origin", ik.origin, 3);
  ik.yaw = r.number("yaw_deg", ik.yaw * 180.0 / M_PI) * M_PI / 180.0;
  const double settle = r.number("settle_steps", ik.settle_steps);
  if (!(settle >= 0) || settle != std::floor(settle)) {
    throw ConfigError(r.at("settle_steps"), "expected a non-negative integer");
  }
  ik.settle_steps = static_cast<int>(settle);
  try {
    ik.chain.validate();
    ik.gains.validate(n);
  } catch (const ValidationError& e) {
    throw ConfigError("ik", e.what());
  }
}

json vec_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

}  // namespace

std::vector<ObjectSpec> manifest_from_json(const json& j) {
  if (j.is_string()) {
    if (j.get<std::string>() == "table1") return table1_manifest();
    throw ConfigError("manifest", "unknown manifest preset \"" + j.get<std::string>() + "\"");
  }
  if (!j.is_array() || j.empty()) throw ConfigError("manifest", "expected \"table1\" or a non-empty list");
  std::vector<ObjectSpec> out;
  for (size_t i = 0; i < j.size(); ++i) {
    out.push_back(object_from_json(j[i], "manifest[" + std::to_string(i) + "]"));
  }
  return out;
}

ExperimentConfig config_from_json(const json& j, const ExperimentConfig& base) {
  Reader r(j, "");
  r.allow({"preset", "mode", "duration", "dt", "seed", "manifest", "tray_radius", "offset_object",
           "reference_height", "filter", "smoother", "trajectory", "ideal_tracking", "ik",
           "output_dir"});
  ExperimentConfig c = r.has("preset") ? ExperimentConfig::preset(r.string("preset", "")) : base;
  if (r.has("mode")) {
    try {
      c.mode = parse_mode(r.string("mode", ""));
    } catch (const ConfigError& e) {
      throw ConfigError("mode", "expected \"F\" or \"FSC\"");
    }
  }
  c.duration = r.number("duration", c.duration);
  c.dt = r.number("dt", c.dt);
  if (r.has("seed")) {
    const json& s = r.raw("seed");
    if (!s.is_number_unsigned()) throw ConfigError("seed", "expected a non-negative integer");
    c.seed = s.get<std::uint64_t>();
  }
  if (r.has("manifest")) c.manifest = manifest_from_json(r.raw("manifest"));
  c.tray.radius = r.number("tray_radius", c.tray.radius);
  if (r.has("offset_object")) {
    Reader o(r.raw("offset_object"), "offset_object");
    o.allow({"d", "h", "mu", "p_a"});
    for (const char* key : {"d", "h", "mu", "p_a"}) {
      if (!o.has(key)) throw ConfigError(o.at(key), "required");
    }
    try {
      c.offset_override = OffsetObject::explicit_values(o.number("d", 0), o.number("h", 0),
                                                        o.number("mu", 0), o.number("p_a", 0));
    } catch (const ValidationError& e) {
      throw ConfigError("offset_object", e.what());
    }
  }
  c.reference_height = r.number("reference_height", c.reference_height);
  if (r.has("filter")) c.filter = filter_from_json(r.raw("filter"), "filter");
  if (r.has("smoother")) smoother_from_json(r.raw("smoother"), c.smoother);
  if (r.has("trajectory")) {
    Reader t(r.raw("trajectory"), "trajectory");
    t.allow({"type", "amplitude", "period", "noise_std", "path"});
    const std::string type = t.string("type", "cosine");
    if (type == "cosine") {
      c.trajectory.kind = TrajectorySource::Kind::kCosine;
      c.trajectory.cosine.amplitude = t.vec3("amplitude", c.trajectory.cosine.amplitude);
      c.trajectory.cosine.period = t.vec3("period", c.trajectory.cosine.period);
      c.trajectory.cosine.noise_std = t.vec3("noise_std", c.trajectory.cosine.noise_std);
    } else if (type == "csv") {
      c.trajectory.kind = TrajectorySource::Kind::kCsv;
      c.trajectory.csv = t.string("path", "");
      if (c.trajectory.csv.empty()) throw ConfigError(t.at("path"), "required for csv playback");
    } else {
      throw ConfigError(t.at("type"), "expected \"cosine\" or \"csv\"");
    }
  }
  c.ideal_tracking = r.boolean("ideal_tracking", c.ideal_tracking);
  if (r.has("ik")) ik_from_json(r.raw("ik"), c.ik);
  if (r.has("output_dir")) c.output_dir = r.string("output_dir", "");
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("malformed JSON: ") + e.what());
  }
  ExperimentConfig c = config_from_json(j);
  if (c.trajectory.kind == TrajectorySource::Kind::kCsv && c.trajectory.csv.is_relative()) {
    c.trajectory.csv = path.parent_path() / c.trajectory.csv;
  }
  return c;
}

json to_json(const ExperimentConfig& c) {
  json j;
  j["mode"] = std::string(to_string(c.mode));
  j["duration"] = c.duration;
  j["dt"] = c.dt;
  j["seed"] = c.seed;
  json m = json::array();
  for (const ObjectSpec& o : c.manifest) {
    m.push_back({{"id", o.id},
                 {"base_side", o.base_side},
                 {"height", o.height},
                 {"mu", o.mu},
                 {"mass", o.mass},
                 {"placement", {o.placement.x(), o.placement.y()}}});
  }
  j["manifest"] = m;
  j["tray_radius"] = c.tray.radius;
  const OffsetObject off = c.offset();
  j["offset_object"] = {{"d", off.d}, {"h", off.h}, {"mu", off.mu}, {"p_a", off.p_a_norm}};
  j["reference_height"] = c.rotation_centre_height();
  j["filter"] = {{"b0", c.filter.b0}, {"b1", c.filter.b1}, {"b2", c.filter.b2},
                 {"a1", c.filter.a1}, {"a2", c.filter.a2}};
  const SmootherConfig& s = c.smoother;
  j["smoother"] = {
      {"horizon", s.horizon},
      {"k_ex", vec_json(s.k_ex)},
      {"bounds", {{"v_max", s.bounds.v_max}, {"a_max", s.bounds.a_max}, {"j_max", s.bounds.j_max},
                  {"u_max", s.bounds.u_max}}},
      {"w_x", vec_json(s.w_x.diagonal())},
      {"w_u", vec_json(s.w_u.diagonal())},
      {"slack", {{"quadratic", s.slack.quadratic}, {"linear", s.slack.linear}}},
      {"qp", {{"max_iterations", s.qp.max_iterations}, {"kkt_tol", s.qp.kkt_tol}}}};
  if (c.trajectory.kind == TrajectorySource::Kind::kCosine) {
    j["trajectory"] = {{"type", "cosine"},
                       {"amplitude", vec_json(c.trajectory.cosine.amplitude)},
                       {"period", vec_json(c.trajectory.cosine.period)},
                       {"noise_std", vec_json(c.trajectory.cosine.noise_std)}};
  } else {
    j["trajectory"] = {{"type", "csv"}, {"path", c.trajectory.csv.string()}};
  }
  j["ideal_tracking"] = c.ideal_tracking;
  j["ik"] = {{"enabled", c.ik.enabled},
             {"q0", vec_json(c.ik.q0)},
             {"k_x", c.ik.gains.k_e(0, 0)},
             {"k_phi", c.ik.gains.k_e(3, 3)},
             {"k_h", c.ik.gains.k_h.size() ? c.ik.gains.k_h[0] : 0.0},
             {"damping", c.ik.gains.damping},
             {"origin", vec_json(c.ik.origin)},
             {"yaw_deg", c.ik.yaw * 180.0 / M_PI},
             {"settle_steps", c.ik.settle_steps}};
  return j;
}

}  // namespace nptray
