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

#include "nptray/teleopd.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>

#include "json.hpp"
#include "nptray/error.hpp"

namespace nptray::teleop {
namespace {

using nlohmann::json;

json vec_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

double finite_number(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number()) {
    throw ProtocolError(std::string("\"") + key + "\" must be a number");
  }
  const double v = j.at(key).get<double>();
  if (!std::isfinite(v)) throw ProtocolError(std::string("\"") + key + "\" must be finite");
  return v;
}

}  // namespace

Command parse_message(std::string_view text) {
  const json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw ProtocolError("not valid JSON");
  if (!j.is_object()) throw ProtocolError("expected a JSON object");
  if (!j.contains("type") || !j.at("type").is_string()) {
    throw ProtocolError("missing string field \"type\"");
  }
  const std::string type = j.at("type").get<std::string>();
  if (type == "target") {
    if (!j.contains("p") || !j.at("p").is_array() || j.at("p").size() != 3) {
      throw ProtocolError("\"p\" must be an array of three numbers");
    }
    TargetCmd t;
    for (int i = 0; i < 3; ++i) {
      const json& v = j.at("p")[i];
      if (!v.is_number() || !std::isfinite(v.get<double>())) {
        throw ProtocolError("\"p\" must be an array of three finite numbers");
      }
      t.p[i] = v.get<double>();
    }
    if (j.contains("t")) t.client_ms = finite_number(j, "t");
    return t;
  }
  if (type == "mode") {
    if (!j.contains("value") || !j.at("value").is_string()) {
      throw ProtocolError("\"value\" must be \"F\" or \"FSC\"");
    }
    const std::string v = j.at("value").get<std::string>();
    if (v == "F") return ModeCmd{Mode::kF};
    if (v == "FSC") return ModeCmd{Mode::kFSC};
    throw ProtocolError("\"value\" must be \"F\" or \"FSC\"");
  }
  if (type == "reset") return ResetCmd{};
  if (type == "config") {
    const double s = finite_number(j, "scale");
    if (!(s > 0)) throw ProtocolError("\"scale\" must be positive");
    return ScaleCmd{s};
  }
  throw ProtocolError("unknown message type \"" + type + "\"");
}

std::string error_reply(std::string_view message) {
  return json{{"type", "error"}, {"message", message}}.dump();
}

void TeleopOptions::validate() const {
  if (!(scale > 0) || !std::isfinite(scale)) throw ValidationError("teleopd: scale must be positive");
  if (!(stale_after >= 0)) throw ValidationError("teleopd: stale_after must be non-negative");
  if (!(decay_time > 0)) throw ValidationError("teleopd: decay_time must be positive");
  if (queue_capacity == 0) throw ValidationError("teleopd: queue capacity must be positive");
}

double staleness_gain(double age, const TeleopOptions& opt) {
  if (age <= opt.stale_after) return 1.0;
  return std::exp(-(age - opt.stale_after) / opt.decay_time);
}

void Inbox::push(Command c) {
  std::lock_guard lock(mu_);
  if (!lockstep_ && std::holds_alternative<TargetCmd>(c)) {
    latest_ = std::get<TargetCmd>(c);
    return;
  }
  queue_.push_back(std::move(c));
}

std::optional<std::vector<Command>> Inbox::take() {
  std::lock_guard lock(mu_);
  std::vector<Command> out;
  if (!lockstep_) {
    out.assign(queue_.begin(), queue_.end());
    queue_.clear();
    if (latest_) out.push_back(*latest_);
    latest_.reset();
    return out;
  }
  auto it = queue_.begin();
  while (it != queue_.end() && !std::holds_alternative<TargetCmd>(*it)) ++it;
  if (it == queue_.end()) return std::nullopt;
  ++it;
  out.assign(queue_.begin(), it);
  queue_.erase(queue_.begin(), it);
  return out;
}

FrameQueue::FrameQueue(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0) throw ValidationError("frame queue capacity must be positive");
}

void FrameQueue::push(std::string frame) {
  std::lock_guard lock(mu_);
  if (q_.size() == capacity_) {
    q_.pop_front();
    ++dropped_;
  }
  q_.push_back(std::move(frame));
}

std::optional<std::string> FrameQueue::pop() {
  std::lock_guard lock(mu_);
  if (q_.empty()) return std::nullopt;
  std::string f = std::move(q_.front());
  q_.pop_front();
  return f;
}

std::size_t FrameQueue::dropped() const {
  std::lock_guard lock(mu_);
  return dropped_;
}

std::size_t FrameQueue::size() const {
  std::lock_guard lock(mu_);
  return q_.size();
}

Session::Session(const ExperimentConfig& config, const TeleopOptions& opt)
    : config_(config),
      opt_(opt),
      loop_((config.validate(), opt.validate(), config.loop_config())),
      ref_height_(config.rotation_centre_height()),
      mode_(config.mode),
      target_(loop_.config().home) {
  record_.dt = config.dt;
}

void Session::apply(const Command& c) {
  const double now = static_cast<double>(seq_) * config_.dt;
  if (const auto* t = std::get_if<TargetCmd>(&c)) {
    target_ = loop_.config().home + opt_.scale * t->p;
    target_time_ = now;
  } else if (const auto* m = std::get_if<ModeCmd>(&c)) {
    mode_ = m->mode;
  } else if (std::holds_alternative<ResetCmd>(c)) {
    reset_pending_ = true;
    target_ = loop_.config().home;
    target_time_ = now;
  } else if (const auto* s = std::get_if<ScaleCmd>(&c)) {
    opt_.scale = s->scale;
  }
}

Frame Session::step() {
  Frame f;
  f.seq = seq_;
  f.t = static_cast<double>(seq_) * config_.dt;
  f.ref_gain = staleness_gain(f.t - target_time_, opt_);
  const bool reset = reset_pending_;
  // Reset before the mode switch: replaying the record applies the same order.
  if (reset) loop_.reset();
  loop_.set_mode(mode_);
  reset_pending_ = false;
  f.cycle = loop_.step(target_, f.ref_gain);

  const TrayKinematics kin = tray_kinematics(f.cycle.desired);
  f.objects.reserve(config_.manifest.size());
  for (const ObjectSpec& obj : config_.manifest) {
    f.objects.push_back(object_metrics(obj, kin, ref_height_));
  }
  solve_ms_.push_back(f.cycle.solve_ms);
  if (opt_.record) {
    record_.x_m.push_back(target_);
    record_.ref_gain.push_back(f.ref_gain);
    record_.mode.push_back(mode_);
    record_.reset.push_back(reset ? 1 : 0);
  }
  ++seq_;
  return f;
}

std::string Session::frame_json(const Frame& f) const {
  const TrayState& d = f.cycle.desired;
  json objects = json::array();
  for (size_t i = 0; i < f.objects.size(); ++i) {
    const ObjectMetrics& m = f.objects[i];
    objects.push_back({{"id", config_.manifest[i].id},
                       {"S", m.s},
                       {"B", std::isfinite(m.b) ? json(m.b) : json(nullptr)},
                       {"contact", m.contact}});
  }
  const json j = {
      {"type", "frame"},
      {"seq", f.seq},
      {"t", f.t},
      {"mode", std::string(to_string(f.cycle.mode))},
      {"tray",
       {{"p", vec_json(d.x)}, {"phi_axis", vec_json(d.phi.axis)}, {"phi_angle", d.phi.angle}}},
      {"desired",
       {{"x", vec_json(d.x)}, {"v", vec_json(d.v)}, {"a", vec_json(d.a)}, {"j", vec_json(d.j)},
        {"s", vec_json(d.s)}}},
      {"x_m", vec_json(f.cycle.x_m)},
      {"x_s", vec_json(f.cycle.x_s)},
      {"u", vec_json(f.cycle.u)},
      {"ref_gain", f.ref_gain},
      {"objects", objects},
      {"bounds", {{"omega_dot", f.cycle.omega_dot_max}, {"snap", f.cycle.snap_bound}}},
      {"solve_ms", f.cycle.solve_ms},
      {"degraded", f.cycle.degraded}};
  return j.dump();
}

void Session::write_record(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  {
    std::ofstream os(dir / "input.csv");
    if (!os) throw std::runtime_error("cannot write " + (dir / "input.csv").string());
    os << std::setprecision(17) << "x,y,z,ref_gain,mode,reset\n";
    for (size_t k = 0; k < record_.x_m.size(); ++k) {
      const Vec3& x = record_.x_m[k];
      os << x.x() << ',' << x.y() << ',' << x.z() << ',' << record_.ref_gain[k] << ','
         << (record_.mode[k] == Mode::kFSC ? 1 : 0) << ',' << int(record_.reset[k]) << '\n';
    }
  }
  ExperimentConfig c = config_;
  c.trajectory.kind = TrajectorySource::Kind::kCsv;
  c.trajectory.csv = "input.csv";
  c.output_dir.clear();
  std::ofstream os(dir / "config.json");
  if (!os) throw std::runtime_error("cannot write " + (dir / "config.json").string());
  os << to_json(c).dump(2) << '\n';
}

}  // namespace nptray::teleop
