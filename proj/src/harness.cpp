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


#include "nptray/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <random>
#include <sstream>

#include "nptray/error.hpp"

namespace nptray {
namespace {

using nlohmann::json;

struct Table1Type {
  char label;
  double height;
  double mu;
  double slot_deg;
};

constexpr Table1Type kTable1Types[] = {
    {'a', 0.05, 0.15, 0},   {'A', 0.05, 0.3, 60},  {'b', 0.15, 0.15, 120},
    {'B', 0.15, 0.3, 180},  {'c', 0.25, 0.15, 240}, {'C', 0.25, 0.3, 300},
};
constexpr double kTable1Offsets[] = {0.1, 0.2, 0.3};
constexpr double kTable1Side = 0.05;

std::ostream& precise(std::ostream& os) { return os << std::setprecision(17); }

void put3(std::ostream& os, const Vec3& v) { os << ',' << v.x() << ',' << v.y() << ',' << v.z(); }

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

// Column lookup over a headed CSV.
class CsvTable {
 public:
  explicit CsvTable(const std::filesystem::path& path) : path_(path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("", "cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("", path.string() + ": empty file");
    header_ = split_csv(line);
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const std::vector<std::string> cells = split_csv(line);
      if (cells.size() != header_.size()) {
        throw ConfigError("", path.string() + ": row " + std::to_string(rows_.size() + 2) +
                                  " has " + std::to_string(cells.size()) + " cells");
      }
      std::vector<double> row(cells.size());
      for (size_t i = 0; i < cells.size(); ++i) {
        try {
          row[i] = std::stod(cells[i]);
        } catch (const std::exception&) {
          throw ConfigError("", path.string() + ": row " + std::to_string(rows_.size() + 2) +
                                    ", column " + header_[i] + ": not a number");
        }
      }
      rows_.push_back(std::move(row));
    }
  }

  bool has(const std::string& col) const { return index(col) >= 0; }
  size_t size() const { return rows_.size(); }

  double at(size_t row, const std::string& col) const {
    const int i = index(col);
    if (i < 0) throw ConfigError("", path_.string() + ": missing column " + col);
    return rows_[row][i];
  }

  Vec3 vec(size_t row, const std::string& prefix) const {
    return {at(row, prefix + "x"), at(row, prefix + "y"), at(row, prefix + "z")};
  }

 private:
  int index(const std::string& col) const {
    const auto it = std::find(header_.begin(), header_.end(), col);
    return it == header_.end() ? -1 : static_cast<int>(it - header_.begin());
  }

  std::filesystem::path path_;
  std::vector<std::string> header_;
  std::vector<std::vector<double>> rows_;
};

void update(double& worst, double value) { worst = std::max(worst, value); }

}  // namespace

Vec3 CosineNoiseParams::clean(double t) const {
  Vec3 x;
  for (int i = 0; i < 3; ++i) x[i] = amplitude[i] * (1.0 - std::cos(2.0 * M_PI / period[i] * t));
  return x;
}

void CosineNoiseParams::validate() const {
  if ((amplitude.array() <= 0).any()) throw ConfigError("trajectory.amplitude", "must be positive");
  if ((period.array() <= 0).any()) throw ConfigError("trajectory.period", "must be positive");
  if ((noise_std.array() < 0).any()) throw ConfigError("trajectory.noise_std", "must be non-negative");
}

InputTrace generate_input(const CosineNoiseParams& params, std::uint64_t seed, double dt,
                          double duration) {
  params.validate();
  InputTrace tr;
  tr.dt = dt;
  const long n = std::lround(duration / dt) + 1;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  tr.x_m.reserve(n);
  tr.clean.reserve(n);
  for (long k = 0; k < n; ++k) {
    const Vec3 c = params.clean(static_cast<double>(k) * dt);
    Vec3 noise;
    for (int i = 0; i < 3; ++i) noise[i] = params.noise_std[i] * normal(rng);
    tr.clean.push_back(c);
    tr.x_m.push_back(c + noise);
  }
  return tr;
}

InputTrace load_input_csv(const std::filesystem::path& path, double dt) {
  const CsvTable t(path);
  InputTrace tr;
  tr.dt = dt;
  const bool clean = t.has("cx");
  const bool gain = t.has("ref_gain");
  const bool mode = t.has("mode");
  const bool reset = t.has("reset");
  for (size_t k = 0; k < t.size(); ++k) {
    tr.x_m.push_back(t.vec(k, ""));
    if (clean) tr.clean.push_back(t.vec(k, "c"));
    if (gain) tr.ref_gain.push_back(t.at(k, "ref_gain"));
    if (mode) tr.mode.push_back(t.at(k, "mode") != 0.0 ? Mode::kFSC : Mode::kF);
    if (reset) tr.reset.push_back(t.at(k, "reset") != 0.0 ? 1 : 0);
  }
  if (tr.x_m.empty()) throw ConfigError("trajectory.path", path.string() + " has no samples");
  return tr;
}

std::vector<ObjectSpec> table1_manifest() {
  std::vector<ObjectSpec> out;
  for (int r = 0; r < 3; ++r) {
    for (const Table1Type& t : kTable1Types) {
      const double ang = t.slot_deg * M_PI / 180.0;
      const double off = kTable1Offsets[r];
      out.push_back({std::string(1, t.label) + std::to_string(r + 1), kTable1Side, t.height, t.mu,
                     Vec3(off * std::cos(ang), off * std::sin(ang), 0.0), 1.0});
    }
  }
  return out;
}

OffsetObject ExperimentConfig::offset() const {
  return offset_override ? *offset_override : build_offset_object(manifest, tray);
}

double ExperimentConfig::rotation_centre_height() const {
  return reference_height > 0 ? reference_height : offset().h;
}

LoopConfig ExperimentConfig::loop_config() const {
  LoopConfig l;
  l.mode = mode;
  l.filter = filter;
  l.smoother = smoother;
  l.smoother.dt = dt;
  l.offset = offset();
  l.ideal_tracking = ideal_tracking;
  return l;
}

void ExperimentConfig::validate() const {
  if (!(duration > 0)) throw ConfigError("duration", "must be positive");
  if (!(dt > 0)) throw ConfigError("dt", "must be positive");
  if (!(tray.radius > 0)) throw ConfigError("tray_radius", "must be positive");
  if (reference_height < 0) throw ConfigError("reference_height", "must be non-negative");
  if (manifest.empty()) throw ConfigError("manifest", "must not be empty");
  try {
    build_offset_object(manifest, tray);
  } catch (const ValidationError& e) {
    throw ConfigError("manifest", e.what());
  }
  if (!filter.is_stable()) throw ConfigError("filter", "poles must lie inside the unit circle");
  SmootherConfig s = smoother;
  s.dt = dt;
  try {
    s.validate();
  } catch (const ValidationError& e) {
    throw ConfigError("smoother", e.what());
  }
  if (trajectory.kind == TrajectorySource::Kind::kCosine) trajectory.cosine.validate();
}

ExperimentConfig ExperimentConfig::preset(const std::string& name) {
  ExperimentConfig c;
  if (name == "sim") return c;
  if (name == "hw-f" || name == "hw-fsc") {
    const bool fsc = name == "hw-fsc";
    c.mode = fsc ? Mode::kFSC : Mode::kF;
    c.filter = fsc ? BiquadCoeffs::fsc() : BiquadCoeffs::f_mode();
    c.tray.radius = 0.2;
    c.manifest = {{"O", 0.05, 0.2, 0.2, Vec3::Zero(), 1.0}};
    c.offset_override = OffsetObject::explicit_values(0.05, 0.2, 0.2, std::hypot(0.2, 0.1));
    // The wide-band hardware filters pass centimetre noise into the smoother's
    // velocity and acceleration reference, where it accumulates as drift.
    c.trajectory.cosine.noise_std = Vec3(5e-4, 5e-4, 3e-4);
    return c;
  }
  throw ConfigError("preset", "unknown preset \"" + name + "\"");
}

RunTrace to_run_trace(const std::vector<Cycle>& cycles, const InputTrace& input) {
  RunTrace r;
  r.dt = input.dt;
  const bool clean = input.clean.size() >= cycles.size();
  for (size_t k = 0; k < cycles.size(); ++k) {
    r.tray.push_back(cycles[k].desired);
    r.plant.push_back(cycles[k].x_s);
    r.clean.push_back(clean ? input.clean[k] : cycles[k].x_m);
  }
  return r;
}

TimingStats timing_stats(const std::vector<Cycle>& cycles) {
  TimingStats s;
  if (cycles.empty()) return s;
  std::vector<double> ms;
  for (const Cycle& c : cycles) ms.push_back(c.solve_ms);
  double sum = 0, sq = 0;
  for (double v : ms) sum += v;
  s.mean_ms = sum / ms.size();
  for (double v : ms) sq += (v - s.mean_ms) * (v - s.mean_ms);
  s.std_ms = std::sqrt(sq / ms.size());
  std::sort(ms.begin(), ms.end());
  s.p99_ms = ms[std::min(ms.size() - 1, static_cast<size_t>(std::ceil(0.99 * ms.size())) - 1)];
  s.max_ms = ms.back();
  return s;
}

bool ConstraintAudit::passed(double tol) const {
  return u_excess <= 0.0 && state_excess <= tol && snap_excess <= tol && snap_jump_excess <= 1e-9 &&
         max_slack <= tol && nonconverged == 0;
}

ConstraintAudit audit_constraints(const std::vector<Cycle>& cycles, const SmootherConfig& cfg) {
  ConstraintAudit a;
  const StateBounds& b = cfg.bounds;
  for (size_t k = 0; k < cycles.size(); ++k) {
    const Cycle& c = cycles[k];
    if (c.degraded) ++a.degraded;
    if (c.mode != Mode::kFSC) continue;
    if (c.status != QpStatus::kConverged) {
      ++a.nonconverged;
    } else {
      update(a.max_kkt_converged, c.kkt_residual);
    }
    update(a.max_slack, c.max_slack);
    update(a.u_excess, c.u.cwiseAbs().maxCoeff() - b.u_max);
    const TrayState& t = c.desired;
    update(a.state_excess, t.v.cwiseAbs().maxCoeff() - b.v_max);
    update(a.state_excess, t.a.cwiseAbs().maxCoeff() - b.a_max);
    update(a.state_excess, t.j.cwiseAbs().maxCoeff() - b.j_max);
    // The snap box used at cycle k bounds the state reached after it.
    update(a.snap_excess, t.s.cwiseAbs().maxCoeff() - c.snap_bound / std::sqrt(3.0));
    if (k > 0 && cycles[k - 1].mode == Mode::kFSC) {
      update(a.snap_jump_excess,
             (t.s - cycles[k - 1].desired.s).cwiseAbs().maxCoeff() - b.u_max * cfg.dt);
    }
  }
  a.u_excess = std::max(a.u_excess, 0.0);
  a.state_excess = std::max(a.state_excess, 0.0);
  a.snap_excess = std::max(a.snap_excess, 0.0);
  a.snap_jump_excess = std::max(a.snap_jump_excess, 0.0);
  return a;
}

EnvelopeAudit audit_envelope(const std::vector<Cycle>& cycles, const OffsetObject& offset) {
  EnvelopeAudit a;
  for (const Cycle& c : cycles) {
    const EnvelopeSample e = approximation_envelope(c.desired, offset);
    update(a.max.centripetal_literal, e.centripetal_literal);
    update(a.max.centripetal_budget, e.centripetal_budget);
    update(a.max.gyroscopic_literal, e.gyroscopic_literal);
    update(a.max.gyroscopic_budget, e.gyroscopic_budget);
    update(a.max.omega_dot_literal, e.omega_dot_literal);
    update(a.max.omega_dot_budget, e.omega_dot_budget);
    ++a.samples;
  }
  return a;
}

RunResult run_trace(const ExperimentConfig& config, const InputTrace& input) {
  config.validate();
  RunResult r;
  r.config = config;
  r.input = input;
  ControlLoop loop(config.loop_config());
  r.cycles.reserve(input.x_m.size());
  for (size_t k = 0; k < input.x_m.size(); ++k) {
    const double gain = k < input.ref_gain.size() ? input.ref_gain[k] : 1.0;
    if (k < input.reset.size() && input.reset[k]) loop.reset();
    if (k < input.mode.size()) loop.set_mode(input.mode[k]);
    r.cycles.push_back(loop.step(input.x_m[k], gain));
  }
  OracleOptions opt;
  opt.reference_height = config.rotation_centre_height();
  const RunTrace trace = to_run_trace(r.cycles, input);
  r.report = evaluate_run(trace, config.manifest, opt);
  const OffsetMaxima probe = offset_object_maxima(trace, config.offset());
  r.offset_s_max = probe.s_max;
  r.offset_b_max = probe.b_max;
  r.audit = audit_constraints(r.cycles, loop.config().smoother);
  r.envelope = audit_envelope(r.cycles, config.offset());
  r.timing = timing_stats(r.cycles);

  if (config.ik.enabled && !r.cycles.empty()) {
    const IkStage& ik = config.ik;
    Eigen::VectorXd q = ik.q0;
    const Mat3 turn = Eigen::AngleAxisd(ik.yaw, Vec3::UnitZ()).toRotationMatrix();
    const Rotation home = fk(ik.chain, q).rotation;
    const auto desired = [&](const Cycle& c) {
      Pose d;
      d.position = ik.origin + turn * c.desired.x;
      d.rotation = exp_so3(turn * c.desired.phi.vector()) * home;
      return d;
    };
    std::size_t k = 0;
    try {
      const Pose first = desired(r.cycles.front());
      constexpr double kSettleDt = 0.002;
      for (int i = 0; i < ik.settle_steps; ++i) {
        q += kSettleDt * ik_step(ik.chain, ik.gains, q, first, Vec6::Zero());
      }
      for (; k < r.cycles.size(); ++k) {
        const Cycle& c = r.cycles[k];
        const Pose d = desired(c);
        Vec6 twist;
        twist << turn * c.desired.v, turn * tray_kinematics(c.desired).omega;
        q += config.dt * ik_step(ik.chain, ik.gains, q, d, twist);
        r.joints.push_back(q);
        update(r.ik_max_position_error, (fk(ik.chain, q).position - d.position).norm());
      }
    } catch (const ValidationError&) {
      r.ik_limit_cycle = k;
    }
  }
  return r;
}

RunResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  InputTrace input;
  if (config.trajectory.kind == TrajectorySource::Kind::kCosine) {
    input = generate_input(config.trajectory.cosine, config.seed, config.dt, config.duration);
  } else {
    input = load_input_csv(config.trajectory.csv, config.dt);
  }
  return run_trace(config, input);
}

void write_metrics_csv(const StabilityReport& report, std::ostream& os) {
  precise(os) << "t,id,S,B,contact\n";
  const size_t n = report.objects.empty() ? 0 : report.objects.front().s.size();
  for (size_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) * report.dt;
    for (const ObjectTrace& o : report.objects) {
      os << t << ',' << o.id << ',' << o.s[k] << ',' << o.b[k] << ',' << int(o.contact[k]) << '\n';
    }
  }
}

void write_trajectory_csv(const std::vector<Cycle>& cycles, const InputTrace& input,
                          std::ostream& os) {
  precise(os) << "t,x_mx,x_my,x_mz,x_rx,x_ry,x_rz,x_dx,x_dy,x_dz,phi_dx,phi_dy,phi_dz,"
                 "x_sx,x_sy,x_sz,v_dx,v_dy,v_dz,a_dx,a_dy,a_dz,j_dx,j_dy,j_dz,s_dx,s_dy,s_dz,"
                 "dphi_dx,dphi_dy,dphi_dz,ddphi_dx,ddphi_dy,ddphi_dz,cx,cy,cz\n";
  for (size_t k = 0; k < cycles.size(); ++k) {
    const Cycle& c = cycles[k];
    const TrayState& d = c.desired;
    os << c.t;
    put3(os, c.x_m);
    put3(os, c.x_r);
    put3(os, d.x);
    put3(os, d.phi.vector());
    put3(os, c.x_s);
    put3(os, d.v);
    put3(os, d.a);
    put3(os, d.j);
    put3(os, d.s);
    put3(os, d.omega);
    put3(os, d.omega_dot);
    put3(os, k < input.clean.size() ? input.clean[k] : c.x_m);
    os << '\n';
  }
}

json summary_json(const RunResult& r) {
  json j;
  j["mode"] = std::string(to_string(r.config.mode));
  j["seed"] = r.config.seed;
  j["samples"] = r.cycles.size();
  json objs = json::array();
  double s_all = 0, b_all = 0;
  for (const ObjectTrace& o : r.report.objects) {
    objs.push_back({{"id", o.id},
                    {"S_max", o.s_max},
                    {"B_max", o.b_max},
                    {"S_max_rigid", o.s_max_rigid},
                    {"B_max_rigid", o.b_max_rigid},
                    {"first_loss", o.first_loss}});
    s_all = std::max(s_all, o.s_max);
    b_all = std::max(b_all, o.b_max);
  }
  j["objects"] = objs;
  j["S_max"] = s_all;
  j["B_max"] = b_all;
  j["offset_object"] = {{"S_max", r.offset_s_max}, {"B_max", r.offset_b_max}};
  j["E_bar"] = r.report.e_bar;
  j["E_bar_aligned"] = r.report.e_bar_aligned;
  j["aligned_lag_s"] = r.report.aligned_lag * r.report.dt;
  j["solve_ms"] = {{"mean", r.timing.mean_ms}, {"std", r.timing.std_ms}, {"p99", r.timing.p99_ms},
                   {"max", r.timing.max_ms}};
  const ConstraintAudit& a = r.audit;
  j["audit"] = {{"passed", r.config.mode == Mode::kFSC ? a.passed() : true},
                {"u_excess", a.u_excess},
                {"state_excess", a.state_excess},
                {"snap_excess", a.snap_excess},
                {"snap_jump_excess", a.snap_jump_excess},
                {"max_slack", a.max_slack},
                {"max_kkt_residual", a.max_kkt_converged},
                {"nonconverged", a.nonconverged},
                {"degraded", a.degraded}};
  const EnvelopeSample& e = r.envelope.max;
  j["envelope"] = {{"centripetal_budget", e.centripetal_budget},
                   {"centripetal_literal", e.centripetal_literal},
                   {"gyroscopic_budget", e.gyroscopic_budget},
                   {"gyroscopic_literal", e.gyroscopic_literal},
                   {"omega_dot_budget", e.omega_dot_budget},
                   {"omega_dot_literal", e.omega_dot_literal}};
  if (!r.joints.empty()) j["ik_max_position_error"] = r.ik_max_position_error;
  if (r.ik_limit_cycle) j["ik_limit_cycle"] = *r.ik_limit_cycle;
  j["config"] = to_json(r.config);
  return j;
}

void write_outputs(const RunResult& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto open = [&](const char* name) {
    std::ofstream os(dir / name);
    if (!os) throw ConfigError("output_dir", "cannot write " + (dir / name).string());
    return os;
  };
  {
    std::ofstream os = open("metrics.csv");
    write_metrics_csv(r.report, os);
  }
  {
    std::ofstream os = open("trajectory.csv");
    write_trajectory_csv(r.cycles, r.input, os);
  }
  {
    std::ofstream os = open("summary.json");
    os << summary_json(r).dump(2) << '\n';
  }
  if (!r.joints.empty()) {
    std::ofstream os = open("joints.csv");
    precise(os) << "t";
    for (int i = 0; i < r.joints.front().size(); ++i) os << ",q" << i + 1;
    os << '\n';
    for (size_t k = 0; k < r.joints.size(); ++k) {
      os << r.cycles[k].t;
      for (int i = 0; i < r.joints[k].size(); ++i) os << ',' << r.joints[k][i];
      os << '\n';
    }
  }
}

SweepResult sweep_table1(const ExperimentConfig& config, int azimuths, double tol) {
  if (azimuths < 1) throw ConfigError("azimuths", "must be at least 1");
  ExperimentConfig c = config;
  c.mode = Mode::kFSC;
  c.manifest.clear();
  std::vector<SweepCell> cells;
  for (int r = 0; r < 3; ++r) {
    for (const Table1Type& t : kTable1Types) {
      SweepCell cell;
      cell.offset = kTable1Offsets[r];
      cell.mu = t.mu;
      cell.height = t.height;
      cell.id = std::string(1, t.label) + std::to_string(r + 1);
      cells.push_back(cell);
      for (int a = 0; a < azimuths; ++a) {
        const double ang = 2.0 * M_PI * a / azimuths;
        c.manifest.push_back({cell.id + "@" + std::to_string(a), kTable1Side, t.height, t.mu,
                              Vec3(cell.offset * std::cos(ang), cell.offset * std::sin(ang), 0.0),
                              1.0});
      }
    }
  }
  if (!c.offset_override) c.offset_override = build_offset_object(table1_manifest(), c.tray);

  SweepResult out;
  out.run = run_experiment(c);
  for (size_t i = 0; i < cells.size(); ++i) {
    for (int a = 0; a < azimuths; ++a) {
      const ObjectTrace& o = out.run.report.objects[i * azimuths + a];
      update(cells[i].s_max, o.s_max);
      update(cells[i].b_max, o.b_max);
    }
  }
  out.cells = cells;

  const auto find = [&](double off, double mu, double h) -> const SweepCell& {
    for (const SweepCell& s : out.cells) {
      if (s.offset == off && s.mu == mu && s.height == h) return s;
    }
    throw std::logic_error("sweep cell missing");
  };
  const auto check = [&](const SweepCell& lo, const SweepCell& hi, double vlo, double vhi,
                         const char* what) {
    if (vlo > vhi + tol) {
      std::ostringstream ss;
      precise(ss) << what << ": " << lo.id << " (" << vlo << ") > " << hi.id << " (" << vhi << ")";
      out.violations.push_back(ss.str());
    }
  };
  for (const Table1Type& t : kTable1Types) {
    for (int r = 0; r + 1 < 3; ++r) {
      const SweepCell& a = find(kTable1Offsets[r], t.mu, t.height);
      const SweepCell& b = find(kTable1Offsets[r + 1], t.mu, t.height);
      check(a, b, a.s_max, b.s_max, "S_max not non-decreasing in offset");
    }
  }
  for (double off : kTable1Offsets) {
    for (double h : {0.05, 0.15, 0.25}) {
      const SweepCell& lo = find(off, 0.15, h);
      const SweepCell& hi = find(off, 0.3, h);
      check(hi, lo, hi.s_max, lo.s_max, "S_max not non-increasing in mu");
    }
    for (double mu : {0.15, 0.3}) {
      const SweepCell& h1 = find(off, mu, 0.05);
      const SweepCell& h2 = find(off, mu, 0.15);
      const SweepCell& h3 = find(off, mu, 0.25);
      check(h1, h2, h1.b_max, h2.b_max, "B_max not non-decreasing in height");
      check(h2, h3, h2.b_max, h3.b_max, "B_max not non-decreasing in height");
    }
  }
  return out;
}

StabilityReport certify(const std::filesystem::path& trajectory_csv,
                        std::span<const ObjectSpec> manifest, const OracleOptions& opt) {
  const CsvTable t(trajectory_csv);
  if (t.size() < 2) throw ConfigError("trajectory", "need at least two samples");
  RunTrace run;
  run.dt = t.at(1, "t") - t.at(0, "t");
  if (!(run.dt > 0)) throw ConfigError("trajectory", "time column must increase");
  for (size_t k = 0; k < t.size(); ++k) {
    TrayState s;
    s.x = t.vec(k, "x_d");
    s.v = t.vec(k, "v_d");
    s.a = t.vec(k, "a_d");
    s.j = t.vec(k, "j_d");
    s.s = t.vec(k, "s_d");
    s.phi = AxisAngle::from_vector(t.vec(k, "phi_d"));
    s.omega = t.vec(k, "dphi_d");
    s.omega_dot = t.vec(k, "ddphi_d");
    run.tray.push_back(s);
    run.plant.push_back(t.vec(k, "x_s"));
    run.clean.push_back(t.has("cx") ? t.vec(k, "c") : t.vec(k, "x_m"));
  }
  return evaluate_run(run, manifest, opt);
}

}  // namespace nptray
