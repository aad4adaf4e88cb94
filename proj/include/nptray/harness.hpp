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


#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "nptray/control_loop.hpp"
#include "nptray/ik.hpp"
#include "nptray/oracle.hpp"

namespace nptray {

struct CosineNoiseParams {
  Vec3 amplitude{0.3, 0.2, 0.1};  ///< [m]
  Vec3 period{5.0, 6.0, 7.0};     ///< [s]
  Vec3 noise_std{0.01, 0.007, 0.0003};  ///< [m]

  /// Noise-free input A (1 - cos(2 pi t / T)) per axis.
  Vec3 clean(double t) const;
  void validate() const;
};

/// Operator input sampled at the control rate. `clean` is empty when the
/// source has no noise-free counterpart.
struct InputTrace {
  double dt = 0.0;
  std::vector<Vec3> x_m;
  std::vector<Vec3> clean;
  std::vector<double> ref_gain;  ///< optional, 1 when empty
  std::vector<Mode> mode;        ///< optional, the config mode when empty
  std::vector<char> reset;       ///< optional; nonzero resets before the step
};

/// Gaussian noise from std::mt19937_64 seeded with `seed`, drawn axis by
/// axis each sample.
InputTrace generate_input(const CosineNoiseParams& params, std::uint64_t seed, double dt,
                          double duration);

/// Reads `x,y,z` columns from a CSV with a header row, one row per period.
/// Optional columns: `cx,cy,cz` (clean input), `ref_gain`, `mode` (0 for F,
/// 1 for FSC) and `reset` (0 or 1).
InputTrace load_input_csv(const std::filesystem::path& path, double dt);

/// Eighteen blocks on three rings. Ring radius sets the offset, the slot
/// angle identifies the (height, mu) pair.
std::vector<ObjectSpec> table1_manifest();

struct TrajectorySource {
  enum class Kind { kCosine, kCsv } kind = Kind::kCosine;
  CosineNoiseParams cosine;
  std::filesystem::path csv;
};

struct IkStage {
  bool enabled = false;
  KinematicChain chain = KinematicChain::panda_like();
  Eigen::VectorXd q0 = KinematicChain::panda_ready();
  IkGains gains = IkGains::uniform(7, 20.0, 20.0, 0.05);
  /// Base-frame position of the tray-frame origin. The tray frame is the
  /// base frame turned by `yaw` about z.
  Vec3 origin{0.65, -0.3, 0.4};
  double yaw = 1.5707963267948966;
  /// Steps taken from q0 to the first desired pose before tracking starts.
  int settle_steps = 3000;
};

struct ExperimentConfig {
  Mode mode = Mode::kFSC;
  double duration = 60.0;
  double dt = 0.02;
  std::uint64_t seed = 42;
  std::vector<ObjectSpec> manifest = table1_manifest();
  TrayGeometry tray{0.3};
  std::optional<OffsetObject> offset_override;
  double reference_height = 0.0;  ///< 0 means the offset object's height
  BiquadCoeffs filter = BiquadCoeffs::sim();
  SmootherConfig smoother;
  TrajectorySource trajectory;
  bool ideal_tracking = false;
  IkStage ik;
  std::filesystem::path output_dir;

  /// Offset object from the override or the manifest.
  OffsetObject offset() const;
  double rotation_centre_height() const;
  LoopConfig loop_config() const;
  void validate() const;

  /// "sim": the batch replica. "hw-f", "hw-fsc": the
  /// hardware filters with a single tall offset object.
  static ExperimentConfig preset(const std::string& name);
};

/// Overlays a JSON document onto `base`; unknown keys are rejected with the
/// offending path. An optional "preset" key selects the base.
ExperimentConfig config_from_json(const nlohmann::json& j,
                                  const ExperimentConfig& base = {});
ExperimentConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const ExperimentConfig& c);

std::vector<ObjectSpec> manifest_from_json(const nlohmann::json& j);

/// Worst case over the run of each term the offset-object bound neglects.
struct EnvelopeAudit {
  EnvelopeSample max;
  long samples = 0;
};

/// Hard and soft constraint audit over the cycles of an FSC run.
struct ConstraintAudit {
  double u_excess = 0.0;      ///< max(|u| - u_max), 0 when inside
  double state_excess = 0.0;  ///< worst soft-box excess over all states
  double snap_excess = 0.0;   ///< worst per-axis snap beyond bound/sqrt 3
  double snap_jump_excess = 0.0;  ///< worst |s(k+1) - s(k)| - u_max dt
  double max_slack = 0.0;
  double max_kkt_converged = 0.0;
  long nonconverged = 0;
  long degraded = 0;

  bool passed(double tol = 1e-6) const;
};

struct TimingStats {
  double mean_ms = 0.0, std_ms = 0.0, p99_ms = 0.0, max_ms = 0.0;
};

TimingStats timing_stats(const std::vector<Cycle>& cycles);
ConstraintAudit audit_constraints(const std::vector<Cycle>& cycles, const SmootherConfig& cfg);
EnvelopeAudit audit_envelope(const std::vector<Cycle>& cycles, const OffsetObject& offset);

struct RunResult {
  ExperimentConfig config;
  InputTrace input;
  std::vector<Cycle> cycles;
  StabilityReport report;
  ConstraintAudit audit;
  EnvelopeAudit envelope;
  TimingStats timing;
  double offset_s_max = 0.0;  ///< offset object at |P_A|, worst azimuth
  double offset_b_max = 0.0;
  std::vector<Eigen::VectorXd> joints;  ///< IK stage output, may be empty
  double ik_max_position_error = 0.0;
  /// Cycle at which the IK stage reached a joint limit and stopped.
  std::optional<std::size_t> ik_limit_cycle;
};

/// Runs the control loop over an input trace and evaluates the oracle.
RunResult run_trace(const ExperimentConfig& config, const InputTrace& input);

/// Builds the input from the config's trajectory source, then run_trace.
RunResult run_experiment(const ExperimentConfig& config);

RunTrace to_run_trace(const std::vector<Cycle>& cycles, const InputTrace& input);

/// metrics.csv, trajectory.csv, summary.json and, with the IK stage,
/// joints.csv.
void write_outputs(const RunResult& r, const std::filesystem::path& dir);
nlohmann::json summary_json(const RunResult& r);
void write_metrics_csv(const StabilityReport& report, std::ostream& os);
void write_trajectory_csv(const std::vector<Cycle>& cycles, const InputTrace& input,
                          std::ostream& os);

/// One Table 1 cell evaluated at every azimuth slot; maxima over slots.
struct SweepCell {
  double offset = 0.0, mu = 0.0, height = 0.0;
  std::string id;
  double s_max = 0.0, b_max = 0.0;
};

struct SweepResult {
  std::vector<SweepCell> cells;
  std::vector<std::string> violations;  ///< monotonicity failures, empty on pass
  RunResult run;
};

/// Runs once with every Table 1 cell replicated at `azimuths` evenly spaced
/// slots, so that comparisons between cells do not depend on placement.
SweepResult sweep_table1(const ExperimentConfig& config, int azimuths = 12,
                         double tol = 1e-6);

/// Oracle over a trajectory.csv written by write_outputs.
StabilityReport certify(const std::filesystem::path& trajectory_csv,
                        std::span<const ObjectSpec> manifest, const OracleOptions& opt);

}  // namespace nptray
