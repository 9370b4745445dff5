#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "matmi/config.hpp"
#include "matmi/current.hpp"

namespace matmi {

// J + level * rms(J) * G, with rms(J) = ||J||_L2 / sqrt(|Omega|) and G per
// triangle a Gaussian vector with E|G|^2 = 1 (components N(0, 1/2)), so the
// relative L2 size of the perturbation is `level`.
VectorField add_noise(const VectorField& current, double level, std::uint64_t key);
// Same model on a boundary record, per sample, relative to the record rms.
BoundaryRecord add_noise(const BoundaryRecord& record, double level, std::uint64_t key);

// Area-weighted average of a fine per-triangle field over the coarse
// triangles containing the fine centroids.
VectorField transfer_current(const VectorField& fine, const MeshPtr& coarse);

struct GroundTruth {
  MeshPtr mesh;                       // working mesh
  ScalarField sigma;                  // phantom on the working mesh
  MeshPtr reference_mesh;             // where the data were synthesized
  ScalarField reference_sigma;
  std::vector<VectorField> reference_currents;
  std::vector<VectorField> currents;  // exact data on the working mesh
};

GroundTruth make_ground_truth(const ExperimentConfig& cfg);

struct ChainResult {
  ScalarField true_source;   // on the reference mesh
  BoundaryRecord record;
  ScalarField source;        // reconstructed, working mesh
  ScalarField stream;
  VectorField current;
  SourceRecoveryInfo info;
};

// Lorentz source -> wave -> boundary record -> f0 -> w -> J for one excitation.
// record_noise > 0 perturbs the record with the given stream key.
ChainResult run_acoustic_chain(const ExperimentConfig& cfg, const GroundTruth& truth, std::size_t excitation,
                               double record_noise = 0.0, std::uint64_t key = 0);

struct SweepResult {
  double noise_level = 0.0;
  Algorithm algorithm = Algorithm::OrthogonalField;
  double mean_error = 0.0;
  double std_error = 0.0;
  std::vector<double> errors;  // successful realizations, in order
  int failures = 0;
};

struct PipelineOutcome {
  std::vector<SweepResult> results;
  int total_runs = 0;
  int failed_runs = 0;
};

// Noise sweep over configured levels and realizations. Writes (when
// write_outputs) sweep.csv, per-realization JSON, reports and fields under
// cfg.output.
PipelineOutcome run_pipeline(const ExperimentConfig& cfg, bool write_outputs = true);

std::string sweep_csv(const std::vector<SweepResult>& results);
// 17 significant digits.
std::string format_double(double v);

}  // namespace matmi
