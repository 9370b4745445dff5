#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "matmi/acoustic.hpp"
#include "matmi/errors.hpp"
#include "matmi/inversion.hpp"

namespace matmi {

class ConfigError : public ParameterError {
 public:
  using ParameterError::ParameterError;
};

enum class PipelineMode { CurrentGiven, FullChain };
enum class NoiseTarget { Current, Record };

struct MeshParams {
  double semi_axis_x = 2.0;
  double semi_axis_y = 1.0;
  double h = 0.04;
  // > 0: synthetic currents are computed on a finer mesh of this size and
  // averaged onto the working mesh, so the data are not generated by the
  // same discretization that inverts them.
  double reference_h = 0.0;

  Ellipse ellipse() const { return {semi_axis_x, semi_axis_y}; }
};

struct ExperimentConfig {
  MeshParams mesh;
  PhantomSpec phantom;
  std::vector<ExcitationSpec> excitations;  // at least one
  AcousticMedium medium;
  WaveOptions wave;
  SourceRecoveryOptions imaging;
  PipelineMode mode = PipelineMode::CurrentGiven;
  NoiseTarget noise_target = NoiseTarget::Current;
  std::vector<Algorithm> algorithms{Algorithm::OrthogonalField};
  InversionConfig oc, fp, of;
  int oc_excitations = 1;  // 1 or 2 (Landweber with two excitations)
  std::vector<double> noise_levels{0.0};
  int realizations = 1;
  std::uint64_t seed = 20240501;
  int jobs = 1;
  std::string output = "matmi-out";

  const InversionConfig& inversion(Algorithm a) const;
  void validate() const;
};

// Defaults reproducing the elliptical experiment.
ExperimentConfig default_config();

// INI-style file: [section] headers and key = value lines.
ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(const std::string& text);

std::string to_string(PipelineMode m);

}  // namespace matmi
