#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "matmi/forward.hpp"

namespace matmi {

struct Sensor {
  Vec2 position;
  Vec2 normal;            // outward unit normal
  double curvature = 0;   // of the boundary at the sensor
  double weight = 0;      // boundary quadrature weight (arc length)
};

// Equally spaced (in arc length) sensors on the exact ellipse.
std::vector<Sensor> ellipse_sensors(const Ellipse& domain, int count);
// Sensor geometry reconstructed from a closed counterclockwise polygon.
std::vector<Sensor> polygon_sensors(const std::vector<Vec2>& positions);

// Neumann trace g = dp/dnu sampled at sensors, sensor-major storage.
struct BoundaryRecord {
  std::vector<Sensor> sensors;
  double dt = 0.0;
  std::size_t steps = 0;
  std::vector<double> samples;
  AcousticMedium medium;

  double duration() const { return dt * static_cast<double>(steps > 0 ? steps - 1 : 0); }
  double& at(std::size_t s, std::size_t n) { return samples[s * steps + n]; }
  double at(std::size_t s, std::size_t n) const { return samples[s * steps + n]; }
  void validate(double diameter = 0.0) const;
};

struct WaveOptions {
  double grid_spacing = 0.01;
  double cfl = 0.5;
  double dt = 0.0;          // 0: cfl * grid_spacing / c0
  double t_final = 0.0;     // 0: 2.5 * diameter / c0
  int sensors = 256;
  int record_stride = 1;
  double min_arm = 0.35;    // Shortley-Weller arms are clamped below at min_arm * dx
};

struct WaveDiagnostics {
  std::vector<double> energy;  // discrete energy after each step
  double dt = 0.0;
  int grid_nx = 0, grid_ny = 0, interior_points = 0;
};

BoundaryRecord simulate_wave(const ScalarField& source, const AcousticMedium& medium,
                             const Ellipse& domain, const WaveOptions& options,
                             WaveDiagnostics* diagnostics = nullptr);

void write_record(std::ostream& os, const BoundaryRecord& record);
BoundaryRecord read_record(std::istream& is);
void write_record(const std::string& path, const BoundaryRecord& record);
BoundaryRecord read_record(const std::string& path);

}  // namespace matmi
