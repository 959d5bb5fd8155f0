#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "t3i/calibration.hpp"
#include "t3i/seqfile.hpp"

namespace t3i {

enum class Engine { operator_algebra, phasespace, oracle };

std::string engine_name(Engine e);
/// "operator", "phasespace", "oracle"; throws std::invalid_argument otherwise.
Engine parse_engine(const std::string& name);

struct EngineReport {
  Engine engine;
  double T = 0.0;  // first pulse separation
  double a1 = 0.0;
  double a2 = 0.0;
  double phi_i = 0.0;
  double phi_L = 0.0;
  std::optional<double> contrast;
  bool closed = false;
};

struct RunReport {
  std::vector<EngineReport> engines;
  std::optional<double> max_pairwise_deviation;  // rad, modulo 2 pi
  double seconds = 0.0;
};

struct PhaseOptions {
  std::vector<Engine> engines{Engine::operator_algebra};
  bool require_closed = false;
  std::size_t grid_points = 4096;
  std::size_t fringe_points = 16;
};

/// Runs the selected engines. Engine failures are rethrown with the engine
/// name prefixed; DomainError keeps its type.
RunReport cmd_phase(const SequenceFile& file, const PhaseOptions& options);
void write_phase_csv(const RunReport& report, std::ostream& out);

struct FringeOptions {
  Engine engine = Engine::operator_algebra;
  std::optional<std::size_t> pulse;  // index of the scanned pulse, default last
  double from = 0.0;                 // rad, phase of the scanned pulse
  double to = 6.283185307179586;
  std::size_t points = 64;
  std::size_t grid_points = 4096;
};

std::vector<FringePoint> cmd_fringe(const SequenceFile& file, const FringeOptions& options);
void write_fringe_csv(const std::vector<FringePoint>& rows, std::ostream& out);

struct ClosureReport {
  double a1 = 0.0;
  double a2 = 0.0;
  double t10 = 0.0;
  double t21 = 0.0;
  double t32 = 0.0;
  bool closed = false;  // the solved sequence checked by the operator engine
};

ClosureReport cmd_closure(double a1, double a2, double t10);
ClosureReport cmd_closure(const SequenceFile& file);
void write_closure_csv(const ClosureReport& report, std::ostream& out);
/// The file with its pulses moved to t0, t0 + t10, t0 + t10 + t21, ...
SequenceFile closure_sequence(const SequenceFile& file, const ClosureReport& report);

/// z_m,B_uT[,sigma_uT] with an optional header row.
std::vector<FieldMapPoint> read_field_map_csv(std::istream& in);
/// detuning_kHz,population with an optional header row.
std::vector<SpectrumSample> read_spectrum_csv(std::istream& in);
void write_field_map_csv(std::span<const FieldMapPoint> points, std::ostream& out);

void write_gradient_csv(const GradientFit& fit, std::size_t n_points, std::ostream& out);
void write_residuals_csv(std::span<const FieldMapPoint> points, const GradientFit& fit, std::ostream& out);

struct SpectrumOptions {
  int k = 2;  // k-th peak above the clock line
  RamanTransition transition = RamanTransition::plus_two();
  double min_prominence = 0.05;
};

/// Field at one height from a spectrum.
double field_from_spectrum(std::span<const SpectrumSample> spectrum, const SpectrumOptions& options);
/// Reads dir/spectra.csv (file,z_m) and every spectrum it lists.
std::vector<FieldMapPoint> field_map_from_spectra(const std::filesystem::path& dir, const SpectrumOptions& options);

struct MonteCarloOptions {
  double B0 = 83.5e-6;        // T
  double gradient = -587e-6;  // T/m
  double noise = 0.5e-6;      // T, Gaussian sigma
  double span = 0.1;          // m
  std::size_t points = 10;
  std::size_t trials = 1000;
  std::uint64_t seed = 1;
};

struct MonteCarloReport {
  std::size_t trials = 0;
  double mean = 0.0;  // T/m
  double stddev = 0.0;
  double ci_low = 0.0;  // 2.5 and 97.5 percentiles
  double ci_high = 0.0;
  double ols_stddev = 0.0;  // sigma / sqrt(sum (z - zbar)^2)
};

MonteCarloReport gradient_monte_carlo(const MonteCarloOptions& options);
void write_monte_carlo_csv(const MonteCarloReport& report, std::ostream& out);

void write_alpha_csv(double tau_min, double tau_max, int points, std::ostream& out);

/// gnuplot command for the CSV written by a subcommand.
std::string gnuplot_hint(const std::string& command, const std::string& csv_path = "out.csv");

}  // namespace t3i
