#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <vector>

#include "qmeasure/measurement.hpp"
#include "qmeasure/report.hpp"

namespace qmeasure {

// ---------------------------------------------------------------------------
// Stern-Gerlach

enum class SpinInput { y_plus, z_plus };

struct SternGerlachOptions {
  std::size_t shots = 100000;  // 0: exact probabilities only
  SpinInput input = SpinInput::y_plus;
};

/// The magnet marks the z spin with a path factor ("upper"/"lower"); the screen
/// reads the path after the spin is traced out.
RunReport stern_gerlach(const SternGerlachOptions& options, RngStream& rng);

// ---------------------------------------------------------------------------
// Mach-Zehnder

struct MachZehnderOptions {
  bool second_mirror = false;
  double phase = 0.0;          // extra phase on the lower arm, radians
  std::size_t shots = 100000;  // 0: exact probabilities only
};

/// Symmetric 50/50 beam splitter, i on reflection: (1/sqrt 2) [[1, i], [i, 1]].
Matrix beam_splitter();

/// Path state just before the receivers ("upper" = e0).
StateVector mach_zehnder_path_state(bool second_mirror, double phase);

/// Receiver probabilities (D1, D2); with the second mirror these are
/// (sin^2(phase/2), cos^2(phase/2)).
std::array<double, 2> mach_zehnder_probabilities(bool second_mirror, double phase);

RunReport mach_zehnder(const MachZehnderOptions& options, RngStream& rng);

// ---------------------------------------------------------------------------
// Double slit

struct SlitGeometry {
  double slit_separation = 50e-6;
  double slit_width = 2.5e-6;
  double wavelength = 500e-9;
  double screen_distance = 1.0;
  double x_min = -0.05;
  double x_max = 0.05;
  std::size_t n_points = 2001;
  /// Relative amplitude weights of the two slits.
  std::array<double, 2> weights{1.0, 1.0};

  void validate() const;
  double fringe_period() const { return wavelength * screen_distance / slit_separation; }
  double grid_step() const { return (x_max - x_min) / static_cast<double>(n_points - 1); }
  /// Fraunhofer number d^2 / (lambda L) below 1.
  bool far_field() const;
};

struct IntensityProfile {
  std::vector<double> x;
  std::vector<double> density;           // normalized: sum(density) * dx = 1
  std::vector<double> bin_probability;   // density * dx
  double dx = 0.0;
};

/// Amplitude w_i(x) reaching the screen from slit i (0 at +d/2, 1 at -d/2):
/// Gaussian aperture envelope times the far-field path phase.
Complex slit_amplitude(const SlitGeometry& geom, int slit, double x);

/// |sum of open w_i(x)|^2 on the grid, normalized by Riemann sum.
IntensityProfile double_slit(const SlitGeometry& geom, std::array<bool, 2> open);

/// Interior strict local maxima (rising into, not rising out of, the point).
std::vector<std::size_t> local_maxima(const IntensityProfile& profile);

/// Mean distance between the central maximum and its nearest neighbours on
/// each side; nullopt if fewer than three maxima exist.
std::optional<double> fringe_spacing(const IntensityProfile& profile);

/// (Imax - Imin)/(Imax + Imin) using the central maximum and the adjacent minimum.
double fringe_visibility(const IntensityProfile& profile);

/// CSV with header "x,density", one row per grid point, 17 significant digits.
void emit_csv(const IntensityProfile& profile, const std::filesystem::path& path);
IntensityProfile read_csv(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// CHSH

struct ChshSetting {
  double a = 0.0;
  double a_prime = M_PI / 2.0;
  double b = M_PI / 4.0;
  double b_prime = 3.0 * M_PI / 4.0;
};

/// cos(theta) Z + sin(theta) X
Matrix spin_observable(double theta);
/// Projectors onto the +1 and -1 eigenspaces of spin_observable(theta).
Povm spin_povm(double theta);

/// E(a, b) = <A(a) (x) A(b)> from the four joint outcome probabilities.
double correlator(const DensityMatrix& rho, double a, double b);

struct ChshResult {
  double s = 0.0;
  std::array<double, 4> correlators{};  // E(a,b), E(a,b'), E(a',b), E(a',b')
  std::optional<double> s_sampled;
  std::array<double, 4> sampled_correlators{};
  std::size_t shots = 0;
  double sampled_sigma = 0.0;  // standard error of s_sampled
};

/// S = E(a,b) - E(a,b') + E(a',b) + E(a',b'). shots = 0 skips sampling.
ChshResult chsh(const ChshSetting& setting, const StateVector& state, std::size_t shots, RngStream& rng);

}  // namespace qmeasure
