#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "qmeasure/errors.hpp"
#include "qmeasure/experiments.hpp"
#include "qmeasure/parallel.hpp"

namespace qmeasure {

void SlitGeometry::validate() const {
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!positive(slit_separation) || !positive(slit_width) || !positive(wavelength) || !positive(screen_distance)) {
    throw GeometryError("slit lengths, wavelength and screen distance must be positive");
  }
  if (!(x_max > x_min) || !std::isfinite(x_min) || !std::isfinite(x_max)) throw GeometryError("empty screen range");
  if (n_points < 64) throw GeometryError("the screen grid needs at least 64 points");
  if (!(weights[0] >= 0.0) || !(weights[1] >= 0.0)) throw GeometryError("slit weights must be nonnegative");
}

bool SlitGeometry::far_field() const {
  return slit_separation * slit_separation / (wavelength * screen_distance) < 1.0;
}

Complex slit_amplitude(const SlitGeometry& geom, int slit, double x) {
  const double sign = slit == 0 ? 1.0 : -1.0;
  const double lambda_l = geom.wavelength * geom.screen_distance;
  const double k = M_PI * geom.slit_width / lambda_l;
  const double u = (x - sign * geom.slit_separation / 2.0) * k;
  const double envelope = std::exp(-0.5 * u * u);
  const double phase = M_PI * x * sign * geom.slit_separation / lambda_l;
  return geom.weights[static_cast<std::size_t>(slit)] * envelope * std::polar(1.0, phase);
}

IntensityProfile double_slit(const SlitGeometry& geom, std::array<bool, 2> open) {
  geom.validate();
  if (!open[0] && !open[1]) throw GeometryError("both slits closed: no photons reach the screen");

  IntensityProfile profile;
  profile.dx = geom.grid_step();
  profile.x.resize(geom.n_points);
  profile.density.resize(geom.n_points);

  constexpr std::size_t kChunk = 1024;
  const std::size_t chunks = (geom.n_points + kChunk - 1) / kChunk;
  parallel_for(chunks, [&](std::size_t c) {
    const std::size_t end = std::min(geom.n_points, (c + 1) * kChunk);
    for (std::size_t k = c * kChunk; k < end; ++k) {
      const double x = geom.x_min + static_cast<double>(k) * profile.dx;
      Complex amp = 0.0;
      for (int s = 0; s < 2; ++s) {
        if (open[static_cast<std::size_t>(s)]) amp += slit_amplitude(geom, s, x);
      }
      profile.x[k] = x;
      profile.density[k] = std::norm(amp);
    }
  });

  double total = 0.0;
  for (double d : profile.density) total += d * profile.dx;
  if (!(total > 0.0)) throw GeometryError("profile vanishes on the grid");
  profile.bin_probability.resize(geom.n_points);
  for (std::size_t k = 0; k < geom.n_points; ++k) {
    profile.density[k] /= total;
    profile.bin_probability[k] = profile.density[k] * profile.dx;
  }
  return profile;
}

std::vector<std::size_t> local_maxima(const IntensityProfile& profile) {
  std::vector<std::size_t> out;
  const auto& d = profile.density;
  for (std::size_t k = 1; k + 1 < d.size(); ++k) {
    if (d[k] > d[k - 1] && d[k] >= d[k + 1]) out.push_back(k);
  }
  return out;
}

namespace {

// Index into `maxima` of the highest peak, ties going to the one nearest x = 0.
std::size_t central_peak(const IntensityProfile& profile, const std::vector<std::size_t>& maxima) {
  std::size_t best = 0;
  for (std::size_t m = 1; m < maxima.size(); ++m) {
    const double a = profile.density[maxima[m]];
    const double b = profile.density[maxima[best]];
    if (a > b * (1.0 + 1e-12) ||
        (a >= b * (1.0 - 1e-12) && std::abs(profile.x[maxima[m]]) < std::abs(profile.x[maxima[best]]))) {
      best = m;
    }
  }
  return best;
}

}  // namespace

std::optional<double> fringe_spacing(const IntensityProfile& profile) {
  const auto maxima = local_maxima(profile);
  if (maxima.size() < 3) return std::nullopt;
  const std::size_t c = central_peak(profile, maxima);
  if (c == 0 || c + 1 >= maxima.size()) return std::nullopt;
  return (profile.x[maxima[c + 1]] - profile.x[maxima[c - 1]]) / 2.0;
}

double fringe_visibility(const IntensityProfile& profile) {
  const auto maxima = local_maxima(profile);
  if (maxima.size() < 2) return 0.0;
  const std::size_t c = central_peak(profile, maxima);
  const std::size_t next = c + 1 < maxima.size() ? c + 1 : c - 1;
  const std::size_t lo = std::min(maxima[c], maxima[next]);
  const std::size_t hi = std::max(maxima[c], maxima[next]);
  double i_min = profile.density[lo];
  for (std::size_t k = lo; k <= hi; ++k) i_min = std::min(i_min, profile.density[k]);
  const double i_max = profile.density[maxima[c]];
  return (i_max - i_min) / (i_max + i_min);
}

void emit_csv(const IntensityProfile& profile, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out << "x,density\n";
  char line[64];
  for (std::size_t k = 0; k < profile.x.size(); ++k) {
    std::snprintf(line, sizeof line, "%.17g,%.17g\n", profile.x[k], profile.density[k]);
    out << line;
  }
  out.flush();
  if (!out) throw Error("write to '" + path.string() + "' failed");
}

IntensityProfile read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  std::string line;
  std::getline(in, line);
  if (line != "x,density") throw Error("unexpected CSV header '" + line + "'");
  IntensityProfile profile;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw Error("malformed CSV row '" + line + "'");
    profile.x.push_back(std::stod(line.substr(0, comma)));
    profile.density.push_back(std::stod(line.substr(comma + 1)));
  }
  if (profile.x.size() >= 2) profile.dx = profile.x[1] - profile.x[0];
  for (double d : profile.density) profile.bin_probability.push_back(d * profile.dx);
  return profile;
}

}  // namespace qmeasure
