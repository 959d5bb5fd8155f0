#include "t3i/oracle.hpp"

#include <fftw3.h>
#include <gsl/gsl_multifit.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>

#include "t3i/errors.hpp"
#include "t3i/phasespace.hpp"

namespace t3i {

namespace {

using cplx = std::complex<double>;
constexpr double pi = std::numbers::pi;

// FFTW planning is not thread safe; execution on distinct arrays is.
std::mutex planner_mutex;

class Fft {
public:
  explicit Fft(std::size_t n) : n_(n) {
    std::lock_guard lock(planner_mutex);
    auto* buf = fftw_alloc_complex(n);
    const int len = static_cast<int>(n);
    fwd_ = fftw_plan_dft_1d(len, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
    bwd_ = fftw_plan_dft_1d(len, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(buf);
  }
  ~Fft() {
    std::lock_guard lock(planner_mutex);
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(bwd_);
  }
  Fft(const Fft&) = delete;
  Fft& operator=(const Fft&) = delete;

  void forward(std::vector<cplx>& v) const { fftw_execute_dft(fwd_, as_fftw(v), as_fftw(v)); }
  // Unnormalised; callers fold 1/n into their k-space factors.
  void backward(std::vector<cplx>& v) const { fftw_execute_dft(bwd_, as_fftw(v), as_fftw(v)); }

private:
  static fftw_complex* as_fftw(std::vector<cplx>& v) { return reinterpret_cast<fftw_complex*>(v.data()); }
  std::size_t n_;
  fftw_plan fwd_;
  fftw_plan bwd_;
};

const Fft& fft_for(std::size_t n) {
  thread_local std::map<std::size_t, std::unique_ptr<Fft>> cache;
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<Fft>(n);
  return *slot;
}

void require_size(const std::vector<cplx>& psi, const Grid& grid) {
  if (psi.size() != grid.n) throw std::invalid_argument("wavefunction size does not match the grid");
}

std::vector<cplx> potential_phase(const Grid& grid, double a, double dt) {
  // V = -a z, exp(-i V dt) = exp(i a z dt)
  std::vector<cplx> out(grid.n);
  for (std::size_t i = 0; i < grid.n; ++i) out[i] = std::polar(1.0, a * grid.z(i) * dt);
  return out;
}

std::vector<cplx> kinetic_phase(const Grid& grid, double dt) {
  std::vector<cplx> out(grid.n);
  const double inv_n = 1.0 / static_cast<double>(grid.n);
  for (std::size_t i = 0; i < grid.n; ++i) {
    const double k = grid.k(i);
    out[i] = std::polar(inv_n, -0.5 * k * k * dt);
  }
  return out;
}

void multiply(std::vector<cplx>& v, const std::vector<cplx>& f) {
  for (std::size_t i = 0; i < v.size(); ++i) v[i] *= f[i];
}

// One Strang block of `count` steps of size dt.
void strang_steps(std::vector<cplx>& psi, const Grid& grid, double a, double dt, std::size_t count) {
  if (count == 0) return;
  const auto& fft = fft_for(grid.n);
  const auto half = potential_phase(grid, a, 0.5 * dt);
  const auto full = potential_phase(grid, a, dt);
  const auto kin = kinetic_phase(grid, dt);
  multiply(psi, half);
  for (std::size_t s = 0; s < count; ++s) {
    fft.forward(psi);
    multiply(psi, kin);
    fft.backward(psi);
    multiply(psi, s + 1 < count ? full : half);
  }
}

double peak_amplitude(const std::vector<cplx>& psi) {
  double peak = 0.0;
  for (const auto& c : psi) peak = std::max(peak, std::abs(c));
  return peak;
}

// A Gaussian 5 widths from its centre has amplitude exp(-12.5) of its peak.
void check_edges(const std::vector<cplx>& psi, double threshold, const char* what) {
  const double peak = peak_amplitude(psi);
  if (peak == 0.0) return;
  const std::size_t band = std::min<std::size_t>(4, psi.size() / 2);
  for (std::size_t i = 0; i < band; ++i) {
    if (std::abs(psi[i]) > threshold * peak || std::abs(psi[psi.size() - 1 - i]) > threshold * peak)
      throw DomainError(std::string("numeric oracle: ") + what);
  }
}

const double edge_threshold = std::exp(-12.5);

void evolve_checked(std::vector<cplx>& psi, const Grid& grid, double a, double duration, std::size_t steps) {
  if (steps == 0) throw std::invalid_argument("evolution needs at least one step");
  const double dt = duration / static_cast<double>(steps);
  const std::size_t chunk = std::max<std::size_t>(1, (steps + 7) / 8);
  for (std::size_t done = 0; done < steps; done += chunk) {
    strang_steps(psi, grid, a, dt, std::min(chunk, steps - done));
    check_edges(psi, edge_threshold, "packet reached within 5 widths of the grid edge");
  }
}

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

double weighted_laser_phase_without_last(const InterferometerSequence& seq, const std::vector<double>& w) {
  double sum = 0.0;
  for (std::size_t k = 0; k + 1 < w.size(); ++k) sum += w[k] * seq.pulses[k].laser_phase;
  return sum;
}

struct Prepared {
  NaturalScales scales;
  InterferometerSequence seq;
  GaussianPacket packet;
  Grid grid;
};

Prepared prepare(const InterferometerSequence& seq, const GaussianPacket& packet, const PhysicalConstants& consts,
                 const OracleOptions& options) {
  seq.validate();
  Prepared p;
  p.scales = NaturalScales::from(seq.pulses[1].time - seq.pulses[0].time, seq.mass, consts);
  p.seq = p.scales.to_natural(seq);
  p.packet = p.scales.to_natural(packet);
  if (options.grid) {
    p.grid = {options.grid->z_min / p.scales.length, options.grid->z_max / p.scales.length, options.grid->n};
    p.grid.validate();
  } else {
    p.grid = auto_grid(p.seq, p.packet, options.min_points);
  }
  return p;
}

std::size_t segment_steps(const Prepared& p, std::size_t k, const OracleOptions& options) {
  const double dt = p.seq.pulses[k + 1].time - p.seq.pulses[k].time;
  const double amax = std::max(std::abs(p.seq.a1), std::abs(p.seq.a2));
  return steps_for(p.grid, amax, dt, options.phase_tolerance, options.min_steps);
}

}  // namespace

double Grid::k(std::size_t i) const {
  const double dk = 2.0 * pi / (z_max - z_min);
  const auto j = static_cast<double>(i);
  return i < n / 2 ? j * dk : (j - static_cast<double>(n)) * dk;
}

double Grid::k_max() const { return pi / dz(); }

void Grid::validate() const {
  if (n < 256 || (n & (n - 1)) != 0) throw std::invalid_argument("grid size must be a power of two >= 256");
  if (!(z_max > z_min)) throw std::invalid_argument("grid requires z_max > z_min");
}

double GridWavefunction::population(InternalLabel label) const {
  const auto& v = label == InternalLabel::g1 ? g1 : g2;
  double s = 0.0;
  for (const auto& c : v) s += std::norm(c);
  return s * grid.dz();
}

std::pair<double, double> GridWavefunction::moments(InternalLabel label) const {
  const auto& v = label == InternalLabel::g1 ? g1 : g2;
  double w = 0.0, m1 = 0.0, m2 = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double p = std::norm(v[i]), z = grid.z(i);
    w += p;
    m1 += p * z;
    m2 += p * z * z;
  }
  if (w == 0.0) return {0.0, 0.0};
  const double mean = m1 / w;
  return {mean, std::sqrt(std::max(0.0, m2 / w - mean * mean))};
}

NaturalScales NaturalScales::from(double time_unit, double mass, const PhysicalConstants& consts) {
  if (!(time_unit > 0.0) || !(mass > 0.0)) throw std::invalid_argument("natural scales need positive time and mass");
  return {time_unit, std::sqrt(consts.hbar * time_unit / mass), mass, consts.hbar};
}

GaussianPacket NaturalScales::to_natural(const GaussianPacket& p) const {
  GaussianPacket out = p;
  out.center = p.center / length;
  out.velocity = p.velocity / velocity();
  out.width = p.width / length;
  out.elapsed = p.elapsed / time;
  out.time = 0.0;
  return out;
}

InterferometerSequence NaturalScales::to_natural(const InterferometerSequence& seq) const {
  InterferometerSequence out = seq;
  const double t0 = seq.t0();
  for (auto& p : out.pulses) p.time = (p.time - t0) / time;
  out.a1 = seq.a1 / acceleration();
  out.a2 = seq.a2 / acceleration();
  out.mass = 1.0;
  return out;
}

GridWavefunction init_gaussian(const Grid& grid, const GaussianPacket& packet, InternalLabel internal) {
  grid.validate();
  GridWavefunction psi{grid, std::vector<cplx>(grid.n), std::vector<cplx>(grid.n), packet.time};
  auto& target = internal == InternalLabel::g1 ? psi.g1 : psi.g2;
  for (std::size_t i = 0; i < grid.n; ++i) target[i] = packet.evaluate(grid.z(i), 1.0, 1.0);
  check_edges(target, 1e-12, "packet does not fit the grid");
  return psi;
}

std::size_t steps_for(const Grid& grid, double a_max, double duration, double phase_tol, std::size_t min_steps) {
  if (duration < 0.0) throw std::invalid_argument("duration must be non-negative");
  if (!(phase_tol > 0.0)) throw std::invalid_argument("phase tolerance must be positive");
  const double a = std::abs(a_max);
  const double length = grid.z_max - grid.z_min;
  const double excursion = std::ceil(a * length * duration / (pi / 4));
  const double splitting = std::ceil(std::sqrt(a * a * duration * duration * duration / (24.0 * phase_tol)));
  return std::max({static_cast<std::size_t>(excursion), static_cast<std::size_t>(splitting), min_steps,
                   std::size_t{1}});
}

GridWavefunction evolve_linear(GridWavefunction psi, double a1, double a2, double duration, std::size_t steps) {
  if (duration < 0.0) throw std::invalid_argument("duration must be non-negative");
  if (duration == 0.0) return psi;
  require_size(psi.g1, psi.grid);
  require_size(psi.g2, psi.grid);
  evolve_checked(psi.g1, psi.grid, a1, duration, steps);
  evolve_checked(psi.g2, psi.grid, a2, duration, steps);
  psi.time += duration;
  return psi;
}

GridWavefunction apply_pulse(GridWavefunction psi, double area, double laser_phase) {
  // one 2x2 map for every point; reuse the aggregate action on basis vectors
  const auto col1 = pulse_unitary_action(area, laser_phase, {1.0, 0.0});
  const auto col2 = pulse_unitary_action(area, laser_phase, {0.0, 1.0});
  for (std::size_t i = 0; i < psi.g1.size(); ++i) {
    const cplx c1 = psi.g1[i], c2 = psi.g2[i];
    psi.g1[i] = col1.c1 * c1 + col2.c1 * c2;
    psi.g2[i] = col1.c2 * c1 + col2.c2 * c2;
  }
  return psi;
}

void apply_free_evolution(std::vector<cplx>& psi, const Grid& grid, double t) {
  require_size(psi, grid);
  const auto& fft = fft_for(grid.n);
  fft.forward(psi);
  multiply(psi, kinetic_phase(grid, t));
  fft.backward(psi);
}

void apply_displacement(std::vector<cplx>& psi, const Grid& grid, double Z, double P) {
  // D(Z, P) psi(z) = e^{i P (z - Z/2)} psi(z - Z); the shift is done spectrally
  require_size(psi, grid);
  const auto& fft = fft_for(grid.n);
  const double inv_n = 1.0 / static_cast<double>(grid.n);
  fft.forward(psi);
  for (std::size_t i = 0; i < grid.n; ++i) psi[i] *= std::polar(inv_n, -grid.k(i) * Z);
  fft.backward(psi);
  for (std::size_t i = 0; i < grid.n; ++i) psi[i] *= std::polar(1.0, P * (grid.z(i) - 0.5 * Z));
}

void apply_normal_form(std::vector<cplx>& psi, const Grid& grid, const OperatorNormalForm& op) {
  apply_free_evolution(psi, grid, op.free_time);
  apply_displacement(psi, grid, op.disp_Z, op.disp_P);
  const cplx g = std::polar(1.0, op.phase);
  for (auto& c : psi) c *= g;
}

void evolve_component(std::vector<cplx>& psi, const Grid& grid, double a, double duration, std::size_t steps) {
  require_size(psi, grid);
  if (duration == 0.0) return;
  evolve_checked(psi, grid, a, duration, steps);
}

double l2_distance(std::span<const cplx> a, std::span<const cplx> b, double dz) {
  if (a.size() != b.size()) throw std::invalid_argument("l2_distance needs equal sizes");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::norm(a[i] - b[i]);
  return std::sqrt(s * dz);
}

cplx inner_product(std::span<const cplx> a, std::span<const cplx> b, double dz) {
  if (a.size() != b.size()) throw std::invalid_argument("inner_product needs equal sizes");
  cplx s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
  return s * dz;
}

Grid auto_grid(const InterferometerSequence& seq, const GaussianPacket& packet, std::size_t min_points) {
  seq.validate();
  const double t0 = seq.t0(), t_end = seq.pulses.back().time;
  double zlo = packet.center, zhi = packet.center, pmax = std::abs(packet.velocity);
  for (auto br : {Branch::lower, Branch::upper}) {
    const auto prof = BranchForceProfile::from_sequence(seq, br);
    const int samples = 256 * static_cast<int>(seq.pulses.size());
    for (int i = 0; i <= samples; ++i) {
      const double t = t0 + (t_end - t0) * i / samples;
      const auto chi = classical_solution({packet.center, packet.velocity}, prof, t, 1.0);
      zlo = std::min(zlo, chi.R);
      zhi = std::max(zhi, chi.R);
      pmax = std::max(pmax, std::abs(chi.P));
    }
  }
  GaussianPacket last = packet;
  last.elapsed += t_end - t0;
  const double w = std::max(packet.current_width(1.0, 1.0), last.current_width(1.0, 1.0));
  zlo -= 12.0 * w;
  zhi += 12.0 * w;
  pmax += 10.0 / packet.width;
  const double dz_max = pi / pmax;
  const auto needed = static_cast<std::size_t>(std::ceil((zhi - zlo) / dz_max));
  const std::size_t n = next_pow2(std::max({needed, min_points, std::size_t{256}}));
  if (n > (std::size_t{1} << 24)) throw DomainError("numeric oracle: required grid exceeds 2^24 points");
  return {zlo, zhi, n};
}

OracleResult run_sequence_numeric(const InterferometerSequence& seq, const GaussianPacket& packet,
                                  const PhysicalConstants& consts, const OracleOptions& options) {
  const auto p = prepare(seq, packet, consts, options);
  const auto& s = p.seq;
  OracleResult r;
  r.grid = p.grid;

  auto psi = init_gaussian(p.grid, p.packet, options.initial);
  const double norm0 = psi.norm();
  for (std::size_t k = 0; k < s.pulses.size(); ++k) {
    psi = apply_pulse(std::move(psi), s.pulses[k].area, s.pulses[k].laser_phase);
    if (k + 1 < s.pulses.size()) {
      const auto steps = segment_steps(p, k, options);
      psi = evolve_linear(std::move(psi), s.a1, s.a2, s.pulses[k + 1].time - s.pulses[k].time, steps);
      r.steps += steps;
    }
  }
  r.P_g1 = psi.population(InternalLabel::g1);
  r.P_g2 = psi.population(InternalLabel::g2);
  r.norm_drift = std::abs(psi.norm() - norm0);

  if (options.branch_overlap) {
    auto start = init_gaussian(p.grid, p.packet, InternalLabel::g1).g1;
    std::vector<cplx> lower = start, upper = std::move(start);
    const auto acc_l = branch_accelerations(s, Branch::lower);
    const auto acc_u = branch_accelerations(s, Branch::upper);
    for (std::size_t k = 0; k + 1 < s.pulses.size(); ++k) {
      const double dt = s.pulses[k + 1].time - s.pulses[k].time;
      const auto steps = segment_steps(p, k, options);
      evolve_component(lower, p.grid, acc_l[k], dt, steps);
      evolve_component(upper, p.grid, acc_u[k], dt, steps);
    }
    r.overlap = inner_product(upper, lower, p.grid.dz());
    r.contrast = std::abs(r.overlap);
    r.phase = std::arg(r.overlap);
  }
  return r;
}

std::vector<FringePoint> fringe_scan_numeric(const InterferometerSequence& seq, const GaussianPacket& packet,
                                             std::span<const double> laser_totals, const PhysicalConstants& consts,
                                             const OracleOptions& options) {
  const auto p = prepare(seq, packet, consts, options);
  const auto& s = p.seq;
  auto psi = init_gaussian(p.grid, p.packet, options.initial);
  for (std::size_t k = 0; k + 1 < s.pulses.size(); ++k) {
    psi = apply_pulse(std::move(psi), s.pulses[k].area, s.pulses[k].laser_phase);
    psi = evolve_linear(std::move(psi), s.a1, s.a2, s.pulses[k + 1].time - s.pulses[k].time,
                        segment_steps(p, k, options));
  }
  const auto w = laser_phase_weights(s.pulses.size());
  const double fixed = weighted_laser_phase_without_last(s, w);
  const auto& last = s.pulses.back();
  std::vector<FringePoint> out;
  out.reserve(laser_totals.size());
  for (double x : laser_totals) {
    const auto fin = apply_pulse(psi, last.area, (x - fixed) / w.back());
    out.push_back({x, fin.population(InternalLabel::g1), fin.population(InternalLabel::g2)});
  }
  return out;
}

FringeFit extract_phase_from_fringe(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n != y.size()) throw std::invalid_argument("fringe scan needs matching x and y");
  if (n < 8) throw std::invalid_argument("fringe scan needs at least 8 points");
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  // a uniform scan of n points over one period stops one step short of 2 pi
  const double coverage = (*hi - *lo) * static_cast<double>(n) / static_cast<double>(n - 1);
  if (coverage < 2 * pi * (1 - 1e-9)) throw std::invalid_argument("fringe scan must span at least 2 pi");

  gsl_matrix* X = gsl_matrix_alloc(n, 3);
  gsl_vector* Y = gsl_vector_alloc(n);
  gsl_vector* c = gsl_vector_alloc(3);
  gsl_matrix* cov = gsl_matrix_alloc(3, 3);
  gsl_multifit_linear_workspace* work = gsl_multifit_linear_alloc(n, 3);
  for (std::size_t i = 0; i < n; ++i) {
    gsl_matrix_set(X, i, 0, 1.0);
    gsl_matrix_set(X, i, 1, std::cos(x[i]));
    gsl_matrix_set(X, i, 2, std::sin(x[i]));
    gsl_vector_set(Y, i, y[i]);
  }
  double chisq = 0.0;
  gsl_multifit_linear(X, Y, c, cov, &chisq, work);
  const double A = gsl_vector_get(c, 0), cc = gsl_vector_get(c, 1), ss = gsl_vector_get(c, 2);
  gsl_multifit_linear_free(work);
  gsl_matrix_free(cov);
  gsl_vector_free(c);
  gsl_vector_free(Y);
  gsl_matrix_free(X);

  // A + B cos(x + phi) = A + B cos(phi) cos(x) - B sin(phi) sin(x)
  FringeFit fit;
  fit.offset = A;
  fit.amplitude = std::hypot(cc, ss);
  fit.visibility = A != 0.0 ? fit.amplitude / std::abs(A) : 0.0;
  fit.rms_residual = std::sqrt(chisq / static_cast<double>(n));
  fit.degenerate = !(fit.visibility >= 1e-6);
  fit.phase = fit.degenerate ? 0.0 : std::atan2(-ss, cc);
  return fit;
}

namespace {

struct SimpsonPanel {
  double a, b;
  cplx fa, fm, fb, whole;
  int depth;
};

cplx adaptive_simpson(const std::function<cplx(double)>& f, double a, double b, double tol) {
  cplx total = 0.0;
  const double m = 0.5 * (a + b);
  const cplx fa = f(a), fm = f(m), fb = f(b);
  std::vector<SimpsonPanel> stack{{a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), 0}};
  while (!stack.empty()) {
    const auto p = stack.back();
    stack.pop_back();
    const double mid = 0.5 * (p.a + p.b);
    const double lm = 0.5 * (p.a + mid), rm = 0.5 * (mid + p.b);
    const cplx flm = f(lm), frm = f(rm);
    const cplx left = (mid - p.a) / 6.0 * (p.fa + 4.0 * flm + p.fm);
    const cplx right = (p.b - mid) / 6.0 * (p.fm + 4.0 * frm + p.fb);
    const cplx diff = left + right - p.whole;
    const double local_tol = tol * (p.b - p.a);
    if (std::abs(diff) <= 15.0 * local_tol || p.depth >= 40) {
      total += left + right + diff / 15.0;
    } else {
      stack.push_back({p.a, mid, p.fa, flm, p.fm, left, p.depth + 1});
      stack.push_back({mid, p.b, p.fm, frm, p.fb, right, p.depth + 1});
    }
  }
  return total;
}

}  // namespace

cplx huygens_integral(const std::function<cplx(double)>& psi0, double z_lo, double z_hi, const LinearPotential& pot,
                      double t, double z_f, const PhysicalConstants& consts, double rel_tol) {
  if (!(t > 0.0)) throw std::invalid_argument("huygens_integral requires t > 0");
  if (!(z_hi > z_lo)) throw std::invalid_argument("huygens_integral requires z_hi > z_lo");
  const double m = pot.mass, hbar = consts.hbar;
  const cplx norm = std::sqrt(m / (2.0 * pi * hbar * t)) * std::polar(1.0, -pi / 4);
  auto integrand = [&](double zi) {
    return norm * std::polar(1.0, classical_action(zi, 0.0, z_f, t, pot) / hbar) * psi0(zi);
  };

  // panels resolve the kernel's phase rate; psi0 is assumed smooth on that scale
  const double rate = std::max(std::abs(-m * (z_f - z_lo) / t + 0.5 * pot.force * t),
                               std::abs(-m * (z_f - z_hi) / t + 0.5 * pot.force * t)) /
                      hbar;
  const auto panels = static_cast<std::size_t>(
      std::clamp(std::ceil(rate * (z_hi - z_lo) / (pi / 4)), 64.0, 4.0e6));
  const double h = (z_hi - z_lo) / static_cast<double>(panels);

  double scale = 0.0;
  for (std::size_t i = 0; i <= panels; ++i) scale += std::abs(psi0(z_lo + h * static_cast<double>(i)));
  scale *= std::abs(norm) * h;
  const double tol = rel_tol * std::max(scale, 1e-300) / (z_hi - z_lo);

  cplx total = 0.0;
  for (std::size_t i = 0; i < panels; ++i) {
    const double a = z_lo + h * static_cast<double>(i);
    total += adaptive_simpson(integrand, a, i + 1 == panels ? z_hi : a + h, tol);
  }
  return total;
}

}  // namespace t3i
