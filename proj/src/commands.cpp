#include "t3i/commands.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <numeric>
#include <ostream>
#include <random>

#include "t3i/errors.hpp"
#include "t3i/phasespace.hpp"

namespace t3i {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

double laser_total(const InterferometerSequence& seq) {
  const auto w = laser_phase_weights(seq.pulses.size());
  double sum = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) sum += w[k] * seq.pulses[k].laser_phase;
  return sum;
}

double wrap(double x) { return std::remainder(x, two_pi); }

OracleOptions oracle_options(const SequenceFile& file, std::size_t grid_points) {
  OracleOptions o;
  o.min_points = grid_points;
  o.grid = file.grid;
  return o;
}

std::string opt(const std::optional<double>& v) { return v ? fmt::format("{}", *v) : std::string(); }

EngineReport run_engine(Engine engine, const SequenceFile& file, const PhaseOptions& options) {
  const auto seq = file.sequence();
  const auto consts = file.constants();
  EngineReport rep;
  rep.engine = engine;
  rep.T = seq.pulses[1].time - seq.pulses[0].time;
  rep.a1 = seq.a1;
  rep.a2 = seq.a2;
  rep.phi_L = laser_total(seq);

  switch (engine) {
    case Engine::operator_algebra: {
      std::optional<GaussianPacket> packet;
      if (file.packet) packet = file.initial_packet();
      const auto r = interferometer_phase(seq, consts, packet);
      rep.phi_i = r.interferometer_phase;
      rep.contrast = r.contrast;
      rep.closed = r.closed;
      break;
    }
    case Engine::phasespace: {
      const auto upper = BranchForceProfile::from_sequence(seq, Branch::upper);
      const auto lower = BranchForceProfile::from_sequence(seq, Branch::lower);
      PhaseSpaceVector chi0{};
      if (file.packet) chi0 = {file.packet->z0, seq.mass * file.packet->v0};
      const auto r = phase_shift_general(upper, lower, rep.phi_L, seq.mass, chi0, consts);
      rep.phi_i = r.phase - rep.phi_L;
      rep.closed = r.closed;
      if (r.closed) rep.contrast = 1.0;
      break;
    }
    case Engine::oracle: {
      const std::size_t n = std::max<std::size_t>(options.fringe_points, 8);
      std::vector<double> x(n);
      for (std::size_t j = 0; j < n; ++j) x[j] = two_pi * static_cast<double>(j) / static_cast<double>(n);
      const auto rows =
          fringe_scan_numeric(seq, file.initial_packet(), x, consts, oracle_options(file, options.grid_points));
      std::vector<double> y;
      for (const auto& r : rows) y.push_back(r.P_g2);
      const auto fit = extract_phase_from_fringe(x, y);
      if (fit.degenerate) throw DomainError("no fringe: the exit populations do not depend on the laser phase");
      rep.phi_i = wrap(fit.phase + (exit_port_sign(seq.pulses.size()) < 0 ? std::numbers::pi : 0.0));
      rep.contrast = fit.visibility;
      rep.closed = interferometer_phase(seq, consts).closed;
      break;
    }
  }
  return rep;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    std::string field = line.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    const auto b = field.find_first_not_of(" \t\r");
    const auto e = field.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string() : field.substr(b, e - b + 1));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::optional<double> to_double(const std::string& s) {
  double v = 0.0;
  const char* first = s.data() + (!s.empty() && s[0] == '+' ? 1 : 0);
  const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty() || !std::isfinite(v)) return std::nullopt;
  return v;
}

// Numeric rows of a CSV with between min_cols and max_cols columns. A first
// row that does not parse is taken as the header.
std::vector<std::vector<double>> read_numeric_csv(std::istream& in, std::size_t min_cols, std::size_t max_cols) {
  std::vector<std::vector<double>> rows;
  std::string line;
  int number = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto fields = split_csv(line);
    std::vector<double> row;
    std::size_t column = 1;
    bool numeric = true;
    for (std::size_t i = 0; i < fields.size(); ++i) {
      const auto v = to_double(fields[i]);
      if (!v) {
        numeric = false;
        break;
      }
      row.push_back(*v);
      column += fields[i].size() + 1;
    }
    if (!numeric) {
      if (first) {
        first = false;
        continue;
      }
      throw ParseError("expected a number", number, static_cast<int>(column));
    }
    first = false;
    if (row.size() < min_cols || row.size() > max_cols)
      throw ParseError(fmt::format("expected {} to {} columns, got {}", min_cols, max_cols, row.size()), number, 1);
    rows.push_back(std::move(row));
  }
  return rows;
}

template <class F>
auto tagged(Engine engine, F&& f) {
  const std::string tag = "[" + engine_name(engine) + "] ";
  try {
    return f();
  } catch (const DomainError& e) {
    throw DomainError(tag + e.what());
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(tag + e.what());
  } catch (const ParseError&) {
    throw;
  } catch (const std::exception& e) {
    throw std::runtime_error(tag + e.what());
  }
}

}  // namespace

std::string engine_name(Engine e) {
  switch (e) {
    case Engine::operator_algebra:
      return "operator";
    case Engine::phasespace:
      return "phasespace";
    case Engine::oracle:
      return "oracle";
  }
  return "unknown";
}

Engine parse_engine(const std::string& name) {
  if (name == "operator") return Engine::operator_algebra;
  if (name == "phasespace") return Engine::phasespace;
  if (name == "oracle") return Engine::oracle;
  throw std::invalid_argument("unknown engine '" + name + "'");
}

RunReport cmd_phase(const SequenceFile& file, const PhaseOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  file.sequence().validate();
  RunReport report;
  for (const auto e : options.engines)
    report.engines.push_back(tagged(e, [&] { return run_engine(e, file, options); }));
  if (options.require_closed)
    for (const auto& r : report.engines)
      if (!r.closed) throw DomainError("[" + engine_name(r.engine) + "] sequence is not closed");
  if (report.engines.size() > 1) {
    double dev = 0.0;
    for (std::size_t i = 0; i < report.engines.size(); ++i)
      for (std::size_t j = i + 1; j < report.engines.size(); ++j)
        dev = std::max(dev, std::abs(wrap(report.engines[i].phi_i - report.engines[j].phi_i)));
    report.max_pairwise_deviation = dev;
  }
  report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

void write_phase_csv(const RunReport& report, std::ostream& out) {
  const bool dev = report.max_pairwise_deviation.has_value();
  fmt::print(out, "engine,T,a1,a2,phi_i,phi_L,contrast,closed{}\n", dev ? ",max_pairwise_deviation" : "");
  for (const auto& r : report.engines) {
    fmt::print(out, "{},{},{},{},{},{},{},{}", engine_name(r.engine), r.T, r.a1, r.a2, r.phi_i, r.phi_L,
               opt(r.contrast), r.closed ? "true" : "false");
    if (dev) fmt::print(out, ",{}", *report.max_pairwise_deviation);
    out << '\n';
  }
}

std::vector<FringePoint> cmd_fringe(const SequenceFile& file, const FringeOptions& options) {
  if (options.points < 8) throw std::invalid_argument("a fringe scan needs at least 8 points");
  auto seq = file.sequence();
  seq.validate();
  const auto consts = file.constants();
  const std::size_t n = seq.pulses.size();
  const std::size_t k = options.pulse.value_or(n - 1);
  if (k >= n) throw std::invalid_argument(fmt::format("pulse index {} out of range (sequence has {})", k, n));
  const auto packet = file.initial_packet();

  std::vector<double> values(options.points);
  for (std::size_t j = 0; j < options.points; ++j)
    values[j] = options.from + (options.to - options.from) * static_cast<double>(j) /
                                   static_cast<double>(options.points - 1);

  return tagged(options.engine, [&] {
    std::vector<FringePoint> rows;
    if (options.engine == Engine::phasespace)
      throw std::invalid_argument("fringe scans use the operator or oracle engine");

    if (options.engine == Engine::oracle) {
      const auto oopt = oracle_options(file, options.grid_points);
      if (k == n - 1) {
        const double w = laser_phase_weights(n).back();
        const double base = laser_total(seq) - w * seq.pulses.back().laser_phase;
        std::vector<double> totals;
        for (double v : values) totals.push_back(base + w * v);
        return fringe_scan_numeric(seq, packet, totals, consts, oopt);
      }
      auto o = oopt;
      o.branch_overlap = false;
      for (double v : values) {
        seq.pulses[k].laser_phase = v;
        const auto r = run_sequence_numeric(seq, packet, consts, o);
        rows.push_back({laser_total(seq), r.P_g1, r.P_g2});
      }
      return rows;
    }

    if (seq.has_canonical_areas()) {
      for (double v : values) {
        seq.pulses[k].laser_phase = v;
        const auto r = run_state_sequence(seq, InternalLabel::g1, packet, consts);
        rows.push_back({laser_total(seq), r.P_g1, r.P_g2});
      }
      return rows;
    }
    const double half = std::numbers::pi / 2;
    bool pattern = seq.pulses.front().area == half && seq.pulses.back().area == half;
    for (std::size_t i = 1; i + 1 < n; ++i) pattern = pattern && seq.pulses[i].area == std::numbers::pi;
    if (!pattern) throw std::invalid_argument("the analytic fringe needs pi/2 - pi - ... - pi - pi/2 pulses");
    const auto r = interferometer_phase(seq, consts, packet);
    const double C = r.contrast.value_or(1.0);
    const int sign = exit_port_sign(n);
    for (double v : values) {
      seq.pulses[k].laser_phase = v;
      const double total = laser_total(seq);
      const double p2 = 0.5 * (1.0 + sign * C * std::cos(r.interferometer_phase + total));
      rows.push_back({total, 1.0 - p2, p2});
    }
    return rows;
  });
}

void write_fringe_csv(const std::vector<FringePoint>& rows, std::ostream& out) {
  fmt::print(out, "phi_L,P_g1,P_g2\n");
  for (const auto& r : rows) fmt::print(out, "{},{},{}\n", r.laser_phase, r.P_g1, r.P_g2);
}

ClosureReport cmd_closure(double a1, double a2, double t10) {
  const auto t = solve_closure(a1, a2, t10);
  ClosureReport rep{a1, a2, t10, t.t21, t.t32, false};
  InterferometerSequence seq;
  seq.a1 = a1;
  seq.a2 = a2;
  const double half = std::numbers::pi / 2;
  seq.pulses = {{0.0, half, 0.0}, {t10, std::numbers::pi, 0.0}, {t10 + t.t21, std::numbers::pi, 0.0},
                {t10 + t.t21 + t.t32, half, 0.0}};
  rep.closed = interferometer_phase(seq, PhysicalConstants::natural()).closed;
  return rep;
}

ClosureReport cmd_closure(const SequenceFile& file) {
  if (file.pulses.size() != 4) throw std::invalid_argument("closure needs a four-pulse sequence");
  const auto seq = file.sequence();
  return cmd_closure(seq.a1, seq.a2, seq.pulses[1].time - seq.pulses[0].time);
}

void write_closure_csv(const ClosureReport& r, std::ostream& out) {
  fmt::print(out, "a1,a2,t10,t21,t32,closed\n{},{},{},{},{},{}\n", r.a1, r.a2, r.t10, r.t21, r.t32,
             r.closed ? "true" : "false");
}

SequenceFile closure_sequence(const SequenceFile& file, const ClosureReport& report) {
  if (file.pulses.size() != 4) throw std::invalid_argument("closure needs a four-pulse sequence");
  SequenceFile out = file;
  const double t0 = file.pulses.front().time;
  const double times[4] = {t0, t0 + report.t10, t0 + report.t10 + report.t21,
                           t0 + report.t10 + report.t21 + report.t32};
  for (std::size_t i = 0; i < 4; ++i) {
    out.pulses[i].time = times[i];
    out.pulses[i].multiple.reset();
  }
  return out;
}

std::vector<FieldMapPoint> read_field_map_csv(std::istream& in) {
  std::vector<FieldMapPoint> pts;
  for (const auto& row : read_numeric_csv(in, 2, 3)) {
    FieldMapPoint p{row[0], row[1] * 1e-6, std::nullopt};
    if (row.size() == 3) p.uncertainty = row[2] * 1e-6;
    pts.push_back(p);
  }
  return pts;
}

std::vector<SpectrumSample> read_spectrum_csv(std::istream& in) {
  std::vector<SpectrumSample> s;
  for (const auto& row : read_numeric_csv(in, 2, 2)) s.push_back({two_pi * 1e3 * row[0], row[1]});
  return s;
}

void write_field_map_csv(std::span<const FieldMapPoint> points, std::ostream& out) {
  fmt::print(out, "z_m,B_uT\n");
  for (const auto& p : points) fmt::print(out, "{},{}\n", p.z, p.B * 1e6);
}

void write_gradient_csv(const GradientFit& fit, std::size_t n_points, std::ostream& out) {
  double ss = 0.0;
  for (double r : fit.residuals) ss += r * r;
  const double rms = fit.residuals.empty() ? 0.0 : std::sqrt(ss / static_cast<double>(fit.residuals.size()));
  fmt::print(out, "B0_uT,B0_stderr_uT,gradient_uT_per_m,gradient_stderr_uT_per_m,n_points,rms_residual_uT\n");
  fmt::print(out, "{},{},{},{},{},{}\n", fit.B0 * 1e6, fit.B0_stderr * 1e6, fit.gradient * 1e6,
             fit.gradient_stderr * 1e6, n_points, rms * 1e6);
}

void write_residuals_csv(std::span<const FieldMapPoint> points, const GradientFit& fit, std::ostream& out) {
  fmt::print(out, "z_m,B_uT,fit_uT,residual_uT\n");
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double model = fit.B0 + fit.gradient * points[i].z;
    fmt::print(out, "{},{},{},{}\n", points[i].z, points[i].B * 1e6, model * 1e6, fit.residuals[i] * 1e6);
  }
}

double field_from_spectrum(std::span<const SpectrumSample> spectrum, const SpectrumOptions& options) {
  if (options.k < 1) throw std::invalid_argument("peak index k must be at least 1");
  const auto peaks = find_peaks(spectrum, options.min_prominence);
  if (peaks.empty()) throw DomainError("no peaks found in the spectrum");
  auto rel = clock_referenced(peaks);
  std::vector<double> above;
  for (double d : rel)
    if (d > 0.0) above.push_back(d);
  std::sort(above.begin(), above.end());
  if (above.size() < static_cast<std::size_t>(options.k))
    throw DomainError(fmt::format("spectrum has {} peaks above the clock line, need {}", above.size(), options.k));
  return field_from_detuning(options.transition, above[options.k - 1]);
}

std::vector<FieldMapPoint> field_map_from_spectra(const std::filesystem::path& dir, const SpectrumOptions& options) {
  const auto manifest = dir / "spectra.csv";
  std::ifstream in(manifest);
  if (!in) throw std::runtime_error("cannot open " + manifest.string());
  std::vector<FieldMapPoint> pts;
  std::string line;
  int number = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto fields = split_csv(line);
    const auto z = fields.size() == 2 ? to_double(fields[1]) : std::nullopt;
    if (!z) {
      if (first) {
        first = false;
        continue;
      }
      throw ParseError(manifest.string() + ": expected file,z_m", number, 1);
    }
    first = false;
    const auto path = dir / fields[0];
    std::ifstream sin(path);
    if (!sin) throw std::runtime_error("cannot open " + path.string());
    std::vector<SpectrumSample> spectrum;
    try {
      spectrum = read_spectrum_csv(sin);
      pts.push_back({*z, field_from_spectrum(spectrum, options), std::nullopt});
    } catch (const ParseError& e) {
      throw ParseError(path.string() + ": " + e.what());
    } catch (const DomainError& e) {
      throw DomainError(path.string() + ": " + e.what());
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(path.string() + ": " + e.what());
    }
  }
  std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.z < b.z; });
  return pts;
}

MonteCarloReport gradient_monte_carlo(const MonteCarloOptions& o) {
  if (o.points < 3) throw std::invalid_argument("Monte Carlo maps need at least 3 points");
  if (o.trials < 2) throw std::invalid_argument("Monte Carlo needs at least 2 trials");
  if (!(o.span > 0.0) || !(o.noise >= 0.0)) throw std::invalid_argument("span must be positive, noise non-negative");
  std::mt19937_64 rng(o.seed);
  std::normal_distribution<double> noise(0.0, o.noise);
  std::vector<FieldMapPoint> pts(o.points);
  double zbar = 0.0;
  for (std::size_t i = 0; i < o.points; ++i) {
    pts[i].z = o.span * static_cast<double>(i) / static_cast<double>(o.points - 1);
    zbar += pts[i].z / static_cast<double>(o.points);
  }
  double szz = 0.0;
  for (const auto& p : pts) szz += (p.z - zbar) * (p.z - zbar);

  std::vector<double> slopes(o.trials);
  for (auto& s : slopes) {
    for (auto& p : pts) p.B = o.B0 + o.gradient * p.z + noise(rng);
    s = fit_gradient(pts).gradient;
  }
  MonteCarloReport r;
  r.trials = o.trials;
  r.mean = std::accumulate(slopes.begin(), slopes.end(), 0.0) / static_cast<double>(o.trials);
  double var = 0.0;
  for (double s : slopes) var += (s - r.mean) * (s - r.mean);
  r.stddev = std::sqrt(var / static_cast<double>(o.trials - 1));
  std::sort(slopes.begin(), slopes.end());
  auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(slopes.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, slopes.size() - 1);
    return slopes[lo] + (pos - static_cast<double>(lo)) * (slopes[hi] - slopes[lo]);
  };
  r.ci_low = quantile(0.025);
  r.ci_high = quantile(0.975);
  r.ols_stddev = o.noise / std::sqrt(szz);
  return r;
}

void write_monte_carlo_csv(const MonteCarloReport& r, std::ostream& out) {
  fmt::print(out, "trials,mean_uT_per_m,stddev_uT_per_m,ci95_low_uT_per_m,ci95_high_uT_per_m,ols_stddev_uT_per_m\n");
  fmt::print(out, "{},{},{},{},{},{}\n", r.trials, r.mean * 1e6, r.stddev * 1e6, r.ci_low * 1e6, r.ci_high * 1e6,
             r.ols_stddev * 1e6);
}

void write_alpha_csv(double tau_min, double tau_max, int points, std::ostream& out) {
  fmt::print(out, "tau,alpha\n");
  for (const auto& s : alpha_curve(tau_min, tau_max, points)) fmt::print(out, "{},{}\n", s.tau, s.alpha);
}

std::string gnuplot_hint(const std::string& command, const std::string& csv) {
  const std::string head = "set datafile separator ','; set key autotitle columnhead; ";
  if (command == "fringe")
    return head + fmt::format("plot '{0}' using 1:2 with linespoints, '{0}' using 1:3 with linespoints", csv);
  if (command == "alpha")
    return head + fmt::format("set logscale x; set xlabel 'tau'; plot '{}' using 1:2 with lines", csv);
  if (command == "map" || command == "spectrum")
    return head + fmt::format("f(z) = b0 + g*z; fit f(x) '{0}' using 1:2 via b0, g; "
                              "plot '{0}' using 1:2 with points, f(x) with lines",
                              csv);
  if (command == "residuals")
    return head + fmt::format("plot '{}' using 1:4 with points", csv);
  if (command == "phase")
    return head + fmt::format("set style data histogram; plot '{}' using 5:xtic(1)", csv);
  return "# no plot for " + command;
}

}  // namespace t3i
