#include "t3i/app.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <fstream>
#include <iostream>
#include <sstream>

#include "t3i/commands.hpp"
#include "t3i/errors.hpp"

namespace t3i {

namespace {

std::string read_text(const std::string& path) {
  if (path == "-") {
    std::ostringstream s;
    s << std::cin.rdbuf();
    return s.str();
  }
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

SequenceFile load(const std::string& path) {
  try {
    return parse_sequence_file(read_text(path));
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

}  // namespace

int run_app(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"T^3 atom interferometer simulation and analysis"};
  app.require_subcommand(1);
  app.fallthrough();
  bool hints = false;
  app.add_flag("--gnuplot-hints", hints, "Print a gnuplot command for the CSV to stderr");

  auto* phase = app.add_subcommand("phase", "Interferometer phase from one or more engines");
  std::string phase_file, engine = "operator";
  PhaseOptions phase_opt;
  phase->add_option("file", phase_file, "Sequence file ('-' for stdin)")->required();
  phase->add_option("--engine", engine, "operator | phasespace | oracle | all")
      ->check(CLI::IsMember({"operator", "phasespace", "oracle", "all"}));
  phase->add_flag("--require-closed", phase_opt.require_closed, "Fail with exit code 2 for open sequences");
  phase->add_option("--grid-points", phase_opt.grid_points, "Minimum grid size of the numeric engine");
  phase->add_option("--fringe-points", phase_opt.fringe_points, "Fringe samples of the numeric engine");

  auto* fringe = app.add_subcommand("fringe", "Exit populations against the laser phase");
  std::string fringe_file, fringe_engine = "operator";
  FringeOptions fringe_opt;
  std::size_t pulse = 0;
  fringe->add_option("file", fringe_file, "Sequence file ('-' for stdin)")->required();
  fringe->add_option("--engine", fringe_engine, "operator | oracle")->check(CLI::IsMember({"operator", "oracle"}));
  auto* pulse_opt = fringe->add_option("--pulse", pulse, "Index of the scanned pulse (default: last)");
  fringe->add_option("--from", fringe_opt.from, "First phase of the scanned pulse (rad)");
  fringe->add_option("--to", fringe_opt.to, "Last phase of the scanned pulse (rad)");
  fringe->add_option("--points", fringe_opt.points, "Number of scan points");
  fringe->add_option("--grid-points", fringe_opt.grid_points, "Minimum grid size of the numeric engine");

  auto* closure = app.add_subcommand("closure", "Pulse separations that close the interferometer");
  std::string closure_file;
  double a1 = 0.0, a2 = 0.0, t10 = 0.0;
  bool emit = false;
  auto* cfile = closure->add_option("file", closure_file, "Sequence file supplying a1, a2 and t10");
  auto* oa1 = closure->add_option("--a1", a1, "Acceleration of g1 (m/s^2)");
  auto* oa2 = closure->add_option("--a2", a2, "Acceleration of g2 (m/s^2)");
  auto* ot10 = closure->add_option("--t10", t10, "First pulse separation (s)");
  oa1->needs(oa2, ot10)->excludes(cfile);
  closure->add_flag("--emit-sequence", emit, "Print the file with the closing timings instead of CSV")->needs(cfile);

  auto* calibrate = app.add_subcommand("calibrate", "Field maps from spectra and gradient fits");
  std::string mode = "map", input, residuals_path;
  SpectrumOptions spec_opt;
  MonteCarloOptions mc;
  double b0_uT = mc.B0 * 1e6, grad_uT = mc.gradient * 1e6, noise_uT = mc.noise * 1e6;
  calibrate->add_option("--mode", mode, "map | spectrum | montecarlo")
      ->check(CLI::IsMember({"map", "spectrum", "montecarlo"}));
  calibrate->add_option("input", input, "Field-map CSV (map) or spectra directory (spectrum)");
  calibrate->add_option("--residuals", residuals_path, "Write per-point residuals of the fit to this CSV (map)");
  calibrate->add_option("--k", spec_opt.k, "Use the k-th peak above the clock line (spectrum)");
  calibrate->add_option("--prominence", spec_opt.min_prominence, "Minimum peak prominence (spectrum)");
  calibrate->add_option("--b0-uT", b0_uT, "Field at z = 0 (montecarlo)");
  calibrate->add_option("--gradient-uT-per-m", grad_uT, "Field gradient (montecarlo)");
  calibrate->add_option("--noise-uT", noise_uT, "Gaussian noise per point (montecarlo)");
  calibrate->add_option("--span", mc.span, "Height span of the map in m (montecarlo)");
  calibrate->add_option("--points", mc.points, "Points per map (montecarlo)");
  calibrate->add_option("--trials", mc.trials, "Number of maps (montecarlo)");
  calibrate->add_option("--seed", mc.seed, "Random seed (montecarlo)");

  auto* alpha = app.add_subcommand("alpha", "Spreading factor alpha(tau)");
  double tau_min = 0.0, tau_max = 100.0;
  int alpha_points = 200;
  alpha->add_option("--tau-min", tau_min, "Smallest tau");
  alpha->add_option("--tau-max", tau_max, "Largest tau");
  alpha->add_option("--points", alpha_points, "Number of samples");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  std::string hint_cmd;
  try {
    if (*phase) {
      phase_opt.engines = engine == "all"
                              ? std::vector<Engine>{Engine::operator_algebra, Engine::phasespace, Engine::oracle}
                              : std::vector<Engine>{parse_engine(engine)};
      write_phase_csv(cmd_phase(load(phase_file), phase_opt), out);
      hint_cmd = "phase";
    } else if (*fringe) {
      fringe_opt.engine = parse_engine(fringe_engine);
      if (*pulse_opt) fringe_opt.pulse = pulse;
      write_fringe_csv(cmd_fringe(load(fringe_file), fringe_opt), out);
      hint_cmd = "fringe";
    } else if (*closure) {
      if (closure_file.empty() && !*oa1) throw CLI::RequiredError("a sequence file or --a1/--a2/--t10");
      if (closure_file.empty()) {
        write_closure_csv(cmd_closure(a1, a2, t10), out);
      } else {
        const auto file = load(closure_file);
        const auto rep = cmd_closure(file);
        if (emit)
          out << format_sequence_file(closure_sequence(file, rep));
        else
          write_closure_csv(rep, out);
      }
      hint_cmd = "closure";
    } else if (*calibrate) {
      if (mode == "montecarlo") {
        mc.B0 = b0_uT * 1e-6;
        mc.gradient = grad_uT * 1e-6;
        mc.noise = noise_uT * 1e-6;
        write_monte_carlo_csv(gradient_monte_carlo(mc), out);
        hint_cmd = "montecarlo";
      } else {
        if (input.empty()) throw CLI::RequiredError("input");
        if (mode == "spectrum") {
          write_field_map_csv(field_map_from_spectra(input, spec_opt), out);
          hint_cmd = "spectrum";
        } else {
          std::ifstream in(input);
          if (!in) throw std::runtime_error("cannot open " + input);
          std::vector<FieldMapPoint> pts;
          try {
            pts = read_field_map_csv(in);
          } catch (const ParseError& e) {
            throw ParseError(input + ": " + e.what());
          }
          if (pts.size() < 2)
            throw std::invalid_argument(fmt::format("insufficient points: {} in {}, need at least 2", pts.size(), input));
          const auto fit = fit_gradient(pts);
          write_gradient_csv(fit, pts.size(), out);
          if (!residuals_path.empty()) {
            std::ofstream rout(residuals_path);
            if (!rout) throw std::runtime_error("cannot write " + residuals_path);
            write_residuals_csv(pts, fit, rout);
          }
          hint_cmd = residuals_path.empty() ? "map" : "residuals";
        }
      }
    } else if (*alpha) {
      write_alpha_csv(tau_min, tau_max, alpha_points, out);
      hint_cmd = "alpha";
    }
  } catch (const CLI::Error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  if (hints) {
    const std::string csv = hint_cmd == "residuals" ? residuals_path : "out.csv";
    err << gnuplot_hint(hint_cmd, csv) << '\n';
  }
  return 0;
}

}  // namespace t3i
