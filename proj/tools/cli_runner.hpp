#pragma once

// Command-line front end. run() takes the argument list without the program
// name and writes to the given streams, so tests can drive it in-process.
//
// Exit codes: 0 success, 1 invalid input, 2 numerical failure flag.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "vexp/vexp.hpp"

namespace vexp::cli {

struct NumericalFlag : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

// `key = value` lines become `--key value` arguments placed before the
// command-line ones; with take-last semantics the command line wins.
inline std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::vector<std::string> out;
  std::vector<std::string> from_file;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" || args[i].rfind("--config=", 0) == 0) {
      std::string path;
      if (args[i] == "--config") {
        if (i + 1 >= args.size()) throw CLI::ArgumentMismatch("--config needs a file");
        path = args[++i];
      } else {
        path = args[i].substr(9);
      }
      std::ifstream in(path);
      if (!in) throw std::invalid_argument("cannot open config " + path);
      for (const auto& item : CLI::ConfigINI().from_config(in)) {
        if (item.inputs.size() == 1 && (item.inputs[0] == "true" || item.inputs[0] == "false")) {
          if (item.inputs[0] == "true") from_file.push_back("--" + item.name);
          continue;
        }
        from_file.push_back("--" + item.name);
        for (const auto& v : item.inputs) from_file.push_back(v);
      }
      continue;
    }
    out.push_back(args[i]);
  }
  if (out.empty()) return from_file;
  std::vector<std::string> merged{out.front()};
  merged.insert(merged.end(), from_file.begin(), from_file.end());
  merged.insert(merged.end(), out.begin() + 1, out.end());
  return merged;
}

inline GridDomain builtin_domain(int dim, int resolution) {
  if (dim == 1) return GridDomain::interval(-1.0, 1.0, resolution);
  if (dim == 2) return GridDomain::box({-1.0, 1.0}, {-1.0, 1.0}, resolution, resolution);
  throw std::invalid_argument("--dim must be 1 or 2");
}

// A readable file is loaded as an exponent grid; anything else is a builtin spec.
inline ExponentField exponent_from(const std::string& spec, const GridDomain& d) {
  if (std::filesystem::is_regular_file(spec)) {
    const auto e = ExponentField::from_grid_function(load_grid_function(spec));
    if (!(e.domain() == d)) throw std::invalid_argument("exponent grid " + spec + " does not match the input grid");
    return e;
  }
  return make_exponent(d, spec);
}

inline std::string sanitize(std::string s) {
  for (char& c : s)
    if (c == '/' || c == ':' || c == ',') c = '_';
  return s;
}

class CsvSink {
 public:
  CsvSink(const std::string& path, std::ostream& fallback) : out_(&fallback) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw std::invalid_argument("cannot write " + path);
      out_ = &file_;
    }
  }
  std::ostream& operator*() { return *out_; }

 private:
  std::ofstream file_;
  std::ostream* out_;
};

inline std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_double(v[i]);
  return s;
}

}  // namespace detail

inline int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Variable-exponent BV energies: modulars, dual variations, relaxation brackets and denoising."};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.set_help_all_flag("--help-all", "Help for every subcommand");
  app.add_option("--config", "Read `key = value` lines as additional flags");

  std::uint64_t seed = 42;
  std::string input, jumps_path, exponent_spec = "constant:1", integrand_spec = "euclidean", output;
  int dim = 1, resolution = 256;

  auto add_exponent = [&](CLI::App* s) {
    s->add_option("--exponent,-p", exponent_spec,
                  "Exponent grid file, or constant:q | ramp:a,b | plateau-one:r | step:x0,q")
        ->capture_default_str();
  };
  auto add_builtin_grid = [&](CLI::App* s) {
    s->add_option("--dim", dim, "Dimension of the builtin grid on (-1,1)^dim")->capture_default_str();
    s->add_option("--resolution,-n", resolution, "Cells per axis of the builtin grid")->capture_default_str();
  };
  auto add_output = [&](CLI::App* s) { s->add_option("--output,-o", output, "CSV output file (default stdout)"); };
  auto add_input = [&](CLI::App* s) {
    s->add_option("--input,-i", input, "Grid-function file")->required()->check(CLI::ExistingFile);
  };
  auto add_piecewise = [&](CLI::App* s) {
    add_input(s);
    s->add_option("--jumps,-j", jumps_path, "Jump-set file")->check(CLI::ExistingFile);
    s->add_option("--integrand,-f", integrand_spec, "euclidean | weighted:a11,a12,... | smoothed:eps")
        ->capture_default_str();
  };

  auto* check_exponent = app.add_subcommand("check-exponent", "Log-Hoelder constant, strong modulus, ball constant");
  std::vector<double> radii;
  std::size_t ball_samples = 1000;
  add_exponent(check_exponent);
  add_builtin_grid(check_exponent);
  check_exponent->add_option("--radii", radii, "Radii for omega(r) (default: diam/8 halved four times)")->delimiter(',');
  check_exponent->add_option("--samples", ball_samples, "Random balls for the ball constant")->capture_default_str();
  check_exponent->add_option("--seed", seed)->capture_default_str();
  add_output(check_exponent);

  auto* check_phi = app.add_subcommand("check-phi", "Certificates for (A0), (A1), (aInc), (aDec)");
  double K = 1.0;
  std::optional<double> inc_p, dec_q;
  add_exponent(check_phi);
  add_builtin_grid(check_phi);
  check_phi->add_option("--K", K, "Constant K of the (A1) ball condition")->capture_default_str();
  check_phi->add_option("--inc", inc_p, "Exponent for (aInc) (default p-)");
  check_phi->add_option("--dec", dec_q, "Exponent for (aDec) (default p+)");
  add_output(check_phi);

  auto* norm = app.add_subcommand("norm", "Modular, Luxemburg norm or associate norm of a grid function");
  bool want_modular = false, want_norm = false, want_associate = false, exact = false;
  add_input(norm);
  add_exponent(norm);
  auto* m_flag = norm->add_flag("--modular", want_modular, "Print the modular");
  auto* n_flag = norm->add_flag("--norm", want_norm, "Print the Luxemburg norm (default)");
  auto* a_flag = norm->add_flag("--associate", want_associate, "Print the associate norm of cell-averaged |u|");
  m_flag->excludes(n_flag)->excludes(a_flag);
  n_flag->excludes(a_flag);
  norm->add_flag("--exact", exact, "Associate norm by the Orlicz formula instead of the Luxemburg norm of phi*");

  auto* variation = app.add_subcommand("variation", "Dual variation V (or its modular) of a grid function");
  bool var_modular = false;
  int var_iters = 5000;
  add_input(variation);
  add_exponent(variation);
  variation->add_flag("--modular", var_modular, "Dual modular instead of the seminorm");
  variation->add_option("--iters", var_iters, "Iteration budget")->capture_default_str();
  add_output(variation);

  auto* energy = app.add_subcommand("energy", "Relaxed energy bulk + jump part");
  add_piecewise(energy);
  add_exponent(energy);
  add_output(energy);

  auto* relax = app.add_subcommand("relax", "Lower/upper bracket of the relaxed energy over a delta sweep");
  std::vector<double> deltas;
  add_piecewise(relax);
  add_exponent(relax);
  relax->add_option("--deltas", deltas, "Mollification radii, strictly decreasing")->delimiter(',');
  add_output(relax);

  auto* denoise_cmd = app.add_subcommand("denoise", "Variable-exponent ROF denoising with Huber smoothing");
  double lambda = 1.0, eps = 0.0;
  int iters = 50000;
  std::string trace_path;
  add_input(denoise_cmd);
  add_exponent(denoise_cmd);
  denoise_cmd->add_option("--lambda", lambda, "Fidelity weight")->capture_default_str();
  denoise_cmd->add_option("--eps", eps, "Huber smoothing (0: 1e-3 times the data range)")->capture_default_str();
  denoise_cmd->add_option("--iters", iters, "Iteration budget")->capture_default_str();
  denoise_cmd->add_option("--output,-o", output, "Denoised grid-function file")->required();
  denoise_cmd->add_option("--trace", trace_path, "Energy trace CSV (default stdout)");

  auto* corpus_cmd = app.add_subcommand("corpus", "Write the fixture grids, jump sets and exponents");
  std::string dir = "corpus";
  corpus_cmd->add_option("--dir", dir, "Output directory")->capture_default_str();
  corpus_cmd->add_option("--seed", seed)->capture_default_str();

  std::vector<std::string> args;
  try {
    args = detail::expand_config(raw_args);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    if (check_exponent->parsed()) {
      const auto p = detail::exponent_from(exponent_spec, detail::builtin_domain(dim, resolution));
      if (radii.empty())
        for (int k = 0; k < 4; ++k) radii.push_back(std::ldexp(p.domain().diameter() / 8.0, -k));
      const double C = log_holder_constant(p);
      const auto om = strong_log_holder_modulus(p, radii);
      const double ball = ball_condition_constant(p, ball_samples, seed);
      detail::CsvSink sink(output, out);
      *sink << "C_logHolder";
      for (std::size_t k = 0; k < radii.size(); ++k) *sink << ",omega(" << format_double(radii[k]) << ")";
      *sink << ",ballConstant\n" << format_double(C) << ',' << detail::join(om) << ',' << format_double(ball) << '\n';
      err << "check-exponent: p- = " << format_double(p.p_minus()) << ", p+ = " << format_double(p.p_plus())
          << ", |Y| nodes = " << p.y_count() << ", C_logHolder = " << format_double(C) << '\n';
      return 0;
    }
    if (check_phi->parsed()) {
      const auto p = detail::exponent_from(exponent_spec, detail::builtin_domain(dim, resolution));
      const auto phi = PhiFunction::variable_exponent(p);
      const std::vector<ConditionCertificate> certs = {check_A0(phi), check_A1(phi, K),
                                                       check_aInc(phi, inc_p.value_or(p.p_minus())),
                                                       check_aDec(phi, dec_q.value_or(p.p_plus()))};
      detail::CsvSink sink(output, out);
      *sink << "condition,pass,beta_or_L,witness_x,witness_t\n";
      int passed = 0;
      for (const auto& c : certs) {
        const double value = c.constant;  // beta for A0/A1, L for aInc/aDec
        std::string wx;
        if (c.witness_x) {
          wx = format_double((*c.witness_x)[0]);
          if (p.domain().dim() == 2) wx += ";" + format_double((*c.witness_x)[1]);
        }
        *sink << condition_name(c.condition) << ',' << (c.pass ? "true" : "false") << ','
              << (std::isfinite(value) ? format_double(value) : std::string()) << ',' << wx << ','
              << (std::isfinite(c.witness_t) ? format_double(c.witness_t) : std::string()) << '\n';
        passed += c.pass;
      }
      err << "check-phi: " << passed << "/4 conditions certified\n";
      return 0;
    }
    if (norm->parsed()) {
      const auto u = load_grid_function(input);
      if (u.codim() != 1) throw std::invalid_argument("norm: input must be scalar (m = 1)");
      const auto p = detail::exponent_from(exponent_spec, u.domain());
      const auto phi = PhiFunction::variable_exponent(p);
      double value;
      if (want_modular) {
        value = modular(phi, u).value;
      } else if (want_associate) {
        const auto& d = u.domain();
        std::vector<double> cells(d.cell_count());
        for (std::size_t c = 0; c < cells.size(); ++c) {
          double s = 0.0;
          const auto cn = d.cell_corners(c);
          for (int k = 0; k < d.corner_count(); ++k) s += std::abs(u(cn[k]));
          cells[c] = s / d.corner_count();
        }
        value = associate_norm(phi, CellScalarField(d, std::move(cells)),
                               exact ? AssociateMode::exact : AssociateMode::equivalent);
      } else {
        value = luxemburg_norm(phi, u);
      }
      out << format_double(value) << '\n';
      return 0;
    }
    if (variation->parsed()) {
      const auto u = load_grid_function(input);
      const auto p = detail::exponent_from(exponent_spec, u.domain());
      const auto phi = PhiFunction::variable_exponent(p);
      DualOptions opt;
      opt.max_iterations = var_iters;
      const auto r = var_modular ? dual_modular(u, phi, opt) : dual_variation(u, phi, opt);
      detail::CsvSink sink(output, out);
      *sink << "value,upper,iterations,converged\n"
            << format_double(r.value) << ',' << format_double(r.upper) << ',' << r.iterations << ','
            << (r.converged ? "true" : "false") << '\n';
      if (!r.converged) throw NumericalFlag("variation: iteration budget exhausted");
      return 0;
    }
    if (energy->parsed() || relax->parsed()) {
      auto u = load_grid_function(input);
      std::vector<JumpRecord> js;
      if (!jumps_path.empty()) js = load_jumps(jumps_path, u.domain().dim(), u.codim());
      const PiecewiseBVFunction U(std::move(u), std::move(js));
      const auto p = detail::exponent_from(exponent_spec, U.domain());
      const auto f = parse_integrand(integrand_spec);
      detail::CsvSink sink(output, out);
      if (energy->parsed()) {
        const auto e = relaxed_energy(U, f, p);
        *sink << "bulk,singular,total\n"
              << format_double(e.bulk) << ',' << format_double(e.singular) << ',' << format_double(e.total) << '\n';
        err << "energy: total = " << format_double(e.total) << '\n';
        return 0;
      }
      const auto b = upper_sequence(U, f, p, deltas);
      *sink << "delta,energy_bulkzone,energy_Yzone,omega,corrected,lower,upper,gap\n";
      for (const auto& s : b.samples) {
        const double up = s.energy();
        *sink << format_double(s.delta) << ',' << format_double(s.bulk_zone) << ',' << format_double(s.y_zone) << ','
              << format_double(s.omega) << ',' << format_double(s.corrected) << ',' << format_double(b.lower) << ','
              << format_double(up) << ',' << format_double((up - b.lower) / std::max(b.lower, 1e-12)) << '\n';
      }
      err << "relax: lower = " << format_double(b.lower) << ", upper = " << format_double(b.upper)
          << ", gap = " << format_double(b.gap) << ", tolerance = " << format_double(b.tolerance) << '\n';
      if (!b.valid) throw NumericalFlag("relax: upper bound below lower bound beyond tolerance");
      if (b.omega_warning) throw NumericalFlag("relax: omega(delta) does not decrease; exponent is not strongly log-Hoelder");
      return 0;
    }
    if (denoise_cmd->parsed()) {
      const auto g = load_grid_function(input);
      DenoiseProblem prob{g, detail::exponent_from(exponent_spec, g.domain()), lambda, eps, iters};
      const auto r = denoise(prob);
      save_grid_function(output, r.u);
      detail::CsvSink sink(trace_path, out);
      *sink << "iteration,energy\n";
      for (std::size_t k = 0; k < r.trace.size(); ++k) *sink << k << ',' << format_double(r.trace[k]) << '\n';
      err << "denoise: " << r.trace.size() - 1 << " iterations, energy " << format_double(r.trace.front()) << " -> "
          << format_double(r.trace.back()) << ", eps = " << format_double(r.eps) << '\n';
      if (!r.converged) throw NumericalFlag("denoise: iteration budget exhausted");
      return 0;
    }
    if (corpus_cmd->parsed()) {
      namespace fs = std::filesystem;
      fs::create_directories(dir);
      auto write_case = [&](const corpus::Case& c) {
        const auto base = (fs::path(dir) / detail::sanitize(c.name)).string();
        save_grid_function(base + ".grid", c.U.smooth());
        save_grid_function(base + ".p", GridFunction(c.p.domain(), 1, {c.p.values().begin(), c.p.values().end()}));
        std::ofstream j(base + ".jumps");
        write_jumps(j, c.U.jumps(), c.U.domain().dim());
      };
      write_case(corpus::unit_step(512));
      write_case(corpus::mixed_exponent(1024));
      const auto cases = corpus::duality_cases();
      for (const auto& c : cases) write_case(c);
      const auto noisy = corpus::noisy_step(256, 0.1, seed);
      save_grid_function((fs::path(dir) / "noisy-step.grid").string(), noisy);
      const auto pn = corpus::denoise_exponent(noisy.domain());
      save_grid_function((fs::path(dir) / "noisy-step.p").string(),
                         GridFunction(noisy.domain(), 1, {pn.values().begin(), pn.values().end()}));
      err << "corpus: wrote " << cases.size() + 3 << " fixtures to " << dir << '\n';
      return 0;
    }
  } catch (const NumericalFlag& e) {
    err << "flag: " << e.what() << '\n';
    return 2;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::domain_error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << '\n';
    return 2;
  }
  return 1;
}

}  // namespace vexp::cli
