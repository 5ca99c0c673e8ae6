// landau: command-line driver for the solver, the verification checks and the
// Bakry-Emery search.
//
// Exit codes: 0 success, 1 numerical abort, 2 bad input, 3 a verdict failed.

#include "landau/config.hpp"
#include "landau/io.hpp"
#include "landau/report.hpp"
#include "landau/sphere/search.hpp"
#include "landau/verify.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iomanip>

namespace {

using namespace landau;
namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

enum Exit : int { ok = 0, numerical = 1, bad_input = 2, verdict_failed = 3 };

std::string fmt(double x) {
  std::ostringstream os;
  os << std::setprecision(6) << x;
  return os.str();
}

void print_summary(std::ostream& os, const report::Verdict& v) {
  os << (v.pass ? "PASS " : "FAIL ") << v.name << ": " << fmt(v.observed) << " <= " << fmt(v.bound) << " + "
     << fmt(v.tolerance) << '\n';
}

// JSON goes to --out when given, else stdout; summaries then go to stderr.
void emit(const json& doc, const std::string& out_path) {
  if (out_path.empty()) std::cout << doc.dump(2) << '\n';
  else io::write_json(out_path, doc);
}

std::ostream& summary_stream(const std::string& out_path) { return out_path.empty() ? std::cerr : std::cout; }

int finish(const std::vector<report::Verdict>& vs, const std::string& out_path) {
  for (const auto& v : vs) print_summary(summary_stream(out_path), v);
  return report::all_pass(vs) ? ok : verdict_failed;
}

// One summary line per verdict family: the worst pair of the series, then the drifts.
void print_series_summary(std::ostream& os, const std::vector<report::Verdict>& vs) {
  std::map<std::string, std::pair<const report::Verdict*, std::size_t>> worst;
  std::map<std::string, std::size_t> failed;
  for (const auto& v : vs) {
    const std::string family = v.name.substr(0, v.name.find('['));
    auto& slot = worst[family];
    const double excess = v.observed - v.bound - v.tolerance;
    if (!slot.first || excess > slot.first->observed - slot.first->bound - slot.first->tolerance) slot.first = &v;
    ++slot.second;
    if (!v.pass) ++failed[family];
  }
  for (const auto& [family, entry] : worst) {
    const report::Verdict& v = *entry.first;
    os << (failed[family] ? "FAIL " : "PASS ") << family;
    if (entry.second > 1) os << " (" << entry.second - failed[family] << "/" << entry.second << " pass, worst " << v.name << ")";
    os << ": " << fmt(v.observed) << " <= " << fmt(v.bound) << " + " << fmt(v.tolerance) << '\n';
  }
}

int cmd_solve(const std::string& config_path, const std::string& out_dir) {
  const config::RunConfig cfg = config::load(config_path);
  const kinetic::Density init = config::initial_density(cfg);
  const fs::path out(out_dir);
  fs::create_directories(out);
  const Potential pot = cfg.solver.potential();

  std::size_t snap = 0;
  kinetic::RecordObserver observe;
  if (cfg.solver.snapshots) {
    observe = [&](const kinetic::MomentRecord& r, const kinetic::Density& f) {
      std::ostringstream name;
      name << "f_" << std::setw(6) << std::setfill('0') << snap++ << ".bin";
      io::write_snapshot(out / "snapshots" / name.str(), f, r.t, pot);
    };
  }
  const kinetic::RunResult res = [&] {
    try {
      return kinetic::run(cfg.solver, init, observe);
    } catch (const kinetic::NumericalAbort& e) {
      io::write_snapshot(out / "last_good.bin", e.last_good, e.t, pot);
      throw;
    }
  }();

  std::ostringstream csv;
  report::write_csv(csv, res.records);
  io::atomic_write(out / "series.csv", csv.str());

  std::vector<report::Verdict> verdicts;
  if (res.records.size() >= 2) verdicts = report::monotonicity_verdict(res.records);
  io::write_json(out / "verdicts.json", report::to_json(verdicts));
  io::write_json(out / "run.json", json{{"steps", res.steps},
                                         {"substeps", res.substeps},
                                         {"records", res.records.size()},
                                         {"clamped_mass", res.clamped_mass},
                                         {"max_step_clamp", res.max_step_clamp},
                                         {"gamma", pot.gamma()},
                                         {"coupling", pot.coupling()}});
  print_series_summary(std::cout, verdicts);
  return report::all_pass(verdicts) ? ok : verdict_failed;
}

int cmd_report(const std::string& in_path, const std::string& out_path, const report::Tolerances& tol) {
  std::ifstream is(in_path);
  if (!is) throw ConfigError("cannot open " + in_path);
  const auto series = report::read_csv(is);
  const auto verdicts = report::monotonicity_verdict(series, tol);
  emit(report::to_json(verdicts), out_path);
  print_series_summary(summary_stream(out_path), verdicts);
  return report::all_pass(verdicts) ? ok : verdict_failed;
}

int cmd_search(int bandlimit, bool even, std::uint64_t seed, int iters, int restarts, const std::string& out_path) {
  sphere::SearchOptions opt;
  opt.bandlimit = bandlimit;
  opt.even_only = even;
  opt.seed = seed;
  opt.iterations = iters;
  opt.restarts = restarts;
  const sphere::SearchResult r = sphere::be_search(opt);
  json doc = {{"bandlimit", bandlimit},
              {"even", even},
              {"seed", seed},
              {"iters", iters},
              {"restarts", restarts},
              {"ratio", r.ratio},
              {"ratio_refined", r.ratio_refined},
              {"converged", r.converged},
              {"iterations", r.iterations},
              {"best_start", r.best_start},
              {"start_ratios", r.start_ratios},
              {"field", io::field_to_json(r.log_coeffs, true)}};
  emit(doc, out_path);
  summary_stream(out_path) << "minimum ratio " << fmt(r.ratio) << (even ? " over even fields" : "") << " at bandlimit "
                           << bandlimit << (r.converged ? "" : " (iteration cap reached)") << '\n';
  return ok;
}

bool spectrum_is_even(const sphere::Spectrum& c) {
  for (int l = 1; l <= c.bandlimit(); l += 2)
    for (int m = -l; m <= l; ++m)
      if (c(l, m) != std::complex<double>(0.0, 0.0)) return false;
  return true;
}

// Ratio of a stored field, either a bare field file or a search report with
// its "field" entry. The lower bound is 1 in general and 11/2 (less the search
// tolerance) for even fields.
int cmd_check(const std::string& in_path, const std::string& out_path) {
  const json doc_in = io::read_json(in_path);
  const io::FieldFile field = io::field_from_json(doc_in.contains("field") ? doc_in["field"] : doc_in);
  const int L = std::max(field.coeffs.bandlimit(), 2);
  const auto eval = sphere::build_grid(3 * L);
  sphere::Spectrum c = field.coeffs;
  if (c.bandlimit() < L) {
    sphere::Spectrum wide(L);
    for (int l = 0; l <= c.bandlimit(); ++l)
      for (int m = -l; m <= l; ++m) wide(l, m) = c(l, m);
    c = wide;
  }
  const sphere::Gamma2Parts p = field.log ? sphere::gamma2_parts_of_log(c, *eval)
                                          : sphere::gamma2_parts(sphere::from_spectrum(c, eval));
  const double ratio = sphere::ratio_from(p);
  const bool even = spectrum_is_even(field.coeffs);
  const double lower = even ? 5.5 - 0.02 : 1.0;
  const report::Verdict v = report::make_verdict(even ? "even_ratio_lower_bound" : "ratio_lower_bound", lower - ratio, 0.0, 0.0);
  json doc = {{"bandlimit", field.coeffs.bandlimit()}, {"log", field.log}, {"even", even},     {"ratio", ratio},
              {"gamma2", p.gamma2},                    {"fisher", p.fisher}, {"lower_bound", lower}, {"pass", v.pass}};
  emit(doc, out_path);
  summary_stream(out_path) << (v.pass ? "PASS " : "FAIL ") << "ratio " << fmt(ratio) << " >= " << fmt(lower) << '\n';
  return v.pass ? ok : verdict_failed;
}

int cmd_verify(const std::string& which, const std::string& config_path, const std::string& out_path) {
  const config::RunConfig cfg = config::load(config_path);
  const auto checks = which == "lifted" ? verify::verify_lifted(cfg) : verify::verify_fisher(cfg);
  emit(verify::to_json(checks), out_path);
  return finish(checks, out_path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Homogeneous Landau equation: solver, lifted-flow checks and the spherical Bakry-Emery search"};
  app.require_subcommand(1);

  std::string config_path, out_path, in_path;

  auto* solve = app.add_subcommand("solve", "integrate the equation and write series.csv and verdicts.json");
  solve->add_option("--config", config_path, "run configuration (JSON)")->required();
  solve->add_option("--out", out_path, "output directory")->required();

  auto* verify_cmd = app.add_subcommand("verify", "numerical checks of the lifted flow");
  verify_cmd->require_subcommand(1);
  auto* verify_lifted = verify_cmd->add_subcommand("lifted", "Cartesian/spherical lemma and marginal checks");
  auto* verify_fisher = verify_cmd->add_subcommand("fisher", "Fisher decomposition, subadditivity and layer derivatives");
  for (auto* sub : {verify_lifted, verify_fisher}) {
    sub->add_option("--config", config_path, "run configuration (JSON)")->required();
    sub->add_option("--out", out_path, "report path (default: stdout)");
  }

  auto* gamma2 = app.add_subcommand("gamma2", "Bakry-Emery ratio on the sphere");
  gamma2->require_subcommand(1);
  int bandlimit = 10, iters = 1000, restarts = 8;
  std::uint64_t seed = 0;
  bool even = false;
  auto* search = gamma2->add_subcommand("search", "minimize Gamma_2 / Fisher over f = exp(g)");
  search->add_option("--bandlimit", bandlimit, "bandlimit of g")->required()->check(CLI::Range(2, 64));
  search->add_flag("--even", even, "restrict to even fields");
  search->add_option("--seed", seed, "random seed");
  search->add_option("--iters", iters, "iterations per start")->check(CLI::PositiveNumber);
  search->add_option("--restarts", restarts, "random starts")->check(CLI::PositiveNumber);
  search->add_option("--out", out_path, "report path (default: stdout)");
  auto* check = gamma2->add_subcommand("check", "ratio of a stored field");
  check->add_option("--input", in_path, "field JSON")->required();
  check->add_option("--out", out_path, "report path (default: stdout)");

  report::Tolerances tol;
  auto* rep = app.add_subcommand("report", "monotonicity and conservation verdicts for a time series");
  rep->add_option("--in", in_path, "series CSV")->required();
  rep->add_option("--out", out_path, "verdicts path (default: stdout)");
  rep->add_option("--tol-entropy", tol.entropy_abs, "absolute entropy tolerance per pair");
  rep->add_option("--tol-fisher", tol.fisher_rel, "relative Fisher tolerance per pair");
  rep->add_option("--tol-mass", tol.mass_rel, "relative mass drift");
  rep->add_option("--tol-momentum", tol.momentum_rel, "momentum drift relative to sqrt(2 M E)");
  rep->add_option("--tol-energy", tol.energy_rel, "relative energy drift");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? ok : bad_input;
  }

  try {
    if (*solve) return cmd_solve(config_path, out_path);
    if (*verify_lifted) return cmd_verify("lifted", config_path, out_path);
    if (*verify_fisher) return cmd_verify("fisher", config_path, out_path);
    if (*search) return cmd_search(bandlimit, even, seed, iters, restarts, out_path);
    if (*check) return cmd_check(in_path, out_path);
    if (*rep) return cmd_report(in_path, out_path, tol);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return bad_input;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return bad_input;
  } catch (const PositivityError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return bad_input;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return numerical;
  }
  return bad_input;
}
