// povmlab command-line front end.
//
// Exit codes: 0 ok/optimal, 1 validation, 2 I/O or parse, 3 infeasible
// target, 4 singular average state, 5 not optimal.

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <fmt/format.h>
#include <openssl/evp.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "povmlab/bounds.hpp"
#include "povmlab/certificate.hpp"
#include "povmlab/ensemble.hpp"
#include "povmlab/io.hpp"
#include "povmlab/qubit_analytic.hpp"
#include "povmlab/solver.hpp"

using nlohmann::json;
using namespace povmlab;

namespace {

enum Exit : int {
  kOk = 0,
  kValidation = 1,
  kIo = 2,
  kInfeasible = 3,
  kSingular = 4,
  kNotOptimal = 5,
};

struct Options {
  std::string ensemble_path;
  std::string povm_path;
  double pi = 0.0;
  std::string grid = "0:0.8:25";
  double tol = 1e-12;
  int max_iter = 500;
  double pinv_cutoff = kDefaultPinvCutoff;
  bool accelerate = false;
  bool emit_povm = false;
  unsigned jobs = 0;
  std::string record_path;
  double theta = std::numbers::pi / 4;
  std::vector<double> etas{0.7, 0.8, 0.9, 1.0};
  double eta = 0.9;
};

// Thrown for bad flag values that CLI11 cannot check on its own.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr);
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

struct Input {
  std::string path;
  std::string digest;
  json document;
};

Input read_input(const std::string& path) {
  const auto text = io::read_text(path);
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& err) {
    throw io::ParseError(fmt::format("{}: {}", path, err.what()));
  }
  return {path, sha256_hex(text), std::move(doc)};
}

json input_json(const Input& in) { return {{"path", in.path}, {"sha256", in.digest}}; }

SolverConfig solver_config(const Options& o) {
  SolverConfig cfg;
  cfg.povm_tolerance = o.tol;
  cfg.max_iterations = o.max_iter;
  cfg.pinv_cutoff = o.pinv_cutoff;
  cfg.acceleration = o.accelerate ? Acceleration::Anderson : Acceleration::None;
  cfg.validate();
  return cfg;
}

json config_json(const SolverConfig& cfg) {
  return {{"max_iterations", cfg.max_iterations},
          {"povm_tolerance", cfg.povm_tolerance},
          {"bisection_tolerance", cfg.bisection_tolerance},
          {"bisection_max_steps", cfg.bisection_max_steps},
          {"pinv_cutoff", cfg.pinv_cutoff},
          {"acceleration", cfg.acceleration == Acceleration::Anderson ? "anderson" : "none"},
          {"anderson_memory", cfg.anderson_memory},
          {"anderson_warmup", cfg.anderson_warmup},
          {"certificate_tol_e", kDefaultExtremalTolerance},
          {"certificate_tol_p", kDefaultPositivityTolerance}};
}

json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json violations_json(const ValidationReport& report) {
  json out = json::array();
  for (const auto& v : report) {
    out.push_back({{"kind", to_string(v.kind)},
                   {"index", v.index},
                   {"residual", finite_or_null(v.residual)},
                   {"message", v.message}});
  }
  return out;
}

json certificate_json(const Certificate& c) {
  json margins = json::array();
  for (const auto& m : c.positivity_margins) margins.push_back(m ? json(*m) : json(nullptr));
  return {{"optimal", c.optimal},
          {"extremal_residuals", c.extremal_residuals},
          {"positivity_margins", std::move(margins)},
          {"max_residual", c.max_residual()},
          {"min_margin", finite_or_null(c.min_margin())},
          {"a", c.a ? json(*c.a) : json(nullptr)},
          {"success_rate", c.success_rate},
          {"inconclusive_rate", c.inconclusive_rate},
          {"dual_bound", c.dual_bound},
          {"duality_gap", c.duality_gap()},
          {"hermiticity_residual", c.hermiticity_residual},
          {"tol_e", c.tol_e},
          {"tol_p", c.tol_p}};
}

class Clock {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

json make_record(const std::string& command, json input, json config, json result,
                 const Clock& clock, int iterations) {
  return {{"command", command},
          {"input", std::move(input)},
          {"config", std::move(config)},
          {"result", std::move(result)},
          {"duration_seconds", clock.seconds()},
          {"iterations", iterations}};
}

void emit(const json& record) { std::cout << record.dump(2) << '\n'; }

// Loads and validates an ensemble. Prints the validation report and returns
// nullopt when it has violations.
std::optional<StateEnsemble> load_valid(const Input& in, const std::string& command,
                                        const Clock& clock) {
  auto e = io::ensemble_from_json(in.document);
  const auto report = validate(e);
  if (report.empty()) return e;
  emit(make_record(command, input_json(in), json::object(),
                   {{"valid", false}, {"violations", violations_json(report)}}, clock, 0));
  return std::nullopt;
}

int cmd_validate(const Options& o) {
  Clock clock;
  const auto in = read_input(o.ensemble_path);
  const auto e = io::ensemble_from_json(in.document);
  const auto report = validate(e);
  json result{{"valid", report.empty()}, {"violations", violations_json(report)}};
  if (report.empty()) {
    result["states"] = e.size();
    result["dim"] = e.dim();
  }
  emit(make_record("validate", input_json(in), json::object(), std::move(result), clock, 0));
  return report.empty() ? kOk : kValidation;
}

json solve_json(const StateEnsemble& e, const SolveResult& r, bool emit_povm) {
  json out{{"success_rate", r.success_rate},
           {"inconclusive_rate", r.inconclusive_rate},
           {"relative_success_rate",
            r.relative_success_rate ? json(*r.relative_success_rate) : json(nullptr)},
           {"a", r.a},
           {"iterations", r.iterations},
           {"final_change", r.final_change},
           {"converged", r.converged}};
  out["certificate"] = certificate_json(check(e, r.povm));
  if (emit_povm) out["povm"] = io::povm_to_json(r.povm);
  return out;
}

int cmd_solve(const Options& o) {
  Clock clock;
  const auto in = read_input(o.ensemble_path);
  const auto e = load_valid(in, "solve", clock);
  if (!e) return kValidation;
  const auto cfg = solver_config(o);
  json config = config_json(cfg);
  config["pi"] = o.pi;
  config["emit_povm"] = o.emit_povm;
  try {
    const auto r = solve(*e, o.pi, cfg);
    emit(make_record("solve", input_json(in), std::move(config), solve_json(*e, r, o.emit_povm),
                     clock, r.iterations));
    return kOk;
  } catch (const InfeasibleTargetError& err) {
    emit(make_record("solve", input_json(in), std::move(config),
                     {{"status", "infeasible"},
                      {"error", err.what()},
                      {"target", err.target()},
                      {"supremum", err.supremum()}},
                     clock, 0));
    return kInfeasible;
  }
}

struct Grid {
  double start;
  double stop;
  int steps;

  double at(int k) const {
    return steps == 1 ? start : start + (stop - start) * k / (steps - 1);
  }
};

double parse_number(std::string_view text, const std::string& whole) {
  double x = 0.0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), x);
  if (ec != std::errc() || end != text.data() + text.size()) {
    throw UsageError(fmt::format("--pi-grid expects start:stop:steps, got '{}'", whole));
  }
  return x;
}

Grid parse_grid(const std::string& text) {
  const auto first = text.find(':');
  const auto second = text.find(':', first == std::string::npos ? first : first + 1);
  if (first == std::string::npos || second == std::string::npos) {
    throw UsageError(fmt::format("--pi-grid expects start:stop:steps, got '{}'", text));
  }
  const std::string_view view(text);
  Grid g{parse_number(view.substr(0, first), text),
         parse_number(view.substr(first + 1, second - first - 1), text), 0};
  const double steps = parse_number(view.substr(second + 1), text);
  if (!(steps >= 1.0 && steps == std::floor(steps) && steps <= 1e6)) {
    throw UsageError(fmt::format("--pi-grid steps must be a positive integer, got '{}'", text));
  }
  g.steps = static_cast<int>(steps);
  if (!(g.start >= 0.0 && g.start < 1.0 && g.stop >= 0.0 && g.stop < 1.0)) {
    throw UsageError("--pi-grid endpoints must lie in [0, 1)");
  }
  return g;
}

struct Row {
  double pi = 0.0;
  std::optional<SolveResult> result;
  double residual = 0.0;
  bool certified = false;
  std::string status;
};

Row solve_point(const StateEnsemble& e, double pi, const SolverConfig& cfg) {
  Row row;
  row.pi = pi;
  try {
    row.result = solve(e, pi, cfg);
    row.status = row.result->converged ? "ok" : "unconverged";
    const auto c = check(e, row.result->povm);
    row.residual = c.max_residual();
    row.certified = c.optimal;
  } catch (const InfeasibleTargetError&) {
    row.status = "infeasible";
  }
  return row;
}

unsigned worker_count(unsigned requested) {
  if (requested > 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

// Fills rows[k] = task(k) on a pool of workers; rows stay in index order.
template <class Task>
std::vector<Row> run_pool(std::size_t count, unsigned jobs, Task task) {
  std::vector<Row> rows(count);
  std::atomic<std::size_t> next{0};
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < std::min<std::size_t>(jobs, count); ++w) {
      pool.emplace_back([&] {
        for (std::size_t k = next++; k < count; k = next++) rows[k] = task(k);
      });
    }
  }
  return rows;
}

std::string num(double x) { return std::isfinite(x) ? fmt::format("{:.17g}", x) : ""; }

std::string row_csv(const Row& row) {
  if (!row.result) return fmt::format("{},,,,,false,{}", num(row.pi), row.status);
  const auto& r = *row.result;
  return fmt::format("{},{},{},{},{},{},{}", num(row.pi), num(r.success_rate),
                     r.relative_success_rate ? num(*r.relative_success_rate) : "", r.iterations,
                     num(row.residual), row.certified ? "true" : "false", row.status);
}

void write_record(const std::string& path, const json& record) {
  if (path.empty()) return;
  std::ofstream out(path);
  if (!out) throw io::ParseError(fmt::format("cannot write {}", path));
  out << record.dump(2) << '\n';
}

int total_iterations(const std::vector<Row>& rows) {
  int n = 0;
  for (const auto& row : rows) n += row.result ? row.result->iterations : 0;
  return n;
}

int cmd_tradeoff(const Options& o) {
  Clock clock;
  const auto grid = parse_grid(o.grid);
  const auto in = read_input(o.ensemble_path);
  const auto e = load_valid(in, "tradeoff", clock);
  if (!e) return kValidation;
  const auto cfg = solver_config(o);
  const auto rows = run_pool(grid.steps, worker_count(o.jobs),
                             [&](std::size_t k) { return solve_point(*e, grid.at(k), cfg); });

  std::cout << "pi,ps,prs,iterations,residual,certified,status\n";
  for (const auto& row : rows) std::cout << row_csv(row) << '\n';

  json config = config_json(cfg);
  config["pi_grid"] = {{"start", grid.start}, {"stop", grid.stop}, {"steps", grid.steps}};
  json summary{{"points", rows.size()}};
  for (const char* status : {"ok", "unconverged", "infeasible"}) {
    summary[status] = std::count_if(rows.begin(), rows.end(),
                                    [&](const Row& r) { return r.status == status; });
  }
  write_record(o.record_path, make_record("tradeoff", input_json(in), std::move(config),
                                          std::move(summary), clock, total_iterations(rows)));
  return kOk;
}

int cmd_bound(const Options& o) {
  Clock clock;
  const auto in = read_input(o.ensemble_path);
  const auto e = load_valid(in, "bound", clock);
  if (!e) return kValidation;
  try {
    const auto b = max_relative_success(*e);
    emit(make_record("bound", input_json(in), {{"kernel_threshold", kKernelThreshold}},
                     {{"prs_max", b.prs_max},
                      {"per_state_a", b.per_state_a},
                      {"argmax_state", b.argmax_state},
                      {"kernel_dimension", b.kernel_dimension}},
                     clock, 0));
    return kOk;
  } catch (const SingularEnsembleError& err) {
    emit(make_record("bound", input_json(in), {{"kernel_threshold", kKernelThreshold}},
                     {{"status", "singular"},
                      {"error", err.what()},
                      {"min_eigenvalue", err.min_eigenvalue()}},
                     clock, 0));
    return kSingular;
  }
}

int cmd_certify(const Options& o) {
  Clock clock;
  const auto in = read_input(o.ensemble_path);
  const auto povm_in = read_input(o.povm_path);
  json inputs{{"ensemble", input_json(in)}, {"povm", input_json(povm_in)}};
  json config{{"tol_e", kDefaultExtremalTolerance}, {"tol_p", kDefaultPositivityTolerance}};

  auto e = io::ensemble_from_json(in.document);
  if (const auto report = validate(e); !report.empty()) {
    emit(make_record("certify", std::move(inputs), std::move(config),
                     {{"valid", false}, {"violations", violations_json(report)}}, clock, 0));
    return kValidation;
  }
  const auto povm = io::povm_from_json(povm_in.document);
  if (const auto problems = povm_violations(povm, e.size() + 1); !problems.empty()) {
    emit(make_record("certify", std::move(inputs), std::move(config),
                     {{"valid", false}, {"povm_violations", problems}}, clock, 0));
    return kValidation;
  }
  try {
    const auto c = check(e, povm);
    emit(make_record("certify", std::move(inputs), std::move(config), certificate_json(c), clock,
                     0));
    return c.optimal ? kOk : kNotOptimal;
  } catch (const SingularMultiplierError& err) {
    emit(make_record("certify", std::move(inputs), std::move(config),
                     {{"optimal", false}, {"error", err.what()}}, clock, 0));
    return kNotOptimal;
  }
}

int cmd_pair(const Options& o) {
  std::cout << io::ensemble_to_json(symmetric_qubit_pair(o.eta, o.theta)).dump(2) << '\n';
  return kOk;
}

int cmd_curves(const Options& o) {
  Clock clock;
  const auto grid = parse_grid(o.grid);
  const auto cfg = solver_config(o);
  struct Point {
    double eta;
    double pi;
  };
  std::vector<Point> points;
  for (double eta : o.etas) {
    for (int k = 0; k < grid.steps; ++k) points.push_back({eta, grid.at(k)});
  }
  const auto rows = run_pool(points.size(), worker_count(o.jobs), [&](std::size_t k) {
    return solve_point(symmetric_qubit_pair(points[k].eta, o.theta), points[k].pi, cfg);
  });

  std::cout << "eta,pi,ps,prs,iterations,residual,certified,status,analytic_prs\n";
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const qubit::SymmetricQubitProblem problem(points[k].eta, o.theta);
    std::cout << num(points[k].eta) << ',' << row_csv(rows[k]) << ','
              << num(qubit::envelope_prs(problem, points[k].pi)) << '\n';
  }

  json config = config_json(cfg);
  config["theta"] = o.theta;
  config["etas"] = o.etas;
  config["pi_grid"] = {{"start", grid.start}, {"stop", grid.stop}, {"steps", grid.steps}};
  write_record(o.record_path,
               make_record("curves", json::object(), std::move(config), {{"points", rows.size()}},
                           clock, total_iterations(rows)));
  return kOk;
}

void configure_logging() {
  auto logger = spdlog::stderr_color_mt("povmlab");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  if (const char* level = std::getenv("POVMLAB_LOG")) {
    const auto parsed = spdlog::level::from_str(level);
    // from_str maps unknown names to off
    if (parsed != spdlog::level::off || std::string(level) == "off") {
      spdlog::set_level(parsed);
    } else {
      spdlog::warn("unknown POVMLAB_LOG level '{}', keeping warn", level);
    }
  }
}

void add_solver_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--tol", o.tol, "Max Frobenius change per sweep at convergence")
      ->capture_default_str();
  cmd->add_option("--max-iter", o.max_iter, "Sweep limit")->capture_default_str();
  cmd->add_option("--pinv-cutoff", o.pinv_cutoff, "Pseudoinverse cutoff on lambda^2, relative to its largest eigenvalue")
      ->capture_default_str();
  cmd->add_flag("--accelerate", o.accelerate, "Anderson mixing of the sweeps");
}

}  // namespace

int main(int argc, char** argv) {
  configure_logging();
  Options o;
  CLI::App app{"Optimal POVMs with a fixed rate of inconclusive results"};
  app.require_subcommand(1);

  auto* validate_cmd = app.add_subcommand("validate", "Check an ensemble file");
  validate_cmd->add_option("ensemble", o.ensemble_path, "Ensemble JSON")->required();

  auto* solve_cmd = app.add_subcommand("solve", "Optimal POVM at one inconclusive rate");
  solve_cmd->add_option("ensemble", o.ensemble_path, "Ensemble JSON")->required();
  solve_cmd->add_option("--pi", o.pi, "Target inconclusive rate in [0, 1)")->required();
  solve_cmd->add_flag("--emit-povm", o.emit_povm, "Include the POVM matrices");
  add_solver_flags(solve_cmd, o);

  auto* tradeoff_cmd = app.add_subcommand("tradeoff", "CSV sweep over inconclusive rates");
  tradeoff_cmd->add_option("ensemble", o.ensemble_path, "Ensemble JSON")->required();
  tradeoff_cmd->add_option("--pi-grid", o.grid, "start:stop:steps")->required();
  tradeoff_cmd->add_option("--jobs", o.jobs, "Worker threads (0 = all cores)");
  tradeoff_cmd->add_option("--record", o.record_path, "Write the run record JSON here");
  add_solver_flags(tradeoff_cmd, o);

  auto* bound_cmd = app.add_subcommand("bound", "Plateau of the relative success rate");
  bound_cmd->add_option("ensemble", o.ensemble_path, "Ensemble JSON")->required();

  auto* certify_cmd = app.add_subcommand("certify", "Optimality certificate for a POVM");
  certify_cmd->add_option("ensemble", o.ensemble_path, "Ensemble JSON")->required();
  certify_cmd->add_option("povm", o.povm_path, "POVM JSON, inconclusive element first")
      ->required();

  auto* curves_cmd =
      app.add_subcommand("curves", "Trade-off curves of the symmetric mixed qubit pair");
  curves_cmd->add_option("--eta", o.etas, "Purity parameters")->capture_default_str();
  curves_cmd->add_option("--theta", o.theta, "Half angle between the states")
      ->capture_default_str();
  curves_cmd->add_option("--pi-grid", o.grid, "start:stop:steps")->capture_default_str();
  curves_cmd->add_option("--jobs", o.jobs, "Worker threads (0 = all cores)");
  curves_cmd->add_option("--record", o.record_path, "Write the run record JSON here");
  add_solver_flags(curves_cmd, o);

  auto* pair_cmd = app.add_subcommand("pair", "Print the symmetric mixed qubit pair ensemble");
  pair_cmd->add_option("--eta", o.eta, "Purity parameter in (0, 1]")->capture_default_str();
  pair_cmd->add_option("--theta", o.theta, "Half angle in (0, pi/2]")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    return app.exit(err);
  }

  try {
    if (*validate_cmd) return cmd_validate(o);
    if (*solve_cmd) return cmd_solve(o);
    if (*tradeoff_cmd) return cmd_tradeoff(o);
    if (*bound_cmd) return cmd_bound(o);
    if (*certify_cmd) return cmd_certify(o);
    if (*curves_cmd) return cmd_curves(o);
    if (*pair_cmd) return cmd_pair(o);
  } catch (const io::ParseError& err) {
    spdlog::error("{}", err.what());
    return kIo;
  } catch (const ValidationError& err) {
    spdlog::error("{}", err.what());
    return kValidation;
  } catch (const UsageError& err) {
    spdlog::error("{}", err.what());
    return kValidation;
  } catch (const InfeasibleTargetError& err) {
    spdlog::error("{} (supremum {:.17g})", err.what(), err.supremum());
    return kInfeasible;
  } catch (const SingularEnsembleError& err) {
    spdlog::error("{}", err.what());
    return kSingular;
  }
  return kOk;
}
