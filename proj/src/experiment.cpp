#include "msgfem/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "msgfem/error.hpp"
#include "msgfem/io.hpp"
#include "msgfem/parallel.hpp"

namespace msgfem {

Source make_source(const SourceSpec& spec) {
  const double a = spec.value;
  if (spec.kind == SourceSpec::Kind::sine)
    return [a](const Point& x) { return a * std::sin(std::numbers::pi * x.x()) * std::sin(std::numbers::pi * x.y()); };
  return [a](const Point&) { return a; };
}

namespace {

std::vector<LocalSpectralData> solve_all_local(const TriMesh& mesh, const Coefficient& nu, const Source& f,
                                               const PartitionOfUnity& pou, const Decomposition& dec,
                                               double gamma0_sq, int threads) {
  std::vector<LocalSpectralData> locals(dec.size());
  parallel_for(dec.size(), threads, [&](int j) { locals[j] = solve_local(mesh, nu, f, pou, dec, j, gamma0_sq); });
  return locals;
}

} // namespace

Pipeline::Pipeline(const RunConfig& config, int threads)
    : mesh(build_structured_mesh(config.mesh_n)),
      nu(coefficient_field([&] {
           CoefficientSpec spec = config.coefficient;
           spec.seed = config.seed;
           return spec;
         }(), mesh)),
      dec(build_decomposition(mesh, config.grid_m, config.overlap, config.oversampling)),
      pou(build_pou(mesh, dec)) {
  const Source f = make_source(config.source);
  const double g0 = config.gamma0_sq;
  const ElementSet everything = ElementSet::all(mesh);
  locals = solve_all_local(mesh, nu, f, pou, dec, g0, threads);
  B = assemble_B(mesh, nu, everything, g0).matrix;
  Bplus = assemble_Bplus(mesh, nu, everything, g0).matrix;
  mass = assemble_mass(mesh, everything).matrix;
  F = assemble_load(mesh, f, everything);
  u_fine = fine_solve(mesh, nu, f, g0);
}

std::optional<DecayFit> worst_eigen_fit(const Pipeline& p, int modes) {
  std::optional<DecayFit> worst;
  for (const auto& l : p.locals) {
    const auto& vals = l.eig.values;
    if (vals.size() < l.eig.kernel_dim + modes)
      return std::nullopt;
    std::vector<double> roots;
    for (int k = 0; k < modes; ++k) {
      const double v = vals[l.eig.kernel_dim + k];
      if (!(v > 0.0))
        return std::nullopt;
      roots.push_back(std::sqrt(v));
    }
    const DecayFit fit = decay_fit(roots, 0.5);
    if (!worst || fit.r2 < worst->r2)
      worst = fit;
  }
  return worst;
}

std::vector<int> uniform_counts(const Pipeline& p, int n_j) {
  std::vector<int> counts;
  for (const auto& l : p.locals)
    counts.push_back(std::min(std::max(n_j, l.eig.kernel_dim), static_cast<int>(l.eig.values.size())));
  return counts;
}

std::vector<int> rule_counts(const Pipeline& p, const CoarseRule& rule) {
  if (rule.kind == CoarseRule::Kind::fixed)
    return uniform_counts(p, rule.count);
  std::vector<int> counts;
  for (const auto& l : p.locals)
    counts.push_back(select_count(l.eig, rule));
  return counts;
}

SweepPoint evaluate(const Pipeline& p, const RunConfig& config, std::span<const int> counts, int n_j) {
  SweepPoint pt;
  const CoarseAssembly ca = assemble_coarse(p.mesh, p.nu, config.gamma0_sq, p.dec, p.pou, p.locals, counts);
  pt.diagnostics = solve_coarse(p.B, p.F, ca.coarse, ca.particular);
  pt.solution.u_p = ca.particular;
  pt.solution.u_s = pt.diagnostics.correction;
  pt.solution.u_g = pt.solution.u_p + pt.solution.u_s;
  pt.errors = error_report(p.Bplus, p.mass, pt.solution.u_g, p.u_fine);
  pt.errors.max_sqrt_lambda_next = max_sqrt_lambda_next(p.locals, counts);

  SweepRow& r = pt.row;
  r.grid_m = config.grid_m;
  r.overlap = config.overlap;
  r.oversampling = config.oversampling;
  r.n_j = n_j;
  r.gamma0_sq = config.gamma0_sq;
  r.contrast = p.nu.contrast();
  r.n_total = ca.coarse.size();
  r.rel_bplus_error = pt.errors.rel_energy_error;
  r.rel_l2_error = pt.errors.rel_l2_error;
  r.max_sqrt_lambda_next = pt.errors.max_sqrt_lambda_next;
  const auto fit = worst_eigen_fit(p, config.fit_modes);
  r.fit_slope = fit ? fit->slope : std::numeric_limits<double>::quiet_NaN();
  r.fit_r2 = fit ? fit->r2 : std::numeric_limits<double>::quiet_NaN();
  return pt;
}

void write_eigenvalues_csv(std::ostream& os, const Pipeline& p, int per_subdomain) {
  os << "j,k,lambda,is_infinite\n";
  for (const auto& l : p.locals) {
    const auto& vals = l.eig.values;
    for (Eigen::Index k = 0; k < std::min<Eigen::Index>(per_subdomain, vals.size()); ++k)
      os << l.index << ',' << k + 1 << ',' << format_double(vals[k]) << ',' << (std::isinf(vals[k]) ? 1 : 0) << '\n';
  }
}

void write_errors_csv(std::ostream& os, std::span<const SweepRow> rows) {
  os << "m,l,l_star,n_j,gamma0,contrast,n_total,relBplusErr,relL2Err,maxSqrtLambdaNext,fitSlope,fitR2\n";
  for (const auto& r : rows)
    os << r.grid_m << ',' << r.overlap << ',' << r.oversampling << ',' << r.n_j << ',' << format_double(std::sqrt(r.gamma0_sq))
       << ',' << format_double(r.contrast) << ',' << r.n_total << ',' << format_double(r.rel_bplus_error) << ','
       << format_double(r.rel_l2_error) << ',' << format_double(r.max_sqrt_lambda_next) << ','
       << format_double(r.fit_slope) << ',' << format_double(r.fit_r2) << '\n';
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw std::runtime_error("cannot write " + path.string());
  out << content;
  out.flush();
}

} // namespace

ExperimentResult run(const RunConfig& config, const RunOptions& options, std::ostream& log) {
  ExperimentResult result;
  const std::filesystem::path dir(config.out_dir);
  std::filesystem::create_directories(dir);
  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(); };

  if (config.checks || options.checks_only) {
    SuiteConfig sc;
    sc.mesh_n = config.mesh_n;
    sc.grid_m = config.grid_m;
    sc.overlap = config.overlap;
    sc.oversampling = config.oversampling;
    sc.gamma0_sq = config.gamma0_sq;
    sc.coefficient = config.coefficient;
    sc.coefficient.seed = config.seed;
    sc.seed = config.seed;
    sc.samples = config.samples;
    result.report = run_property_suite(sc);
    write_file(dir / "checks.json", result.report->to_json());
    log << result.report->to_text();
    log << "checks done in " << elapsed() << " s\n";
    if (const auto* f = result.report->first_failure()) {
      log << "first failing check: " << f->module << '/' << f->name << '\n';
      result.exit_code = 1;
    }
  }
  if (options.checks_only)
    return result;

  try {
    const Pipeline p(config, options.threads);
    std::ostringstream eig;
    write_eigenvalues_csv(eig, p, config.eigen_export);
    write_file(dir / "eigenvalues.csv", eig.str());
    log << "local problems and fine solve done in " << elapsed() << " s\n";

    std::vector<std::vector<int>> counts;
    std::vector<int> requested;
    if (config.sweep_nj.empty()) {
      counts.push_back(rule_counts(p, config.coarse_rule));
      requested.push_back(config.coarse_rule.kind == CoarseRule::Kind::fixed
                              ? config.coarse_rule.count
                              : *std::max_element(counts.back().begin(), counts.back().end()));
    } else {
      for (int n : config.sweep_nj) {
        counts.push_back(uniform_counts(p, n));
        requested.push_back(n);
      }
    }
    result.rows.resize(counts.size());
    parallel_for(static_cast<int>(counts.size()), options.threads,
                 [&](int i) { result.rows[i] = evaluate(p, config, counts[i], requested[i]).row; });

    std::ostringstream err;
    write_errors_csv(err, result.rows);
    write_file(dir / "errors.csv", err.str());

    for (const auto& r : result.rows)
      if (r.max_sqrt_lambda_next > 0.0)
        result.max_error_ratio = std::max(result.max_error_ratio, r.rel_bplus_error / r.max_sqrt_lambda_next);
    if (result.rows.size() >= 5) {
      // Fitted against the sweep's own n_j values, not 1..N.
      std::vector<double> x, y;
      for (const auto& r : result.rows) {
        x.push_back(std::sqrt(static_cast<double>(r.n_j)));
        y.push_back(std::log(r.rel_bplus_error));
      }
      if (std::all_of(y.begin(), y.end(), [](double v) { return std::isfinite(v); }))
        result.sweep_fit = linear_fit(x, y);
    }
    log << "sweep done in " << elapsed() << " s; max relBplusErr / maxSqrtLambdaNext = " << result.max_error_ratio
        << '\n';
    if (result.sweep_fit)
      log << "log relBplusErr vs sqrt(n_j): slope " << result.sweep_fit->slope << ", R^2 " << result.sweep_fit->r2
          << '\n';
  } catch (const std::exception& ex) {
    result.failure = ex.what();
    log << "run failed: " << ex.what() << '\n';
    result.exit_code = 1;
  }
  return result;
}

} // namespace msgfem
