#include "chaoslab/runner.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "chaoslab/errors.hpp"
#include "chaoslab/gridfn_io.hpp"
#include "chaoslab/reduce.hpp"
#include "chaoslab/version.hpp"

namespace chaoslab {

namespace {

constexpr double kPi = 3.1415926535897932384626433832795;
constexpr double kCflSafety = 0.8;   // fraction of the admissible transport dt
constexpr double kCertSlack = 0.15;  // fitted-vs-declared exponent tolerance

std::string hash_hex(std::uint64_t h) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const ExperimentConfig& cfg, Command cmd,
            const std::string& columns)
      : path_(path.string()), out_(path) {
    if (!out_) throw IoError("output.dir", "cannot open '" + path_ + "' for writing");
    out_ << "# chaoslab " << kVersion << " cmd=" << command_name(cmd)
         << " config=" << hash_hex(config_hash(cfg)) << " seed=" << cfg.seed << "\n";
    out_ << columns << "\n";
  }
  template <typename... Ts>
  void row(Ts... fields) {
    bool first = true;
    ((out_ << (first ? "" : ","), first = false, put(fields)), ...);
    out_ << "\n";
  }
  void close() {
    out_.flush();
    if (out_.fail()) throw IoError("output.dir", "error writing '" + path_ + "'");
    out_.close();
  }

 private:
  void put(double v) { out_ << fmt_g17(v); }
  void put(int v) { out_ << v; }
  void put(std::int64_t v) { out_ << v; }
  void put(std::uint32_t v) { out_ << v; }
  void put(std::uint64_t v) { out_ << v; }
  void put(const char* s) { out_ << s; }
  void put(const std::string& s) { out_ << s; }
  std::string path_;
  std::ofstream out_;
};

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("output.dir", "cannot create '" + dir + "': " + ec.message());
}

GridFunction load_grid_file(const std::string& path) {
  if (path.size() >= 4 && path.substr(path.size() - 4) == ".bin")
    return load_binary(path);
  return load_csv(path);
}

std::vector<double> default_save_times(const ExperimentConfig& cfg) {
  std::vector<double> times;
  for (int k = 0; k <= cfg.save_count; ++k)
    times.push_back(cfg.T * static_cast<double>(k) / static_cast<double>(cfg.save_count));
  return times;
}

int transport_substeps(double dt, double umax, double h) {
  if (!(umax > 0.0)) return 1;
  const double admissible = kCflSafety * h / (2.0 * umax);
  return std::max(1, static_cast<int>(std::ceil(dt / admissible)));
}

// Plancherel sum (1/(2L)^dim) sum_k w_k of a per-mode weight vector,
// deterministic across thread counts.
double plancherel_sum(const Grid& g, const std::vector<double>& w) {
  double vol = 1.0;
  for (int a = 0; a < g.dim; ++a) vol *= 2.0 * g.L;
  return blocked_sum(w.data(), w.size()) / vol;
}

} // namespace

GridFunction initial_density(const InitConfig& init, const Grid& g) {
  GridFunction rho;
  if (init.kind == "gaussian") {
    const double mu = init.mean, sd = init.std_dev;
    rho = make_grid_function(g, [mu, sd](const std::array<double, 3>& x) {
      double q = 0.0;
      q += (x[0] - mu) * (x[0] - mu);
      return std::exp(-0.5 * q / (sd * sd));
    });
  } else if (init.kind == "uniform") {
    const double a = init.a, b = init.b;
    rho = make_grid_function(g, [a, b](const std::array<double, 3>& x) {
      return (x[0] >= a && x[0] < b) ? 1.0 : 0.0;
    });
  } else {
    throw ValidationError("init.kind", "init kind must be gaussian|uniform");
  }
  const double mass = quadrature(rho);
  if (!(mass > 0.0))
    throw ValidationError("init", "initial density has no mass on this grid");
  for (double& v : rho.values) v /= mass;
  rho.is_density = true;
  return rho;
}

KernelPair build_pair(const KernelConfig& k, double eps, const Grid& g) {
  switch (k.family) {
    case KernelFamily::kBoundedConfidence:
      return bounded_confidence_pair(
          k.R, eps, g, k.route == "force" ? BcRoute::kForce : BcRoute::kPotential);
    case KernelFamily::kCoulomb: {
      CoulombRoute route = CoulombRoute::kWeierstrassSqrt;
      if (k.route == "mollify_both") route = CoulombRoute::kMollifyBoth;
      else if (k.route == "fourier_sqrt") route = CoulombRoute::kFourierSqrt;
      return coulomb_factorized_pair(k.d, eps, g, route);
    }
    case KernelFamily::kBessel:
      return bessel_pair(eps, g,
                         k.route == "mollifier" ? BesselRoute::kMollifier
                                                : BesselRoute::kWeierstrass);
    case KernelFamily::kCustom: {
      KernelPair pair;
      pair.W = load_grid_file(k.w_file);
      pair.V = load_grid_file(k.v_file);
      if (!(pair.W.grid == g) || !(pair.V.grid == g))
        throw ValidationError("kernel.w_file",
                              "custom kernel grids must match the configured grid");
      pair.mode = (k.mode == "product") ? PairMode::kProduct : PairMode::kGradientProduct;
      pair.force_sign = k.force_sign;
      pair.eps = eps;
      pair.a_W = k.a_W;
      pair.a_V = k.a_V;
      pair.strongly_admissible = false;
      return pair;
    }
  }
  throw ValidationError("kernel.family", "unhandled kernel family");
}

MeanFieldSolution solve_mean_field(const ExperimentConfig& cfg, int N, double eps) {
  MeanFieldSolution mf;
  mf.grid = Grid(1, cfg.L, cfg.n);
  mf.eps = eps;
  mf.dt = cfg.dt;
  mf.rho0 = initial_density(cfg.init, mf.grid);
  mf.pair = build_pair(cfg.kernel, eps, mf.grid);
  mf.k_eps = assemble_force(mf.pair)[0];

  SdeConfig scfg;
  scfg.N = N;
  scfg.sigma = cfg.sigma;
  scfg.T = cfg.T;
  scfg.dt = cfg.dt;
  scfg.save_times = default_save_times(cfg);
  const std::int64_t steps = scfg.n_steps();
  mf.save_steps = scfg.save_steps();
  for (std::int64_t s : mf.save_steps)
    mf.save_times.push_back(static_cast<double>(s) * cfg.dt);

  mf.substeps = transport_substeps(cfg.dt, linf_norm(mf.k_eps), mf.grid.h());
  const double pde_dt = cfg.dt / static_cast<double>(mf.substeps);

  PdeState state = make_pde_state(mf.rho0, cfg.sigma);
  mf.force_at_step.reserve(static_cast<std::size_t>(steps) + 1);
  std::size_t save_cursor = 0;
  for (std::int64_t s = 0; s <= steps; ++s) {
    mf.force_at_step.push_back(convolve(mf.k_eps, state.rho));
    if (save_cursor < mf.save_steps.size() && mf.save_steps[save_cursor] == s) {
      mf.rho_save.push_back(state.rho);
      mf.rho_hat_save.push_back(spectrum(state.rho));
      ++save_cursor;
    }
    if (s < steps)
      for (int sub = 0; sub < mf.substeps; ++sub) pde_step(state, mf.k_eps, pde_dt);
  }
  mf.pde_clipped = state.clipped_cells;
  mf.pde_renorm = state.renorm_total;

  mf.v_hat = spectrum(mf.pair.V);
  mf.vx_hat = spectrum(spectral_derivative(mf.pair.V, 0));
  Spectrum w_hat = spectrum(mf.pair.W);
  mf.wv_weight.resize(w_hat.values.size());
  for (std::size_t i = 0; i < w_hat.values.size(); ++i)
    mf.wv_weight[i] = (w_hat.values[i] * mf.v_hat.values[i]).real();
  mf.w_l2 = l2_norm(mf.pair.W);
  return mf;
}

DiagnosticsRecord run_replica(const ExperimentConfig& cfg, const MeanFieldSolution& mf,
                              int N, std::uint32_t replica_id,
                              std::vector<double>* final_x,
                              std::vector<TrajectoryRow>* trajectory, bool parallel) {
  SdeConfig scfg;
  scfg.N = N;
  scfg.sigma = cfg.sigma;
  scfg.T = cfg.T;
  scfg.dt = cfg.dt;
  scfg.seed = cfg.seed;
  scfg.replica_id = replica_id;
  const std::int64_t steps = scfg.n_steps();

  const EmpConvPath lln_path =
      cfg.lln_path == "direct" ? EmpConvPath::kDirect : EmpConvPath::kDeposit;

  DiagnosticsRecord rec;
  rec.replica_id = replica_id;

  ParticleEnsemble ens = make_ensemble(mf.rho0, scfg);

  const Grid& g = mf.grid;
  const auto nmodes = mf.v_hat.values.size();
  std::vector<double> term(nmodes);
  const double sig2 = cfg.sigma * cfg.sigma;

  auto record_slice = [&](std::size_t save_idx, std::int64_t step) {
    const double t = static_cast<double>(step) * cfg.dt;
    EmpiricalMeasure mu{ens.X};
    Spectrum dep_hat = spectrum(deposit(mu, g));
    const auto& rho_hat = mf.rho_hat_save[save_idx].values;

    for (std::size_t k = 0; k < nmodes; ++k) {
      const std::complex<double> m = dep_hat.values[k] - rho_hat[k];
      const std::complex<double> c = mf.v_hat.values[k] * m;
      term[k] = std::norm(c);
    }
    const double l2 = plancherel_sum(g, term);

    for (std::size_t k = 0; k < nmodes; ++k) {
      const std::complex<double> m = dep_hat.values[k] - rho_hat[k];
      const std::complex<double> c = mf.vx_hat.values[k] * m;
      term[k] = std::norm(c);
    }
    const double l2dx = plancherel_sum(g, term);

    for (std::size_t k = 0; k < nmodes; ++k) {
      const std::complex<double> m = dep_hat.values[k] - rho_hat[k];
      term[k] = mf.wv_weight[k] * std::norm(m);
    }
    const double ke = plancherel_sum(g, term) / sig2;

    max_coupling(ens, g.L, /*update_running=*/true);
    const double lln = lln_defect(ens.Y, mf.k_eps,
                                  mf.force_at_step[static_cast<std::size_t>(step)],
                                  lln_path, parallel);

    rec.times.push_back(t);
    rec.l2_moll.push_back(l2);
    rec.l2_moll_dx.push_back(l2dx);
    rec.modulated_energy.push_back(ke);
    rec.coupling_max.push_back(ens.running_max_coupling);
    rec.lln_defect.push_back(lln);

    if (trajectory) {
      for (int i = 0; i < N; ++i)
        trajectory->push_back(TrajectoryRow{t, i, ens.X[static_cast<std::size_t>(i)],
                                            ens.Y[static_cast<std::size_t>(i)]});
    }
  };

  std::size_t save_cursor = 0;
  if (save_cursor < mf.save_steps.size() && mf.save_steps[save_cursor] == 0) {
    record_slice(save_cursor, 0);
    ++save_cursor;
  }
  for (std::int64_t s = 0; s < steps; ++s) {
    step_interacting(ens, mf.k_eps, mf.eps, scfg, s, parallel);
    step_meanfield(ens, mf.force_at_step[static_cast<std::size_t>(s)],
                   static_cast<double>(s) * cfg.dt, mf.eps, scfg, s, parallel);
    if (save_cursor < mf.save_steps.size() && mf.save_steps[save_cursor] == s + 1) {
      record_slice(save_cursor, s + 1);
      ++save_cursor;
    }
  }
  rec.boundary_warnings = ens.boundary_warnings;
  if (final_x) *final_x = ens.X;
  return rec;
}

namespace {

void write_records_csv(const std::filesystem::path& dir, const ExperimentConfig& cfg,
                       Command cmd, int N,
                       const std::vector<DiagnosticsRecord>& records) {
  std::ostringstream name;
  name << "records_N" << N << ".csv";
  CsvWriter w(dir / name.str(), cfg, cmd,
              "replica,t,l2_moll,l2_moll_dx,modulated_energy,coupling_max,lln_defect");
  for (const auto& r : records)
    for (std::size_t i = 0; i < r.times.size(); ++i)
      w.row(r.replica_id, r.times[i], r.l2_moll[i], r.l2_moll_dx[i],
            r.modulated_energy[i], r.coupling_max[i], r.lln_defect[i]);
  w.close();
}

void write_trajectories_csv(const std::filesystem::path& dir,
                            const ExperimentConfig& cfg, Command cmd, int N,
                            const std::vector<std::vector<TrajectoryRow>>& trajs) {
  std::ostringstream name;
  name << "trajectories_N" << N << ".csv";
  CsvWriter w(dir / name.str(), cfg, cmd, "replica,t,i,X,Y");
  for (std::size_t m = 0; m < trajs.size(); ++m)
    for (const auto& row : trajs[m])
      w.row(static_cast<std::uint32_t>(m), row.t, row.i, row.x, row.y);
  w.close();
}

struct SweepOutput {
  std::vector<SweepRow> rows;
  std::vector<std::int64_t> boundary_totals;
  double a_W = 0.0, a_V = 0.0; ///< declared exponents of the pair
};

SweepOutput simulate_core(const ExperimentConfig& cfg, Command cmd) {
  ensure_dir(cfg.output_dir);
  const std::filesystem::path dir(cfg.output_dir);
  SweepOutput out;

  for (int N : cfg.N_list) {
    const double eps = std::pow(static_cast<double>(N), -cfg.beta);
    MeanFieldSolution mf = solve_mean_field(cfg, N, eps);
    out.a_W = mf.pair.a_W;
    out.a_V = mf.pair.a_V;

    std::vector<DiagnosticsRecord> records;
    std::vector<std::vector<TrajectoryRow>> trajs;
    std::int64_t boundary_total = 0;
    records.reserve(static_cast<std::size_t>(cfg.replicas));
    for (int m = 0; m < cfg.replicas; ++m) {
      std::vector<TrajectoryRow> traj;
      records.push_back(run_replica(cfg, mf, N, static_cast<std::uint32_t>(m), nullptr,
                                    cfg.write_trajectories ? &traj : nullptr));
      boundary_total += records.back().boundary_warnings;
      if (cfg.write_trajectories) trajs.push_back(std::move(traj));
    }

    write_records_csv(dir, cfg, cmd, N, records);
    if (cfg.write_trajectories) write_trajectories_csv(dir, cfg, cmd, N, trajs);

    out.rows.push_back(aggregate_records(N, eps, records, cfg.alpha, cfg.delta,
                                         mf.w_l2, cfg.sigma));
    out.boundary_totals.push_back(boundary_total);
  }

  CsvWriter w(dir / "sweep.csv", cfg, cmd,
              "N,eps,sup_l2_mean,sup_l2_stderr,int_l2dx_mean,int_l2dx_stderr,"
              "sup_ke_mean,sup_ke_stderr,coupling_freq,coupling_lo,coupling_hi,"
              "lln_freq,lln_lo,lln_hi,entropy_bound,entropy_bound_stderr,"
              "replicas,boundary_warnings");
  for (std::size_t i = 0; i < out.rows.size(); ++i) {
    const SweepRow& r = out.rows[i];
    w.row(r.N, r.eps, r.sup_l2.mean, r.sup_l2.stderr_mean, r.int_l2_dx.mean,
          r.int_l2_dx.stderr_mean, r.sup_abs_ke.mean, r.sup_abs_ke.stderr_mean,
          r.coupling_freq.phat, r.coupling_freq.lo, r.coupling_freq.hi, r.lln_freq.phat,
          r.lln_freq.lo, r.lln_freq.hi, r.entropy_bound.value,
          r.entropy_bound.stderr_value, cfg.replicas, out.boundary_totals[i]);
  }
  w.close();
  return out;
}

} // namespace

int run_simulate(const ExperimentConfig& cfg) {
  validate_config(cfg, Command::kSimulate);
  simulate_core(cfg, Command::kSimulate);
  return 0;
}

int run_rate_sweep(const ExperimentConfig& cfg) {
  validate_config(cfg, Command::kRateSweep);
  const SweepOutput out = simulate_core(cfg, Command::kRateSweep);
  const std::filesystem::path dir(cfg.output_dir);

  KernelPair proto;
  proto.a_W = out.a_W;
  proto.a_V = out.a_V;
  const RateTable table = predicted_rate_table(proto, cfg.alpha, cfg.beta, cfg.gamma);

  {
    CsvWriter w(dir / "predicted_rates.csv", cfg, Command::kRateSweep,
                "term,label,exponent,binding");
    for (int i = 0; i < 4; ++i)
      w.row(i, table.labels[static_cast<std::size_t>(i)],
            table.exponents[static_cast<std::size_t>(i)],
            i == table.binding_index ? 1 : 0);
    w.close();
  }

  CsvWriter w(dir / "rates.csv", cfg, Command::kRateSweep,
              "quantity,slope,ci_lo,ci_hi,r2,predicted_binding_exponent");
  std::vector<double> Ns;
  for (int N : cfg.N_list) Ns.push_back(static_cast<double>(N));
  auto fit_and_row = [&](const char* name, auto getter) {
    std::vector<double> vals;
    for (const SweepRow& r : out.rows) vals.push_back(getter(r));
    bool positive = Ns.size() >= 4;
    for (double v : vals)
      if (!(v > 0.0)) positive = false;
    if (positive) {
      const OlsFit fit = rate_fit(Ns, vals);
      w.row(name, fit.slope, fit.slope - fit.ci_half_95, fit.slope + fit.ci_half_95,
            fit.r2, table.binding_exponent);
    } else {
      w.row(name, "nan", "nan", "nan", "nan", fmt_g17(table.binding_exponent));
    }
  };
  fit_and_row("sup_l2", [](const SweepRow& r) { return r.sup_l2.mean; });
  fit_and_row("int_l2dx", [](const SweepRow& r) { return r.int_l2_dx.mean; });
  fit_and_row("sup_ke", [](const SweepRow& r) { return r.sup_abs_ke.mean; });
  w.close();
  return 0;
}

int run_kernel_check(const ExperimentConfig& cfg) {
  validate_config(cfg, Command::kKernelCheck);
  ensure_dir(cfg.output_dir);
  const std::filesystem::path dir(cfg.output_dir);

  const int dim = (cfg.kernel.family == KernelFamily::kCoulomb ||
                   cfg.kernel.family == KernelFamily::kBessel)
                      ? cfg.kernel.d
                      : 1;
  Grid g(dim, cfg.L, cfg.n);

  auto factory = [&](double e) { return build_pair(cfg.kernel, e, g); };

  // oracle potential for the factorization residual, shared across eps
  const bool is_coulomb = cfg.kernel.family == KernelFamily::kCoulomb;
  const bool is_bessel = cfg.kernel.family == KernelFamily::kBessel;
  const bool is_bc = cfg.kernel.family == KernelFamily::kBoundedConfidence;
  GridFunction base_potential;
  if (is_coulomb) base_potential = coulomb_potential(g);
  if (is_bessel) base_potential = bessel_potential(g);
  if (is_bc) {
    if (cfg.kernel.route == "force")
      base_potential = bounded_confidence_force(cfg.kernel.R, g);
    else
      base_potential = make_grid_function(g, [R = cfg.kernel.R](
                                                 const std::array<double, 3>& x) {
        const double t = R - std::abs(x[0]);
        return t > 0.0 ? t : 0.0; // the tent W*V approximates
      });
  }

  auto oracle_for = [&](double e) -> GridFunction {
    if (cfg.kernel.family == KernelFamily::kCustom)
      return GridFunction(); // no closed-form oracle for user kernels
    const bool heat_route = (is_coulomb && cfg.kernel.route == "weierstrass_sqrt") ||
                            (is_bessel && cfg.kernel.route == "weierstrass");
    if (heat_route) return convolve(base_potential, weierstrass_kernel(e, g));
    GridFunction J = make_mollifier({MollifierBase::kBump, e}, g);
    return convolve(base_potential, convolve(J, J));
  };

  const AdmissibilityCert cert = certify_admissible_pair(factory, cfg.eps_list);

  CsvWriter rows(dir / "certification.csv", cfg, Command::kKernelCheck,
                 "eps,w_l2,v_h2,w_h2,factorization_residual");
  std::vector<double> residuals;
  for (std::size_t i = 0; i < cfg.eps_list.size(); ++i) {
    const double e = cfg.eps_list[i];
    double resid = std::numeric_limits<double>::quiet_NaN();
    if (cfg.kernel.family != KernelFamily::kCustom) {
      KernelPair p = factory(e);
      resid = factorization_residual(p, oracle_for(e));
    }
    residuals.push_back(resid);
    rows.row(e, cert.rows[i].w_l2, cert.rows[i].v_h2, cert.rows[i].w_h2, resid);
  }
  rows.close();

  CsvWriter sum(dir / "certification_summary.csv", cfg, Command::kKernelCheck,
                "fitted_a_W,fitted_a_V,fitted_a_W_h2,declared_a_W,declared_a_V,"
                "strongly_admissible,ok,slack,moll_l2_slope,moll_h1_slope");
  double ml2 = std::numeric_limits<double>::quiet_NaN();
  double mh1 = std::numeric_limits<double>::quiet_NaN();
  if (dim == 1) {
    ml2 = certify_mollifier_scaling(MollifierBase::kBump, cfg.eps_list, g, 0.0).slope;
    mh1 = certify_mollifier_scaling(MollifierBase::kBump, cfg.eps_list, g, 1.0).slope;
  }
  sum.row(cert.fitted_a_W, cert.fitted_a_V, cert.fitted_a_W_h2, cert.declared_a_W,
          cert.declared_a_V, cert.strongly_admissible ? 1 : 0,
          cert.ok(kCertSlack) ? 1 : 0, kCertSlack, ml2, mh1);
  sum.close();
  return 0;
}

int run_liouville_oracle(const ExperimentConfig& cfg) {
  validate_config(cfg, Command::kLiouvilleOracle);
  ensure_dir(cfg.output_dir);
  const std::filesystem::path dir(cfg.output_dir);

  const int N = 2;
  const double eps =
      cfg.eps_override > 0.0 ? cfg.eps_override : std::pow(2.0, -cfg.beta);
  MeanFieldSolution mf = solve_mean_field(cfg, N, eps);
  const Grid& g = mf.grid;

  // 2D Liouville solve, synchronized with the save grid.
  Liouville2State liou =
      make_liouville2_state(outer_product(mf.rho0, mf.rho0), cfg.sigma);
  const double umax1 = 0.5 * linf_norm(mf.k_eps);
  const int sub2 = transport_substeps(cfg.dt, 2.0 * umax1, g.h());
  const double pde_dt2 = cfg.dt / static_cast<double>(sub2);

  // replica records for the entropy-bound side
  std::vector<DiagnosticsRecord> records;
  std::vector<double> pooled_x1;
  for (int m = 0; m < cfg.replicas; ++m) {
    std::vector<double> fx;
    records.push_back(
        run_replica(cfg, mf, N, static_cast<std::uint32_t>(m), &fx, nullptr));
    pooled_x1.push_back(fx[0]); // exchangeability: first particle
  }
  write_records_csv(dir, cfg, Command::kLiouvilleOracle, N, records);

  CsvWriter w(dir / "liouville.csv", cfg, Command::kLiouvilleOracle,
              "t,h2,rhs_mean,rhs_stderr,l1_2d,l1_marginal,symmetry_defect,"
              "ckp_margin,floored_cells");
  const std::int64_t steps = static_cast<std::int64_t>(std::round(cfg.T / cfg.dt));
  std::size_t save_cursor = 0;
  double h2_final = 0.0, l1m_final = 0.0;
  for (std::int64_t s = 0; s <= steps; ++s) {
    if (save_cursor < mf.save_steps.size() && mf.save_steps[save_cursor] == s) {
      const double t = static_cast<double>(s) * cfg.dt;
      GridFunction prod = outer_product(mf.rho_save[save_cursor],
                                        mf.rho_save[save_cursor]);
      prod.is_density = true;
      RelEntropyStats st;
      const double re_unnorm = relative_entropy(liou.rho2, prod, &st);
      const double h2 = re_unnorm / static_cast<double>(N);
      const double l1_2d = l1_distance(liou.rho2, prod);
      GridFunction marg = marginal(liou.rho2, 0);
      const double l1_marg = l1_distance(marg, mf.rho_save[save_cursor]);
      double sym = 0.0;
      const std::int64_t n = g.n;
      for (std::int64_t i = 0; i < n; ++i)
        for (std::int64_t j = 0; j < i; ++j)
          sym = std::max(sym, std::abs(liou.rho2.values[static_cast<std::size_t>(
                                           i * n + j)] -
                                       liou.rho2.values[static_cast<std::size_t>(
                                           j * n + i)]));
      double rhs_mean = std::numeric_limits<double>::quiet_NaN();
      double rhs_err = std::numeric_limits<double>::quiet_NaN();
      if (records.size() >= 8 && save_cursor >= 1) {
        const BoundValue b = entropy_bound_rhs(records, mf.w_l2, cfg.sigma, t);
        rhs_mean = b.value;
        rhs_err = b.stderr_value;
      } else if (save_cursor == 0) {
        rhs_mean = 0.0;
        rhs_err = 0.0;
      }
      const double ckp_margin = 2.0 * re_unnorm - l1_2d * l1_2d;
      w.row(t, h2, rhs_mean, rhs_err, l1_2d, l1_marg, sym, ckp_margin,
            st.floored_cells);
      h2_final = h2;
      l1m_final = l1_marg;
      ++save_cursor;
    }
    if (s < steps)
      for (int sub = 0; sub < sub2; ++sub) liouville2_step(liou, mf.k_eps, pde_dt2);
  }
  w.close();

  // summary: KDE marginal entropy vs the oracle's smoothed marginal entropy
  double kde_val = std::numeric_limits<double>::quiet_NaN();
  double kde_err = std::numeric_limits<double>::quiet_NaN();
  if (pooled_x1.size() >= 64) {
    const EstimateWithError est = marginal_entropy_estimate(
        pooled_x1, mf.rho_save.back(), mf.pair.V, cfg.seed);
    kde_val = est.value;
    kde_err = est.stderr_value;
  }
  GridFunction marg_T = marginal(liou.rho2, 0);
  GridFunction smoothed_marg = convolve(mf.pair.V, marg_T);
  GridFunction smoothed_rho = convolve(mf.pair.V, mf.rho_save.back());
  renormalize_density(smoothed_marg);
  renormalize_density(smoothed_rho);
  const double oracle_marg_re = relative_entropy(smoothed_marg, smoothed_rho);

  double rhs_T = std::numeric_limits<double>::quiet_NaN();
  double rhs_T_err = std::numeric_limits<double>::quiet_NaN();
  if (records.size() >= 8) {
    const BoundValue b = entropy_bound_rhs(records, mf.w_l2, cfg.sigma);
    rhs_T = b.value;
    rhs_T_err = b.stderr_value;
  }
  std::int64_t warn = 0;
  for (const auto& r : records) warn += r.boundary_warnings;

  CsvWriter s(dir / "liouville_summary.csv", cfg, Command::kLiouvilleOracle,
              "eps,h2_T,rhs_T,rhs_T_stderr,l1_marginal_T,kde_entropy,"
              "kde_entropy_stderr,oracle_marginal_entropy,boundary_warnings,"
              "pde_clipped,liou_clipped");
  s.row(eps, h2_final, rhs_T, rhs_T_err, l1m_final, kde_val, kde_err, oracle_marg_re,
        warn, mf.pde_clipped, liou.clipped_cells);
  s.close();
  return 0;
}

int run_pde_compare(const ExperimentConfig& cfg) {
  validate_config(cfg, Command::kPdeCompare);
  ensure_dir(cfg.output_dir);
  const std::filesystem::path dir(cfg.output_dir);

  Grid g(1, cfg.L, cfg.n);
  GridFunction rho0 = initial_density(cfg.init, g);
  GridFunction k_raw = bounded_confidence_force(cfg.kernel.R, g);

  auto solve_to_T = [&](const GridFunction& k) {
    PdeState st = make_pde_state(rho0, cfg.sigma);
    const int sub = transport_substeps(cfg.T, linf_norm(k), g.h());
    const double dt = cfg.T / static_cast<double>(sub);
    for (int s = 0; s < sub; ++s) pde_step(st, k, dt);
    return st;
  };

  PdeState ref = solve_to_T(k_raw);

  CsvWriter w(dir / "pde_compare.csv", cfg, Command::kPdeCompare,
              "eps,l1_distance,dereg_residual,clipped_cells,renorm_total");
  std::vector<double> eps_sorted = cfg.eps_list;
  std::sort(eps_sorted.begin(), eps_sorted.end(), std::greater<>());
  for (double e : eps_sorted) {
    KernelPair pair = build_pair(cfg.kernel, e, g);
    GridFunction k_eps = assemble_force(pair)[0];
    PdeState st = solve_to_T(k_eps);
    const double l1 = l1_distance(st.rho, ref.rho);
    const double dereg = deregularization_residual(k_raw, k_eps, ref.rho);
    w.row(e, l1, dereg, st.clipped_cells, st.renorm_total);
  }
  w.close();
  return 0;
}

} // namespace chaoslab
