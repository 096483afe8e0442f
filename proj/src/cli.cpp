#include "skewlink/cli.hpp"

#include "skewlink/io.hpp"
#include "skewlink/rng.hpp"
#include "skewlink/skewdist.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace skewlink::cli {

namespace fs = std::filesystem;

Layout parse_layout(const std::string& s) {
  if (s == "shared") return Layout::shared;
  if (s == "blocks") return Layout::blocks;
  throw ValidationError("unknown layout '" + s + "' (expected shared|blocks)");
}

LoadedPanel load_panel(const std::string& path) {
  const io::Csv csv = io::read_csv(path);
  if (csv.header.empty())
    throw ValidationError(path + ": panel file needs a header row");
  LoadedPanel out;
  out.names = csv.header;
  out.y.resize(csv.values.rows(), csv.values.cols());
  for (Eigen::Index r = 0; r < csv.values.rows(); ++r)
    for (Eigen::Index c = 0; c < csv.values.cols(); ++c) {
      const double v = csv.values(r, c);
      if (v != 0.0 && v != 1.0)
        throw ValidationError(path + ": non-binary cell at data row " +
                              std::to_string(r + 1) + ", column " +
                              std::to_string(c + 1) + " (value " +
                              io::format_double(v) + ")");
      out.y(r, c) = static_cast<int>(v);
    }
  return out;
}

Matrix load_design(const std::string& path, Layout layout, int n, int m) {
  const io::Csv csv = io::read_csv(path);
  const Matrix& x = csv.values;
  const Eigen::Index rows = x.rows();
  const int nm = n * m;

  Matrix stacked;
  if (rows == nm) {
    stacked = x;
  } else if (rows == n) {
    stacked.resize(nm, x.cols());
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < m; ++j) stacked.row(i * m + j) = x.row(i);
  } else {
    throw ValidationError(path + ": design has " + std::to_string(rows) +
                          " rows; expected n=" + std::to_string(n) + " or n*M=" +
                          std::to_string(nm));
  }
  if (layout == Layout::shared) return stacked;

  // Per-response block expansion: row (i,j) keeps its q covariates in block j.
  const int q = static_cast<int>(stacked.cols());
  Matrix expanded = Matrix::Zero(nm, static_cast<Eigen::Index>(m) * q);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j)
      expanded.block(i * m + j, j * q, 1, q) = stacked.row(i * m + j);
  return expanded;
}

IntMatrix binarize_values(const Matrix& values, double q) {
  if (!(q >= 0.0 && q < 1.0)) throw ValidationError("binarize: q must be in [0,1)");
  IntMatrix out(values.rows(), values.cols());
  for (Eigen::Index c = 0; c < values.cols(); ++c) {
    std::vector<double> col(values.rows());
    for (Eigen::Index r = 0; r < values.rows(); ++r) col[r] = values(r, c);
    const double threshold = io::order_quantile(col, q);
    for (Eigen::Index r = 0; r < values.rows(); ++r)
      out(r, c) = values(r, c) > threshold ? 1 : 0;
  }
  return out;
}

void cmd_binarize(const std::string& in_path, double q, const std::string& out_path) {
  const io::Csv csv = io::read_csv(in_path);
  const IntMatrix bin = binarize_values(csv.values, q);
  std::vector<std::string> header = csv.header;
  if (header.empty()) {
    for (Eigen::Index c = 0; c < bin.cols(); ++c)
      header.push_back("v" + std::to_string(c + 1));
  }
  std::vector<std::string> comments = {
      std::string("skewlink ") + kVersion,
      "binarize q=" + io::format_double(q) + " source=" + in_path};
  io::write_csv(out_path, comments, header, bin.cast<double>());
}

SimulateConfig parse_simulate_config(const std::map<std::string, std::string>& kv) {
  SimulateConfig cfg;
  std::map<std::string, std::string> rest = kv;
  auto take = [&](const std::string& key) {
    auto it = rest.find(key);
    if (it == rest.end()) return std::string();
    std::string v = it->second;
    rest.erase(it);
    return v;
  };

  const std::string n = take("n");
  if (n.empty()) throw ValidationError("simulate config: missing n");
  cfg.n = static_cast<int>(io::parse_double(n, "n"));

  const std::string beta = take("beta");
  if (beta.empty()) throw ValidationError("simulate config: missing beta");
  const auto bv = io::parse_double_list(beta, "beta");
  cfg.beta = Eigen::Map<const Vector>(bv.data(), bv.size());

  const std::string alpha = take("alpha");
  if (alpha.empty()) throw ValidationError("simulate config: missing alpha");
  const auto av = io::parse_double_list(alpha, "alpha");
  cfg.alpha_s = Eigen::Map<const Vector>(av.data(), av.size());
  const int m = static_cast<int>(av.size());

  cfg.sigma_bar = Matrix::Identity(m, m);
  const std::string sigma = take("sigma");
  if (!sigma.empty()) {
    const auto sv = io::parse_double_list(sigma, "sigma");
    if (static_cast<int>(sv.size()) != m * (m - 1) / 2)
      throw ValidationError("simulate config: sigma needs M(M-1)/2 lower-triangle entries");
    int idx = 0;
    for (int cj = 0; cj < m; ++cj)
      for (int ci = cj + 1; ci < m; ++ci) {
        cfg.sigma_bar(ci, cj) = sv[idx];
        cfg.sigma_bar(cj, ci) = sv[idx];
        ++idx;
      }
  }

  const std::string kernel = take("kernel");
  const std::string nu = take("nu");
  if (kernel == "normal" || (kernel.empty() && nu.empty())) {
    cfg.kernel = Kernel::normal;
  } else if (kernel == "student" || kernel.empty()) {
    cfg.kernel = Kernel::student;
    if (nu.empty()) throw ValidationError("simulate config: student kernel needs nu");
    cfg.nu = io::parse_double(nu, "nu");
    if (!(cfg.nu > 0.0)) throw ValidationError("simulate config: invalid nu");
  } else {
    throw ValidationError("simulate config: unknown kernel '" + kernel + "'");
  }

  const std::string seed = take("seed");
  if (!seed.empty())
    cfg.seed = static_cast<std::uint64_t>(io::parse_double(seed, "seed"));

  if (!rest.empty())
    throw ValidationError("simulate config: unknown key '" + rest.begin()->first + "'");
  if (cfg.n <= 0) throw ValidationError("simulate config: n must be positive");
  return cfg;
}

void cmd_simulate(const SimulateConfig& cfg, const std::string& out_dir) {
  const int n = cfg.n, m = static_cast<int>(cfg.alpha_s.size());
  const int p = static_cast<int>(cfg.beta.size());
  if (!skewdist::admissible(cfg.sigma_bar, cfg.alpha_s))
    throw ValidationError("simulate: sigma is not a valid correlation matrix");

  // Shared design: intercept plus standard-normal covariates, one row per
  // observation.
  Matrix x_shared(n, p);
  x_shared.col(0).setOnes();
  CounterRng rng(mix_seed(cfg.seed, 0x73696d78u), 0);
  for (int i = 0; i < n; ++i)
    for (int c = 1; c < p; ++c) x_shared(i, c) = normal_draw(rng);

  Matrix x_full(static_cast<Eigen::Index>(n) * m, p);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) x_full.row(i * m + j) = x_shared.row(i);

  // Latent errors from the link kernel at the generating parameters.
  skewdist::SkewEllipticalParams eps_law;
  eps_law.xi = Vector::Zero(n * m);
  eps_law.sigma = Matrix::Zero(n * m, n * m);
  for (int i = 0; i < n; ++i)
    eps_law.sigma.block(i * m, i * m, m, m) = cfg.sigma_bar;
  eps_law.alpha = linkmodel::replicate_alpha(cfg.alpha_s, n);
  eps_law.kernel = cfg.kernel;
  eps_law.nu = cfg.nu;
  const Matrix eps =
      (cfg.kernel == Kernel::normal)
          ? skewdist::sample_sn(eps_law, 1, mix_seed(cfg.seed, 0x73696d65u))
          : skewdist::sample_st(eps_law, 1, mix_seed(cfg.seed, 0x73696d65u));

  const Vector xb = x_full * cfg.beta;
  IntMatrix panel(n, m);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j)
      panel(i, j) = (xb[i * m + j] + eps(0, i * m + j) > 0.0) ? 1 : 0;

  fs::create_directories(out_dir);
  std::vector<std::string> provenance = {
      std::string("skewlink ") + kVersion, "seed=" + std::to_string(cfg.seed),
      std::string("kernel=") + (cfg.kernel == Kernel::normal ? "normal" : "student")};

  std::vector<std::string> yh, xh;
  for (int j = 0; j < m; ++j) yh.push_back("y" + std::to_string(j + 1));
  for (int c = 0; c < p; ++c) xh.push_back("x" + std::to_string(c + 1));
  io::write_csv(out_dir + "/panel.csv", provenance, yh, panel.cast<double>());
  io::write_csv(out_dir + "/design.csv", provenance, xh, x_shared);

  std::vector<std::pair<std::string, std::string>> truth;
  truth.emplace_back("n", std::to_string(n));
  for (int c = 0; c < p; ++c)
    truth.emplace_back("beta" + std::to_string(c + 1), io::format_double(cfg.beta[c]));
  for (int j = 0; j < m; ++j)
    truth.emplace_back("alpha" + std::to_string(j + 1),
                       io::format_double(cfg.alpha_s[j]));
  for (int cj = 0; cj < m; ++cj)
    for (int ci = cj + 1; ci < m; ++ci)
      truth.emplace_back("sigma" + std::to_string(cj + 1) + std::to_string(ci + 1),
                         io::format_double(cfg.sigma_bar(ci, cj)));
  truth.emplace_back("kernel", cfg.kernel == Kernel::normal ? "normal" : "student");
  if (cfg.kernel == Kernel::student)
    truth.emplace_back("nu", io::format_double(cfg.nu));
  truth.emplace_back("seed", std::to_string(cfg.seed));
  io::write_kv(out_dir + "/truth.txt", truth);
}

ModelTag parse_model(const std::string& tag) {
  ModelTag out;
  out.name = tag;
  if (tag == "skew_t_5" || tag == "skew_t_10" || tag == "skew_t_20") {
    out.kernel = Kernel::student;
    out.nu = io::parse_double(tag.substr(7), "nu");
    return out;
  }
  if (tag.rfind("skew_t:", 0) == 0) {
    out.kernel = Kernel::student;
    out.nu = io::parse_double(tag.substr(7), "nu");
    if (!(out.nu > 0.0)) throw ValidationError("invalid df in model tag");
    return out;
  }
  if (tag == "skew_normal") return out;
  if (tag == "probit") {
    out.free_alpha = false;
    return out;
  }
  if (tag == "independent_probit") {
    out.free_alpha = false;
    out.free_corr = false;
    return out;
  }
  throw ValidationError("unknown model tag '" + tag + "'");
}

int model_param_count(const ModelTag& tag, int p, int m) {
  int count = p;
  if (tag.free_corr) count += m * (m - 1) / 2;
  if (tag.free_alpha) count += m;
  return count;
}

void apply_chain_overrides(mcmc::ChainConfig& chain,
                           const std::map<std::string, std::string>& kv) {
  for (const auto& [key, val] : kv) {
    if (key == "iterations")
      chain.iterations = static_cast<int>(io::parse_double(val, key));
    else if (key == "burn_in")
      chain.burn_in = static_cast<int>(io::parse_double(val, key));
    else if (key == "h1")
      chain.h1 = io::parse_double(val, key);
    else if (key == "h2")
      chain.h2 = io::parse_double(val, key);
    else if (key == "seed")
      chain.seed = static_cast<std::uint64_t>(io::parse_double(val, key));
    else if (key == "beta_prior_var") {
      // Stored as a 1x1 marker; resolved against p once the design is known.
      chain.prior.omega = Matrix::Constant(1, 1, io::parse_double(val, key));
      chain.prior.mu.resize(0);
    } else if (key == "alpha_prior_var")
      chain.prior.alpha_var = io::parse_double(val, key);
    else if (key == "eta")
      chain.prior.eta = io::parse_double(val, key);
    else if (key == "accuracy_rel")
      chain.accuracy.rel_target = io::parse_double(val, key);
    else if (key == "accuracy_abs")
      chain.accuracy.abs_target = io::parse_double(val, key);
    else if (key == "qmc_shifts")
      chain.accuracy.shifts = static_cast<int>(io::parse_double(val, key));
    else if (key == "qmc_points")
      chain.accuracy.initial_points =
          static_cast<std::size_t>(io::parse_double(val, key));
    else if (key == "qmc_max_evaluations")
      chain.accuracy.max_evaluations =
          static_cast<std::size_t>(io::parse_double(val, key));
    else if (key == "trunc_burn_in")
      chain.trunc.burn_in = static_cast<int>(io::parse_double(val, key));
    else if (key == "trunc_min_acceptance")
      chain.trunc.min_acceptance = io::parse_double(val, key);
    else
      throw ValidationError("unknown config key '" + key + "'");
  }
}

namespace {

std::vector<std::string> draw_headers(const ModelTag& tag, int p, int m) {
  std::vector<std::string> h;
  for (int c = 0; c < p; ++c) h.push_back("beta" + std::to_string(c + 1));
  if (tag.free_corr) {
    for (int cj = 0; cj < m; ++cj)
      for (int ci = cj + 1; ci < m; ++ci)
        h.push_back("sigma" + std::to_string(cj + 1) + std::to_string(ci + 1));
  }
  if (tag.free_alpha)
    for (int j = 0; j < m; ++j) h.push_back("alpha" + std::to_string(j + 1));
  return h;
}

struct SummaryRow {
  double mean, sd, q025, q975;
};

SummaryRow summarize_column(const Vector& col) {
  SummaryRow s{};
  const Eigen::Index n = col.size();
  s.mean = col.mean();
  s.sd = (n > 1) ? std::sqrt((col.array() - s.mean).square().sum() / (n - 1)) : 0.0;
  std::vector<double> v(col.data(), col.data() + n);
  std::sort(v.begin(), v.end());
  auto interp = [&](double q) {
    if (n == 1) return v[0];
    const double h = q * (n - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min<std::size_t>(lo + 1, n - 1);
    return v[lo] + (h - lo) * (v[hi] - v[lo]);
  };
  s.q025 = interp(0.025);
  s.q975 = interp(0.975);
  return s;
}

void write_summary(const std::string& path, const std::vector<std::string>& names,
                   const Matrix& draws, const std::vector<std::string>& comments) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write file: " + path);
  for (const auto& c : comments) out << "# " << c << "\n";
  out << "parameter,mean,sd,q025,q975\n";
  for (Eigen::Index c = 0; c < draws.cols(); ++c) {
    const SummaryRow s = summarize_column(draws.col(c));
    out << names[c] << "," << io::format_double(s.mean) << ","
        << io::format_double(s.sd) << "," << io::format_double(s.q025) << ","
        << io::format_double(s.q975) << "\n";
  }
}

void run_single_chain(const FitOptions& opt, const linkmodel::ModelData& data,
                      const mcmc::ChainConfig& chain, const std::string& out_dir,
                      const std::string& panel_hash,
                      const std::vector<std::string>& standardize_log) {
  const int p = data.p(), m = data.m();
  fs::create_directories(out_dir);

  const auto draws = mcmc::run_chain(data, chain);
  const auto dic_report = mcmc::dic(draws, data, chain);

  Matrix table(draws.beta.rows(),
               draws.beta.cols() + draws.sigma_bar.cols() + draws.alpha.cols());
  table.leftCols(draws.beta.cols()) = draws.beta;
  table.middleCols(draws.beta.cols(), draws.sigma_bar.cols()) = draws.sigma_bar;
  table.rightCols(draws.alpha.cols()) = draws.alpha;

  const std::vector<std::string> headers = draw_headers(opt.model, p, m);
  std::vector<std::string> provenance = {
      std::string("skewlink ") + kVersion,
      "model=" + opt.model.name,
      "seed=" + std::to_string(chain.seed),
      "panel_hash=" + panel_hash,
  };
  io::write_csv(out_dir + "/draws.csv", provenance, headers, table);
  write_summary(out_dir + "/summary.csv", headers, table, provenance);

  std::vector<std::pair<std::string, std::string>> meta;
  meta.emplace_back("model", opt.model.name);
  meta.emplace_back("version", kVersion);
  meta.emplace_back("params", std::to_string(model_param_count(opt.model, p, m)));
  meta.emplace_back("dic", io::format_double(dic_report.dic));
  meta.emplace_back("p_d", io::format_double(dic_report.p_d));
  meta.emplace_back("d_at_mean", io::format_double(dic_report.d_at_mean));
  meta.emplace_back("d_bar", io::format_double(dic_report.d_bar));
  meta.emplace_back("panel_hash", panel_hash);
  meta.emplace_back("seed", std::to_string(chain.seed));
  meta.emplace_back("iterations", std::to_string(chain.iterations));
  meta.emplace_back("burn_in", std::to_string(chain.burn_in));
  meta.emplace_back("mh_accepted", std::to_string(draws.accepted));
  meta.emplace_back("mh_steps", std::to_string(draws.mh_steps));
  meta.emplace_back("trunc_rejection_draws", std::to_string(draws.rejection_draws));
  meta.emplace_back("trunc_chain_draws", std::to_string(draws.chain_draws));
  io::write_kv(out_dir + "/meta.txt", meta);

  std::ofstream log(out_dir + "/log.txt");
  log << "skewlink " << kVersion << " fit model=" << opt.model.name << "\n";
  log << "panel=" << opt.panel_path << " hash=" << panel_hash << "\n";
  log << "design=" << opt.design_path
      << " layout=" << (opt.layout == Layout::shared ? "shared" : "blocks") << "\n";
  log << "n=" << data.n() << " M=" << m << " p=" << p << "\n";
  for (const auto& s : standardize_log) log << s << "\n";
  log << "iterations=" << chain.iterations << " burn_in=" << chain.burn_in
      << " h1=" << chain.h1 << " h2=" << chain.h2 << " seed=" << chain.seed << "\n";
  if (draws.mh_steps > 0)
    log << "mh_acceptance=" << static_cast<double>(draws.accepted) / draws.mh_steps
        << " indicator_rejections=" << draws.indicator_rejections << "\n";
  log << "truncated_sampler: rejection=" << draws.rejection_draws
      << " chain=" << draws.chain_draws << "\n";
  log << "dic=" << io::format_double(dic_report.dic)
      << " p_d=" << io::format_double(dic_report.p_d)
      << " d_at_mean=" << io::format_double(dic_report.d_at_mean) << "\n";
}

}  // namespace

void cmd_fit(const FitOptions& options) {
  FitOptions opt = options;
  if (opt.panel_path.empty() || opt.design_path.empty() || opt.out_dir.empty())
    throw ValidationError("fit: panel, design, and output directory are required");
  if (!fs::exists(opt.panel_path))
    throw ValidationError("fit: panel file not found: " + opt.panel_path);
  if (!fs::exists(opt.design_path))
    throw ValidationError("fit: design file not found: " + opt.design_path);

  const LoadedPanel panel = load_panel(opt.panel_path);
  const int n = static_cast<int>(panel.y.rows());
  const int m = static_cast<int>(panel.y.cols());
  Matrix design = load_design(opt.design_path, opt.layout, n, m);

  std::vector<std::string> standardize_log;
  if (opt.standardize) {
    for (Eigen::Index c = 0; c < design.cols(); ++c) {
      const double mean = design.col(c).mean();
      const double sd = std::sqrt(
          (design.col(c).array() - mean).square().sum() /
          std::max<Eigen::Index>(1, design.rows() - 1));
      if (sd < 1e-12) {
        standardize_log.push_back("standardize: column " + std::to_string(c + 1) +
                                  " constant, left unchanged");
        continue;
      }
      design.col(c) = (design.col(c).array() - mean) / sd;
      standardize_log.push_back("standardize: column " + std::to_string(c + 1) +
                                " mean=" + io::format_double(mean) +
                                " sd=" + io::format_double(sd));
    }
  } else {
    standardize_log.push_back("standardize: off");
  }

  linkmodel::ModelData data{panel.y, design};
  const int p = data.p();

  mcmc::ChainConfig chain = opt.chain;
  chain.kernel = opt.model.kernel;
  chain.nu = opt.model.nu;
  chain.sample_alpha = opt.model.free_alpha;
  chain.sample_corr = opt.model.free_corr;
  // Resolve the coefficient prior against p: a 1x1 omega is shorthand for
  // var * I_p, the default is N(0, 25 I).
  double beta_var = 25.0;
  if (chain.prior.omega.size() == 1) beta_var = chain.prior.omega(0, 0);
  if (chain.prior.omega.size() <= 1) {
    chain.prior.omega = beta_var * Matrix::Identity(p, p);
  }
  if (chain.prior.mu.size() == 0) chain.prior.mu = Vector::Zero(p);
  if (chain.prior.mu.size() != p || chain.prior.omega.rows() != p)
    throw ValidationError("fit: prior dimensions do not match the design");

  const std::string panel_hash = io::hex64(io::fnv1a_file(opt.panel_path));

  if (opt.chains <= 1) {
    run_single_chain(opt, data, chain, opt.out_dir, panel_hash, standardize_log);
    return;
  }
  std::vector<std::string> dirs(opt.chains);
  std::vector<mcmc::ChainConfig> configs(opt.chains, chain);
  for (int c = 0; c < opt.chains; ++c) {
    dirs[c] = opt.out_dir + "/chain_" + std::to_string(c);
    configs[c].seed = mix_seed(chain.seed, 0x636861696eull + c);
  }
#pragma omp parallel for schedule(static)
  for (int c = 0; c < opt.chains; ++c)
    run_single_chain(opt, data, configs[c], dirs[c], panel_hash, standardize_log);
}

void cmd_summarize(const std::string& draws_path, const std::string& out_path) {
  const io::Csv csv = io::read_csv(draws_path);
  if (csv.values.rows() < 1) throw ValidationError("summarize: empty draws");
  std::vector<std::string> names = csv.header;
  if (names.empty()) {
    for (Eigen::Index c = 0; c < csv.values.cols(); ++c)
      names.push_back("col" + std::to_string(c + 1));
  }
  write_summary(out_path, names, csv.values,
                {std::string("skewlink ") + kVersion, "source=" + draws_path});
}

void cmd_compare(const std::vector<std::string>& fit_dirs, const std::string& out_path) {
  if (fit_dirs.size() < 2) throw ValidationError("compare: need at least two fits");
  struct Row {
    std::string model;
    int params;
    double dic;
  };
  std::vector<Row> rows;
  std::string hash;
  for (const auto& dir : fit_dirs) {
    const auto meta = io::read_kv(dir + "/meta.txt");
    auto need = [&](const std::string& k) {
      auto it = meta.find(k);
      if (it == meta.end())
        throw ValidationError(dir + "/meta.txt: missing key '" + k + "'");
      return it->second;
    };
    const std::string h = need("panel_hash");
    if (hash.empty())
      hash = h;
    else if (h != hash)
      throw ValidationError("compare: fits were produced from different panels (hash mismatch)");
    rows.push_back({need("model"), static_cast<int>(io::parse_double(need("params"), "params")),
                    io::parse_double(need("dic"), "dic")});
  }
  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    if (a.dic != b.dic) return a.dic < b.dic;
    return a.model < b.model;
  });
  std::ofstream out(out_path);
  if (!out) throw ValidationError("cannot write file: " + out_path);
  out << "# skewlink " << kVersion << "\n";
  out << "# panel_hash=" << hash << "\n";
  out << "model,params,dic,best\n";
  for (std::size_t i = 0; i < rows.size(); ++i)
    out << rows[i].model << "," << rows[i].params << ","
        << io::format_double(rows[i].dic) << "," << (i == 0 ? 1 : 0) << "\n";
}

void cmd_prob(const std::string& mode, const std::string& inputs_path) {
  if (mode != "sn" && mode != "st")
    throw ValidationError("prob: mode must be sn or st");
  auto kv = io::read_kv(inputs_path);
  auto need = [&](const std::string& k) {
    auto it = kv.find(k);
    if (it == kv.end())
      throw ValidationError(inputs_path + ": missing key '" + k + "'");
    return it->second;
  };
  auto get = [&](const std::string& k, const std::string& fallback) {
    auto it = kv.find(k);
    return it == kv.end() ? fallback : it->second;
  };

  const LoadedPanel panel = load_panel(need("panel"));
  const int n = static_cast<int>(panel.y.rows());
  const int m = static_cast<int>(panel.y.cols());
  const Layout layout = parse_layout(get("layout", "shared"));
  const Matrix design = load_design(need("design"), layout, n, m);
  linkmodel::ModelData data{panel.y, design};
  const int p = data.p();

  const auto bv = io::parse_double_list(need("beta"), "beta");
  if (static_cast<int>(bv.size()) != p)
    throw ValidationError("prob: beta length does not match the design");
  const Vector beta = Eigen::Map<const Vector>(bv.data(), bv.size());

  Vector alpha = Vector::Zero(m);
  if (kv.count("alpha")) {
    const auto av = io::parse_double_list(kv["alpha"], "alpha");
    if (static_cast<int>(av.size()) != m)
      throw ValidationError("prob: alpha length must equal M");
    alpha = Eigen::Map<const Vector>(av.data(), av.size());
  }

  Matrix sigma = Matrix::Identity(m, m);
  if (kv.count("sigma")) {
    const auto sv = io::parse_double_list(kv["sigma"], "sigma");
    if (static_cast<int>(sv.size()) != m * (m - 1) / 2)
      throw ValidationError("prob: sigma needs M(M-1)/2 lower-triangle entries");
    int idx = 0;
    for (int cj = 0; cj < m; ++cj)
      for (int ci = cj + 1; ci < m; ++ci) {
        sigma(ci, cj) = sv[idx];
        sigma(cj, ci) = sv[idx];
        ++idx;
      }
  }

  mvprob::QmcConfig acc;
  acc.abs_target = io::parse_double(get("accuracy", "1e-4"), "accuracy");
  const std::uint64_t seed =
      static_cast<std::uint64_t>(io::parse_double(get("seed", "1"), "seed"));

  mvprob::ProbEstimate est;
  if (mode == "sn") {
    est = linkmodel::likelihood_sn(data, beta, sigma, alpha, acc, seed);
  } else {
    const double nu = io::parse_double(need("nu"), "nu");
    const double prior_var = io::parse_double(get("prior_var", "25"), "prior_var");
    Vector prior_mu = Vector::Zero(p);
    if (kv.count("prior_mu")) {
      const auto mv = io::parse_double_list(kv["prior_mu"], "prior_mu");
      if (static_cast<int>(mv.size()) != p)
        throw ValidationError("prob: prior_mu length must equal p");
      prior_mu = Eigen::Map<const Vector>(mv.data(), mv.size());
    }
    const Matrix prior_omega = prior_var * Matrix::Identity(p, p);
    est = linkmodel::likelihood_st(data, beta, sigma, alpha, nu, prior_mu,
                                   prior_omega, acc, seed);
  }
  std::cout << "value=" << io::format_double(est.value)
            << " error=" << io::format_double(est.error)
            << " samples=" << est.samples_used << "\n";
}

}  // namespace skewlink::cli
