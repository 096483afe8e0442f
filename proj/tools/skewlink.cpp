#include "skewlink/cli.hpp"
#include "skewlink/io.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace skewlink;

int main(int argc, char** argv) {
  CLI::App app{"skewlink: Bayesian skew-normal/skew-t link models for correlated binary panels"};
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand("simulate", "Generate a synthetic panel from the link model");
  std::string sim_config, sim_out;
  sim->add_option("--config", sim_config, "key=value config file")->required();
  sim->add_option("--out", sim_out, "output directory")->required();

  // binarize
  auto* bin = app.add_subcommand("binarize", "Threshold numeric series at an empirical quantile");
  std::string bin_in, bin_out;
  double bin_q = 0.9;
  bin->add_option("--in", bin_in, "numeric CSV input")->required();
  bin->add_option("--q", bin_q, "quantile in [0,1)");
  bin->add_option("--out", bin_out, "binary panel CSV output")->required();

  // fit
  auto* fit = app.add_subcommand("fit", "Run the MCMC sampler for one model tag");
  cli::FitOptions fopt;
  std::string fit_model = "skew_normal", fit_layout = "shared", fit_config;
  std::vector<std::string> fit_sets;
  fit->add_option("--model", fit_model,
                  "skew_t_5|skew_t_10|skew_t_20|skew_t:<nu>|skew_normal|probit|independent_probit");
  fit->add_option("--panel", fopt.panel_path, "binary panel CSV")->required();
  fit->add_option("--design", fopt.design_path, "design matrix CSV")->required();
  fit->add_option("--layout", fit_layout, "shared|blocks");
  fit->add_flag("--standardize", fopt.standardize, "center/scale non-intercept columns");
  fit->add_option("--out", fopt.out_dir, "output directory")->required();
  fit->add_option("--config", fit_config, "key=value chain config file");
  fit->add_option("--set", fit_sets, "key=value overrides (repeatable)");
  fit->add_option("--chains", fopt.chains, "number of independent chains");

  // summarize
  auto* summ = app.add_subcommand("summarize", "Posterior summary table from a draws CSV");
  std::string summ_in, summ_out;
  summ->add_option("--draws", summ_in, "draws CSV")->required();
  summ->add_option("--out", summ_out, "summary CSV output")->required();

  // compare
  auto* cmp = app.add_subcommand("compare", "DIC comparison across completed fits");
  std::vector<std::string> cmp_dirs;
  std::string cmp_out;
  cmp->add_option("dirs", cmp_dirs, "fit artifact directories")->required();
  cmp->add_option("--out", cmp_out, "report CSV output")->required();

  // prob (debug)
  auto* prob = app.add_subcommand("prob", "Evaluate the joint outcome probability once");
  std::string prob_mode, prob_inputs;
  prob->add_option("--mode", prob_mode, "sn|st")->required();
  prob->add_option("--inputs", prob_inputs, "key=value inputs file")->required();

  // sample (debug)
  auto* samp = app.add_subcommand("sample", "Draw from a skew-normal/skew-t law");
  std::string samp_kernel = "sn", samp_alpha = "0", samp_sigma, samp_out;
  double samp_nu = 5.0;
  std::size_t samp_count = 1000;
  std::uint64_t samp_seed = 1;
  samp->add_option("--kernel", samp_kernel, "sn|st");
  samp->add_option("--alpha", samp_alpha, "comma-separated skewness vector");
  samp->add_option("--sigma", samp_sigma, "lower-triangle correlations");
  samp->add_option("--nu", samp_nu, "degrees of freedom (st)");
  samp->add_option("--count", samp_count, "number of draws");
  samp->add_option("--seed", samp_seed, "rng seed");
  samp->add_option("--out", samp_out, "output CSV")->required();

  // pdf (debug)
  auto* pdf = app.add_subcommand("pdf", "Evaluate a skew-normal/skew-t density");
  std::string pdf_kernel = "sn", pdf_alpha = "0", pdf_sigma, pdf_x;
  double pdf_nu = 5.0;
  pdf->add_option("--kernel", pdf_kernel, "sn|st");
  pdf->add_option("--alpha", pdf_alpha, "comma-separated skewness vector");
  pdf->add_option("--sigma", pdf_sigma, "lower-triangle correlations");
  pdf->add_option("--nu", pdf_nu, "degrees of freedom (st)");
  pdf->add_option("--x", pdf_x, "evaluation point")->required();

  CLI11_PARSE(app, argc, argv);

  auto build_se_params = [](const std::string& alpha, const std::string& sigma,
                            const std::string& kernel, double nu) {
    skewdist::SkewEllipticalParams params;
    const auto av = io::parse_double_list(alpha, "alpha");
    const int d = static_cast<int>(av.size());
    params.alpha = Eigen::Map<const Vector>(av.data(), d);
    params.xi = Vector::Zero(d);
    params.sigma = Matrix::Identity(d, d);
    if (!sigma.empty()) {
      const auto sv = io::parse_double_list(sigma, "sigma");
      if (static_cast<int>(sv.size()) != d * (d - 1) / 2)
        throw ValidationError("sigma needs d(d-1)/2 lower-triangle entries");
      int idx = 0;
      for (int cj = 0; cj < d; ++cj)
        for (int ci = cj + 1; ci < d; ++ci) {
          params.sigma(ci, cj) = sv[idx];
          params.sigma(cj, ci) = sv[idx];
          ++idx;
        }
    }
    if (kernel == "st") {
      params.kernel = Kernel::student;
      params.nu = nu;
    } else if (kernel != "sn") {
      throw ValidationError("kernel must be sn or st");
    }
    return params;
  };

  try {
    if (sim->parsed()) {
      cli::cmd_simulate(cli::parse_simulate_config(io::read_kv(sim_config)), sim_out);
    } else if (bin->parsed()) {
      cli::cmd_binarize(bin_in, bin_q, bin_out);
    } else if (fit->parsed()) {
      fopt.model = cli::parse_model(fit_model);
      fopt.layout = cli::parse_layout(fit_layout);
      std::map<std::string, std::string> kv;
      if (!fit_config.empty()) kv = io::read_kv(fit_config);
      for (const auto& s : fit_sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos)
          throw ValidationError("--set expects key=value, got '" + s + "'");
        kv[s.substr(0, eq)] = s.substr(eq + 1);
      }
      cli::apply_chain_overrides(fopt.chain, kv);
      cli::cmd_fit(fopt);
    } else if (summ->parsed()) {
      cli::cmd_summarize(summ_in, summ_out);
    } else if (cmp->parsed()) {
      cli::cmd_compare(cmp_dirs, cmp_out);
    } else if (prob->parsed()) {
      cli::cmd_prob(prob_mode, prob_inputs);
    } else if (samp->parsed()) {
      const auto params = build_se_params(samp_alpha, samp_sigma, samp_kernel, samp_nu);
      const Matrix draws = (params.kernel == Kernel::normal)
                               ? skewdist::sample_sn(params, samp_count, samp_seed)
                               : skewdist::sample_st(params, samp_count, samp_seed);
      std::vector<std::string> header;
      for (int c = 0; c < draws.cols(); ++c) header.push_back("x" + std::to_string(c + 1));
      io::write_csv(samp_out, {std::string("skewlink ") + kVersion,
                               "seed=" + std::to_string(samp_seed)},
                    header, draws);
    } else if (pdf->parsed()) {
      const auto params = build_se_params(pdf_alpha, pdf_sigma, pdf_kernel, pdf_nu);
      const auto xv = io::parse_double_list(pdf_x, "x");
      if (xv.size() != static_cast<std::size_t>(params.xi.size()))
        throw ValidationError("x length must match alpha length");
      const Vector x = Eigen::Map<const Vector>(xv.data(), xv.size());
      const double v = (params.kernel == Kernel::normal)
                           ? skewdist::sn_pdf(x, params)
                           : skewdist::st_pdf(x, params);
      std::cout << io::format_double(v) << "\n";
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
