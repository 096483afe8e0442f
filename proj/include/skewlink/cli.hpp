#pragma once

#include "skewlink/common.hpp"
#include "skewlink/linkmodel.hpp"
#include "skewlink/mcmc.hpp"

#include <map>
#include <string>
#include <vector>

namespace skewlink::cli {

enum class Layout { shared, blocks };
Layout parse_layout(const std::string& s);

struct LoadedPanel {
  IntMatrix y;
  std::vector<std::string> names;
};

// CSV with a header row and 0/1 cells; rejects anything else with the
// offending location.
LoadedPanel load_panel(const std::string& path);

// Shared layout: n rows of covariates tiled across the M variables (nM rows
// also accepted as pre-stacked). Blocks layout: q per-response covariates
// expanded to p = M*q with zero off-blocks.
Matrix load_design(const std::string& path, Layout layout, int n, int m);

// 1 iff the value strictly exceeds its column's empirical q-quantile
// (order statistic at ceil(q*n)).
IntMatrix binarize_values(const Matrix& values, double q);
void cmd_binarize(const std::string& in_path, double q, const std::string& out_path);

struct SimulateConfig {
  int n = 0;
  Vector beta;
  Vector alpha_s;
  Matrix sigma_bar;
  Kernel kernel = Kernel::student;
  double nu = 0.0;
  std::uint64_t seed = 1;
};
SimulateConfig parse_simulate_config(const std::map<std::string, std::string>& kv);
void cmd_simulate(const SimulateConfig& config, const std::string& out_dir);

// The M1..M6 menu: skew_t_5 | skew_t_10 | skew_t_20 | skew_t:<nu> |
// skew_normal | probit | independent_probit.
struct ModelTag {
  std::string name;
  Kernel kernel = Kernel::normal;
  double nu = 0.0;
  bool free_alpha = true;
  bool free_corr = true;
};
ModelTag parse_model(const std::string& tag);
int model_param_count(const ModelTag& tag, int p, int m);

struct FitOptions {
  ModelTag model;
  std::string panel_path;
  std::string design_path;
  Layout layout = Layout::shared;
  bool standardize = false;
  std::string out_dir;
  mcmc::ChainConfig chain;
  int chains = 1;
  bool quiet = false;
};

// Applies key=value overrides for every ChainConfig field; unknown keys are
// hard errors.
void apply_chain_overrides(mcmc::ChainConfig& chain,
                           const std::map<std::string, std::string>& kv);

void cmd_fit(const FitOptions& options);
void cmd_summarize(const std::string& draws_path, const std::string& out_path);
void cmd_compare(const std::vector<std::string>& fit_dirs, const std::string& out_path);

// Debug likelihood evaluation from a key=value inputs file.
void cmd_prob(const std::string& mode, const std::string& inputs_path);

}  // namespace skewlink::cli
