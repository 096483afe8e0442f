#pragma once

#include "skewlink/common.hpp"
#include "skewlink/rng.hpp"

#include <cstdint>
#include <optional>

namespace skewlink::truncsample {

// Componentwise lower truncation of N(0, scale) or t_df(0, scale).
struct TruncationProblem {
  Vector lower;              // -inf allowed
  Matrix scale;              // PD
  std::optional<double> df;  // absent = normal kernel
};

enum class Method { rejection, chain };

struct Diagnostics {
  Method method = Method::rejection;
  double acceptance_rate = 1.0;       // rejection tier
  double ess = 0.0;                   // chain tier, first coordinate
  std::uint64_t proposals = 0;
  int burn_in = 0;
  double log_envelope = 0.0;          // psi* of the tilted proposal
  double acceptance_estimate = 1.0;   // gate value that chose the tier
  std::uint64_t envelope_violations = 0;
};

struct Config {
  double min_acceptance = 1e-4;          // tier gate
  int burn_in = 200;                     // chain tier
  bool parallel = true;                  // rejection tier block parallelism
  std::size_t gate_points = 256;         // lattice points for the gate estimate
  std::optional<Method> force_method;    // testing override
};

struct Sample {
  Matrix draws;  // count x d, every row >= lower componentwise
  Diagnostics diagnostics;
};

// Precomputes ordering, Cholesky, exponential tilting, and the tier choice
// for one truncation problem, so repeated draws are cheap.
class TmvSampler {
 public:
  TmvSampler(TruncationProblem problem, Config config, std::uint64_t seed);
  Sample draw(std::size_t count, std::uint64_t seed) const;
  const Diagnostics& plan() const { return plan_; }

 private:
  Vector draw_rejection_one(CounterRng& rng, std::uint64_t* proposals,
                            std::uint64_t* violations, bool* ok) const;
  void chain_sweep(Vector& x, Vector& r, double& qform, double w, CounterRng& rng) const;

  TruncationProblem problem_;
  Config config_;
  int dim_ = 0;
  bool untruncated_ = false;
  bool scale_free_bounds_ = false;  // every bound is 0 or -inf
  Diagnostics plan_;
  // rejection tier state
  std::vector<int> perm_;
  Matrix chol_;          // permuted Cholesky factor (rows unit-standardized in strict_)
  Matrix strict_;        // strictly lower triangular, row-standardized
  Vector l_std_;         // standardized bounds, permuted
  Vector tilt_mu_;
  double psi_star_ = 0.0;
  std::uint64_t attempt_cap_ = 0;
  // chain tier state
  Matrix precision_;
  Vector cond_sd_;       // 1/sqrt(Q_ii)
  Vector start_;
  Matrix chol_plain_;    // unpermuted factor for untruncated shortcuts
};

Sample sample_tmvn(const TruncationProblem& problem, std::size_t count,
                   std::uint64_t seed, const Config& config = {});
Sample sample_tmvt(const TruncationProblem& problem, std::size_t count,
                   std::uint64_t seed, const Config& config = {});

// Standard normal conditioned on >= a: inverse-cdf in the body, shifted
// exponential rejection past 6 sigma.
double tn_lower_std(double a, CounterRng& rng);

namespace detail {
// psi(z, mu) of the exponentially tilted sequential proposal, and its
// saddlepoint; exposed for the finite-difference unit test.
double tilt_psi(const Matrix& strict_lower, const Vector& l_std, const Vector& z,
                const Vector& mu);
struct TiltSolution {
  Vector mu;       // length d, last entry 0
  Vector z;        // length d
  double psi_star;
  bool converged;
};
TiltSolution solve_tilting(const Matrix& strict_lower, const Vector& l_std);
}  // namespace detail

}  // namespace skewlink::truncsample
