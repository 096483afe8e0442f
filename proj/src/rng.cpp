#include "skewlink/rng.hpp"

#include "skewlink/specfun.hpp"

namespace skewlink {

double normal_draw(CounterRng& rng) { return norm_quantile(rng.next_double()); }

double gamma_draw(CounterRng& rng, double shape, double scale) {
  return gamma_quantile(rng.next_double(), shape, scale);
}

double chisq_draw(CounterRng& rng, double nu) {
  return gamma_quantile(rng.next_double(), 0.5 * nu, 2.0);
}

}  // namespace skewlink
