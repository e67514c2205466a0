#pragma once

#include <vector>

#include "mobsim/models.hpp"
#include "mobsim/pedigree.hpp"
#include "mobsim/rng.hpp"

namespace mobsim {

struct SimulateOptions {
  // 0 means one worker per hardware thread (capped at 16). The result is
  // bit-identical for every worker count.
  int threads = 0;
  // Upper bound on the number of person records a single simulate call may
  // allocate.
  std::int64_t person_cap = 100'000'000;
};

// Builds a pedigree under the given model. Founders are drawn from the
// stationary distribution; descendants follow the model transition. One RNG
// stream per dynasty, derived from topo.seed, with a fixed draw order, so
// output depends only on (spec, topo).
//
// One-parent models produce one founder per dynasty and children_per_family
// children per parent. The assortative model produces a founder couple and
// pairs every non-terminal child with a generated spouse, so its pedigrees
// contain spouse records in addition to the descendant tree.
//
// The poverty-trap outcome scale is fixed by standardizing y across each
// generation (threshold applies to the standardized parent outcome); all
// other models are already stationary with unit variance.
Pedigree simulate(const ModelSpec& spec, const SimTopology& topo,
                  const SimulateOptions& opts = {});

// Spouse endowment m * e_own + sqrt(1 - m^2) * z with z standard normal:
// marginally standard normal, correlation m with e_own. Requires |m| < 1.
double spouse_draw(double e_own, double m, SplitMix64& rng);

// Entry k (k = 0..max_k) is the sample frequency of descendant y < ybar
// among generation-k descendants whose founder had y < ybar, following the
// father line. Entry 0 equals 1 by construction.
std::vector<double> poverty_persistence_curve(const Pedigree& ped, double ybar,
                                              int max_k);

}  // namespace mobsim
