#include "mobsim/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>

#include "mobsim/errors.hpp"
#include "mobsim/moments.hpp"

namespace mobsim {

namespace {

// Per-dynasty record layout. Generation g occupies local indices
// [start[g], start[g+1]); blood[g] is the number of descendants at that
// generation (founder couple counts as one blood line). In two-parent
// pedigrees every non-terminal child is stored as (child, spouse), so the
// within-generation stride is 2 except in the last generation.
struct Layout {
  std::vector<std::int64_t> start;
  std::vector<std::int64_t> blood;
  bool two_parent = false;
  int generations = 0;
  int fanout = 1;

  std::int64_t per_dynasty() const { return start.back(); }
  int stride(int g) const {
    return two_parent && g >= 1 && g < generations - 1 ? 2 : 1;
  }
};

Layout make_layout(const SimTopology& topo, bool two_parent, std::int64_t cap) {
  const int G = topo.generations;
  const int C = topo.children_per_family;

  long double total = 0.0L;
  long double blood_ld = 1.0L;
  for (int g = 0; g < G; ++g) {
    if (g > 0) blood_ld *= C;
    long double recs = blood_ld;
    if (two_parent) recs *= (g == 0 || g < G - 1) ? 2.0L : 1.0L;
    total += recs;
  }
  total *= static_cast<long double>(topo.n_dynasties);
  if (total > static_cast<long double>(cap)) {
    throw UsageError("simulation would create about " +
                     std::to_string(static_cast<double>(total)) +
                     " persons, exceeding the person cap of " + std::to_string(cap));
  }

  Layout L;
  L.two_parent = two_parent;
  L.generations = G;
  L.fanout = C;
  L.blood.resize(G);
  L.start.resize(G + 1);
  L.blood[0] = 1;
  for (int g = 1; g < G; ++g) L.blood[g] = L.blood[g - 1] * C;
  L.start[0] = 0;
  for (int g = 0; g < G; ++g) {
    std::int64_t recs = L.blood[g];
    if (two_parent) recs *= (g == 0 || g < G - 1) ? 2 : 1;
    L.start[g + 1] = L.start[g] + recs;
  }
  return L;
}

// Runs fn over contiguous dynasty ranges on `threads` workers; partitioning
// does not depend on the worker count's effect on results because every
// dynasty owns its RNG stream and its output slice.
void parallel_dynasties(std::int64_t n, int threads,
                        const std::function<void(std::int64_t, std::int64_t)>& fn) {
  int t = threads > 0 ? threads
                      : static_cast<int>(std::min(16u, std::max(1u, std::thread::hardware_concurrency())));
  t = static_cast<int>(std::min<std::int64_t>(t, n));
  t = std::max(t, 1);

  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto guarded = [&](std::int64_t lo, std::int64_t hi) {
    try {
      fn(lo, hi);
    } catch (...) {
      std::lock_guard<std::mutex> lock(error_mutex);
      if (!first_error) first_error = std::current_exception();
    }
  };

  if (t == 1) {
    guarded(0, n);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(t - 1);
    const std::int64_t base = n / t;
    const std::int64_t extra = n % t;
    std::int64_t lo = 0;
    for (int i = 0; i < t; ++i) {
      const std::int64_t hi = lo + base + (i < extra ? 1 : 0);
      if (i < t - 1) {
        pool.emplace_back(guarded, lo, hi);
      } else {
        guarded(lo, hi);
      }
      lo = hi;
    }
    for (auto& th : pool) th.join();
  }
  if (first_error) std::rethrow_exception(first_error);
}

Person* dynasty_slice(Pedigree& ped, const Layout& L, std::int64_t d) {
  return ped.persons.data() + d * L.per_dynasty();
}

void init_person(Person& p, const Layout& L, std::int64_t d, std::int64_t local,
                 int generation) {
  const std::int64_t offset = d * L.per_dynasty();
  p.person_id = offset + local;
  p.dynasty_id = d;
  p.generation = generation;
  p.father_id = kNoPerson;
  p.mother_id = kNoPerson;
  p.spouse_id = kNoPerson;
}

// Draw order per dynasty: founder (v, u); then per family one shared v and
// one shared u, then per child (v, u). Shared draws happen even at zero
// correlation so the stream layout does not depend on the parameters.
void build_latent_dynasty(const LatentFactorParams& p, const Layout& L,
                          std::uint64_t seed, std::int64_t d, Pedigree& ped) {
  SplitMix64 rng = derive_stream(seed, static_cast<std::uint64_t>(d));
  Person* out = dynasty_slice(ped, L, d);
  const double rho = p.returns_rho;
  const double lam = p.transferability_lambda;
  const double sd_u = std::sqrt(1.0 - rho * rho);
  const double sd_v = std::sqrt(1.0 - lam * lam);
  const double w_shared_v = std::sqrt(p.sibling_shared_v);
  const double w_idio_v = std::sqrt(1.0 - p.sibling_shared_v);
  const double w_shared_u = std::sqrt(p.sibling_shared_u);
  const double w_idio_u = std::sqrt(1.0 - p.sibling_shared_u);

  init_person(out[0], L, d, 0, 0);
  out[0].e1 = rng.next_normal();
  out[0].y = rho * out[0].e1 + sd_u * rng.next_normal();

  const int C = L.fanout;
  for (int g = 1; g < L.generations; ++g) {
    for (std::int64_t f = 0; f < L.blood[g - 1]; ++f) {
      const Person& parent = out[L.start[g - 1] + f];
      const double shared_v = rng.next_normal();
      const double shared_u = rng.next_normal();
      for (int c = 0; c < C; ++c) {
        const double v = sd_v * (w_shared_v * shared_v + w_idio_v * rng.next_normal());
        const double u = sd_u * (w_shared_u * shared_u + w_idio_u * rng.next_normal());
        const std::int64_t local = L.start[g] + f * C + c;
        Person& child = out[local];
        init_person(child, L, d, local, g);
        child.father_id = parent.person_id;
        child.e1 = lam * parent.e1 + v;
        child.y = rho * child.e1 + u;
      }
    }
  }
}

// Draw order per dynasty: founder (v1, v2, u); per child (v1, v2, u).
void build_multiplicity_dynasty(const MultiplicityParams& p, const Layout& L,
                                std::uint64_t seed, std::int64_t d, Pedigree& ped) {
  SplitMix64 rng = derive_stream(seed, static_cast<std::uint64_t>(d));
  Person* out = dynasty_slice(ped, L, d);
  const double rho1 = std::sqrt(p.rho1_sq);
  const double rho2 = std::sqrt(p.rho2_sq);
  const double sd_u = std::sqrt(1.0 - p.rho1_sq - p.rho2_sq);
  const double sd_v1 = std::sqrt(1.0 - p.lambda1 * p.lambda1);
  const double sd_v2 = std::sqrt(1.0 - p.lambda2 * p.lambda2);

  init_person(out[0], L, d, 0, 0);
  out[0].e1 = rng.next_normal();
  out[0].e2 = rng.next_normal();
  out[0].y = rho1 * out[0].e1 + rho2 * out[0].e2 + sd_u * rng.next_normal();

  const int C = L.fanout;
  for (int g = 1; g < L.generations; ++g) {
    for (std::int64_t f = 0; f < L.blood[g - 1]; ++f) {
      const Person& parent = out[L.start[g - 1] + f];
      for (int c = 0; c < C; ++c) {
        const std::int64_t local = L.start[g] + f * C + c;
        Person& child = out[local];
        init_person(child, L, d, local, g);
        child.father_id = parent.person_id;
        child.e1 = p.lambda1 * parent.e1 + sd_v1 * rng.next_normal();
        child.e2 = p.lambda2 * parent.e2 + sd_v2 * rng.next_normal();
        child.y = rho1 * child.e1 + rho2 * child.e2 + sd_u * rng.next_normal();
      }
    }
  }
}

// The AR(2) needs two ancestor states. Each dynasty burns in a hidden chain
// of 12 values (two standard-normal starts, ten transitions); the last value
// becomes the founder and the one before it serves as the first generation's
// grandparent state. Draw order: 12 burn-in draws, then one per child.
void build_ar2_dynasty(const Ar2Params& p, const Layout& L, std::uint64_t seed,
                       std::int64_t d, Pedigree& ped) {
  SplitMix64 rng = derive_stream(seed, static_cast<std::uint64_t>(d));
  Person* out = dynasty_slice(ped, L, d);
  const double sd_v = std::sqrt(ar2_shock_variance(p));

  double older = rng.next_normal();
  double newer = rng.next_normal();
  for (int i = 0; i < 10; ++i) {
    const double next = p.gamma_p * newer + p.gamma_gp * older + sd_v * rng.next_normal();
    older = newer;
    newer = next;
  }
  init_person(out[0], L, d, 0, 0);
  out[0].y = newer;
  const double virtual_grandparent = older;

  const int C = L.fanout;
  for (int g = 1; g < L.generations; ++g) {
    for (std::int64_t f = 0; f < L.blood[g - 1]; ++f) {
      const Person& parent = out[L.start[g - 1] + f];
      const double grand_y = g == 1 ? virtual_grandparent
                                    : out[L.start[g - 2] + f / C].y;
      for (int c = 0; c < C; ++c) {
        const std::int64_t local = L.start[g] + f * C + c;
        Person& child = out[local];
        init_person(child, L, d, local, g);
        child.father_id = parent.person_id;
        child.y = p.gamma_p * parent.y + p.gamma_gp * grand_y + sd_v * rng.next_normal();
      }
    }
  }
}

// Draw order per dynasty: founder father (v, u), founder mother (spouse v,
// u); per child (v, u) followed, when the child gets a spouse, by the
// spouse's (v, u). The blood-line member is recorded as the father, the
// generated spouse as the mother.
void build_assortative_dynasty(const AssortativeParams& p, const Layout& L,
                               std::uint64_t seed, std::int64_t d, Pedigree& ped) {
  SplitMix64 rng = derive_stream(seed, static_cast<std::uint64_t>(d));
  Person* out = dynasty_slice(ped, L, d);
  const double rho = p.returns_rho;
  const double lam = p.transferability_lambda;
  const double m = p.assortative_m;
  const double sd_u = std::sqrt(1.0 - rho * rho);
  const double sd_v = std::sqrt(1.0 - lam * lam * 0.5 * (1.0 + m));

  init_person(out[0], L, d, 0, 0);
  init_person(out[1], L, d, 1, 0);
  out[0].e1 = rng.next_normal();
  out[0].y = rho * out[0].e1 + sd_u * rng.next_normal();
  out[1].e1 = spouse_draw(out[0].e1, m, rng);
  out[1].y = rho * out[1].e1 + sd_u * rng.next_normal();
  out[0].spouse_id = out[1].person_id;
  out[1].spouse_id = out[0].person_id;

  const int C = L.fanout;
  for (int g = 1; g < L.generations; ++g) {
    const bool pair_children = g < L.generations - 1;
    const int stride = L.stride(g);
    for (std::int64_t f = 0; f < L.blood[g - 1]; ++f) {
      const Person& father = out[L.start[g - 1] + f * 2];
      const Person& mother = out[L.start[g - 1] + f * 2 + 1];
      const double mid = 0.5 * (father.e1 + mother.e1);
      for (int c = 0; c < C; ++c) {
        const std::int64_t local = L.start[g] + (f * C + c) * stride;
        Person& child = out[local];
        init_person(child, L, d, local, g);
        child.father_id = father.person_id;
        child.mother_id = mother.person_id;
        child.e1 = lam * mid + sd_v * rng.next_normal();
        child.y = rho * child.e1 + sd_u * rng.next_normal();
        if (pair_children) {
          Person& spouse = out[local + 1];
          init_person(spouse, L, d, local + 1, g);
          spouse.e1 = spouse_draw(child.e1, m, rng);
          spouse.y = rho * spouse.e1 + sd_u * rng.next_normal();
          spouse.spouse_id = child.person_id;
          child.spouse_id = spouse.person_id;
        }
      }
    }
  }
}

// Standardizes y in place over one generation, iterating dynasties in index
// order so the reduction is independent of the worker count.
void standardize_generation(Pedigree& ped, const Layout& L, std::int64_t n_dyn, int g) {
  const std::int64_t lo = L.start[g];
  const std::int64_t hi = L.start[g + 1];
  const std::int64_t per = L.per_dynasty();
  const std::int64_t n = (hi - lo) * n_dyn;

  double sum = 0.0;
  for (std::int64_t d = 0; d < n_dyn; ++d) {
    const Person* slice = ped.persons.data() + d * per;
    for (std::int64_t i = lo; i < hi; ++i) sum += slice[i].y;
  }
  const double mean = sum / static_cast<double>(n);

  double ss = 0.0;
  for (std::int64_t d = 0; d < n_dyn; ++d) {
    const Person* slice = ped.persons.data() + d * per;
    for (std::int64_t i = lo; i < hi; ++i) {
      const double dev = slice[i].y - mean;
      ss += dev * dev;
    }
  }
  if (n < 2 || ss <= 0.0) {
    throw DataError("cannot standardize generation " + std::to_string(g) +
                    ": zero variance");
  }
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  for (std::int64_t d = 0; d < n_dyn; ++d) {
    Person* slice = ped.persons.data() + d * per;
    for (std::int64_t i = lo; i < hi; ++i) slice[i].y = (slice[i].y - mean) / sd;
  }
}

// The threshold acts on the standardized parent outcome, so generations are
// produced in lockstep: every dynasty draws generation g, then g is
// standardized globally before g+1 starts. Draw order per dynasty: founder's
// shock, then one shock per child in family order.
void build_poverty(const PovertyTrapParams& p, const Layout& L, const SimTopology& topo,
                   int threads, Pedigree& ped) {
  const std::int64_t n_dyn = topo.n_dynasties;
  std::vector<SplitMix64> streams;
  streams.reserve(n_dyn);
  for (std::int64_t d = 0; d < n_dyn; ++d) {
    streams.push_back(derive_stream(topo.seed, static_cast<std::uint64_t>(d)));
  }

  parallel_dynasties(n_dyn, threads, [&](std::int64_t d0, std::int64_t d1) {
    for (std::int64_t d = d0; d < d1; ++d) {
      Person* out = dynasty_slice(ped, L, d);
      init_person(out[0], L, d, 0, 0);
      out[0].y = streams[d].next_normal();
    }
  });
  standardize_generation(ped, L, n_dyn, 0);

  const int C = L.fanout;
  for (int g = 1; g < L.generations; ++g) {
    parallel_dynasties(n_dyn, threads, [&](std::int64_t d0, std::int64_t d1) {
      for (std::int64_t d = d0; d < d1; ++d) {
        Person* out = dynasty_slice(ped, L, d);
        for (std::int64_t f = 0; f < L.blood[g - 1]; ++f) {
          const Person& parent = out[L.start[g - 1] + f];
          const double gap = parent.y - p.threshold_ybar;
          const double slope = parent.y < p.threshold_ybar ? p.gamma_low : p.gamma_high;
          for (int c = 0; c < C; ++c) {
            const std::int64_t local = L.start[g] + f * C + c;
            Person& child = out[local];
            init_person(child, L, d, local, g);
            child.father_id = parent.person_id;
            child.y = slope * gap + p.shock_sd * streams[d].next_normal();
          }
        }
      }
    });
    standardize_generation(ped, L, n_dyn, g);
  }
}

}  // namespace

double spouse_draw(double e_own, double m, SplitMix64& rng) {
  if (!std::isfinite(m) || std::abs(m) >= 1.0) {
    throw UsageError("spouse_draw requires |m| < 1");
  }
  return m * e_own + std::sqrt(1.0 - m * m) * rng.next_normal();
}

Pedigree simulate(const ModelSpec& spec, const SimTopology& topo,
                  const SimulateOptions& opts) {
  require_valid(spec);
  if (topo.n_dynasties < 1) throw UsageError("n_dynasties must be positive");
  if (topo.generations < 2) throw UsageError("generations must be at least 2");
  if (topo.children_per_family < 1) {
    throw UsageError("children_per_family must be at least 1");
  }

  const Layout L = make_layout(topo, is_two_parent(spec), opts.person_cap);
  Pedigree ped;
  ped.topology = topo;
  ped.model = model_name(spec);
  ped.persons.resize(static_cast<std::size_t>(L.per_dynasty() * topo.n_dynasties));

  if (const auto* poverty = std::get_if<PovertyTrapParams>(&spec)) {
    build_poverty(*poverty, L, topo, opts.threads, ped);
  } else {
    parallel_dynasties(topo.n_dynasties, opts.threads, [&](std::int64_t d0, std::int64_t d1) {
      for (std::int64_t d = d0; d < d1; ++d) {
        std::visit(
            [&](const auto& params) {
              using T = std::decay_t<decltype(params)>;
              if constexpr (std::is_same_v<T, LatentFactorParams>) {
                build_latent_dynasty(params, L, topo.seed, d, ped);
              } else if constexpr (std::is_same_v<T, MultiplicityParams>) {
                build_multiplicity_dynasty(params, L, topo.seed, d, ped);
              } else if constexpr (std::is_same_v<T, Ar2Params>) {
                build_ar2_dynasty(params, L, topo.seed, d, ped);
              } else if constexpr (std::is_same_v<T, AssortativeParams>) {
                build_assortative_dynasty(params, L, topo.seed, d, ped);
              }
            },
            spec);
      }
    });
  }

  ped.rebuild_index();
  return ped;
}

std::vector<double> poverty_persistence_curve(const Pedigree& ped, double ybar,
                                              int max_k) {
  if (max_k < 0) throw UsageError("max_k must be non-negative");
  const int top = ped.max_generation();
  if (max_k > top) {
    throw UsageError("max_k=" + std::to_string(max_k) + " exceeds the deepest generation " +
                     std::to_string(top));
  }

  std::int64_t poor_founders = 0;
  for (const auto& p : ped.persons) {
    if (p.generation == 0 && p.y < ybar) ++poor_founders;
  }
  if (poor_founders == 0) {
    throw DataError("no founders fall below the threshold; the conditional "
                    "persistence curve is degenerate");
  }

  std::vector<std::int64_t> total(max_k + 1, 0);
  std::vector<std::int64_t> poor(max_k + 1, 0);
  for (const auto& p : ped.persons) {
    const int k = p.generation;
    if (k > max_k) continue;
    const Person* founder = ped.ancestor(p, k);
    if (founder == nullptr || founder->y >= ybar) continue;
    ++total[k];
    if (p.y < ybar) ++poor[k];
  }

  std::vector<double> curve(max_k + 1, 0.0);
  for (int k = 0; k <= max_k; ++k) {
    if (total[k] == 0) {
      throw DataError("no founder-descendant pairs at distance " + std::to_string(k));
    }
    curve[k] = static_cast<double>(poor[k]) / static_cast<double>(total[k]);
  }
  return curve;
}

}  // namespace mobsim
