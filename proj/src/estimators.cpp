#include "mobsim/estimators.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <unordered_map>

#include "mobsim/errors.hpp"

namespace mobsim {

namespace {

// Per-generation z-scores of y, indexed like ped.persons. Slopes on these
// standardized outcomes are correlations.
std::vector<double> standardized_y(const Pedigree& ped) {
  if (ped.persons.empty()) throw DataError("panel is empty");
  std::map<int, std::pair<double, std::int64_t>> sums;
  for (const auto& p : ped.persons) {
    auto& [sum, count] = sums[p.generation];
    sum += p.y;
    ++count;
  }
  std::map<int, double> mean;
  for (const auto& [g, sc] : sums) {
    if (sc.second < 2) {
      throw DataError("generation " + std::to_string(g) +
                      " has fewer than 2 persons; cannot standardize");
    }
    mean[g] = sc.first / static_cast<double>(sc.second);
  }
  std::map<int, double> ss;
  for (const auto& p : ped.persons) {
    const double dev = p.y - mean[p.generation];
    ss[p.generation] += dev * dev;
  }
  std::map<int, double> sd;
  for (const auto& [g, s] : ss) {
    if (s <= 0.0) {
      throw DataError("generation " + std::to_string(g) +
                      " has zero variance; cannot standardize");
    }
    sd[g] = std::sqrt(s / static_cast<double>(sums[g].second - 1));
  }
  std::vector<double> z(ped.persons.size());
  for (std::size_t i = 0; i < ped.persons.size(); ++i) {
    const auto& p = ped.persons[i];
    z[i] = (p.y - mean[p.generation]) / sd[p.generation];
  }
  return z;
}

std::size_t person_index(const Pedigree& ped, const Person* p) {
  return static_cast<std::size_t>(p - ped.persons.data());
}

// OLS with an intercept appended after the named regressors.
RegressionResult run_ols(std::vector<std::string> names,
                         const std::vector<std::vector<double>>& columns,
                         const std::vector<double>& response) {
  const std::int64_t n = static_cast<std::int64_t>(response.size());
  const std::size_t p = columns.size();
  if (n < static_cast<std::int64_t>(p) + 2) {
    throw DataError("need at least " + std::to_string(p + 2) +
                    " observations for " + std::to_string(p) +
                    " regressors plus intercept, got " + std::to_string(n));
  }

  Eigen::MatrixXd X(n, p + 1);
  for (std::size_t j = 0; j < p; ++j) {
    X.col(j) = Eigen::Map<const Eigen::VectorXd>(columns[j].data(), n);
  }
  X.col(p).setOnes();
  Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(response.data(), n);

  names.push_back("intercept");
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  if (qr.rank() < static_cast<Eigen::Index>(p) + 1) {
    const auto perm = qr.colsPermutation().indices();
    std::string offenders;
    for (Eigen::Index i = qr.rank(); i < perm.size(); ++i) {
      if (!offenders.empty()) offenders += ", ";
      offenders += names[static_cast<std::size_t>(perm[i])];
    }
    throw DataError("collinear regressors: " + offenders);
  }

  RegressionResult result;
  result.names = std::move(names);
  result.n_obs = n;
  Eigen::VectorXd b = qr.solve(y);
  Eigen::VectorXd resid = y - X * b;
  const double ssr = resid.squaredNorm();
  const double ybar = y.mean();
  const double tss = (y.array() - ybar).matrix().squaredNorm();
  result.r_squared = tss > 0.0 ? 1.0 - ssr / tss : 0.0;

  const double dof = static_cast<double>(n) - static_cast<double>(p) - 1.0;
  const double sigma_sq = ssr / dof;
  Eigen::MatrixXd xtx_inv =
      (X.transpose() * X).ldlt().solve(Eigen::MatrixXd::Identity(p + 1, p + 1));

  result.coefficients.resize(p + 1);
  result.std_errors.resize(p + 1);
  for (std::size_t j = 0; j <= p; ++j) {
    result.coefficients[j] = b(static_cast<Eigen::Index>(j));
    result.std_errors[j] =
        std::sqrt(sigma_sq * xtx_inv(static_cast<Eigen::Index>(j),
                                     static_cast<Eigen::Index>(j)));
  }
  if (n < 30) {
    result.warnings.push_back("only " + std::to_string(n) +
                              " observations; estimates are noisy");
  }
  return result;
}

const std::vector<std::string> kKnownControls = {"mother_y", "spouse_y"};

std::int64_t control_link(const Person& p, const std::string& control) {
  return control == "mother_y" ? p.mother_id : p.spouse_id;
}

}  // namespace

double RegressionResult::coefficient(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return coefficients[i];
  }
  throw UsageError("no regressor named \"" + name + "\"");
}

double RegressionResult::std_error(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return std_errors[i];
  }
  throw UsageError("no regressor named \"" + name + "\"");
}

RegressionResult beta_k_estimate(const Pedigree& ped, int k, Pedigree::Line line,
                                 std::optional<int> child_generation) {
  if (k < 1) throw UsageError("ancestor distance k must be at least 1");
  const auto z = standardized_y(ped);
  if (ped.max_generation() < k) {
    throw DataError("panel spans " + std::to_string(ped.max_generation() + 1) +
                    " generations; ancestor distance " + std::to_string(k) +
                    " is unreachable");
  }
  std::vector<double> anc_y;
  std::vector<double> child_y;
  for (std::size_t i = 0; i < ped.persons.size(); ++i) {
    if (child_generation && ped.persons[i].generation != *child_generation) continue;
    const Person* anc = ped.ancestor(ped.persons[i], k, line);
    if (anc == nullptr) continue;
    child_y.push_back(z[i]);
    anc_y.push_back(z[person_index(ped, anc)]);
  }
  if (child_y.empty()) {
    throw DataError("no unbroken ancestor chains at distance " + std::to_string(k) +
                    (line == Pedigree::Line::Mother ? " through the mother line" : ""));
  }
  return run_ols({"lag" + std::to_string(k)}, {anc_y}, child_y);
}

RegressionResult multigen_regression(const Pedigree& ped, const std::vector<int>& lags,
                                     const std::vector<std::string>& extra_controls) {
  if (lags.empty()) throw UsageError("at least one ancestor lag is required");
  for (int k : lags) {
    if (k < 1) throw UsageError("ancestor lags must be at least 1");
    if (std::count(lags.begin(), lags.end(), k) > 1) {
      throw UsageError("duplicate ancestor lag " + std::to_string(k));
    }
  }
  for (const auto& c : extra_controls) {
    if (std::find(kKnownControls.begin(), kKnownControls.end(), c) ==
        kKnownControls.end()) {
      throw UsageError("unknown control \"" + c + "\"; expected mother_y or spouse_y");
    }
    bool any = false;
    for (const auto& p : ped.persons) {
      if (control_link(p, c) != kNoPerson) {
        any = true;
        break;
      }
    }
    if (!any) {
      throw DataError("panel has no " + c.substr(0, c.size() - 2) +
                      " links; control \"" + c + "\" is unavailable");
    }
  }

  const auto z = standardized_y(ped);
  std::vector<std::string> names;
  for (int k : lags) names.push_back("lag" + std::to_string(k));
  for (const auto& c : extra_controls) names.push_back(c);

  std::vector<std::vector<double>> columns(names.size());
  std::vector<double> response;
  std::vector<double> row(names.size());
  for (std::size_t i = 0; i < ped.persons.size(); ++i) {
    const Person& person = ped.persons[i];
    bool complete = true;
    std::size_t j = 0;
    for (int k : lags) {
      const Person* anc = ped.ancestor(person, k);
      if (anc == nullptr) {
        complete = false;
        break;
      }
      row[j++] = z[person_index(ped, anc)];
    }
    if (complete) {
      for (const auto& c : extra_controls) {
        const Person* linked = ped.find(control_link(person, c));
        if (linked == nullptr) {
          complete = false;
          break;
        }
        row[j++] = z[person_index(ped, linked)];
      }
    }
    if (!complete) continue;
    for (std::size_t col = 0; col < row.size(); ++col) columns[col].push_back(row[col]);
    response.push_back(z[i]);
  }
  if (response.empty()) {
    throw DataError("no complete cases for the requested ancestor lags and controls");
  }
  return run_ols(std::move(names), columns, response);
}

RegressionResult sibling_regression(const Pedigree& ped, bool include_parent) {
  const auto z = standardized_y(ped);

  std::vector<std::int64_t> family_order;
  std::unordered_map<std::int64_t, std::vector<std::size_t>> families;
  for (std::size_t i = 0; i < ped.persons.size(); ++i) {
    const std::int64_t f = ped.persons[i].father_id;
    if (f == kNoPerson) continue;
    auto [it, inserted] = families.try_emplace(f);
    if (inserted) family_order.push_back(f);
    it->second.push_back(i);
  }

  std::vector<double> own;
  std::vector<double> sibling;
  std::vector<double> parent;
  for (std::int64_t f : family_order) {
    const auto& kids = families[f];
    if (kids.size() < 2) continue;
    const Person* father = ped.find(f);
    const double parent_z = z[person_index(ped, father)];
    for (std::size_t a = 0; a < kids.size(); ++a) {
      for (std::size_t b = 0; b < kids.size(); ++b) {
        if (a == b) continue;
        own.push_back(z[kids[a]]);
        sibling.push_back(z[kids[b]]);
        parent.push_back(parent_z);
      }
    }
  }
  if (own.empty()) {
    throw DataError("no sibling pairs; the panel needs families with at least "
                    "2 children");
  }
  if (include_parent) {
    return run_ols({"sibling", "lag1"}, {sibling, parent}, own);
  }
  return run_ols({"sibling"}, {sibling}, own);
}

FitResult fit_latent_factor(const MomentSet& moments) {
  const auto& beta = moments.beta_k;
  const auto b1_it = beta.find(1);
  const auto b2_it = beta.find(2);
  if (b1_it == beta.end() || b2_it == beta.end()) {
    throw UsageError("fit requires beta_k[1] and beta_k[2]");
  }
  const double b1 = b1_it->second;
  const double b2 = b2_it->second;
  if (!(b1 > 0.0) || !(b2 > 0.0)) {
    throw UsageError("fit requires positive beta_k[1] and beta_k[2]");
  }

  FitResult fit;
  if (beta.size() == 2) {
    if (b2 >= b1) {
      throw InfeasibleError("moments do not decay: beta_2 = " + std::to_string(b2) +
                            " >= beta_1 = " + std::to_string(b1));
    }
    const double rho_sq = b1 * b1 / b2;
    if (rho_sq > 1.0 + 1e-12) {
      throw InfeasibleError("implied rho^2 = " + std::to_string(rho_sq) +
                            " exceeds 1; moments decay faster than any "
                            "single-pathway model allows");
    }
    fit.rho_sq = std::min(rho_sq, 1.0);
    fit.lambda = b2 / b1;
    fit.residual_norm = 0.0;
    return fit;
  }

  // Least squares over (rho_sq, lambda); rho_sq enters linearly, so each
  // candidate lambda gets its profiled optimum before the damped
  // Gauss-Newton polish.
  const auto objective = [&](double r, double l) {
    double f = 0.0;
    for (const auto& [k, bk] : beta) {
      const double diff = bk - r * std::pow(l, k);
      f += diff * diff;
    }
    return f;
  };
  const auto profiled_rho = [&](double l) {
    double num = 0.0;
    double den = 0.0;
    for (const auto& [k, bk] : beta) {
      const double lk = std::pow(l, k);
      num += bk * lk;
      den += lk * lk;
    }
    if (den <= 0.0) return 1.0;
    return std::clamp(num / den, 1e-9, 1.0);
  };

  double best_r = 1.0;
  double best_l = 0.0;
  double best_f = std::numeric_limits<double>::infinity();
  for (int i = 1; i <= 10; ++i) {
    for (int j = 0; j < 10; ++j) {
      double r = 0.1 * i;
      double l = 0.05 + 0.1 * j;
      double f = objective(r, l);
      double mu = 1e-3;
      for (int iter = 0; iter < 200; ++iter) {
        // Damped Gauss-Newton step on residuals beta_k - r l^k.
        double jtj_rr = 0.0, jtj_rl = 0.0, jtj_ll = 0.0, jtr_r = 0.0, jtr_l = 0.0;
        for (const auto& [k, bk] : beta) {
          const double lk = std::pow(l, k);
          const double dr = lk;
          const double dl = r * k * (k == 1 ? 1.0 : std::pow(l, k - 1));
          const double res = bk - r * lk;
          jtj_rr += dr * dr;
          jtj_rl += dr * dl;
          jtj_ll += dl * dl;
          jtr_r += dr * res;
          jtr_l += dl * res;
        }
        const double a11 = jtj_rr + mu;
        const double a22 = jtj_ll + mu;
        const double det = a11 * a22 - jtj_rl * jtj_rl;
        if (det <= 0.0) break;
        const double step_r = (a22 * jtr_r - jtj_rl * jtr_l) / det;
        const double step_l = (a11 * jtr_l - jtj_rl * jtr_r) / det;
        const double r_new = std::clamp(r + step_r, 1e-9, 1.0);
        const double l_new = std::clamp(l + step_l, 0.0, 1.0 - 1e-9);
        const double f_new = objective(r_new, l_new);
        if (f_new < f) {
          const bool converged = f - f_new < 1e-10;
          r = r_new;
          l = l_new;
          f = f_new;
          mu = std::max(mu * 0.3, 1e-12);
          if (converged) break;
        } else {
          mu *= 10.0;
          if (mu > 1e12) break;
        }
      }
      const double r_prof = profiled_rho(l);
      const double f_prof = objective(r_prof, l);
      if (f_prof < f) {
        r = r_prof;
        f = f_prof;
      }
      if (f < best_f) {
        best_f = f;
        best_r = r;
        best_l = l;
      }
    }
  }

  fit.rho_sq = best_r;
  fit.lambda = best_l;
  fit.residual_norm = std::sqrt(best_f);
  if (fit.residual_norm > 1e-6) {
    fit.warnings.push_back(
        "residual norm " + std::to_string(fit.residual_norm) +
        " indicates a single-pathway model does not fit the supplied moments");
  }
  return fit;
}

double group_level_estimate(const Pedigree& ped, int parent_gen, int child_gen) {
  if (parent_gen < 0 || child_gen <= parent_gen) {
    throw UsageError("group estimate requires 0 <= parent_gen < child_gen");
  }
  const auto z = standardized_y(ped);

  struct GroupSums {
    double parent_sum = 0.0;
    std::int64_t parent_n = 0;
    double child_sum = 0.0;
    std::int64_t child_n = 0;
  };
  std::map<std::int64_t, GroupSums> groups;
  for (std::size_t i = 0; i < ped.persons.size(); ++i) {
    const Person& p = ped.persons[i];
    if (p.generation == parent_gen) {
      auto& g = groups[p.dynasty_id];
      g.parent_sum += z[i];
      ++g.parent_n;
    } else if (p.generation == child_gen) {
      auto& g = groups[p.dynasty_id];
      g.child_sum += z[i];
      ++g.child_n;
    }
  }

  std::vector<double> parent_means;
  std::vector<double> child_means;
  for (const auto& [dynasty, g] : groups) {
    if (g.parent_n == 0 || g.child_n == 0) continue;
    parent_means.push_back(g.parent_sum / static_cast<double>(g.parent_n));
    child_means.push_back(g.child_sum / static_cast<double>(g.child_n));
  }
  if (parent_means.size() < 30) {
    throw DataError("only " + std::to_string(parent_means.size()) +
                    " dynasties observed in both generations; need at least 30");
  }
  return run_ols({"group_mean"}, {parent_means}, child_means).coefficient("group_mean");
}

double r2_of(const RegressionResult& result) { return result.r_squared; }

}  // namespace mobsim
