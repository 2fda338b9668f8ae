#include "focktomo/prep_budget.hpp"

#include <cmath>
#include <string>

#include "focktomo/errors.hpp"

namespace focktomo {

namespace {

void check_width(double w, const char* name) {
  if (!(w > 0.0) || !std::isfinite(w)) {
    throw DomainError(std::string(name) + " must be positive and finite, got " + std::to_string(w));
  }
}

void check_unit(double v, const char* name) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw DomainError(std::string(name) + " = " + std::to_string(v) + " outside [0, 1]");
  }
}

void check_purity(double p) {
  if (!(p > 0.0 && p <= 1.0)) throw DomainError("purity " + std::to_string(p) + " outside (0, 1]");
}

}  // namespace

void EfficiencyBudget::validate() const {
  check_unit(eta_hd, "eta_hd");
  check_unit(eta_dc, "eta_dc");
  check_unit(eta_exp, "eta_exp");
  check_unit(p_s, "p_s");
  check_unit(p_t, "p_t");
}

double spectral_purity(double sigma_f, double sigma_p) {
  check_width(sigma_f, "sigma_f");
  check_width(sigma_p, "sigma_p");
  const double r = sigma_f / sigma_p;
  return 1.0 / std::sqrt(1.0 + r * r);
}

double spatial_purity(double kappa_i, double kappa_p) {
  check_width(kappa_i, "kappa_i");
  check_width(kappa_p, "kappa_p");
  const double r = kappa_i / kappa_p;
  return 1.0 / (1.0 + r * r);
}

double spatial_width_ratio(double purity) {
  check_purity(purity);
  return std::sqrt(1.0 / purity - 1.0);
}

double spectral_width_ratio(double purity) {
  check_purity(purity);
  return std::sqrt(1.0 / (purity * purity) - 1.0);
}

double mode_matching_efficiency(const EfficiencyBudget& budget) {
  budget.validate();
  return budget.eta_exp * std::sqrt(budget.p_s * budget.p_t);
}

double total_efficiency(const EfficiencyBudget& budget) {
  return budget.eta_hd * budget.eta_dc * mode_matching_efficiency(budget);
}

}  // namespace focktomo
