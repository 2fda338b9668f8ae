#pragma once

// Heralded-photon purity and the detection-efficiency budget.
//
// Widths only enter through their ratios, so any consistent unit (sigma or
// FWHM, GHz or rad/s) works as long as both arguments share it.

namespace focktomo {

struct FilterSpec {
  double sigma_f = 50.0;   ///< trigger spectral filter width, GHz
  double sigma_p = 430.0;  ///< pump spectral width, GHz
  double kappa_i = 0.403473;  ///< idler spatial-filter momentum width (P_s = 0.86)
  double kappa_p = 1.0;    ///< pump momentum width
};

struct EfficiencyBudget {
  double eta_hd = 0.90;   ///< homodyne detector, including beam-splitter losses
  double eta_dc = 0.99;   ///< fraction of true (non dark-count) triggers
  double eta_exp = 0.7;   ///< experimental mode matching
  double p_s = 0.86;      ///< spatial purity
  double p_t = 0.98;      ///< spectral purity

  /// Throws DomainError unless every field is in [0, 1].
  void validate() const;
};

/// 1 / sqrt(1 + sigma_f^2 / sigma_p^2)
double spectral_purity(double sigma_f, double sigma_p);

/// 1 / (1 + kappa_i^2 / kappa_p^2)
double spatial_purity(double kappa_i, double kappa_p);

/// kappa_i / kappa_p that yields the given spatial purity.
double spatial_width_ratio(double purity);

/// sigma_f / sigma_p that yields the given spectral purity.
double spectral_width_ratio(double purity);

/// Mode-matching term eta_exp * sqrt(P_s P_t).
double mode_matching_efficiency(const EfficiencyBudget& budget);

/// eta_hd * eta_dc * eta_exp * sqrt(P_s P_t)
double total_efficiency(const EfficiencyBudget& budget);

}  // namespace focktomo
