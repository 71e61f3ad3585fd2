#include "rdlocal/types.hpp"

#include <cmath>
#include <sstream>

namespace rdlocal {

void DesignSpec::validate() const {
  if (p != 1 && p != 2) throw parameter_error("DesignSpec: p must be 1 or 2");
  if (q != 0 && q != 1) throw parameter_error("DesignSpec: q must be 0 or 1");
  if (q > p) throw parameter_error("DesignSpec: q must not exceed p");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw parameter_error("DesignSpec: alpha must lie strictly in (0, 1)");
  if (bandwidth) {
    if (!(bandwidth->left > 0.0) || !std::isfinite(bandwidth->left))
      throw parameter_error("DesignSpec: fixed left bandwidth must be positive");
    if (!(bandwidth->right > 0.0) || !std::isfinite(bandwidth->right))
      throw parameter_error("DesignSpec: fixed right bandwidth must be positive");
  }
}

std::vector<std::string> validate_dataset(const Dataset& data) {
  std::vector<std::string> findings;
  if (data.observations.empty()) {
    findings.push_back("empty_dataset: no observations");
    return findings;
  }
  const std::size_t arity = data.covariate_names.size();
  std::size_t n_left = 0, n_right = 0;
  for (std::size_t i = 0; i < data.observations.size(); ++i) {
    const Observation& obs = data.observations[i];
    std::ostringstream at;
    at << " (row " << i << ")";
    if (!std::isfinite(obs.z) || !std::isfinite(obs.y) || !std::isfinite(obs.x))
      findings.push_back("nonfinite_value: z, y or x is not finite" + at.str());
    if (!(obs.weight > 0.0) || !std::isfinite(obs.weight))
      findings.push_back("nonpositive_weight: weight must be positive and finite" +
                         at.str());
    for (double c : obs.covariates)
      if (!std::isfinite(c)) {
        findings.push_back("nonfinite_covariate: covariate is not finite" + at.str());
        break;
      }
    if (obs.covariates.size() != arity) {
      std::ostringstream msg;
      msg << "covariate_arity: expected " << arity << " covariates, found "
          << obs.covariates.size() << at.str();
      findings.push_back(msg.str());
    }
    if (std::isfinite(obs.z)) {
      if (side_of(obs.z, data.cutoff) == Side::Left)
        ++n_left;
      else
        ++n_right;
    }
  }
  if (n_left == 0)
    findings.push_back("no_left_observations: no observations below the cutoff");
  if (n_right == 0)
    findings.push_back("no_right_observations: no observations at or above the cutoff");
  return findings;
}

void require_valid(const Dataset& data) {
  const std::vector<std::string> findings = validate_dataset(data);
  if (findings.empty()) return;
  std::ostringstream msg;
  msg << "invalid dataset (" << findings.size() << " finding"
      << (findings.size() == 1 ? "" : "s") << "): ";
  for (std::size_t i = 0; i < findings.size(); ++i) {
    if (i) msg << "; ";
    msg << findings[i];
  }
  throw parameter_error(msg.str());
}

}  // namespace rdlocal
