#include "epsens/ratio.hpp"

#include <cmath>
#include <stdexcept>

namespace epsens {

std::string ratio_kind_name(RatioKind k) {
  switch (k) {
    case RatioKind::RR: return "rr";
    case RatioKind::OR: return "or";
    case RatioKind::LogRR: return "log_rr";
    case RatioKind::LogOR: return "log_or";
  }
  return "?";
}

RatioKind ratio_kind_from_name(const std::string& name) {
  if (name == "rr") return RatioKind::RR;
  if (name == "or") return RatioKind::OR;
  if (name == "log_rr") return RatioKind::LogRR;
  if (name == "log_or") return RatioKind::LogOR;
  throw std::invalid_argument("unknown ratio kind '" + name + "'");
}

double ratio_effect(RatioKind kind, Method method, const Dataset& ds, const NuisanceFits& fits,
                    const SensitivitySpec& eps, std::vector<std::string>* warnings) {
  const double mu1 = potential_mean(1, method, ds, fits, eps);
  const double mu0 = potential_mean(0, method, ds, fits, eps);

  auto name = [](int z) { return z == 1 ? std::string("treated") : std::string("control"); };
  for (int z : {1, 0}) {
    const double m = z == 1 ? mu1 : mu0;
    if ((m < 0.0 || m > 1.0) && warnings)
      warnings->push_back(name(z) + " arm mean " + std::to_string(m) +
                          " outside [0,1]; not clipped");
  }

  const bool needs_log = kind == RatioKind::LogRR || kind == RatioKind::LogOR;
  const bool odds = kind == RatioKind::OR || kind == RatioKind::LogOR;

  if (mu0 == 0.0)
    throw std::runtime_error("control arm mean is 0; risk/odds ratio undefined");
  if (odds) {
    if (mu1 == 1.0) throw std::runtime_error("treated arm mean is 1; odds undefined");
    if (mu0 == 1.0) throw std::runtime_error("control arm mean is 1; odds undefined");
  }

  const double value = odds ? (mu1 / (1.0 - mu1)) / (mu0 / (1.0 - mu0)) : mu1 / mu0;
  if (!needs_log) return value;
  if (value <= 0.0) {
    throw std::runtime_error("ratio is nonpositive (treated mean " + std::to_string(mu1) +
                             ", control mean " + std::to_string(mu0) + "); log undefined");
  }
  return std::log(value);
}

}  // namespace epsens
