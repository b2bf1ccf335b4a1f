#pragma once

#include <string>
#include <vector>

#include "epsens/ate.hpp"

namespace epsens {

// Causal risk ratio and odds ratio (and their logs) for binary outcomes,
// by plugging per-arm potential means into the ratio.
enum class RatioKind { RR, OR, LogRR, LogOR };

std::string ratio_kind_name(RatioKind k);
RatioKind ratio_kind_from_name(const std::string& name);

// Plug-in g(mu1, mu0) with mu_z = potential_mean(z, method, ...). HT-type arm
// means may fall outside [0,1] on binary data in finite samples; they are not
// clipped, but a warning is attached. Throws std::runtime_error naming the
// offending arm mean on division-by-zero or log-domain violations.
double ratio_effect(RatioKind kind, Method method, const Dataset& ds, const NuisanceFits& fits,
                    const SensitivitySpec& eps, std::vector<std::string>* warnings = nullptr);

}  // namespace epsens
