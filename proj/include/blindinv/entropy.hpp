// Nonparametric differential entropy from order-statistic spacings.
#pragma once

#include <cstddef>
#include <vector>

namespace blindinv {

struct EntropyDiagnostics {
  std::size_t clamped_spacings = 0;  // spacings that hit the 1e-12 floor (ties)
};

// Symmetric m-spacing estimate with boundary-weight compensation and a
// digamma bias correction. Exactly equivariant under scaling: adding ln(c)
// for samples scaled by c > 0. Requires n >= 2m + 2.
double marginal_entropy(const std::vector<double>& samples, std::size_t m,
                        EntropyDiagnostics* diag = nullptr);

// m = ceil(sqrt(n))
std::size_t auto_spacing(std::size_t n);

double digamma(double x);

}  // namespace blindinv
