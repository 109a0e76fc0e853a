#pragma once

#include <string>

#include "efr/errors.hpp"

namespace efr {

enum class KernelFamily { epanechnikov, gaussian, uniform };

// Kernels are evaluated on the nonnegative argument u = distance / bandwidth.
// Epanechnikov and uniform are supported on [0,1): an observation at
// distance >= h gets exactly zero weight.  The Gaussian has full support.
struct KernelSpec {
    KernelFamily family = KernelFamily::epanechnikov;

    double operator()(double u) const;
    bool bounded_support() const { return family != KernelFamily::gaussian; }
};

KernelSpec parse_kernel(const std::string& name);
std::string kernel_name(const KernelSpec& k);

} // namespace efr
