#include "efr/kernels.hpp"

#include <cmath>

namespace efr {

double KernelSpec::operator()(double u) const {
    if (u < 0.0 || !std::isfinite(u))
        throw domain_error("kernel argument must be finite and nonnegative");
    switch (family) {
    case KernelFamily::epanechnikov:
        return u < 1.0 ? 0.75 * (1.0 - u * u) : 0.0;
    case KernelFamily::gaussian:
        return std::exp(-0.5 * u * u);
    case KernelFamily::uniform:
        return u < 1.0 ? 0.5 : 0.0;
    }
    return 0.0;
}

KernelSpec parse_kernel(const std::string& name) {
    if (name == "epanechnikov")
        return KernelSpec{KernelFamily::epanechnikov};
    if (name == "gaussian")
        return KernelSpec{KernelFamily::gaussian};
    if (name == "uniform")
        return KernelSpec{KernelFamily::uniform};
    throw domain_error("unknown kernel: " + name);
}

std::string kernel_name(const KernelSpec& k) {
    switch (k.family) {
    case KernelFamily::epanechnikov:
        return "epanechnikov";
    case KernelFamily::gaussian:
        return "gaussian";
    case KernelFamily::uniform:
        return "uniform";
    }
    return "?";
}

} // namespace efr
