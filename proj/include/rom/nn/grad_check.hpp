#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace rom::nn {

struct GradCheckReport {
    double max_rel_error = 0.0;
    std::size_t worst_index = 0;
    std::size_t checked = 0;
    bool passed = true;
};

/// Compares `analytic` with central differences of the scalar function f at x.
/// The relative error of entry i is |a - n| / max(|a|, |n|, 1e-3).
GradCheckReport grad_check(const std::function<double(std::span<const double>)>& f, std::span<const double> x,
                           std::span<const double> analytic, double tolerance, double h = 1e-5);

} // namespace rom::nn
