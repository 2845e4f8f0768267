#include "rom/nn/grad_check.hpp"

#include "rom/error.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace rom::nn {

GradCheckReport grad_check(const std::function<double(std::span<const double>)>& f, std::span<const double> x,
                           std::span<const double> analytic, double tolerance, double h)
{
    if (x.size() != analytic.size()) throw ShapeError("grad_check: gradient length mismatch");
    GradCheckReport report;
    std::vector<double> probe(x.begin(), x.end());
    for (std::size_t i = 0; i < probe.size(); ++i) {
        const double orig = probe[i];
        probe[i] = orig + h;
        const double fp = f(probe);
        probe[i] = orig - h;
        const double fm = f(probe);
        probe[i] = orig;
        const double numeric = (fp - fm) / (2.0 * h);
        const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), 1e-3});
        const double rel = std::abs(analytic[i] - numeric) / denom;
        if (rel > report.max_rel_error) {
            report.max_rel_error = rel;
            report.worst_index = i;
        }
        ++report.checked;
    }
    report.passed = report.max_rel_error <= tolerance;
    return report;
}

} // namespace rom::nn
