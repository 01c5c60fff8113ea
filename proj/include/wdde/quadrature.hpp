#pragma once

#include <cstddef>
#include <stdexcept>

namespace wdde {

/// Composite Simpson rule on [lo, hi] with an even number of panels.
template <class F>
double simpson(F&& f, double lo, double hi, std::size_t panels = 10000)
{
    if (panels == 0 || panels % 2 != 0)
        throw std::invalid_argument("simpson: panel count must be positive and even");
    const double h = (hi - lo) / static_cast<double>(panels);
    double odd = 0.0;
    double even = 0.0;
    for (std::size_t i = 1; i < panels; ++i) {
        const double y = f(lo + static_cast<double>(i) * h);
        if (i % 2 == 1)
            odd += y;
        else
            even += y;
    }
    return h / 3.0 * (f(lo) + 4.0 * odd + 2.0 * even + f(hi));
}

} // namespace wdde
