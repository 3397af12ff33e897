#include "fcdelay/spectrum.hpp"

#include <algorithm>
#include <cmath>

namespace fcdelay {

RescaledGrid rescale_and_symmetrize(const SampledResponse& resp)
{
    const std::size_t n = resp.freqs.size();
    if (n < 2 || resp.values.size() != n)
        throw std::invalid_argument("response needs at least 2 matching samples");
    for (std::size_t i = 0; i < n; ++i) {
        if (resp.freqs[i] < 0.0)
            throw std::invalid_argument("negative frequency at index " + std::to_string(i));
        if (i > 0 && resp.freqs[i] <= resp.freqs[i - 1])
            throw std::invalid_argument("frequencies not strictly increasing at index " +
                                        std::to_string(i));
    }
    const double wmax = resp.freqs.back();
    if (wmax <= 0.0)
        throw std::invalid_argument("w_max must be positive");

    RescaledGrid grid;
    grid.scale_a = 0.5 / wmax;
    grid.includes_zero = resp.freqs.front() == 0.0;

    const std::size_t start = grid.includes_zero ? 1 : 0;
    grid.xs.reserve(2 * n);
    grid.values.reserve(2 * n);

    // negative half, mirrored
    for (std::size_t i = n; i-- > start;) {
        grid.xs.push_back(-0.5 * resp.freqs[i] / wmax);
        grid.values.push_back(std::conj(resp.values[i]));
    }
    if (grid.includes_zero) {
        cplx v0 = resp.values.front();
        if (v0.imag() != 0.0) {
            grid.warnings.push_back("Im H(0) != 0; imaginary part zeroed");
            v0 = cplx(v0.real(), 0.0);
        }
        grid.xs.push_back(0.0);
        grid.values.push_back(v0);
    }
    for (std::size_t i = start; i < n; ++i) {
        grid.xs.push_back(0.5 * resp.freqs[i] / wmax);
        grid.values.push_back(resp.values[i]);
    }
    return grid;
}

} // namespace fcdelay
