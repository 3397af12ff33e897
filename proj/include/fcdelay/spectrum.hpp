#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace fcdelay {

using cplx = std::complex<double>;

// Raw one-sided frequency response: angular frequencies in rad/s,
// strictly increasing, all non-negative.
struct SampledResponse {
    std::vector<double> freqs;
    std::vector<cplx> values;
    std::string label;

    std::size_t size() const { return freqs.size(); }
    double w_max() const { return freqs.empty() ? 0.0 : freqs.back(); }
};

// Symmetrized samples on x in [-0.5, 0.5] with the scale factor a that
// converts scaled delays back to seconds.
struct RescaledGrid {
    std::vector<double> xs;
    std::vector<cplx> values;
    double scale_a = 0.0;
    bool includes_zero = false;
    std::vector<std::string> warnings;

    std::size_t size() const { return xs.size(); }
};

// Maps [w_min, w_max] onto [a*, 0.5], mirrors the data to negative x via
// H(-x) = conj(H(x)) and records a = 0.5/w_max. A sample at w = 0 appears
// once; its imaginary part is forced to zero (with a warning if nonzero).
RescaledGrid rescale_and_symmetrize(const SampledResponse& resp);

inline double unscale_delay(double t_scaled, double a) { return t_scaled * a; }

} // namespace fcdelay
