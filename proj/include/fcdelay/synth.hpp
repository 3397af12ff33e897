#pragma once

#include "spectrum.hpp"

namespace fcdelay {

struct FourPoleParams {
    cplx r1{1.0, 2.0};
    cplx p1{1.0, 3.0};
    cplx r2{2.0 / 3.0, 0.5};
    cplx p2{0.5, 5.0};
    double t0 = 0.25; // seconds

    void validate() const;
};

struct RlgcParams {
    double R = 0.0;      // ohm/m
    double L = 0.0;      // H/m
    double G = 0.0;      // S/m
    double C = 0.0;      // F/m
    double length = 0.0; // m
    double z_ref = 50.0; // ohm

    void validate() const;

    // per-inch catalogue values converted to SI
    static RlgcParams paper_line();
};

struct NoiseSpec {
    double amplitude = 0.0;
    double angular_factor = 10.0 * 3.14159265358979323846;
};

cplx four_pole(double w, const FourPoleParams& p);

// S11 of a uniform RLGC line referenced to z_ref. Uses tanh(gamma*L) so the
// hyperbolics never overflow.
cplx rlgc_s11(double w, const RlgcParams& p);

// Dawson's integral D(w) = exp(-w^2) * int_0^w exp(t^2) dt.
double dawson(double w);

cplx dawson_response(double w, double t0);

// T0 = length * sqrt(eps_r) / c0 with c0 = 3e8 m/s.
double stripline_closed_form_delay(double length_m, double eps_r);

// Adds amplitude*sin(angular_factor*x) to Re H at every grid point. This
// intentionally breaks the even symmetry of Re H, i.e. injects a causality
// violation of order amplitude.
RescaledGrid add_sine_noise(const RescaledGrid& grid, const NoiseSpec& spec);

// Uniform samplers used by the CLI and the acceptance experiments.
SampledResponse sample_four_pole(int n, const FourPoleParams& p, double w_max = 6.0);
SampledResponse sample_tline(int n, const RlgcParams& p, double t0_s, double f_max_hz = 5e9);
SampledResponse sample_dawson(int n, double t0, double w_max = 20.0);

} // namespace fcdelay
