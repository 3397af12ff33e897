#include "fcdelay/synth.hpp"

#include <cmath>

namespace fcdelay {

namespace {
constexpr double k_pi = 3.14159265358979323846;
constexpr double k_inch = 0.0254; // m
} // namespace

void FourPoleParams::validate() const
{
    if (p1.real() <= 0.0 || p2.real() <= 0.0)
        throw std::invalid_argument("poles must have positive real part");
}

void RlgcParams::validate() const
{
    if (L <= 0.0 || C <= 0.0)
        throw std::invalid_argument("L and C must be positive");
    if (R < 0.0 || G < 0.0)
        throw std::invalid_argument("R and G must be non-negative");
    if (length <= 0.0)
        throw std::invalid_argument("length must be positive");
    if (z_ref <= 0.0)
        throw std::invalid_argument("reference impedance must be positive");
}

RlgcParams RlgcParams::paper_line()
{
    RlgcParams p;
    p.L = 7.574e-9 / k_inch;
    p.C = 2.61166e-12 / k_inch;
    p.R = 16.278e-3 / k_inch;
    p.G = 5.58e-6 / k_inch;
    p.length = 5.0 * k_inch;
    p.z_ref = 50.0;
    return p;
}

cplx four_pole(double w, const FourPoleParams& p)
{
    const cplx iw(0.0, w);
    const cplx core = p.r1 / (iw + p.p1) + std::conj(p.r1) / (iw + std::conj(p.p1)) +
                      p.r2 / (iw + p.p2) + std::conj(p.r2) / (iw + std::conj(p.p2));
    return std::exp(cplx(0.0, -w * p.t0)) * core;
}

cplx rlgc_s11(double w, const RlgcParams& p)
{
    const cplx zs(p.R, w * p.L);
    const cplx yp(p.G, w * p.C);
    const cplx gamma = std::sqrt(zs * yp);
    const cplx z0 = std::sqrt(zs / yp);
    const double zr = p.z_ref;
    // S11 = (z0^2 - zr^2) sinh(gL) / (2 z0 zr cosh(gL) + (z0^2 + zr^2) sinh(gL));
    // dividing through by cosh(gL) keeps everything bounded for large gL
    const cplx th = std::tanh(gamma * p.length);
    return (z0 * z0 - zr * zr) * th / (2.0 * z0 * zr + (z0 * z0 + zr * zr) * th);
}

// Dawson's integral. Maclaurin series near zero; elsewhere the sampled
// Gaussian sum
//   D(x) ~ (1/sqrt(pi)) sum_{n odd} exp(-(x - n h)^2) / n,
// whose error decays like exp(-(pi/(2h))^2); h = 0.2 puts that far below
// double precision.
double dawson(double w)
{
    const double x = std::abs(w);
    double d;
    if (x < 0.5) {
        // D(x) = sum_{n>=0} (-2)^n x^(2n+1) / (2n+1)!!
        double term = x;
        d = x;
        for (int n = 1; n < 40; ++n) {
            term *= -2.0 * x * x / (2.0 * n + 1.0);
            d += term;
            if (std::abs(term) < 1e-18)
                break;
        }
    } else {
        const double h = 0.2;
        const double inv_h = 1.0 / h;
        // odd n with |x - n h| below the Gaussian cutoff
        const double span = 6.5;
        long n_lo = std::lround(std::floor((x - span) * inv_h));
        long n_hi = std::lround(std::ceil((x + span) * inv_h));
        double acc = 0.0;
        if (n_lo % 2 == 0)
            ++n_lo;
        for (long n = n_lo; n <= n_hi; n += 2) {
            if (n == 0)
                continue;
            const double u = x - static_cast<double>(n) * h;
            acc += std::exp(-u * u) / static_cast<double>(n);
        }
        d = acc / std::sqrt(k_pi);
    }
    return w < 0.0 ? -d : d;
}

cplx dawson_response(double w, double t0)
{
    const cplx core(std::exp(-w * w), -2.0 / std::sqrt(k_pi) * dawson(w));
    return std::exp(cplx(0.0, -w * t0)) * core;
}

double stripline_closed_form_delay(double length_m, double eps_r)
{
    if (length_m <= 0.0)
        throw std::invalid_argument("length must be positive");
    if (eps_r < 1.0)
        throw std::invalid_argument("eps_r must be >= 1");
    const double c0 = 3.0e8;
    return length_m * std::sqrt(eps_r) / c0;
}

RescaledGrid add_sine_noise(const RescaledGrid& grid, const NoiseSpec& spec)
{
    if (spec.amplitude < 0.0)
        throw std::invalid_argument("noise amplitude must be non-negative");
    RescaledGrid out = grid;
    if (spec.amplitude == 0.0)
        return out;
    for (std::size_t j = 0; j < out.size(); ++j)
        out.values[j] += spec.amplitude * std::sin(spec.angular_factor * out.xs[j]);
    return out;
}

SampledResponse sample_four_pole(int n, const FourPoleParams& p, double w_max)
{
    if (n < 2)
        throw std::invalid_argument("need at least 2 samples");
    p.validate();
    SampledResponse resp;
    resp.label = "four-pole";
    for (int i = 0; i < n; ++i) {
        const double w = w_max * i / (n - 1);
        resp.freqs.push_back(w);
        resp.values.push_back(four_pole(w, p));
    }
    return resp;
}

SampledResponse sample_tline(int n, const RlgcParams& p, double t0_s, double f_max_hz)
{
    if (n < 2)
        throw std::invalid_argument("need at least 2 samples");
    p.validate();
    // Frequencies are uniform on (0, f_max], excluding DC. The physical S11
    // is evaluated at w = 2 pi f; the imposed delay multiplies by
    // exp(-i f T0), and the frequency column carries the f values, so the
    // delay reads as T0 seconds on that axis.
    SampledResponse resp;
    resp.label = "tline-S11";
    for (int i = 1; i <= n; ++i) {
        const double f = f_max_hz * i / n;
        resp.freqs.push_back(f);
        resp.values.push_back(std::exp(cplx(0.0, -f * t0_s)) * rlgc_s11(2.0 * k_pi * f, p));
    }
    return resp;
}

SampledResponse sample_dawson(int n, double t0, double w_max)
{
    if (n < 2)
        throw std::invalid_argument("need at least 2 samples");
    SampledResponse resp;
    resp.label = "dawson";
    for (int i = 0; i < n; ++i) {
        const double w = w_max * i / (n - 1);
        resp.freqs.push_back(w);
        resp.values.push_back(dawson_response(w, t0));
    }
    return resp;
}

} // namespace fcdelay
