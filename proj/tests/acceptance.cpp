// Acceptance gate: run as `acceptance <n>` for criterion n in 1..8.
// Each criterion prints exactly one PASS/FAIL line and sets the exit code.

#include <atomic>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <iostream>
#include <random>
#include <sstream>
#include <thread>
#include <vector>

#include "fcdelay/delay.hpp"
#include "fcdelay/ingest.hpp"
#include "fcdelay/synth.hpp"

using namespace fcdelay;

namespace {

constexpr double k_pi = 3.14159265358979323846;

struct Outcome {
    bool pass = false;
    std::string detail;
};

// ---------------------------------------------------------------- helpers

enum class DataKind { four_pole, tline, dawson_resp };

SampledResponse make_data(DataKind kind, int n)
{
    switch (kind) {
    case DataKind::four_pole: return sample_four_pole(n, FourPoleParams{});
    case DataKind::tline: return sample_tline(n, RlgcParams::paper_line(), 1.25e-9);
    default: return sample_dawson(n, 0.125);
    }
}

// Per-M experiments on matched data (n = M samples for each M), run on a
// small worker pool. Fit failures become failed entries, not aborts.
std::vector<PerMEstimate> run_per_m(DataKind kind, const std::vector<int>& m_list,
                                    const EstimateOptions& base, int threads,
                                    std::vector<ErrorCurve>* curves_out = nullptr)
{
    std::vector<PerMEstimate> results(m_list.size());
    std::vector<ErrorCurve> curves(m_list.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= m_list.size())
                return;
            const int m = m_list[i];
            try {
                const SampledResponse resp = make_data(kind, m);
                EstimateOptions opt = base;
                opt.parallel = 1;
                std::vector<ErrorCurve> cv;
                const DelayEstimate est = estimate_delay(resp, {m}, opt, &cv);
                results[i] = est.per_m[0];
                if (!cv.empty())
                    curves[i] = cv[0];
            } catch (const std::exception& ex) {
                results[i].M = m;
                results[i].failure = ex.what();
            }
        }
    };
    std::vector<std::thread> pool;
    const int nt = std::max(1, std::min<int>(threads, static_cast<int>(m_list.size())));
    for (int i = 0; i < nt; ++i)
        pool.emplace_back(worker);
    for (auto& th : pool)
        th.join();
    if (curves_out)
        *curves_out = std::move(curves);
    return results;
}

std::string per_m_summary(const std::vector<PerMEstimate>& per_m)
{
    std::ostringstream os;
    os.precision(5);
    for (const auto& e : per_m) {
        os << " M" << e.M << "=";
        if (e.failure.empty())
            os << e.estimate_s << (e.included ? "" : "(x)");
        else
            os << "fail";
    }
    return os.str();
}

const std::vector<int> k_full_m{200, 300, 400, 500, 600, 700, 800, 900, 1000, 1500};

// ---------------------------------------------------------------- criteria

Outcome criterion_1()
{
    Outcome out;
    ContinuationConfig cfg;

    cfg.M = 300;
    const RescaledGrid g300 = rescale_and_symmetrize(make_data(DataKind::four_pole, 300));
    const auto [c300, i300] = build_continuation(g300, cfg);
    const double e300 = reconstruction_error(g300, c300).err_re_inf;

    cfg.M = 800;
    const RescaledGrid g800 = rescale_and_symmetrize(make_data(DataKind::four_pole, 800));
    const auto [c800, i800] = build_continuation(g800, cfg);
    const double e800 = reconstruction_error(g800, c800).err_re_inf;

    std::ostringstream os;
    os.precision(3);
    os << "||E_R||inf M=300: " << e300 << " (want [1e-7,1e-5]), M=800: " << e800
       << " (want <=1e-11)";
    out.detail = os.str();
    out.pass = e300 >= 1e-7 && e300 <= 1e-5 && e800 <= 1e-11;
    return out;
}

Outcome criterion_2()
{
    Outcome out;
    EstimateOptions opt;
    opt.strategy = Strategy::extrapolate_to_xi;
    std::vector<PerMEstimate> per_m = run_per_m(DataKind::four_pole, k_full_m, opt, 4);
    double avg = 0.0;
    combine_estimates(per_m, opt.cfg.xi, avg);

    double m800 = 0.0;
    bool m800_ok = false;
    for (const auto& e : per_m)
        if (e.M == 800 && e.failure.empty()) {
            m800 = e.estimate_s;
            m800_ok = true;
        }

    std::ostringstream os;
    os.precision(5);
    os << "avg=" << avg << " (want 0.25 +/-3%), M800=" << m800
       << " (want 0.24969 +/-5%);" << per_m_summary(per_m);
    out.detail = os.str();
    out.pass = std::abs(avg - 0.25) <= 0.03 * 0.25 && m800_ok &&
               std::abs(m800 - 0.24969) <= 0.05 * 0.24969;
    return out;
}

Outcome criterion_3()
{
    Outcome out;
    EstimateOptions opt;
    opt.strategy = Strategy::extrapolate_to_xi;
    std::vector<PerMEstimate> per_m = run_per_m(DataKind::tline, k_full_m, opt, 4);
    double avg = 0.0;
    combine_estimates(per_m, opt.cfg.xi, avg);

    std::ostringstream os;
    os.precision(6);
    os << "avg=" << avg << " s (want 1.25e-9 +/-2%);" << per_m_summary(per_m);
    out.detail = os.str();
    out.pass = std::abs(avg - 1.25e-9) <= 0.02 * 1.25e-9;
    return out;
}

Outcome criterion_4()
{
    Outcome out;
    EstimateOptions opt;
    opt.strategy = Strategy::critical_time;
    std::vector<PerMEstimate> per_m =
        run_per_m(DataKind::dawson_resp, {200, 300, 400, 500, 600}, opt, 4);
    double avg = 0.0;
    combine_estimates(per_m, opt.cfg.xi, avg);

    std::ostringstream os;
    os.precision(5);
    os << "avg=" << avg << " (want 0.125 +/-5%);" << per_m_summary(per_m);
    out.detail = os.str();
    out.pass = std::abs(avg - 0.125) <= 0.05 * 0.125;
    return out;
}

Outcome criterion_5()
{
    Outcome out;
    std::ostringstream os;
    os.precision(5);
    bool pass = true;

    // the SVD cutoff is matched to the perturbation amplitude: filtering at
    // the noise floor is what restores a usable transition
    auto noise_run = [&](double amp, std::optional<double> narrow, double tol,
                         const char* tag) {
        EstimateOptions opt;
        opt.strategy = Strategy::extrapolate_to_xi;
        opt.cfg.xi = amp;
        opt.noise_amp = amp;
        opt.window.narrow = narrow;
        std::vector<ErrorCurve> curves;
        std::vector<PerMEstimate> per_m =
            run_per_m(DataKind::four_pole, k_full_m, opt, 4, &curves);
        double avg = 0.0;
        combine_estimates(per_m, opt.cfg.xi, avg);

        double plateau800 = 0.0;
        for (std::size_t i = 0; i < curves.size(); ++i)
            if (per_m[i].M == 800 && !curves[i].ts.empty())
                plateau800 = plateau_level(curves[i], opt.window);
        const bool avg_ok = std::abs(avg - 0.25) <= tol * 0.25;
        const bool plat_ok = plateau800 >= 0.1 * amp && plateau800 <= 10.0 * amp;
        os << tag << ": avg=" << avg << " (tol " << tol * 100 << "%), M800 plateau="
           << plateau800 << (avg_ok && plat_ok ? " ok; " : " BAD; ");
        pass = pass && avg_ok && plat_ok;
    };

    noise_run(1e-8, std::nullopt, 0.10, "amp1e-8");
    noise_run(1e-5, 0.6, 0.20, "amp1e-5");
    out.detail = os.str();
    out.pass = pass;
    return out;
}

Outcome criterion_6()
{
    Outcome out;
    const double t = stripline_closed_form_delay(8.0 * 0.0254, 3.45);
    const double rel = std::abs(t - 1.25809e-9) / 1.25809e-9;
    std::ostringstream os;
    os.precision(6);
    os << "stripline delay " << t << " s, rel. diff from 1.25809 ns = " << rel;
    out.detail = os.str();
    out.pass = rel < 5e-6;
    return out;
}

// -------- criterion 7: property suite ------------------------------------

void fft(std::vector<cplx>& a)
{
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1)
            j ^= bit;
        j ^= bit;
        if (i < j)
            std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const cplx wn = std::exp(cplx(0.0, -2.0 * k_pi / static_cast<double>(len)));
        for (std::size_t i = 0; i < n; i += len) {
            cplx w = 1.0;
            for (std::size_t k = 0; k < len / 2; ++k) {
                const cplx u = a[i + k];
                const cplx v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wn;
            }
        }
    }
}

RescaledGrid causal_sum_grid(const std::vector<double>& alphas, double b, int n_pos)
{
    RescaledGrid g;
    g.scale_a = 1.0;
    g.includes_zero = true;
    for (int i = -n_pos; i <= n_pos; ++i) {
        const double x = 0.5 * i / n_pos;
        cplx acc = 0.0;
        for (std::size_t k = 0; k < alphas.size(); ++k)
            acc += alphas[k] * std::exp(cplx(0.0, -2.0 * static_cast<double>(k) * x / b));
        g.xs.push_back(x);
        g.values.push_back(acc);
    }
    return g;
}

std::string sci(double v)
{
    std::ostringstream os;
    os.precision(3);
    os << std::scientific << v;
    return os.str();
}

bool prop_one_sided_spectrum(std::string& why)
{
    std::mt19937 rng(101);
    std::uniform_real_distribution<double> ua(-1.0, 1.0);
    std::vector<double> alphas(10);
    for (double& a : alphas)
        a = ua(rng);
    const double b = 2.0;
    ContinuationConfig cfg;
    cfg.M = 10;
    const auto [cont, info] = build_continuation(causal_sum_grid(alphas, b, 40), cfg);

    const std::size_t n = 1024;
    std::vector<double> xs(n);
    for (std::size_t j = 0; j < n; ++j)
        xs[j] = k_pi * b * static_cast<double>(j) / static_cast<double>(n);
    std::vector<cplx> s = evaluate_continuation(cont, xs);
    for (auto& v : s)
        v = std::conj(v);
    fft(s);
    double worst = 0.0;
    for (std::size_t m = 0; m < n; ++m) {
        const cplx coeff = std::conj(s[m]) / static_cast<double>(n);
        const double dev =
            m < alphas.size() ? std::abs(coeff - alphas[m]) : std::abs(coeff);
        worst = std::max(worst, dev);
    }
    why = "one-sided spectrum dev " + sci(worst);
    return worst < 1e-8;
}

bool prop_shift_equivariance(std::string& why)
{
    // equivariance holds for arbitrary data; random data keeps the
    // residuals O(1), so the relative comparison is well conditioned
    std::mt19937 rng(202);
    std::normal_distribution<double> gauss(0.0, 1.0);
    RescaledGrid g;
    g.scale_a = 1.0;
    g.includes_zero = true;
    const int n_pos = 200;
    for (int i = -n_pos; i <= n_pos; ++i) {
        g.xs.push_back(0.5 * i / n_pos);
        g.values.push_back(cplx(gauss(rng), gauss(rng)));
    }
    const double s = 1.5;
    const RescaledGrid shifted = apply_phase_shift(g, s);
    const std::vector<double> ts_a{0.0, 2.0, 3.0, 4.0, 5.0, 6.0, 8.0, 10.0};
    std::vector<double> ts_b{0.0};
    for (double t : ts_a)
        ts_b.push_back(t + s);
    ContinuationConfig cfg;
    cfg.M = 100;
    const ErrorCurve a = sweep_delay(shifted, cfg, ts_a);
    const ErrorCurve bb = sweep_delay(g, cfg, ts_b);
    double worst = 0.0;
    for (std::size_t i = 1; i < ts_a.size(); ++i)
        worst = std::max(worst, std::abs(a.errs[i] - bb.errs[i + 1]) / bb.errs[i + 1]);
    why = "shift equivariance rel dev " + sci(worst);
    return worst < 1e-12;
}

bool prop_randomized_causal(std::string& why)
{
    std::mt19937 rng(555);
    std::uniform_real_distribution<double> ua(-1.0, 1.0);
    std::uniform_int_distribution<int> um(3, 12);
    double worst_res = 0.0, worst_sym = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const int m = um(rng);
        std::vector<double> alphas(static_cast<std::size_t>(m));
        for (double& a : alphas)
            a = ua(rng);
        const RescaledGrid g = causal_sum_grid(alphas, 2.0, 25);
        ContinuationConfig cfg;
        cfg.M = m + 3;
        const auto [cont, info] = build_continuation(g, cfg);
        const ErrorSample err = reconstruction_error(g, cont);
        worst_res = std::max({worst_res, err.err_re_inf, err.err_im_inf});
        const std::size_t n = g.size();
        for (std::size_t i = 0; i < n; ++i) {
            worst_sym = std::max(
                worst_sym, std::abs(err.pointwise_re[i] - err.pointwise_re[n - 1 - i]));
            worst_sym = std::max(
                worst_sym, std::abs(err.pointwise_im[i] + err.pointwise_im[n - 1 - i]));
        }
    }
    why = "causal-input residual " + sci(worst_res) + ", symmetry dev " +
          sci(worst_sym);
    return worst_res < 1e-9 && worst_sym < 1e-10;
}

bool prop_dawson_ode(std::string& why)
{
    std::mt19937 rng(303);
    std::uniform_real_distribution<double> uw(-10.0, 10.0);
    const double h = 1e-5;
    double worst = 0.0;
    for (int i = 0; i < 50; ++i) {
        const double w = uw(rng);
        const double lhs = (dawson(w + h) - dawson(w - h)) / (2.0 * h);
        worst = std::max(worst, std::abs(lhs - (1.0 - 2.0 * w * dawson(w))));
    }
    why = "Dawson ODE residual " + sci(worst);
    return worst <= 1e-6;
}

bool prop_svd_vs_pinv(std::string& why)
{
    std::mt19937 rng(808);
    std::normal_distribution<double> gauss(0.0, 1.0);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        Eigen::MatrixXd A(14, 7);
        Eigen::VectorXd rhs(14);
        for (int r = 0; r < 14; ++r) {
            rhs(r) = gauss(rng);
            for (int c = 0; c < 7; ++c)
                A(r, c) = gauss(rng);
        }
        const auto [coeffs, info] =
            truncated_svd_solve(A, rhs, 1e-13, 2.0, {{-0.5, 0.5}});
        const Eigen::VectorXd ref =
            A.jacobiSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(rhs);
        worst = std::max(worst, (coeffs - ref).norm() / std::max(1.0, ref.norm()));
    }
    why = "SVD vs pseudoinverse dev " + sci(worst);
    return worst < 1e-8;
}

Outcome criterion_7()
{
    Outcome out;
    std::string why;
    bool pass = true;
    std::ostringstream os;
    for (auto [fn, name] : std::initializer_list<std::pair<bool (*)(std::string&), const char*>>{
             {prop_one_sided_spectrum, "spectrum"},
             {prop_shift_equivariance, "shift"},
             {prop_randomized_causal, "causal"},
             {prop_dawson_ode, "dawson-ode"},
             {prop_svd_vs_pinv, "svd"}}) {
        const bool ok = fn(why);
        os << name << (ok ? " ok (" : " BAD (") << why << "); ";
        pass = pass && ok;
    }
    out.detail = os.str();
    out.pass = pass;
    return out;
}

Outcome criterion_8()
{
    Outcome out;
    const char* ri = "# Hz S RI R 50\n1.0e9 0.5 0.0\n2.0e9 0.0 0.5\n";
    const char* ma = "# Hz S MA R 50\n1.0e9 0.5 0.0\n2.0e9 0.5 90.0\n";
    const char* db = "# Hz S DB R 50\n"
                     "1.0e9 -6.0205999132796239 0.0\n"
                     "2.0e9 -6.0205999132796239 90.0\n";
    const Network a = parse_touchstone(ri, 1);
    const Network b = parse_touchstone(ma, 1);
    const Network c = parse_touchstone(db, 1);
    double dev = 0.0;
    for (std::size_t f = 0; f < 2; ++f) {
        dev = std::max(dev, std::abs(a.s[f][0] - b.s[f][0]));
        dev = std::max(dev, std::abs(a.s[f][0] - c.s[f][0]));
        dev = std::max(dev, std::abs(a.freqs_hz[f] - b.freqs_hz[f]));
        dev = std::max(dev, std::abs(a.freqs_hz[f] - c.freqs_hz[f]));
    }

    Report r;
    r.input = "fixture.s1p";
    r.strategy = "extrapolate";
    r.m_list = {200, 800};
    ReportElement el;
    el.element = "S11";
    PerMEstimate pm;
    pm.M = 200;
    pm.estimate_s = 0.2498765;
    pm.plateau = 2.5e-14;
    pm.included = true;
    pm.fit.a0 = -1.5;
    pm.fit.a1 = 0.0625;
    pm.fit.a2 = 1e-4;
    pm.fit.win_lo = 33;
    pm.fit.win_hi = 57;
    pm.fit.rms_residual = 0.0125;
    PerMEstimate fail;
    fail.M = 800;
    fail.failure = "no growth region detected";
    el.per_m = {pm, fail};
    el.averaged_s = 0.2498765;
    el.verdict = "causal up to the estimated delay";
    r.elements.push_back(el);
    const std::string once = serialize_report(r);
    const std::string twice = serialize_report(parse_report(once));
    const bool stable = once == twice;

    std::ostringstream os;
    os << "format equivalence dev " << dev << ", report.json round trip "
       << (stable ? "byte-stable" : "NOT byte-stable");
    out.detail = os.str();
    out.pass = dev < 1e-12 && stable;
    return out;
}

} // namespace

int main(int argc, char** argv)
{
    if (argc != 2) {
        std::cerr << "usage: acceptance <criterion 1..8>\n";
        return 2;
    }
    const int n = std::atoi(argv[1]);
    Outcome out;
    try {
        switch (n) {
        case 1: out = criterion_1(); break;
        case 2: out = criterion_2(); break;
        case 3: out = criterion_3(); break;
        case 4: out = criterion_4(); break;
        case 5: out = criterion_5(); break;
        case 6: out = criterion_6(); break;
        case 7: out = criterion_7(); break;
        case 8: out = criterion_8(); break;
        default:
            std::cerr << "usage: acceptance <criterion 1..8>\n";
            return 2;
        }
    } catch (const std::exception& ex) {
        out.pass = false;
        out.detail = std::string("exception: ") + ex.what();
    }
    std::cout << "criterion " << n << ": " << (out.pass ? "PASS" : "FAIL") << " - "
              << out.detail << "\n";
    return out.pass ? 0 : 1;
}
