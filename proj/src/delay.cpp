#include "fcdelay/delay.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <thread>

namespace fcdelay {

RescaledGrid apply_phase_shift(const RescaledGrid& grid, double t_scaled)
{
    if (t_scaled < 0.0)
        throw std::invalid_argument("trial delay must be non-negative");
    RescaledGrid out = grid;
    for (std::size_t j = 0; j < out.size(); ++j) {
        const double arg = out.xs[j] * t_scaled;
        out.values[j] *= cplx(std::cos(arg), std::sin(arg));
    }
    return out;
}

std::vector<double> default_t_grid(int n)
{
    if (n < 8)
        throw std::invalid_argument("t-grid needs at least 8 points");
    std::vector<double> ts;
    ts.reserve(static_cast<std::size_t>(n));
    ts.push_back(0.0);
    const double lo = std::log10(k_t_max * 1e-3);
    const double hi = std::log10(k_t_max);
    for (int i = 0; i < n - 1; ++i)
        ts.push_back(std::pow(10.0, lo + (hi - lo) * i / (n - 2)));
    ts.back() = k_t_max;
    return ts;
}

ErrorCurve sweep_delay(const RescaledGrid& grid, const ContinuationConfig& cfg,
                       const std::vector<double>& t_grid)
{
    cfg.validate();
    if (t_grid.empty() || t_grid.front() != 0.0)
        throw std::invalid_argument("t-grid must start at 0");
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
        if (t_grid[i] < 0.0 || t_grid[i] > k_t_max + 1e-12)
            throw std::invalid_argument("trial delay outside [0, 4pi]");
        if (i > 0 && t_grid[i] < t_grid[i - 1])
            throw std::invalid_argument("t-grid must be non-decreasing");
    }

    RealSystem sys = assemble_real_system(grid, cfg);
    // same accuracy consideration as in truncated_svd_solve: JacobiSVD keeps
    // the small singular directions that BDCSVD mangles on these systems
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(sys.A, Eigen::ComputeThinU);
    const Eigen::VectorXd& sigma = svd.singularValues();
    if (sigma.size() == 0 || !std::isfinite(sigma(0)))
        throw std::runtime_error("SVD failed to converge");
    Eigen::Index kept = 0;
    while (kept < sigma.size() && sigma(kept) >= cfg.xi * sigma(0))
        ++kept;
    const Eigen::MatrixXd Uk = svd.matrixU().leftCols(kept);

    const auto n = static_cast<Eigen::Index>(sys.n_samples);
    ErrorCurve curve;
    curve.M = cfg.M;
    curve.ts = t_grid;
    curve.scale_a = grid.scale_a;
    curve.errs.resize(t_grid.size());
    curve.errs_im.resize(t_grid.size());

    Eigen::VectorXd rhs(2 * n);
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
        const double t = t_grid[i];
        for (Eigen::Index j = 0; j < n; ++j) {
            const std::size_t sj = static_cast<std::size_t>(j);
            const double arg = grid.xs[sj] * t;
            const cplx v = grid.values[sj] * cplx(std::cos(arg), std::sin(arg));
            rhs(j) = v.real();
            rhs(n + j) = v.imag();
        }
        // residual of the truncated least-squares fit: (I - Uk Uk^T) rhs.
        // The projector is applied twice: the computed U is orthonormal only
        // to ~1e-14, and the second pass scrubs the leaked component so the
        // plateau reflects the data, not the SVD round-off.
        Eigen::VectorXd r = rhs - Uk * (Uk.transpose() * rhs);
        r -= Uk * (Uk.transpose() * r);
        curve.errs[i] = r.head(n).cwiseAbs().maxCoeff();
        curve.errs_im[i] = r.tail(n).cwiseAbs().maxCoeff();
        // exact zeros would break the log-log fit downstream
        const double eps = std::numeric_limits<double>::epsilon();
        curve.errs[i] = std::max(curve.errs[i], eps);
        curve.errs_im[i] = std::max(curve.errs_im[i], eps);
    }
    return curve;
}

double plateau_level(const ErrorCurve& curve, const WindowPolicy& policy)
{
    const std::size_t n = curve.errs.size();
    const std::size_t head = std::max<std::size_t>(
        1, static_cast<std::size_t>(policy.plateau_fraction * static_cast<double>(n)));
    std::vector<double> lead(curve.errs.begin(), curve.errs.begin() + static_cast<long>(head));
    std::sort(lead.begin(), lead.end());
    const std::size_t mid = lead.size() / 2;
    return lead.size() % 2 ? lead[mid] : 0.5 * (lead[mid - 1] + lead[mid]);
}

QuadraticFit fit_growth_region(const ErrorCurve& curve, const WindowPolicy& policy)
{
    const std::size_t n = curve.errs.size();
    if (n < 8)
        throw std::invalid_argument("curve too short");
    const double plateau = plateau_level(curve, policy);
    const double thresh = policy.threshold_mult * plateau;

    // longest contiguous run above threshold
    std::size_t best_lo = 0, best_hi = 0;
    for (std::size_t i = 0; i < n;) {
        if (curve.errs[i] > thresh) {
            std::size_t j = i;
            while (j < n && curve.errs[j] > thresh)
                ++j;
            if (j - i > best_hi - best_lo) {
                best_lo = i;
                best_hi = j;
            }
            i = j;
        } else {
            ++i;
        }
    }
    if (best_hi - best_lo < 4)
        throw no_transition_error("no growth region detected");

    // cut at the first local maximum to stay clear of the nonlinear tail
    for (std::size_t i = best_lo + 1; i + 1 < best_hi; ++i) {
        if (curve.errs[i] > curve.errs[i + 1]) {
            best_hi = i + 1;
            break;
        }
    }
    if (policy.narrow && best_hi - best_lo >= 7) {
        const std::size_t w = best_hi - best_lo;
        const std::size_t keep = std::max<std::size_t>(
            4, static_cast<std::size_t>(std::lround(*policy.narrow * static_cast<double>(w))));
        const std::size_t off = (w - keep) / 2;
        best_lo += off;
        best_hi = best_lo + keep;
    }
    if (best_hi - best_lo < 4)
        throw no_transition_error("growth region too short to fit");

    // least squares for ln T = a2 z^2 + a1 z + a0, z = ln ||E_R||inf
    const auto m = static_cast<Eigen::Index>(best_hi - best_lo);
    Eigen::MatrixXd X(m, 3);
    Eigen::VectorXd y(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        const std::size_t idx = best_lo + static_cast<std::size_t>(i);
        const double z = std::log(curve.errs[idx]);
        X(i, 0) = z * z;
        X(i, 1) = z;
        X(i, 2) = 1.0;
        y(i) = std::log(curve.ts[idx]);
    }
    const Eigen::VectorXd c = X.colPivHouseholderQr().solve(y);

    QuadraticFit fit;
    fit.a2 = c(0);
    fit.a1 = c(1);
    fit.a0 = c(2);
    fit.win_lo = best_lo;
    fit.win_hi = best_hi;
    fit.rms_residual = std::sqrt((X * c - y).squaredNorm() / static_cast<double>(m));
    return fit;
}

// Evaluates the fit at ln(e) = zx. When the quadratic is non-monotone and
// the target lies past the vertex, the evaluation stays on the branch that
// contains the fitted data: it is clamped to the vertex.
static double eval_fit(const QuadraticFit& fit, const ErrorCurve& curve, double zx)
{
    double z_min = std::numeric_limits<double>::infinity();
    for (std::size_t i = fit.win_lo; i < fit.win_hi; ++i)
        z_min = std::min(z_min, std::log(curve.errs[i]));
    if (fit.a2 > 1e-12) {
        const double vertex = -fit.a1 / (2.0 * fit.a2);
        if (zx < vertex && vertex < z_min)
            zx = vertex;
    }
    return std::exp(fit.a2 * zx * zx + fit.a1 * zx + fit.a0);
}

double extrapolate_to_threshold(const QuadraticFit& fit, double xi)
{
    if (std::abs(fit.a1) < 1e-14 && std::abs(fit.a2) < 1e-14)
        throw degenerate_fit_error("flat fit; cannot extrapolate");
    // the clamp needs the window errors; reconstruct the minimal context
    const double zx = std::log(xi);
    // without curve context: clamp using the vertex only when it improves
    if (fit.a2 > 1e-12) {
        const double vertex = -fit.a1 / (2.0 * fit.a2);
        if (zx < vertex)
            return std::exp(fit.a2 * vertex * vertex + fit.a1 * vertex + fit.a0);
    }
    return std::exp(fit.a2 * zx * zx + fit.a1 * zx + fit.a0);
}

double critical_time(const QuadraticFit& fit, const ErrorCurve& curve,
                     const WindowPolicy& policy, double xi)
{
    const double e0 = curve.errs.front();
    const double plateau = plateau_level(curve, policy);
    // e0 is "the most causal" level only while the curve is actually flat
    // there; otherwise fall back to the filtering threshold
    const double zx = (e0 <= 10.0 * plateau) ? std::log(e0) : std::log(xi);
    return eval_fit(fit, curve, zx);
}

static double extrapolate_with_curve(const QuadraticFit& fit, const ErrorCurve& curve, double xi)
{
    if (std::abs(fit.a1) < 1e-14 && std::abs(fit.a2) < 1e-14)
        throw degenerate_fit_error("flat fit; cannot extrapolate");
    return eval_fit(fit, curve, std::log(xi));
}

void combine_estimates(std::vector<PerMEstimate>& per_m, double xi, double& averaged_out)
{
    std::vector<std::size_t> ok;
    for (std::size_t i = 0; i < per_m.size(); ++i) {
        per_m[i].included = false;
        if (per_m[i].failure.empty() && per_m[i].plateau < 10.0 * xi)
            ok.push_back(i);
    }
    if (!ok.empty()) {
        // keep the best 90% by fit quality
        std::vector<double> rms;
        for (std::size_t i : ok)
            rms.push_back(per_m[i].fit.rms_residual);
        std::sort(rms.begin(), rms.end());
        const std::size_t keep = std::max<std::size_t>(
            1, static_cast<std::size_t>(std::ceil(0.9 * static_cast<double>(ok.size()))));
        const double cutoff = rms[keep - 1];
        for (std::size_t i : ok)
            per_m[i].included = per_m[i].fit.rms_residual <= cutoff;
    } else {
        for (auto& e : per_m)
            e.included = e.failure.empty();
    }

    double sum = 0.0;
    std::size_t cnt = 0;
    for (const auto& e : per_m)
        if (e.included) {
            sum += e.estimate_s;
            ++cnt;
        }
    averaged_out = cnt ? sum / static_cast<double>(cnt) : 0.0;
}

DelayEstimate estimate_delay(const SampledResponse& resp, const std::vector<int>& m_list,
                             const EstimateOptions& opt,
                             std::vector<ErrorCurve>* curves_out)
{
    if (m_list.empty())
        throw std::invalid_argument("m_list must be non-empty");
    RescaledGrid grid = rescale_and_symmetrize(resp);
    if (opt.noise_amp > 0.0)
        for (std::size_t j = 0; j < grid.size(); ++j)
            grid.values[j] += opt.noise_amp * std::sin(opt.noise_angular * grid.xs[j]);
    for (int m : m_list)
        if (static_cast<std::size_t>(m) > resp.size())
            throw std::invalid_argument("M exceeds the available sample count");

    const std::vector<double> ts = default_t_grid(opt.t_grid_size);
    std::vector<PerMEstimate> results(m_list.size());
    std::vector<ErrorCurve> curves(m_list.size());

    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= m_list.size())
                return;
            PerMEstimate& out = results[i];
            out.M = m_list[i];
            out.strategy = opt.strategy;
            try {
                ContinuationConfig cfg = opt.cfg;
                cfg.M = m_list[i];
                curves[i] = sweep_delay(grid, cfg, ts);
                const ErrorCurve& curve = curves[i]; // retained even if the fit fails
                out.plateau = plateau_level(curve, opt.window);
                out.fit = fit_growth_region(curve, opt.window);
                const double t_scaled =
                    opt.strategy == Strategy::critical_time
                        ? critical_time(out.fit, curve, opt.window, cfg.xi)
                        : extrapolate_with_curve(out.fit, curve, cfg.xi);
                out.estimate_s = unscale_delay(t_scaled, grid.scale_a);
            } catch (const std::exception& ex) {
                out.failure = ex.what();
            }
        }
    };

    const int threads = std::max(1, opt.parallel);
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < threads; ++i)
            pool.emplace_back(worker);
        for (auto& th : pool)
            th.join();
    }

    DelayEstimate est;
    est.strategy = opt.strategy;
    est.per_m = std::move(results);
    combine_estimates(est.per_m, opt.cfg.xi, est.averaged_s);

    bool any_ok = false;
    for (const auto& e : est.per_m)
        any_ok = any_ok || e.failure.empty();
    if (!any_ok)
        throw no_transition_error("all M failed to produce a delay estimate");

    if (curves_out)
        *curves_out = std::move(curves);
    return est;
}

} // namespace fcdelay
