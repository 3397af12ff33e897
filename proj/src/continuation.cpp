#include "fcdelay/continuation.hpp"

#include <Eigen/SVD>
#include <cmath>

namespace fcdelay {

void ContinuationConfig::validate() const
{
    if (M < 1)
        throw std::invalid_argument("M must be >= 1");
    if (!(b > 1.0 && b <= 4.0))
        throw std::invalid_argument("b must lie in (1, 4]");
    if (!(xi > 0.0 && xi < 1.0))
        throw std::invalid_argument("xi must lie in (0, 1)");
}

// The causal basis used throughout: phi_k(x) = exp(-2i(k-1)x/b), k = 1..M.
// Successive terms are spaced 2/b apart in scaled delay, and the k = 1 term
// carries zero delay so that causal content below the first oscillatory
// mode needs no extrapolation off the delay lattice.
static inline cplx phi(int k, double x, double b)
{
    const double arg = -2.0 * (k - 1) * x / b;
    return cplx(std::cos(arg), std::sin(arg));
}

ComplexSystem assemble_complex_system(const RescaledGrid& grid, const ContinuationConfig& cfg)
{
    cfg.validate();
    const auto n = static_cast<Eigen::Index>(grid.size());
    if (n < cfg.M)
        throw std::invalid_argument("underdetermined system: fewer samples than coefficients");
    ComplexSystem sys;
    sys.A.resize(n, cfg.M);
    sys.rhs.resize(n);
    for (Eigen::Index j = 0; j < n; ++j) {
        sys.rhs(j) = grid.values[static_cast<std::size_t>(j)];
        for (int k = 1; k <= cfg.M; ++k)
            sys.A(j, k - 1) = phi(k, grid.xs[static_cast<std::size_t>(j)], cfg.b);
    }
    return sys;
}

RealSystem assemble_real_system(const RescaledGrid& grid, const ContinuationConfig& cfg)
{
    ComplexSystem c = assemble_complex_system(grid, cfg);
    const Eigen::Index n = c.A.rows();
    RealSystem sys;
    sys.n_samples = static_cast<std::size_t>(n);
    sys.A.resize(2 * n, cfg.M);
    sys.A.topRows(n) = c.A.real();
    sys.A.bottomRows(n) = c.A.imag();
    sys.rhs.resize(2 * n);
    sys.rhs.head(n) = c.rhs.real();
    sys.rhs.tail(n) = c.rhs.imag();
    return sys;
}

IntervalUnion grid_omega(const RescaledGrid& grid)
{
    if (grid.includes_zero)
        return {{-0.5, 0.5}};
    // bandpass grid: gap around zero up to the smallest positive sample
    double a_star = 0.5;
    for (double x : grid.xs)
        if (x > 0.0 && x < a_star)
            a_star = x;
    return {{-0.5, -a_star}, {a_star, 0.5}};
}

// integral of exp(-2i m x / b) over the union; real part only (the unions
// used here are symmetric, so the imaginary parts cancel)
static double exp_integral(int m, double b, const IntervalUnion& omega)
{
    double total = 0.0;
    const double c = 2.0 * m / b;
    for (const auto& [lo, hi] : omega) {
        if (m == 0) {
            total += hi - lo;
        } else {
            // Re of (exp(-ic*hi) - exp(-ic*lo)) / (-ic)
            total += (std::sin(c * hi) - std::sin(c * lo)) / c;
        }
    }
    return total;
}

// table[d] = integral of exp(-2i d x / b) over Omega, d = 0..M-1 (real part;
// the integral for -d is identical by symmetry of Omega)
static std::vector<double> exp_integral_table(int M, double b, const IntervalUnion& omega)
{
    std::vector<double> table(static_cast<std::size_t>(M));
    for (int d = 0; d < M; ++d)
        table[static_cast<std::size_t>(d)] = exp_integral(d, b, omega);
    return table;
}

static double vj_norm_from_table(const Eigen::MatrixXd& V, int j,
                                 const std::vector<double>& table)
{
    const int M = static_cast<int>(V.rows());
    double acc = 0.0;
    for (int k = 0; k < M; ++k) {
        acc += V(k, j) * V(k, j) * table[0];
        for (int m = k + 1; m < M; ++m)
            acc += 2.0 * V(k, j) * V(m, j) * table[static_cast<std::size_t>(m - k)];
    }
    return std::sqrt(std::max(acc, 0.0));
}

double vj_norm_l2(const Eigen::MatrixXd& V, int j, double b, const IntervalUnion& omega)
{
    return vj_norm_from_table(V, j, exp_integral_table(static_cast<int>(V.rows()), b, omega));
}

std::pair<Eigen::VectorXd, SvdInfo>
truncated_svd_solve(const Eigen::MatrixXd& A, const Eigen::VectorXd& rhs, double xi,
                    double b, const IntervalUnion& omega)
{
    if (!(xi > 0.0 && xi < 1.0))
        throw std::invalid_argument("xi must lie in (0, 1)");
    // JacobiSVD rather than BDCSVD: the divide-and-conquer kernel loses the
    // small singular subspace of these extremely ill-conditioned systems
    // (observed residual floors of 1e-5 where 1e-14 is attainable)
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& sigma = svd.singularValues();
    const Eigen::Index r = sigma.size();
    if (r == 0 || !std::isfinite(sigma(0)))
        throw std::runtime_error("SVD failed to converge");

    SvdInfo info;
    info.singular_values = sigma;
    info.V = svd.matrixV();
    info.threshold = xi * sigma(0);

    Eigen::Index kept = 0;
    while (kept < r && sigma(kept) >= info.threshold)
        ++kept;
    info.K = static_cast<int>(r - kept);
    info.lambda1_empty = info.K == 0;

    Eigen::VectorXd beta = svd.matrixU().leftCols(kept).transpose() * rhs;
    for (Eigen::Index i = 0; i < kept; ++i)
        beta(i) /= sigma(i);
    Eigen::VectorXd coeffs = svd.matrixV().leftCols(kept) * beta;

    info.residual_norm = (A * coeffs - rhs).norm();

    const auto table = exp_integral_table(static_cast<int>(info.V.rows()), b, omega);
    double l1 = 0.0;
    for (Eigen::Index j = kept; j < r; ++j)
        l1 = std::max(l1, vj_norm_from_table(info.V, static_cast<int>(j), table));
    info.Lambda1 = l1;
    double l2 = 0.0;
    for (Eigen::Index j = 0; j < kept; ++j)
        l2 = std::max(l2, vj_norm_from_table(info.V, static_cast<int>(j), table) / sigma(j));
    info.Lambda2 = l2;

    return {std::move(coeffs), std::move(info)};
}

std::pair<CausalContinuation, SvdInfo>
build_continuation(const RescaledGrid& grid, const ContinuationConfig& cfg)
{
    cfg.validate();
    const IntervalUnion omega = grid_omega(grid);
    CausalContinuation cont;
    cont.b = cfg.b;
    cont.scale_a = grid.scale_a;

    if (cfg.formulation == Formulation::real) {
        RealSystem sys = assemble_real_system(grid, cfg);
        auto [coeffs, info] = truncated_svd_solve(sys.A, sys.rhs, cfg.xi, cfg.b, omega);
        cont.alphas = std::move(coeffs);
        return {std::move(cont), std::move(info)};
    }

    // complex formulation: solve the complex system as an equivalent real
    // block system, then keep the real parts of the coefficients
    ComplexSystem c = assemble_complex_system(grid, cfg);
    const Eigen::Index n = c.A.rows();
    Eigen::MatrixXd A(2 * n, 2 * cfg.M);
    A.topLeftCorner(n, cfg.M) = c.A.real();
    A.topRightCorner(n, cfg.M) = -c.A.imag();
    A.bottomLeftCorner(n, cfg.M) = c.A.imag();
    A.bottomRightCorner(n, cfg.M) = c.A.real();
    Eigen::VectorXd rhs(2 * n);
    rhs.head(n) = c.rhs.real();
    rhs.tail(n) = c.rhs.imag();
    auto [coeffs, info] = truncated_svd_solve(A, rhs, cfg.xi, cfg.b, omega);
    cont.alphas = coeffs.head(cfg.M);
    cont.max_imag_dropped = coeffs.tail(cfg.M).cwiseAbs().maxCoeff();
    return {std::move(cont), std::move(info)};
}

std::vector<cplx> evaluate_continuation(const CausalContinuation& cont,
                                        const std::vector<double>& xs)
{
    std::vector<cplx> out;
    out.reserve(xs.size());
    const int M = static_cast<int>(cont.alphas.size());
    for (double x : xs) {
        cplx acc = 0.0;
        for (int k = 1; k <= M; ++k)
            acc += cont.alphas(k - 1) * phi(k, x, cont.b);
        out.push_back(acc);
    }
    return out;
}

ErrorSample reconstruction_error(const RescaledGrid& grid, const CausalContinuation& cont)
{
    ErrorSample err;
    const std::vector<cplx> recon = evaluate_continuation(cont, grid.xs);
    err.pointwise_re.reserve(grid.size());
    err.pointwise_im.reserve(grid.size());
    double sr = 0.0, si = 0.0;
    for (std::size_t j = 0; j < grid.size(); ++j) {
        const double dr = grid.values[j].real() - recon[j].real();
        const double di = grid.values[j].imag() - recon[j].imag();
        err.pointwise_re.push_back(dr);
        err.pointwise_im.push_back(di);
        err.err_re_inf = std::max(err.err_re_inf, std::abs(dr));
        err.err_im_inf = std::max(err.err_im_inf, std::abs(di));
        sr += dr * dr;
        si += di * di;
    }
    err.err_re_l2 = std::sqrt(sr);
    err.err_im_l2 = std::sqrt(si);
    return err;
}

BoundConstants bound_constants(const SvdInfo& info, const ContinuationConfig& cfg,
                               const IntervalUnion& omega)
{
    BoundConstants out;
    out.K = info.K;
    out.lambda1_empty = info.K == 0;
    const Eigen::Index r = info.singular_values.size();
    const Eigen::Index kept = r - info.K;
    const auto table = exp_integral_table(static_cast<int>(info.V.rows()), cfg.b, omega);
    double l1 = 0.0;
    for (Eigen::Index j = kept; j < r; ++j)
        l1 = std::max(l1, vj_norm_from_table(info.V, static_cast<int>(j), table));
    out.Lambda1 = l1;
    double l2 = 0.0;
    for (Eigen::Index j = 0; j < kept; ++j)
        l2 = std::max(l2, vj_norm_from_table(info.V, static_cast<int>(j), table) /
                              info.singular_values(j));
    out.Lambda2 = l2;
    return out;
}

ErrorBudget error_budget(const SvdInfo& info, const ContinuationConfig& cfg,
                         std::size_t n_samples, double noise_inf,
                         const CausalContinuation& cont, const IntervalUnion& omega)
{
    ErrorBudget budget;
    const double mk = static_cast<double>(cfg.M - info.K);
    budget.eps_F_factor = 1.0 + info.Lambda2 * std::sqrt(2.0 * n_samples * mk);
    budget.eps_n = noise_inf * budget.eps_F_factor;

    if (info.K > 0) {
        // sup of |C(H)| outside Omega, on a dense grid over [-b/2, b/2]
        const int dense = 8 * cfg.M;
        double sup = 0.0;
        for (int i = 0; i <= dense; ++i) {
            const double x = -0.5 * cfg.b + cfg.b * i / dense;
            bool inside = false;
            for (const auto& [lo, hi] : omega)
                inside = inside || (x >= lo && x <= hi);
            if (inside)
                continue;
            const cplx v = evaluate_continuation(cont, {x})[0];
            sup = std::max(sup, std::abs(v));
        }
        budget.eps_T = info.Lambda1 * std::sqrt(static_cast<double>(info.K) / cfg.b) * sup;
    }
    return budget;
}

} // namespace fcdelay
