#pragma once

#include <Eigen/Dense>
#include <utility>

#include "spectrum.hpp"

namespace fcdelay {

enum class Formulation { real, complex };

struct ContinuationConfig {
    int M = 0;
    double b = 2.0;
    double xi = 1e-13;
    Formulation formulation = Formulation::real;

    void validate() const;
};

// Causal continuation C(H)(x) = sum_{k=1}^{M} alpha_k phi_k(x) with the
// causal basis phi_k(x) = exp(-2i(k-1)x/b). All delays represented by the
// basis are non-negative, so the continuation is causal by construction.
struct CausalContinuation {
    Eigen::VectorXd alphas;
    double b = 2.0;
    double scale_a = 0.0;
    // complex formulation only: largest |Im alpha_k| that was dropped
    double max_imag_dropped = 0.0;
};

struct SvdInfo {
    Eigen::VectorXd singular_values; // non-increasing
    int K = 0;                       // number of discarded singular values
    double Lambda1 = 0.0;
    double Lambda2 = 0.0;
    bool lambda1_empty = false; // K == 0, Lambda1 is a max over nothing
    double residual_norm = 0.0;
    // right singular vectors, kept for the bound-constant computation
    Eigen::MatrixXd V;
    double threshold = 0.0;
};

struct ErrorSample {
    double err_re_inf = 0.0;
    double err_im_inf = 0.0;
    double err_re_l2 = 0.0;
    double err_im_l2 = 0.0;
    std::vector<double> pointwise_re;
    std::vector<double> pointwise_im;
};

// Union of closed intervals on [-0.5, 0.5]; the data domain Omega.
using IntervalUnion = std::vector<std::pair<double, double>>;

// Design matrix + right-hand side for the least-squares continuation.
// Real formulation: (2N~ x M) real matrix stacking Re phi rows then Im phi
// rows, rhs stacks Re H then Im H.
struct RealSystem {
    Eigen::MatrixXd A;
    Eigen::VectorXd rhs;
    std::size_t n_samples = 0; // N~; rows = 2*N~
};

struct ComplexSystem {
    Eigen::MatrixXcd A;
    Eigen::VectorXcd rhs;
};

RealSystem assemble_real_system(const RescaledGrid& grid, const ContinuationConfig& cfg);
ComplexSystem assemble_complex_system(const RescaledGrid& grid, const ContinuationConfig& cfg);

// Truncated-SVD least squares: directions with sigma < xi * sigma_max are
// discarded. Lambda1/Lambda2 are computed over Omega inferred from the grid.
std::pair<Eigen::VectorXd, SvdInfo>
truncated_svd_solve(const Eigen::MatrixXd& A, const Eigen::VectorXd& rhs, double xi,
                    double b, const IntervalUnion& omega);

std::pair<CausalContinuation, SvdInfo>
build_continuation(const RescaledGrid& grid, const ContinuationConfig& cfg);

std::vector<cplx> evaluate_continuation(const CausalContinuation& cont,
                                        const std::vector<double>& xs);

ErrorSample reconstruction_error(const RescaledGrid& grid, const CausalContinuation& cont);

// Omega covered by a symmetrized grid: [-0.5,-a*] u [a*,0.5], or the full
// interval when the grid includes x = 0.
IntervalUnion grid_omega(const RescaledGrid& grid);

// L2(Omega) norm of v_j(x) = sum_k V(k,j) phi_k(x) via the closed-form
// inner products of exponentials over the interval union.
double vj_norm_l2(const Eigen::MatrixXd& V, int j, double b, const IntervalUnion& omega);

struct BoundConstants {
    double Lambda1 = 0.0;
    double Lambda2 = 0.0;
    int K = 0;
    bool lambda1_empty = false;
};

BoundConstants bound_constants(const SvdInfo& info, const ContinuationConfig& cfg,
                               const IntervalUnion& omega);

struct ErrorBudget {
    double eps_F_factor = 0.0; // (1 + Lambda2 * sqrt(2N(M-K))); ||H - H_M|| is unknowable
    double eps_T = 0.0;
    double eps_n = 0.0;
};

ErrorBudget error_budget(const SvdInfo& info, const ContinuationConfig& cfg,
                         std::size_t n_samples, double noise_inf,
                         const CausalContinuation& cont, const IntervalUnion& omega);

} // namespace fcdelay
