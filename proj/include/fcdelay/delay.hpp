#pragma once

#include <optional>

#include "continuation.hpp"

namespace fcdelay {

inline constexpr double k_t_max = 4.0 * 3.14159265358979323846; // largest unaliased scaled delay

struct ErrorCurve {
    int M = 0;
    std::vector<double> ts;      // scaled trial delays, in [0, 4pi], ts[0] == 0
    std::vector<double> errs;    // ||E_R||inf per trial delay
    std::vector<double> errs_im; // ||E_I||inf track
    double scale_a = 0.0;
};

struct QuadraticFit {
    // ln T = a2 (ln e)^2 + a1 (ln e) + a0
    double a0 = 0.0, a1 = 0.0, a2 = 0.0;
    std::size_t win_lo = 0, win_hi = 0; // half-open index range of fitted points
    double rms_residual = 0.0;
};

struct WindowPolicy {
    double plateau_fraction = 0.15; // leading fraction of the t-grid defining the plateau
    double threshold_mult = 10.0;   // growth = errs above threshold_mult * plateau
    std::optional<double> narrow;   // keep only this central fraction of the window
};

struct no_transition_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct degenerate_fit_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Strategy { critical_time, extrapolate_to_xi };

struct PerMEstimate {
    int M = 0;
    double estimate_s = 0.0;
    Strategy strategy = Strategy::extrapolate_to_xi;
    QuadraticFit fit;
    double plateau = 0.0;
    bool included = false; // participates in the average
    std::string failure;   // non-empty when this M produced no estimate
};

struct DelayEstimate {
    std::vector<PerMEstimate> per_m;
    double averaged_s = 0.0;
    Strategy strategy = Strategy::extrapolate_to_xi;
};

RescaledGrid apply_phase_shift(const RescaledGrid& grid, double t_scaled);

// Default trial-delay grid: t = 0 plus n-1 log-spaced points on [4pi*1e-3, 4pi].
std::vector<double> default_t_grid(int n);

// Error curve over the trial-delay grid. The design matrix depends only on
// the sample locations, so its SVD is computed once and reused for every t.
ErrorCurve sweep_delay(const RescaledGrid& grid, const ContinuationConfig& cfg,
                       const std::vector<double>& t_grid);

double plateau_level(const ErrorCurve& curve, const WindowPolicy& policy);

QuadraticFit fit_growth_region(const ErrorCurve& curve, const WindowPolicy& policy);

// Evaluates the fit at the T=0 error level when the curve is flat there;
// falls back to the filtering threshold xi when it is not.
double critical_time(const QuadraticFit& fit, const ErrorCurve& curve,
                     const WindowPolicy& policy, double xi);

double extrapolate_to_threshold(const QuadraticFit& fit, double xi);

struct EstimateOptions {
    ContinuationConfig cfg;      // cfg.M is overridden per entry of m_list
    Strategy strategy = Strategy::extrapolate_to_xi;
    int t_grid_size = 120;
    WindowPolicy window;
    int parallel = 1;
    // sine perturbation applied to Re H after symmetrization (it must act on
    // the full grid: the point is to break the conjugate symmetry)
    double noise_amp = 0.0;
    double noise_angular = 10.0 * 3.14159265358979323846;
};

DelayEstimate estimate_delay(const SampledResponse& resp, const std::vector<int>& m_list,
                             const EstimateOptions& opt,
                             std::vector<ErrorCurve>* curves_out = nullptr);

// Averaging rule shared by estimate_delay and external drivers that build
// their per-M runs separately: include M whose plateau sits below 10*xi and
// whose fit rms is within the best 90%; if nothing qualifies, include all.
void combine_estimates(std::vector<PerMEstimate>& per_m, double xi, double& averaged_out);

} // namespace fcdelay
