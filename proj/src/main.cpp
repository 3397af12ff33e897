#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <sstream>

#include "fcdelay/ingest.hpp"
#include "fcdelay/synth.hpp"

namespace {

using namespace fcdelay;

struct CommonOpts {
    int elem_i = 1, elem_j = 1;
    std::vector<int> m_list{200, 400, 600, 800};
    double b = 2.0;
    double xi = 1e-13;
    std::string strategy = "extrapolate";
    int tgrid = 120;
    double narrow = 0.0;
    double noise_amp = 0.0;
    std::string out_dir = ".";
    int parallel = 1;
};

void add_common(CLI::App* app, CommonOpts& o)
{
    app->add_option("--m", o.m_list, "coefficient counts to run")->delimiter(',');
    app->add_option("--b", o.b, "continuation period");
    app->add_option("--xi", o.xi, "SVD truncation tolerance");
    app->add_option("--strategy", o.strategy, "critical|extrapolate")
        ->check(CLI::IsMember({"critical", "extrapolate"}));
    app->add_option("--tgrid", o.tgrid, "trial-delay grid size");
    app->add_option("--narrow", o.narrow, "central fraction of the fit window to keep");
    app->add_option("--noise-amp", o.noise_amp, "sine perturbation amplitude");
    app->add_option("--out", o.out_dir, "output directory");
    app->add_option("--parallel", o.parallel, "worker threads");
}

EstimateOptions to_estimate_options(const CommonOpts& o)
{
    EstimateOptions opt;
    opt.cfg.b = o.b;
    opt.cfg.xi = o.xi;
    opt.strategy = o.strategy == "critical" ? Strategy::critical_time
                                            : Strategy::extrapolate_to_xi;
    opt.t_grid_size = o.tgrid;
    if (o.narrow > 0.0)
        opt.window.narrow = o.narrow;
    opt.parallel = o.parallel;
    opt.noise_amp = o.noise_amp;
    return opt;
}

SampledResponse load_input(const std::string& path, int i, int j)
{
    const std::string ext = std::filesystem::path(path).extension().string();
    if (ext.size() >= 3 && ext[1] == 's' && ext.back() == 'p')
        return select_element(parse_touchstone_file(path), i, j);
    return parse_csv_file(path);
}

int cmd_synth(const std::string& kind, int n, double t0, const std::string& out_path)
{
    SampledResponse resp;
    if (kind == "four-pole") {
        FourPoleParams p;
        p.t0 = t0;
        resp = sample_four_pole(n, p);
    } else if (kind == "tline") {
        resp = sample_tline(n, RlgcParams::paper_line(), t0);
    } else if (kind == "dawson") {
        resp = sample_dawson(n, t0);
    } else {
        std::cerr << "unknown generator: " << kind << "\n";
        return 1;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out) {
        std::cerr << "cannot write " << out_path << "\n";
        return 1;
    }
    out << serialize_csv(resp);
    std::cout << "wrote " << resp.size() << " samples to " << out_path << "\n";
    return 0;
}

int cmd_check(const std::string& path, const CommonOpts& o)
{
    const SampledResponse resp = load_input(path, o.elem_i, o.elem_j);
    RescaledGrid grid = rescale_and_symmetrize(resp);
    if (o.noise_amp > 0.0) {
        NoiseSpec spec;
        spec.amplitude = o.noise_amp;
        grid = add_sine_noise(grid, spec);
    }
    int status = 0;
    for (int m : o.m_list) {
        if (static_cast<std::size_t>(m) > resp.size()) {
            std::cerr << "M=" << m << " exceeds sample count " << resp.size() << "\n";
            status = 1;
            continue;
        }
        ContinuationConfig cfg;
        cfg.M = m;
        cfg.b = o.b;
        cfg.xi = o.xi;
        const auto [cont, info] = build_continuation(grid, cfg);
        const ErrorSample err = reconstruction_error(grid, cont);
        const double level = err.err_re_inf;
        const bool causal = level <= 100.0 * o.xi;
        std::ostringstream lvl;
        lvl.precision(3);
        lvl << std::scientific << level;
        std::cout << "M=" << m << "  ||E_R||inf=" << lvl.str() << "  ||E_I||inf="
                  << err.err_im_inf << "  K=" << info.K << "  verdict: "
                  << (causal ? "causal (error at filtering level)"
                             : "non-causal or unresolved at level ~" + lvl.str())
                  << "\n";
    }
    return status;
}

int cmd_delay(const std::string& path, const CommonOpts& o)
{
    const SampledResponse resp = load_input(path, o.elem_i, o.elem_j);
    const EstimateOptions opt = to_estimate_options(o);

    std::vector<ErrorCurve> curves;
    DelayEstimate est;
    try {
        est = estimate_delay(resp, o.m_list, opt, &curves);
    } catch (const no_transition_error& ex) {
        std::cerr << "numerical failure: " << ex.what() << "\n";
        return 2;
    }

    Report report;
    report.input = path;
    report.b = o.b;
    report.xi = o.xi;
    report.strategy = o.strategy;
    report.t_grid = o.tgrid;
    report.m_list = o.m_list;

    ReportElement el;
    el.element = resp.label.empty() ? "H" : resp.label;
    el.per_m = est.per_m;
    el.averaged_s = est.averaged_s;
    double plat = 0.0;
    for (const auto& pm : est.per_m)
        if (pm.failure.empty())
            plat = std::max(plat, pm.plateau);
    el.plateau = plat;
    std::ostringstream plvl;
    plvl.precision(3);
    plvl << std::scientific << plat;
    el.verdict = plat <= 100.0 * o.xi ? "causal up to the estimated delay"
                                      : "causality violation at level ~" + plvl.str();
    report.elements.push_back(std::move(el));

    write_outputs(report, curves, o.out_dir);

    for (const auto& pm : est.per_m) {
        std::cout << "M=" << pm.M << "  ";
        if (pm.failure.empty())
            std::cout << "T0=" << pm.estimate_s << " s"
                      << (pm.included ? "" : "  (excluded from average)") << "\n";
        else
            std::cout << "failed: " << pm.failure << "\n";
    }
    std::cout << "averaged T0 = " << est.averaged_s << " s\n";
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"causality certification and time-delay extraction for tabulated "
                 "frequency responses"};
    app.require_subcommand(1);

    // synth
    auto* synth = app.add_subcommand("synth", "generate analytic test data");
    std::string synth_kind;
    int synth_n = 800;
    double synth_t0 = 0.25;
    std::string synth_out = "data.csv";
    synth->add_option("kind", synth_kind, "four-pole|tline|dawson")->required();
    synth->add_option("--n", synth_n, "sample count");
    synth->add_option("--t0", synth_t0, "imposed delay in seconds");
    synth->add_option("--out", synth_out, "output CSV path");

    CommonOpts check_opts, delay_opts;
    std::string check_path, delay_path;
    std::pair<int, int> elem{1, 1};

    auto* check = app.add_subcommand("check", "report causality of a data file");
    check->add_option("file", check_path, "input CSV or Touchstone file")->required();
    add_common(check, check_opts);
    check->add_option("--element", elem, "port element i,j")->delimiter(',');

    auto* delay = app.add_subcommand("delay", "estimate the embedded time delay");
    delay->add_option("file", delay_path, "input CSV or Touchstone file")->required();
    add_common(delay, delay_opts);
    delay->add_option("--element", elem, "port element i,j")->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    if (const char* env_xi = std::getenv("FCDELAY_XI")) {
        try {
            const double v = std::stod(env_xi);
            if (!check->count("--xi"))
                check_opts.xi = v;
            if (!delay->count("--xi"))
                delay_opts.xi = v;
        } catch (const std::exception&) {
            std::cerr << "ignoring malformed FCDELAY_XI\n";
        }
    }
    check_opts.elem_i = delay_opts.elem_i = elem.first;
    check_opts.elem_j = delay_opts.elem_j = elem.second;

    try {
        if (synth->parsed())
            return cmd_synth(synth_kind, synth_n, synth_t0, synth_out);
        if (check->parsed())
            return cmd_check(check_path, check_opts);
        return cmd_delay(delay_path, delay_opts);
    } catch (const no_transition_error& ex) {
        std::cerr << "numerical failure: " << ex.what() << "\n";
        return 2;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    }
}
