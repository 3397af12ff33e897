#include "fcdelay/ingest.hpp"

#include <nlohmann/json.hpp>

#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

namespace fcdelay {

using ordered_json = nlohmann::ordered_json;

namespace {
constexpr double k_pi = 3.14159265358979323846;
constexpr const char* k_version = "1.0.0";

std::string lower(std::string s)
{
    for (char& c : s)
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

double parse_num(const std::string& tok, std::size_t line_no)
{
    std::size_t pos = 0;
    double v;
    try {
        v = std::stod(tok, &pos);
    } catch (const std::exception&) {
        throw std::invalid_argument("malformed number '" + tok + "' on line " +
                                    std::to_string(line_no));
    }
    if (pos != tok.size())
        throw std::invalid_argument("malformed number '" + tok + "' on line " +
                                    std::to_string(line_no));
    return v;
}
} // namespace

Network parse_touchstone(const std::string& text, int n_ports_hint)
{
    if (n_ports_hint < 1)
        throw std::invalid_argument("port count must be >= 1");

    double unit_scale = 1e9; // Touchstone default unit is GHz
    char fmt = 'M';          // default format is MA
    double z_ref = 50.0;
    bool saw_option = false;

    std::vector<double> numbers;
    std::vector<std::size_t> number_lines;

    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto bang = line.find('!'); bang != std::string::npos)
            line = line.substr(0, bang);
        std::istringstream ls(line);
        std::string tok;
        if (!(ls >> tok))
            continue;
        if (tok[0] == '[')
            throw std::invalid_argument("Touchstone v2 keywords are not supported (line " +
                                        std::to_string(line_no) + ")");
        if (tok == "#") {
            if (saw_option)
                continue; // per spec, later option lines are ignored
            saw_option = true;
            std::string word;
            while (ls >> word) {
                const std::string w = lower(word);
                if (w == "hz")
                    unit_scale = 1.0;
                else if (w == "khz")
                    unit_scale = 1e3;
                else if (w == "mhz")
                    unit_scale = 1e6;
                else if (w == "ghz")
                    unit_scale = 1e9;
                else if (w == "s")
                    ; // scattering parameters
                else if (w == "y" || w == "z" || w == "h" || w == "g")
                    throw std::invalid_argument("unsupported parameter type '" + word + "'");
                else if (w == "ri")
                    fmt = 'R';
                else if (w == "ma")
                    fmt = 'M';
                else if (w == "db")
                    fmt = 'D';
                else if (w == "r") {
                    std::string zr;
                    if (ls >> zr)
                        z_ref = parse_num(zr, line_no);
                } else
                    throw std::invalid_argument("unknown option '" + word + "' on line " +
                                                std::to_string(line_no));
            }
            continue;
        }
        // data line
        ls.clear();
        ls.seekg(0);
        while (ls >> tok) {
            numbers.push_back(parse_num(tok, line_no));
            number_lines.push_back(line_no);
        }
    }

    const int n = n_ports_hint;
    const std::size_t per_freq = 1 + 2 * static_cast<std::size_t>(n) * static_cast<std::size_t>(n);
    if (numbers.empty() || numbers.size() % per_freq != 0)
        throw std::invalid_argument("data does not form complete frequency records for " +
                                    std::to_string(n) + " ports");

    Network net;
    net.n_ports = n;
    net.z_ref = z_ref;
    net.fmt = fmt;

    for (std::size_t off = 0; off < numbers.size(); off += per_freq) {
        const double f_hz = numbers[off] * unit_scale;
        if (!net.freqs_hz.empty() && f_hz <= net.freqs_hz.back())
            throw std::invalid_argument("non-monotone frequency on line " +
                                        std::to_string(number_lines[off]));
        net.freqs_hz.push_back(f_hz);
        std::vector<cplx> mat(static_cast<std::size_t>(n) * static_cast<std::size_t>(n));
        for (std::size_t p = 0; p < mat.size(); ++p) {
            const double a = numbers[off + 1 + 2 * p];
            const double b = numbers[off + 2 + 2 * p];
            cplx v;
            switch (fmt) {
            case 'R': v = cplx(a, b); break;
            case 'M': v = std::polar(a, b * k_pi / 180.0); break;
            default: v = std::polar(std::pow(10.0, a / 20.0), b * k_pi / 180.0); break;
            }
            // Touchstone 2-port order is S11 S21 S12 S22, i.e. column-major
            std::size_t row, col;
            if (n == 2) {
                row = p % 2;
                col = p / 2;
            } else {
                row = p / static_cast<std::size_t>(n);
                col = p % static_cast<std::size_t>(n);
            }
            mat[row * static_cast<std::size_t>(n) + col] = v;
        }
        net.s.push_back(std::move(mat));
    }
    return net;
}

Network parse_touchstone_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();

    int ports = 1;
    const std::string ext = lower(path.extension().string());
    if (ext.size() >= 4 && ext.front() == '.' && ext.back() == 'p') {
        try {
            ports = std::stoi(ext.substr(2, ext.size() - 3));
        } catch (const std::exception&) {
            ports = 1;
        }
    }
    return parse_touchstone(ss.str(), ports);
}

std::string serialize_touchstone(const Network& net)
{
    std::ostringstream out;
    out.precision(17);
    out << "# Hz S RI R " << net.z_ref << "\n";
    const int n = net.n_ports;
    for (std::size_t fi = 0; fi < net.freqs_hz.size(); ++fi) {
        out << net.freqs_hz[fi];
        for (std::size_t p = 0; p < static_cast<std::size_t>(n) * static_cast<std::size_t>(n);
             ++p) {
            std::size_t row, col;
            if (n == 2) {
                row = p % 2;
                col = p / 2;
            } else {
                row = p / static_cast<std::size_t>(n);
                col = p % static_cast<std::size_t>(n);
            }
            const cplx v = net.s[fi][row * static_cast<std::size_t>(n) + col];
            out << " " << v.real() << " " << v.imag();
        }
        out << "\n";
    }
    return out.str();
}

SampledResponse parse_csv(const std::string& text)
{
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line))
        throw std::invalid_argument("empty CSV");
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n'))
        line.pop_back();

    double freq_scale;
    if (line == "freq_hz,re,im")
        freq_scale = 2.0 * k_pi;
    else if (line == "freq_rads,re,im")
        freq_scale = 1.0;
    else
        throw std::invalid_argument("expected header freq_hz,re,im or freq_rads,re,im");

    SampledResponse resp;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        while (!line.empty() && (line.back() == '\r' || line.back() == '\n'))
            line.pop_back();
        if (line.empty())
            continue;
        std::istringstream ls(line);
        std::string f, re, im;
        if (!std::getline(ls, f, ',') || !std::getline(ls, re, ',') || !std::getline(ls, im))
            throw std::invalid_argument("missing column in row " + std::to_string(row));
        const double fv = parse_num(f, row);
        const double rv = parse_num(re, row);
        const double iv = parse_num(im, row);
        if (!std::isfinite(fv) || !std::isfinite(rv) || !std::isfinite(iv))
            throw std::invalid_argument("non-finite value in row " + std::to_string(row));
        resp.freqs.push_back(fv * freq_scale);
        resp.values.push_back(cplx(rv, iv));
    }
    return resp;
}

SampledResponse parse_csv_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_csv(ss.str());
}

std::string serialize_csv(const SampledResponse& resp)
{
    std::ostringstream out;
    out.precision(17);
    out << "freq_rads,re,im\n";
    for (std::size_t i = 0; i < resp.size(); ++i)
        out << resp.freqs[i] << "," << resp.values[i].real() << "," << resp.values[i].imag()
            << "\n";
    return out.str();
}

SampledResponse select_element(const Network& net, int i, int j)
{
    if (i < 1 || j < 1 || i > net.n_ports || j > net.n_ports)
        throw std::invalid_argument("element indices out of range");
    SampledResponse resp;
    resp.label = "S" + std::to_string(i) + std::to_string(j);
    const std::size_t n = static_cast<std::size_t>(net.n_ports);
    for (std::size_t fi = 0; fi < net.freqs_hz.size(); ++fi) {
        resp.freqs.push_back(2.0 * k_pi * net.freqs_hz[fi]);
        resp.values.push_back(net.s[fi][static_cast<std::size_t>(i - 1) * n +
                                        static_cast<std::size_t>(j - 1)]);
    }
    return resp;
}

static ordered_json fit_to_json(const QuadraticFit& fit)
{
    ordered_json j;
    j["a0"] = fit.a0;
    j["a1"] = fit.a1;
    j["a2"] = fit.a2;
    j["window"] = {fit.win_lo, fit.win_hi};
    j["rms_residual"] = fit.rms_residual;
    return j;
}

static QuadraticFit fit_from_json(const ordered_json& j)
{
    QuadraticFit fit;
    fit.a0 = j.at("a0").get<double>();
    fit.a1 = j.at("a1").get<double>();
    fit.a2 = j.at("a2").get<double>();
    fit.win_lo = j.at("window").at(0).get<std::size_t>();
    fit.win_hi = j.at("window").at(1).get<std::size_t>();
    fit.rms_residual = j.at("rms_residual").get<double>();
    return fit;
}

std::string serialize_report(const Report& report)
{
    ordered_json j;
    j["version"] = report.version.empty() ? k_version : report.version;
    j["input"] = report.input;
    j["config"]["b"] = report.b;
    j["config"]["xi"] = report.xi;
    j["config"]["strategy"] = report.strategy;
    j["config"]["t_grid"] = report.t_grid;
    j["config"]["m_list"] = report.m_list;
    j["elements"] = ordered_json::array();
    for (const auto& el : report.elements) {
        ordered_json je;
        je["element"] = el.element;
        je["per_m"] = ordered_json::array();
        for (const auto& pm : el.per_m) {
            ordered_json jm;
            jm["m"] = pm.M;
            jm["strategy"] =
                pm.strategy == Strategy::critical_time ? "critical" : "extrapolate";
            if (pm.failure.empty()) {
                jm["estimate_s"] = pm.estimate_s;
                jm["plateau"] = pm.plateau;
                jm["included"] = pm.included;
                jm["fit"] = fit_to_json(pm.fit);
            } else {
                jm["failure"] = pm.failure;
            }
            je["per_m"].push_back(std::move(jm));
        }
        je["averaged_s"] = el.averaged_s;
        je["plateau"] = el.plateau;
        je["verdict"] = el.verdict;
        j["elements"].push_back(std::move(je));
    }
    return j.dump(2) + "\n";
}

Report parse_report(const std::string& json_text)
{
    const ordered_json j = ordered_json::parse(json_text);
    Report r;
    r.version = j.at("version").get<std::string>();
    r.input = j.at("input").get<std::string>();
    r.b = j.at("config").at("b").get<double>();
    r.xi = j.at("config").at("xi").get<double>();
    r.strategy = j.at("config").at("strategy").get<std::string>();
    r.t_grid = j.at("config").at("t_grid").get<int>();
    r.m_list = j.at("config").at("m_list").get<std::vector<int>>();
    for (const auto& je : j.at("elements")) {
        ReportElement el;
        el.element = je.at("element").get<std::string>();
        for (const auto& jm : je.at("per_m")) {
            PerMEstimate pm;
            pm.M = jm.at("m").get<int>();
            pm.strategy = jm.at("strategy").get<std::string>() == "critical"
                              ? Strategy::critical_time
                              : Strategy::extrapolate_to_xi;
            if (jm.contains("failure")) {
                pm.failure = jm.at("failure").get<std::string>();
            } else {
                pm.estimate_s = jm.at("estimate_s").get<double>();
                pm.plateau = jm.at("plateau").get<double>();
                pm.included = jm.at("included").get<bool>();
                pm.fit = fit_from_json(jm.at("fit"));
            }
            el.per_m.push_back(std::move(pm));
        }
        el.averaged_s = je.at("averaged_s").get<double>();
        el.plateau = je.at("plateau").get<double>();
        el.verdict = je.at("verdict").get<std::string>();
        r.elements.push_back(std::move(el));
    }
    return r;
}

void write_outputs(const Report& report, const std::vector<ErrorCurve>& curves,
                   const std::filesystem::path& dir)
{
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);

    auto write_file = [](const std::filesystem::path& p, const std::string& content) {
        std::ofstream out(p, std::ios::binary);
        if (!out)
            throw std::runtime_error("cannot write " + p.string());
        out << content;
    };

    write_file(dir / "report.json", serialize_report(report));

    for (const auto& curve : curves) {
        if (curve.ts.empty())
            continue; // this M failed; nothing to plot
        std::ostringstream csv;
        csv.precision(17);
        csv << "t_scaled,t_seconds,err_re_inf,err_im_inf\n";
        for (std::size_t i = 0; i < curve.ts.size(); ++i)
            csv << curve.ts[i] << "," << curve.ts[i] * curve.scale_a << "," << curve.errs[i]
                << "," << curve.errs_im[i] << "\n";
        write_file(dir / ("curve_M" + std::to_string(curve.M) + ".csv"), csv.str());

        // matching fit, if this M produced one
        const QuadraticFit* fit = nullptr;
        for (const auto& el : report.elements)
            for (const auto& pm : el.per_m)
                if (pm.M == curve.M && pm.failure.empty())
                    fit = &pm.fit;
        if (!fit)
            continue;
        std::ostringstream fcsv;
        fcsv.precision(17);
        fcsv << "err,t_fitted\n";
        double z_lo = std::log(curve.errs[fit->win_lo]);
        double z_hi = std::log(curve.errs[fit->win_hi - 1]);
        if (z_lo > z_hi)
            std::swap(z_lo, z_hi);
        for (int i = 0; i <= 100; ++i) {
            const double z = z_lo + (z_hi - z_lo) * i / 100.0;
            fcsv << std::exp(z) << ","
                 << std::exp(fit->a2 * z * z + fit->a1 * z + fit->a0) << "\n";
        }
        write_file(dir / ("fit_M" + std::to_string(curve.M) + ".csv"), fcsv.str());
    }
}

} // namespace fcdelay
