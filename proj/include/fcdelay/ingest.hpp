#pragma once

#include <filesystem>

#include "delay.hpp"

namespace fcdelay {

struct Network {
    std::vector<double> freqs_hz;
    int n_ports = 0;
    // s[f] is a row-major n_ports x n_ports matrix
    std::vector<std::vector<cplx>> s;
    double z_ref = 50.0;
    char fmt = 'R'; // original format letter: R(I), M(A), D(B); kept for round-trips
};

struct ReportElement {
    std::string element; // e.g. "S11"
    std::vector<PerMEstimate> per_m;
    double averaged_s = 0.0;
    double plateau = 0.0;
    std::string verdict;
};

struct Report {
    std::string version;
    std::string input;
    // config echo
    double b = 2.0;
    double xi = 1e-13;
    std::string strategy;
    int t_grid = 120;
    std::vector<int> m_list;
    std::vector<ReportElement> elements;
};

Network parse_touchstone(const std::string& text, int n_ports_hint);
Network parse_touchstone_file(const std::filesystem::path& path);
std::string serialize_touchstone(const Network& net);

SampledResponse parse_csv(const std::string& text);
SampledResponse parse_csv_file(const std::filesystem::path& path);
std::string serialize_csv(const SampledResponse& resp);

SampledResponse select_element(const Network& net, int i, int j);

std::string serialize_report(const Report& report);
Report parse_report(const std::string& json_text);

void write_outputs(const Report& report, const std::vector<ErrorCurve>& curves,
                   const std::filesystem::path& dir);

} // namespace fcdelay
