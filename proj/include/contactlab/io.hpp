#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "contactlab/construction.hpp"
#include "contactlab/cutoff_flow.hpp"
#include "contactlab/geometry.hpp"

namespace contactlab {

using json = nlohmann::ordered_json;

/// 15-significant-digit decimal rendering used by every CSV column.
inline std::string fmt15(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.15g", v);
    return buf;
}

/// CSV file whose first line is a comment carrying the exact run
/// configuration, so every output is regenerable from its header.
inline void write_csv(const std::filesystem::path& path,
                      const std::string& config_line,
                      const std::vector<std::string>& columns,
                      const std::vector<std::vector<double>>& rows) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string());
    out << "# config: " << config_line << "\n";
    for (std::size_t c = 0; c < columns.size(); ++c)
        out << columns[c] << (c + 1 < columns.size() ? "," : "\n");
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < row.size(); ++c)
            out << fmt15(row[c]) << (c + 1 < row.size() ? "," : "\n");
    }
}

// --------------------------------------------------------------------------
// Minimal SVG canvas in disk coordinates
// --------------------------------------------------------------------------

class SvgCanvas {
  public:
    SvgCanvas(int size_px = 640, double view_radius = 0.62)
        : size_(size_px), scale_(0.5 * size_px / view_radius) {}

    void polyline(const std::vector<DiskPoint>& pts, const std::string& color,
                  double width_px, const std::string& dash = "") {
        if (pts.size() < 2) return;
        body_ << "<polyline fill=\"none\" stroke=\"" << color
              << "\" stroke-width=\"" << width_px << "\"";
        if (!dash.empty()) body_ << " stroke-dasharray=\"" << dash << "\"";
        body_ << " points=\"";
        for (const auto& p : pts) body_ << px(p.p) << "," << py(p.q) << " ";
        body_ << "\"/>\n";
    }

    void polygon(const std::vector<DiskPoint>& pts, const std::string& fill,
                 double opacity) {
        if (pts.size() < 3) return;
        body_ << "<polygon stroke=\"none\" fill=\"" << fill
              << "\" fill-opacity=\"" << opacity << "\" points=\"";
        for (const auto& p : pts) body_ << px(p.p) << "," << py(p.q) << " ";
        body_ << "\"/>\n";
    }

    void circle(DiskPoint center, double radius, const std::string& stroke,
                double width_px, const std::string& fill = "none") {
        body_ << "<circle cx=\"" << px(center.p) << "\" cy=\"" << py(center.q)
              << "\" r=\"" << radius * scale_ << "\" stroke=\"" << stroke
              << "\" stroke-width=\"" << width_px << "\" fill=\"" << fill
              << "\"/>\n";
    }

    void dot(DiskPoint at, double radius_px, const std::string& fill) {
        body_ << "<circle cx=\"" << px(at.p) << "\" cy=\"" << py(at.q)
              << "\" r=\"" << radius_px << "\" stroke=\"none\" fill=\"" << fill
              << "\"/>\n";
    }

    void text(DiskPoint at, const std::string& label,
              const std::string& color = "#333") {
        body_ << "<text x=\"" << px(at.p) << "\" y=\"" << py(at.q)
              << "\" font-size=\"13\" font-family=\"sans-serif\" fill=\""
              << color << "\">" << label << "</text>\n";
    }

    void write(const std::filesystem::path& path,
               const std::string& config_line) const {
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot open " + path.string());
        out << "<!-- config: " << config_line << " -->\n"
            << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size_
            << "\" height=\"" << size_ << "\" viewBox=\"0 0 " << size_ << " "
            << size_ << "\">\n"
            << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
            << body_.str() << "</svg>\n";
    }

  private:
    double px(double p) const { return 0.5 * size_ + scale_ * p; }
    double py(double q) const { return 0.5 * size_ - scale_ * q; }

    int size_;
    double scale_;
    std::ostringstream body_;
};

/// Phase portrait of the disk: the two regions separated by C(0), the arcs
/// C(0) and C(T), and any number of trajectories.
inline SvgCanvas disk_portrait(double T,
                               const std::vector<std::vector<DiskPoint>>& trajectories) {
    SvgCanvas svg;
    const auto arc0 = arc_C(T, 257);

    // split the boundary circle at the endpoints of C(0) and shade the two
    // sides of the arc
    const DiskPoint e0 = arc0.samples.front();   // right end, on {p > 0}
    const DiskPoint e1 = arc0.samples.back();    // left end, on {p < 0}
    const double th0 = std::atan2(e0.q, e0.p);
    const double th1 = std::atan2(e1.q, e1.p);
    auto boundary_arc = [&](double from, double to, int m) {
        std::vector<DiskPoint> pts;
        for (int k = 0; k <= m; ++k) {
            const double th = from + (to - from) * k / m;
            pts.push_back({kInvSqrtPi * std::cos(th), kInvSqrtPi * std::sin(th)});
        }
        return pts;
    };
    std::vector<DiskPoint> upper = arc0.samples;  // b: 0 -> pi ends at e1
    for (const auto& p : boundary_arc(th1, th0, 192)) upper.push_back(p);
    svg.polygon(upper, "#aecbe8", 0.5);
    std::vector<DiskPoint> lower = arc0.samples;
    for (const auto& p : boundary_arc(th1, th0 - kTwoPi, 192)) lower.push_back(p);
    svg.polygon(lower, "#f4d9a0", 0.6);

    svg.circle({0.0, 0.0}, kInvSqrtPi, "#222", 1.5);
    svg.polyline(arc0.samples, "#b03030", 2.0);
    svg.polyline(arc_snapshot(T, T, 257), "#b03030", 2.0, "6,4");
    for (const auto& traj : trajectories) svg.polyline(traj, "#3a6ea5", 0.9);
    for (const auto& traj : trajectories)
        if (!traj.empty()) svg.dot(traj.front(), 2.2, "#1c4670");
    svg.dot({0.0, kInvSqrtPi}, 3.0, "#111");
    svg.dot({0.0, -kInvSqrtPi}, 3.0, "#111");
    svg.text({0.03, kInvSqrtPi - 0.045}, "attracting");
    svg.text({0.03, -kInvSqrtPi + 0.02}, "repelling");
    svg.text({arc0.samples[128].p + 0.02, arc0.samples[128].q}, "C(0)",
             "#b03030");
    return svg;
}

// --------------------------------------------------------------------------
// JSON serialization
// --------------------------------------------------------------------------

inline json schedule_to_json(const HamiltonianSchedule& s) {
    if (!s.boundary_source)
        throw std::invalid_argument("only boundary-sourced schedules serialize");
    return json{{"T", s.T},
                {"delta", s.delta},
                {"mu", s.mu.name},
                {"trajectory_source", "boundary"}};
}

inline HamiltonianSchedule schedule_from_json(const json& j) {
    for (const auto& item : j.items()) {
        const std::string& k = item.key();
        if (k != "T" && k != "delta" && k != "mu" && k != "trajectory_source")
            throw std::invalid_argument("schedule: unknown key '" + k + "'");
    }
    if (j.value("trajectory_source", "boundary") != std::string("boundary"))
        throw std::invalid_argument("schedule: unsupported trajectory source");
    return HamiltonianSchedule::boundary(
        j.at("T").get<double>(), j.at("delta").get<double>(),
        SmoothingProfile::by_name(j.value("mu", "quadratic-spline")));
}

inline json certify_params_to_json(const CertifyParams& p) {
    return json{{"T", p.T},
                {"delta", p.delta},
                {"width", p.width},
                {"eps", p.eps},
                {"n", p.n},
                {"kappa", p.kappa_enabled ? "twist" : "none"},
                {"plateau_fraction", p.plateau_fraction},
                {"mu", p.mu},
                {"r_minus", p.r_minus},
                {"r_plus", p.r_plus},
                {"eps_disk", p.eps_disk},
                {"sigma_resolution", p.sigma_resolution},
                {"fiber_samples", p.fiber_samples},
                {"s_grid", p.s_grid},
                {"tol_displace", p.tol_displace},
                {"margin_floor", p.margin_floor},
                {"seed", p.seed}};
}

inline json report_to_json(const CertificationReport& r) {
    return json{
        {"schema", r.schema},
        {"parameters", certify_params_to_json(r.params)},
        {"length_gamma", r.length_gamma},
        {"length_kappa", r.length_kappa},
        {"length_psi", r.length_psi},
        {"oscillation_bound", r.oscillation_bound},
        {"achieved_eps", r.achieved_eps},
        {"sigma_hausdorff_to_C0", r.sigma_hausdorff_to_C0},
        {"sigma_flow_hausdorff_to_CT", r.sigma_flow_hausdorff_to_CT},
        {"sigma_g_residual_max", r.sigma_g_residual_max},
        {"displacement_margins",
         json{{"assump1_margin", r.assump1_margin},
              {"assump2_sigma_margin", r.assump2_sigma_margin},
              {"assump2_image_margin", r.assump2_image_margin},
              {"separation_margin", r.separation_margin}}},
        {"displacement_miss", r.displacement_miss},
        {"kappa_strictness_max", r.kappa_strictness_max},
        {"translated_point_margin", r.translated_point_margin},
        {"reeb_shift_at_min", r.reeb_shift_at_min},
        {"shortcut_bound", r.shortcut_bound},
        {"criteria", json{{"oscillation", r.criterion_oscillation},
                          {"no_translated_points", r.criterion_no_translated},
                          {"inclusions", r.criterion_inclusions}}},
        {"all_ok", r.all_ok()}};
}

inline std::string report_to_text(const CertificationReport& r) {
    std::ostringstream out;
    auto line = [&](const std::string& k, const std::string& v) {
        out << "  " << k;
        for (std::size_t i = k.size(); i < 34; ++i) out << ' ';
        out << v << "\n";
    };
    out << "certification report (schema " << r.schema << ")\n";
    line("T, delta", fmt15(r.params.T) + ", " + fmt15(r.params.delta));
    line("kappa", r.params.kappa_enabled
                      ? "twist, width " + fmt15(r.params.width)
                      : "none");
    line("length(gamma)", fmt15(r.length_gamma));
    line("length(kappa)", fmt15(r.length_kappa));
    line("length(psi), measured", fmt15(r.length_psi));
    line("oscillation bound 2*length(psi)", fmt15(r.oscillation_bound));
    line("achieved eps", fmt15(r.achieved_eps));
    line("Sigma residual max |g|", fmt15(r.sigma_g_residual_max));
    line("Hausdorff Sigma -> C(0)", fmt15(r.sigma_hausdorff_to_C0));
    line("Hausdorff flow(Sigma) -> C(T)", fmt15(r.sigma_flow_hausdorff_to_CT));
    line("inclusion margin (assump 1)", fmt15(r.assump1_margin));
    line("inclusion margin (Sigma in U-)", fmt15(r.assump2_sigma_margin));
    line("inclusion margin (image in U+)", fmt15(r.assump2_image_margin));
    line("U- / D(eps) separation", fmt15(r.separation_margin));
    line("displacement miss", fmt15(r.displacement_miss));
    line("kappa strictness (max |g|)", fmt15(r.kappa_strictness_max));
    line("translated-point margin", fmt15(r.translated_point_margin));
    line("rotational shortcut bound", fmt15(r.shortcut_bound));
    out << "criteria:\n";
    line("(i) oscillation < 1 + eps",
         r.criterion_oscillation ? "PASS" : "FAIL");
    line("(ii) no translated points", r.criterion_no_translated ? "PASS" : "FAIL");
    line("(iii) displacement inclusions",
         r.criterion_inclusions ? "PASS" : "FAIL");
    out << (r.all_ok() ? "VERDICT: certified\n" : "VERDICT: not certified\n");
    return out.str();
}

}  // namespace contactlab
