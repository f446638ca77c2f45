// contactlab command-line tool: disk flows and phase portraits, extraction
// of the scaling-factor-1 set, parameter sweeps, and the end-to-end
// certification run. Every output file embeds its exact configuration.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "contactlab/construction.hpp"
#include "contactlab/io.hpp"
#include "contactlab/piecewise_flow.hpp"

namespace fs = std::filesystem;
using namespace contactlab;

namespace {

std::string default_outdir() {
    if (const char* env = std::getenv("CONTACTLAB_OUTDIR")) return env;
    return "out";
}

json load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot read config file " + path);
    json j;
    in >> j;
    return j;
}

void reject_unknown(const json& j, const std::vector<std::string>& allowed) {
    for (const auto& item : j.items()) {
        bool ok = false;
        for (const auto& k : allowed) ok = ok || item.key() == k;
        if (!ok)
            throw std::invalid_argument("config: unknown key '" + item.key() +
                                        "'");
    }
}

std::vector<DiskPoint> parse_starts(const std::string& spec, double T) {
    const auto colon = spec.find(':');
    if (colon == std::string::npos)
        throw std::invalid_argument("starts: expected grid:N or fan:N");
    const std::string kind = spec.substr(0, colon);
    const int n = std::stoi(spec.substr(colon + 1));
    if (n < 1 || n > 4096) throw std::invalid_argument("starts: bad count");
    std::vector<DiskPoint> pts;
    if (kind == "grid") {
        const double r = 0.95 * kInvSqrtPi;
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                const DiskPoint z{-r + 2.0 * r * i / std::max(1, n - 1),
                                  -r + 2.0 * r * j / std::max(1, n - 1)};
                if (boundary_defect(z) > 0.05) pts.push_back(z);
            }
        }
    } else if (kind == "fan") {
        // tubular fan of starts around C(0)
        const double a0 = -kSqrtPi * T;
        for (int i = 0; i < n; ++i) {
            const double b = 0.15 + (kPi - 0.3) * i / std::max(1, n - 1);
            for (double off : {-0.4, -0.15, 0.15, 0.4})
                pts.push_back(strip_to_disk({a0 + off, b}));
        }
    } else {
        throw std::invalid_argument("starts: unknown kind '" + kind + "'");
    }
    return pts;
}

int run_flow(const json& cfg_file, bool exact_flag, bool cutoff_flag,
             double T, double delta, std::string starts, std::string outdir) {
    std::string mode = cutoff_flag ? "cutoff" : "exact";
    if (!cfg_file.empty()) {
        reject_unknown(cfg_file, {"mode", "T", "delta", "starts", "out"});
        mode = cfg_file.value("mode", mode);
        T = cfg_file.value("T", T);
        delta = cfg_file.value("delta", delta);
        starts = cfg_file.value("starts", starts);
        outdir = cfg_file.value("out", outdir);
    }
    if (exact_flag) mode = "exact";
    if (cutoff_flag) mode = "cutoff";
    if (!(T > 0.0)) throw std::invalid_argument("flow: need T > 0");

    const json cfg{{"command", "flow"}, {"mode", mode},       {"T", T},
                   {"delta", delta},    {"starts", starts},   {"out", outdir}};
    const std::string cfg_line = cfg.dump();
    fs::create_directories(outdir);

    const auto start_pts = parse_starts(starts, T);
    const int nodes = 400;
    std::vector<std::vector<DiskPoint>> curves(start_pts.size());
    HamiltonianSchedule sched;
    if (mode == "cutoff") sched = HamiltonianSchedule::boundary(T, delta);
    parallel_for(start_pts.size(), [&](std::size_t i) {
        std::vector<DiskPoint> curve;
        curve.reserve(nodes + 1);
        if (mode == "exact") {
            for (int k = 0; k <= nodes; ++k)
                curve.push_back(exact_flow(start_pts[i], T * k / nodes));
        } else {
            const Trajectory traj = integrate_cutoff(start_pts[i], sched);
            for (int k = 0; k <= nodes; ++k)
                curve.push_back(traj.at(T * k / nodes));
        }
        curves[i] = std::move(curve);
    });

    for (std::size_t i = 0; i < curves.size(); ++i) {
        char name[64];
        std::snprintf(name, sizeof name, "flow_traj_%03zu.csv", i);
        std::vector<std::vector<double>> rows;
        rows.reserve(curves[i].size());
        for (int k = 0; k <= nodes; ++k)
            rows.push_back({T * k / nodes, curves[i][static_cast<std::size_t>(k)].p,
                            curves[i][static_cast<std::size_t>(k)].q});
        write_csv(fs::path(outdir) / name, cfg_line, {"t", "p", "q"}, rows);
    }
    disk_portrait(T, curves).write(fs::path(outdir) / "flow_portrait.svg",
                                   cfg_line);
    std::cout << "flow: wrote " << curves.size() << " trajectories and "
              << "flow_portrait.svg to " << outdir << "\n";
    return 0;
}

int run_sigma(const json& cfg_file, double T, std::vector<double> deltas,
              int resolution, std::string outdir) {
    if (!cfg_file.empty()) {
        reject_unknown(cfg_file, {"T", "deltas", "resolution", "out"});
        T = cfg_file.value("T", T);
        if (cfg_file.contains("deltas"))
            deltas = cfg_file["deltas"].get<std::vector<double>>();
        resolution = cfg_file.value("resolution", resolution);
        outdir = cfg_file.value("out", outdir);
    }
    if (deltas.empty()) deltas = {0.1, 0.05, 0.02, 0.01};
    const json cfg{{"command", "sigma"},
                   {"T", T},
                   {"deltas", deltas},
                   {"resolution", resolution},
                   {"out", outdir}};
    const std::string cfg_line = cfg.dump();
    fs::create_directories(outdir);

    json entries = json::array();
    bool residuals_ok = true;
    for (double delta : deltas) {
        const auto sched = HamiltonianSchedule::boundary(T, delta);
        const auto sigma = sigma_set(sched, resolution);
        std::vector<std::vector<double>> rows;
        std::vector<DiskPoint> flowed(sigma.size());
        double max_res = 0.0;
        parallel_for(sigma.size(), [&](std::size_t i) {
            flowed[i] = integrate_cutoff(sigma[i].z, sched).points.back();
        });
        for (const auto& pt : sigma) {
            rows.push_back({pt.z.p, pt.z.q, pt.g_residual});
            max_res = std::max(max_res, std::abs(pt.g_residual));
        }
        const double haus = hausdorff(flowed, arc_snapshot(T, T, 512));
        char name[64];
        std::snprintf(name, sizeof name, "sigma_delta_%g.csv", delta);
        write_csv(fs::path(outdir) / name, cfg_line, {"p", "q", "g_residual"},
                  rows);
        entries.push_back(json{{"delta", delta},
                               {"points", sigma.size()},
                               {"max_g_residual", max_res},
                               {"hausdorff_flow_to_CT", haus}});
        residuals_ok = residuals_ok && max_res < 1e-8;
        std::cout << "sigma: delta = " << delta << "  |Sigma| = " << sigma.size()
                  << "  max |g| = " << max_res
                  << "  Hausdorff(flow(Sigma), C(T)) = " << haus << "\n";
    }
    json summary{{"schema", 1}, {"config", cfg}, {"entries", entries},
                 {"residuals_ok", residuals_ok}};
    std::ofstream(fs::path(outdir) / "sigma_summary.json") << summary.dump(2)
                                                           << "\n";
    return residuals_ok ? 0 : 1;
}

int run_certify(const json& cfg_file, CertifyParams par, std::string kappa,
                std::string outdir) {
    if (!cfg_file.empty()) {
        reject_unknown(cfg_file,
                       {"T", "delta", "width", "eps", "n", "kappa",
                        "plateau_fraction", "mu", "r_minus", "r_plus",
                        "eps_disk", "sigma_resolution", "fiber_samples",
                        "s_grid", "tol_displace", "margin_floor", "seed",
                        "out"});
        par.T = cfg_file.value("T", par.T);
        par.delta = cfg_file.value("delta", par.delta);
        par.width = cfg_file.value("width", par.width);
        par.eps = cfg_file.value("eps", par.eps);
        par.n = cfg_file.value("n", par.n);
        kappa = cfg_file.value("kappa", kappa);
        par.plateau_fraction =
            cfg_file.value("plateau_fraction", par.plateau_fraction);
        par.mu = cfg_file.value("mu", par.mu);
        par.r_minus = cfg_file.value("r_minus", par.r_minus);
        par.r_plus = cfg_file.value("r_plus", par.r_plus);
        par.eps_disk = cfg_file.value("eps_disk", par.eps_disk);
        par.sigma_resolution =
            cfg_file.value("sigma_resolution", par.sigma_resolution);
        par.fiber_samples = cfg_file.value("fiber_samples", par.fiber_samples);
        par.s_grid = cfg_file.value("s_grid", par.s_grid);
        par.tol_displace = cfg_file.value("tol_displace", par.tol_displace);
        par.margin_floor = cfg_file.value("margin_floor", par.margin_floor);
        par.seed = cfg_file.value("seed", par.seed);
        outdir = cfg_file.value("out", outdir);
    }
    if (kappa != "twist" && kappa != "none")
        throw std::invalid_argument("certify: --kappa must be twist or none");
    par.kappa_enabled = kappa == "twist";

    fs::create_directories(outdir);
    const CertificationReport rep = certify(par);
    json out = report_to_json(rep);
    out["config"] = certify_params_to_json(par);
    std::ofstream(fs::path(outdir) / "certification.json") << out.dump(2)
                                                           << "\n";
    const std::string text = report_to_text(rep);
    std::ofstream(fs::path(outdir) / "certification.txt") << text;
    std::cout << text;
    return rep.all_ok() ? 0 : 1;
}

int run_sweep(const json& cfg_file, double T, std::vector<double> deltas,
              std::vector<double> widths, double eps, std::string outdir) {
    if (!cfg_file.empty()) {
        reject_unknown(cfg_file, {"T", "deltas", "widths", "eps", "out"});
        T = cfg_file.value("T", T);
        if (cfg_file.contains("deltas"))
            deltas = cfg_file["deltas"].get<std::vector<double>>();
        if (cfg_file.contains("widths"))
            widths = cfg_file["widths"].get<std::vector<double>>();
        eps = cfg_file.value("eps", eps);
        outdir = cfg_file.value("out", outdir);
    }
    if (deltas.empty()) deltas = {0.04, 0.02, 0.01};
    if (widths.empty()) widths = {0.5, 0.25, 0.125};
    const json cfg{{"command", "sweep"}, {"T", T},     {"deltas", deltas},
                   {"widths", widths},   {"eps", eps}, {"out", outdir}};
    fs::create_directories(outdir);

    std::vector<std::vector<double>> osc(deltas.size(),
                                         std::vector<double>(widths.size()));
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < deltas.size(); ++i) {
        const auto gamma = build_gamma(T, deltas[i]);
        for (std::size_t j = 0; j < widths.size(); ++j) {
            const auto psi = compose_psi(gamma, build_kappa(widths[j]));
            osc[i][j] = 2.0 * measured_length(psi);
            rows.push_back({deltas[i], widths[j], osc[i][j]});
            std::cout << "sweep: delta = " << deltas[i]
                      << "  width = " << widths[j]
                      << "  oscillation = " << osc[i][j] << "\n";
        }
    }
    bool monotone = true;
    for (std::size_t i = 0; i < deltas.size(); ++i)
        for (std::size_t j = 0; j + 1 < widths.size(); ++j)
            monotone = monotone && osc[i][j + 1] <= osc[i][j] + 1e-12;
    for (std::size_t j = 0; j < widths.size(); ++j)
        for (std::size_t i = 0; i + 1 < deltas.size(); ++i)
            monotone = monotone && osc[i + 1][j] <= osc[i][j] + 1e-12;

    write_csv(fs::path(outdir) / "sweep.csv", cfg.dump(),
              {"delta", "width", "oscillation_bound"}, rows);
    json summary{{"schema", 1},
                 {"config", cfg},
                 {"monotone_nonincreasing", monotone}};
    std::ofstream(fs::path(outdir) / "sweep.json") << summary.dump(2) << "\n";
    std::cout << "sweep: monotone nonincreasing = "
              << (monotone ? "yes" : "no") << "\n";
    return monotone ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "contactlab: explicit contact isotopies of the standard sphere, "
        "their scaling-factor-1 sets, and translated-point certification"};
    app.require_subcommand(1);

    std::string config_path;
    std::string outdir = default_outdir();

    // flow
    auto* flow = app.add_subcommand("flow", "integrate flows, emit CSV + SVG");
    bool f_exact = false, f_cutoff = false;
    double f_T = 5.0, f_delta = 0.01;
    std::string f_starts = "grid:12";
    flow->add_flag("--exact", f_exact, "use the closed-form uncut flow");
    flow->add_flag("--cutoff", f_cutoff, "use the cut-off flow");
    flow->add_option("-T,--horizon", f_T, "flow horizon");
    flow->add_option("--delta", f_delta, "cut-off band width");
    flow->add_option("--starts", f_starts, "grid:N or fan:N");
    flow->add_option("--out", outdir, "output directory");
    flow->add_option("--config", config_path, "JSON config file");

    // sigma
    auto* sigma = app.add_subcommand(
        "sigma", "extract the scaling-factor-1 set over a delta sweep");
    double s_T = 10.0;
    std::vector<double> s_deltas;
    int s_resolution = 64;
    sigma->add_option("-T,--horizon", s_T, "flow horizon");
    sigma->add_option("--delta", s_deltas, "delta values (repeatable)");
    sigma->add_option("--resolution", s_resolution, "transversal count");
    sigma->add_option("--out", outdir, "output directory");
    sigma->add_option("--config", config_path, "JSON config file");

    // certify
    auto* certify_cmd = app.add_subcommand(
        "certify", "run the full pipeline and certify the main estimate");
    CertifyParams par;
    std::string kappa_mode = "twist";
    certify_cmd->add_option("-T,--horizon", par.T, "flow horizon");
    certify_cmd->add_option("--delta", par.delta, "cut-off band width");
    certify_cmd->add_option("--width", par.width, "twist slab width");
    certify_cmd->add_option("--eps", par.eps, "target excess over 1");
    certify_cmd->add_option("--kappa", kappa_mode, "twist | none");
    certify_cmd->add_option("--sigma-resolution", par.sigma_resolution,
                            "transversal count");
    certify_cmd->add_option("--fiber", par.fiber_samples,
                            "fiber samples per Sigma point");
    certify_cmd->add_option("--s-grid", par.s_grid, "Reeb shift grid size");
    certify_cmd->add_option("--seed", par.seed, "sampling seed");
    certify_cmd->add_option("--out", outdir, "output directory");
    certify_cmd->add_option("--config", config_path, "JSON config file");

    // sweep
    auto* sweep = app.add_subcommand(
        "sweep", "oscillation bound across a delta x width sweep");
    double w_T = 10.0, w_eps = 0.4;
    std::vector<double> w_deltas, w_widths;
    sweep->add_option("-T,--horizon", w_T, "flow horizon");
    sweep->add_option("--deltas", w_deltas, "delta values")->delimiter(',');
    sweep->add_option("--widths", w_widths, "twist widths")->delimiter(',');
    sweep->add_option("--eps", w_eps, "target excess over 1");
    sweep->add_option("--out", outdir, "output directory");
    sweep->add_option("--config", config_path, "JSON config file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        json cfg_file = json::object();
        if (!config_path.empty()) cfg_file = load_config(config_path);
        if (flow->parsed())
            return run_flow(cfg_file, f_exact, f_cutoff, f_T, f_delta,
                            f_starts, outdir);
        if (sigma->parsed())
            return run_sigma(cfg_file, s_T, s_deltas, s_resolution, outdir);
        if (certify_cmd->parsed())
            return run_certify(cfg_file, par, kappa_mode, outdir);
        if (sweep->parsed())
            return run_sweep(cfg_file, w_T, w_deltas, w_widths, w_eps, outdir);
    } catch (const StageFailure& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const NoBracket& e) {
        std::cerr << "error: " << e.what()
                  << "\nhint: lower --delta or raise --resolution\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const json::exception& e) {
        std::cerr << "error: bad config: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
