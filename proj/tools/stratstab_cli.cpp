// Command-line front end over the stratstab C API: profile diagnostics,
// Nyquist winding runs, spectrum searches, mode reconstruction, linear and
// nonlinear evolution runs, and the beta/delta/M parameter scans.
// Exit codes: 0 success, 2 configuration error, 3 numerical failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "stratstab/stratstab.h"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

struct CliError {
    int code;
    std::string message;
};

[[noreturn]] void die_config(const std::string& msg) { throw CliError{kExitConfig, msg}; }
[[noreturn]] void die_numeric(const std::string& msg) {
    throw CliError{kExitNumeric, msg};
}

void require_ok(ss_status st, const std::string& where) {
    if (st == SS_OK) return;
    const std::string msg =
        where + ": " + ss_status_name(st) + " (" + ss_last_error() + ")";
    if (st == SS_ERR_ALPHA_RANGE || st == SS_ERR_INVALID_ARGUMENT) die_config(msg);
    die_numeric(msg);
}

// All run parameters; the resolved values are embedded in every JSON summary.
struct Opts {
    std::string kind = "tanh";
    double beta = 5.0;
    double alpha = 0.97;
    double kappa = 0.0;
    int k = 1;
    double M = 1.0;
    int nz = 128;
    int nx = 64;
    double dt = 1e-3;
    double tol = 1e-10;
    double eps = 1e-2;
    double eps_floor = 0.05;
    double t_end = 0.0;  // 0: command-specific default
    double delta = 1e-3;
    double threshold_m = 0.05;
    std::uint64_t seed = 0;
    std::string model = "auto";  // hydrostatic | boussinesq | auto
    std::string method = "both"; // neumann | shooting | both
    std::vector<double> delta_list{1e-3, 1e-4, 1e-5};
    std::vector<double> m_list{20.0, 40.0, 80.0};
    std::vector<double> beta_list{1.0, 2.0, 3.0, 5.0, 8.0};
    std::string out = "out";
    std::vector<std::string> formats{"csv", "json"};
    std::string config_file;
};

json config_json(const Opts& o) {
    json j;
    j["kind"] = o.kind;
    j["beta"] = o.beta;
    j["alpha"] = o.alpha;
    j["kappa"] = o.kappa;
    j["k"] = o.k;
    j["M"] = o.M;
    j["nz"] = o.nz;
    j["nx"] = o.nx;
    j["dt"] = o.dt;
    j["tol"] = o.tol;
    j["eps"] = o.eps;
    j["eps_floor"] = o.eps_floor;
    j["t_end"] = o.t_end;
    j["delta"] = o.delta;
    j["m"] = o.threshold_m;
    j["seed"] = o.seed;
    j["model"] = o.model;
    j["method"] = o.method;
    j["delta_list"] = o.delta_list;
    j["m_list"] = o.m_list;
    j["beta_list"] = o.beta_list;
    return j;
}

// option registry so a flat key=value config file can fill anything the
// command line left unset (flags win)
struct OptionEntry {
    CLI::Option* opt;
    std::function<void(const std::string&)> set;
};

struct OptionRegistry {
    std::map<std::string, OptionEntry> entries;

    void apply_config_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) die_config("cannot open config file: " + path);
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back())))
                line.pop_back();
            size_t start = 0;
            while (start < line.size() &&
                   std::isspace(static_cast<unsigned char>(line[start])))
                ++start;
            line.erase(0, start);
            if (line.empty()) continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                die_config("config line " + std::to_string(lineno) + ": expected key=value");
            std::string key = line.substr(0, eq);
            std::string val = line.substr(eq + 1);
            auto strip = [](std::string& s) {
                while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
                    s.pop_back();
                size_t b = 0;
                while (b < s.size() && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
                s.erase(0, b);
            };
            strip(key);
            strip(val);
            const auto it = entries.find(key);
            if (it == entries.end())
                die_config("config line " + std::to_string(lineno) + ": unknown key '" +
                           key + "'");
            if (it->second.opt->count() == 0) it->second.set(val);
        }
    }
};

std::vector<double> parse_double_list(const std::string& s) {
    std::vector<double> out;
    size_t pos = 0;
    while (pos < s.size()) {
        size_t comma = s.find(',', pos);
        if (comma == std::string::npos) comma = s.size();
        const std::string tok = s.substr(pos, comma - pos);
        try {
            out.push_back(std::stod(tok));
        } catch (...) {
            die_config("bad number in list: '" + tok + "'");
        }
        pos = comma + 1;
    }
    if (out.empty()) die_config("empty list");
    return out;
}

std::vector<std::string> parse_string_list(const std::string& s) {
    std::vector<std::string> out;
    size_t pos = 0;
    while (pos < s.size()) {
        size_t comma = s.find(',', pos);
        if (comma == std::string::npos) comma = s.size();
        out.push_back(s.substr(pos, comma - pos));
        pos = comma + 1;
    }
    if (out.empty()) die_config("empty list");
    return out;
}

void add_common(CLI::App* cmd, Opts& o, OptionRegistry& reg) {
    auto track = [&reg](const std::string& key, CLI::Option* opt,
                        std::function<void(const std::string&)> set) {
        reg.entries[key] = OptionEntry{opt, std::move(set)};
    };
    track("kind", cmd->add_option("--kind", o.kind)->check(CLI::IsMember({"tanh", "couette"})),
          [&o](const std::string& v) {
              if (v != "tanh" && v != "couette") die_config("kind must be tanh|couette");
              o.kind = v;
          });
    track("beta", cmd->add_option("--beta", o.beta),
          [&o](const std::string& v) { o.beta = std::stod(v); });
    track("alpha", cmd->add_option("--alpha", o.alpha),
          [&o](const std::string& v) { o.alpha = std::stod(v); });
    track("kappa", cmd->add_option("--kappa", o.kappa),
          [&o](const std::string& v) { o.kappa = std::stod(v); });
    track("k", cmd->add_option("--k", o.k),
          [&o](const std::string& v) { o.k = std::stoi(v); });
    track("M", cmd->add_option("--M", o.M),
          [&o](const std::string& v) { o.M = std::stod(v); });
    track("nz", cmd->add_option("--nz", o.nz),
          [&o](const std::string& v) { o.nz = std::stoi(v); });
    track("nx", cmd->add_option("--nx", o.nx),
          [&o](const std::string& v) { o.nx = std::stoi(v); });
    track("dt", cmd->add_option("--dt", o.dt),
          [&o](const std::string& v) { o.dt = std::stod(v); });
    track("tol", cmd->add_option("--tol", o.tol),
          [&o](const std::string& v) { o.tol = std::stod(v); });
    track("eps", cmd->add_option("--eps", o.eps),
          [&o](const std::string& v) { o.eps = std::stod(v); });
    track("eps-floor", cmd->add_option("--eps-floor", o.eps_floor),
          [&o](const std::string& v) { o.eps_floor = std::stod(v); });
    track("t-end", cmd->add_option("--t-end", o.t_end),
          [&o](const std::string& v) { o.t_end = std::stod(v); });
    track("delta", cmd->add_option("--delta", o.delta),
          [&o](const std::string& v) { o.delta = std::stod(v); });
    track("m", cmd->add_option("--m", o.threshold_m),
          [&o](const std::string& v) { o.threshold_m = std::stod(v); });
    track("seed", cmd->add_option("--seed", o.seed),
          [&o](const std::string& v) { o.seed = std::stoull(v); });
    track("model",
          cmd->add_option("--model", o.model)
              ->check(CLI::IsMember({"auto", "hydrostatic", "boussinesq"})),
          [&o](const std::string& v) { o.model = v; });
    track("method",
          cmd->add_option("--method", o.method)
              ->check(CLI::IsMember({"neumann", "shooting", "both"})),
          [&o](const std::string& v) { o.method = v; });
    track("delta-list",
          cmd->add_option_function<std::string>(
              "--delta-list",
              [&o](const std::string& v) { o.delta_list = parse_double_list(v); },
              "comma-separated deltas"),
          [&o](const std::string& v) { o.delta_list = parse_double_list(v); });
    track("M-list",
          cmd->add_option_function<std::string>(
              "--M-list",
              [&o](const std::string& v) { o.m_list = parse_double_list(v); },
              "comma-separated torus scales"),
          [&o](const std::string& v) { o.m_list = parse_double_list(v); });
    track("beta-list",
          cmd->add_option_function<std::string>(
              "--beta-list",
              [&o](const std::string& v) { o.beta_list = parse_double_list(v); },
              "comma-separated betas"),
          [&o](const std::string& v) { o.beta_list = parse_double_list(v); });
    track("out", cmd->add_option("--out", o.out),
          [&o](const std::string& v) { o.out = v; });
    track("format",
          cmd->add_option("--format", o.formats, "csv|json|svg (repeatable)")
              ->delimiter(',')
              ->check(CLI::IsMember({"csv", "json", "svg"})),
          [&o](const std::string& v) { o.formats = parse_string_list(v); });
    cmd->add_option("--config", o.config_file, "flat key=value config file");
}

bool wants(const Opts& o, const std::string& fmt) {
    for (const auto& f : o.formats)
        if (f == fmt) return true;
    return false;
}

// ----- output helpers ------------------------------------------------------

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct CsvWriter {
    std::ofstream out;
    explicit CsvWriter(const fs::path& p) : out(p, std::ios::binary) {
        if (!out) die_config("cannot open output file: " + p.string());
    }
    void header(const std::vector<std::string>& cols) {
        for (size_t i = 0; i < cols.size(); ++i)
            out << (i ? "," : "") << cols[i];
        out << "\n";
    }
    void row(const std::vector<double>& vals) {
        for (size_t i = 0; i < vals.size(); ++i)
            out << (i ? "," : "") << fmt17(vals[i]);
        out << "\n";
    }
    void row_tagged(const std::string& tag, const std::vector<double>& vals) {
        out << tag;
        for (double v : vals) out << "," << fmt17(v);
        out << "\n";
    }
};

void write_json(const fs::path& p, const json& j) {
    std::ofstream out(p, std::ios::binary);
    if (!out) die_config("cannot open output file: " + p.string());
    out << j.dump(2) << "\n";
}

void write_svg_polyline(const fs::path& p, const std::vector<double>& xs,
                        const std::vector<double>& ys) {
    if (xs.empty()) return;
    double xlo = xs[0], xhi = xs[0], ylo = ys[0], yhi = ys[0];
    for (size_t i = 0; i < xs.size(); ++i) {
        xlo = std::min(xlo, xs[i]);
        xhi = std::max(xhi, xs[i]);
        ylo = std::min(ylo, ys[i]);
        yhi = std::max(yhi, ys[i]);
    }
    const double w = 800, h = 600, pad = 40;
    auto sx = [&](double x) {
        return pad + (w - 2 * pad) * (xhi > xlo ? (x - xlo) / (xhi - xlo) : 0.5);
    };
    auto sy = [&](double y) {
        return h - pad - (h - 2 * pad) * (yhi > ylo ? (y - ylo) / (yhi - ylo) : 0.5);
    };
    std::ofstream out(p, std::ios::binary);
    if (!out) die_config("cannot open output file: " + p.string());
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\""
        << h << "\" viewBox=\"0 0 " << w << " " << h << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<polyline fill=\"none\" stroke=\"black\" stroke-width=\"1\" points=\"";
    for (size_t i = 0; i < xs.size(); ++i)
        out << sx(xs[i]) << "," << sy(ys[i]) << (i + 1 < xs.size() ? " " : "");
    out << "\"/>\n</svg>\n";
}

// RAII equilibrium handle
struct Equilibrium {
    ss_equilibrium* h = nullptr;
    ~Equilibrium() { ss_equilibrium_free(h); }
};

void build_equilibrium(const Opts& o, Equilibrium& eq) {
    if (o.kind == "couette")
        require_ok(ss_equilibrium_stable_couette(&eq.h), "equilibrium");
    else
        require_ok(ss_equilibrium_tanh(o.beta, o.alpha, &eq.h), "equilibrium");
}

json summary_base(const std::string& command, const Opts& o) {
    json j;
    j["schema"] = 1;
    j["command"] = command;
    j["config"] = config_json(o);
    return j;
}

// locate the dominant dispersion zero for a given kappa (max Im c)
std::optional<ss_zero> top_zero(const Equilibrium& eq, double kappa, ss_method method,
                                double eps_floor, double tol) {
    ss_zero buf[16];
    size_t n = 0;
    require_ok(ss_find_dispersion_zeros(eq.h, kappa, method, eps_floor, tol, buf, 16, &n),
               "find_dispersion_zeros");
    if (n == 0) return std::nullopt;
    size_t best = 0;
    for (size_t i = 1; i < n; ++i)
        if (buf[i].im_c > buf[best].im_c) best = i;
    return buf[best];
}

// ----- commands -------------------------------------------------------------

int cmd_profile_check(const Opts& o) {
    Equilibrium eq;
    build_equilibrium(o, eq);
    const int n = 1000;
    std::vector<double> z(n), ri(n);
    ss_richardson_report rep;
    size_t count = 0;
    require_ok(ss_miles_howard(eq.h, n, &rep, z.data(), ri.data(), n, &count),
               "miles_howard");
    fs::create_directories(o.out);
    if (wants(o, "csv")) {
        CsvWriter csv(fs::path(o.out) / "profile_check.csv");
        csv.header({"z", "Ri"});
        for (size_t i = 0; i < count; ++i) csv.row({z[i], ri[i]});
    }
    if (wants(o, "json")) {
        json j = summary_base("profile-check", o);
        j["min_ri"] = rep.min_ri;
        j["argmin_z"] = rep.argmin_z;
        j["satisfied"] = rep.satisfied != 0;
        write_json(fs::path(o.out) / "profile_check.json", j);
    }
    std::printf("profile-check: min_ri=%.6g at z=%.6g satisfied=%d\n", rep.min_ri,
                rep.argmin_z, rep.satisfied);
    return 0;
}

int cmd_nyquist(const Opts& o) {
    Equilibrium eq;
    build_equilibrium(o, eq);
    double R;
    require_ok(ss_exclusion_radius(eq.h, &R), "exclusion_radius");
    ss_winding_report rep;
    size_t rows = 0;
    require_ok(ss_nyquist_winding(eq.h, o.eps, R, &rep, nullptr, 0, &rows), "winding");
    std::vector<double> trace(5 * rows);
    require_ok(ss_nyquist_winding(eq.h, o.eps, R, &rep, trace.data(), rows, &rows),
               "winding");
    fs::create_directories(o.out);
    if (wants(o, "csv")) {
        CsvWriter csv(fs::path(o.out) / "nyquist.csv");
        csv.header({"re_c", "im_c", "re_F", "im_F", "cumulative_phase"});
        for (size_t i = 0; i < rows; ++i)
            csv.row({trace[5 * i], trace[5 * i + 1], trace[5 * i + 2], trace[5 * i + 3],
                     trace[5 * i + 4]});
    }
    if (wants(o, "json")) {
        json j = summary_base("nyquist", o);
        j["winding"] = rep.winding;
        j["max_phase_step"] = rep.max_phase_step;
        j["radius"] = R;
        write_json(fs::path(o.out) / "nyquist.json", j);
    }
    if (wants(o, "svg")) {
        std::vector<double> xs(rows), ys(rows);
        for (size_t i = 0; i < rows; ++i) {
            xs[i] = trace[5 * i + 2];
            ys[i] = trace[5 * i + 3];
        }
        write_svg_polyline(fs::path(o.out) / "nyquist.svg", xs, ys);
    }
    std::printf("nyquist: winding=%d max_phase_step=%.4f radius=%.4f\n", rep.winding,
                rep.max_phase_step, R);
    return 0;
}

int cmd_spectrum(const Opts& o) {
    Equilibrium eq;
    build_equilibrium(o, eq);
    struct Row {
        std::string method;
        ss_zero z;
    };
    std::vector<Row> rows;
    const bool couette = o.kind == "couette";
    auto collect = [&](ss_method m, const char* name) {
        ss_zero buf[16];
        size_t n = 0;
        require_ok(ss_find_dispersion_zeros(eq.h, o.kappa, m, o.eps_floor, o.tol, buf,
                                            16, &n),
                   "find_dispersion_zeros");
        for (size_t i = 0; i < n; ++i) rows.push_back({name, buf[i]});
    };
    // the integral formulation encodes the stratification through alpha, so
    // non-Friedlander profiles are searched with the shooting oracle only
    if (!couette && (o.method == "neumann" || o.method == "both"))
        collect(SS_METHOD_NEUMANN, "neumann");
    if (couette || o.method == "shooting" || o.method == "both")
        collect(SS_METHOD_SHOOTING, "shooting");

    double gamma0 = 0.0;
    bool any = false;
    for (const auto& r : rows) {
        gamma0 = std::max(gamma0, r.z.im_c);
        any = true;
    }
    fs::create_directories(o.out);
    if (wants(o, "csv")) {
        CsvWriter csv(fs::path(o.out) / "spectrum.csv");
        csv.header({"method", "alpha", "kappa", "re_c", "im_c", "residual", "g1_pass"});
        for (const auto& r : rows)
            csv.row_tagged(r.method, {o.alpha, o.kappa, r.z.re_c, r.z.im_c,
                                      r.z.residual, static_cast<double>(r.z.g1_pass)});
    }
    if (wants(o, "json")) {
        json j = summary_base("spectrum", o);
        j["n_zeros"] = rows.size();
        if (any) j["gamma0"] = gamma0;
        json zs = json::array();
        for (const auto& r : rows) {
            json z;
            z["method"] = r.method;
            z["re_c"] = r.z.re_c;
            z["im_c"] = r.z.im_c;
            z["residual"] = r.z.residual;
            z["g1_pass"] = r.z.g1_pass != 0;
            z["flagged_spurious"] = r.z.flagged_spurious != 0;
            zs.push_back(z);
        }
        j["zeros"] = zs;
        write_json(fs::path(o.out) / "spectrum.json", j);
    }
    std::printf("spectrum: %zu zeros%s\n", rows.size(),
                any ? (" gamma0=" + fmt17(gamma0)).c_str() : " (stable)");
    return 0;
}

int cmd_mode(const Opts& o) {
    Equilibrium eq;
    build_equilibrium(o, eq);
    const auto z = top_zero(eq, o.kappa, SS_METHOD_SHOOTING, o.eps_floor, o.tol);
    if (!z) die_numeric("mode: no dispersion zero found");
    ss_mode* mode = nullptr;
    require_ok(ss_mode_compute(eq.h, SS_METHOD_SHOOTING, o.k, o.kappa, z->re_c,
                               z->im_c, o.nz, &mode),
               "mode_compute");
    std::vector<double> zg(o.nz), rp(o.nz), ip(o.nz), rr(o.nz), ir(o.nz), rw(o.nz),
        iw(o.nz);
    ss_mode_arrays(mode, zg.data(), rp.data(), ip.data(), rr.data(), ir.data(),
                   rw.data(), iw.data());
    double tg, bc, sigma, kap;
    int kk, nn;
    double rc, ic;
    ss_mode_residual(mode, eq.h, &tg, &bc);
    ss_mode_info(mode, &kk, &kap, &sigma, &rc, &ic, &nn);
    ss_mode_free(mode);
    fs::create_directories(o.out);
    if (wants(o, "csv")) {
        CsvWriter csv(fs::path(o.out) / "mode.csv");
        csv.header({"z", "re_phi", "im_phi", "re_r", "im_r", "re_w", "im_w"});
        for (int j = 0; j < o.nz; ++j)
            csv.row({zg[j], rp[j], ip[j], rr[j], ir[j], rw[j], iw[j]});
    }
    if (wants(o, "json")) {
        json j = summary_base("mode", o);
        j["re_c"] = rc;
        j["im_c"] = ic;
        j["sigma"] = sigma;
        j["tg_residual"] = tg;
        j["bc_defect"] = bc;
        write_json(fs::path(o.out) / "mode.json", j);
    }
    std::printf("mode: c=%.8g%+.8gi sigma=%.8g tg_residual=%.3g\n", rc, ic, sigma, tg);
    return 0;
}

int cmd_evolve_linear(const Opts& o) {
    Equilibrium eq;
    build_equilibrium(o, eq);
    const ss_linear_model model =
        o.model == "boussinesq" || (o.model == "auto" && o.kappa != 0.0)
            ? SS_MODEL_BOUSSINESQ
            : SS_MODEL_HYDROSTATIC;
    const double t_end = o.t_end > 0.0 ? o.t_end : 24.0 / std::max(1, o.k);
    ss_growth_fit fit;
    size_t count = 0;
    require_ok(ss_linear_growth(eq.h, o.k, o.kappa, model, o.nz, o.dt, t_end, o.seed,
                                &fit, nullptr, nullptr, 0, &count),
               "linear_growth count");
    std::vector<double> ts(count), ns(count);
    require_ok(ss_linear_growth(eq.h, o.k, o.kappa, model, o.nz, o.dt, t_end, o.seed,
                                &fit, ts.data(), ns.data(), count, &count),
               "linear_growth");

    // reference growth k * Im(c) from the dispersion zero at this kappa
    std::optional<double> predicted;
    if (o.kind == "tanh") {
        const auto z = top_zero(eq, o.kappa, SS_METHOD_SHOOTING, o.eps_floor, o.tol);
        if (z) predicted = o.k * z->im_c;
    }
    fs::create_directories(o.out);
    if (wants(o, "csv")) {
        CsvWriter csv(fs::path(o.out) / "evolve_linear.csv");
        csv.header({"t", "deviation_norm"});
        for (size_t i = 0; i < count; ++i) csv.row({ts[i], ns[i]});
    }
    if (wants(o, "json")) {
        json j = summary_base("evolve-linear", o);
        j["fitted_sigma"] = fit.fitted_sigma;
        j["fit_r2"] = fit.fit_r2;
        if (predicted) {
            j["predicted_sigma"] = *predicted;
            j["relative_error"] = std::abs(fit.fitted_sigma - *predicted) / *predicted;
        }
        write_json(fs::path(o.out) / "evolve_linear.json", j);
    }
    if (wants(o, "svg")) {
        std::vector<double> logn(count);
        for (size_t i = 0; i < count; ++i) logn[i] = std::log10(std::max(ns[i], 1e-300));
        write_svg_polyline(fs::path(o.out) / "evolve_linear.svg", ts, logn);
    }
    std::printf("evolve-linear: fitted_sigma=%.8g r2=%.6f%s\n", fit.fitted_sigma,
                fit.fit_r2,
                predicted ? (" predicted=" + fmt17(*predicted)).c_str() : "");
    return 0;
}

// dominant resolved mode on T_M: argmax over k of k Im c(k/M) / M
int auto_mode_index(const Equilibrium& eq, const Opts& o) {
    int best_k = 0;
    double best = 0.0;
    const int kmax = std::min(o.nx / 3, 8);
    for (int k = 1; k <= kmax; ++k) {
        const auto z =
            top_zero(eq, k / o.M, SS_METHOD_SHOOTING, o.eps_floor, o.tol);
        if (!z) continue;
        const double rate = k * z->im_c / o.M;
        if (rate > best) {
            best = rate;
            best_k = k;
        }
    }
    if (best_k == 0) die_numeric("no unstable mode found on this torus");
    return best_k;
}

struct NonlinearRun {
    double T = 0.0;
    int reached = 0;
    ss_growth_fit fit{};
    std::vector<double> ts, ns;
    double Lambda = 0.0;
    int k = 0;
};

NonlinearRun run_nonlinear(const Equilibrium& eq, const Opts& o, int k, double delta) {
    NonlinearRun r;
    r.k = k;
    const double kappa = k / o.M;
    const auto z = top_zero(eq, kappa, SS_METHOD_SHOOTING, o.eps_floor, o.tol);
    if (!z) die_numeric("nonlinear run: no unstable mode at kappa");
    ss_mode* mode = nullptr;
    require_ok(ss_mode_compute(eq.h, SS_METHOD_SHOOTING, k, kappa, z->re_c, z->im_c,
                               o.nz, &mode),
               "mode_compute");
    double growth;
    require_ok(ss_dominant_growth(eq.h, k, kappa, o.nz, 1e-3, 1.0, o.seed, &growth),
               "dominant_growth");
    r.Lambda = growth / o.M;  // physical rate on the torus

    ss_instability_result res;
    size_t count = 0;
    ss_status st = ss_instability_time(eq.h, mode, o.M, delta, o.threshold_m, o.nx,
                                       o.nz, o.dt, r.Lambda, &res, nullptr, nullptr, 0,
                                       &count);
    if (st == SS_OK || st == SS_ERR_NO_BLOWUP) {
        r.ts.resize(count);
        r.ns.resize(count);
        st = ss_instability_time(eq.h, mode, o.M, delta, o.threshold_m, o.nx, o.nz,
                                 o.dt, r.Lambda, &res, r.ts.data(), r.ns.data(), count,
                                 &count);
    }
    ss_mode_free(mode);
    if (st != SS_OK && st != SS_ERR_NO_BLOWUP) require_ok(st, "instability_time");
    r.T = res.T;
    r.reached = res.reached;
    r.fit = res.fit;
    if (st == SS_ERR_NO_BLOWUP) r.reached = 0;
    return r;
}

int cmd_evolve_nonlinear(const Opts& o) {
    Equilibrium eq;
    build_equilibrium(o, eq);
    const int k = o.k > 0 ? o.k : auto_mode_index(eq, o);
    const NonlinearRun r = run_nonlinear(eq, o, k, o.delta);
    fs::create_directories(o.out);
    if (wants(o, "csv")) {
        CsvWriter csv(fs::path(o.out) / "evolve_nonlinear.csv");
        csv.header({"t", "deviation_norm"});
        for (size_t i = 0; i < r.ts.size(); ++i) csv.row({r.ts[i], r.ns[i]});
    }
    if (wants(o, "json")) {
        json j = summary_base("evolve-nonlinear", o);
        j["k"] = k;
        j["Lambda"] = r.Lambda;
        j["reached"] = r.reached != 0;
        j["T"] = r.T;
        j["fitted_sigma"] = r.fit.fitted_sigma;
        j["fit_r2"] = r.fit.fit_r2;
        write_json(fs::path(o.out) / "evolve_nonlinear.json", j);
    }
    if (wants(o, "svg")) {
        std::vector<double> logn(r.ns.size());
        for (size_t i = 0; i < r.ns.size(); ++i)
            logn[i] = std::log10(std::max(r.ns[i], 1e-300));
        write_svg_polyline(fs::path(o.out) / "evolve_nonlinear.svg", r.ts, logn);
    }
    std::printf("evolve-nonlinear: k=%d Lambda=%.6g reached=%d T=%.6g sigma=%.6g\n", k,
                r.Lambda, r.reached, r.T, r.fit.fitted_sigma);
    if (!r.reached) die_numeric("threshold not reached within the step budget");
    return 0;
}

int cmd_scan_beta(const Opts& o) {
    fs::create_directories(o.out);
    json rows = json::array();
    std::optional<double> first_unstable;
    std::optional<CsvWriter> csv;
    if (wants(o, "csv")) {
        csv.emplace(fs::path(o.out) / "scan_beta.csv");
        csv->header({"beta", "winding", "max_phase_step", "radius"});
    }
    for (double beta : o.beta_list) {
        Equilibrium eq;
        require_ok(ss_equilibrium_tanh(beta, o.alpha, &eq.h), "equilibrium");
        double R;
        require_ok(ss_exclusion_radius(eq.h, &R), "exclusion_radius");
        ss_winding_report rep;
        require_ok(ss_nyquist_winding(eq.h, o.eps, R, &rep, nullptr, 0, nullptr),
                   "winding");
        if (rep.winding >= 1 && !first_unstable) first_unstable = beta;
        if (csv) csv->row({beta, static_cast<double>(rep.winding), rep.max_phase_step, R});
        json row;
        row["beta"] = beta;
        row["winding"] = rep.winding;
        row["max_phase_step"] = rep.max_phase_step;
        rows.push_back(row);
        std::printf("scan-beta: beta=%.3g winding=%d\n", beta, rep.winding);
    }
    if (wants(o, "json")) {
        json j = summary_base("scan-beta", o);
        j["rows"] = rows;
        if (first_unstable) j["first_winding_one_beta"] = *first_unstable;
        write_json(fs::path(o.out) / "scan_beta.json", j);
    }
    return 0;
}

int cmd_scan_delta(const Opts& o) {
    Equilibrium eq;
    build_equilibrium(o, eq);
    const int k = o.k > 0 ? o.k : auto_mode_index(eq, o);
    fs::create_directories(o.out);
    std::optional<CsvWriter> csv;
    if (wants(o, "csv")) {
        csv.emplace(fs::path(o.out) / "scan_delta.csv");
        csv->header({"delta", "T", "fitted_sigma", "fit_r2", "reached"});
    }
    json deltas = json::array(), times = json::array();
    double Lambda = 0.0;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    bool all_reached = true;
    for (double delta : o.delta_list) {
        const NonlinearRun r = run_nonlinear(eq, o, k, delta);
        Lambda = r.Lambda;
        all_reached = all_reached && r.reached;
        if (csv)
            csv->row({delta, r.T, r.fit.fitted_sigma, r.fit.fit_r2,
                      static_cast<double>(r.reached)});
        deltas.push_back(delta);
        times.push_back(r.T);
        if (r.reached) {
            const double x = std::abs(std::log(delta));
            sx += x;
            sy += r.T;
            sxx += x * x;
            sxy += x * r.T;
            ++m;
        }
        std::printf("scan-delta: delta=%.3g T=%.6g sigma=%.6g\n", delta, r.T,
                    r.fit.fitted_sigma);
    }
    double slope = 0.0;
    if (m >= 2) slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    if (wants(o, "json")) {
        json j = summary_base("scan-delta", o);
        j["k"] = k;
        j["Lambda"] = Lambda;
        j["deltas"] = deltas;
        j["T_delta"] = times;
        j["fitted_slope_vs_logdelta"] = slope;
        j["expected_slope"] = Lambda > 0 ? 1.0 / Lambda : 0.0;
        write_json(fs::path(o.out) / "scan_delta.json", j);
    }
    std::printf("scan-delta: slope=%.6g expected=%.6g\n", slope,
                Lambda > 0 ? 1.0 / Lambda : 0.0);
    if (!all_reached) die_numeric("some runs did not reach the threshold");
    return 0;
}

int cmd_scan_M(const Opts& o) {
    Equilibrium eq;
    build_equilibrium(o, eq);
    // hydrostatic reference zero
    const auto z0 = top_zero(eq, 0.0, SS_METHOD_SHOOTING, o.eps_floor, o.tol);
    if (!z0) die_numeric("scan-M: no hydrostatic zero");
    fs::create_directories(o.out);
    std::optional<CsvWriter> csv;
    if (wants(o, "csv")) {
        csv.emplace(fs::path(o.out) / "scan_M.csv");
        csv->header({"M", "kappa", "re_c", "im_c", "dist_to_hydrostatic",
                     "fitted_growth", "growth_rel_err"});
    }
    json rows = json::array();
    for (double M : o.m_list) {
        const double kappa = o.k / M;
        const auto z = top_zero(eq, kappa, SS_METHOD_NEUMANN, o.eps_floor, o.tol);
        if (!z) die_numeric("scan-M: no zero at M=" + fmt17(M));
        const double dist = std::hypot(z->re_c - z0->re_c, z->im_c - z0->im_c);
        ss_growth_fit fit;
        require_ok(ss_linear_growth(eq.h, o.k, kappa, SS_MODEL_BOUSSINESQ, o.nz, o.dt,
                                    o.t_end > 0 ? o.t_end : 24.0 / std::max(1, o.k),
                                    o.seed, &fit, nullptr, nullptr, 0, nullptr),
                   "linear_growth");
        const double predicted = o.k * z->im_c;
        const double rel = std::abs(fit.fitted_sigma - predicted) / predicted;
        if (csv) csv->row({M, kappa, z->re_c, z->im_c, dist, fit.fitted_sigma, rel});
        json row;
        row["M"] = M;
        row["kappa"] = kappa;
        row["re_c"] = z->re_c;
        row["im_c"] = z->im_c;
        row["dist_to_hydrostatic"] = dist;
        row["fitted_growth"] = fit.fitted_sigma;
        row["growth_rel_err"] = rel;
        rows.push_back(row);
        std::printf("scan-M: M=%.3g c=%.8g%+.8gi dist=%.3g rel_err=%.3g\n", M, z->re_c,
                    z->im_c, dist, rel);
    }
    if (wants(o, "json")) {
        json j = summary_base("scan-M", o);
        j["hydrostatic_re_c"] = z0->re_c;
        j["hydrostatic_im_c"] = z0->im_c;
        j["rows"] = rows;
        write_json(fs::path(o.out) / "scan_M.json", j);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"stratified shear flow instability toolkit"};
    app.require_subcommand(1);

    Opts o;
    OptionRegistry reg;
    std::function<int(const Opts&)> action;

    auto add = [&](const char* name, const char* desc, int (*fn)(const Opts&)) {
        CLI::App* cmd = app.add_subcommand(name, desc);
        add_common(cmd, o, reg);
        cmd->callback([&action, fn] { action = fn; });
        return cmd;
    };
    add("profile-check", "Richardson number / Miles-Howard diagnostics",
        cmd_profile_check);
    add("nyquist", "winding of the Nyquist dispersion integral", cmd_nyquist);
    add("spectrum", "dispersion zeros in the upper half-plane", cmd_spectrum);
    add("mode", "reconstruct the growing mode at the top zero", cmd_mode);
    add("evolve-linear", "time-stepped linear growth vs k Im(c)", cmd_evolve_linear);
    add("evolve-nonlinear", "nonlinear instability run to threshold m",
        cmd_evolve_nonlinear);
    add("scan-beta", "winding number across shear steepness", cmd_scan_beta);
    add("scan-delta", "instability time vs perturbation size", cmd_scan_delta);
    add("scan-M", "long-wave zeros and growth across torus sizes", cmd_scan_M);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitConfig;
    }

    try {
        if (!o.config_file.empty()) reg.apply_config_file(o.config_file);
        if (o.nx & (o.nx - 1)) die_config("nx must be a power of two");
        if (!(o.tol > 0.0) || !(o.dt > 0.0)) die_config("tolerances must be positive");
        if (o.kind == "tanh" && !(o.alpha > 0.5 && o.alpha <= 1.0))
            die_config("AlphaOutOfRange: alpha must lie in (1/2, 1]");
        return action(o);
    } catch (const CliError& e) {
        std::fprintf(stderr, "error: %s\n", e.message.c_str());
        return e.code;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitNumeric;
    }
}
