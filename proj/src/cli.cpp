#include "efr/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "efr/ccdf.hpp"
#include "efr/csvio.hpp"
#include "efr/errors.hpp"
#include "efr/fpca.hpp"
#include "efr/grid.hpp"
#include "efr/kernels.hpp"
#include "efr/regression.hpp"
#include "efr/report.hpp"
#include "efr/simulation.hpp"
#include "efr/version.hpp"

namespace efr::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string compact(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", x);
    return buf;
}

std::string tau_column(double t) { return "tau_" + compact(t); }

std::string x1e3(double v) {
    if (!std::isfinite(v))
        return "nan";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%lld", static_cast<long long>(std::llround(v * 1e3)));
    return buf;
}

std::string full_or_nan(double v) {
    return std::isfinite(v) ? format_full(v) : std::string("nan");
}

void write_text(const fs::path& path, const std::string& body) {
    std::ofstream out(path);
    if (!out)
        throw data_error("cannot write " + path.string());
    out << body;
}

std::string sanitize_id(const std::string& id) {
    std::string out;
    for (char c : id)
        out += (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' ||
                c == '.')
                   ? c
                   : '_';
    return out.empty() ? std::string("profile") : out;
}

// ---- shared flag bundle -------------------------------------------------

struct CommonArgs {
    std::string out_dir;
    std::string config_path;
    std::vector<double> taus = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
    std::string kernel = "epanechnikov";
    double kappa = 1.0;
    std::size_t k_neighbors = 0;
    std::uint64_t seed = 1;
    std::string vhat_form = "adopted";
    std::string qr_intercept = "true";
    double var_threshold = 0.95;
    std::size_t hf_grid_size = 20;
};

// Applies a flat key=value config file to every option the command line did
// not set (flags > config > defaults).  Keys mirror the flag names without
// the leading dashes; blank lines and '#' comments are skipped.
void apply_config(CLI::App* cmd, const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw CLI::ConfigError("cannot read config file " + path);
    auto trim = [](const std::string& s) {
        const auto b = s.find_first_not_of(" \t\r");
        const auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped[0] == '#')
            continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos)
            throw CLI::ConfigError(path + ":" + std::to_string(lineno) +
                                   ": expected key=value");
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        CLI::Option* opt = cmd->get_option_no_throw("--" + key);
        if (opt == nullptr)
            throw CLI::ConfigError(path + ":" + std::to_string(lineno) +
                                   ": unknown key '" + key + "'");
        if (opt->count() > 0)
            continue; // set on the command line: the flag wins
        opt->add_result(value);
        opt->run_callback();
    }
}

void add_common(CLI::App* cmd, CommonArgs& a) {
    cmd->add_option("--config", a.config_path,
                    "flat key=value config file (flags take precedence)")
        ->check(CLI::ExistingFile);
    cmd->add_option("--out", a.out_dir, "output directory");
    cmd->add_option("--tau", a.taus, "extremile levels in (0,1), increasing")
        ->delimiter(',')
        ->check(CLI::Range(1e-12, 1.0 - 1e-12));
    cmd->add_option("--kernel", a.kernel, "smoothing kernel")
        ->check(CLI::IsMember({"epanechnikov", "gaussian"}));
    cmd->add_option("--kappa", a.kappa, "CDF bandwidth variance constant")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--k-neighbors", a.k_neighbors,
                    "kNN count for the regression bandwidth (0 = auto)");
    cmd->add_option("--seed", a.seed, "RNG seed");
    cmd->add_option("--vhat-form", a.vhat_form, "variance proxy denominator")
        ->check(CLI::IsMember({"adopted", "printed"}));
    cmd->add_option("--qr-intercept", a.qr_intercept,
                    "include an intercept in the quantile baseline")
        ->check(CLI::IsMember({"true", "false"}));
    cmd->add_option("--var-threshold", a.var_threshold,
                    "FPCA explained-variance cutoff")
        ->check(CLI::Range(1e-6, 1.0));
    cmd->add_option("--hf-grid-size", a.hf_grid_size,
                    "CDF bandwidth grid size")
        ->check(CLI::Range(1, 1000000));
}

int check_taus(const std::vector<double>& taus) {
    for (std::size_t i = 0; i + 1 < taus.size(); ++i)
        if (!(taus[i] < taus[i + 1])) {
            std::cerr << "error: --tau levels must be strictly increasing\n";
            return 2;
        }
    return 0;
}

json common_json(const CommonArgs& a) {
    json j;
    j["out"] = a.out_dir;
    j["tau"] = a.taus;
    j["kernel"] = a.kernel;
    j["kappa"] = a.kappa;
    j["k_neighbors"] = a.k_neighbors;
    j["seed"] = a.seed;
    j["vhat_form"] = a.vhat_form;
    j["qr_intercept"] = a.qr_intercept == "true";
    j["var_threshold"] = a.var_threshold;
    j["hf_grid_size"] = a.hf_grid_size;
    return j;
}

void write_manifest(const fs::path& dir, const std::string& command,
                    const json& config, std::vector<std::string> outputs) {
    std::sort(outputs.begin(), outputs.end());
    json m;
    m["command"] = command;
    m["version"] = kVersion;
    m["config"] = config;
    m["outputs"] = outputs;
    write_text(dir / "manifest.json", m.dump(2) + "\n");
}

CcdfConfig make_ccdf_config(const CommonArgs& a) {
    CcdfConfig c;
    c.kernel = parse_kernel(a.kernel);
    c.kappa = a.kappa;
    c.vhat_form = a.vhat_form == "printed" ? VhatForm::printed : VhatForm::adopted;
    c.hf_grid_size = a.hf_grid_size;
    return c;
}

// ---- simulate -------------------------------------------------------------

struct SimulateArgs {
    CommonArgs common;
    std::string scenario = "A";
    std::size_t n = 200;
    std::size_t grid = 100;
    std::size_t reps = 50;
    double split = 0.8;
    bool emit_data = false;
    bool skip_pmse = false;
};

ScenarioConfig to_config(const SimulateArgs& s) {
    ScenarioConfig c;
    c.scenario = s.scenario[0];
    c.n = s.n;
    c.S = s.grid;
    c.kappa = s.common.kappa;
    c.tau_grid = s.common.taus;
    c.B_reps = s.reps;
    c.kernel = parse_kernel(s.common.kernel);
    c.seed = s.common.seed;
    c.k_neighbors = s.common.k_neighbors;
    c.split_fraction = s.split;
    c.vhat_form =
        s.common.vhat_form == "printed" ? VhatForm::printed : VhatForm::adopted;
    c.qr_intercept = s.common.qr_intercept == "true";
    c.var_threshold = s.common.var_threshold;
    c.hf_grid_size = s.common.hf_grid_size;
    return c;
}

std::string table_csv(const ScenarioConfig& c, const std::vector<double>& taus,
                      const std::vector<std::pair<std::string, const std::vector<double>*>>& rows) {
    std::string head = "scenario,n,S,kappa,kernel,metric";
    for (double t : taus)
        head += ',' + tau_column(t);
    std::string body;
    const std::string prefix = std::string(1, c.scenario) + ',' +
                               std::to_string(c.n) + ',' + std::to_string(c.S) +
                               ',' + compact(c.kappa) + ',' + kernel_name(c.kernel);
    for (const auto& [name, vals] : rows) {
        const bool scaled = name.size() > 5 && name.substr(name.size() - 5) == "_x1e3";
        body += prefix + ',' + name;
        for (double v : *vals)
            body += ',' + (scaled ? x1e3(v) : full_or_nan(v));
        body += '\n';
    }
    return head + '\n' + body;
}

void write_mse_log(const fs::path& path, const RealMatrix& mc,
                   const RealMatrix& pm) {
    std::ofstream out(path);
    if (!out)
        throw data_error("cannot write " + path.string());
    auto dump_rows = [&](const char* kind, const RealMatrix& m) {
        for (std::size_t b = 0; b < m.rows; ++b) {
            json row;
            row["kind"] = kind;
            row["rep"] = b;
            json vals = json::array();
            for (std::size_t j = 0; j < m.cols; ++j) {
                double v = m.at(b, j);
                if (std::isfinite(v))
                    vals.push_back(v);
                else
                    vals.push_back(nullptr);
            }
            row["values"] = vals;
            out << row.dump() << '\n';
        }
    };
    dump_rows("mse", mc);
    dump_rows("pmse", pm);
}

int cmd_simulate(const SimulateArgs& s) {
    if (s.common.out_dir.empty()) {
        std::cerr << "error: --out is required\n";
        return 2;
    }
    if (int rc = check_taus(s.common.taus))
        return rc;
    ScenarioConfig cfg = to_config(s);
    try {
        validate_config(cfg);
    } catch (const domain_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }

    fs::create_directories(s.common.out_dir);
    const fs::path dir(s.common.out_dir);

    McResult mc = run_mc(cfg);
    PmseResult pm;
    if (!s.skip_pmse)
        pm = run_pmse(cfg);

    std::vector<std::string> outputs = {"amse.csv", "crossing.csv", "manifest.json",
                                        "mse_log.jsonl"};

    write_text(dir / "amse.csv",
               table_csv(cfg, cfg.tau_grid,
                         {{"amse", &mc.amse},
                          {"amse_sd", &mc.sd},
                          {"amse_x1e3", &mc.amse},
                          {"amse_sd_x1e3", &mc.sd}}));

    {
        std::string head =
            "scenario,n,S,kappa,kernel,reps,crossing_extremile,crossing_quantile\n";
        std::string row = std::string(1, cfg.scenario) + ',' + std::to_string(cfg.n) +
                          ',' + std::to_string(cfg.S) + ',' + compact(cfg.kappa) +
                          ',' + kernel_name(cfg.kernel) + ',' +
                          std::to_string(cfg.B_reps) + ',' +
                          format_full(mc.crossing_rate_extremile) + ',' +
                          format_full(mc.crossing_rate_quantile) + '\n';
        write_text(dir / "crossing.csv", head + row);
    }

    if (!s.skip_pmse) {
        write_text(dir / "pmse.csv",
                   table_csv(cfg, cfg.tau_grid,
                             {{"apmse", &pm.apmse},
                              {"apmse_sd", &pm.sd},
                              {"apmse_x1e3", &pm.apmse},
                              {"apmse_sd_x1e3", &pm.sd}}));
        outputs.push_back("pmse.csv");
    }

    write_mse_log(dir / "mse_log.jsonl", mc.per_rep_mse, pm.per_rep_mse);

    if (s.emit_data) {
        ScenarioDraw draw = gen_scenario(cfg, 0);
        write_curves((dir / "curves.csv").string(), draw.sample);
        write_responses((dir / "responses.csv").string(), draw.sample.ids,
                        draw.responses);
        outputs.push_back("curves.csv");
        outputs.push_back("responses.csv");
    }

    json config = common_json(s.common);
    config["scenario"] = s.scenario;
    config["n"] = s.n;
    config["grid"] = s.grid;
    config["reps"] = s.reps;
    config["split"] = s.split;
    config["emit_data"] = s.emit_data;
    config["skip_pmse"] = s.skip_pmse;
    write_manifest(dir, "simulate", config, outputs);

    std::cout << "simulate: wrote " << outputs.size() << " files to "
              << s.common.out_dir << " (failed reps: " << mc.failed_reps + pm.failed_reps
              << ")\n";
    return 0;
}

// ---- fit / predict --------------------------------------------------------

struct FitArgs {
    CommonArgs common;
    std::string curves_path;
    std::string responses_path;
    std::string eval_path; // optional for fit, required for predict
    double profile_m = 5.0;
    bool export_basis = false;
};

CurveSample default_profiles(const FpcaBasis& basis, double m) {
    std::vector<Curve> curves;
    std::vector<std::string> ids;
    curves.push_back(basis.mean);
    ids.push_back("mean");
    if (basis.K() >= 1) {
        const auto& phi1 = basis.eigenfunctions[0];
        std::vector<double> up(basis.mean.values), dn(basis.mean.values);
        for (std::size_t j = 0; j < up.size(); ++j) {
            up[j] += m * phi1.values[j];
            dn[j] -= m * phi1.values[j];
        }
        curves.push_back(make_curve(basis.grid, std::move(up)));
        ids.push_back("mean_plus_" + compact(m) + "phi1");
        curves.push_back(make_curve(basis.grid, std::move(dn)));
        ids.push_back("mean_minus_" + compact(m) + "phi1");
    }
    return make_sample(basis.grid, std::move(curves), std::move(ids));
}

void write_extremiles_csv(const fs::path& path, const CurveSample& eval_points,
                          const std::vector<double>& taus,
                          const PredictionMatrix& pred) {
    std::string head = "id";
    for (double t : taus)
        head += ',' + tau_column(t);
    std::string body;
    for (std::size_t i = 0; i < eval_points.n(); ++i) {
        body += eval_points.ids.empty() ? "p" + std::to_string(i + 1)
                                        : eval_points.ids[i];
        for (std::size_t j = 0; j < taus.size(); ++j)
            body += ',' + full_or_nan(pred.values.at(i, j));
        body += '\n';
    }
    write_text(path, head + '\n' + body);
}

int cmd_fit(const FitArgs& f, bool require_eval, const char* command) {
    if (f.common.out_dir.empty() || f.curves_path.empty() || f.responses_path.empty() ||
        (require_eval && f.eval_path.empty())) {
        std::cerr << "error: " << command << " requires --out, --curves, --responses"
                  << (require_eval ? ", --eval-curves" : "") << '\n';
        return 2;
    }
    if (int rc = check_taus(f.common.taus))
        return rc;
    if (f.common.taus.empty()) {
        std::cerr << "error: --tau list must be nonempty\n";
        return 2;
    }

    CurveSample sample = read_curves(f.curves_path);
    std::vector<double> y = read_responses(f.responses_path, sample);
    FpcaBasis basis = fit_fpca(sample, f.common.var_threshold);

    const std::size_t k = f.common.k_neighbors > 0 ? f.common.k_neighbors
                                                   : default_k_neighbors(sample.n());
    const KernelSpec kernel = parse_kernel(f.common.kernel);
    const CcdfConfig ccdf = make_ccdf_config(f.common);

    CurveSample eval_points = f.eval_path.empty()
                                  ? default_profiles(basis, f.profile_m)
                                  : read_curves(f.eval_path);
    if (!f.eval_path.empty() && !same_grid(*eval_points.grid, *sample.grid))
        throw grid_mismatch_error("evaluation curves use a different grid than " +
                                  f.curves_path);

    PredictionMatrix pred = predict_extremiles(eval_points, f.common.taus, sample, y,
                                               basis, kernel, k, ccdf);

    fs::create_directories(f.common.out_dir);
    const fs::path dir(f.common.out_dir);
    std::vector<std::string> outputs = {"extremiles.csv", "manifest.json"};

    write_extremiles_csv(dir / "extremiles.csv", eval_points, f.common.taus, pred);

    if (f.eval_path.empty() && !require_eval) {
        std::string head = basis.K() >= 1 ? "s,mean,mean_plus,mean_minus" : "s,mean";
        std::string body;
        for (std::size_t j = 0; j < basis.grid->size(); ++j) {
            body += format_full(basis.grid->points[j]) + ',' +
                    format_full(basis.mean.values[j]);
            if (basis.K() >= 1) {
                body += ',' + format_full(eval_points.curves[1].values[j]) + ',' +
                        format_full(eval_points.curves[2].values[j]);
            }
            body += '\n';
        }
        write_text(dir / "profiles.csv", head + '\n' + body);
        outputs.push_back("profiles.csv");
    }

    if (f.export_basis) {
        std::string head = "component,eigenvalue";
        for (double s : basis.grid->points)
            head += ',' + format_full(s);
        std::string body;
        for (std::size_t kc = 0; kc < basis.K(); ++kc) {
            body += std::to_string(kc + 1) + ',' + format_full(basis.eigenvalues[kc]);
            for (double v : basis.eigenfunctions[kc].values)
                body += ',' + format_full(v);
            body += '\n';
        }
        write_text(dir / "basis.csv", head + '\n' + body);
        outputs.push_back("basis.csv");
    }

    json config = common_json(f.common);
    config["curves"] = f.curves_path;
    config["responses"] = f.responses_path;
    config["eval_curves"] = f.eval_path;
    config["profile_m"] = f.profile_m;
    config["export_basis"] = f.export_basis;
    config["k_resolved"] = k;
    config["fpca_components"] = basis.K();
    write_manifest(dir, command, config, outputs);

    std::cout << command << ": " << eval_points.n() << " evaluation points, "
              << f.common.taus.size() << " levels, K = " << basis.K();
    if (pred.failed_cells > 0)
        std::cout << ", failed cells: " << pred.failed_cells;
    std::cout << '\n';
    return 0;
}

// ---- report ---------------------------------------------------------------

struct ReportArgs {
    std::string in_dir;
    std::string out_dir;
};

int cmd_report(const ReportArgs& r) {
    const fs::path src = fs::path(r.in_dir) / "extremiles.csv";
    std::ifstream in(src);
    if (!in) {
        std::cerr << "error: missing " << src.string() << '\n';
        return 1;
    }
    std::string header;
    std::getline(in, header);
    std::vector<std::string> cols;
    {
        std::string cur;
        for (char c : header) {
            if (c == ',') {
                cols.push_back(cur);
                cur.clear();
            } else if (c != '\r') {
                cur += c;
            }
        }
        cols.push_back(cur);
    }
    if (cols.size() < 2 || cols[0] != "id") {
        std::cerr << "error: " << src.string() << " lacks tau columns\n";
        return 2;
    }
    std::vector<double> taus;
    for (std::size_t j = 1; j < cols.size(); ++j) {
        if (cols[j].rfind("tau_", 0) != 0) {
            std::cerr << "error: unexpected column '" << cols[j] << "'\n";
            return 2;
        }
        taus.push_back(std::strtod(cols[j].c_str() + 4, nullptr));
    }

    fs::create_directories(r.out_dir);
    const fs::path dir(r.out_dir);
    std::vector<std::string> outputs;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        std::vector<std::string> tok;
        std::string cur;
        for (char c : line) {
            if (c == ',') {
                tok.push_back(cur);
                cur.clear();
            } else if (c != '\r') {
                cur += c;
            }
        }
        tok.push_back(cur);
        if (tok.size() != cols.size())
            throw data_error(src.string() + ": ragged row for id '" + tok[0] + "'");
        std::vector<double> vals;
        bool usable = true;
        for (std::size_t j = 1; j < tok.size(); ++j) {
            double v = std::strtod(tok[j].c_str(), nullptr);
            if (!std::isfinite(v))
                usable = false;
            vals.push_back(v);
        }
        if (!usable) {
            std::cerr << "warning: skipping '" << tok[0] << "' (non-finite cells)\n";
            continue;
        }
        const std::string fname = "report_" + sanitize_id(tok[0]) + ".svg";
        write_text(dir / fname, render_extremile_svg(tok[0], taus, vals));
        outputs.push_back(fname);
    }
    if (outputs.empty()) {
        std::cerr << "error: no plottable rows in " << src.string() << '\n';
        return 1;
    }

    json config;
    config["in"] = r.in_dir;
    config["out"] = r.out_dir;
    outputs.push_back("manifest.json");
    write_manifest(dir, "report", config, outputs);
    std::cout << "report: wrote " << outputs.size() - 1 << " SVG files\n";
    return 0;
}

} // namespace

int run(const std::vector<std::string>& args) {
    CLI::App app{"functional extremile regression toolkit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kVersion));

    SimulateArgs sim;
    auto* csim = app.add_subcommand("simulate", "run a Monte Carlo campaign");
    add_common(csim, sim.common);
    csim->add_option("--scenario", sim.scenario, "data generating scenario")
        ->check(CLI::IsMember({"A", "B"}));
    csim->add_option("--n", sim.n, "sample size")->check(CLI::Range(20, 1000000));
    csim->add_option("--grid", sim.grid, "design points per curve")
        ->check(CLI::Range(10, 1000000));
    csim->add_option("--reps", sim.reps, "Monte Carlo replications")
        ->check(CLI::Range(1, 1000000));
    csim->add_option("--split", sim.split, "training fraction for the PMSE pass")
        ->check(CLI::Range(1e-9, 1.0 - 1e-9));
    csim->add_flag("--emit-data", sim.emit_data, "write the rep-0 dataset as CSVs");
    csim->add_flag("--skip-pmse", sim.skip_pmse, "skip the out-of-sample pass");

    FitArgs fit;
    auto* cfit = app.add_subcommand("fit", "fit extremile curves from CSV data");
    add_common(cfit, fit.common);
    cfit->add_option("--curves", fit.curves_path, "curves CSV")
        ->check(CLI::ExistingFile);
    cfit->add_option("--responses", fit.responses_path, "responses CSV")
        ->check(CLI::ExistingFile);
    cfit->add_option("--eval-curves", fit.eval_path,
                     "evaluation curves CSV (default: FPCA mean +/- m phi1)")
        ->check(CLI::ExistingFile);
    cfit->add_option("--profile-m", fit.profile_m,
                     "multiplier m for the default profiles")
        ->check(CLI::PositiveNumber);
    cfit->add_flag("--export-basis", fit.export_basis, "also write basis.csv");

    FitArgs pred;
    auto* cpred = app.add_subcommand("predict", "predict extremiles at given curves");
    add_common(cpred, pred.common);
    cpred->add_option("--curves", pred.curves_path, "curves CSV")
        ->check(CLI::ExistingFile);
    cpred->add_option("--responses", pred.responses_path, "responses CSV")
        ->check(CLI::ExistingFile);
    cpred->add_option("--eval-curves", pred.eval_path, "evaluation curves CSV")
        ->check(CLI::ExistingFile);

    ReportArgs rep;
    auto* crep = app.add_subcommand("report", "render extremile-vs-tau SVG charts");
    crep->add_option("--in", rep.in_dir, "directory containing extremiles.csv")
        ->required();
    crep->add_option("--out", rep.out_dir, "output directory")->required();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
        if (csim->parsed() && !sim.common.config_path.empty())
            apply_config(csim, sim.common.config_path);
        if (cfit->parsed() && !fit.common.config_path.empty())
            apply_config(cfit, fit.common.config_path);
        if (cpred->parsed() && !pred.common.config_path.empty())
            apply_config(cpred, pred.common.config_path);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (csim->parsed())
            return cmd_simulate(sim);
        if (cfit->parsed())
            return cmd_fit(fit, false, "fit");
        if (cpred->parsed())
            return cmd_fit(pred, true, "predict");
        return cmd_report(rep);
    } catch (const error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}

int run(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i)
        args.emplace_back(argv[i]);
    return run(args);
}

} // namespace efr::cli
