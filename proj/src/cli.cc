#include "tomomax/cli.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "tomomax/figures.h"
#include "tomomax/lfp.h"
#include "tomomax/noisycoin.h"
#include "tomomax/parallel.h"
#include "tomomax/risk.h"
#include "tomomax/serialization.h"

namespace tomomax {

namespace {

namespace fs = std::filesystem;

// Raised for invalid user input; maps to exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

StateKind parse_kind(const std::string &name) {
    try {
        return kind_from_name(name);
    } catch (const Error &) {
        throw ConfigError("unknown state kind '" + name + "' (expected rebit, qubit or coin)");
    }
}

ExperimentDesign make_design(const std::string &kind_name, int n, double alpha) {
    if (n < 1) {
        throw ConfigError("--N must be positive");
    }
    StateKind kind = parse_kind(kind_name);
    if (kind == StateKind::Coin) {
        if (!(alpha >= 0.0 && alpha < 0.5)) {
            throw ConfigError("--alpha must lie in [0, 1/2)");
        }
        return NoisyCoinModel::uniform(n, alpha).to_design();
    }
    const int bases = kind == StateKind::Rebit ? 2 : 3;
    if (n % bases != 0) {
        throw ConfigError(
            "--N " + std::to_string(n) + " is not divisible by the " + std::to_string(bases) + " measured bases");
    }
    return ExperimentDesign::pauli_total(kind, n);
}

// Accepts an estimator table or an LFP result (whose estimator is used).
TabulatedEstimator load_table(const std::string &path) {
    Json j = parse_json(read_file(path), path);
    if (j.contains("entries")) {
        return estimator_from_json(j);
    }
    if (j.contains("prior")) {
        return lfp_from_json(j, fs::path(path).parent_path().string()).estimator;
    }
    throw ConfigError(path + " is neither an estimator table nor an LFP result");
}

std::string label_of(const std::string &labeled, std::string *path) {
    auto eq = labeled.find('=');
    if (eq == std::string::npos) {
        *path = labeled;
        return fs::path(labeled).stem().string();
    }
    *path = labeled.substr(eq + 1);
    return labeled.substr(0, eq);
}

std::string beta_label(const char *name, double beta) {
    std::ostringstream ss;
    ss << name << "(" << beta << ")";
    return ss.str();
}

Vec3 parse_axis(const std::vector<double> &values, StateKind kind) {
    const int d = dimension(kind);
    Vec3 axis{};
    if (values.empty()) {
        if (kind == StateKind::Coin) {
            return {1.0, 0.0, 0.0};
        }
        for (int c = 0; c < d; c++) {
            axis[static_cast<std::size_t>(c)] = 1.0 / std::sqrt(static_cast<double>(d));
        }
        return axis;
    }
    if (static_cast<int>(values.size()) != d) {
        throw ConfigError("--axis needs " + std::to_string(d) + " components");
    }
    for (int c = 0; c < d; c++) {
        axis[static_cast<std::size_t>(c)] = values[static_cast<std::size_t>(c)];
    }
    double n = norm(axis);
    if (!(n > 0.0)) {
        throw ConfigError("--axis must be nonzero");
    }
    return (1.0 / n) * axis;
}

std::string csv_cell(const std::string &s) {
    if (s.find_first_of(",\"\n") == std::string::npos) {
        return s;
    }
    std::string out = "\"";
    for (char c : s) {
        out += c == '"' ? std::string("\"\"") : std::string(1, c);
    }
    return out + "\"";
}

void emit(const std::string &path, const std::string &content) {
    if (path.empty() || path == "-") {
        std::cout << content;
    } else {
        write_file_atomic(path, content);
    }
}

struct MaxRiskFlags {
    MaxRiskConfig config;

    void add(CLI::App *app) {
        app->add_option("--grid-radial", config.rebit_radial, "Rebit max-risk grid: radial points");
        app->add_option("--grid-angular", config.rebit_angular, "Rebit max-risk grid: angular points");
        app->add_option("--grid-directions", config.qubit_directions, "Qubit max-risk grid: directions");
        app->add_option("--grid-shells", config.qubit_shells, "Qubit max-risk grid: radial shells");
        app->add_option("--grid-coin", config.coin_points, "Coin max-risk grid: points");
        app->add_option("--refine-top", config.refine_top, "Grid maxima refined by local search");
    }
};

struct LfpFlags {
    std::string alg = "mc";
    std::optional<std::uint64_t> seed;
    double tol = 1e-3;
    int max_iterations = 0;
    double inner_tol = 0.0;
    std::size_t n_init = 100;
    double weight_tol = 1e-4;
    int m_per_point = 5;
    double sigma = 0.0;
    std::size_t max_parents = MonteCarloConfig{}.max_parents;
    double mixing_alpha = 0.0;
    int location_rounds = 8;
    double merge_distance = 1e-6;
    MaxRiskFlags max_risk;

    void add(CLI::App *app) {
        app->add_option("--alg", alg, "Search algorithm")->check(CLI::IsMember({"mc", "kempthorne"}));
        app->add_option("--seed", seed, "Random seed (required for --alg mc)");
        app->add_option("--tol", tol, "Relative gap (max - av)/av at which to stop")->check(CLI::PositiveNumber);
        app->add_option("--max-iterations", max_iterations, "Outer iteration limit (0: algorithm default)");
        app->add_option("--inner-tol", inner_tol, "Weight-solver relative tolerance (0: tol/50)");
        app->add_option("--n-init", n_init, "Initial random supports (mc)");
        app->add_option("--weight-tol", weight_tol, "Pruning threshold on weights (mc)");
        app->add_option("--m-per-point", m_per_point, "New supports per survivor (mc)");
        app->add_option("--sigma", sigma, "Resampling scale (mc; 0: 0.5/sqrt(N))");
        app->add_option("--max-parents", max_parents, "Heaviest survivors that spawn children (mc; 0: all)");
        app->add_option("--mixing-alpha", mixing_alpha, "Weight of an added support (kempthorne; 0: 1/(K+1))");
        app->add_option("--location-rounds", location_rounds, "Location/weight alternations (kempthorne)");
        app->add_option("--merge-distance", merge_distance, "Supports closer than this are merged");
        max_risk.add(app);
    }

    void validate() const {
        if (alg == "mc" && !seed) {
            throw ConfigError("--seed is required for --alg mc");
        }
        if (n_init < 1 || m_per_point < 0 || !(weight_tol >= 0.0) || !(sigma >= 0.0) || max_iterations < 0) {
            throw ConfigError("invalid Monte Carlo settings");
        }
        if (!(mixing_alpha >= 0.0 && mixing_alpha < 1.0)) {
            throw ConfigError("--mixing-alpha must lie in [0, 1)");
        }
    }

    MonteCarloConfig mc() const {
        MonteCarloConfig c;
        c.n_init = n_init;
        c.tol = tol;
        c.weight_tol = weight_tol;
        c.m_per_point = m_per_point;
        c.max_parents = max_parents;
        c.sigma = sigma;
        c.seed = seed.value_or(1);
        if (max_iterations > 0) {
            c.max_iterations = max_iterations;
        }
        c.weights.rel_tol = inner_tol;
        c.max_risk = max_risk.config;
        c.merge_distance = merge_distance;
        return c;
    }

    KempthorneConfig kempthorne() const {
        KempthorneConfig c;
        c.tol = tol;
        c.mixing_alpha = mixing_alpha;
        if (max_iterations > 0) {
            c.max_iterations = max_iterations;
        }
        c.location_rounds = location_rounds;
        c.weights.rel_tol = inner_tol;
        c.max_risk = max_risk.config;
        c.merge_distance = merge_distance;
        return c;
    }

    LfpResult run(const ExperimentDesign &design, const LfpCallback &callback, const std::string &resume) const {
        if (alg == "mc") {
            MonteCarloConfig c = mc();
            c.on_iteration = callback;
            if (!resume.empty()) {
                LfpResult checkpoint = lfp_from_json(parse_json(read_file(resume), resume),
                                                     fs::path(resume).parent_path().string());
                return mc_lfp_resume(design, checkpoint, c);
            }
            return mc_lfp(design, c);
        }
        if (!resume.empty()) {
            throw ConfigError("--resume applies to --alg mc only");
        }
        KempthorneConfig c = kempthorne();
        c.on_iteration = callback;
        return kempthorne_lfp(design, std::nullopt, c);
    }
};

std::string summary_text(const LfpResult &r) {
    std::ostringstream ss;
    ss.precision(10);
    ss << "algorithm: " << r.algorithm << "\n"
       << "status: " << (r.status == LfpStatus::Converged ? "converged" : "iteration_limit") << "\n"
       << "av_risk: " << r.av_risk << "\n"
       << "max_risk: " << r.max_risk << "\n"
       << "gap: " << r.gap << "\n"
       << "supports: " << r.prior.size() << "\n"
       << "iterations: " << r.iterations << "\n"
       << "wall_seconds: " << r.wall_seconds << "\n";
    return ss.str();
}

int cmd_compute_lfp(
    const std::string &kind, int n, double alpha, const LfpFlags &flags, const std::string &out_dir,
    const std::string &resume, bool embed) {
    flags.validate();
    ExperimentDesign design = make_design(kind, n, alpha);
    const fs::path dir(out_dir.empty() ? "lfp-" + kind + "-N" + std::to_string(n) : out_dir);
    auto write_result = [&](const LfpResult &r, const std::string &name) {
        if (embed) {
            write_file_atomic((dir / name).string(), dump(to_json(r)));
        } else {
            const std::string table = name == "lfp.json" ? "estimator.json" : "checkpoint_estimator.json";
            write_file_atomic((dir / table).string(), dump(to_json(r.estimator)));
            write_file_atomic((dir / name).string(), dump(to_json(r, table)));
        }
    };
    // Runs between outer iterations, when no evaluation is in flight.
    LfpCallback checkpoint = [&](const LfpResult &r) { write_result(r, "checkpoint.json"); };
    LfpResult result = flags.run(design, checkpoint, resume);
    write_result(result, "lfp.json");
    const std::string summary = summary_text(result);
    write_file_atomic((dir / "summary.txt").string(), summary);
    std::cout << summary;
    return result.status == LfpStatus::Converged ? kExitOk : kExitNonConvergence;
}

TabulatedEstimator builtin_table(const std::string &name, double beta, const ExperimentDesign &design) {
    if (name == "li") {
        return tabulate_linear_inversion(design);
    }
    if (name == "mle") {
        return tabulate_mle(design);
    }
    if (name == "hml") {
        if (!(beta > 0.0)) {
            throw ConfigError("--beta must be positive");
        }
        return tabulate_hml(design, beta);
    }
    throw ConfigError("unknown estimator '" + name + "'");
}

Json grid_stats_json(const GridStats &s) {
    return {
        {"m_x", s.m_x},
        {"m_y", s.m_y},
        {"max_corner_norm", number_to_json(s.max_corner_norm)},
        {"min_margin", number_to_json(s.min_margin)},
        {"boundary_spacing_mean", number_to_json(s.boundary_spacing_mean)},
        {"boundary_spacing_variance", number_to_json(s.boundary_spacing_variance)},
        {"spacing_mean", number_to_json(s.spacing_mean)},
        {"spacing_variance", number_to_json(s.spacing_variance)},
    };
}

int cmd_estimator_grid(
    const std::string &estimator, double beta, const std::string &table_path, const std::string &kind, int n,
    const std::string &out, const std::string &stats_out) {
    if (out.empty()) {
        throw ConfigError("--out is required");
    }
    std::optional<TabulatedEstimator> table;
    std::string title;
    if (estimator == "table") {
        if (table_path.empty()) {
            throw ConfigError("--table is required with --estimator table");
        }
        table = load_table(table_path);
        title = table->provenance();
    } else {
        if (parse_kind(kind) != StateKind::Rebit) {
            throw ConfigError("estimator grids are drawn for rebits only");
        }
        ExperimentDesign design = make_design(kind, n, 0.0);
        table = builtin_table(estimator, beta, design);
        title = estimator == "hml" ? beta_label("hml", beta) : estimator;
    }
    if (table->design().kind() != StateKind::Rebit || table->design().num_bases() != 2) {
        throw ConfigError("estimator grids are drawn for two-basis rebit designs only");
    }
    write_file_atomic(out, estimator_grid_svg(*table, title));
    const std::string stats = dump(grid_stats_json(grid_stats(*table)));
    if (!stats_out.empty()) {
        write_file_atomic(stats_out, stats);
    }
    std::cout << stats;
    return kExitOk;
}

struct NamedTable {
    std::string label;
    TabulatedEstimator table;
};

// Loaded tables plus built-in estimators on a common design.
std::vector<NamedTable> collect_tables(
    const std::vector<std::string> &table_specs, const std::vector<double> &hml_betas, bool with_mle,
    const std::string &kind, int n) {
    std::vector<NamedTable> out;
    for (const std::string &labeled : table_specs) {
        std::string path;
        std::string label = label_of(labeled, &path);
        out.push_back({label, load_table(path)});
    }
    std::optional<ExperimentDesign> design;
    if (!out.empty()) {
        design = out.front().table.design();
        for (const NamedTable &t : out) {
            if (!(t.table.design() == *design)) {
                throw ConfigError("estimator tables were built for different designs");
            }
        }
        if (n > 0 && !(make_design(kind, n, 0.0) == *design)) {
            throw ConfigError("--N/--kind disagree with the tables' design");
        }
    } else if (!hml_betas.empty() || with_mle) {
        if (n <= 0) {
            throw ConfigError("--N is required when no table is given");
        }
        design = make_design(kind, n, 0.0);
    }
    if (with_mle) {
        out.push_back({"mle", tabulate_mle(*design)});
    }
    for (double beta : hml_betas) {
        if (!(beta > 0.0)) {
            throw ConfigError("HML exponents must be positive");
        }
        out.push_back({beta_label("hml", beta), tabulate_hml(*design, beta)});
    }
    if (out.empty()) {
        throw ConfigError("no estimators given");
    }
    for (const NamedTable &t : out) {
        if (!t.table.all_physical()) {
            throw ConfigError(t.label + " has unphysical estimates; its relative-entropy risk is undefined");
        }
    }
    return out;
}

int cmd_risk_profile(
    const std::vector<std::string> &table_specs, const std::vector<double> &hml_betas, bool with_mle,
    const std::string &kind, int n, const std::vector<double> &axis_values, int points, const std::string &out,
    const std::string &svg) {
    if (points < 2) {
        throw ConfigError("--points must be at least 2");
    }
    std::vector<NamedTable> tables = collect_tables(table_specs, hml_betas, with_mle, kind, n);
    const Vec3 axis = parse_axis(axis_values, tables.front().table.design().kind());
    std::vector<ProfileCurve> curves;
    for (const NamedTable &t : tables) {
        curves.push_back({t.label, risk_profile(t.table, axis, points)});
    }
    std::string csv = "t";
    for (const NamedTable &t : tables) {
        csv += "," + csv_cell(t.label);
    }
    csv += "\n";
    for (int i = 0; i < points; i++) {
        csv += format_double(curves.front().points[static_cast<std::size_t>(i)].first);
        for (const ProfileCurve &c : curves) {
            csv += "," + format_double(c.points[static_cast<std::size_t>(i)].second);
        }
        csv += "\n";
    }
    emit(out, csv);
    if (!svg.empty()) {
        write_file_atomic(svg, risk_profile_svg(curves, "pointwise risk along the profile axis"));
    }
    return kExitOk;
}

int cmd_bounds_table(const std::vector<int> &ns, double beta_bar, const std::string &out) {
    if (ns.empty()) {
        throw ConfigError("--N needs at least one value");
    }
    if (!(beta_bar > 0.0)) {
        throw ConfigError("--beta-bar must be positive");
    }
    std::vector<std::vector<double>> rows;
    for (int n : ns) {
        if (n < 2) {
            throw ConfigError("bounds need N >= 2");
        }
        const double x = n;
        rows.push_back(
            {x, bound_pauli(x, 2), bound_pauli(x, 3), bound_noisy_coin(x, beta_bar), bound_haar(x),
             classical_coin_reference(x)});
    }
    emit(out,
         to_csv(
             {"N", "bound_pauli_D2", "bound_pauli_D3", "bound_noisycoin", "bound_haar", "classical_reference"},
             rows));
    return kExitOk;
}

int cmd_compare(
    const std::string &kind, const std::vector<int> &ns, const std::vector<double> &hml_betas, bool with_mle,
    const std::vector<std::string> &minimax_specs, const MaxRiskConfig &grid, const std::string &out) {
    std::vector<NamedTable> minimax;
    for (const std::string &labeled : minimax_specs) {
        std::string path;
        std::string label = label_of(labeled, &path);
        minimax.push_back({label, load_table(path)});
    }
    std::vector<int> sizes = ns;
    if (sizes.empty()) {
        for (const NamedTable &t : minimax) {
            int total = 0;
            for (int s : t.table.design().shots()) {
                total += s;
            }
            sizes.push_back(total);
        }
    }
    if (sizes.empty()) {
        throw ConfigError("--N or --minimax is required");
    }
    std::string csv = "N,estimator,max_risk,argmax_norm,best_hml\n";
    for (int n : sizes) {
        ExperimentDesign design = make_design(kind, n, 0.0);
        std::vector<std::pair<std::string, MaxRiskResult>> rows;
        for (const NamedTable &t : minimax) {
            if (t.table.design() == design) {
                rows.emplace_back(t.label, max_risk(t.table, grid));
            }
        }
        if (with_mle) {
            rows.emplace_back("mle", max_risk(tabulate_mle(design), grid));
        }
        std::size_t first_hml = rows.size();
        for (double beta : hml_betas) {
            if (!(beta > 0.0)) {
                throw ConfigError("HML exponents must be positive");
            }
            rows.emplace_back(beta_label("hml", beta), max_risk(tabulate_hml(design, beta), grid));
        }
        std::size_t best = rows.size();
        for (std::size_t i = first_hml; i < rows.size(); i++) {
            if (best == rows.size() || rows[i].second.value < rows[best].second.value) {
                best = i;
            }
        }
        for (std::size_t i = 0; i < rows.size(); i++) {
            csv += std::to_string(n) + "," + csv_cell(rows[i].first) + "," + format_double(rows[i].second.value) +
                   "," + format_double(norm(rows[i].second.argmax)) + "," + (i == best ? "1" : "0") + "\n";
        }
    }
    emit(out, csv);
    return kExitOk;
}

int cmd_noisy_coin(
    int n, double alpha, const std::vector<double> &alphas, double p1, bool lfp, const LfpFlags &flags,
    const std::string &out) {
    if (n < 1 && alphas.empty()) {
        throw ConfigError("--N or --alphas is required");
    }
    std::vector<double> a = alphas;
    if (a.empty()) {
        a.assign(static_cast<std::size_t>(n), alpha);
    }
    for (double x : a) {
        if (!(x >= 0.0 && x < 0.5)) {
            throw ConfigError("noise probabilities must lie in [0, 1/2)");
        }
    }
    NoisyCoinModel model(a);
    const double beta_bar = model.mean_resolution();
    Json report = {
        {"N", model.size()},
        {"mean_resolution", number_to_json(beta_bar)},
        {"bound_noisy_coin", number_to_json(bound_noisy_coin(model.size(), beta_bar))},
        {"classical_reference", number_to_json(classical_coin_reference(model.size()))},
    };
    if (std::isfinite(beta_bar)) {
        const double p = p1 > 0.0 ? p1 : default_p1(model.size(), beta_bar);
        if (!(p > 0.0 && p <= 1.0)) {
            throw ConfigError("--p1 must lie in (0, 1]");
        }
        BimodalPrior prior(0.0, p);
        const double r0 = bimodal_pointwise_risk(model, prior, 0.0);
        const double r1 = bimodal_pointwise_risk(model, prior, p);
        report["bimodal"] = {
            {"p1", number_to_json(p)},
            {"risk_at_p0", number_to_json(r0)},
            {"risk_at_p1", number_to_json(r1)},
            {"bayes_risk", number_to_json(0.5 * (r0 + r1))},
        };
    }
    int code = kExitOk;
    if (lfp) {
        flags.validate();
        LfpResult r = flags.run(model.to_design(), {}, "");
        report["lfp"] = {
            {"algorithm", r.algorithm},
            {"status", r.status == LfpStatus::Converged ? "converged" : "iteration_limit"},
            {"av_risk", number_to_json(r.av_risk)},
            {"max_risk", number_to_json(r.max_risk)},
            {"gap", number_to_json(r.gap)},
            {"supports", r.prior.size()},
            {"prior", to_json(r.prior)},
        };
        code = r.status == LfpStatus::Converged ? kExitOk : kExitNonConvergence;
    }
    emit(out, dump(report));
    return code;
}

}  // namespace

int run_cli(const std::vector<std::string> &args) {
    CLI::App app{"Minimax estimators and least favorable priors for Pauli tomography", "tomomax"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config", "", "Read options from a TOML/INI file (flags take precedence)");
    int threads = 0;
    app.add_option("--threads", threads, "Worker threads (0: all cores)")
        ->envname("TOMOMAX_THREADS")
        ->check(CLI::NonNegativeNumber);

    std::string kind = "rebit";
    int n = 0;
    double alpha = 0.0;
    std::string out;
    LfpFlags lfp_flags;

    auto *compute = app.add_subcommand("compute-lfp", "Least favorable prior and minimax estimator table");
    std::string resume;
    bool embed = false;
    compute->add_option("--kind", kind, "rebit, qubit or coin");
    compute->add_option("-N,--N", n, "Total number of shots")->required();
    compute->add_option("--alpha", alpha, "Flip probability of a coin design");
    compute->add_option("--out", out, "Output directory (default: lfp-<kind>-N<N>)");
    compute->add_option("--resume", resume, "Continue a Monte Carlo run from a checkpoint or result file");
    compute->add_flag("--embed-table", embed, "Embed the estimator table in lfp.json");
    lfp_flags.add(compute);

    auto *grid = app.add_subcommand("estimator-grid", "Draw a rebit estimator as a distorted grid (SVG)");
    std::string estimator = "li";
    double beta = 0.04;
    std::string table;
    std::string stats;
    grid->add_option("--estimator", estimator, "li, mle, hml or table")
        ->check(CLI::IsMember({"li", "mle", "hml", "table"}));
    grid->add_option("--beta", beta, "HML hedging exponent");
    grid->add_option("--table", table, "Estimator table or LFP result (with --estimator table)");
    grid->add_option("--kind", kind, "State kind for built-in estimators");
    grid->add_option("-N,--N", n, "Total shots for built-in estimators");
    grid->add_option("--out", out, "SVG output path")->required();
    grid->add_option("--stats", stats, "Also write grid statistics (JSON) here");

    auto *profile = app.add_subcommand("risk-profile", "Pointwise risk along an axis (CSV, optional SVG)");
    std::vector<std::string> tables;
    std::vector<double> betas;
    bool with_mle = false;
    std::vector<double> axis;
    int points = 200;
    std::string svg;
    profile->add_option("--table", tables, "Estimator table or LFP result, optionally label=path");
    profile->add_option("--hml", betas, "HML exponents to include")->delimiter(',');
    profile->add_flag("--mle", with_mle, "Include maximum likelihood");
    profile->add_option("--kind", kind, "State kind for built-in estimators");
    profile->add_option("-N,--N", n, "Total shots for built-in estimators");
    profile->add_option("--axis", axis, "Profile direction (default: equal components)")->delimiter(',');
    profile->add_option("--points", points, "Points from the center to the boundary");
    profile->add_option("--out", out, "CSV output path ('-' for stdout)");
    profile->add_option("--svg", svg, "Also draw the profiles here");

    auto *bounds = app.add_subcommand("bounds-table", "Analytic lower bounds on the minimax risk (CSV)");
    std::vector<int> ns;
    double beta_bar = 4.0;
    bounds->add_option("-N,--N", ns, "Sample sizes")->delimiter(',')->required();
    bounds->add_option("--beta-bar", beta_bar, "Mean resolution for the noisy-coin column");
    bounds->add_option("--out", out, "CSV output path ('-' for stdout)");

    auto *compare = app.add_subcommand("compare", "Max risk of minimax, HML and ML estimators (CSV)");
    std::vector<std::string> minimax;
    std::vector<double> compare_betas = {0.01, 0.04, 0.10};
    MaxRiskFlags compare_grid;
    compare->add_option("--kind", kind, "rebit or qubit");
    compare->add_option("-N,--N", ns, "Sample sizes")->delimiter(',');
    compare->add_option("--hml", compare_betas, "HML exponents")->delimiter(',');
    compare->add_flag("--mle", with_mle, "Include maximum likelihood");
    compare->add_option("--minimax", minimax, "Minimax table or LFP result, optionally label=path");
    compare->add_option("--out", out, "CSV output path ('-' for stdout)");
    compare_grid.add(compare);

    auto *coin = app.add_subcommand("noisy-coin", "Noisy-coin model: bounds, bimodal prior, optional LFP (JSON)");
    std::vector<double> alphas;
    double p1 = 0.0;
    bool coin_lfp = false;
    double coin_alpha = 0.5 * (1.0 - 1.0 / std::numbers::sqrt2);
    LfpFlags coin_flags;
    coin_flags.alg = "kempthorne";  // Monte Carlo stalls on long coins
    coin->add_option("-N,--N", n, "Number of trials");
    coin->add_option("--alpha", coin_alpha, "Flip probability shared by all trials");
    coin->add_option("--alphas", alphas, "Per-trial flip probabilities")->delimiter(',');
    coin->add_option("--p1", p1, "Second point of the bimodal prior (0: 1/sqrt(beta_bar N))");
    coin->add_flag("--lfp", coin_lfp, "Also compute a least favorable prior");
    coin->add_option("--out", out, "JSON output path ('-' for stdout)");
    coin_flags.add(coin);

    std::vector<std::string> argv_rev(args.rbegin(), args.rend());
    if (!argv_rev.empty()) {
        argv_rev.pop_back();  // program name
    }
    try {
        app.parse(argv_rev);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        set_thread_count(threads);
        if (*compute) {
            return cmd_compute_lfp(kind, n, alpha, lfp_flags, out, resume, embed);
        }
        if (*grid) {
            return cmd_estimator_grid(estimator, beta, table, kind, n, out, stats);
        }
        if (*profile) {
            return cmd_risk_profile(tables, betas, with_mle, kind, n, axis, points, out, svg);
        }
        if (*bounds) {
            return cmd_bounds_table(ns, beta_bar, out);
        }
        if (*compare) {
            return cmd_compare(kind, ns, compare_betas, with_mle, minimax, compare_grid.config, out);
        }
        if (*coin) {
            return cmd_noisy_coin(n, coin_alpha, alphas, p1, coin_lfp, coin_flags, out);
        }
    } catch (const ConfigError &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const Error &e) {
        std::cerr << "error: " << e.what() << "\n";
        switch (e.code()) {
            case ErrorCode::InvalidArgument:
            case ErrorCode::ShapeMismatch:
            case ErrorCode::DesignMismatch:
            case ErrorCode::KindMismatch:
            case ErrorCode::CapExceeded:
            case ErrorCode::Io:
                return kExitConfig;
            case ErrorCode::NonConvergence:
            case ErrorCode::IterationLimit:
                return kExitNonConvergence;
            default:
                return kExitFailure;
        }
    } catch (const nlohmann::json::exception &e) {
        std::cerr << "error: malformed input: " << e.what() << "\n";
        return kExitConfig;
    }
    return kExitFailure;
}

}  // namespace tomomax
