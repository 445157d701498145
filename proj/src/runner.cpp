#include "eprsim/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "eprsim/control.hpp"
#include "eprsim/kernels.hpp"
#include "eprsim/measure.hpp"
#include "eprsim/noise.hpp"
#include "eprsim/results_io.hpp"
#include "eprsim/seqlang.hpp"
#include "eprsim/source.hpp"

namespace eprsim {

namespace {

constexpr double pi = std::numbers::pi;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

using json = nlohmann::ordered_json;

void check_keys(const json& obj, const std::string& where,
                std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) {
        throw ConfigError(where + ": expected a JSON object");
    }
    for (const auto& [key, _] : obj.items()) {
        if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) {
                return key == a;
            }) == allowed.end()) {
            throw ConfigError(where + ": unknown key '" + key + "'");
        }
    }
}

double get_num(const json& obj, const char* key, double fallback) {
    if (!obj.contains(key)) {
        return fallback;
    }
    if (!obj.at(key).is_number()) {
        throw ConfigError(std::string("'") + key + "' must be a number");
    }
    return obj.at(key).get<double>();
}

bool get_bool(const json& obj, const char* key, bool fallback) {
    if (!obj.contains(key)) {
        return fallback;
    }
    if (!obj.at(key).is_boolean()) {
        throw ConfigError(std::string("'") + key + "' must be a boolean");
    }
    return obj.at(key).get<bool>();
}

std::string summary_num(double v, int digits = 6) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

NoiseConfig resolve_noise(const json& cfg, json& resolved) {
    NoiseConfig noise = NoiseConfig::ideal();
    json block = json::object();
    if (cfg.contains("noise")) {
        block = cfg.at("noise");
        check_keys(block, "noise",
                   {"detection_fidelity", "singlet_fidelity", "t2_prime_s",
                    "basis_misalignment_sigma", "residual_visibility", "field_noise"});
        noise.detection_fidelity =
            get_num(block, "detection_fidelity", noise.detection_fidelity);
        noise.singlet_fidelity =
            get_num(block, "singlet_fidelity", noise.singlet_fidelity);
        noise.basis_misalignment_sigma =
            get_num(block, "basis_misalignment_sigma", noise.basis_misalignment_sigma);
        noise.residual_visibility =
            get_num(block, "residual_visibility", noise.residual_visibility);
        if (block.contains("field_noise")) {
            if (block.contains("t2_prime_s")) {
                throw ConfigError("noise: give either t2_prime_s or field_noise, not both");
            }
            check_keys(block.at("field_noise"), "noise.field_noise",
                       {"sensitivity_hz_per_mg", "field_stability_mg"});
            const FieldNoiseSpec spec = field_noise_from_json(block.at("field_noise"));
            noise.t2_prime_s = t2_estimate(spec);
        } else {
            noise.t2_prime_s = get_num(block, "t2_prime_s", noise.t2_prime_s);
        }
    }
    try {
        noise.validate();
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
    resolved["noise"] = to_json(noise);
    return noise;
}

std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(n));
    if (n == 1) {
        out.push_back(lo);
        return out;
    }
    for (int i = 0; i + 1 < n; ++i) {
        out.push_back(lo + (hi - lo) * static_cast<double>(i) /
                               static_cast<double>(n - 1));
    }
    out.push_back(hi);
    return out;
}

// ---- per-experiment runners ----

void run_chsh(const json& cfg, std::uint64_t shots, std::uint64_t seed,
              unsigned workers, const NoiseConfig& noise, json& resolved,
              RunArtifacts& art) {
    json block = cfg.value("chsh", json::object());
    check_keys(block, "chsh", {"theta_l", "theta_lp", "theta_r", "theta_rp"});
    CHSHSettings settings = CHSHSettings::standard();
    settings.theta_l = get_num(block, "theta_l", settings.theta_l);
    settings.theta_lp = get_num(block, "theta_lp", settings.theta_lp);
    settings.theta_r = get_num(block, "theta_r", settings.theta_r);
    settings.theta_rp = get_num(block, "theta_rp", settings.theta_rp);
    resolved["chsh"] = {{"theta_l", settings.theta_l},
                        {"theta_lp", settings.theta_lp},
                        {"theta_r", settings.theta_r},
                        {"theta_rp", settings.theta_rp}};

    PreparationConfig prep;
    prep.singlet_fidelity = noise.singlet_fidelity;
    const MixedState state = prepare_singlet(prep);
    ExperimentResult s = chsh_S(settings, state, shots, noise, seed, workers);

    std::vector<ExperimentResult> rows;
    const auto& corr = s.settings.at("correlations");
    const auto& errs = s.settings.at("correlation_errors");
    const char* names[4] = {"E_L_R", "E_L_Rp", "E_Lp_R", "E_Lp_Rp"};
    for (int i = 0; i < 4; ++i) {
        ExperimentResult row;
        row.estimator = names[i];
        row.value = corr[i].get<double>();
        row.std_error = errs[i].get<double>();
        row.shots = shots;
        row.seed = seed;
        row.settings = json::object();
        rows.push_back(row);
    }
    rows.push_back(s);

    json results = json::array();
    for (const auto& r : rows) {
        results.push_back(io::result_to_json(r));
    }
    art.json["results"] = results;
    art.csv = io::csv_table(rows);
    if (shots == 0) {
        art.summary = "S=" + summary_num(s.value) + " (analytic)";
    } else {
        art.summary = "S=" + summary_num(s.value) + " ± " +
                      summary_num(s.std_error) + " (" + std::to_string(shots) +
                      " shots/setting, seed " + std::to_string(seed) + ")";
    }
}

void run_wigner(const json& cfg, std::uint64_t shots, std::uint64_t seed,
                unsigned workers, const NoiseConfig& noise, json& resolved,
                RunArtifacts& art) {
    json block = cfg.value("wigner", json::object());
    check_keys(block, "wigner", {"a", "b", "c"});
    const double a = get_num(block, "a", 0.0);
    const double b = get_num(block, "b", 2.0 * pi / 3.0);
    const double c = get_num(block, "c", pi / 3.0);
    resolved["wigner"] = {{"a", a}, {"b", b}, {"c", c}};

    PreparationConfig prep;
    prep.singlet_fidelity = noise.singlet_fidelity;
    const MixedState state = prepare_singlet(prep);
    const WignerResult w = wigner_test(a, b, c, state, shots, seed, workers);

    auto row = [&](const char* name, double v, double se) {
        ExperimentResult r;
        r.estimator = name;
        r.value = v;
        r.std_error = se;
        r.shots = shots;
        r.seed = seed;
        r.settings = {{"a", a}, {"b", b}, {"c", c}};
        return r;
    };
    std::vector<ExperimentResult> rows{
        row("wigner_P_ab", w.p_ab, w.se_ab), row("wigner_P_ac", w.p_ac, w.se_ac),
        row("wigner_P_cb", w.p_cb, w.se_cb),
        row("wigner_margin", w.margin,
            std::sqrt(w.se_ab * w.se_ab + w.se_ac * w.se_ac + w.se_cb * w.se_cb))};
    rows.back().settings["violation"] = w.violation;
    rows.back().settings["sigma_level"] = w.sigma_level;

    json results = json::array();
    for (const auto& r : rows) {
        results.push_back(io::result_to_json(r));
    }
    art.json["results"] = results;
    art.csv = io::csv_table(rows);

    std::ostringstream sum;
    sum << "P(a,b)=" << summary_num(w.p_ab) << " bound=" << summary_num(w.p_ac + w.p_cb)
        << " margin=" << summary_num(w.margin)
        << (w.violation ? " violation=yes" : " violation=no");
    if (shots == 0) {
        sum << " (analytic)";
    } else {
        sum << " (" << summary_num(w.sigma_level, 1) << " sigma, " << shots
            << " shots/setting, seed " << seed << ")";
    }
    art.summary = sum.str();
}

void run_fringes(const json& cfg, std::uint64_t shots, std::uint64_t seed,
                 unsigned workers, const NoiseConfig& noise, json& resolved,
                 RunArtifacts& art) {
    json block = cfg.value("fringes", json::object());
    check_keys(block, "fringes", {"grid_points", "phi_min", "phi_max"});
    const int grid_points = static_cast<int>(get_num(block, "grid_points", 9));
    const double phi_min = get_num(block, "phi_min", 0.0);
    const double phi_max = get_num(block, "phi_max", 2.0 * pi);
    if (grid_points < 1 || grid_points > 1000) {
        throw ConfigError("fringes.grid_points out of range");
    }
    resolved["fringes"] = {{"grid_points", grid_points},
                           {"phi_min", phi_min},
                           {"phi_max", phi_max}};

    PreparationConfig prep;
    prep.singlet_fidelity = noise.singlet_fidelity;
    const MixedState state = prepare_path_state(prep);
    const auto grid = linspace(phi_min, phi_max, grid_points);
    const FringeScan scan =
        fringe_scan(grid, grid, state, shots, noise, seed, workers);

    std::vector<ExperimentResult> rows;
    {
        ExperimentResult v;
        v.estimator = "fringe_V";
        v.value = scan.visibility;
        v.std_error = scan.visibility_se;
        v.shots = shots;
        v.seed = seed;
        v.settings = {{"grid_points", grid_points}};
        rows.push_back(v);
    }
    for (const auto& p : scan.points) {
        ExperimentResult r;
        r.estimator = "fringe_P_plus";
        r.value = p.p_plus;
        r.std_error = p.se;
        r.shots = shots;
        r.seed = seed;
        r.settings = {{"phi_l", p.phi_l}, {"phi_r", p.phi_r}};
        rows.push_back(r);
    }
    json results = json::array();
    for (const auto& r : rows) {
        results.push_back(io::result_to_json(r));
    }
    art.json["results"] = results;
    art.csv = io::csv_table(rows);
    if (shots == 0) {
        art.summary = "V=" + summary_num(scan.visibility, 4) + " (analytic)";
    } else {
        art.summary = "V=" + summary_num(scan.visibility, 4) + " ± " +
                      summary_num(scan.visibility_se, 4) + " (" +
                      std::to_string(shots) + " shots/point, seed " +
                      std::to_string(seed) + ")";
    }
}

void run_epr(const json& cfg, std::uint64_t shots, std::uint64_t seed,
             unsigned workers, json& resolved, RunArtifacts& art) {
    json block = cfg.value("epr", json::object());
    check_keys(block, "epr",
               {"method", "timescale_s", "mean_momentum_hkrec",
                "momentum_spread_hkrec", "binding_coupling", "sigma0_um",
                "sigma_img_um", "t_tof_s", "enforce_heisenberg",
                "validate_timescale"});
    DissociationSpec spec;
    if (block.contains("method")) {
        spec.method =
            dissociation_method_from_string(block.at("method").get<std::string>());
    }
    spec.timescale_s = get_num(block, "timescale_s", spec.timescale_s);
    // Experiment defaults sit in the idealized broadband regime: fast
    // atoms, tight pair, so the conditional product approaches the
    // blur-limited value sigma_img * spread.
    spec.mean_momentum_hkrec = get_num(block, "mean_momentum_hkrec", 120.0);
    spec.momentum_spread_hkrec =
        get_num(block, "momentum_spread_hkrec", spec.momentum_spread_hkrec);
    spec.binding_coupling = get_num(block, "binding_coupling", spec.binding_coupling);
    const double sigma0 = get_num(block, "sigma0_um", 1e-4);
    const double sigma_img = get_num(block, "sigma_img_um", 1.0);
    const double t_tof = get_num(block, "t_tof_s", 1.0);
    CvStateOptions options;
    options.enforce_heisenberg = get_bool(block, "enforce_heisenberg", true);
    if (get_bool(block, "validate_timescale", false)) {
        spec.validate();
    }
    resolved["epr"] = {{"method", to_string(spec.method)},
                       {"timescale_s", spec.timescale_s},
                       {"mean_momentum_hkrec", spec.mean_momentum_hkrec},
                       {"momentum_spread_hkrec", spec.momentum_spread_hkrec},
                       {"binding_coupling", spec.binding_coupling},
                       {"sigma0_um", sigma0},
                       {"sigma_img_um", sigma_img},
                       {"t_tof_s", t_tof},
                       {"enforce_heisenberg", options.enforce_heisenberg}};

    const GaussianPairState cv = prepare_cv_state(spec, sigma0, options);
    const EPRResult r = epr_infer(cv, sigma_img, t_tof, shots, seed, workers);

    auto row = [&](const char* name, double v, double se) {
        ExperimentResult res;
        res.estimator = name;
        res.value = v;
        res.std_error = se;
        res.shots = shots;
        res.seed = seed;
        res.settings = resolved["epr"];
        return res;
    };
    std::vector<ExperimentResult> rows{
        row("epr_dx_um", r.dx_um, r.dx_se),
        row("epr_dp_hbar_um", r.dp_hbar_um, r.dp_se),
        row("epr_product_hbar", r.product_hbar, r.product_se)};
    rows.back().settings["heisenberg_bound"] = r.heisenberg_bound;
    rows.back().settings["epr_violation"] = r.epr_violation;
    rows.back().settings["tof_systematic_hbar_um"] = r.tof_systematic_hbar_um;

    json results = json::array();
    for (const auto& res : rows) {
        results.push_back(io::result_to_json(res));
    }
    art.json["results"] = results;
    art.csv = io::csv_table(rows);

    std::ostringstream sum;
    sum << "product=" << summary_num(r.product_hbar) << " hbar "
        << (r.epr_violation ? "< 0.5 hbar (EPR violation)" : ">= 0.5 hbar");
    if (shots == 0) {
        sum << " (analytic)";
    } else {
        sum << " ± " << summary_num(r.product_se) << " (" << shots
            << " shots/branch, seed " << seed << ")";
    }
    art.summary = sum.str();
}

void run_ghz(const json& cfg, std::uint64_t shots, std::uint64_t seed,
             unsigned workers, const NoiseConfig& noise, json& resolved,
             RunArtifacts& art) {
    json block = cfg.value("ghz", json::object());
    check_keys(block, "ghz", {"settings", "collapse_demo"});
    std::vector<std::array<double, 4>> settings;
    if (block.contains("settings")) {
        for (const auto& row : block.at("settings")) {
            if (!row.is_array() || row.size() != 4) {
                throw ConfigError("ghz.settings entries must be arrays of 4 angles");
            }
            settings.push_back({row[0].get<double>(), row[1].get<double>(),
                                row[2].get<double>(), row[3].get<double>()});
        }
    } else {
        settings.push_back({0.0, 0.0, 0.0, 0.0});
        settings.push_back({pi / 2.0, pi / 2.0, pi / 2.0, pi / 2.0});
    }
    const bool collapse_demo = get_bool(block, "collapse_demo", true);
    resolved["ghz"] = {{"settings", settings}, {"collapse_demo", collapse_demo}};

    PreparationConfig prep;
    prep.singlet_fidelity = noise.singlet_fidelity;
    const MixedState state = prepare_ghz_hyper(prep);
    auto rows = ghz_correlations(state, settings, shots, seed, workers);

    if (collapse_demo) {
        rng::UniformSource src(seed, 1000);
        const CollapseTrial trial = ghz_collapse(state, 0, 0.0, src);
        ExperimentResult r;
        r.estimator = "ghz_collapse_outcome";
        r.value = trial.outcome;
        r.shots = 0;
        r.seed = seed;
        // Factorization residual of the collapsed 3-qubit state over the
        // all-z correlator.
        const CMat z = pauli(Axis::z);
        const CMat id = CMat::Identity(2, 2);
        const double joint =
            expectation(trial.collapsed, kron(kron(z, z), z));
        const double prod = expectation(trial.collapsed, kron(kron(z, id), id)) *
                            expectation(trial.collapsed, kron(kron(id, z), id)) *
                            expectation(trial.collapsed, kron(kron(id, id), z));
        r.settings = {{"measured_qubit", 0},
                      {"basis_angle", 0.0},
                      {"factorization_residual", std::abs(joint - prod)}};
        rows.push_back(r);
    }

    json results = json::array();
    for (const auto& r : rows) {
        results.push_back(io::result_to_json(r));
    }
    art.json["results"] = results;
    art.csv = io::csv_table(rows);

    std::ostringstream sum;
    sum << "ZZZZ=" << summary_num(rows[0].value);
    if (rows.size() > 1 && rows[1].estimator == "ghz_correlator") {
        sum << " XXXX=" << summary_num(rows[1].value);
    }
    sum << (shots == 0 ? " (analytic)" : " (" + std::to_string(shots) + " shots)");
    art.summary = sum.str();
}

void run_gates_verify(const json& cfg, json& resolved, RunArtifacts& art) {
    json block = cfg.value("gates-verify", json::object());
    check_keys(block, "gates-verify",
               {"grid_points", "theta_min", "theta_max", "tolerance", "schemes",
                "bystander_shift_hz", "bystander_aux_detuning_hz", "rabi_hz",
                "addressing_shift_hz", "break_scheme2_sign"});
    const int grid_points = static_cast<int>(get_num(block, "grid_points", 100));
    const double theta_min = get_num(block, "theta_min", -2.0 * pi);
    const double theta_max = get_num(block, "theta_max", 2.0 * pi);
    const double tolerance = get_num(block, "tolerance", 1e-10);
    const double bystander_shift = get_num(block, "bystander_shift_hz", 120.0);
    const double bystander_aux = get_num(block, "bystander_aux_detuning_hz", 5e4);
    const bool break_scheme2 = get_bool(block, "break_scheme2_sign", false);
    SchemeParams params;
    params.rabi_hz = get_num(block, "rabi_hz", params.rabi_hz);
    params.addressing_shift_hz =
        get_num(block, "addressing_shift_hz", params.addressing_shift_hz);
    params.site_count = 2;
    std::vector<std::string> schemes{"scheme1", "scheme2"};
    if (block.contains("schemes")) {
        schemes.clear();
        for (const auto& s : block.at("schemes")) {
            schemes.push_back(s.get<std::string>());
        }
    }
    resolved["gates-verify"] = {{"grid_points", grid_points},
                                {"theta_min", theta_min},
                                {"theta_max", theta_max},
                                {"tolerance", tolerance},
                                {"schemes", schemes},
                                {"bystander_shift_hz", bystander_shift},
                                {"bystander_aux_detuning_hz", bystander_aux},
                                {"rabi_hz", params.rabi_hz},
                                {"addressing_shift_hz", params.addressing_shift_hz},
                                {"break_scheme2_sign", break_scheme2}};

    const SiteModel target_model = SiteModel::target();
    const SiteModel bystander_model =
        SiteModel::bystander(bystander_shift, bystander_aux);

    std::vector<ExperimentResult> rows;
    double max_target = 0.0;
    double max_bystander = 0.0;
    for (const std::string& scheme : schemes) {
        if (scheme != "scheme1" && scheme != "scheme2") {
            throw ConfigError("gates-verify: unknown scheme '" + scheme + "'");
        }
        for (double theta : linspace(theta_min, theta_max, grid_points)) {
            Schedule sched = scheme == "scheme1" ? scheme1_sequence(theta, {0}, params)
                                                 : scheme2_sequence(theta, {0}, params);
            if (break_scheme2 && scheme == "scheme2") {
                // Negative control: undo the echo sign flip on the second
                // addressed z-pulse.
                int seen = 0;
                for (auto& e : sched.events) {
                    if (e.kind == PulseKind::addressed_pulse && e.axis == Axis::z) {
                        if (++seen == 2) {
                            e.angle = -e.angle;
                        }
                    }
                }
            }
            const double d_target = phase_distance(
                composite_unitary(sched, 0, target_model).matrix,
                rotation(Axis::x, theta).matrix);
            const double d_bystander = phase_distance(
                composite_unitary(sched, 1, bystander_model).matrix,
                CMat::Identity(2, 2));
            max_target = std::max(max_target, d_target);
            max_bystander = std::max(max_bystander, d_bystander);
            ExperimentResult r1;
            r1.estimator = "gate_distance_target";
            r1.value = d_target;
            r1.settings = {{"scheme", scheme}, {"theta", theta}};
            rows.push_back(r1);
            ExperimentResult r2;
            r2.estimator = "gate_distance_bystander";
            r2.value = d_bystander;
            r2.settings = {{"scheme", scheme}, {"theta", theta}};
            rows.push_back(r2);
        }
    }
    const bool pass = max_target <= tolerance && max_bystander <= tolerance;

    json results = json::array();
    for (const auto& r : rows) {
        results.push_back(io::result_to_json(r));
    }
    art.json["results"] = results;
    art.json["max_target_distance"] = max_target;
    art.json["max_bystander_distance"] = max_bystander;
    art.json["tolerance"] = tolerance;
    art.json["pass"] = pass;
    {
        // Crosstalk summary at the configured drive parameters.
        const Schedule probe = scheme1_sequence(pi / 2.0, {0}, params);
        art.json["crosstalk"] = to_json(
            crosstalk_report(probe, params.rabi_hz, params.addressing_shift_hz));
    }
    art.csv = io::csv_table(rows);

    std::ostringstream sum;
    sum << "max target dist=" << io::format_double(max_target)
        << " max bystander dist=" << io::format_double(max_bystander)
        << " tol=" << io::format_double(tolerance) << (pass ? " PASS" : " FAIL");
    art.summary = sum.str();
    if (!pass) {
        art.exit_code = exit_physics_error;
        art.error = "gate identity check exceeded tolerance";
    }
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot read file: " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void run_compile(const json& cfg, json& resolved, RunArtifacts& art, bool lint_only) {
    const char* key = lint_only ? "lint" : "compile";
    json block = cfg.value(key, json::object());
    check_keys(block, key, {"input"});
    if (!block.contains("input")) {
        throw ConfigError(std::string(key) + ".input is required (.seq file path)");
    }
    const std::string path = block.at("input").get<std::string>();
    resolved[key] = {{"input", path}};

    const auto parse_result = seqlang::parse(read_file(path));
    std::vector<seqlang::Diagnostic> diags = parse_result.diagnostics;
    if (parse_result.ok()) {
        const auto lint_diags = seqlang::lint(*parse_result.program);
        diags.insert(diags.end(), lint_diags.begin(), lint_diags.end());
    }
    json rendered = json::array();
    std::size_t n_errors = 0;
    std::size_t n_warnings = 0;
    for (const auto& d : diags) {
        rendered.push_back(d.render());
        (d.severity == seqlang::Severity::error ? n_errors : n_warnings)++;
        art.printed_lines.push_back(d.render());
    }
    art.json["diagnostics"] = rendered;

    if (!parse_result.ok()) {
        art.exit_code = exit_config_error;
        art.error = std::to_string(n_errors) + " parse error(s) in " + path;
        art.summary = std::to_string(n_errors) + " errors, " +
                      std::to_string(n_warnings) + " warnings";
        return;
    }
    if (lint_only) {
        art.summary =
            std::to_string(n_warnings) + " warnings, " + std::to_string(n_errors) +
            " errors";
        return;
    }
    const Schedule sched = seqlang::lower(*parse_result.program);
    art.json["schedule"] = to_json(sched);
    art.extra_text = seqlang::format(*parse_result.program);
    std::ostringstream sum;
    sum << "compiled " << sched.events.size() << " events";
    if (!sched.measurements.empty()) {
        sum << " + " << sched.measurements.size() << " measurements";
    }
    sum << " (" << n_warnings << " warnings), total "
        << io::format_double(sched.total_duration() * 1e3) << " ms";
    art.summary = sum.str();
}

}  // namespace

nlohmann::ordered_json default_config(const std::string& experiment) {
    json cfg;
    cfg["experiment"] = experiment;
    if (experiment == "chsh" || experiment == "wigner" || experiment == "fringes" ||
        experiment == "epr" || experiment == "ghz") {
        cfg["shots"] = 0;
    }
    cfg["out"] = {{"dir", "out"}, {"basename", experiment}, {"format", "both"}};
    return cfg;
}

RunArtifacts run_experiment(const nlohmann::ordered_json& config,
                            const RunOverrides& overrides) {
    RunArtifacts art;
    try {
        check_keys(config, "config",
                   {"experiment", "shots", "seed", "noise", "out", "chsh", "wigner",
                    "fringes", "epr", "ghz", "gates-verify", "compile", "lint"});
        if (!config.contains("experiment") || !config.at("experiment").is_string()) {
            throw ConfigError("config: 'experiment' is required");
        }
        const std::string experiment = config.at("experiment").get<std::string>();

        auto read_uint = [&](const char* key) {
            const auto& v = config.at(key);
            if (!v.is_number_integer() ||
                (v.is_number_integer() && !v.is_number_unsigned() &&
                 v.get<std::int64_t>() < 0)) {
                throw ConfigError(std::string("'") + key +
                                  "' must be a non-negative integer");
            }
            return v.get<std::uint64_t>();
        };
        std::uint64_t shots = 0;
        if (overrides.shots) {
            shots = *overrides.shots;
        } else if (config.contains("shots")) {
            shots = read_uint("shots");
        }
        std::uint64_t seed = 0;
        bool have_seed = false;
        if (overrides.seed) {
            seed = *overrides.seed;
            have_seed = true;
        } else if (config.contains("seed")) {
            seed = read_uint("seed");
            have_seed = true;
        }
        if (shots > 0 && !have_seed) {
            throw ConfigError("'seed' is mandatory when shots > 0");
        }
        const unsigned workers = kern::resolve_workers(overrides.workers);

        json out_block = config.value("out", json::object());
        check_keys(out_block, "out", {"dir", "basename", "format"});
        art.out_dir = out_block.value("dir", "out");
        art.basename = out_block.value("basename", experiment);
        art.format = out_block.value("format", "both");
        if (overrides.out_dir) {
            art.out_dir = *overrides.out_dir;
        }
        if (overrides.format) {
            art.format = *overrides.format;
        }
        if (art.format != "json" && art.format != "csv" && art.format != "both") {
            throw ConfigError("out.format must be json, csv, or both");
        }

        json resolved;
        resolved["experiment"] = experiment;
        resolved["shots"] = shots;
        if (have_seed) {
            resolved["seed"] = seed;
        }
        resolved["out"] = {{"dir", art.out_dir},
                           {"basename", art.basename},
                           {"format", art.format}};

        art.json["tool"] = "eprsim";
        art.json["version"] = tool_version;
        art.json["experiment"] = experiment;

        if (experiment == "chsh") {
            const NoiseConfig noise = resolve_noise(config, resolved);
            run_chsh(config, shots, seed, workers, noise, resolved, art);
        } else if (experiment == "wigner") {
            const NoiseConfig noise = resolve_noise(config, resolved);
            run_wigner(config, shots, seed, workers, noise, resolved, art);
        } else if (experiment == "fringes") {
            const NoiseConfig noise = resolve_noise(config, resolved);
            run_fringes(config, shots, seed, workers, noise, resolved, art);
        } else if (experiment == "epr") {
            run_epr(config, shots, seed, workers, resolved, art);
        } else if (experiment == "ghz") {
            const NoiseConfig noise = resolve_noise(config, resolved);
            run_ghz(config, shots, seed, workers, noise, resolved, art);
        } else if (experiment == "gates-verify") {
            run_gates_verify(config, resolved, art);
        } else if (experiment == "compile") {
            run_compile(config, resolved, art, false);
        } else if (experiment == "lint") {
            run_compile(config, resolved, art, true);
        } else {
            throw ConfigError("unknown experiment '" + experiment + "'");
        }
        art.json["resolved_config"] = resolved;
    } catch (const ConfigError& e) {
        art.exit_code = exit_config_error;
        art.error = e.what();
    } catch (const std::exception& e) {
        art.exit_code = exit_physics_error;
        art.error = e.what();
    }
    return art;
}

RunArtifacts run_experiment_file(const std::string& config_path,
                                 const std::optional<std::string>& subcommand,
                                 const RunOverrides& overrides) {
    RunArtifacts art;
    json config;
    try {
        if (config_path.empty()) {
            if (!subcommand) {
                throw ConfigError("no config file and no subcommand given");
            }
            config = default_config(*subcommand);
        } else {
            std::ifstream in(config_path);
            if (!in) {
                throw ConfigError("cannot read config file: " + config_path);
            }
            try {
                config = json::parse(in);
            } catch (const json::parse_error& e) {
                throw ConfigError("config JSON parse error: " + std::string(e.what()));
            }
            if (subcommand) {
                if (config.contains("experiment") &&
                    config.at("experiment").get<std::string>() != *subcommand) {
                    throw ConfigError("config experiment '" +
                                      config.at("experiment").get<std::string>() +
                                      "' does not match subcommand '" + *subcommand +
                                      "'");
                }
                config["experiment"] = *subcommand;
            }
        }
    } catch (const ConfigError& e) {
        art.exit_code = exit_config_error;
        art.error = e.what();
        return art;
    }
    return run_experiment(config, overrides);
}

std::vector<std::string> write_artifacts(const RunArtifacts& artifacts) {
    namespace fs = std::filesystem;
    std::vector<std::string> written;
    if (artifacts.json.is_null()) {
        return written;
    }
    fs::create_directories(artifacts.out_dir);
    const fs::path base = fs::path(artifacts.out_dir) / artifacts.basename;
    if (artifacts.format == "json" || artifacts.format == "both") {
        const std::string path = base.string() + ".json";
        std::ofstream out(path, std::ios::binary);
        if (!out) {
            throw std::runtime_error("cannot write " + path);
        }
        out << artifacts.json.dump(2) << '\n';
        written.push_back(path);
    }
    if ((artifacts.format == "csv" || artifacts.format == "both") &&
        !artifacts.csv.empty()) {
        const std::string path = base.string() + ".csv";
        std::ofstream out(path, std::ios::binary);
        if (!out) {
            throw std::runtime_error("cannot write " + path);
        }
        out << artifacts.csv;
        written.push_back(path);
    }
    if (!artifacts.extra_text.empty()) {
        const std::string path = base.string() + ".seq";
        std::ofstream out(path, std::ios::binary);
        if (!out) {
            throw std::runtime_error("cannot write " + path);
        }
        out << artifacts.extra_text;
        written.push_back(path);
    }
    return written;
}

}  // namespace eprsim
