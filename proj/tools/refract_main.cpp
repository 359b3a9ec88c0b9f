#include <cmath>
#include <cstdio>
#include <limits>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "refract/applications.hpp"
#include "refract/config.hpp"
#include "refract/errors.hpp"
#include "refract/identities.hpp"
#include "refract/model.hpp"
#include "refract/scale.hpp"
#include "refract/simulator.hpp"

using namespace refract;

namespace {

// All numeric output goes through this: 17 significant digits, locale-free.
std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct Output {
    std::unique_ptr<std::ofstream> file;
    std::ostream& stream() { return file ? *file : std::cout; }
    void open(const std::string& path) {
        if (path.empty()) return;
        file = std::make_unique<std::ofstream>(path);
        if (!*file) throw ConfigError("cannot open output file: " + path);
    }
};

std::string json_result(const IdentityResult& r) {
    return "{\"value\":" + num(r.value) + ",\"stderr_analytic\":" +
           num(r.quadrature_error) + ",\"method\":\"" + r.method + "\"}";
}

struct CommonOpts {
    std::string config_path;
    std::string out_path;
    std::string format = "json";
    std::uint64_t seed = 1;
    long paths = 100000;
    bool quiet = false;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--config", o.config_path, "model/refraction config file")
        ->required();
    cmd->add_option("--out", o.out_path, "write output here instead of stdout");
    cmd->add_option("--format", o.format, "json or csv")
        ->check(CLI::IsMember({"json", "csv"}));
    cmd->add_option("--seed", o.seed, "RNG seed");
    cmd->add_option("--paths", o.paths, "Monte Carlo path count");
    cmd->add_flag("--quiet", o.quiet, "suppress informational notes");
}

// ---------------------------------------------------------------------------

int cmd_scale(const CommonOpts& o, double q, double xmax, int n, bool second,
              bool refracted) {
    ModelConfig cfg = load_model_config(o.config_path);
    double delta = refracted ? cfg.refraction.delta : 0.0;
    ScaleFunction s = ScaleFunction::make(cfg.model, delta, q);
    Output out;
    out.open(o.out_path);
    out.stream() << (second ? "x,W,Wprime,Z,Wsecond\n" : "x,W,Wprime,Z\n");
    for (int i = 0; i < n; ++i) {
        double x = xmax * i / (n - 1);
        out.stream() << num(x) << ',' << num(s.w(x)) << ',' << num(s.w_prime(x)) << ','
                     << num(s.z(x));
        if (second) out.stream() << ',' << num(s.w_second(x));
        out.stream() << '\n';
    }
    return 0;
}

int cmd_exit(const CommonOpts& o, const std::string& kind, double x, double a,
             double q) {
    ModelConfig cfg = load_model_config(o.config_path);
    IdentityResult r;
    if (kind == "two_up")
        r = two_sided_up(cfg.model, {x, a, q, cfg.refraction});
    else if (kind == "two_down")
        r = two_sided_down(cfg.model, {x, a, q, cfg.refraction});
    else if (kind == "one_up")
        r = one_sided_up(cfg.model, x, a, q, cfg.refraction);
    else
        r = one_sided_down(cfg.model, x, q, cfg.refraction);
    Output out;
    out.open(o.out_path);
    out.stream() << json_result(r) << '\n';
    return 0;
}

int cmd_ruin(const CommonOpts& o, double x) {
    ModelConfig cfg = load_model_config(o.config_path);
    IdentityResult r = ruin_probability(cfg.model, x, cfg.refraction);
    Output out;
    out.open(o.out_path);
    out.stream() << json_result(r) << '\n';
    return 0;
}

int cmd_resolvent(const CommonOpts& o, const std::string& kind, double x, double a,
                  double q, double lo, double hi, int n) {
    ModelConfig cfg = load_model_config(o.config_path);
    ResolventDensity d;
    if (kind == "two_sided")
        d = resolvent_two_sided(cfg.model, x, a, q, cfg.refraction);
    else if (kind == "killed_below")
        d = resolvent_killed_below(cfg.model, x, q, cfg.refraction);
    else if (kind == "killed_above")
        d = resolvent_killed_above(cfg.model, x, a, q, cfg.refraction);
    else
        d = resolvent_free(cfg.model, x, q, cfg.refraction);
    Output out;
    out.open(o.out_path);
    if (o.format == "csv") {
        if (!std::isfinite(lo)) lo = std::max(d.lo, -10.0);
        if (!std::isfinite(hi)) hi = std::min(d.hi, std::max(x, a) + 10.0);
        out.stream() << "y,density\n";
        for (int i = 0; i < n; ++i) {
            double y = lo + (hi - lo) * i / (n - 1);
            out.stream() << num(y) << ',' << num(d.density(y)) << '\n';
        }
    } else {
        out.stream() << "{\"value\":" << num(d.total_mass())
                     << ",\"stderr_analytic\":0,\"method\":\"quadrature\"}" << '\n';
    }
    return 0;
}

int cmd_creep(const CommonOpts& o, double x, double q) {
    ModelConfig cfg = load_model_config(o.config_path);
    IdentityResult r = creeping(cfg.model, x, q, cfg.refraction);
    Output out;
    out.open(o.out_path);
    out.stream() << json_result(r) << '\n';
    return 0;
}

int cmd_dividends(const CommonOpts& o, double x, double q, bool closed) {
    ModelConfig cfg = load_model_config(o.config_path);
    DividendQuery query{x, q, cfg.refraction};
    IdentityResult r =
        closed ? dividend_value_hyperexp(cfg.model, query) : dividend_value(cfg.model, query);
    Output out;
    out.open(o.out_path);
    out.stream() << "{\"x\":" << num(x) << ",\"q\":" << num(q)
                 << ",\"delta\":" << num(cfg.refraction.delta)
                 << ",\"b\":" << num(cfg.refraction.b) << ",\"value\":" << num(r.value)
                 << ",\"stderr_analytic\":" << num(r.quadrature_error) << ",\"method\":\""
                 << r.method << "\"}" << '\n';
    return 0;
}

int cmd_overshoot(const CommonOpts& o, double x, double a_lo, double a_hi, double b_lo,
                  double b_hi) {
    ModelConfig cfg = load_model_config(o.config_path);
    double v = overshoot_undershoot(cfg.model, x, cfg.refraction, a_lo, a_hi, b_lo, b_hi);
    Output out;
    out.open(o.out_path);
    out.stream() << "{\"x\":" << num(x) << ",\"a_lo\":" << num(a_lo)
                 << ",\"a_hi\":" << num(a_hi) << ",\"b_lo\":" << num(b_lo)
                 << ",\"b_hi\":" << num(b_hi) << ",\"value\":" << num(v)
                 << ",\"stderr_analytic\":0,\"method\":\"quadrature\"}" << '\n';
    return 0;
}

int cmd_pasting(const CommonOpts& o, double q) {
    ModelConfig cfg = load_model_config(o.config_path);
    PastingReport rep = smooth_pasting_gap(cfg.model, cfg.refraction, q);
    Output out;
    out.open(o.out_path);
    out.stream() << "{\"left_deriv\":" << num(rep.left_deriv)
                 << ",\"right_deriv\":" << num(rep.right_deriv)
                 << ",\"gap\":" << num(rep.gap)
                 << ",\"condition_residual\":" << num(rep.condition_residual)
                 << ",\"condition_holds\":" << (rep.condition_holds ? "true" : "false")
                 << "}" << '\n';
    return 0;
}

int cmd_stable_ruin(const CommonOpts& o, double x) {
    ModelConfig cfg = load_model_config(o.config_path);
    const auto* s = std::get_if<StableTail>(&cfg.model.jumps());
    if (!s) throw ConfigError("stable-ruin needs a stable jump config");
    double v = ruin_probability_stable(x, cfg.refraction.b, cfg.model.drift_c(),
                                       cfg.refraction.delta, s->alpha);
    Output out;
    out.open(o.out_path);
    out.stream() << "{\"value\":" << num(v)
                 << ",\"stderr_analytic\":0,\"method\":\"closed-form\"}" << '\n';
    return 0;
}

Functional parse_functional(const std::string& name) {
    if (name == "two_sided_up") return Functional::TwoSidedUp;
    if (name == "two_sided_down") return Functional::TwoSidedDown;
    if (name == "one_sided_up") return Functional::OneSidedUp;
    if (name == "one_sided_down") return Functional::OneSidedDown;
    if (name == "ruin") return Functional::Ruin;
    if (name == "creep") return Functional::Creep;
    if (name == "resolvent_mass") return Functional::ResolventMass;
    if (name == "dividends") return Functional::Dividends;
    if (name == "overshoot_rect") return Functional::OvershootRect;
    throw ConfigError("unknown functional: " + name);
}

int cmd_simulate(const CommonOpts& o, const std::string& functional,
                 const FunctionalParams& fp, const std::string& scheme, double eps,
                 double step, bool serial, const std::string& trace_path) {
    ModelConfig cfg = load_model_config(o.config_path);
    SimConfig sim;
    sim.scheme = scheme == "euler" ? Scheme::StrongApprox : Scheme::ExactBV;
    sim.n_paths = o.paths;
    sim.seed = o.seed;
    sim.eps = eps;
    sim.step = step;
    sim.parallel = !serial;
    if (!trace_path.empty()) {
        double T = fp.q > 0.0 ? -std::log(1e-7) / fp.q : 100.0;
        PathSample p = sim.scheme == Scheme::ExactBV
                           ? simulate_exact_bv(cfg.model, cfg.refraction, fp.x, T, o.seed)
                           : simulate_strong_approx(cfg.model, cfg.refraction, fp.x, T,
                                                    o.seed, eps, step);
        std::ofstream tr(trace_path);
        if (!tr) throw ConfigError("cannot open trace file: " + trace_path);
        tr << "t,U,regime\n";
        for (size_t i = 0; i < p.times.size(); ++i)
            tr << num(p.times[i]) << ',' << num(p.values[i]) << ','
               << (p.values[i] >= cfg.refraction.b ? "above" : "below") << '\n';
    }
    McEstimate e = estimate_functional(cfg.model, cfg.refraction,
                                       parse_functional(functional), fp, sim);
    Output out;
    out.open(o.out_path);
    out.stream() << "{\"functional\":\"" << functional << "\",\"mean\":" << num(e.mean)
                 << ",\"stderr\":" << num(e.stderr_) << ",\"n_paths\":" << e.n
                 << ",\"scheme\":\"" << (sim.scheme == Scheme::ExactBV ? "exact" : "euler")
                 << "\",\"seed\":" << o.seed << "}" << '\n';
    return 0;
}

// ---------------------------------------------------------------------------
// validate: run the internal cross-checks and identity-vs-MC comparisons for
// each listed config and emit a deterministic JSON report (no timings).

struct CheckRow {
    std::string check;
    std::string model;
    bool mc = false;
    double analytic = 0.0;
    double mc_mean = 0.0;
    double mc_stderr = 0.0;
    double score = 0.0;  // z-score for MC rows, residual otherwise
    bool pass = false;
};

std::string model_label(const std::string& path) {
    size_t slash = path.find_last_of('/');
    return slash == std::string::npos ? path : path.substr(slash + 1);
}

void validate_one(const std::string& path, long paths, std::uint64_t seed,
                  std::vector<CheckRow>& rows) {
    ModelConfig cfg = load_model_config(path);
    const LevyModel& m = cfg.model;
    const RefractionConfig& r = cfg.refraction;
    std::string label = model_label(path);

    auto residual_row = [&](const std::string& check, double analytic, double resid,
                            double tol) {
        rows.push_back({check, label, false, analytic, 0.0, 0.0, std::abs(resid),
                        std::abs(resid) < tol});
    };

    if (m.has_stable_jumps()) {
        const auto& s = std::get<StableTail>(m.jumps());
        double at0 = ruin_probability_stable(0.0, r.b, m.drift_c(), r.delta, s.alpha);
        residual_row("stable_ruin_at_zero", at0, at0 - 1.0, 0.0 + 1e-300);
        rows.back().pass = at0 == 1.0;
        double lo = ruin_probability_stable(2.0, r.b, m.drift_c(), r.delta, s.alpha);
        double hi = ruin_probability_stable(0.5, r.b, m.drift_c(), r.delta, s.alpha);
        residual_row("stable_ruin_monotone", hi - lo, std::min(0.0, hi - lo), 1e-12);
        return;
    }

    double x = 1.5, a = 3.0, q = 0.2;

    // key identity (bounded variation only)
    if (m.bounded_variation()) {
        double worst = 0.0;
        for (auto [u, v, mlev, qq] : {std::tuple{1.5, 3.0, 1.0, 0.3},
                                      std::tuple{2.0, 4.0, 0.5, 0.5},
                                      std::tuple{1.2, 2.5, 0.8, 0.0}})
            worst = std::max(worst, verify_key_identity(m, r, qq, u, v, mlev));
        residual_row("key_identity_max_residual", 0.0, worst, 1e-6);
    }

    // delta -> 0 reduction to the classical two-sided exit
    {
        RefractionConfig tiny{1e-8, r.b};
        double got = two_sided_up(m, {x, a, q, tiny}).value;
        double want = classical_two_sided(m, x, a, q);
        residual_row("delta_to_zero_two_sided", want, got - want, 1e-5);
    }

    // q * resolvent mass + exit transforms = 1
    {
        double up = two_sided_up(m, {x, a, 0.5, r}).value;
        double down = two_sided_down(m, {x, a, 0.5, r}).value;
        double mass = resolvent_two_sided(m, x, a, 0.5, r).total_mass();
        residual_row("complementarity_two_sided", 1.0, 0.5 * mass + up + down - 1.0, 1e-6);
    }

    // Monte Carlo cross-checks (exact scheme: bounded variation only)
    if (m.bounded_variation()) {
        SimConfig sim;
        sim.n_paths = paths;
        sim.seed = seed;
        auto mc_row = [&](const std::string& check, double analytic, McEstimate e) {
            double z = e.stderr_ > 0.0 ? (e.mean - analytic) / e.stderr_ : 0.0;
            rows.push_back(
                {check, label, true, analytic, e.mean, e.stderr_, z, std::abs(z) < 3.0});
        };
        FunctionalParams fp;
        fp.x = x;
        fp.a = a;
        fp.q = 0.1;
        mc_row("mc_two_sided_up", two_sided_up(m, {x, a, 0.1, r}).value,
               estimate_functional(m, r, Functional::TwoSidedUp, fp, sim));
        if (r.delta < mean(m)) {
            FunctionalParams fr;
            fr.x = x;
            mc_row("mc_ruin", ruin_probability(m, x, r).value,
                   estimate_functional(m, r, Functional::Ruin, fr, sim));
        }
    }
}

int cmd_validate(const std::vector<std::string>& config_paths, const CommonOpts& o) {
    std::vector<CheckRow> rows;
    for (const auto& p : config_paths) validate_one(p, o.paths, o.seed, rows);
    bool all = true;
    Output out;
    out.open(o.out_path);
    out.stream() << "{\"report\":[";
    for (size_t i = 0; i < rows.size(); ++i) {
        const CheckRow& c = rows[i];
        all = all && c.pass;
        out.stream() << (i ? "," : "") << "{\"check\":\"" << c.check << "\",\"model\":\""
                     << c.model << "\",\"analytic\":" << num(c.analytic);
        if (c.mc)
            out.stream() << ",\"mc_mean\":" << num(c.mc_mean)
                         << ",\"mc_stderr\":" << num(c.mc_stderr)
                         << ",\"z_score\":" << num(c.score);
        else
            out.stream() << ",\"residual\":" << num(c.score);
        out.stream() << ",\"pass\":" << (c.pass ? "true" : "false") << "}";
    }
    out.stream() << "],\"all_pass\":" << (all ? "true" : "false") << "}" << '\n';
    return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"scale functions and fluctuation identities of refracted processes"};
    app.require_subcommand(1);

    CommonOpts o;
    double x = 1.0, a = 2.0, q = 0.1, xmax = 10.0;
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    double a_lo = -1.0, a_hi = 0.0, b_lo = 0.0, b_hi = 1.0;
    int n = 101;
    bool second = false, refracted = false, closed = false, serial = false;
    std::string kind = "two_up", rkind = "two_sided", functional = "ruin";
    std::string scheme = "exact", trace_path;
    FunctionalParams fp;
    std::vector<std::string> validate_configs;
    int rc = 0;

    auto* sc = app.add_subcommand("scale", "tabulate W, W', Z on a uniform grid (CSV)");
    add_common(sc, o);
    sc->add_option("--q", q);
    sc->add_option("--xmax", xmax);
    sc->add_option("--n", n)->check(CLI::Range(2, 1000000));
    sc->add_flag("--second", second, "include the second derivative column");
    sc->add_flag("--refracted", refracted, "scale function of Y = X - delta t");
    sc->callback([&] { rc = cmd_scale(o, q, xmax, n, second, refracted); });

    auto* ex = app.add_subcommand("exit", "exit-problem Laplace transforms");
    add_common(ex, o);
    ex->add_option("--kind", kind)
        ->check(CLI::IsMember({"two_up", "two_down", "one_up", "one_down"}));
    ex->add_option("--x", x);
    ex->add_option("--a", a);
    ex->add_option("--q", q);
    ex->callback([&] { rc = cmd_exit(o, kind, x, a, q); });

    auto* ru = app.add_subcommand("ruin", "probability of ever passing below zero");
    add_common(ru, o);
    ru->add_option("--x", x);
    ru->callback([&] { rc = cmd_ruin(o, x); });

    auto* re = app.add_subcommand("resolvent", "resolvent mass (json) or density (csv)");
    add_common(re, o);
    re->add_option("--kind", rkind)
        ->check(CLI::IsMember({"two_sided", "killed_below", "killed_above", "free"}));
    re->add_option("--x", x);
    re->add_option("--a", a);
    re->add_option("--q", q);
    re->add_option("--lo", lo, "density table lower edge");
    re->add_option("--hi", hi, "density table upper edge");
    re->add_option("--n", n);
    re->callback([&] { rc = cmd_resolvent(o, rkind, x, a, q, lo, hi, n); });

    auto* cr = app.add_subcommand("creep", "value of hitting zero continuously");
    add_common(cr, o);
    cr->add_option("--x", x);
    cr->add_option("--q", q);
    cr->callback([&] { rc = cmd_creep(o, x, q); });

    auto* dv = app.add_subcommand("dividends", "net present value paid above b");
    add_common(dv, o);
    dv->add_option("--x", x);
    dv->add_option("--q", q);
    dv->add_flag("--closed-form", closed, "partial-fraction route");
    dv->callback([&] { rc = cmd_dividends(o, x, q, closed); });

    auto* ov = app.add_subcommand("overshoot", "joint overshoot/undershoot mass");
    add_common(ov, o);
    ov->add_option("--x", x);
    ov->add_option("--alo", a_lo);
    ov->add_option("--ahi", a_hi);
    ov->add_option("--blo", b_lo);
    ov->add_option("--bhi", b_hi);
    ov->callback([&] { rc = cmd_overshoot(o, x, a_lo, a_hi, b_lo, b_hi); });

    auto* pa = app.add_subcommand("pasting", "smooth-pasting diagnostic at b");
    add_common(pa, o);
    pa->add_option("--q", q);
    pa->callback([&] { rc = cmd_pasting(o, q); });

    auto* sr = app.add_subcommand("stable-ruin", "closed-form stable ruin probability");
    add_common(sr, o);
    sr->add_option("--x", x);
    sr->callback([&] { rc = cmd_stable_ruin(o, x); });

    auto* si = app.add_subcommand("simulate", "Monte Carlo estimate of a functional");
    add_common(si, o);
    si->add_option("--functional", functional);
    si->add_option("--x", fp.x);
    si->add_option("--a", fp.a);
    si->add_option("--q", fp.q);
    si->add_option("--blo", fp.b_lo);
    si->add_option("--bhi", fp.b_hi);
    si->add_option("--alo", fp.a_lo);
    si->add_option("--ahi", fp.a_hi);
    si->add_option("--eps-mc", fp.eps_mc, "creeping window width");
    si->add_option("--kill", fp.kill_level, "upper kill level for q = 0 runs");
    si->add_option("--continuation", fp.continuation,
                   "value credited to paths reaching the kill level");
    si->add_option("--scheme", scheme)->check(CLI::IsMember({"exact", "euler"}));
    double sim_eps = 1e-3, sim_step = 1e-3;
    si->add_option("--jump-eps", sim_eps, "euler: jump truncation");
    si->add_option("--step", sim_step, "euler: time step");
    si->add_flag("--serial", serial, "disable OpenMP");
    si->add_option("--trace", trace_path, "write one path's event skeleton as CSV");
    si->callback([&] {
        rc = cmd_simulate(o, functional, fp, scheme, sim_eps, sim_step, serial,
                          trace_path);
    });

    auto* va = app.add_subcommand("validate", "cross-check every identity, emit a report");
    va->add_option("--config", validate_configs, "config file(s), repeatable")
        ->required();
    va->add_option("--out", o.out_path);
    va->add_option("--seed", o.seed);
    va->add_option("--paths", o.paths);
    va->add_flag("--quiet", o.quiet);
    va->callback([&] { rc = cmd_validate(validate_configs, o); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const ConfigError& e) {
        std::cerr << "{\"error\":\"config\",\"message\":\"" << e.what() << "\"}\n";
        return 2;
    } catch (const DriftNotDominating& e) {
        std::cerr << "{\"error\":\"model\",\"message\":\"" << e.what()
                  << "\",\"regime_note\":\"drift does not dominate: ruin is certain\"}\n";
        return 2;
    } catch (const ModelError& e) {
        std::cerr << "{\"error\":\"model\",\"message\":\"" << e.what() << "\"}\n";
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "{\"error\":\"numerical\",\"message\":\"" << e.what() << "\"}\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "{\"error\":\"internal\",\"message\":\"" << e.what() << "\"}\n";
        return 3;
    }
    return rc;
}
