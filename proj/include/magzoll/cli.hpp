#pragma once

#include <CLI11.hpp>

#include <cmath>
#include <complex>
#include <cstddef>
#include <iostream>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "bessel.hpp"
#include "error.hpp"
#include "figure.hpp"
#include "flow.hpp"
#include "integrable.hpp"
#include "report.hpp"
#include "spec_file.hpp"
#include "systolic.hpp"
#include "zoll.hpp"

namespace magzoll::cli {

/// Where the magnetic system comes from. Exactly one source per run.
struct SystemSource {
    enum class Kind { None, SpecFile, Constant, Zoll };
    Kind kind = Kind::None;
    std::string spec_path;
    double b_const = 0.0;
    ZollParams zoll;
    std::optional<double> L;
};

struct RunConfig {
    std::string subcommand;
    SystemSource source;

    ThetaRule theta_rule;
    std::size_t grid = 512;
    double ode_tol = 1e-11;

    // simulate
    std::optional<double> x0;
    std::optional<double> I;
    double y0 = 0.0;
    double theta0 = 0.0;
    std::optional<double> t_span;
    double theta_span = two_pi;
    std::size_t resample = 0;

    // fourier
    long m_max = 8;
    std::string method = "direct";

    // zeros
    std::size_t k_max = 10;

    // verify-zoll
    std::size_t I_samples = 16;
    double zoll_tol = 1e-6;

    // systole
    double band = zoll_band;

    // figures
    std::size_t levels = 5;
    std::size_t theta_samples = 2048;

    std::string out;
    std::string svg;
    std::string csv;
};

/// Builds the CLI11 parser bound to a RunConfig.
class Parser {
public:
    Parser() : app_("magzoll: rotationally symmetric magnetic geodesic flows on the two-torus")
    {
        app_.require_subcommand(1);
        app_.set_help_all_flag("--help-all", "Help for every subcommand");

        auto* sim = add("simulate", "Integrate one geodesic; CSV t,x,y,theta,I");
        source_options(sim);
        budget_options(sim, false);
        auto* ox = sim->add_option("--x0", cfg_.x0, "Initial x (default: solve x from --I)");
        auto* oi = sim->add_option("--I", cfg_.I, "Start on the level I (default 0)");
        ox->excludes(oi);
        sim->add_option("--y0", cfg_.y0, "Initial y")->capture_default_str();
        sim->add_option("--theta0", cfg_.theta0, "Initial angle")->capture_default_str();
        auto* ot = sim->add_option("--t-span", cfg_.t_span, "Stop after this arclength");
        auto* oth = sim->add_option("--theta-span", cfg_.theta_span, "Stop after theta advances this much")
                        ->capture_default_str();
        ot->excludes(oth);
        sim->add_option("--resample", cfg_.resample, "Uniform time samples from dense output (0: accepted steps)")
            ->capture_default_str();
        sim->add_option("--svg", cfg_.svg, "Also write the lattice-reduced orbit as SVG");
        out_option(sim, "CSV output path (default stdout)");

        auto* prof = add("profile", "Action profile; CSV I,S,Delta,err_est");
        source_options(prof);
        budget_options(prof, true);
        out_option(prof, "CSV output path (default stdout)");

        auto* four = add("fourier", "Fourier coefficients of S; CSV m,Re,Im,abs");
        source_options(four);
        budget_options(four, true);
        four->add_option("--m-max", cfg_.m_max, "Largest |m|")->capture_default_str()->check(CLI::PositiveNumber);
        four->add_option("--method", cfg_.method, "direct | closed-form")
            ->capture_default_str()
            ->check(CLI::IsMember({"direct", "closed-form"}));
        out_option(four, "CSV output path (default stdout)");

        auto* zeros = add("zeros", "Positive zeros of J1; CSV k,xi,bracket_halfwidth");
        zeros->add_option("--k-max", cfg_.k_max, "Number of zeros")->capture_default_str()->check(CLI::PositiveNumber);
        out_option(zeros, "CSV output path (default stdout)");

        auto* fam = add("zoll-family", "Write the system spec file of a Zoll family member");
        zoll_options(fam);
        fam->add_option("--L", cfg_.source.L, "Lattice height");
        out_option(fam, "Spec file path (default stdout)");

        auto* vz = add("verify-zoll", "|Delta|, closure defect and |S - pi/<b>| over an I grid");
        source_options(vz);
        budget_options(vz, false);
        vz->add_option("--samples", cfg_.I_samples, "Number of I levels")->capture_default_str()->check(
            CLI::PositiveNumber);
        vz->add_option("--zoll-tol", cfg_.zoll_tol, "Pass threshold for all three diagnostics")
            ->capture_default_str()
            ->check(CLI::PositiveNumber);
        out_option(vz, "Report path (default stdout)");

        auto* sys = add("systole", "min S against pi/<b> and the critical levels of S");
        source_options(sys);
        budget_options(sys, true);
        sys->add_option("--band", cfg_.band, "Zoll band on max S - min S")->capture_default_str()->check(
            CLI::PositiveNumber);
        sys->add_option("--csv", cfg_.csv, "Also write the profile CSV I,S,Delta,err_est");
        out_option(sys, "Report path (default stdout)");

        auto* figs = add("figures", "Six-panel SVG of Zoll family geodesics, s = (k/5)/b_con");
        figs->add_option("--n", cfg_.source.zoll.n, "Covering multiple n")->capture_default_str()->check(
            CLI::PositiveNumber);
        figs->add_option("--xi-index", cfg_.source.zoll.xi_index, "Index k of the zero xi_k")
            ->capture_default_str()
            ->check(CLI::PositiveNumber);
        figs->add_option("--L", cfg_.source.L, "Lattice height");
        figs->add_option("--levels", cfg_.levels, "Geodesics per panel")->capture_default_str()->check(
            CLI::PositiveNumber);
        figs->add_option("--samples", cfg_.theta_samples, "Theta samples per geodesic")
            ->capture_default_str()
            ->check(CLI::PositiveNumber);
        out_option(figs, "SVG path (default figure_xi<k>.svg)");
    }

    CLI::App& app() { return app_; }

    /// Parses argv; CLI11 errors propagate as CLI::ParseError.
    RunConfig parse(int argc, const char* const* argv)
    {
        app_.parse(argc, argv);
        for (auto* sub : app_.get_subcommands()) {
            cfg_.subcommand = sub->get_name();
        }
        resolve_source();
        validate();
        return cfg_;
    }

private:
    CLI::App* add(const std::string& name, const std::string& desc)
    {
        return app_.add_subcommand(name, desc);
    }

    void out_option(CLI::App* sub, const std::string& desc) { sub->add_option("-o,--out", cfg_.out, desc); }

    void zoll_options(CLI::App* sub)
    {
        auto& z = cfg_.source.zoll;
        zoll_flags_.push_back(sub->add_option("--n", z.n, "Zoll family: covering multiple n")->check(
            CLI::PositiveNumber));
        zoll_flags_.push_back(sub->add_option("--xi-index", z.xi_index, "Zoll family: zero index k")->check(
            CLI::PositiveNumber));
        zoll_flags_.push_back(sub->add_option("--m0", z.m0, "Zoll family: harmonic m0 (0 means n)"));
        zoll_flags_.push_back(sub->add_option("--u0", z.u0, "Zoll family: phase u0"));
        zoll_flags_.push_back(sub->add_option("--s", z.s, "Zoll family: parameter s, |s| < 1/b_con"));
    }

    void source_options(CLI::App* sub)
    {
        spec_flags_.push_back(sub->add_option("--spec", cfg_.source.spec_path, "System spec file"));
        const_flags_.push_back(sub->add_option("--b-const", cfg_.source.b_const, "Constant system a = 1, b = B"));
        zoll_options(sub);
        sub->add_option("--L", cfg_.source.L, "Lattice height (overrides the spec file)");
    }

    void budget_options(CLI::App* sub, bool grid)
    {
        sub->add_option("--theta-panels", cfg_.theta_rule.panels, "Gauss panels on [0, 2 pi]")
            ->capture_default_str()
            ->check(CLI::PositiveNumber);
        sub->add_option("--theta-nodes", cfg_.theta_rule.nodes, "Nodes per panel")
            ->capture_default_str()
            ->check(CLI::PositiveNumber);
        sub->add_option("--tol", cfg_.ode_tol, "ODE tolerance")->capture_default_str()->check(CLI::PositiveNumber);
        if (grid) {
            sub->add_option("--grid", cfg_.grid, "I grid points over one period")
                ->capture_default_str()
                ->check(CLI::Range(static_cast<std::size_t>(3), static_cast<std::size_t>(1) << 20));
        }
    }

    static std::size_t given(const std::vector<CLI::Option*>& opts)
    {
        std::size_t n = 0;
        for (auto* o : opts) n += o->count();
        return n;
    }

    void resolve_source()
    {
        const std::string& sub = cfg_.subcommand;
        if (sub == "zeros" || sub == "figures") {
            return;
        }
        if (sub == "zoll-family") {
            cfg_.source.kind = SystemSource::Kind::Zoll;
            return;
        }
        const bool spec = given(spec_flags_) > 0;
        const bool constant = given(const_flags_) > 0;
        const bool zoll = given(zoll_flags_) > 0;
        const int count = int(spec) + int(constant) + int(zoll);
        if (count > 1) {
            throw UsageError("conflicting system sources: give exactly one of --spec, --b-const or the Zoll "
                             "parameters (--n, --xi-index, --m0, --u0, --s)");
        }
        if (count == 0) {
            throw UsageError(sub + ": no system given; use --spec FILE, --b-const B or --n/--xi-index/--s");
        }
        cfg_.source.kind = spec ? SystemSource::Kind::SpecFile
                                : (constant ? SystemSource::Kind::Constant : SystemSource::Kind::Zoll);
    }

    void validate() const
    {
        if (cfg_.source.L && !(*cfg_.source.L > 0.0)) {
            throw UsageError("--L must be positive");
        }
        if (cfg_.t_span && !(*cfg_.t_span > 0.0)) {
            throw UsageError("--t-span must be positive");
        }
        if (!(cfg_.theta_span > 0.0)) {
            throw UsageError("--theta-span must be positive");
        }
        if (cfg_.source.kind == SystemSource::Kind::Constant && !(cfg_.source.b_const >= 0.0)) {
            throw UsageError("--b-const must be non-negative");
        }
    }

    CLI::App app_;
    RunConfig cfg_;
    std::vector<CLI::Option*> spec_flags_;
    std::vector<CLI::Option*> const_flags_;
    std::vector<CLI::Option*> zoll_flags_;
};

/// Validated configuration; CLI11 failures and help requests become UsageError.
inline RunConfig parse_config(int argc, const char* const* argv)
{
    Parser p;
    try {
        return p.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        throw UsageError(e.what());
    }
}

inline MagneticSystem load_system(const RunConfig& cfg)
{
    const SystemSource& src = cfg.source;
    switch (src.kind) {
    case SystemSource::Kind::SpecFile: {
        SystemSpec spec = read_system_spec(src.spec_path);
        if (src.L) spec.L = *src.L;
        return build_system(spec);
    }
    case SystemSource::Kind::Constant:
        return make_system(PeriodicFunction::constant(1.0), PeriodicFunction::constant(src.b_const), src.L.value_or(1.0));
    case SystemSource::Kind::Zoll:
        return family_system(family_from(src.zoll), src.L.value_or(1.0));
    default:
        throw UsageError("no system source");
    }
}

namespace detail {

inline void warn_clamp(const ZollFamily& fam, std::ostream& err)
{
    if (fam.clamped) {
        err << "warning: s = " << fmt(fam.s) << " clamped to " << fmt(fam.s_eff) << " near the excluded endpoint 1/b_con\n";
    }
}

inline std::string profile_csv(const ActionProfile& p)
{
    std::ostringstream out;
    std::vector<std::vector<std::string>> rows;
    for (std::size_t k = 0; k < p.size(); ++k) {
        rows.push_back({fmt(p.I_grid[k]), fmt(p.S_vals[k]), fmt(p.Delta_vals[k]), fmt(p.err_est[k])});
    }
    write_csv(out, {"I", "S", "Delta", "err_est"}, rows);
    return out.str();
}

inline std::string orbit_svg(const std::vector<Polyline>& pieces, double L)
{
    constexpr double size = 300.0;
    const double scale = size / std::max(1.0, L);
    const double h = scale * L;
    std::ostringstream out;
    char buf[160];
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    std::snprintf(buf, sizeof buf,
                  "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"%g\" height=\"%g\" "
                  "viewBox=\"0 0 %g %g\">\n",
                  size, h, size, h);
    out << buf;
    std::snprintf(buf, sizeof buf, "<rect x=\"0\" y=\"0\" width=\"%g\" height=\"%g\" fill=\"white\" stroke=\"#888888\"/>\n",
                  scale, h);
    out << buf;
    for (const Polyline& piece : pieces) {
        out << "<polyline fill=\"none\" stroke=\"#3b528b\" stroke-width=\"1.2\" points=\"";
        for (std::size_t i = 0; i < piece.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%s%.3f,%.3f", i ? " " : "", piece[i].x * scale, h - piece[i].y * scale);
            out << buf;
        }
        out << "\"/>\n";
    }
    out << "</svg>\n";
    return out.str();
}

} // namespace detail

inline void cmd_simulate(const RunConfig& cfg, std::ostream& out)
{
    const MagneticSystem sys = load_system(cfg);
    double x0 = 0.0;
    if (cfg.x0) {
        x0 = *cfg.x0;
    } else {
        const FirstIntegralChart chart(sys, cfg.theta_rule);
        x0 = solve_x(chart, cfg.I.value_or(0.0), cfg.theta0);
    }
    IntegratorOptions opt;
    opt.tol = cfg.ode_tol;
    const StopCondition stop = cfg.t_span ? StopCondition::time(*cfg.t_span) : StopCondition::theta(cfg.theta_span);
    const Trajectory traj = integrate_geodesic(sys, {0.0, x0, cfg.y0, cfg.theta0}, stop, opt);

    std::vector<GeodesicState> states;
    if (cfg.resample > 0) {
        const double dt = traj.duration() / static_cast<double>(cfg.resample);
        for (std::size_t k = 0; k <= cfg.resample; ++k) {
            states.push_back(k == cfg.resample ? traj.back() : traj.at(traj.front().t + dt * static_cast<double>(k)));
        }
    } else {
        states = traj.states;
    }
    std::vector<std::vector<std::string>> rows;
    Polyline lifted;
    for (const GeodesicState& s : states) {
        rows.push_back({fmt(s.t), fmt(s.x), fmt(s.y), fmt(s.theta), fmt(sys.first_integral(s.x, s.theta))});
        lifted.push_back({s.x, s.y});
    }
    std::ostringstream csv;
    write_csv(csv, {"t", "x", "y", "theta", "I"}, rows);
    write_output(cfg.out, csv.str(), out);
    if (!cfg.svg.empty()) {
        write_output(cfg.svg, detail::orbit_svg(lattice_pieces(lifted, sys.L()), sys.L()), out);
    }
}

inline void cmd_profile(const RunConfig& cfg, std::ostream& out)
{
    const FirstIntegralChart chart(load_system(cfg), cfg.theta_rule);
    write_output(cfg.out, detail::profile_csv(action_profile(chart, cfg.grid)), out);
}

inline void cmd_fourier(const RunConfig& cfg, std::ostream& out)
{
    const FirstIntegralChart chart(load_system(cfg), cfg.theta_rule);
    const bool closed = cfg.method == "closed-form";
    std::optional<ActionProfile> profile;
    if (!closed) profile = action_profile(chart, cfg.grid);
    std::vector<std::vector<std::string>> rows;
    for (long m = -cfg.m_max; m <= cfg.m_max; ++m) {
        if (m == 0) continue;
        const std::complex<double> c = closed ? S_fourier_closed_form(chart, m) : S_fourier(*profile, m);
        rows.push_back({std::to_string(m), fmt(c.real()), fmt(c.imag()), fmt(std::abs(c))});
    }
    std::ostringstream csv;
    write_csv(csv, {"m", "Re", "Im", "abs"}, rows);
    write_output(cfg.out, csv.str(), out);
}

inline void cmd_zeros(const RunConfig& cfg, std::ostream& out)
{
    const BesselZeroTable table = j1_zeros(cfg.k_max);
    std::vector<std::vector<std::string>> rows;
    for (const BesselZero& z : table.zeros) {
        rows.push_back({std::to_string(z.k), fmt(z.xi), fmt(z.bracket_halfwidth)});
    }
    std::ostringstream csv;
    write_csv(csv, {"k", "xi", "bracket_halfwidth"}, rows);
    write_output(cfg.out, csv.str(), out);
}

inline void cmd_zoll_family(const RunConfig& cfg, std::ostream& out, std::ostream& err)
{
    const ZollFamily fam = family_from(cfg.source.zoll);
    detail::warn_clamp(fam, err);
    SystemSpec spec;
    spec.zoll = cfg.source.zoll;
    spec.L = cfg.source.L.value_or(1.0);
    std::ostringstream text;
    text << "# b_con = " << fmt(fam.b_con) << ", xi = " << fmt(fam.xi) << ", m0 = " << fam.m0
         << ", s_eff = " << fmt(fam.s_eff) << '\n';
    text << write_system_spec(spec);
    write_output(cfg.out, text.str(), out);
}

inline void cmd_verify_zoll(const RunConfig& cfg, std::ostream& out)
{
    const FirstIntegralChart chart(load_system(cfg), cfg.theta_rule);
    IntegratorOptions opt;
    opt.tol = cfg.ode_tol;
    const ZollReport z = verify_zoll(chart, cfg.I_samples, cfg.zoll_tol, opt);
    Report rep;
    rep.set("b_avg", chart.period());
    rep.set("samples", z.samples);
    rep.set("tol", z.tol);
    rep.set("max_abs_delta", z.max_abs_delta);
    rep.set("max_closure_defect", z.max_closure_defect);
    rep.set("max_S_deviation", z.max_S_deviation);
    rep.set("passed", z.passed);
    write_output(cfg.out, rep.emit(), out);
}

inline Report systole_report(const FirstIntegralChart& chart, const ActionProfile& profile, double band,
                             const IntegratorOptions& opt)
{
    const SystolicReport s = systole(chart, profile, band);
    Report rep;
    rep.set("b_avg", chart.period());
    rep.set("margin", chart.margin());
    rep.set("min_S", s.min_S);
    rep.set("max_S", s.max_S);
    rep.set("bound", s.bound);
    rep.set("slack", s.slack);
    rep.set("argmin_I", s.argmin_I);
    rep.set("zoll_flag", s.zoll_flag);
    rep.set("band", s.band);
    rep.set("grid", s.grid);
    rep.set("refined", s.refined);
    const CriticalSet crit = critical_levels(chart, profile);
    rep.set("all_critical", crit.all_critical);
    if (!crit.all_critical) {
        CsvBlock block{"critical_levels", {"I", "S", "type", "closure_defect"}, {}};
        for (const CriticalLevel& c : crit.levels) {
            const ClosureReport cr = closure_defect(chart, c.I, opt);
            block.add_row({fmt(c.I), fmt(c.S), to_string(c.type), fmt(cr.defect)});
        }
        rep.blocks.push_back(std::move(block));
    }
    return rep;
}

inline void cmd_systole(const RunConfig& cfg, std::ostream& out)
{
    const FirstIntegralChart chart(load_system(cfg), cfg.theta_rule);
    const ActionProfile profile = action_profile(chart, cfg.grid);
    IntegratorOptions opt;
    opt.tol = cfg.ode_tol;
    write_output(cfg.out, systole_report(chart, profile, cfg.band, opt).emit(), out);
    if (!cfg.csv.empty()) {
        write_output(cfg.csv, detail::profile_csv(profile), out);
    }
}

inline void cmd_figures(const RunConfig& cfg, std::ostream& out, std::ostream& err)
{
    FigureOptions fo;
    fo.levels = cfg.levels;
    fo.samples = cfg.theta_samples;
    fo.L = cfg.source.L.value_or(1.0);
    const Figure fig = build_figure(cfg.source.zoll.n, cfg.source.zoll.xi_index, fo);
    for (const FigurePanel& p : fig.panels) detail::warn_clamp(p.family, err);
    const std::string path =
        cfg.out.empty() ? "figure_xi" + std::to_string(cfg.source.zoll.xi_index) + ".svg" : cfg.out;
    write_output(path, render_svg(fig), out);
}

inline void dispatch(const RunConfig& cfg, std::ostream& out, std::ostream& err)
{
    const std::string& s = cfg.subcommand;
    if (s == "simulate") cmd_simulate(cfg, out);
    else if (s == "profile") cmd_profile(cfg, out);
    else if (s == "fourier") cmd_fourier(cfg, out);
    else if (s == "zeros") cmd_zeros(cfg, out);
    else if (s == "zoll-family") cmd_zoll_family(cfg, out, err);
    else if (s == "verify-zoll") cmd_verify_zoll(cfg, out);
    else if (s == "systole") cmd_systole(cfg, out);
    else if (s == "figures") cmd_figures(cfg, out, err);
    else throw UsageError("unknown subcommand '" + s + "'");
}

inline constexpr int exit_ok = 0;
inline constexpr int exit_numerical = 1;
inline constexpr int exit_usage = 2;

/// Exit code for a library error: invalid input (including systems the tool
/// refuses) is a usage error, everything else a numerical failure.
inline int exit_code_for(const Error& e)
{
    if (dynamic_cast<const UsageError*>(&e) || dynamic_cast<const ParameterOutOfRange*>(&e) ||
        dynamic_cast<const NotAdmissible*>(&e) || dynamic_cast<const NonPositiveWarping*>(&e) ||
        dynamic_cast<const NegativeAverage*>(&e) || dynamic_cast<const SectionConditionViolated*>(&e) ||
        dynamic_cast<const FlatOnly*>(&e)) {
        return exit_usage;
    }
    return exit_numerical;
}

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr)
{
    Parser parser;
    RunConfig cfg;
    try {
        cfg = parser.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << parser.app().help();
        return exit_ok;
    } catch (const CLI::CallForAllHelp&) {
        out << parser.app().help("", CLI::AppFormatMode::All);
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return exit_usage;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return exit_code_for(e);
    }
    try {
        dispatch(cfg, out, err);
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return exit_code_for(e);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_numerical;
    }
    return exit_ok;
}

} // namespace magzoll::cli
