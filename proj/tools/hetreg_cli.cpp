// hetreg: batch runner for the estimation, risk, lower-bound and
// periodization laboratories.
//
// Every option can also come from a key-value config file (--config); the
// key is the option name with dashes replaced by underscores. Command-line
// values win. Exit status: 0 success, 1 usage or configuration error,
// 2 numeric failure or violated invariant.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hetreg/adaptive.hpp"
#include "hetreg/io.hpp"
#include "hetreg/lower_bound.hpp"
#include "hetreg/periodizer.hpp"
#include "hetreg/risk_lab.hpp"
#include "hetreg/scale_model.hpp"

using namespace hetreg;

namespace {

struct invariant_failure : error {
    using error::error;
};

struct OptionSpec {
    std::string name;  // flag name without dashes
    std::string help;
};

// Options shared by all subcommands.
const std::vector<OptionSpec> common_options = {
    {"seed", "master seed"},
    {"out", "output file (default: standard output)"},
    {"format", "tsv, csv or json"},
};

const std::vector<OptionSpec> procedure_options = {
    {"rho", "penalty rho in (0, 1/3)"},
    {"eps-n", "grid step eps_n in (0, 1)"},
    {"k-star", "largest smoothness index k*"},
    {"omega-bar", "omega shift"},
    {"k-bar", "smoothness shift in k*"},
};

const std::map<std::string, std::vector<OptionSpec>> command_options = {
    {"estimate", {{"input", "signal file: y or x y per line"}}},
    {"simulate",
     {{"n", "sample size (odd)"}, {"k", "smoothness"}, {"r", "Sobolev radius"}, {"signal", "catalogue signal"},
      {"scale", "econometric coefficients c0,c1,c2,c3"}, {"law", "noise law"}}},
    {"risk",
     {{"n", "odd sample sizes"}, {"k", "smoothness"}, {"r", "Sobolev radius"}, {"signal", "catalogue signal"},
      {"scale", "econometric coefficients c0,c1,c2,c3"}, {"laws", "noise laws"}, {"reps", "replications"},
      {"estimator", "adaptive, oracle or zero"}}},
    {"oracle-check",
     {{"n", "odd sample sizes"}, {"k", "smoothness"}, {"r", "Sobolev radius"}, {"signal", "catalogue signal"},
      {"scale", "econometric coefficients c0,c1,c2,c3"}, {"laws", "noise laws"}, {"reps", "replications"}}},
    {"efficiency",
     {{"n", "odd sample sizes"}, {"k", "smoothness"}, {"r", "Sobolev radius"}, {"signal", "catalogue shape"},
      {"scale", "econometric coefficients c0,c1,c2,c3"}, {"laws", "noise laws"}, {"reps", "replications"}}},
    {"lower-bound",
     {{"n", "odd sample size"}, {"k", "smoothness"}, {"r", "Sobolev radius"},
      {"scale", "econometric coefficients c0,c1,c2,c3"}, {"eps-lb", "slack eps in (0, 1)"},
      {"eta", "mollifier width"}, {"modes", "modes per block N"}, {"draws", "prior draws for F and B"},
      {"reps", "Bayes risk replications"}}},
    {"lemmas", {{"n", "odd sample sizes"}, {"k", "smoothness"}, {"r", "Sobolev radius"}, {"m-max", "largest exponent m"}}},
    {"periodize",
     {{"input", "signal file (omit to simulate)"}, {"n", "sample size when simulating"}, {"k", "smoothness"},
      {"r", "Sobolev radius"}, {"signal", "catalogue signal when simulating"},
      {"scale", "econometric coefficients c0,c1,c2,c3"}, {"law", "noise law"}, {"a", "interval start"},
      {"b", "interval end"}, {"eps-aux", "auxiliary noise level"}}},
};

bool uses_procedure(const std::string& cmd) {
    return cmd == "estimate" || cmd == "risk" || cmd == "oracle-check" || cmd == "efficiency" || cmd == "lower-bound" ||
           cmd == "periodize";
}

std::string key_of(std::string flag) {
    for (auto& c : flag)
        if (c == '-') c = '_';
    return flag;
}

// Typed access to the merged configuration, with the defaults of each command.
class Params {
public:
    explicit Params(KeyValueConfig cfg) : cfg_(std::move(cfg)) {}

    std::vector<std::size_t> sizes(const std::vector<std::size_t>& fallback) const {
        const auto v = cfg_.reals("n");
        if (!v) return fallback;
        std::vector<std::size_t> out;
        for (double d : *v) {
            if (!(d >= 0.0) || d != std::floor(d)) cfg_.fail("n", "sample sizes must be whole numbers");
            const auto n = static_cast<std::size_t>(d);
            if (n % 2 == 0) cfg_.fail("n", "n must be odd, got " + std::to_string(n));
            if (n < 3) cfg_.fail("n", "n must be at least 3");
            out.push_back(n);
        }
        return out;
    }

    std::size_t size(std::size_t fallback) const {
        const auto v = sizes({fallback});
        if (v.size() != 1) cfg_.fail("n", "expected a single sample size");
        return v[0];
    }

    int k(int fallback = 1) const {
        const long long v = cfg_.integer("k").value_or(fallback);
        if (v < 1 || v > 20) cfg_.fail("k", "k must be between 1 and 20");
        return static_cast<int>(v);
    }

    double positive(const std::string& key, double fallback) const {
        const double v = cfg_.real(key).value_or(fallback);
        if (!(v > 0.0)) cfg_.fail(key, "must be positive");
        return v;
    }

    std::size_t count(const std::string& key, std::size_t fallback, std::size_t least = 1) const {
        const long long v = cfg_.integer(key).value_or(static_cast<long long>(fallback));
        if (v < static_cast<long long>(least)) cfg_.fail(key, "must be at least " + std::to_string(least));
        return static_cast<std::size_t>(v);
    }

    std::uint64_t seed() const {
        const long long v = cfg_.integer("seed").value_or(20240601);
        if (v < 0) cfg_.fail("seed", "must be nonnegative");
        return static_cast<std::uint64_t>(v);
    }

    ScaleSpec scale() const {
        const auto c = cfg_.reals("scale");
        if (!c) return ScaleSpec::econometric(1.0, 1.0, 1.0, 0.0);
        if (c->size() > 4) cfg_.fail("scale", "expected at most four coefficients c0,c1,c2,c3");
        std::vector<double> v = *c;
        v.resize(4, 0.0);
        try {
            return ScaleSpec::econometric(v[0], v[1], v[2], v[3]);
        } catch (const config_error& e) {
            cfg_.fail("scale", e.what());
        }
    }

    std::vector<NoiseLaw> laws() const {
        const auto w = cfg_.words("laws");
        if (!w) return NoiseLaw::catalogue();
        std::vector<NoiseLaw> out;
        for (const auto& s : *w) out.push_back(law_named("laws", s));
        return out;
    }

    NoiseLaw law() const {
        const auto s = cfg_.string("law");
        return s ? law_named("law", *s) : NoiseLaw::gaussian();
    }

    CatalogueEntry signal(int k, double r, const std::string& fallback = "smooth@50%") const {
        const std::string name = cfg_.string("signal").value_or(fallback);
        for (auto& e : test_functions(k, r))
            if (e.name == name) return e;
        std::string known;
        for (auto& e : test_functions(k, r)) known += (known.empty() ? "" : ", ") + e.name;
        cfg_.fail("signal", "unknown signal '" + name + "' (known: " + known + ")");
    }

    EstimatorKind estimator() const {
        const std::string s = cfg_.string("estimator").value_or("adaptive");
        if (s != "adaptive" && s != "oracle" && s != "zero")
            cfg_.fail("estimator", "expected adaptive, oracle or zero");
        return parse_estimator(s);
    }

    ProcedureConfig procedure() const {
        ProcedureConfig p;
        p.rho = cfg_.real("rho");
        p.eps = cfg_.real("eps_n");
        if (const auto v = cfg_.integer("k_star")) p.k_star = static_cast<int>(*v);
        p.omega_bar = cfg_.real("omega_bar").value_or(0.0);
        p.k_bar = cfg_.real("k_bar").value_or(0.0);
        return p;
    }

    std::optional<std::string> text(const std::string& key) const { return cfg_.string(key); }
    std::optional<double> real(const std::string& key) const { return cfg_.real(key); }
    std::optional<long long> integer(const std::string& key) const { return cfg_.integer(key); }
    [[noreturn]] void fail(const std::string& key, const std::string& what) const { cfg_.fail(key, what); }

private:
    NoiseLaw law_named(const std::string& key, const std::string& s) const {
        try {
            return NoiseLaw::parse(s);
        } catch (const error& e) {
            cfg_.fail(key, e.what());
        }
    }

    KeyValueConfig cfg_;
};

std::string join(const std::vector<std::size_t>& v) {
    std::string s;
    for (auto x : v) s += (s.empty() ? "" : ",") + std::to_string(x);
    return s;
}

std::string num(double v) { return format_number(v); }

void note_procedure(Table& t, const ProcedureConfig& p, std::size_t n) {
    const auto r = resolve(p, n);
    t.note("rho", num(r.rho));
    t.note("eps_n", num(r.eps));
    t.note("k_star", std::to_string(r.k_star));
    t.note("omega_bar", num(r.omega_bar));
}

// ---------------------------------------------------------------------------
// Subcommands

Table run_estimate(const Params& p) {
    const auto path = p.text("input");
    if (!path) p.fail("input", "estimate needs an input signal file");
    const Observations obs = load_signal(*path);
    const std::size_t n = obs.grid.size();
    const auto proc_cfg = p.procedure();
    const AdaptiveProcedure proc(n, proc_cfg);
    const auto fit = proc.fit(obs.y);
    const auto& w = proc.selected(fit);
    Table t;
    t.note("input", *path);
    t.note("n", std::to_string(n));
    note_procedure(t, proc_cfg, n);
    t.note("grid_size", std::to_string(proc.weights().size()));
    if (w.alpha) {
        t.note("selected_beta", std::to_string(w.alpha->beta));
        t.note("selected_t", num(w.alpha->t));
        t.note("selected_t_index", std::to_string(w.alpha->t_index));
    } else {
        t.note("selected_weight", "unit");
    }
    t.note("selected_position", std::to_string(fit.position));
    t.note("cost", num(fit.cost));
    t.note("varsigma_hat", num(fit.spectral.varsigma_hat));
    t.columns = {"j", "x", "y", "estimate"};
    for (std::size_t l = 1; l <= n; ++l)
        t.add_row({std::to_string(l), format_exact(obs.grid.x(l)), format_exact(obs.y[l - 1]),
                   format_exact(fit.estimate.on_grid[l - 1])});
    return t;
}

Observations simulated(const Params& p, std::uint64_t seed, Table& t) {
    const int k = p.k();
    const double r = p.positive("r", 20.0);
    const std::size_t n = p.size(101);
    const auto e = p.signal(k, r);
    const auto spec = p.scale();
    const auto law = p.law();
    t.note("n", std::to_string(n));
    t.note("k", std::to_string(k));
    t.note("r", num(r));
    t.note("signal", e.name);
    t.note("scale", spec.describe());
    t.note("law", law.name());
    return simulate(as_function(e.signal), spec, law, n, seed);
}

Table run_simulate(const Params& p, std::uint64_t seed) {
    Table t;
    const Observations obs = simulated(p, seed, t);
    t.columns = {"x", "y", "sigma", "truth"};
    for (std::size_t l = 1; l <= obs.grid.size(); ++l) {
        const double x = obs.grid.x(l);
        t.add_row({format_exact(x), format_exact(obs.y[l - 1]), format_exact((*obs.sigma)[l - 1]),
                   format_exact((*obs.truth)(x))});
    }
    return t;
}

Table run_risk(const Params& p, std::uint64_t seed) {
    const int k = p.k();
    const double r = p.positive("r", 20.0);
    const auto ns = p.sizes({101, 301});
    const auto e = p.signal(k, r);
    const auto spec = p.scale();
    const auto laws = p.laws();
    const auto reps = p.count("reps", 200, 2);
    const auto kind = p.estimator();
    const auto proc_cfg = p.procedure();
    Table t;
    t.note("n", join(ns));
    t.note("k", std::to_string(k));
    t.note("r", num(r));
    t.note("signal", e.name);
    t.note("scale", spec.describe());
    t.note("estimator", Estimator{kind, std::nullopt}.name());
    t.note("reps", std::to_string(reps));
    t.columns = {"n", "law", "reps", "R", "R_se", "T", "T_se", "identity_gap", "u1_violations"};
    for (std::size_t n : ns) {
        const TruthModel m(e.name, e.signal, spec, n);
        Estimator est{kind, std::nullopt};
        if (kind == EstimatorKind::oracle) est = Estimator::oracle(k, r, m, proc_cfg);
        const auto rep = risk_report(m, est, laws, reps, seed, proc_cfg);
        for (const auto& x : rep.per_law) {
            t.add_row({std::to_string(n), x.law, std::to_string(x.reps), num(x.R), num(x.R_se), num(x.T), num(x.T_se),
                       num(x.identity_gap), std::to_string(x.u1_violations)});
            if (x.identity_gap > 1e-9 || x.u1_violations > 0)
                throw invariant_failure("risk identity violated at n = " + std::to_string(n) + ", law " + x.law);
        }
        const auto& s = rep.sup();
        t.add_row({std::to_string(n), "sup", std::to_string(s.reps), num(s.R), num(s.R_se), num(s.T), num(s.T_se),
                   num(s.identity_gap), std::to_string(s.u1_violations)});
    }
    return t;
}

Table run_oracle_check(const Params& p, std::uint64_t seed) {
    const int k = p.k();
    const double r = p.positive("r", 20.0);
    const auto ns = p.sizes({101, 301, 1001});
    const auto e = p.signal(k, r);
    const auto spec = p.scale();
    const auto laws = p.laws();
    const auto reps = p.count("reps", 200, 2);
    const auto proc_cfg = p.procedure();
    Table t;
    t.note("n", join(ns));
    t.note("k", std::to_string(k));
    t.note("r", num(r));
    t.note("signal", e.name);
    t.note("scale", spec.describe());
    t.note("reps", std::to_string(reps));
    t.columns = {"n", "rho", "C", "grid_size", "min_risk", "R_star", "R_star_se", "delta", "delta_se", "trend", "trend_se"};
    for (std::size_t n : ns) {
        const TruthModel m(e.name, e.signal, spec, n);
        const auto oc = oracle_inequality_check(m, reps, derive_seed(seed, "oracle-check", n), proc_cfg, laws);
        const double scale = std::pow(static_cast<double>(n), 0.8);
        t.add_row({std::to_string(n), num(oc.rho), num(oc.C), std::to_string(oc.grid_size), num(oc.min_risk), num(oc.R_star),
                   num(oc.R_star_se), num(oc.delta), num(oc.delta_se), num(scale * oc.delta), num(scale * oc.delta_se)});
    }
    return t;
}

Table run_efficiency(const Params& p, std::uint64_t seed) {
    const int k = p.k();
    const double r = p.positive("r", 20.0);
    const auto ns = p.sizes({101, 301, 1001});
    const auto e = p.signal(k, r);
    Benchmark b{k, r, e.name, e.signal, p.scale()};
    const auto laws = p.laws();
    const auto reps = p.count("reps", 200, 2);
    const auto proc_cfg = p.procedure();
    Table t;
    t.note("n", join(ns));
    t.note("k", std::to_string(k));
    t.note("r", num(r));
    t.note("signal", b.name);
    t.note("scale", b.spec.describe());
    t.note("reps", std::to_string(reps));
    t.columns = {"n", "k", "r", "gamma", "R_hat", "R_se", "sup_law", "ratio", "ratio_se", "oracle_risk", "oracle_ratio"};
    for (const auto& x : efficiency_sweep(b, ns, reps, seed, proc_cfg, laws)) {
        if (!std::isfinite(x.ratio) || !(x.ratio > 0.0))
            throw invariant_failure("efficiency ratio is not finite and positive at n = " + std::to_string(x.n));
        t.add_row({std::to_string(x.n), std::to_string(x.k), num(x.r), num(x.gamma), num(x.R_hat), num(x.R_se), x.sup_law,
                   num(x.ratio), num(x.ratio_se), num(x.oracle_risk), num(x.oracle_ratio)});
    }
    return t;
}

Table run_lower_bound(const Params& p, std::uint64_t seed) {
    LowerBoundConfig c;
    c.k = p.k();
    c.r = p.positive("r", 20.0);
    c.n = p.size(1001);
    c.eps = p.real("eps_lb").value_or(0.1);
    if (!(c.eps > 0.0 && c.eps < 1.0)) p.fail("eps_lb", "must lie in (0, 1)");
    c.eta = p.real("eta").value_or(0.1);
    if (!(c.eta > 0.0 && c.eta < 0.5)) p.fail("eta", "must lie in (0, 1/2)");
    if (const auto N = p.integer("modes")) {
        if (*N < 1) p.fail("modes", "must be at least 1");
        c.N = static_cast<std::size_t>(*N);
    }
    c.draws = p.count("draws", 200);
    c.reps = p.count("reps", 200, 2);
    c.seed = seed;
    c.spec = p.scale();
    const auto rep = lower_bound_report(c, p.procedure());
    const auto& d = rep.design;
    Table t;
    t.note("scale", c.spec.describe());
    t.note("eta", num(c.eta));
    t.note("draws", std::to_string(c.draws));
    t.note("reps", std::to_string(c.reps));
    t.note("modes_capped", d.N_capped ? "yes" : "no");
    t.note("a3_sum", num(d.a3_sum()));
    t.note("asymptotic_constant", num(rep.asymptotic_constant));
    t.note("normalized_bound", num(rep.normalized_bound));
    t.columns = {"n", "k", "r", "eps_lb", "N", "M", "h", "R_star", "bound"};
    for (const auto& b : rep.bayes) {
        t.columns.push_back("bayes_" + b.estimator);
        t.columns.push_back("bayes_" + b.estimator + "_se");
    }
    t.columns.push_back("sandwich_margin");
    std::vector<std::string> row = {std::to_string(c.n), std::to_string(c.k), num(c.r), num(c.eps), std::to_string(d.N),
                                    std::to_string(d.M), num(d.h), num(d.R_star), num(rep.bound.bound)};
    for (const auto& b : rep.bayes) {
        row.push_back(num(b.mean));
        row.push_back(num(b.se));
    }
    row.push_back(num(rep.sandwich_margin()));
    t.add_row(std::move(row));
    if (rep.sandwich_margin() < 0.0) throw invariant_failure("lower bound exceeds a Monte Carlo Bayes risk by more than 3 se");
    return t;
}

Table run_lemmas(const Params& p) {
    const int k = p.k();
    const double r = p.positive("r", 5.0);
    const auto ns = p.sizes({3, 5, 11, 51, 101, 301});
    const int m_max = static_cast<int>(p.count("m_max", 4, 0));
    const auto rep = lemma_checks(k, r, ns, m_max);
    Table t;
    t.note("n", join(ns));
    t.note("k", std::to_string(k));
    t.note("r", num(r));
    t.columns = {"lemma", "checks", "violations", "worst_ratio", "worst_at"};
    const std::vector<std::pair<std::string, const BoundCheck*>> parts = {
        {"tail", &rep.tail}, {"basis_sum", &rep.basis_sum}, {"aliasing", &rep.aliasing}};
    for (const auto& [name, b] : parts)
        t.add_row({name, std::to_string(b->checks), std::to_string(b->violations), num(b->worst_ratio), b->worst_at});
    if (rep.violations() > 0) throw invariant_failure(std::to_string(rep.violations()) + " lemma bound violations");
    return t;
}

Table run_periodize(const Params& p, std::uint64_t seed) {
    Table t;
    const auto spec = p.scale();
    std::optional<Observations> obs;
    if (const auto path = p.text("input")) {
        obs = load_signal(*path);
        t.note("input", *path);
    } else {
        obs = simulated(p, derive_seed(seed, "observations"), t);
    }
    const double a = p.real("a").value_or(0.2);
    const double b = p.real("b").value_or(0.8);
    const double eps = p.real("eps_aux").value_or(default_aux_noise(spec));
    CutoffSpec cut = [&] {
        try {
            return CutoffSpec(a, b, eps);
        } catch (const config_error& e) {
            p.fail(p.text("a") ? "a" : "b", e.what());
        }
    }();
    const Observations out = periodize(*obs, cut, derive_seed(seed, "auxiliary"));
    t.note("a", num(a));
    t.note("b", num(b));
    t.note("eps_aux", num(eps));
    t.columns = {"x", "y", "chi"};
    if (out.sigma) t.columns.push_back("sigma");
    if (out.truth) t.columns.push_back("truth");
    for (std::size_t l = 1; l <= out.grid.size(); ++l) {
        const double x = out.grid.x(l);
        std::vector<std::string> row = {format_exact(x), format_exact(out.y[l - 1]), format_exact(cut(x))};
        if (out.sigma) {
            const double s = (*out.sigma)[l - 1];
            if (!(s * s >= eps * eps)) throw invariant_failure("periodized scale fell below eps at row " + std::to_string(l));
            row.push_back(format_exact(s));
        }
        if (out.truth) row.push_back(format_exact((*out.truth)(x)));
        t.add_row(std::move(row));
    }
    return t;
}

// ---------------------------------------------------------------------------
// Output

void write_json(std::ostream& out, const Table& t) {
    nlohmann::ordered_json j;
    j["provenance"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : t.provenance) j["provenance"][k] = v;
    j["columns"] = t.columns;
    j["rows"] = nlohmann::ordered_json::array();
    for (const auto& row : t.rows) {
        nlohmann::ordered_json r = nlohmann::ordered_json::object();
        for (std::size_t i = 0; i < row.size(); ++i) {
            double v = 0.0;
            const auto& s = row[i];
            const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
            if (res.ec == std::errc{} && res.ptr == s.data() + s.size() && std::isfinite(v))
                r[t.columns[i]] = v;
            else
                r[t.columns[i]] = s;
        }
        j["rows"].push_back(r);
    }
    out << j.dump(2) << '\n';
}

void emit(const Table& t, const std::string& format, const std::optional<std::string>& path) {
    std::ofstream file;
    if (path) {
        file.open(*path);
        if (!file) throw config_error("cannot write output file '" + *path + "'");
    }
    std::ostream& out = path ? static_cast<std::ostream&>(file) : std::cout;
    if (format == "json")
        write_json(out, t);
    else
        write_table(out, t, format == "csv" ? ',' : '\t');
    out.flush();
    if (!out) throw config_error("failed writing output");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Adaptive estimation laboratory for heteroscedastic regression"};
    app.set_version_flag("--version", std::string(library_version));
    app.require_subcommand(1);
    std::string config_path;
    app.add_option("--config", config_path, "key-value configuration file");

    std::map<std::string, std::map<std::string, std::string>> values;
    for (const auto& [cmd, opts] : command_options) {
        auto* sub = app.add_subcommand(cmd);
        auto add = [&](const OptionSpec& o) { sub->add_option("--" + o.name, values[cmd][o.name], o.help); };
        for (const auto& o : opts) add(o);
        for (const auto& o : common_options) add(o);
        if (uses_procedure(cmd))
            for (const auto& o : procedure_options) add(o);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    const std::string cmd = app.get_subcommands().front()->get_name();
    auto* sub = app.get_subcommand(cmd);
    try {
        KeyValueConfig cfg;
        if (!config_path.empty()) cfg = KeyValueConfig::load(config_path);
        std::set<std::string> known;
        for (const auto& o : command_options.at(cmd)) known.insert(key_of(o.name));
        for (const auto& o : common_options) known.insert(key_of(o.name));
        if (uses_procedure(cmd))
            for (const auto& o : procedure_options) known.insert(key_of(o.name));
        for (const auto& [key, entry] : cfg.entries())
            if (!known.count(key)) cfg.fail(key, "not an option of '" + cmd + "'");
        for (const auto& [name, value] : values[cmd])
            if (sub->count("--" + name) > 0) cfg.set(key_of(name), value);

        const Params p(cfg);
        const std::uint64_t seed = p.seed();
        const std::string format = p.text("format").value_or("tsv");
        if (format != "tsv" && format != "csv" && format != "json") p.fail("format", "expected tsv, csv or json");
        const auto out_path = p.text("out");

        Table t;
        if (cmd == "estimate") t = run_estimate(p);
        else if (cmd == "simulate") t = run_simulate(p, seed);
        else if (cmd == "risk") t = run_risk(p, seed);
        else if (cmd == "oracle-check") t = run_oracle_check(p, seed);
        else if (cmd == "efficiency") t = run_efficiency(p, seed);
        else if (cmd == "lower-bound") t = run_lower_bound(p, seed);
        else if (cmd == "lemmas") t = run_lemmas(p);
        else if (cmd == "periodize") t = run_periodize(p, seed);

        // provenance: command, version, seed and every resolved setting
        std::vector<std::pair<std::string, std::string>> head = {
            {"command", cmd}, {"version", std::string(library_version)}, {"seed", std::to_string(seed)}};
        if (!config_path.empty()) head.emplace_back("config", config_path);
        for (const auto& [key, entry] : cfg.entries())
            if (key != "out" && key != "format") head.emplace_back("option." + key, entry.value);
        t.provenance.insert(t.provenance.begin(), head.begin(), head.end());
        emit(t, format, out_path);
        return 0;
    } catch (const config_error& e) {
        std::cerr << "hetreg " << cmd << ": " << e.what() << '\n';
        return 1;
    } catch (const dimension_error& e) {
        std::cerr << "hetreg " << cmd << ": " << e.what() << '\n';
        return 1;
    } catch (const range_error& e) {
        std::cerr << "hetreg " << cmd << ": " << e.what() << '\n';
        return 1;
    } catch (const invariant_failure& e) {
        std::cerr << "hetreg " << cmd << ": invariant violated: " << e.what() << '\n';
        return 2;
    } catch (const error& e) {
        std::cerr << "hetreg " << cmd << ": " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "hetreg " << cmd << ": " << e.what() << '\n';
        return 2;
    }
}
