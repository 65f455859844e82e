#include "mlwos/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"

#include "mlwos/parallel.hpp"

namespace mlwos::cli {

namespace {

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> parts;
    std::stringstream in(s);
    std::string item;
    while (std::getline(in, item, ','))
        if (!item.empty()) parts.push_back(item);
    return parts;
}

double parse_real(const std::string& text, const std::string& what) {
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw UsageError(what + ": '" + text + "' is not a number");
    }
}

std::uint64_t parse_count(const std::string& text, const std::string& what) {
    const double v = parse_real(text, what);
    if (!(v >= 0.0) || v != std::floor(v) || v > 1e18)
        throw UsageError(what + ": '" + text + "' is not a nonnegative integer");
    return static_cast<std::uint64_t>(v);
}

std::vector<double> parse_reals(const std::string& text, const std::string& what) {
    std::vector<double> out;
    for (const auto& p : split_list(text)) out.push_back(parse_real(p, what));
    if (out.empty()) throw UsageError(what + ": empty list");
    return out;
}

std::vector<Method> parse_methods(const std::string& text, const std::string& what) {
    std::vector<Method> out;
    for (const auto& p : split_list(text)) {
        try {
            out.push_back(parse_method(p));
        } catch (const std::invalid_argument&) {
            throw UsageError(what + ": unknown method '" + p + "' (expected wos, mlwos or meas)");
        }
    }
    if (out.empty()) throw UsageError(what + ": empty list");
    return out;
}

Command parse_command(const std::string& name) {
    if (name == "solve") return Command::solve;
    if (name == "study-variance") return Command::study_variance;
    if (name == "study-pdiv") return Command::study_pdiv;
    if (name == "study-workerr") return Command::study_workerr;
    if (name == "trace") return Command::trace;
    throw UsageError("unknown command '" + name +
                     "' (expected solve, study-variance, study-pdiv, study-workerr or trace)");
}

OutputFormat parse_format(const std::string& name, const std::string& what) {
    if (name == "csv") return OutputFormat::csv;
    if (name == "json") return OutputFormat::json;
    throw UsageError(what + ": expected csv or json, got '" + name + "'");
}

void apply_command_defaults(RunConfig& c) {
    switch (c.command) {
    case Command::solve:
        c.eps = {1e-2};
        c.format = OutputFormat::json;
        c.output = "solve.json";
        break;
    case Command::study_variance:
        c.eps = {0.5};
        c.eta = 2.0;
        c.m = 10'000;
        c.reps = 10;
        c.format = OutputFormat::csv;
        c.output = "variance.csv";
        break;
    case Command::study_pdiv:
        c.eps = {0.05, 0.025, 0.0125, 0.00625};
        c.m = 100'000;
        c.format = OutputFormat::csv;
        c.output = "pdiv.csv";
        break;
    case Command::study_workerr:
        c.eps = {1e-1, 3e-2, 1e-2, 3e-3, 1e-3};
        c.methods = {Method::wos, Method::mlwos, Method::meas};
        c.reps = 20;
        c.format = OutputFormat::csv;
        c.output = "workerr.csv";
        break;
    case Command::trace:
        c.eps = {1e-2};
        c.format = OutputFormat::csv;
        c.output = "trace.csv";
        break;
    }
}

// Config values arrive as JSON scalars, arrays, or strings; normalize to text
// so one code path handles file and flag values.
std::string json_text(const nlohmann::json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_array()) {
        std::string s;
        for (const auto& e : v) s += (s.empty() ? "" : ",") + json_text(e);
        return s;
    }
    if (v.is_number_integer() || v.is_number_unsigned()) return std::to_string(v.get<std::int64_t>());
    if (v.is_number_float()) {
        std::ostringstream o;
        o << std::setprecision(17) << v.get<double>();
        return o.str();
    }
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    throw UsageError("config: unsupported value " + v.dump());
}

bool parse_bool(const std::string& text, const std::string& what) {
    if (text == "true" || text == "1") return true;
    if (text == "false" || text == "0") return false;
    throw UsageError(what + ": expected true or false");
}

void apply_field(RunConfig& c, const std::string& key, const std::string& value, const std::string& what) {
    if (key == "problem") {
        try {
            (void)make_problem(value);
        } catch (const std::invalid_argument&) {
            throw UsageError(what + ": unknown problem '" + value + "' (expected square, hemisphere, ball2 or ball3)");
        }
        c.problem = value;
    } else if (key == "method") {
        c.methods = parse_methods(value, what);
    } else if (key == "eps" || key == "eps_target") {
        c.eps = parse_reals(value, what);
    } else if (key == "eta") {
        c.eta = parse_real(value, what);
    } else if (key == "warmup") {
        c.warmup = parse_count(value, what);
    } else if (key == "m") {
        c.m = parse_count(value, what);
    } else if (key == "seed") {
        c.seed = parse_count(value, what);
    } else if (key == "threads") {
        c.threads = static_cast<unsigned>(parse_count(value, what));
    } else if (key == "reps") {
        c.reps = static_cast<int>(parse_count(value, what));
    } else if (key == "levels") {
        c.levels = static_cast<int>(parse_count(value, what));
    } else if (key == "radius") {
        c.radius = parse_real(value, what);
    } else if (key == "timing") {
        c.timing = parse_bool(value, what);
    } else if (key == "output") {
        c.output = value;
    } else if (key == "format") {
        c.format = parse_format(value, what);
    } else if (key == "trace_path") {
        c.trace_path = value;
    } else {
        throw UsageError(what + ": unknown setting");
    }
}

void validate(const RunConfig& c) {
    for (double e : c.eps)
        if (!(e > 0.0)) throw UsageError("--eps: must be > 0");
    if (!(c.eta > 1.0)) throw UsageError("--eta: must be > 1");
    if (c.threads < 1) throw UsageError("--threads: must be >= 1");
    if (c.reps < 1) throw UsageError("--reps: must be >= 1");
    if (c.warmup < kMinSamples) throw UsageError("--warmup: must be >= 2");
    if (c.levels < 1) throw UsageError("--levels: must be >= 1");
    if (c.m && *c.m < 1) throw UsageError("--m: must be >= 1");
    if (c.command == Command::solve && c.methods.size() != 1)
        throw UsageError("--method: solve takes exactly one method");
    if (c.command == Command::solve && c.eps.size() != 1)
        throw UsageError("--eps: solve takes exactly one value");
    if (c.command == Command::study_workerr && c.reps < 5)
        throw UsageError("--reps: study-workerr needs at least 5 repetitions");
    if (c.command == Command::study_variance && c.m && *c.m < 100)
        throw UsageError("--m: study-variance needs at least 100 pairs per level");
    if (c.output.empty()) throw UsageError("--output: must not be empty");
}

}  // namespace

std::string_view command_name(Command c) {
    switch (c) {
    case Command::solve: return "solve";
    case Command::study_variance: return "study-variance";
    case Command::study_pdiv: return "study-pdiv";
    case Command::study_workerr: return "study-workerr";
    case Command::trace: return "trace";
    }
    return "?";
}

RunConfig parse_args(int argc, const char* const* argv) {
    CLI::App app{"Walk-on-Spheres and multilevel Walk-on-Spheres point solver", "mlwos"};
    std::string command;
    app.add_option("command", command, "solve | study-variance | study-pdiv | study-workerr | trace")
        ->required();

    // Every setting is read as text so flags and config values share one parser.
    const std::vector<std::pair<std::string, std::string>> flags{
        {"problem", "square | hemisphere | ball2 | ball3"},
        {"method", "wos | mlwos | meas (comma list for study-workerr)"},
        {"eps", "target width (comma list for the sweeps; eps0 for study-variance)"},
        {"eta", "level refinement factor, > 1"},
        {"warmup", "warm-up samples per level"},
        {"m", "sample count (WOS solve), pairs per level or per eps (studies)"},
        {"seed", "master seed"},
        {"threads", "worker threads"},
        {"reps", "repetitions per study point"},
        {"levels", "correction levels for study-variance"},
        {"radius", "divergence radius for study-pdiv"},
        {"timing", "record wall-clock times (true/false)"},
        {"output", "output file"},
        {"format", "csv | json"},
        {"trace-path", "CSV path for the trace command"},
    };
    std::map<std::string, std::string> given;
    for (const auto& [name, help] : flags) app.add_option("--" + name, given[name], help);
    std::string config_path;
    app.add_option("--config", config_path, "JSON file with settings (flags take precedence)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        throw HelpRequested(app.help());
    } catch (const CLI::ParseError& e) {
        throw UsageError(e.what());
    }

    RunConfig c;
    c.command = parse_command(command);
    apply_command_defaults(c);

    bool threads_set = false;
    if (!config_path.empty()) {
        std::ifstream in(config_path);
        if (!in) throw UsageError("--config: cannot open '" + config_path + "'");
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(in);
        } catch (const nlohmann::json::exception& e) {
            throw UsageError("--config: " + std::string(e.what()));
        }
        if (!j.is_object()) throw UsageError("--config: expected a JSON object");
        for (const auto& [key, value] : j.items()) {
            if (key == "command") {
                if (value.get<std::string>() != command)
                    throw UsageError("config: command '" + value.get<std::string>() +
                                     "' does not match '" + command + "'");
                continue;
            }
            if (key == "m" && value.is_null()) {
                c.m.reset();
                continue;
            }
            apply_field(c, key, json_text(value), "config key '" + key + "'");
            threads_set = threads_set || key == "threads";
        }
    }

    for (const auto& [name, help] : flags) {
        if (app.count("--" + name) == 0) continue;
        const std::string key = name == "trace-path" ? "trace_path" : name;
        apply_field(c, key, given[name], "--" + name);
        threads_set = threads_set || name == "threads";
    }

    if (!threads_set) {
        if (const char* env = std::getenv("MLWOS_THREADS"); env && *env)
            c.threads = static_cast<unsigned>(parse_count(env, "MLWOS_THREADS"));
        else
            c.threads = hardware_threads();
    }
    validate(c);
    return c;
}

nlohmann::json config_json(const RunConfig& c) {
    nlohmann::json methods = nlohmann::json::array();
    for (Method m : c.methods) methods.push_back(method_name(m));
    return {{"command", command_name(c.command)},
            {"problem", c.problem},
            {"method", methods},
            {"eps_target", c.eps},
            {"eta", c.eta},
            {"warmup", c.warmup},
            {"m", c.m ? nlohmann::json(*c.m) : nlohmann::json(nullptr)},
            {"seed", c.seed},
            {"reps", c.reps},
            {"levels", c.levels},
            {"radius", c.radius},
            {"timing", c.timing}};
}

namespace {

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    return out;
}

void write_json(const std::string& path, const nlohmann::json& j) {
    auto out = open_output(path);
    out << j.dump(2) << '\n';
}

std::string summary_path(const std::string& output) {
    std::filesystem::path p(output);
    p.replace_extension(".summary.json");
    return p.string();
}

std::string fixed6(double v) {
    std::ostringstream o;
    o << std::fixed << std::setprecision(6) << v;
    return o.str();
}

template <class Writer>
void emit_study(const RunConfig& c, nlohmann::json summary, const nlohmann::json& records_json,
                Writer&& write_csv) {
    summary["config"] = config_json(c);
    if (c.format == OutputFormat::json) {
        summary["records"] = records_json;
        write_json(c.output, summary);
    } else {
        auto out = open_output(c.output);
        write_csv(out);
        write_json(summary_path(c.output), summary);
    }
}

int run_solve(const RunConfig& c, const Problem& problem, const SamplingOptions& opt, std::ostream& out) {
    const Method method = c.methods.front();
    const double eps = c.eps.front();
    EstimateReport report = [&] {
        switch (method) {
        case Method::wos: return mc_estimate(problem, eps, c.m, opt);
        case Method::meas: return adaptive_mlmc(problem, eps, c.eta, c.warmup, opt);
        case Method::mlwos: break;
        }
        return analytic_mlmc(problem, eps, c.eta, 1.0 / 3.0, PolylogWork{2}, c.warmup, opt);
    }();
    report.method = std::string(method_name(method));
    nlohmann::json j = to_json(report, c.timing);
    j["config"] = config_json(c);
    if (const auto ref = reference_value(problem)) j["reference"] = ref->value;
    if (c.format == OutputFormat::json) {
        write_json(c.output, j);
    } else {
        auto f = open_output(c.output);
        f << "level,eps,m,mean,variance,mean_steps\n";
        for (const auto& lvl : j["levels"])
            f << lvl["level"].dump() << ',' << lvl["eps"].dump() << ',' << lvl["m"].dump() << ','
              << lvl["mean"].dump() << ',' << lvl["variance"].dump() << ',' << lvl["mean_steps"].dump()
              << '\n';
        j.erase("levels");
        write_json(summary_path(c.output), j);
    }
    out << problem.name() << ' ' << method_name(method) << " eps=" << eps << ": value "
        << fixed6(report.value) << " +/- " << fixed6(report.stat_error) << " (stat_error), work "
        << report.total_steps << " steps\n";
    return 0;
}

int run_variance(const RunConfig& c, const Problem& problem, const SamplingOptions& opt, std::ostream& out) {
    const auto result = variance_study(problem, c.eta, c.eps.front(), c.levels, c.m.value_or(10'000), c.reps, opt);
    nlohmann::json records = nlohmann::json::array();
    for (const auto& r : result.records)
        records.push_back({{"level", r.level}, {"eps", r.eps}, {"l2_norm", r.l2_norm}, {"variance", r.variance},
                           {"mean_steps", r.mean_steps}, {"rep", r.rep}});
    emit_study(c, summary_json(result), records,
               [&](std::ostream& f) { write_variance_csv(f, result.records); });
    out << "variance study on " << problem.name() << ": ";
    if (result.fit.degenerate)
        out << "degenerate (all level norms vanish)\n";
    else
        out << "L2-norm decay exponent s = " << fixed6(result.fit.slope) << " (R^2 " << fixed6(result.fit.r_squared)
            << ")\n";
    return 0;
}

int run_pdiv(const RunConfig& c, const Problem& problem, const SamplingOptions& opt, std::ostream& out,
             std::ostream& err) {
    const auto result = pdiv_study(problem, c.eps, c.radius, c.m.value_or(100'000), opt);
    for (const auto& w : result.warnings) err << "warning: " << w << '\n';
    nlohmann::json records = nlohmann::json::array();
    for (const auto& r : result.records)
        records.push_back({{"eps", r.eps}, {"radius", r.radius}, {"m", r.m}, {"divergences", r.divergences},
                           {"p_hat", r.p_hat}});
    emit_study(c, summary_json(result), records, [&](std::ostream& f) { write_pdiv_csv(f, result.records); });
    out << "divergence study on " << problem.name() << ": ";
    if (result.fit.degenerate)
        out << "degenerate (fewer than two nonzero estimates)\n";
    else
        out << "slope of p_hat vs eps = " << fixed6(result.fit.slope) << '\n';
    return 0;
}

int run_workerr(const RunConfig& c, const Problem& problem, const SamplingOptions& opt, std::ostream& out) {
    WorkErrorOptions study;
    study.eta = c.eta;
    study.reps = c.reps;
    study.warmup = c.warmup;
    const auto result = work_error_study(problem, c.methods, c.eps, study, opt);
    nlohmann::json records = nlohmann::json::array();
    for (const auto& r : result.records)
        records.push_back({{"method", method_name(r.method)}, {"eps_target", r.eps_target}, {"eta", r.eta},
                           {"rep", r.rep}, {"value", r.value}, {"error", r.error}, {"work", r.work},
                           {"wall_time_s", c.timing ? r.wall_time_s : 0.0}});
    emit_study(c, summary_json(result), records,
               [&](std::ostream& f) { write_workerr_csv(f, result.records, c.timing); });
    out << "error vs work on " << problem.name() << ":";
    for (const auto& s : result.summaries) {
        out << ' ' << method_name(s.method) << " slope ";
        out << (s.fit.degenerate ? std::string("n/a") : fixed6(s.fit.slope));
    }
    out << '\n';
    return 0;
}

int run_trace(const RunConfig& c, const Problem& problem, const SamplingOptions& opt, std::ostream& out) {
    std::vector<TracePoint> trace;
    Stream stream({opt.seed, opt.context, 0, 0});
    const WalkResult r = wos_walk(problem, c.eps.front(), stream, {opt.max_steps, &trace});
    const std::string path = c.trace_path.empty() ? c.output : c.trace_path;
    auto f = open_output(path);
    write_trace_csv(f, trace);
    out << "trace on " << problem.name() << ": " << r.steps << " steps, value " << fixed6(r.value) << ", written to "
        << path << '\n';
    return 0;
}

}  // namespace

int run(const RunConfig& c, std::ostream& out, std::ostream& err) {
    try {
        const Problem problem = make_problem(c.problem);
        SamplingOptions opt;
        opt.seed = c.seed;
        opt.threads = c.threads;
        switch (c.command) {
        case Command::solve: return run_solve(c, problem, opt, out);
        case Command::study_variance: return run_variance(c, problem, opt, out);
        case Command::study_pdiv: return run_pdiv(c, problem, opt, out, err);
        case Command::study_workerr:
            if (!reference_value(problem)) {
                err << "error: problem '" << c.problem << "' has no reference solution\n";
                return 2;
            }
            return run_workerr(c, problem, opt, out);
        case Command::trace: return run_trace(c, problem, opt, out);
        }
    } catch (const StepLimitExceeded& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        err << "usage error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
    return 2;
}

}  // namespace mlwos::cli
