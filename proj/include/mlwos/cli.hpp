#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "mlwos/studies.hpp"

namespace mlwos::cli {

enum class Command { solve, study_variance, study_pdiv, study_workerr, trace };
enum class OutputFormat { csv, json };

/// Fully resolved run configuration. Command-dependent defaults are filled
/// in by parse_args.
struct RunConfig {
    Command command = Command::solve;
    std::string problem = "square";
    std::vector<Method> methods{Method::meas};
    std::vector<double> eps;
    double eta = 16.0;
    std::uint64_t warmup = kDefaultWarmup;
    std::optional<std::uint64_t> m;
    std::uint64_t seed = 0;
    unsigned threads = 1;
    int reps = 1;
    int levels = 6;
    double radius = 0.2;
    bool timing = false;
    std::string output;
    OutputFormat format = OutputFormat::json;
    std::string trace_path;
};

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Thrown by parse_args for --help; what() is the help text.
class HelpRequested : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Flags override --config values, which override defaults. Throws
/// UsageError naming the offending flag.
RunConfig parse_args(int argc, const char* const* argv);

/// Result-relevant fields only (no thread count or paths), so that artifacts
/// are byte-identical across thread counts.
nlohmann::json config_json(const RunConfig& config);

/// Executes the command, writes artifacts, prints a one-line summary to
/// `out`. Returns 0 on success, 1 on usage errors, 2 on runtime errors.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

std::string_view command_name(Command c);

}  // namespace mlwos::cli
