#pragma once

// Experiment configuration, dispatch, persistence and cross-run reports.
//
// Layout: <root>/<config-hash>/record.json plus CSV tables and timing.json.
// record.json holds no wall-clock data, so identical configurations give
// byte-identical records.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace paneitz {

/// Invalid configuration; the message names the offending field.
class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

inline constexpr int kRecordSchema = 1;
inline constexpr const char* kArtifactVersion = "1.0.0";

struct ExperimentConfig {
    std::string command;
    int n = 5;
    bool round = false;          // explicitly requested; excludes S
    std::optional<double> S; // replaces the round value when set
    std::optional<int> L;    // eigen degree; per-command default
    std::optional<int> q;    // quadrature nodes; per-command default
    int k = 2;
    int L_opt = 16;
    int restarts = 8;
    int iterations = 500;
    std::uint64_t seed = 0;
    std::vector<double> eps_grid{0.05, 0.075, 0.1, 0.15, 0.2};
    double delta = 0.5;
    std::string density = "const"; // spectrum: const | two-bubble | random
    double init_eps = 0.3;
    double init_split = 0.5;
    std::optional<double> mu1; // two-plane-bound: defaults to K2^{-2}
    double audit_eps = 0.1;
    double audit_A = 0.0;
    bool parallel = true;
    std::string out_root; // not part of the hash

    double curvature() const;
    int resolved_L() const;
    int resolved_q() const;
};

/// Keys accepted in config files and as --key overrides (dashes become underscores).
const std::vector<std::string>& config_keys();

/// Sets one field from text; throws UsageError naming the key.
void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value);

/// Flat key=value file; '#' starts a comment.
std::map<std::string, std::string> read_config_file(const std::filesystem::path& path);

/// Checks every numeric field against the preconditions of the command's modules.
void validate(const ExperimentConfig& cfg);

/// Sorted key=value lines of every field that affects results.
std::string canonical_config(const ExperimentConfig& cfg);

/// FNV-1a 64-bit hash of canonical_config, 16 hex digits.
std::string config_hash(const ExperimentConfig& cfg);

/// --out beats PANEITZ_LAB_OUT beats "runs".
std::filesystem::path output_root(const std::optional<std::string>& cli_out);

/// Full-precision decimal (17 significant digits).
std::string format_double(double x);

struct RunOutcome {
    std::filesystem::path directory;
    std::string hash;
    std::string summary; // human-readable
};

/// Validates, runs the command, writes record.json, CSV tables and timing.json.
RunOutcome dispatch(const ExperimentConfig& cfg);

struct ReportOutcome {
    int valid = 0;
    int skipped = 0;
    std::vector<std::string> warnings;
    std::string summary;
    bool ok() const { return valid > 0; }
};

/// Consolidates every <root>/*/record.json into summary.csv, runs.csv and
/// summary.json under `root`. Unreadable records are skipped with a warning.
ReportOutcome report(const std::filesystem::path& root);

} // namespace paneitz
