#pragma once

#include "gcstab/criteria.hpp"
#include "gcstab/kenergy.hpp"
#include "gcstab/polytope.hpp"
#include "gcstab/rational.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace gcstab {

inline constexpr const char* kProblemSchema = "gcstab-problem/1";
inline constexpr const char* kReportSchema = "gcstab-report/1";
inline constexpr const char* kVersion = "0.1.0";

struct ProblemOptions {
    int soliton_order = 0;   // Gauss-Legendre points per direction; 0 = automatic
    double soliton_tol = 1e-12;
    int kenergy_level = 0;   // tanh-sinh level; 0 = automatic
    double wall_margin = 1e-6;
    bool minimize = false;
    int degree = 2;
    double minimize_tol = 1e-6;
    int max_iter = 60;
    bool operator==(const ProblemOptions&) const = default;
};

/// Problem file contents. Rationals stay exact.
struct ProblemSpec {
    std::string name;
    std::size_t rank = 0;
    RMat gram;
    std::vector<RVec> simple_roots;
    std::optional<std::string> cartan_type;
    std::vector<Facet> facets;
    std::optional<std::vector<RVec>> vertices;
    ProblemOptions options;
    std::vector<std::string> analyses;
};

const std::vector<std::string>& all_analyses();

/// Errors: cli.Schema, cli.UnknownField, cli.UnknownAnalysis, input.BadRational.
ProblemSpec parse_problem(const nlohmann::json& j);
ProblemSpec load_problem(const std::string& path);
nlohmann::json to_json(const ProblemSpec& p);
bool operator==(const ProblemSpec& a, const ProblemSpec& b);

/// Builds the root system and chamber polytope (rootdata and polyint validation).
ChamberPolytope build_chamber(const ProblemSpec& p);

struct RunOutcome {
    nlohmann::json report;
    int exit_code = 0;  // 0 ok, 2 validation or module error, 3 solver non-convergence
};

struct RunFlags {
    bool timings = false;
};

/// Runs the requested analyses in dependency order and assembles the report.
RunOutcome run_problem(const ProblemSpec& p, const RunFlags& flags = {});

/// Candidate file: {"guillemin": bool, "terms": [{"exponents": [..], "coeff": "p/q"}]}.
/// Errors: cli.Schema, cli.UnknownField.
SmoothCandidate parse_candidate(const nlohmann::json& j, const ChamberPolytope& cp);

/// Report blocks shared by the subcommands. `exit_code` is raised to 3 on non-convergence.
nlohmann::json soliton_report(const ChamberPolytope& cp, const ChamberMoments& m, const ProblemOptions& opt,
                              int& exit_code);
nlohmann::json kenergy_report(const ChamberPolytope& cp, const ChamberMoments& m, const SmoothCandidate& u,
                              const std::string& candidate_label, const ProblemOptions& opt, int& exit_code);

/// Serialized report text (stable key order, trailing newline).
std::string dump_report(const nlohmann::json& report);

/// Plot data from a report. `what` is polytope, barycenters or descent-trace;
/// `format` is csv or json. Errors: cli.UnknownSelector, cli.MissingData.
std::string export_plot_data(const nlohmann::json& report, const std::string& what, const std::string& format);

/// Differences between an expected and an actual report: strings, booleans and
/// integers must match exactly, floats to the given relative tolerance.
/// Provenance and timing fields are skipped.
std::vector<std::string> compare_reports(const nlohmann::json& expected, const nlohmann::json& actual,
                                         double rel_tol = 1e-9);

/// Stable 64-bit FNV-1a hash, hex encoded.
std::string fnv1a_hex(const std::string& text);

}  // namespace gcstab
