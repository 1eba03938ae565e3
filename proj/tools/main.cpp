#include "gcstab/cli.hpp"
#include "gcstab/error.hpp"
#include "gcstab/parallel.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace gcstab;

namespace {

std::vector<std::string> split_commas(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream in(s);
    std::string item;
    while (std::getline(in, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

void write_text(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cli", "Io", "cannot write " + path);
    out << text;
}

json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cli", "Io", "cannot read " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw Error("cli", "Schema", std::string("invalid JSON in ") + path + ": " + e.what());
    }
}

int report_error(const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    std::cout << json{{"errors", json::array({{{"tag", e.tag()}, {"message", e.detail()}}})}}.dump() << "\n";
    return 2;
}

std::vector<fs::path> corpus_problems(const std::string& dir) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    return files;
}

fs::path expected_path(const std::string& dir, const fs::path& problem) {
    return fs::path(dir) / "expected" / (problem.stem().string() + ".report.json");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Kähler-Einstein, soliton and K-energy analysis of group compactifications"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);
    int threads = 0;
    app.add_option("--threads", threads, "worker threads (0 = hardware)");

    auto* analyze = app.add_subcommand("analyze", "run the analyses of a problem file and print the report");
    std::string problem_path, analyses, out_path;
    int quad_order = 0;
    bool timings = false;
    analyze->add_option("problem", problem_path, "problem JSON file")->required();
    analyze->add_option("--analyses", analyses, "comma-separated subset of ke,properness,futaki,destabilize,soliton,kenergy");
    analyze->add_option("--out", out_path, "report path (stdout when absent)");
    analyze->add_option("--threads", threads, "worker threads (0 = hardware)");
    analyze->add_option("--quad-order", quad_order, "Gauss-Legendre order for the soliton solver");
    analyze->add_flag("--timings", timings, "add wall-clock timings per stage");

    auto* corpus = app.add_subcommand("corpus", "list or run the bundled problem corpus");
    corpus->require_subcommand(1);
    std::string corpus_dir = GCSTAB_CORPUS_DIR;
    auto* corpus_list = corpus->add_subcommand("list", "list corpus problems");
    corpus_list->add_option("--dir", corpus_dir, "corpus directory");
    auto* corpus_run = corpus->add_subcommand("run", "run every corpus problem");
    bool check = false, update = false;
    corpus_run->add_option("--dir", corpus_dir, "corpus directory");
    corpus_run->add_option("--threads", threads, "worker threads (0 = hardware)");
    auto* check_flag = corpus_run->add_flag("--check", check, "compare with the expected reports");
    corpus_run->add_flag("--update", update, "rewrite the expected reports")->excludes(check_flag);

    auto* kenergy = app.add_subcommand("kenergy", "evaluate or minimize the K-energy, printing JSON lines");
    std::string candidate = "guillemin";
    int level = 0, degree = 2, max_iter = 60;
    double wall_margin = 1e-6, tol = 1e-6;
    bool minimize = false;
    kenergy->add_option("problem", problem_path, "problem JSON file")->required();
    kenergy->add_option("--candidate", candidate, "'guillemin' or a candidate JSON file");
    kenergy->add_option("--quad-order", level, "tanh-sinh level (0 = automatic)");
    kenergy->add_option("--wall-margin", wall_margin, "drop nodes this close to a wall, relative to the diameter");
    kenergy->add_flag("--minimize", minimize, "minimize over W-invariant polynomial perturbations");
    kenergy->add_option("--degree", degree, "maximum perturbation degree");
    kenergy->add_option("--tol", tol, "gradient-norm tolerance");
    kenergy->add_option("--max-iter", max_iter, "iteration cap");
    kenergy->add_option("--threads", threads, "worker threads (0 = hardware)");

    auto* soliton = app.add_subcommand("soliton", "solve for the soliton vector field");
    soliton->add_option("problem", problem_path, "problem JSON file")->required();
    soliton->add_option("--quad-order", quad_order, "Gauss-Legendre order (0 = automatic)");
    soliton->add_option("--threads", threads, "worker threads (0 = hardware)");

    auto* exporter = app.add_subcommand("export", "extract plot data from a report");
    std::string report_path, what, format = "csv";
    exporter->add_option("report", report_path, "report JSON file")->required();
    exporter->add_option("--what", what, "polytope, barycenters or descent-trace")->required();
    exporter->add_option("--format", format, "csv or json");
    exporter->add_option("--out", out_path, "output path (stdout when absent)");

    CLI11_PARSE(app, argc, argv);
    if (threads > 0) set_thread_count(threads);

    try {
        if (*analyze) {
            auto p = load_problem(problem_path);
            if (!analyses.empty()) {
                ProblemSpec probe = p;
                json j = to_json(probe);
                j["analyses"] = split_commas(analyses);
                p = parse_problem(j);
            }
            if (quad_order > 0) p.options.soliton_order = quad_order;
            auto res = run_problem(p, RunFlags{timings});
            write_text(out_path, dump_report(res.report));
            return res.exit_code;
        }
        if (*corpus_list) {
            for (const auto& f : corpus_problems(corpus_dir)) {
                auto p = load_problem(f.string());
                std::cout << f.stem().string() << "\t" << p.name << "\trank " << p.rank << "\n";
            }
            return 0;
        }
        if (*corpus_run) {
            int failures = 0;
            for (const auto& f : corpus_problems(corpus_dir)) {
                auto p = load_problem(f.string());
                auto res = run_problem(p);
                const auto expected = expected_path(corpus_dir, f);
                if (update) {
                    fs::create_directories(expected.parent_path());
                    write_text(expected.string(), dump_report(res.report));
                    std::cout << "updated " << expected.string() << "\n";
                } else if (check) {
                    if (!fs::exists(expected)) {
                        std::cout << "FAIL " << f.stem().string() << ": no expected report\n";
                        ++failures;
                        continue;
                    }
                    auto diffs = compare_reports(read_json(expected.string()), res.report);
                    std::cout << (diffs.empty() ? "PASS " : "FAIL ") << f.stem().string() << "\n";
                    for (const auto& d : diffs) std::cout << "  " << d << "\n";
                    if (!diffs.empty()) ++failures;
                } else {
                    std::cout << f.stem().string() << "\texit " << res.exit_code << "\t"
                              << res.report.value("verdicts", json::object()).dump() << "\n";
                }
            }
            return failures == 0 ? 0 : 1;
        }
        if (*kenergy) {
            auto p = load_problem(problem_path);
            p.options.kenergy_level = level;
            p.options.wall_margin = wall_margin;
            p.options.minimize = minimize;
            p.options.degree = degree;
            p.options.minimize_tol = tol;
            p.options.max_iter = max_iter;
            auto cp = build_chamber(p);
            auto m = chamber_moments(cp);
            auto u = candidate == "guillemin" ? SmoothCandidate::guillemin(cp.polytope())
                                              : parse_candidate(read_json(candidate), cp);
            int code = 0;
            auto j = kenergy_report(cp, m, u, candidate, p.options, code);
            if (j.contains("minimize"))
                for (const auto& t : j["minimize"]["trace"]) {
                    json row = t;
                    row["event"] = "trace";
                    std::cout << row.dump() << "\n";
                }
            j["event"] = "result";
            std::cout << j.dump() << "\n";
            return code;
        }
        if (*soliton) {
            auto p = load_problem(problem_path);
            if (quad_order > 0) p.options.soliton_order = quad_order;
            auto cp = build_chamber(p);
            auto m = chamber_moments(cp);
            int code = 0;
            std::cout << soliton_report(cp, m, p.options, code).dump(2) << "\n";
            return code;
        }
        if (*exporter) {
            write_text(out_path, export_plot_data(read_json(report_path), what, format));
            return 0;
        }
    } catch (const Error& e) {
        return report_error(e);
    } catch (const json::exception& e) {
        return report_error(Error("cli", "Schema", e.what()));
    } catch (const fs::filesystem_error& e) {
        return report_error(Error("cli", "Io", e.what()));
    }
    return 0;
}
