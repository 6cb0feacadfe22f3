#include "crs/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "crs/errors.hpp"

namespace crs {

namespace {

std::string trim(std::string s) {
    const auto not_space = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
    s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
    return s;
}

[[noreturn]] void fail_line(std::size_t line, const std::string& message) {
    std::ostringstream os;
    os << "line " << line << ": " << message;
    throw input_error(os.str());
}

double parse_double(const std::string& field, std::size_t line, const char* what) {
    double value = 0.0;
    const char* begin = field.data();
    const char* end = begin + field.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end) fail_line(line, std::string("invalid ") + what + " '" + field + "'");
    return value;
}

long parse_integer(const std::string& field, std::size_t line, const char* what) {
    long value = 0;
    const char* begin = field.data();
    const char* end = begin + field.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end) fail_line(line, std::string("invalid ") + what + " '" + field + "'");
    return value;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string::size_type from = 0;
    for (;;) {
        const auto to = s.find(sep, from);
        if (to == std::string::npos) {
            out.push_back(s.substr(from));
            return out;
        }
        out.push_back(s.substr(from, to - from));
        from = to + 1;
    }
}

void format_double(std::ostream& os, double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    os.write(buf, ptr - buf);
    (void)ec;
}

}  // namespace

ParsedCohorts parse_cohorts(std::istream& in, std::size_t k_override) {
    std::string line;
    std::size_t line_no = 0;

    if (!std::getline(in, line)) throw input_error("cohort file is empty");
    ++line_no;
    std::string header = trim(line);
    header.erase(std::remove_if(header.begin(), header.end(),
                                [](unsigned char c) { return std::isspace(c); }),
                 header.end());
    std::transform(header.begin(), header.end(), header.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (header != "group,time,state")
        fail_line(1, "expected header 'group,time,state', got '" + trim(line) + "'");

    struct Row {
        std::size_t line;
        int group;
        double time;
        long state;
    };
    std::vector<Row> rows;
    std::size_t max_state = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string text = trim(line);
        if (text.empty()) continue;
        const auto fields = split(text, ',');
        if (fields.size() != 3)
            fail_line(line_no, "expected 3 comma-separated fields, got " +
                                   std::to_string(fields.size()));
        const long group = parse_integer(trim(fields[0]), line_no, "group");
        if (group != 1 && group != 2)
            fail_line(line_no, "group must be 1 or 2, got " + std::to_string(group));
        const double time = parse_double(trim(fields[1]), line_no, "time");
        if (!(time > 0.0)) fail_line(line_no, "time must be strictly positive");
        const long state = parse_integer(trim(fields[2]), line_no, "state");
        if (state < 0) fail_line(line_no, "state must be >= 0");
        max_state = std::max(max_state, static_cast<std::size_t>(state));
        rows.push_back(Row{line_no, static_cast<int>(group), time, state});
    }

    const std::size_t k = k_override > 0 ? k_override : max_state;
    if (k == 0)
        throw input_error(
            "cohort file contains no events, so the number of causes cannot be inferred; "
            "pass the cause count explicitly");

    ParsedCohorts out;
    out.group1.num_causes = out.group2.num_causes = k;
    out.group1.label = 1;
    out.group2.label = 2;
    for (const Row& r : rows) {
        if (static_cast<std::size_t>(r.state) > k)
            fail_line(r.line, "state " + std::to_string(r.state) + " exceeds the cause count " +
                                  std::to_string(k));
        auto& cohort = r.group == 1 ? out.group1 : out.group2;
        cohort.observations.push_back(Observation{r.time, static_cast<unsigned>(r.state)});
    }
    if (out.group1.observations.empty()) throw input_error("cohort file has no rows for group 1");
    if (out.group2.observations.empty()) throw input_error("cohort file has no rows for group 2");
    return out;
}

ParsedCohorts parse_cohorts_file(const std::string& path, std::size_t k_override) {
    std::ifstream in(path);
    if (!in) throw input_error("cannot open cohort file '" + path + "'");
    return parse_cohorts(in, k_override);
}

void write_cohorts_csv(std::ostream& os, const Cohort& c1, const Cohort& c2) {
    os << "group,time,state\n";
    for (const Cohort* c : {&c1, &c2}) {
        for (const Observation& obs : c->observations) {
            os << c->label << ',';
            format_double(os, obs.time);
            os << ',' << obs.state << '\n';
        }
    }
}

namespace {

nlohmann::json settings_json(const RunMeta& meta) {
    nlohmann::json j{{"measure", measure_label(meta.measure)},
                     {"alpha", meta.alpha},
                     {"bootstrap", meta.bootstrap},
                     {"tau", meta.tau},
                     {"censoring", {meta.censoring1, meta.censoring2}},
                     {"seed", meta.seed},
                     {"threads", meta.threads}};
    if (meta.command == "test") j["epsilon"] = meta.epsilon;
    return j;
}

nlohmann::json fitted_pair_json(const FittedPair& p) {
    nlohmann::json j{{"alpha1", p.group1.intensities()},
                     {"alpha2", p.group2.intensities()},
                     {"loglik", p.loglik}};
    j["psi1"] = p.psi1 ? nlohmann::json(*p.psi1) : nlohmann::json(nullptr);
    j["psi2"] = p.psi2 ? nlohmann::json(*p.psi2) : nlohmann::json(nullptr);
    return j;
}

}  // namespace

std::string test_report_json(const TestReport& report, const RunMeta& meta) {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["command"] = meta.command;
    j["settings"] = settings_json(meta);
    j["d_hat"] = report.d_hat;
    j["witness"] = {{"value", report.witness.value},
                    {"time", report.witness.arg_time},
                    {"cause", report.witness.arg_cause},
                    {"sign", report.witness.sign}};
    j["fits"]["unconstrained"] = fitted_pair_json(report.fits_unconstrained);
    if (report.fits_constrained) {
        const ConstrainedFit& cf = *report.fits_constrained;
        nlohmann::json c = fitted_pair_json(cf.fitted);
        c["epsilon"] = cf.epsilon;
        c["constraint_residual"] = cf.constraint_residual;
        c["converged"] = cf.converged;
        c["initializer_loglik"] = cf.initializer_loglik;
        j["fits"]["constrained"] = c;
        j["fits"]["constrained_reused_unconstrained"] = false;
    } else {
        j["fits"]["constrained"] = nullptr;
        j["fits"]["constrained_reused_unconstrained"] = true;
    }
    j["bootstrap"] = {{"B", report.bootstrap_stats.size()},
                      {"stats", report.bootstrap_stats},
                      {"q_alpha", report.q_alpha},
                      {"p_value", report.p_value}};
    j["reject"] = report.reject;
    return j.dump(2);
}

std::string scan_result_json(const ScanResult& result, const RunMeta& meta) {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["command"] = meta.command;
    j["settings"] = settings_json(meta);
    j["grid"] = result.grid;
    j["p_values"] = result.p_values;
    j["rejects"] = result.rejects;
    j["epsilon_hat"] =
        result.epsilon_hat ? nlohmann::json(*result.epsilon_hat) : nlohmann::json(nullptr);
    j["monotonicity_violations"] = result.monotonicity_violations;
    j["refinement"] = {{"thresholds", result.refine_grid}, {"p_values", result.refine_p_values}};
    j["seed"] = result.seed;
    return j.dump(2);
}

StudyConfig parse_study_config(std::istream& in) {
    StudyConfig cfg;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string text = trim(line);
        if (text.empty()) continue;
        const auto eq = text.find('=');
        if (eq == std::string::npos)
            throw input_error("study config, line " + std::to_string(line_no) +
                              ": expected 'key = value'");
        const std::string key = trim(text.substr(0, eq));
        const std::string value = trim(text.substr(eq + 1));
        auto as_list = [&] {
            std::vector<std::string> items;
            for (auto& item : split(value, ','))
                if (!trim(item).empty()) items.push_back(trim(item));
            return items;
        };
        if (key == "scenarios") {
            cfg.scenarios = as_list();
        } else if (key == "censorings") {
            cfg.censorings = as_list();
        } else if (key == "sizes") {
            for (const auto& item : as_list()) {
                const auto x = item.find('x');
                if (x == std::string::npos)
                    throw input_error("study config, line " + std::to_string(line_no) +
                                      ": sizes must look like 200x200");
                cfg.sizes.emplace_back(
                    static_cast<std::size_t>(parse_integer(item.substr(0, x), line_no, "n1")),
                    static_cast<std::size_t>(parse_integer(item.substr(x + 1), line_no, "n2")));
            }
        } else if (key == "measures") {
            cfg.measures = as_list();
        } else if (key == "n_sim") {
            cfg.n_sim = static_cast<std::size_t>(parse_integer(value, line_no, "n_sim"));
        } else if (key == "bootstrap" || key == "B") {
            cfg.bootstrap = static_cast<std::size_t>(parse_integer(value, line_no, "bootstrap"));
        } else if (key == "alpha") {
            cfg.alpha = parse_double(value, line_no, "alpha");
        } else if (key == "seed") {
            cfg.seed = static_cast<std::uint64_t>(parse_integer(value, line_no, "seed"));
        } else if (key == "threads") {
            cfg.threads = static_cast<unsigned>(parse_integer(value, line_no, "threads"));
        } else if (key == "out") {
            cfg.out = value;
        } else {
            throw input_error("study config, line " + std::to_string(line_no) +
                              ": unknown key '" + key + "'");
        }
    }
    return cfg;
}

}  // namespace crs
