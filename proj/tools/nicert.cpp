#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "nicert/abstract.hpp"
#include "nicert/certificate.hpp"
#include "nicert/concrete.hpp"
#include "nicert/extended.hpp"
#include "nicert/oracle.hpp"
#include "nicert/parser.hpp"
#include "nicert/policy.hpp"

using nlohmann::json;
using namespace nicert;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitViolation = 1;
constexpr int kExitError = 2;

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw RuntimeFault("cannot read file '" + path + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

RunLimits limits_from_env() {
    RunLimits limits;
    if (const char* env = std::getenv("NICERT_STEP_LIMIT")) {
        try {
            limits.step_limit = std::stoll(env);
        } catch (...) {
            throw RuntimeFault("NICERT_STEP_LIMIT is not a number");
        }
    }
    return limits;
}

std::map<std::string, Value> parse_inputs(const std::vector<std::string>& raw) {
    std::map<std::string, Value> out;
    for (const std::string& kv : raw) {
        size_t eq = kv.find('=');
        if (eq == std::string::npos) throw RuntimeFault("--in expects name=value: '" + kv + "'");
        std::string name = kv.substr(0, eq);
        std::string val = kv.substr(eq + 1);
        if (val == "true" || val == "false") {
            out[name] = Value::of_bool(val == "true");
        } else {
            try {
                out[name] = Value::of_int(BigInt(val));
            } catch (...) {
                throw RuntimeFault("bad input value '" + val + "'");
            }
        }
    }
    return out;
}

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double ms() const {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
            .count();
    }
};

json witness_json(const std::vector<std::pair<std::string, StoredLabel>>& w) {
    json arr = json::array();
    for (const auto& [path, sl] : w) arr.push_back({{"variable", path}, {"label", to_string(sl)}});
    return arr;
}

void emit_report(bool as_json, const json& report, const std::string& human) {
    if (as_json)
        std::cout << report.dump(2) << "\n";
    else
        std::cout << human;
}

int cmd_run(const std::string& path, const std::vector<std::string>& in, bool as_json) {
    Timer t;
    auto program = parse(slurp(path));
    auto inputs = parse_inputs(in);
    std::vector<Rule> trace;
    FinalState fs = run_concrete(*program, inputs, limits_from_env(), &trace);
    std::ostringstream human;
    json out_values = json::array();
    for (const Value& v : fs.output) {
        human << v.show() << "\n";
        out_values.push_back(v.show());
    }
    json vars;
    for (const auto& [k, v] : fs.vars) vars[k] = v.show();
    json report = {{"command", "run"},
                   {"program", path},
                   {"output", out_values},
                   {"final", vars},
                   {"stats", {{"steps", trace.size()}, {"wall_ms", t.ms()}}}};
    emit_report(as_json, report, human.str());
    return kExitOk;
}

int cmd_trace(const std::string& path, const std::vector<std::string>& in, bool steps,
              bool as_json) {
    Timer t;
    auto program = parse(slurp(path));
    NIPolicy policy = extract_policy(*program);
    auto inputs = parse_inputs(in);
    std::vector<ExtTraceEntry> trace;
    auto [fs, verdict] = run_extended(*program, policy, inputs, limits_from_env(), &trace);

    std::ostringstream human;
    if (steps) {
        for (size_t i = 0; i < trace.size(); i++)
            human << i << " " << rule_name(trace[i].rule) << " CL=" << to_string(trace[i].cl)
                  << "\n";
    }
    human << "verdict: " << (verdict.pass ? "PASS" : "FAIL") << "\n";
    for (const auto& [p, sl] : verdict.witness)
        human << "  " << p << " : " << to_string(sl) << "\n";
    std::vector<std::string> warnings;
    for (size_t i = 0; i < fs.output.size(); i++)
        if (fs.output[i].label == Label::High)
            warnings.push_back("println argument labeled High at output[" + std::to_string(i) +
                               "]");
    for (const auto& w : warnings) human << "warning: " << w << "\n";

    json report = {{"command", "trace"},
                   {"program", path},
                   {"verdict", verdict.pass ? "pass" : "fail"},
                   {"witness", witness_json(verdict.witness)},
                   {"diagnostics", warnings},
                   {"stats", {{"steps", trace.size()}, {"wall_ms", t.ms()}}}};
    if (steps) {
        json lines = json::array();
        for (size_t i = 0; i < trace.size(); i++)
            lines.push_back(std::to_string(i) + " " + rule_name(trace[i].rule) +
                            " CL=" + to_string(trace[i].cl));
        report["trace"] = lines;
    }
    emit_report(as_json, report, human.str());
    return verdict.pass ? kExitOk : kExitViolation;
}

int cmd_analyze(const std::string& path, const std::string& cert_path, const std::string& kind_s,
                bool serial, bool as_json) {
    Timer t;
    auto program = parse(slurp(path));
    NIPolicy policy = extract_policy(*program);
    ExploreOptions opts;
    opts.parallel = !serial;
    ExploreResult res = explore(*program, policy, opts);

    std::string cert_note;
    if (!cert_path.empty()) {
        CertKind kind = CertKind::Full;
        if (!cert_kind_from_string(kind_s, kind)) throw RuntimeFault("unknown certificate kind");
        std::ofstream f(cert_path, std::ios::binary);
        if (!f) throw RuntimeFault("cannot write certificate '" + cert_path + "'");
        f << emit_certificate(res.graph, kind, program_hash(*program), policy_hash(policy));
        cert_note = "certificate written: " + cert_path + " (" + to_string(kind) + ")\n";
    }

    std::ostringstream human;
    human << "verdict: " << (res.verdict.pass ? "PASS" : "FAIL") << "\n";
    for (const auto& [p, sl] : res.verdict.witness)
        human << "  " << p << " : " << to_string(sl) << "\n";
    std::vector<std::string> warnings;
    for (Label l : res.print_labels)
        if (l == Label::High) {
            warnings.push_back("println may reveal High data");
            break;
        }
    for (const auto& w : warnings) human << "warning: " << w << "\n";
    human << "states explored: " << res.graph.nodes.size() << "\n" << cert_note;

    json report = {{"command", "analyze"},
                   {"program", path},
                   {"verdict", res.verdict.pass ? "pass" : "fail"},
                   {"witness", witness_json(res.verdict.witness)},
                   {"diagnostics", warnings},
                   {"stats",
                    {{"states", res.graph.nodes.size()},
                     {"edges", res.graph.edges.size()},
                     {"finals", res.graph.finals.size()},
                     {"wall_ms", t.ms()}}}};
    if (!cert_path.empty()) report["certificate"] = cert_path;
    emit_report(as_json, report, human.str());
    return res.verdict.pass ? kExitOk : kExitViolation;
}

int cmd_check(const std::string& path, const std::string& cert_path, bool as_json) {
    Timer t;
    auto program = parse(slurp(path));
    NIPolicy policy = extract_policy(*program);
    CheckResult res = check_certificate(*program, policy, slurp(cert_path));

    std::ostringstream human;
    if (res.accepted)
        human << "accepted\n";
    else
        human << "rejected: " << res.reason << "\n";
    json report = {{"command", "check"},
                   {"program", path},
                   {"certificate", cert_path},
                   {"verdict", res.accepted ? "accept" : "reject"},
                   {"stats", {{"wall_ms", t.ms()}}}};
    if (!res.accepted) report["reason"] = res.reason;
    emit_report(as_json, report, human.str());
    return res.accepted ? kExitOk : kExitViolation;
}

int cmd_oracle(const std::string& path, const std::string& domain_s, long long cap, bool serial,
               bool as_json) {
    Timer t;
    auto program = parse(slurp(path));
    NIPolicy policy = extract_policy(*program);

    long lo = -2, hi = 3;
    if (!domain_s.empty()) {
        size_t dots = domain_s.find("..");
        if (dots == std::string::npos) throw RuntimeFault("--domain expects lo..hi");
        try {
            lo = std::stol(domain_s.substr(0, dots));
            hi = std::stol(domain_s.substr(dots + 2));
        } catch (...) {
            throw RuntimeFault("--domain expects lo..hi");
        }
    }
    InputDomain domain = InputDomain::int_range(*program, lo, hi);
    OracleOptions opts;
    opts.run_cap = cap;
    opts.parallel = !serial;
    opts.limits = limits_from_env();
    OracleResult res = brute_force_ni(*program, policy, domain, opts);

    std::ostringstream human;
    json report = {{"command", "oracle"},
                   {"program", path},
                   {"verdict", res.interferent ? "interferent" : "non-interferent"},
                   {"stats", {{"runs", res.runs}, {"wall_ms", t.ms()}}}};
    if (res.interferent) {
        const OracleWitness& w = *res.witness;
        human << "interferent (witness):\n  inputs A:";
        json ja, jb;
        for (const auto& [k, v] : w.inputs_a) {
            human << " " << k << "=" << v.show();
            ja[k] = v.show();
        }
        human << "\n  inputs B:";
        for (const auto& [k, v] : w.inputs_b) {
            human << " " << k << "=" << v.show();
            jb[k] = v.show();
        }
        human << "\n  differs: " << w.variable << "\n";
        report["witness"] = {{"inputs_a", ja}, {"inputs_b", jb}, {"variable", w.variable}};
    } else {
        human << "non-interferent (" << res.runs << " runs)\n";
    }
    emit_report(as_json, report, human.str());
    return res.interferent ? kExitViolation : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"nicert: non-interference certifier for a small Java-like language"};
    app.require_subcommand(1);

    std::string path, cert_path, kind = "full", domain;
    std::vector<std::string> inputs;
    bool as_json = false, steps = false, serial = false;
    long long cap = 100000;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("file", path, "program file (.njava)")->required();
        sub->add_flag("--json", as_json, "machine-readable report");
    };

    CLI::App* run = app.add_subcommand("run", "execute under the standard semantics");
    add_common(run);
    run->add_option("--in", inputs, "input binding name=value");

    CLI::App* trace = app.add_subcommand("trace", "execute under the labeled semantics");
    add_common(trace);
    trace->add_option("--in", inputs, "input binding name=value");
    trace->add_flag("--steps", steps, "dump one line per step");

    CLI::App* analyze = app.add_subcommand("analyze", "label-only abstract exploration");
    add_common(analyze);
    analyze->add_option("--cert", cert_path, "write a certificate here");
    analyze->add_option("--kind", kind, "certificate kind: full|rules|labels");
    analyze->add_flag("--serial", serial, "disable parallel frontier expansion");

    CLI::App* check = app.add_subcommand("check", "validate a certificate");
    check->add_option("file", path, "program file (.njava)")->required();
    check->add_option("cert", cert_path, "certificate file (.nicert)")->required();
    check->add_flag("--json", as_json, "machine-readable report");

    CLI::App* oracle = app.add_subcommand("oracle", "exhaustive finite-domain check");
    add_common(oracle);
    oracle->add_option("--domain", domain, "integer input range lo..hi (default -2..3)");
    oracle->add_option("--cap", cap, "maximum number of runs");
    oracle->add_flag("--serial", serial, "disable parallel runs");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitError;
    }

    try {
        if (run->parsed()) return cmd_run(path, inputs, as_json);
        if (trace->parsed()) return cmd_trace(path, inputs, steps, as_json);
        if (analyze->parsed()) return cmd_analyze(path, cert_path, kind, serial, as_json);
        if (check->parsed()) return cmd_check(path, cert_path, as_json);
        if (oracle->parsed()) return cmd_oracle(path, domain, cap, serial, as_json);
    } catch (const std::exception& e) {
        if (as_json) {
            std::cout << json{{"error", e.what()}}.dump(2) << "\n";
        } else {
            std::cerr << "error: " << e.what() << "\n";
        }
        return kExitError;
    }
    return kExitError;
}
