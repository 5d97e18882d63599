// Acceptance suite: one test case per release criterion, each printing a
// single PASS/FAIL line. Run via ctest or directly.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <chrono>
#include <cstdio>
#include <random>

#include "nicert/abstract.hpp"
#include "nicert/certificate.hpp"
#include "nicert/concrete.hpp"
#include "nicert/extended.hpp"
#include "nicert/oracle.hpp"
#include "nicert/parser.hpp"
#include "nicert/policy.hpp"
#include "support/progen.hpp"
#include "support/testutil.hpp"

using namespace nicert;
using namespace nicert::testing;

namespace {

struct Criterion {
    const char* id;
    const char* text;
    bool ok = true;
    ~Criterion() { std::printf("[%-4s] %s - %s\n", ok ? "PASS" : "FAIL", id, text); }
    void require(bool cond) { ok = ok && cond; }
};

std::map<std::string, Value> all_int(const Program& p, long v) {
    std::map<std::string, Value> in;
    for (const auto& prm : p.inputs()) in[prm.name] = Value::of_int(v);
    return in;
}

double ms_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
        .count();
}

// Shared random corpus for criteria 4, 5 and 10.
struct RandomCase {
    std::string source;
    std::unique_ptr<Program> program;
    NIPolicy policy;
};

const std::vector<RandomCase>& random_corpus() {
    static std::vector<RandomCase> corpus = [] {
        std::vector<RandomCase> out;
        std::mt19937 rng(1209);
        GenOptions opts;  // <= 3 statics, <= 2 conditionals/loops
        for (int i = 0; i < 220; i++) {
            RandomCase rc;
            rc.source = generate_program(rng, opts);
            rc.program = parse(rc.source);
            rc.policy = extract_policy(*rc.program);
            out.push_back(std::move(rc));
        }
        return out;
    }();
    return corpus;
}

// All input assignments over {-2..3} for the declared inputs.
std::vector<std::map<std::string, Value>> input_grid(const Program& p) {
    std::vector<std::map<std::string, Value>> grid{{}};
    for (const auto& prm : p.inputs()) {
        std::vector<std::map<std::string, Value>> next;
        for (const auto& base : grid) {
            for (long v = -2; v <= 3; v++) {
                auto in = base;
                in[prm.name] = Value::of_int(v);
                next.push_back(std::move(in));
            }
        }
        grid = std::move(next);
    }
    return grid;
}

}  // namespace

TEST_CASE("criterion 1: golden verdicts on the example corpus") {
    Criterion c{"C1", "golden analyze verdicts, witness rendering, < 1 s each"};
    const std::pair<const char*, bool> expected[] = {
        {"bank_account", false}, {"loop_copy", false},  {"branch_temporary", true},
        {"loop_break", false},   {"assign_cancel", false},
    };
    for (const auto& [name, pass] : expected) {
        CAPTURE(name);
        auto p = parse_corpus(name);
        NIPolicy pol = extract_policy(*p);
        auto t0 = std::chrono::steady_clock::now();
        ExploreResult res = explore(*p, pol);
        double elapsed = ms_since(t0);
        CHECK(res.verdict.pass == pass);
        CHECK(elapsed < 1000.0);
        c.require(res.verdict.pass == pass && elapsed < 1000.0);
        if (std::string(name) == "bank_account") {
            REQUIRE(res.verdict.witness.size() == 1);
            bool w = res.verdict.witness[0].first == "Bank.a.extraService" &&
                     to_string(res.verdict.witness[0].second) == "Low >> High";
            CHECK(w);
            c.require(w);
        }
    }
}

TEST_CASE("criterion 2: concrete fidelity of the account program") {
    Criterion c{"C2", "account program prints false for 5000 and true for 10000"};
    auto p = parse_corpus("bank_account");
    FinalState lo = run_concrete(*p, {{"initbalance", Value::of_int(5000)}});
    FinalState hi = run_concrete(*p, {{"initbalance", Value::of_int(10000)}});
    bool ok = lo.output.size() == 1 && lo.output[0] == Value::of_bool(false) &&
              hi.output.size() == 1 && hi.output[0] == Value::of_bool(true);
    CHECK(ok);
    c.require(ok);
}

TEST_CASE("criterion 3: label algebra matches the tables exhaustively") {
    Criterion c{"C3", "all 8 update pairs and all 4 join pairs, exact"};
    bool ok = join(Label::Low, Label::Low) == Label::Low &&
              join(Label::Low, Label::High) == Label::High &&
              join(Label::High, Label::Low) == Label::High &&
              join(Label::High, Label::High) == Label::High;
    ok = ok && update(StoredLabel::Low, Label::Low) == StoredLabel::Low &&
         update(StoredLabel::Low, Label::High) == StoredLabel::LowToHigh &&
         update(StoredLabel::High, Label::Low) == StoredLabel::HighToLow &&
         update(StoredLabel::High, Label::High) == StoredLabel::High &&
         update(StoredLabel::LowToHigh, Label::Low) == StoredLabel::Low &&
         update(StoredLabel::LowToHigh, Label::High) == StoredLabel::LowToHigh &&
         update(StoredLabel::HighToLow, Label::High) == StoredLabel::High &&
         update(StoredLabel::HighToLow, Label::Low) == StoredLabel::HighToLow;
    CHECK(ok);
    c.require(ok);
}

TEST_CASE("criterion 4: every concrete Low divergence is flagged by a change label") {
    Criterion c{"C4", ">= 200 random programs, Low divergence implies Low >> High, < 5 min"};
    auto t0 = std::chrono::steady_clock::now();
    long long checked_pairs = 0;
    for (const RandomCase& rc : random_corpus()) {
        CAPTURE(rc.source);
        const Program& p = *rc.program;
        auto grid = input_grid(p);

        std::vector<FinalState> concrete(grid.size());
        std::vector<std::map<std::string, StoredLabel>> labels(grid.size());
        for (size_t i = 0; i < grid.size(); i++) {
            concrete[i] = run_concrete(p, grid[i]);
            auto [st, verdict] = run_extended(p, rc.policy, grid[i]);
            for (const auto& [path, cell] : st.vars) labels[i][path] = cell.sl;
        }
        for (size_t i = 0; i < grid.size(); i++) {
            for (size_t j = i + 1; j < grid.size(); j++) {
                // Low-equal initial states: Low inputs must agree
                bool low_equal_inputs = true;
                for (const auto& [name, v] : grid[i])
                    if (rc.policy.label_of(name) == Label::Low &&
                        !(v == grid[j].at(name)))
                        low_equal_inputs = false;
                if (!low_equal_inputs) continue;
                checked_pairs++;
                for (const auto& [path, va] : concrete[i].vars) {
                    if (rc.policy.label_of(path) != Label::Low) continue;
                    if (va == concrete[j].vars.at(path)) continue;
                    // divergence: one of the two extended runs must mark it
                    bool flagged = labels[i][path] == StoredLabel::LowToHigh ||
                                   labels[j][path] == StoredLabel::LowToHigh;
                    CHECK(flagged);
                    c.require(flagged);
                }
            }
        }
    }
    double elapsed = ms_since(t0);
    CHECK(random_corpus().size() >= 200);
    CHECK(checked_pairs > 0);
    CHECK(elapsed < 300000.0);
    c.require(random_corpus().size() >= 200 && checked_pairs > 0 && elapsed < 300000.0);
}

TEST_CASE("criterion 5: abstract pass is never contradicted by the oracle") {
    Criterion c{"C5", "no random program with abstract PASS is found interferent"};
    OracleOptions opts;
    opts.run_cap = 200000;
    for (const RandomCase& rc : random_corpus()) {
        CAPTURE(rc.source);
        ExploreResult res = explore(*rc.program, rc.policy);
        if (!res.verdict.pass) continue;
        InputDomain d = InputDomain::int_range(*rc.program, -2, 3);
        OracleResult oracle = brute_force_ni(*rc.program, rc.policy, d, opts);
        CHECK_FALSE(oracle.interferent);
        c.require(!oracle.interferent);

        // per-trace corollary: if every extended run passes, so must the oracle
        bool all_traces_pass = true;
        for (const auto& in : input_grid(*rc.program))
            all_traces_pass = all_traces_pass && run_extended(*rc.program, rc.policy, in).second.pass;
        if (all_traces_pass) {
            CHECK_FALSE(oracle.interferent);
            c.require(!oracle.interferent);
        }
    }
}

TEST_CASE("criterion 6: extended finals are contained in the abstract finals") {
    Criterion c{"C6", "label projection of every extended run appears among abstract finals"};
    for (const char* name : kCorpus) {
        CAPTURE(name);
        auto p = parse_corpus(name);
        NIPolicy pol = extract_policy(*p);
        ExploreResult res = explore(*p, pol);
        std::vector<std::map<std::string, StoredLabel>> final_stores;
        for (int f : res.graph.finals)
            final_stores.push_back(project_store(parse_config(res.graph.nodes[f], *p)));
        auto [lo, hi] = corpus_domain(name);
        for (long v = lo; v <= hi; v++) {
            auto [st, verdict] = run_extended(*p, pol, all_int(*p, v));
            std::map<std::string, StoredLabel> ext;
            for (const auto& [path, cell] : st.vars) ext[path] = cell.sl;
            bool contained = false;
            for (const auto& fs : final_stores) contained |= fs == ext;
            CAPTURE(v);
            CHECK(contained);
            c.require(contained);
        }
    }
}

TEST_CASE("criterion 7: the self-cancelling program is the documented false positive") {
    Criterion c{"C7", "analyze/trace report FAIL while the oracle finds no interference"};
    auto p = parse_corpus("assign_cancel");
    NIPolicy pol = extract_policy(*p);
    ExploreResult res = explore(*p, pol);
    CHECK_FALSE(res.verdict.pass);
    c.require(!res.verdict.pass);
    for (long v = 0; v <= 3; v++) {
        auto [st, verdict] = run_extended(*p, pol, all_int(*p, v));
        CHECK_FALSE(verdict.pass);
        c.require(!verdict.pass);
    }
    OracleResult oracle = brute_force_ni(*p, pol, InputDomain::int_range(*p, 0, 3));
    CHECK_FALSE(oracle.interferent);
    c.require(!oracle.interferent);
}

TEST_CASE("criterion 8: certificate round trips, sizes, and tamper rejection") {
    Criterion c{"C8", "round trip accepts; 1000 mutations/cert rejected; size ordering"};
    std::mt19937 rng(20110217);

    auto mutate = [&](const std::string& text) {
        std::vector<std::pair<size_t, size_t>> tokens;
        size_t i = 0;
        while (i < text.size()) {
            while (i < text.size() && isspace(static_cast<unsigned char>(text[i]))) i++;
            size_t start = i;
            while (i < text.size() && !isspace(static_cast<unsigned char>(text[i]))) i++;
            if (i > start) tokens.push_back({start, i - start});
        }
        for (int attempt = 0; attempt < 100; attempt++) {
            auto [start, len] = tokens[rng() % tokens.size()];
            std::string out = text;
            switch (rng() % 3) {
            case 0: out.erase(start, len); break;
            case 1: {
                size_t pos = start + rng() % len;
                char ch = out[pos];
                out[pos] = ch == '0' ? '1' : ch == 'L' ? 'H' : ch == 'H' ? 'L' : ch + 1;
                break;
            }
            default: out = out.substr(0, start) + "junk" + out.substr(start + len); break;
            }
            if (out != text) return out;
        }
        return text + "x";
    };

    size_t total_full = 0, total_rules = 0;
    for (const char* name : kCorpus) {
        CAPTURE(name);
        auto p = parse_corpus(name);
        NIPolicy pol = extract_policy(*p);
        ExploreResult res = explore(*p, pol);
        std::string ph = program_hash(*p), yh = policy_hash(pol);

        size_t sizes[3];
        int kind_i = 0;
        for (CertKind kind : {CertKind::Full, CertKind::ReducedRules, CertKind::ReducedLabels}) {
            std::string cert = emit_certificate(res.graph, kind, ph, yh);
            sizes[kind_i++] = cert.size();
            CheckResult check = check_certificate(*p, pol, cert);
            if (res.verdict.pass) {
                CHECK(check.accepted);
                c.require(check.accepted);
            } else {
                // sound consumers refuse evidence of a failing exploration
                CHECK_FALSE(check.accepted);
                c.require(!check.accepted);
            }
            int rejected = 0;
            for (int m = 0; m < 1000; m++)
                if (!check_certificate(*p, pol, mutate(cert)).accepted) rejected++;
            CHECK(rejected == 1000);
            c.require(rejected == 1000);
        }
        CHECK(sizes[2] <= sizes[1]);
        CHECK(sizes[1] <= sizes[0]);
        c.require(sizes[2] <= sizes[1] && sizes[1] <= sizes[0]);
        total_full += sizes[0];
        total_rules += sizes[1];
        bool has_branch = false;
        for (const auto& [src, rule, dst] : res.graph.edges) has_branch |= is_branch_rule(rule);
        if (has_branch) {
            CHECK(sizes[1] * 10 < sizes[0]);
            c.require(sizes[1] * 10 < sizes[0]);
        }
    }
    CHECK(total_rules * 10 < total_full);
    c.require(total_rules * 10 < total_full);
}

TEST_CASE("criterion 9: certificates are byte-identical across runs") {
    Criterion c{"C9", "two consecutive explorations serialize identically"};
    for (const char* name : kCorpus) {
        CAPTURE(name);
        auto p = parse_corpus(name);
        NIPolicy pol = extract_policy(*p);
        std::string ph = program_hash(*p), yh = policy_hash(pol);
        std::string a =
            emit_certificate(explore(*p, pol).graph, CertKind::Full, ph, yh);
        std::string b =
            emit_certificate(explore(*p, pol).graph, CertKind::Full, ph, yh);
        std::string s =
            emit_certificate(explore_serial(*p, pol).graph, CertKind::Full, ph, yh);
        CHECK(a == b);
        CHECK(a == s);
        c.require(a == b && a == s);
    }
}

TEST_CASE("criterion 10: exploration terminates within the state budget") {
    Criterion c{"C10", "corpus and random corpus explore without tripping the budget"};
    ExploreOptions opts;
    opts.state_budget = 1000000;
    for (const char* name : kCorpus) {
        CAPTURE(name);
        auto p = parse_corpus(name);
        NIPolicy pol = extract_policy(*p);
        bool ok = true;
        try {
            ExploreResult res = explore(*p, pol, opts);
            ok = static_cast<long long>(res.graph.nodes.size()) < opts.state_budget;
        } catch (const std::exception&) {
            ok = false;
        }
        CHECK(ok);
        c.require(ok);
    }
    for (const RandomCase& rc : random_corpus()) {
        CAPTURE(rc.source);
        bool ok = true;
        try {
            explore(*rc.program, rc.policy, opts);
        } catch (const std::exception&) {
            ok = false;
        }
        CHECK(ok);
        c.require(ok);
    }
}
