#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>
#include <random>
#include <set>

#include "nicert/abstract.hpp"
#include "nicert/extended.hpp"
#include "nicert/parser.hpp"
#include "nicert/policy.hpp"
#include "support/progen.hpp"
#include "support/testutil.hpp"

using namespace nicert;
using namespace nicert::testing;

namespace {

const std::map<std::string, bool> kExpectedPass = {
    {"bank_account", false},  {"loop_copy", false},    {"branch_temporary", true},
    {"loop_break", false},    {"assign_cancel", false}, {"return_branch", false},
    {"shielded_break", true}, {"continue_loop", false}, {"straight_line", true},
    {"method_calls", true},
};

std::map<std::string, Value> all_int(const Program& p, long v) {
    std::map<std::string, Value> in;
    for (const auto& prm : p.inputs()) in[prm.name] = Value::of_int(v);
    return in;
}

}  // namespace

TEST_CASE("golden corpus verdicts") {
    for (const auto& [name, expect_pass] : kExpectedPass) {
        CAPTURE(name);
        auto p = parse_corpus(name);
        NIPolicy pol = extract_policy(*p);
        ExploreResult res = explore(*p, pol);
        CHECK(res.verdict.pass == expect_pass);
    }
}

TEST_CASE("account witness names the public field with the change label") {
    auto p = parse_corpus("bank_account");
    NIPolicy pol = extract_policy(*p);
    ExploreResult res = explore(*p, pol);
    REQUIRE(res.verdict.witness.size() == 1);
    CHECK(res.verdict.witness[0].first == "Bank.a.extraService");
    CHECK(to_string(res.verdict.witness[0].second) == "Low >> High");
}

TEST_CASE("repeated explorations are byte-identical, parallel or not") {
    for (const char* name : {"bank_account", "loop_break", "method_calls"}) {
        CAPTURE(name);
        auto p = parse_corpus(name);
        NIPolicy pol = extract_policy(*p);
        std::string a = explore(*p, pol).graph.serialize();
        std::string b = explore(*p, pol).graph.serialize();
        std::string c = explore_serial(*p, pol).graph.serialize();
        CHECK(a == b);
        CHECK(a == c);
    }
}

TEST_CASE("every conditional node has exactly two successors") {
    for (const char* name : kCorpus) {
        CAPTURE(name);
        auto p = parse_corpus(name);
        NIPolicy pol = extract_policy(*p);
        ExploreResult res = explore(*p, pol);
        std::map<int, std::vector<Rule>> out;
        for (const auto& [src, rule, dst] : res.graph.edges) out[src].push_back(rule);
        for (const auto& [src, rules] : out) {
            bool branching = false;
            for (Rule r : rules) branching |= is_branch_rule(r);
            if (branching) {
                REQUIRE(rules.size() == 2);
                CHECK(rules[0] == Rule::BranchThen);
                CHECK(rules[1] == Rule::BranchElse);
            } else {
                CHECK(rules.size() == 1);
            }
        }
    }
}

TEST_CASE("lift stamps policy labels over the initial store") {
    auto p = parse_corpus("bank_account");
    NIPolicy pol = extract_policy(*p);
    AbsConfig init = lift(*p, pol);
    auto labels = project_store(init);
    CHECK(labels.at("Bank.a.balance") == StoredLabel::High);
    CHECK(labels.at("Bank.a.extraService") == StoredLabel::Low);
}

TEST_CASE("all-Low program lifts to an all-Low store") {
    auto p = parse("class A { static int x = 1, y = 2;"
                   "public static void main(int a) { x = a; } }");
    NIPolicy pol = extract_policy(*p);
    auto labels = project_store(lift(*p, pol));
    for (const auto& [path, sl] : labels) {
        CAPTURE(path);
        CHECK(sl == StoredLabel::Low);
    }
}

TEST_CASE("lift agrees with the label projection of the extended initial state") {
    for (const char* name : kCorpus) {
        CAPTURE(name);
        auto p = parse_corpus(name);
        NIPolicy pol = extract_policy(*p);
        AbsConfig init = lift(*p, pol);
        auto abstract_labels = project_store(init);

        ExtConfig ec = boot_extended(*p);
        while (!ec.final()) step_extended(ec);
        stamp_labels(ec, pol);
        enter_main_extended(ec, pol, all_int(*p, 1));
        std::map<std::string, StoredLabel> ext_labels;
        for (const auto& [path, cell] : project_vars_extended(ec)) ext_labels[path] = cell.sl;
        CHECK(abstract_labels == ext_labels);
    }
}

TEST_CASE("successor shapes") {
    auto p = parse("class A { static int low = 0; //@ setLabel(h, High);\n"
                   "public static void main(int h) { if (h > 0) { low = 1; } else { low = 2; } } }");
    NIPolicy pol = extract_policy(*p);
    ExploreResult res = explore(*p, pol);

    // find the branch node and check both successors raise the context
    bool found = false;
    std::map<int, std::vector<std::pair<Rule, int>>> out;
    for (const auto& [src, rule, dst] : res.graph.edges) out[src].push_back({rule, dst});
    for (const auto& [src, succ] : out) {
        if (succ.size() == 2) {
            found = true;
            AbsConfig branch_state = parse_config(res.graph.nodes[src], *p);
            std::vector<AbsSucc> computed = abstract_successors(branch_state);
            REQUIRE(computed.size() == 2);
            CHECK(computed[0].rule == Rule::BranchThen);
            CHECK(computed[1].rule == Rule::BranchElse);
            for (const auto& s : computed) CHECK(s.cfg.cl == Label::High);
        }
    }
    CHECK(found);

    // final states have no successors
    for (int f : res.graph.finals) {
        AbsConfig fin = parse_config(res.graph.nodes[f], *p);
        CHECK(abstract_successors(fin).empty());
    }

    // deterministic steps are singletons
    AbsConfig init = lift(*p, pol);
    std::vector<AbsSucc> first = abstract_successors(init);
    REQUIRE(first.size() == 1);
}

TEST_CASE("codec round-trips every node of every corpus graph") {
    for (const char* name : kCorpus) {
        CAPTURE(name);
        auto p = parse_corpus(name);
        NIPolicy pol = extract_policy(*p);
        ExploreResult res = explore(*p, pol);
        for (const std::string& node : res.graph.nodes) {
            AbsConfig cfg = parse_config(node, *p);
            CHECK(serialize_config(cfg) == node);
        }
    }
}

TEST_CASE("canonicalization drops unreachable locations") {
    // a loop-local declaration allocates per iteration; canonical states
    // must stay bounded
    auto p = parse("class A { static int low = 0; //@ setLabel(h, High);\n"
                   "public static void main(int h) {"
                   "int t = 3; while (t > 0) { t = t - 1; int fresh = h; low = low + fresh; } } }");
    NIPolicy pol = extract_policy(*p);
    ExploreOptions opts;
    opts.state_budget = 5000;
    ExploreResult res = explore(*p, pol, opts);
    CHECK(res.graph.nodes.size() < 600);
}

TEST_CASE("extended final labels are contained in the abstract finals") {
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
        }
    }
}

TEST_CASE("print diagnostics surface from the abstract run") {
    auto p = parse("class A { //@ setLabel(h, High);\n"
                   "public static void main(int h) { println(h); } }");
    NIPolicy pol = extract_policy(*p);
    ExploreResult res = explore(*p, pol);
    CHECK(res.verdict.pass);
    REQUIRE(res.print_labels.size() == 1);
    CHECK(res.print_labels[0] == Label::High);
}

TEST_CASE("state budget trips on demand") {
    auto p = parse_corpus("continue_loop");
    NIPolicy pol = extract_policy(*p);
    ExploreOptions opts;
    opts.state_budget = 10;
    CHECK_THROWS_AS(explore(*p, pol, opts), RuntimeFault);
}

TEST_CASE("branching inside static initialization is rejected") {
    auto p = parse("class A { static int x = 0; static int f() { if (x > 0) return 1; return 2; }"
                   "static int y = f();"
                   "public static void main(int h) { x = y; } }");
    NIPolicy pol = extract_policy(*p);
    CHECK_THROWS_AS(lift(*p, pol), RuntimeFault);
}

TEST_CASE("random programs explore deterministically within budget") {
    std::mt19937 rng(4242);
    for (int i = 0; i < 40; i++) {
        std::string src = generate_program(rng);
        CAPTURE(src);
        auto p = parse(src);
        NIPolicy pol = extract_policy(*p);
        ExploreResult a = explore(*p, pol);
        ExploreResult b = explore_serial(*p, pol);
        CHECK(a.graph.serialize() == b.graph.serialize());
        CHECK(a.verdict.pass == b.verdict.pass);
    }
}

TEST_CASE("containment holds on random programs with method calls") {
    std::mt19937 rng(60221023);
    GenOptions opts;
    opts.with_calls = true;
    for (int i = 0; i < 30; i++) {
        std::string src = generate_program(rng, opts);
        CAPTURE(src);
        auto p = parse(src);
        NIPolicy pol = extract_policy(*p);
        ExploreResult res = explore(*p, pol);
        CHECK(explore_serial(*p, pol).graph.serialize() == res.graph.serialize());
        std::vector<std::map<std::string, StoredLabel>> final_stores;
        for (int f : res.graph.finals)
            final_stores.push_back(project_store(parse_config(res.graph.nodes[f], *p)));
        for (long v = -2; v <= 3; v++) {
            auto [st, verdict] = run_extended(*p, pol, all_int(*p, v));
            std::map<std::string, StoredLabel> ext;
            for (const auto& [path, cell] : st.vars) ext[path] = cell.sl;
            bool contained = false;
            for (const auto& fs : final_stores) contained |= fs == ext;
            CAPTURE(v);
            CHECK(contained);
        }
    }
}
