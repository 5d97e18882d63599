#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "nicert/concrete.hpp"
#include "nicert/parser.hpp"
#include "nicert/policy.hpp"
#include "support/direct_eval.hpp"
#include "support/progen.hpp"
#include "support/testutil.hpp"

using namespace nicert;
using namespace nicert::testing;

namespace {

std::map<std::string, Value> one_int(const std::string& name, long v) {
    return {{name, Value::of_int(v)}};
}

bool states_equal(const FinalState& a, const FinalState& b) {
    if (a.vars.size() != b.vars.size() || a.output.size() != b.output.size()) return false;
    for (const auto& [k, v] : a.vars) {
        auto it = b.vars.find(k);
        if (it == b.vars.end() || !(v == it->second)) return false;
    }
    for (size_t i = 0; i < a.output.size(); i++)
        if (!(a.output[i] == b.output[i])) return false;
    return true;
}

}  // namespace

TEST_CASE("greater-than resolves through the continuation") {
    auto p = parse("class A { public static void main(int h) { println(5 > 3); } }");
    FinalState fs = run_concrete(*p, one_int("h", 0));
    REQUIRE(fs.output.size() == 1);
    CHECK(fs.output[0] == Value::of_bool(true));
}

TEST_CASE("account program prints false below the threshold and true at it") {
    auto p = parse_corpus("bank_account");
    FinalState lo = run_concrete(*p, one_int("initbalance", 5000));
    REQUIRE(lo.output.size() == 1);
    CHECK(lo.output[0] == Value::of_bool(false));
    FinalState hi = run_concrete(*p, one_int("initbalance", 10000));
    REQUIRE(hi.output.size() == 1);
    CHECK(hi.output[0] == Value::of_bool(true));
}

TEST_CASE("loop program copies the secret counter") {
    auto p = parse_corpus("loop_copy");
    FinalState fs = run_concrete(*p, one_int("h", 2));
    CHECK(fs.vars.at("Testclass.low") == Value::of_int(2));
    CHECK(fs.vars.at("Testclass.high") == Value::of_int(0));
    // cross-checked against the direct recursive evaluator
    CHECK(states_equal(fs, direct_run(*p, one_int("h", 2))));
}

TEST_CASE("break leaves the loop with the loop stack popped") {
    auto p = parse_corpus("loop_break");
    FinalState fs = run_concrete(*p, one_int("h", 3));
    CHECK(fs.vars.at("Testclass.low") == Value::of_int(3));
    CHECK(fs.vars.at("Testclass.high") == Value::of_int(0));
}

TEST_CASE("continue skips the rest of the body") {
    auto p = parse_corpus("continue_loop");
    CHECK(run_concrete(*p, one_int("h", 0)).vars.at("Skip.low") == Value::of_int(3));
    CHECK(run_concrete(*p, one_int("h", 2)).vars.at("Skip.low") == Value::of_int(0));
}

TEST_CASE("corpus agrees with the direct evaluator") {
    for (const char* name : kCorpus) {
        CAPTURE(name);
        auto p = parse_corpus(name);
        auto [lo, hi] = corpus_domain(name);
        for (long v = lo; v <= hi; v++) {
            std::map<std::string, Value> in;
            for (const auto& prm : p->inputs()) in[prm.name] = Value::of_int(v);
            FinalState a = run_concrete(*p, in);
            FinalState b = direct_run(*p, in);
            CAPTURE(v);
            CHECK(states_equal(a, b));
        }
    }
}

TEST_CASE("randomized differential test against the direct evaluator") {
    std::mt19937 rng(20240811);
    for (int i = 0; i < 150; i++) {
        std::string src = generate_program(rng);
        CAPTURE(src);
        auto p = parse(src);
        for (long h = -2; h <= 3; h += 2) {
            std::map<std::string, Value> in;
            for (const auto& prm : p->inputs()) in[prm.name] = Value::of_int(h);
            FinalState a = run_concrete(*p, in);
            FinalState b = direct_run(*p, in);
            CHECK(states_equal(a, b));
        }
    }
}

TEST_CASE("stepping is deterministic") {
    auto p = parse_corpus("method_calls");
    std::vector<Rule> t1, t2;
    run_concrete(*p, one_int("h", 1), {}, &t1);
    run_concrete(*p, one_int("h", 1), {}, &t2);
    CHECK(t1 == t2);
    CHECK(!t1.empty());
}

TEST_CASE("loop stack balances across loop exits") {
    auto p = parse("class A { static int x = 0; public static void main(int h) {"
                   "int t = 3; while (t > 0) { t--; int u = 2;"
                   "while (u > 0) { u--; if (u == 1) break; } } x = 1; } }");
    ConcreteConfig cfg = boot_concrete(*p);
    while (!cfg.final()) step_concrete(cfg);
    enter_main(cfg, one_int("h", 0));
    size_t max_depth = 0;
    while (!cfg.final()) {
        step_concrete(cfg);
        max_depth = std::max(max_depth, cfg.lstack.size());
    }
    CHECK(max_depth == 2);
    CHECK(cfg.lstack.empty());
    CHECK(cfg.fstack.empty());
}

TEST_CASE("return from inside a callee loop unwinds cleanly") {
    auto p = parse("class A { static int out = 0;"
                   "static int firstK(int n) {"
                   "  int i = 0;"
                   "  while (true) { if (i * i >= n) return i; i++; } }"
                   "public static void main(int h) { out = firstK(h); } }");
    FinalState fs = run_concrete(*p, one_int("h", 10));
    CHECK(fs.vars.at("A.out") == Value::of_int(4));
    CHECK(states_equal(fs, direct_run(*p, one_int("h", 10))));
}

TEST_CASE("a bare break as the loop body") {
    auto p = parse("class A { static int x = 0; public static void main(int h) {"
                   "while (h > 0) break; x = 9; } }");
    FinalState fs = run_concrete(*p, one_int("h", 5));
    CHECK(fs.vars.at("A.x") == Value::of_int(9));
    CHECK(states_equal(fs, direct_run(*p, one_int("h", 5))));
}

TEST_CASE("aliased objects share their fields") {
    auto p = parse("class Box { int v = 0; }"
                   "class A { static Box a = new Box(); static Box b = new Box();"
                   "public static void main(int h) { b = a; b.v = 7; println(a.v); } }");
    FinalState fs = run_concrete(*p, one_int("h", 0));
    CHECK(fs.output[0] == Value::of_int(7));
    CHECK(fs.vars.at("A.a.v") == Value::of_int(7));
    CHECK(fs.vars.at("A.b.v") == Value::of_int(7));
}

TEST_CASE("arbitrary precision arithmetic") {
    auto p = parse("class A { static int x = 0; public static void main(int h) {"
                   "x = h * h * h * h * h; } }");
    FinalState fs = run_concrete(*p, one_int("h", 100000));
    CHECK(fs.vars.at("A.x") == Value::of_int(BigInt("10000000000000000000000000")));
}

TEST_CASE("runtime faults") {
    auto p = parse("class A { static int x = 0; public static void main(int h) {"
                   "x = 1 / h; } }");
    CHECK_THROWS_AS(run_concrete(*p, one_int("h", 0)), RuntimeFault);
    CHECK(run_concrete(*p, one_int("h", 2)).vars.at("A.x") == Value::of_int(0));

    // field initializer reading a later, still-uninitialized field
    auto q = parse("class B { int a = b + 1; int b = 5; }"
                   "class A { public static void main(int h) { B x = new B(); } }");
    CHECK_THROWS_AS(run_concrete(*q, one_int("h", 0)), RuntimeFault);
}

TEST_CASE("step limit turns divergence into an error") {
    auto p = parse_corpus("loop_break");  // diverges for h <= 0
    RunLimits limits;
    limits.step_limit = 5000;
    CHECK_THROWS_AS(run_concrete(*p, one_int("h", 0), limits), StepLimitExceeded);
}

TEST_CASE("input validation") {
    auto p = parse_corpus("loop_copy");
    CHECK_THROWS_AS(run_concrete(*p, {}), RuntimeFault);
    CHECK_THROWS_AS(run_concrete(*p, {{"wrong", Value::of_int(1)}}), RuntimeFault);
    CHECK_THROWS_AS(run_concrete(*p, {{"h", Value::of_bool(true)}}), RuntimeFault);
}

TEST_CASE("low_equal compares Low variables and output") {
    auto p = parse_corpus("loop_copy");
    NIPolicy pol = extract_policy(*p);
    FinalState a = run_concrete(*p, one_int("h", 1));
    FinalState b = run_concrete(*p, one_int("h", 1));
    CHECK(low_equal(a, b, pol));

    // differ only in the High variable: craft via branch_temporary
    auto q = parse_corpus("branch_temporary");
    NIPolicy qpol = extract_policy(*q);
    FinalState qa = run_concrete(*q, one_int("h", 0));
    FinalState qb = run_concrete(*q, one_int("h", 5));
    CHECK(qa.vars.at("Testclass.high") != qb.vars.at("Testclass.high"));
    CHECK(low_equal(qa, qb, qpol));

    // differ in a Low variable
    FinalState la = run_concrete(*p, one_int("h", 1));
    FinalState lb = run_concrete(*p, one_int("h", 2));
    CHECK_FALSE(low_equal(la, lb, pol));
}

TEST_CASE("initial states expose statics and inputs") {
    auto p = parse_corpus("loop_copy");
    FinalState st = initial_state(*p, one_int("h", 7));
    CHECK(st.vars.at("Testclass.low") == Value::of_int(0));
    CHECK(st.vars.at("h") == Value::of_int(7));
    CHECK(st.output.empty());
}
