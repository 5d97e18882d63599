#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>
#include <regex>

#include "support/testutil.hpp"

using namespace nicert::testing;
using nlohmann::json;

namespace {

std::string bin() { return std::string(NICERT_BINARY); }
std::string quoted(const std::string& s) { return "'" + s + "'"; }

std::string tmp_file(const std::string& name) {
    return std::string("/tmp/nicert_test_") + name;
}

}  // namespace

TEST_CASE("run prints exactly the program output") {
    std::string out;
    int code = run_command(bin() + " run " + quoted(corpus_path("bank_account")) +
                               " --in initbalance=5000",
                           &out);
    CHECK(code == 0);
    CHECK(out == "false\n");
    code = run_command(bin() + " run " + quoted(corpus_path("bank_account")) +
                           " --in initbalance=10000",
                       &out);
    CHECK(code == 0);
    CHECK(out == "true\n");
}

TEST_CASE("analyze exit codes and witness rendering") {
    std::string out;
    int code = run_command(bin() + " analyze " + quoted(corpus_path("bank_account")), &out);
    CHECK(code == 1);
    CHECK(out.find("verdict: FAIL") != std::string::npos);
    CHECK(out.find("Bank.a.extraService : Low >> High") != std::string::npos);

    code = run_command(bin() + " analyze " + quoted(corpus_path("branch_temporary")), &out);
    CHECK(code == 0);
    CHECK(out.find("verdict: PASS") != std::string::npos);
}

TEST_CASE("analyze writes certificates that check accepts") {
    for (std::string kind : {"full", "rules", "labels"}) {
        std::string cert = tmp_file("ok_" + kind + ".nicert");
        std::string out;
        int code = run_command(bin() + " analyze " + quoted(corpus_path("branch_temporary")) +
                                   " --cert " + cert + " --kind " + kind,
                               &out);
        CHECK(code == 0);
        CHECK(out.find("certificate written") != std::string::npos);
        code = run_command(
            bin() + " check " + quoted(corpus_path("branch_temporary")) + " " + cert, &out);
        CHECK(code == 0);
        CHECK(out == "accepted\n");
    }
}

TEST_CASE("check rejects certificates for other programs") {
    std::string cert = tmp_file("other.nicert");
    run_command(bin() + " analyze " + quoted(corpus_path("branch_temporary")) + " --cert " + cert);
    std::string out;
    int code =
        run_command(bin() + " check " + quoted(corpus_path("loop_copy")) + " " + cert, &out);
    CHECK(code == 1);
    CHECK(out.find("rejected: hash mismatch") != std::string::npos);
}

TEST_CASE("check rejects a tampered certificate") {
    std::string cert = tmp_file("tamper.nicert");
    run_command(bin() + " analyze " + quoted(corpus_path("shielded_break")) + " --cert " + cert +
                " --kind rules");
    std::string text = slurp(cert);
    size_t pos = text.find("branch-then");
    REQUIRE(pos != std::string::npos);
    text.replace(pos, 11, "branch-else");
    std::ofstream(cert) << text;
    std::string out;
    int code =
        run_command(bin() + " check " + quoted(corpus_path("shielded_break")) + " " + cert, &out);
    CHECK(code == 1);
    CHECK(out.find("rejected") != std::string::npos);
}

TEST_CASE("trace reports the per-run verdict") {
    std::string out;
    int code = run_command(
        bin() + " trace " + quoted(corpus_path("assign_cancel")) + " --in h=1", &out);
    CHECK(code == 1);
    CHECK(out.find("verdict: FAIL") != std::string::npos);
    CHECK(out.find("Testclass.low : Low >> High") != std::string::npos);

    code = run_command(
        bin() + " trace " + quoted(corpus_path("branch_temporary")) + " --in h=1", &out);
    CHECK(code == 0);
    CHECK(out.find("verdict: PASS") != std::string::npos);
}

TEST_CASE("trace --steps dump format") {
    std::string out;
    int code = run_command(
        bin() + " trace " + quoted(corpus_path("assign_cancel")) + " --in h=1 --steps", &out);
    CHECK(code == 1);
    std::istringstream is(out);
    std::string line;
    std::regex step_re("^[0-9]+ [a-z-]+ CL=(Low|High)$");
    int step_lines = 0;
    while (std::getline(is, line)) {
        if (std::regex_match(line, step_re)) step_lines++;
    }
    CHECK(step_lines > 20);
    // the dump starts at step 0 and the verdict follows it
    CHECK(out.rfind("0 ", 0) == 0);
    CHECK(out.find("verdict: FAIL") != std::string::npos);
}

TEST_CASE("oracle subcommand") {
    std::string out;
    int code = run_command(
        bin() + " oracle " + quoted(corpus_path("assign_cancel")) + " --domain 0..3", &out);
    CHECK(code == 0);
    CHECK(out.find("non-interferent") != std::string::npos);

    code = run_command(bin() + " oracle " + quoted(corpus_path("loop_copy")), &out);
    CHECK(code == 1);
    CHECK(out.find("interferent") != std::string::npos);
    CHECK(out.find("differs: Testclass.low") != std::string::npos);
}

TEST_CASE("json reports are schema-shaped") {
    std::string out;
    int code = run_command(bin() + " analyze " + quoted(corpus_path("bank_account")) + " --json",
                           &out);
    CHECK(code == 1);
    json j = json::parse(out);
    CHECK(j["command"] == "analyze");
    CHECK(j["verdict"] == "fail");
    CHECK(j["witness"][0]["variable"] == "Bank.a.extraService");
    CHECK(j["witness"][0]["label"] == "Low >> High");
    CHECK(j["stats"]["states"].is_number());
    CHECK(j["stats"]["wall_ms"].is_number());

    code = run_command(bin() + " run " + quoted(corpus_path("bank_account")) +
                           " --in initbalance=10000 --json",
                       &out);
    CHECK(code == 0);
    j = json::parse(out);
    CHECK(j["output"][0] == "true");
    CHECK(j["final"]["Bank.a.balance"] == "10000");

    code = run_command(bin() + " trace " + quoted(corpus_path("loop_copy")) + " --in h=2 --json",
                       &out);
    CHECK(code == 1);
    j = json::parse(out);
    CHECK(j["verdict"] == "fail");

    code = run_command(bin() + " oracle " + quoted(corpus_path("loop_copy")) + " --json", &out);
    CHECK(code == 1);
    j = json::parse(out);
    CHECK(j["verdict"] == "interferent");
    CHECK(j["witness"]["variable"] == "Testclass.low");
    CHECK(j["stats"]["runs"] == 6);

    std::string cert = tmp_file("json.nicert");
    run_command(bin() + " analyze " + quoted(corpus_path("method_calls")) + " --cert " + cert);
    code = run_command(
        bin() + " check " + quoted(corpus_path("method_calls")) + " " + cert + " --json", &out);
    CHECK(code == 0);
    j = json::parse(out);
    CHECK(j["verdict"] == "accept");
}

TEST_CASE("multiple inputs bind through repeated --in flags") {
    std::string prog = tmp_file("two_inputs.njava");
    std::ofstream(prog) << "class A { static int low = 0; //@ setLabel(h, High);\n"
                           "public static void main(int h, int l) {"
                           "low = l; println(l + 1); } }";
    std::string out;
    int code = run_command(bin() + " run " + prog + " --in h=7 --in l=41", &out);
    CHECK(code == 0);
    CHECK(out == "42\n");
    // missing one binding
    CHECK(run_command(bin() + " run " + prog + " --in h=7", &out) == 2);
}

TEST_CASE("json reports parse for every command on the whole corpus") {
    for (const char* name : kCorpus) {
        CAPTURE(name);
        std::string prog = quoted(corpus_path(name));
        auto [lo, hi] = corpus_domain(name);
        std::string in;
        {
            auto p = parse_corpus(name);
            for (const auto& prm : p->inputs())
                in += " --in " + prm.name + "=" + std::to_string(hi);
        }
        std::string out;

        run_command(bin() + " run " + prog + in + " --json", &out);
        json j = json::parse(out);
        CHECK(j["command"] == "run");
        CHECK(j["stats"]["steps"].is_number());

        run_command(bin() + " trace " + prog + in + " --json", &out);
        j = json::parse(out);
        CHECK(j["command"] == "trace");
        CHECK((j["verdict"] == "pass" || j["verdict"] == "fail"));
        CHECK(j["witness"].is_array());

        run_command(bin() + " analyze " + prog + " --json", &out);
        j = json::parse(out);
        CHECK(j["command"] == "analyze");
        CHECK(j["stats"]["states"].is_number());

        run_command(bin() + " oracle " + prog + " --domain " + std::to_string(lo) + ".." +
                        std::to_string(hi) + " --json",
                    &out);
        j = json::parse(out);
        CHECK(j["command"] == "oracle");
        CHECK((j["verdict"] == "interferent" || j["verdict"] == "non-interferent"));

        std::string cert = tmp_file(std::string("sweep_") + name + ".nicert");
        run_command(bin() + " analyze " + prog + " --cert " + cert);
        run_command(bin() + " check " + prog + " " + cert + " --json", &out);
        j = json::parse(out);
        CHECK(j["command"] == "check");
        CHECK((j["verdict"] == "accept" || j["verdict"] == "reject"));
    }
}

TEST_CASE("usage and input errors exit with 2") {
    std::string out;
    CHECK(run_command(bin() + " bogus", &out) == 2);
    CHECK(run_command(bin() + " analyze /no/such/file.njava", &out) == 2);
    CHECK(run_command(bin() + " run " + quoted(corpus_path("loop_copy")) + " --in h=oops", &out) ==
          2);
    CHECK(run_command(bin() + " run " + quoted(corpus_path("loop_copy")), &out) == 2);
    // parse error in the program
    std::string bad = tmp_file("bad.njava");
    std::ofstream(bad) << "class X {";
    CHECK(run_command(bin() + " analyze " + bad, &out) == 2);
    // unreadable certificate
    CHECK(run_command(bin() + " check " + quoted(corpus_path("loop_copy")) + " /no/cert", &out) ==
          2);
}

TEST_CASE("step limit env var is honored") {
    std::string out;
    int code = run_command("NICERT_STEP_LIMIT=20 " + bin() + " run " +
                               quoted(corpus_path("loop_copy")) + " --in h=1",
                           &out);
    CHECK(code == 2);
    code = run_command("NICERT_STEP_LIMIT=100000 " + bin() + " run " +
                           quoted(corpus_path("loop_copy")) + " --in h=1",
                       &out);
    CHECK(code == 0);
}

TEST_CASE("repeated analyze runs write identical certificates") {
    std::string c1 = tmp_file("det1.nicert"), c2 = tmp_file("det2.nicert");
    run_command(bin() + " analyze " + quoted(corpus_path("loop_break")) + " --cert " + c1);
    run_command(bin() + " analyze " + quoted(corpus_path("loop_break")) + " --cert " + c2);
    CHECK(slurp(c1) == slurp(c2));
    CHECK(!slurp(c1).empty());
}
