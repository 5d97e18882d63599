// Compares the OpenMP frontier/sweep kernels against their serial reference
// implementations and verifies that both produce identical results.
//
//   ./bench_parallel [repeats]

#include <chrono>
#include <cstdio>
#include <random>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "nicert/abstract.hpp"
#include "nicert/oracle.hpp"
#include "nicert/parser.hpp"
#include "nicert/policy.hpp"
#include "support/progen.hpp"

using namespace nicert;

namespace {

double now_ms() {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

// Two secret inputs and a nest of loops: enough concrete work per run to
// make the sweep worth distributing.
const char* kOracleProgram = R"(
class Bench {
    static int low = 0, acc = 0;
    //@ setLabel(a, High); setLabel(b, High);
    public static void main(int a, int b) {
        int t = 40;
        while (t > 0) {
            t = t - 1;
            acc = acc + a * t - b;
            int u = 12;
            while (u > 0) {
                u = u - 1;
                acc = acc + u * u - a;
            }
        }
        if (acc > 1000) low = 1; else low = 2;
        low = 0;
    }
}
)";

// One-sided conditionals over distinct fields keep the branched stores
// distinct, so the frontier widens exponentially before the finals.
std::string explore_program(int branches) {
    std::string fields, body;
    for (int i = 0; i < branches; i++) {
        std::string v = "v" + std::to_string(i);
        fields += "    static int " + v + " = 0;\n";
        body += "        if (h > " + std::to_string(i) + ") { " + v + " = 1; " + v + " = " + v +
                " + h; }\n";
    }
    return "class Bench {\n"
           "    static int low = 0, acc = 0;\n" +
           fields +
           "    //@ setLabel(h, High);\n"
           "    public static void main(int h) {\n" +
           body +
           "        low = 0;\n"
           "    }\n"
           "}\n";
}

template <typename F>
double best_of(int repeats, F&& f) {
    double best = 1e18;
    for (int i = 0; i < repeats; i++) {
        double t0 = now_ms();
        f();
        best = std::min(best, now_ms() - t0);
    }
    return best;
}

}  // namespace

int main(int argc, char** argv) {
    int repeats = argc > 1 ? std::atoi(argv[1]) : 3;
#ifdef _OPENMP
    std::printf("OpenMP enabled, max threads = %d\n", omp_get_max_threads());
#else
    std::printf("built without OpenMP; both columns run serially\n");
#endif
    std::printf("%-24s %12s %12s %9s\n", "kernel", "serial ms", "parallel ms", "speedup");

    {
        auto p = parse(kOracleProgram);
        NIPolicy pol = extract_policy(*p);
        InputDomain d = InputDomain::int_range(*p, -14, 14);  // 841 runs
        OracleOptions opts;
        opts.run_cap = 1000000;
        OracleResult serial_res, parallel_res;
        double ts = best_of(repeats, [&] {
            serial_res = brute_force_ni_serial(*p, pol, d, opts);
        });
        double tp = best_of(repeats, [&] { parallel_res = brute_force_ni(*p, pol, d, opts); });
        if (serial_res.interferent != parallel_res.interferent) {
            std::printf("oracle sweep: RESULT MISMATCH\n");
            return 1;
        }
        std::printf("%-24s %12.1f %12.1f %8.2fx\n", "oracle sweep (841 runs)", ts, tp, ts / tp);
    }

    {
        auto p = parse(explore_program(10));
        NIPolicy pol = extract_policy(*p);
        ExploreOptions opts;
        opts.state_budget = 2000000;
        std::string serial_graph, parallel_graph;
        double ts = best_of(repeats, [&] {
            serial_graph = explore_serial(*p, pol, opts).graph.serialize();
        });
        double tp =
            best_of(repeats, [&] { parallel_graph = explore(*p, pol, opts).graph.serialize(); });
        if (serial_graph != parallel_graph) {
            std::printf("abstract frontier: GRAPH MISMATCH\n");
            return 1;
        }
        auto res = explore(*p, pol, opts);
        char label[64];
        std::snprintf(label, sizeof label, "frontier (%zu states)", res.graph.nodes.size());
        std::printf("%-24s %12.1f %12.1f %8.2fx\n", label, ts, tp, ts / tp);
    }

    {
        // batch of small random programs, one exploration each
        std::mt19937 rng(5);
        std::vector<std::string> sources;
        for (int i = 0; i < 60; i++) sources.push_back(nicert::testing::generate_program(rng));
        double ts = best_of(repeats, [&] {
            for (const auto& s : sources) {
                auto p = parse(s);
                NIPolicy pol = extract_policy(*p);
                explore_serial(*p, pol);
            }
        });
        double tp = best_of(repeats, [&] {
            for (const auto& s : sources) {
                auto p = parse(s);
                NIPolicy pol = extract_policy(*p);
                explore(*p, pol);
            }
        });
        std::printf("%-24s %12.1f %12.1f %8.2fx\n", "60 small explorations", ts, tp, ts / tp);
    }
    return 0;
}
