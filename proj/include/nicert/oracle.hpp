#pragma once

#include <optional>

#include "nicert/concrete.hpp"
#include "nicert/machine_common.hpp"
#include "nicert/policy.hpp"

namespace nicert {

// Finite value sets for every declared input.
struct InputDomain {
    std::map<std::string, std::vector<Value>> values;

    // Integer inputs range over [lo, hi], boolean inputs over {false, true}.
    static InputDomain int_range(const Program& program, long lo, long hi);
};

struct OracleOptions {
    long long run_cap = 100000;
    bool parallel = true;
    RunLimits limits;
};

struct OracleWitness {
    std::map<std::string, Value> inputs_a;
    std::map<std::string, Value> inputs_b;
    std::string variable;  // differing Low variable, or "output[i]"
};

struct OracleResult {
    bool interferent = false;
    std::optional<OracleWitness> witness;
    long long runs = 0;
};

// Exhaustive Def.-2 check over the finite domain: all pairs of initial
// states that agree on Low inputs are executed and their final states
// compared at level Low. The reported witness is the lexicographically
// first violating pair (input declaration order, domain order).
OracleResult brute_force_ni(const Program& program, const NIPolicy& policy,
                            const InputDomain& domain, const OracleOptions& opts = {});
// Single-threaded reference; identical result.
OracleResult brute_force_ni_serial(const Program& program, const NIPolicy& policy,
                                   const InputDomain& domain, const OracleOptions& opts = {});

}  // namespace nicert
