#include "nicert/oracle.hpp"

#include <stdexcept>

namespace nicert {

namespace {

struct ProfileSpace {
    std::vector<std::string> names;                // in declaration order
    std::vector<std::vector<Value>> domains;       // parallel to names
    long long count = 1;

    std::map<std::string, Value> profile(long long idx) const {
        std::map<std::string, Value> out;
        for (size_t i = 0; i < names.size(); i++) {
            long long n = static_cast<long long>(domains[i].size());
            out[names[i]] = domains[i][idx % n];
            idx /= n;
        }
        return out;
    }
};

ProfileSpace space_for(const Program& program, const NIPolicy& policy, const InputDomain& domain,
                       Label which) {
    ProfileSpace sp;
    for (const auto& prm : program.inputs()) {
        if (policy.label_of(prm.name) != which) continue;
        auto it = domain.values.find(prm.name);
        if (it == domain.values.end() || it->second.empty())
            throw RuntimeFault("no domain for input '" + prm.name + "'");
        sp.names.push_back(prm.name);
        sp.domains.push_back(it->second);
        sp.count *= static_cast<long long>(it->second.size());
    }
    return sp;
}

// First Low-observable difference between two final states.
std::string first_difference(const FinalState& a, const FinalState& b, const NIPolicy& policy) {
    for (const auto& [path, va] : a.vars) {
        auto it = b.vars.find(path);
        if (it == b.vars.end()) continue;
        if (policy.label_of(path) == Label::Low && !(va == it->second)) return path;
    }
    size_t n = std::min(a.output.size(), b.output.size());
    for (size_t i = 0; i < n; i++)
        if (!(a.output[i] == b.output[i])) return "output[" + std::to_string(i) + "]";
    if (a.output.size() != b.output.size()) return "output length";
    return "?";
}

OracleResult oracle_impl(const Program& program, const NIPolicy& policy,
                         const InputDomain& domain, const OracleOptions& opts) {
    ProfileSpace lows = space_for(program, policy, domain, Label::Low);
    ProfileSpace highs = space_for(program, policy, domain, Label::High);

    OracleResult res;
    if (highs.count <= 1) {
        // nothing secret varies; non-interference is immediate
        return res;
    }
    long long total_runs = lows.count * highs.count;
    if (total_runs > opts.run_cap)
        throw RuntimeFault("input domain needs " + std::to_string(total_runs) +
                           " runs, over the cap of " + std::to_string(opts.run_cap));

    std::vector<FinalState> finals(static_cast<size_t>(total_runs));
    std::vector<std::string> errors(static_cast<size_t>(total_runs));
    const long long n = total_runs;
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) if (opts.parallel)
#endif
    for (long long idx = 0; idx < n; idx++) {
        long long l = idx / highs.count;
        long long h = idx % highs.count;
        std::map<std::string, Value> inputs = lows.profile(l);
        for (auto& [k, v] : highs.profile(h)) inputs[k] = v;
        try {
            finals[static_cast<size_t>(idx)] = run_concrete(program, inputs, opts.limits);
        } catch (const std::exception& e) {
            errors[static_cast<size_t>(idx)] = e.what();
        }
    }
    res.runs = total_runs;
    for (long long idx = 0; idx < n; idx++)
        if (!errors[idx].empty())
            throw RuntimeFault("run failed for some input: " + errors[static_cast<size_t>(idx)]);

    // scan pairs in lexicographic order; Low inputs are the common base
    for (long long l = 0; l < lows.count; l++) {
        for (long long i = 0; i < highs.count; i++) {
            for (long long j = i + 1; j < highs.count; j++) {
                const FinalState& a = finals[static_cast<size_t>(l * highs.count + i)];
                const FinalState& b = finals[static_cast<size_t>(l * highs.count + j)];
                if (!low_equal(a, b, policy)) {
                    OracleWitness w;
                    w.inputs_a = lows.profile(l);
                    for (auto& [k, v] : highs.profile(i)) w.inputs_a[k] = v;
                    w.inputs_b = lows.profile(l);
                    for (auto& [k, v] : highs.profile(j)) w.inputs_b[k] = v;
                    w.variable = first_difference(a, b, policy);
                    res.interferent = true;
                    res.witness = std::move(w);
                    return res;
                }
            }
        }
    }
    return res;
}

}  // namespace

InputDomain InputDomain::int_range(const Program& program, long lo, long hi) {
    if (lo > hi) throw RuntimeFault("empty input domain");
    InputDomain d;
    for (const auto& prm : program.inputs()) {
        std::vector<Value> vals;
        if (prm.type.kind == Type::Int) {
            for (long v = lo; v <= hi; v++) vals.push_back(Value::of_int(v));
        } else {
            vals.push_back(Value::of_bool(false));
            vals.push_back(Value::of_bool(true));
        }
        d.values[prm.name] = std::move(vals);
    }
    return d;
}

OracleResult brute_force_ni(const Program& program, const NIPolicy& policy,
                            const InputDomain& domain, const OracleOptions& opts) {
    return oracle_impl(program, policy, domain, opts);
}

OracleResult brute_force_ni_serial(const Program& program, const NIPolicy& policy,
                                   const InputDomain& domain, const OracleOptions& opts) {
    OracleOptions serial = opts;
    serial.parallel = false;
    return oracle_impl(program, policy, domain, serial);
}

}  // namespace nicert
