#include "nicert/certificate.hpp"

#include <deque>
#include <sstream>
#include <unordered_map>

#include "nicert/hash.hpp"

namespace nicert {

const char* to_string(CertKind k) {
    switch (k) {
    case CertKind::Full: return "full";
    case CertKind::ReducedRules: return "rules";
    case CertKind::ReducedLabels: return "labels";
    }
    return "?";
}

// Fixed-width codes in the header keep certificate sizes comparable across
// kinds even for branch-free programs.
const char* kind_code(CertKind k) {
    switch (k) {
    case CertKind::Full: return "F";
    case CertKind::ReducedRules: return "R";
    case CertKind::ReducedLabels: return "L";
    }
    return "?";
}

bool cert_kind_from_string(const std::string& s, CertKind& out) {
    if (s == "full" || s == "F") { out = CertKind::Full; return true; }
    if (s == "rules" || s == "R") { out = CertKind::ReducedRules; return true; }
    if (s == "labels" || s == "L") { out = CertKind::ReducedLabels; return true; }
    return false;
}

std::string program_hash(const Program& program) { return sha256_hex(program.source); }
std::string policy_hash(const NIPolicy& policy) { return sha256_hex(policy.canonical()); }

std::string emit_certificate(const ReachGraph& graph, CertKind kind,
                             const std::string& program_hash, const std::string& policy_hash) {
    std::ostringstream os;
    os << "nicert-certificate-version: " << kCertificateVersion << "\n";
    os << "kind: " << kind_code(kind) << "\n";
    os << "program-sha256: " << program_hash << "\n";
    os << "policy-sha256: " << policy_hash << "\n";
    os << "initial: " << graph.nodes.at(0) << "\n";
    os << "---\n";
    switch (kind) {
    case CertKind::Full:
        os << graph.serialize();
        break;
    case CertKind::ReducedRules:
        for (const auto& [src, rule, dst] : graph.edges)
            if (is_branch_rule(rule))
                os << "E " << src << " " << rule_name(rule) << " " << dst << "\n";
        break;
    case CertKind::ReducedLabels:
        for (const auto& [src, rule, dst] : graph.edges)
            if (is_branch_rule(rule)) os << "L " << rule_name(rule) << "\n";
        break;
    }
    return os.str();
}

namespace {

struct Reject {
    std::string reason;
};

struct Header {
    CertKind kind;
    std::string program_sha, policy_sha, initial;
    std::vector<std::string> body;  // non-empty lines after ---
};

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : text) {
        if (c == '\n') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

std::vector<std::string> split_tokens(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream is(line);
    std::string t;
    while (is >> t) out.push_back(t);
    return out;
}

Header parse_header(const std::string& text) {
    std::vector<std::string> lines = split_lines(text);
    if (lines.size() < 6) throw Reject{"malformed certificate: truncated header"};
    auto field = [&](size_t i, const std::string& key) {
        const std::string prefix = key + ": ";
        if (lines[i].rfind(prefix, 0) != 0)
            throw Reject{"malformed certificate: expected '" + key + "' line"};
        return lines[i].substr(prefix.size());
    };
    Header h;
    if (field(0, "nicert-certificate-version") != std::to_string(kCertificateVersion))
        throw Reject{"unsupported certificate version"};
    if (!cert_kind_from_string(field(1, "kind"), h.kind))
        throw Reject{"malformed certificate: unknown kind"};
    h.program_sha = field(2, "program-sha256");
    h.policy_sha = field(3, "policy-sha256");
    h.initial = field(4, "initial");
    if (lines[5] != "---") throw Reject{"malformed certificate: missing separator"};
    for (size_t i = 6; i < lines.size(); i++)
        if (!lines[i].empty()) h.body.push_back(lines[i]);
    return h;
}

// Witness text for a violating final state.
std::string violation_text(const AbsConfig& cfg, const NIPolicy& policy) {
    for (const auto& [path, sl] : project_store(cfg)) {
        if (policy.label_of(path) == Label::Low && sl != StoredLabel::Low)
            return path + " : " + to_string(sl);
    }
    return "";
}

void check_full(const Program& program, const NIPolicy& policy, const Header& h) {
    // node table, edge list, final list
    std::vector<std::string> nodes;
    std::vector<std::tuple<int, Rule, int>> edges;
    std::vector<int> recorded_finals;
    for (const auto& line : h.body) {
        if (line[0] == 'N') {
            size_t sp = line.find(' ');
            if (sp == std::string::npos || sp < 2) throw Reject{"malformed body: bad node line"};
            long id = -1;
            try {
                id = std::stol(line.substr(1, sp - 1));
            } catch (...) {
                throw Reject{"malformed body: bad node id"};
            }
            if (id != static_cast<long>(nodes.size()))
                throw Reject{"malformed body: node ids out of order"};
            nodes.push_back(line.substr(sp + 1));
        } else if (line[0] == 'E') {
            std::vector<std::string> t = split_tokens(line);
            if (t.size() != 4) throw Reject{"malformed body: bad edge line"};
            Rule r;
            if (!rule_from_name(t[2], r)) throw Reject{"malformed body: unknown rule"};
            try {
                edges.push_back({std::stoi(t[1]), r, std::stoi(t[3])});
            } catch (...) {
                throw Reject{"malformed body: bad edge ids"};
            }
        } else if (line[0] == 'F') {
            std::vector<std::string> t = split_tokens(line);
            if (t.size() != 2) throw Reject{"malformed body: bad final line"};
            try {
                recorded_finals.push_back(std::stoi(t[1]));
            } catch (...) {
                throw Reject{"malformed body: bad final id"};
            }
        } else {
            throw Reject{"malformed body: unexpected line"};
        }
    }
    if (nodes.empty()) throw Reject{"malformed body: no nodes"};
    if (nodes[0] != h.initial) throw Reject{"invalid step: first node differs from initial"};

    // recorded out-edges, in recording order
    std::vector<std::vector<std::pair<Rule, int>>> out(nodes.size());
    for (const auto& [src, rule, dst] : edges) {
        if (src < 0 || src >= static_cast<int>(nodes.size()) || dst < 0 ||
            dst >= static_cast<int>(nodes.size()))
            throw Reject{"malformed body: edge references unknown node"};
        out[src].push_back({rule, dst});
    }

    // each node's recorded edges must be exactly its computed successors
    std::vector<char> is_final(nodes.size(), 0);
    for (size_t i = 0; i < nodes.size(); i++) {
        AbsConfig cfg;
        try {
            cfg = parse_config(nodes[i], program);
        } catch (const std::exception& e) {
            throw Reject{std::string("malformed state: ") + e.what()};
        }
        std::vector<AbsSucc> succs = abstract_successors(cfg);
        if (succs.size() != out[i].size())
            throw Reject{"missing successor: node " + std::to_string(i) + " has " +
                         std::to_string(out[i].size()) + " recorded, " +
                         std::to_string(succs.size()) + " required"};
        for (size_t s = 0; s < succs.size(); s++) {
            if (succs[s].rule != out[i][s].first)
                throw Reject{"invalid step: rule mismatch at node " + std::to_string(i)};
            if (serialize_config(succs[s].cfg) != nodes[out[i][s].second])
                throw Reject{"invalid step: successor state mismatch at node " +
                             std::to_string(i)};
        }
        if (succs.empty()) {
            is_final[i] = 1;
            std::string v = violation_text(cfg, policy);
            if (!v.empty()) throw Reject{"final state violates the policy: " + v};
        }
    }

    std::vector<int> computed_finals;
    for (size_t i = 0; i < nodes.size(); i++)
        if (is_final[i]) computed_finals.push_back(static_cast<int>(i));
    if (recorded_finals != computed_finals) throw Reject{"malformed body: final list mismatch"};

    // no disconnected content
    std::vector<char> seen(nodes.size(), 0);
    std::deque<int> queue{0};
    seen[0] = 1;
    while (!queue.empty()) {
        int n = queue.front();
        queue.pop_front();
        for (const auto& [rule, dst] : out[n]) {
            if (!seen[dst]) {
                seen[dst] = 1;
                queue.push_back(dst);
            }
        }
    }
    for (size_t i = 0; i < nodes.size(); i++)
        if (!seen[i]) throw Reject{"malformed body: unreachable node " + std::to_string(i)};
}

// Deterministic replay shared by the two reduced kinds. Recorded branch
// steps are consumed in canonical exploration order; deterministic segments
// are recomputed locally.
void check_reduced(const Program& program, const NIPolicy& policy, const Header& h) {
    struct BranchRec {
        int src;
        Rule rule;
        int dst;
    };
    std::vector<BranchRec> recs;   // rules kind
    std::vector<Rule> labels;      // labels kind
    for (const auto& line : h.body) {
        std::vector<std::string> t = split_tokens(line);
        if (h.kind == CertKind::ReducedRules) {
            if (t.size() != 4 || t[0] != "E") throw Reject{"malformed body: bad edge line"};
            Rule r;
            if (!rule_from_name(t[1 + 1], r) || !is_branch_rule(r))
                throw Reject{"malformed body: not a branching rule"};
            try {
                recs.push_back({std::stoi(t[1]), r, std::stoi(t[3])});
            } catch (...) {
                throw Reject{"malformed body: bad edge ids"};
            }
        } else {
            if (t.size() != 2 || t[0] != "L") throw Reject{"malformed body: bad label line"};
            Rule r;
            if (!rule_from_name(t[1], r) || !is_branch_rule(r))
                throw Reject{"malformed body: not a branching rule"};
            labels.push_back(r);
        }
    }

    AbsConfig init = lift(program, policy);
    std::string init_ser = serialize_config(init);
    if (init_ser != h.initial) throw Reject{"invalid step: initial state mismatch"};

    std::unordered_map<std::string, int> ids;
    std::vector<AbsConfig> configs;
    ids[init_ser] = 0;
    configs.push_back(std::move(init));
    size_t next_rec = 0;
    long long budget = 1000000;

    std::deque<int> queue{0};
    while (!queue.empty()) {
        int src = queue.front();
        queue.pop_front();
        std::vector<AbsSucc> succs = abstract_successors(configs[src]);
        if (succs.empty()) {
            std::string v = violation_text(configs[src], policy);
            if (!v.empty()) throw Reject{"final state violates the policy: " + v};
            continue;
        }
        for (AbsSucc& succ : succs) {
            std::string ser = serialize_config(succ.cfg);
            auto it = ids.find(ser);
            int dst;
            if (it == ids.end()) {
                dst = static_cast<int>(configs.size());
                if (dst >= budget) throw Reject{"state budget exceeded during replay"};
                ids[ser] = dst;
                configs.push_back(std::move(succ.cfg));
                queue.push_back(dst);
            } else {
                dst = it->second;
            }
            if (is_branch_rule(succ.rule)) {
                if (h.kind == CertKind::ReducedRules) {
                    if (next_rec >= recs.size())
                        throw Reject{"missing successor: branch steps not recorded"};
                    const BranchRec& r = recs[next_rec++];
                    if (r.src != src || r.rule != succ.rule || r.dst != dst)
                        throw Reject{"invalid step: recorded branch differs from replay"};
                } else {
                    if (next_rec >= labels.size())
                        throw Reject{"missing successor: branch labels not recorded"};
                    if (labels[next_rec++] != succ.rule)
                        throw Reject{"invalid step: recorded label differs from replay"};
                }
            }
        }
    }
    size_t total = h.kind == CertKind::ReducedRules ? recs.size() : labels.size();
    if (next_rec != total) throw Reject{"malformed body: unused certificate content"};
}

}  // namespace

CheckResult check_certificate(const Program& program, const NIPolicy& policy,
                              const std::string& certificate_text) {
    try {
        Header h = parse_header(certificate_text);
        if (h.program_sha != program_hash(program))
            throw Reject{"hash mismatch: certificate is for a different program"};
        if (h.policy_sha != policy_hash(policy))
            throw Reject{"hash mismatch: certificate is for a different policy"};
        {
            AbsConfig init = lift(program, policy);
            if (serialize_config(init) != h.initial)
                throw Reject{"invalid step: initial state mismatch"};
        }
        if (h.kind == CertKind::Full)
            check_full(program, policy, h);
        else
            check_reduced(program, policy, h);
        return {true, ""};
    } catch (const Reject& r) {
        return {false, r.reason};
    } catch (const std::exception& e) {
        return {false, std::string("malformed certificate: ") + e.what()};
    }
}

ReachGraph parse_full_certificate(const std::string& certificate_text) {
    try {
        Header h = parse_header(certificate_text);
        if (h.kind != CertKind::Full) throw Reject{"not a full certificate"};
        ReachGraph g;
        for (const auto& line : h.body) {
            if (line[0] == 'N') {
                size_t sp = line.find(' ');
                g.nodes.push_back(line.substr(sp + 1));
            } else if (line[0] == 'E') {
                std::vector<std::string> t = split_tokens(line);
                Rule r;
                if (!rule_from_name(t[2], r)) throw Reject{"unknown rule"};
                g.edges.push_back({std::stoi(t[1]), r, std::stoi(t[3])});
            } else if (line[0] == 'F') {
                g.finals.push_back(std::stoi(split_tokens(line)[1]));
            }
        }
        return g;
    } catch (const Reject& r) {
        throw RuntimeFault(r.reason);
    }
}

}  // namespace nicert
