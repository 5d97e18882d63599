#pragma once

#include <string>

#include "nicert/abstract.hpp"
#include "nicert/policy.hpp"

namespace nicert {

enum class CertKind { Full, ReducedRules, ReducedLabels };

const char* to_string(CertKind k);
bool cert_kind_from_string(const std::string& s, CertKind& out);

inline constexpr int kCertificateVersion = 1;

// Serializes the reachability evidence. Full records every node and edge;
// rules keeps only the branching edges (by canonical exploration ids);
// labels keeps only the ordered branching rule names.
std::string emit_certificate(const ReachGraph& graph, CertKind kind,
                             const std::string& program_hash, const std::string& policy_hash);

struct CheckResult {
    bool accepted = false;
    std::string reason;  // empty when accepted
};

// Consumer-side validation. Replays the certificate against the program and
// policy: every recorded step must be a valid abstract step, no successor
// may be missing, and every final state must satisfy the non-interference
// condition. Never re-runs the exploration.
CheckResult check_certificate(const Program& program, const NIPolicy& policy,
                              const std::string& certificate_text);

// Parses a Full certificate body back into a graph (round-trip identity).
// Throws RuntimeFault if the text is not a well-formed Full certificate.
ReachGraph parse_full_certificate(const std::string& certificate_text);

// Convenience: hashes used in certificate headers.
std::string program_hash(const Program& program);
std::string policy_hash(const NIPolicy& policy);

}  // namespace nicert
