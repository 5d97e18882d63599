#pragma once

#include <map>
#include <string>

#include "nicert/ast.hpp"

namespace nicert {

// A non-interference policy: labels for variable paths. Paths are either a
// declared input name or a dotted chain rooted at a static field
// ("Class.field" or "Class.field.sub..."). Anything absent is Low.
struct NIPolicy {
    std::map<std::string, Label> entries;

    Label label_of(const std::string& path) const {
        auto it = entries.find(path);
        return it == entries.end() ? Label::Low : it->second;
    }

    // Stable textual form, hashed into certificate headers.
    std::string canonical() const;
};

// Builds the policy from the program's setLabel annotations. Annotations on
// instance fields expand to every type-level path that reaches the field
// from a static root. Throws ParseError for unresolvable or non-scalar
// targets and for conflicting labels on the same path.
NIPolicy extract_policy(const Program& program);

}  // namespace nicert
