#pragma once

#include <stdexcept>
#include <string>

namespace nicert {

struct SourcePos {
    int line = 0;
    int col = 0;
};

// Syntax, name-resolution, type or policy error in an input program.
class ParseError : public std::runtime_error {
public:
    ParseError(SourcePos pos, const std::string& msg)
        : std::runtime_error(format(pos, msg)), pos_(pos), message_(msg) {}

    SourcePos pos() const { return pos_; }
    const std::string& message() const { return message_; }

private:
    static std::string format(SourcePos pos, const std::string& msg) {
        return std::to_string(pos.line) + ":" + std::to_string(pos.col) + ": " + msg;
    }
    SourcePos pos_;
    std::string message_;
};

// Fault raised while executing a program: division by zero, read of an
// uninitialized location, missing return value, step limit.
class RuntimeFault : public std::runtime_error {
public:
    explicit RuntimeFault(const std::string& msg) : std::runtime_error(msg) {}
};

class StepLimitExceeded : public RuntimeFault {
public:
    explicit StepLimitExceeded(long long limit)
        : RuntimeFault("step limit exceeded (" + std::to_string(limit) + ")") {}
};

}  // namespace nicert
