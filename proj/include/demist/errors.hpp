#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace demist {

// Base class for everything this library throws.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad run configuration (file contents, parameter ranges, unknown keys).
class ConfigError : public Error {
public:
    using Error::Error;
};

// Netlist text could not be parsed or validated.
class ParseError : public Error {
public:
    using Error::Error;
};

class BenchSyntaxError : public ParseError {
public:
    BenchSyntaxError(std::size_t line, std::size_t column, const std::string& what_part)
        : ParseError("syntax error at line " + std::to_string(line) + ", column "
                     + std::to_string(column) + ": " + what_part),
          line_(line), column_(column) {}

    std::size_t line() const { return line_; }
    std::size_t column() const { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

class UnknownGateKindError : public ParseError {
public:
    UnknownGateKindError(std::string kind, std::size_t line)
        : ParseError("unknown gate kind '" + kind + "' at line " + std::to_string(line)),
          kind_(std::move(kind)), line_(line) {}

    const std::string& kind() const { return kind_; }
    std::size_t line() const { return line_; }

private:
    std::string kind_;
    std::size_t line_;
};

class DanglingNetError : public ParseError {
public:
    explicit DanglingNetError(std::string net)
        : ParseError("net '" + net + "' is referenced but never driven"),
          net_(std::move(net)) {}

    const std::string& net() const { return net_; }

private:
    std::string net_;
};

class CombinationalCycleError : public ParseError {
public:
    explicit CombinationalCycleError(std::vector<std::string> nets)
        : ParseError(format(nets)), nets_(std::move(nets)) {}

    const std::vector<std::string>& nets() const { return nets_; }

private:
    static std::string format(const std::vector<std::string>& nets) {
        std::string msg = "combinational cycle through:";
        for (const auto& n : nets) msg += " " + n;
        return msg;
    }
    std::vector<std::string> nets_;
};

// Structural problems raised outside of text parsing (wrapping, injection,
// arity/uniqueness violations when building a netlist programmatically).
class NetlistError : public ParseError {
public:
    using ParseError::ParseError;
};

// Anything that goes wrong while running a simulation.
class SimError : public Error {
public:
    using Error::Error;
};

} // namespace demist
