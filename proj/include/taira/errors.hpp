#pragma once

#include <stdexcept>
#include <string>

namespace taira {

// Every domain error carries the label of the module that raised it so the
// CLI can print "error[<module>]: ..." without knowing the concrete type.
class Error : public std::runtime_error {
public:
    Error(std::string module, const std::string& message)
        : std::runtime_error(message), module_(std::move(module)) {}

    const std::string& module() const noexcept { return module_; }

private:
    std::string module_;
};

struct CatalogError : Error {
    explicit CatalogError(const std::string& m) : Error("catalog", m) {}
};

struct RetrievalError : Error {
    explicit RetrievalError(const std::string& m) : Error("retrieval", m) {}
};

struct LlmError : Error {
    explicit LlmError(const std::string& m) : Error("llm_gateway", m) {}
};

// Raised when a completion never yields a value passing its schema check.
class MalformedOutput : public Error {
public:
    MalformedOutput(const std::string& m, std::string last_raw)
        : Error("llm_gateway", m), last_raw_(std::move(last_raw)) {}

    const std::string& last_raw() const noexcept { return last_raw_; }

private:
    std::string last_raw_;
};

struct PatternError : Error {
    explicit PatternError(const std::string& m) : Error("thought_store", m) {}
};

struct PlanError : Error {
    explicit PlanError(const std::string& m) : Error("orchestrator", m) {}
};

struct ExecutorError : Error {
    explicit ExecutorError(const std::string& m) : Error("executors", m) {}
};

struct UsersimError : Error {
    explicit UsersimError(const std::string& m) : Error("usersim", m) {}
};

struct EvalError : Error {
    explicit EvalError(const std::string& m) : Error("evalharness", m) {}
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& m) : Error("cli", m) {}
};

}  // namespace taira
