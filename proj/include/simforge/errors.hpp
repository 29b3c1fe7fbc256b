#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace simforge {

/// Root of every error the engine raises.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define SIMFORGE_DEFINE_ERROR(Name, Base)    \
    class Name : public Base {               \
    public:                                  \
        using Base::Base;                    \
    };

// core-model
SIMFORGE_DEFINE_ERROR(UnknownName, Error)
SIMFORGE_DEFINE_ERROR(EmptySession, Error)
SIMFORGE_DEFINE_ERROR(InvalidModel, Error)

// scoring
SIMFORGE_DEFINE_ERROR(KindMismatch, Error)
SIMFORGE_DEFINE_ERROR(EmptyHistory, Error)
SIMFORGE_DEFINE_ERROR(InvalidCritique, Error)

// session-store
SIMFORGE_DEFINE_ERROR(StorageFailure, Error)
SIMFORGE_DEFINE_ERROR(UnknownSession, Error)
SIMFORGE_DEFINE_ERROR(UnknownSnapshot, Error)
SIMFORGE_DEFINE_ERROR(MigrationRequired, Error)

// prompts
SIMFORGE_DEFINE_ERROR(ParseError, Error)
SIMFORGE_DEFINE_ERROR(UndeclaredPlaceholder, Error)
SIMFORGE_DEFINE_ERROR(UnusedDeclaration, Error)
SIMFORGE_DEFINE_ERROR(DuplicateTemplate, Error)
SIMFORGE_DEFINE_ERROR(MissingTemplates, Error)
SIMFORGE_DEFINE_ERROR(UnknownTemplate, Error)

class MissingBinding : public Error {
public:
    MissingBinding(const std::string& what, std::vector<std::string> names)
        : Error(what), names_(std::move(names)) {}

    const std::vector<std::string>& names() const noexcept { return names_; }

private:
    std::vector<std::string> names_;
};

// llm-backend. `attempts` is filled in by with_retry when it gives up.
class BackendError : public Error {
public:
    using Error::Error;

    virtual bool retryable() const noexcept { return false; }

    int attempts() const noexcept { return attempts_; }
    void set_attempts(int n) noexcept { attempts_ = n; }

private:
    int attempts_ = 1;
};

class TransportError : public BackendError {
public:
    using BackendError::BackendError;
    bool retryable() const noexcept override { return true; }
};

class RateLimited : public BackendError {
public:
    using BackendError::BackendError;
    bool retryable() const noexcept override { return true; }
};

SIMFORGE_DEFINE_ERROR(SchemaViolation, BackendError)
SIMFORGE_DEFINE_ERROR(ScenarioExhausted, BackendError)

// agents
SIMFORGE_DEFINE_ERROR(DesignFailure, Error)
SIMFORGE_DEFINE_ERROR(CritiqueFailure, Error)
SIMFORGE_DEFINE_ERROR(ToolOrderViolation, Error)
SIMFORGE_DEFINE_ERROR(InvalidArtifact, Error)

// pipeline
SIMFORGE_DEFINE_ERROR(DecompositionFailure, Error)
SIMFORGE_DEFINE_ERROR(ConfigError, Error)

class StepFailure : public Error {
public:
    StepFailure(const std::string& what, std::vector<std::string> diagnostics)
        : Error(what), diagnostics_(std::move(diagnostics)) {}

    /// One entry per failed attempt, in attempt order.
    const std::vector<std::string>& diagnostics() const noexcept { return diagnostics_; }

private:
    std::vector<std::string> diagnostics_;
};

// assembler / validator
SIMFORGE_DEFINE_ERROR(AssemblyError, Error)
SIMFORGE_DEFINE_ERROR(HarnessUnavailable, Error)
SIMFORGE_DEFINE_ERROR(HarnessProtocolError, Error)

#undef SIMFORGE_DEFINE_ERROR

}  // namespace simforge
