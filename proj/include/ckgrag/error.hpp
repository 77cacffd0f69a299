#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace ckgrag {

enum class ErrorKind {
    InvalidEmbedding,
    EmptyText,
    EmptyInput,
    EmptyDocument,
    UnknownNode,
    SelfLoop,
    Io,
    FormatVersionMismatch,
    CorruptFile,
    ProviderUnavailable,
    MalformedAfterRetries,
    InconsistentInputs,
    NoRelevantDocs,
    QuestionKindMismatch,
    Config,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

/// Carries every raw provider reply that failed schema or semantic validation.
class MalformedAfterRetriesError : public Error {
public:
    MalformedAfterRetriesError(std::string message, std::vector<std::string> attempts)
        : Error(ErrorKind::MalformedAfterRetries, std::move(message)),
          attempts_(std::move(attempts)) {}

    const std::vector<std::string>& attempts() const noexcept { return attempts_; }

private:
    std::vector<std::string> attempts_;
};

}  // namespace ckgrag
