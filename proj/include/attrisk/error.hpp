#pragma once

#include <stdexcept>
#include <string>

namespace attrisk {

/// Failure categories surfaced by the library.  The CLI maps these onto
/// exit codes, so additions here need a corresponding mapping there.
enum class ErrorKind {
    Schema,       // column missing, header/name mismatch, bad plan file
    Parse,        // malformed cell or file syntax
    Domain,       // value outside its declared kind (bad label, count < 0)
    Order,        // plan step references a later step's outcome
    Type,         // family does not match the outcome's kind
    Singular,     // rank-deficient design matrix
    Size,         // not enough draws / rows for the requested operation
    Numeric,      // NaN or divergence during evaluation
    Io,           // file cannot be opened or written
    Internal,     // invariant breach that should be unreachable
};

class Error : public std::runtime_error {
  public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const { return kind_; }

  private:
    ErrorKind kind_;
};

inline const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Schema: return "schema";
        case ErrorKind::Parse: return "parse";
        case ErrorKind::Domain: return "domain";
        case ErrorKind::Order: return "order";
        case ErrorKind::Type: return "type";
        case ErrorKind::Singular: return "singular";
        case ErrorKind::Size: return "size";
        case ErrorKind::Numeric: return "numeric";
        case ErrorKind::Io: return "io";
        case ErrorKind::Internal: return "internal";
    }
    return "unknown";
}

} // namespace attrisk
