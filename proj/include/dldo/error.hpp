#pragma once

#include <stdexcept>
#include <string>

namespace dldo {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A model input violated an invariant (non-finite value, bad parameter range).
class ModelError : public Error {
public:
    using Error::Error;
};

/// Transfer function evaluated on one of its poles.
class SingularityError : public Error {
public:
    using Error::Error;
};

/// Malformed config or scenario text. `key()` names the offending entry when known.
class ParseError : public Error {
public:
    explicit ParseError(const std::string& what, std::string key = {})
        : Error(what), key_(std::move(key)) {}

    [[nodiscard]] const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

}  // namespace dldo
