#pragma once

#include <stdexcept>
#include <string>

namespace mimictree {

/// Base class for every error thrown by the library.
class error : public std::runtime_error {
public:
    explicit error(const std::string& what) : std::runtime_error(what) {}
};

/// Declared schema and file contents disagree (missing column, bad spec).
class schema_error : public error {
public:
    using error::error;
};

/// A cell or file could not be parsed; messages carry the row index.
class parse_error : public error {
public:
    using error::error;
};

/// Invalid configuration value (fractions, windows, paths, flag combos).
class config_error : public error {
public:
    using error::error;
};

/// Data violates a runtime contract (NaN input, broken episode order, ...).
class data_error : public error {
public:
    using error::error;
};

/// Teacher subprocess or label file violated the oracle protocol.
class oracle_error : public error {
public:
    using error::error;
};

/// Action-replacement augmentation could not be performed.
class augment_error : public error {
public:
    using error::error;
};

} // namespace mimictree
