/*
 * Error hierarchy shared by all ganbench modules.
 *
 * Licensed under the terms of the Apache 2.0 License.
 * See LICENSE file in the project root for terms.
 */
#pragma once

#include <stdexcept>
#include <string>

namespace ganbench {

/// Base class of everything thrown by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A caller violated an operation's precondition (bad argument, size
/// mismatch, value out of range).
struct InvalidInput : Error {
  using Error::Error;
};

/// A file exists but its contents do not parse (PPM/PGM header, manifest
/// record, config document). The message names the offending element.
struct FormatError : Error {
  using Error::Error;
};

/// The operating system refused a read or write.
struct IoError : Error {
  using Error::Error;
};

/// Training data cannot support a model (e.g. a single-class training set).
struct DegenerateData : InvalidInput {
  using InvalidInput::InvalidInput;
};

}  // namespace ganbench
