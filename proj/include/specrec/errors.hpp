// Copyright (C) 2026 specrec authors
// SPDX-License-Identifier: Apache-2.0
#ifndef SPECREC_ERRORS_HPP
#define SPECREC_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace specrec {

// malformed/inconsistent configuration (CLI exit code 3)
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// missing/corrupt/unwritable files (CLI exit code 4)
struct IoError : std::runtime_error {
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace specrec

#endif  // SPECREC_ERRORS_HPP
