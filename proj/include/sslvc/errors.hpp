// sslvc/errors.hpp

// Copyright 2026  sslvc authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SSLVC_ERRORS_HPP
#define SSLVC_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace sslvc {

// Base of every error the library throws. kind() is the stable,
// machine-readable tag used in the CLI's JSON error envelope.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string &what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string &kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define SSLVC_DEFINE_ERROR(Name, tag)                                  \
  class Name : public Error {                                          \
   public:                                                             \
    explicit Name(const std::string &what) : Error(tag, what) {}       \
  };

SSLVC_DEFINE_ERROR(FormatError, "format_error")
SSLVC_DEFINE_ERROR(ConfigError, "config_error")
SSLVC_DEFINE_ERROR(ShapeError, "shape_error")
SSLVC_DEFINE_ERROR(DomainError, "domain_error")
SSLVC_DEFINE_ERROR(InputError, "input_error")
SSLVC_DEFINE_ERROR(ParameterError, "parameter_error")
SSLVC_DEFINE_ERROR(ExtractionError, "extraction_error")
SSLVC_DEFINE_ERROR(EvalError, "eval_error")
SSLVC_DEFINE_ERROR(TrainingError, "training_error")
SSLVC_DEFINE_ERROR(PreflightError, "preflight_error")

#undef SSLVC_DEFINE_ERROR

}  // namespace sslvc

#endif  // SSLVC_ERRORS_HPP
