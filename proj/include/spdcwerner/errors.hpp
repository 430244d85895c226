// Copyright 2026 The spdcwerner Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace spdcwerner {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define SPDCWERNER_DEFINE_ERROR(Name)        \
  class Name : public Error {                \
   public:                                   \
    using Error::Error;                      \
  }

SPDCWERNER_DEFINE_ERROR(DimensionError);
SPDCWERNER_DEFINE_ERROR(DegenerateInputError);
SPDCWERNER_DEFINE_ERROR(CapacityError);
SPDCWERNER_DEFINE_ERROR(ParameterError);
SPDCWERNER_DEFINE_ERROR(ConvergenceError);
SPDCWERNER_DEFINE_ERROR(ContractError);
SPDCWERNER_DEFINE_ERROR(PhysicalityError);
SPDCWERNER_DEFINE_ERROR(DomainError);
SPDCWERNER_DEFINE_ERROR(DesignError);
SPDCWERNER_DEFINE_ERROR(FitError);
SPDCWERNER_DEFINE_ERROR(ParseError);

#undef SPDCWERNER_DEFINE_ERROR

}  // namespace spdcwerner
