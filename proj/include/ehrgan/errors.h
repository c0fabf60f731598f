// Copyright 2026 The ehrgan Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef EHRGAN_ERRORS_H_
#define EHRGAN_ERRORS_H_

#include <stdexcept>
#include <string>

namespace ehrgan {

// All library failures derive from Error so callers can catch one type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define EHRGAN_DEFINE_ERROR(Name) \
  class Name : public Error {     \
   public:                        \
    using Error::Error;           \
  }

EHRGAN_DEFINE_ERROR(DimensionError);
EHRGAN_DEFINE_ERROR(ContractError);
EHRGAN_DEFINE_ERROR(DomainError);
EHRGAN_DEFINE_ERROR(ParseError);
EHRGAN_DEFINE_ERROR(ConfigError);
EHRGAN_DEFINE_ERROR(SchemaError);
EHRGAN_DEFINE_ERROR(BalanceError);
EHRGAN_DEFINE_ERROR(NumericError);
EHRGAN_DEFINE_ERROR(TrainingError);
EHRGAN_DEFINE_ERROR(MetricUndefinedError);
EHRGAN_DEFINE_ERROR(PathError);
EHRGAN_DEFINE_ERROR(FormatError);
EHRGAN_DEFINE_ERROR(RunError);

#undef EHRGAN_DEFINE_ERROR

}  // namespace ehrgan

#endif  // EHRGAN_ERRORS_H_
