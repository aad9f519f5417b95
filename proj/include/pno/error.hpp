// Copyright 2026 The pnobench Authors
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

#ifndef PNO_ERROR_HPP_
#define PNO_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace pno {

// Every failure raised by the library derives from Error; `kind()` is a
// stable machine-readable tag used by the CLI error record.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const { return kind_; }

 private:
  std::string kind_;
};

#define PNO_DEFINE_ERROR(Name, tag)                                  \
  class Name : public Error {                                        \
   public:                                                           \
    explicit Name(const std::string& what) : Error(tag, what) {}     \
  }

PNO_DEFINE_ERROR(DimensionError, "dimension");
PNO_DEFINE_ERROR(NumericError, "numeric");
PNO_DEFINE_ERROR(StateError, "state");
PNO_DEFINE_ERROR(ParameterError, "parameter");
PNO_DEFINE_ERROR(FeasibilityError, "feasibility");
PNO_DEFINE_ERROR(SchemaError, "schema");
PNO_DEFINE_ERROR(ParseError, "parse");
PNO_DEFINE_ERROR(ConfigError, "config");
PNO_DEFINE_ERROR(UndefinedMetricError, "undefined_metric");
PNO_DEFINE_ERROR(SolverError, "solver");
PNO_DEFINE_ERROR(UnsupportedError, "unsupported");
PNO_DEFINE_ERROR(IoError, "io");
PNO_DEFINE_ERROR(EmptyDatasetError, "empty_dataset");

#undef PNO_DEFINE_ERROR

}  // namespace pno

#endif  // PNO_ERROR_HPP_
