/*
    Licensed under the Apache License, Version 2.0 (the "License");
    you may not use this file except in compliance with the License.
    You may obtain a copy of the License at

        https://www.apache.org/licenses/LICENSE-2.0

    Unless required by applicable law or agreed to in writing, software
    distributed under the License is distributed on an "AS IS" BASIS,
    WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
    See the License for the specific language governing permissions and
    limitations under the License.
*/

#ifndef CEDR_ERROR_HPP_
#define CEDR_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace cedr {

enum class ErrorKind {
    InfiniteInterval,
    AmbiguousLineage,
    TypeMismatch,
    ArityMismatch,
    EmptyInput,
    UnboundVariable,
    NonMonotoneGuarantee,
    NotASyncPoint,
    CompileError,
    InvalidArgument,
    Io,
};

const char* toString(ErrorKind kind);

/// Single exception type for every recoverable failure; callers branch on kind().
class Error : public std::runtime_error {
  public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(toString(kind)) + ": " + message), kind_(kind) {}

    ErrorKind kind() const { return kind_; }

  private:
    ErrorKind kind_;
};

}// namespace cedr

#endif// CEDR_ERROR_HPP_
