// Copyright 2026  The sphmm-sid Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace sphmm {

// Failure classes map onto CLI exit codes (usage=1, data=2, numeric=3).
enum class ErrorKind { kUsage, kData, kNumeric };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Invalid argument or precondition violated by the caller.
[[noreturn]] void ThrowUsage(const std::string& what);
// Malformed input data, missing files, protocol violations.
[[noreturn]] void ThrowData(const std::string& what);
// NaN or otherwise unusable numeric state.
[[noreturn]] void ThrowNumeric(const std::string& what);

int ExitCodeFor(ErrorKind kind) noexcept;

}  // namespace sphmm
