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

#include "sphmm/error.hpp"

namespace sphmm {

void ThrowUsage(const std::string& what) { throw Error(ErrorKind::kUsage, what); }
void ThrowData(const std::string& what) { throw Error(ErrorKind::kData, what); }
void ThrowNumeric(const std::string& what) {
  throw Error(ErrorKind::kNumeric, what);
}

int ExitCodeFor(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::kUsage: return 1;
    case ErrorKind::kData: return 2;
    case ErrorKind::kNumeric: return 3;
  }
  return 2;
}

}  // namespace sphmm
