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

#include "sphmm/labels.hpp"

#include <algorithm>
#include <cctype>

#include "sphmm/error.hpp"

namespace sphmm {
namespace {

std::string Lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace

std::string ToString(Gender g) { return g == Gender::kMale ? "M" : "F"; }

std::string ToString(Condition c) {
  return c == Condition::kNeutral ? "neutral" : "shouted";
}

std::string ToString(Session s) { return s == Session::kTrain ? "train" : "test"; }

Gender ParseGender(std::string_view s) {
  const std::string v = Lower(s);
  if (v == "m" || v == "male") return Gender::kMale;
  if (v == "f" || v == "female") return Gender::kFemale;
  ThrowUsage("unknown gender '" + std::string(s) + "' (expected M or F)");
}

Condition ParseCondition(std::string_view s) {
  const std::string v = Lower(s);
  if (v == "neutral") return Condition::kNeutral;
  // SUSAS-style corpora label the loud condition "angry".
  if (v == "shouted" || v == "angry") return Condition::kShouted;
  ThrowUsage("unknown condition '" + std::string(s) + "' (expected neutral or shouted)");
}

Session ParseSession(std::string_view s) {
  const std::string v = Lower(s);
  if (v == "train") return Session::kTrain;
  if (v == "test") return Session::kTest;
  ThrowUsage("unknown session '" + std::string(s) + "' (expected train or test)");
}

}  // namespace sphmm
