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

#include <array>
#include <string>
#include <string_view>

namespace sphmm {

enum class Gender { kMale = 0, kFemale = 1 };
enum class Condition { kNeutral = 0, kShouted = 1 };
enum class Session { kTrain = 0, kTest = 1 };

inline constexpr std::array<Gender, 2> kGenders = {Gender::kMale, Gender::kFemale};
inline constexpr std::array<Condition, 2> kConditions = {Condition::kNeutral,
                                                         Condition::kShouted};

inline constexpr int Index(Gender g) { return static_cast<int>(g); }
inline constexpr int Index(Condition c) { return static_cast<int>(c); }

// "M" / "F".
std::string ToString(Gender g);
// "neutral" / "shouted".
std::string ToString(Condition c);
// "train" / "test".
std::string ToString(Session s);

// Accepts M/F (any case) and male/female; throws a usage error otherwise.
Gender ParseGender(std::string_view s);
// Accepts neutral and shouted; "angry" is read as shouted.
Condition ParseCondition(std::string_view s);
Session ParseSession(std::string_view s);

}  // namespace sphmm
