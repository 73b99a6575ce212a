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
#include "sphmm/hmm.hpp"

namespace sphmm::hmm {

namespace {
constexpr int kFormatVersion = 1;
}

nlohmann::json ToJson(const AcousticHmm& model) {
  nlohmann::json emissions = nlohmann::json::array();
  for (const auto& e : model.emissions()) {
    emissions.push_back({{"weights", e.weights()},
                         {"means", e.means().ToRows()},
                         {"variances", e.variances().ToRows()}});
  }
  return {{"format_version", kFormatVersion},
          {"num_states", model.num_states()},
          {"transitions", model.transitions().ToRows()},
          {"emissions", std::move(emissions)}};
}

AcousticHmm AcousticHmmFromJson(const nlohmann::json& j) {
  try {
    const int version = j.at("format_version").get<int>();
    if (version != kFormatVersion) {
      ThrowData("acoustic model: unsupported format_version " + std::to_string(version));
    }
    const int n = j.at("num_states").get<int>();
    Matrix trans = Matrix::FromRows(j.at("transitions").get<std::vector<std::vector<double>>>());
    const auto& em = j.at("emissions");
    if (!em.is_array() || static_cast<int>(em.size()) != n) {
      ThrowData("acoustic model: expected " + std::to_string(n) + " emissions");
    }
    std::vector<GaussianMixture> emissions;
    for (const auto& e : em) {
      emissions.emplace_back(
          e.at("weights").get<std::vector<double>>(),
          Matrix::FromRows(e.at("means").get<std::vector<std::vector<double>>>()),
          Matrix::FromRows(e.at("variances").get<std::vector<std::vector<double>>>()));
    }
    return AcousticHmm(std::move(trans), std::move(emissions));
  } catch (const nlohmann::json::exception& e) {
    ThrowData(std::string("acoustic model: ") + e.what());
  }
}

}  // namespace sphmm::hmm
