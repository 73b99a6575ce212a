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

#include <filesystem>
#include <vector>

#include "sphmm/frontend.hpp"

namespace sphmm::dsp {

// Reads a mono RIFF/WAVE file: PCM 8-bit (unsigned), PCM 16-bit, or IEEE
// float 32-bit. 16-bit samples are scaled by 1/32768, 8-bit by 1/128 after
// removing the 128 offset. Multi-channel files are rejected.
AudioClip ReadWav(const std::filesystem::path& path);

// Parses an in-memory WAV image; `origin` is used in error messages.
AudioClip ParseWav(const std::vector<unsigned char>& bytes,
                   const std::string& origin);

// Writes 16-bit PCM mono. Samples are clipped to [-1, 1) before quantizing.
void WriteWav16(const std::filesystem::path& path, const AudioClip& clip);

std::vector<unsigned char> EncodeWav16(const AudioClip& clip);

}  // namespace sphmm::dsp
