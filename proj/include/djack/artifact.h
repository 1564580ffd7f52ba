/*
 * Copyright 2026 The djack Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Text artifact for a leave-one-out ensemble, so intervals can be recomputed
// without redoing influence work. Numbers are written as hex floats and read
// back bit-exactly.

#ifndef DJACK_ARTIFACT_H_
#define DJACK_ARTIFACT_H_

#include <cstdint>
#include <filesystem>
#include <string>

#include "djack/influence.h"

namespace djack {

inline constexpr int kArtifactVersion = 1;

// FNV-1a of the spec's canonical form.
std::uint64_t spec_hash(const ModelSpec& spec);

ModelSpec parse_canonical_spec(const std::string& text);

void save_ensemble(const LooEnsemble& ensemble,
                   const std::filesystem::path& path);

// Throws IoError on a missing file, a wrong version, a spec hash mismatch or
// malformed content.
LooEnsemble load_ensemble(const std::filesystem::path& path);

}  // namespace djack

#endif  // DJACK_ARTIFACT_H_
