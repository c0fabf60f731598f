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

// Binary GanState checkpoints.
//
// Layout (little-endian): "EHRGANCK", u32 version, u64-length-prefixed
// GanConfig JSON, u64 epoch / critic updates / generator updates, then the
// generator, critic and both optimizers' moment ParamSets (u32 count, and per
// tensor a u32-prefixed name, u64 rows, u64 cols, doubles), the two
// optimizer step counts, and the three RNG states as length-prefixed text.

#ifndef EHRGAN_CHECKPOINT_H_
#define EHRGAN_CHECKPOINT_H_

#include <iosfwd>
#include <string>

#include "ehrgan/gan.h"

namespace ehrgan {

inline constexpr std::uint32_t kCheckpointVersion = 1;

void write_checkpoint(std::ostream& out, const GanState& state);
GanState read_checkpoint(std::istream& in);

void save_checkpoint(const std::string& path, const GanState& state);
GanState load_checkpoint(const std::string& path);

}  // namespace ehrgan

#endif  // EHRGAN_CHECKPOINT_H_
