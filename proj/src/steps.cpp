/*
 * Copyright 2026 The hjcp Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "hjcp/steps.hpp"

namespace hjcp {

std::optional<StepId> parse_step(std::string_view name) {
  for (std::size_t i = 0; i < kStepCount; ++i) {
    if (kStepNames[i] == name) return static_cast<StepId>(i);
  }
  return std::nullopt;
}

}  // namespace hjcp
