// Copyright 2026 The PulseForge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "pulseforge/log.hpp"

#include <iostream>
#include <mutex>

namespace pulseforge {

namespace {

std::mutex& log_mutex() {
  static std::mutex m;
  return m;
}

WarningHandler& handler() {
  static WarningHandler h;
  return h;
}

}  // namespace

void warn(std::string_view message) {
  std::lock_guard lock(log_mutex());
  if (handler())
    handler()(message);
  else
    std::cerr << "warning: " << message << '\n';
}

WarningHandler set_warning_handler(WarningHandler h) {
  std::lock_guard lock(log_mutex());
  WarningHandler old = std::move(handler());
  handler() = std::move(h);
  return old;
}

}  // namespace pulseforge
