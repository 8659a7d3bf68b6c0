// Copyright 2026 The warpfuse Authors
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

#pragma once

#include <chrono>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace warpfuse {

inline constexpr const char* kToolVersion = "0.1.0";

/// Record of one CLI run: subcommand, resolved configuration, input/output
/// paths, seed, tool version and wall-clock duration. Written as flat
/// key=value lines alongside the outputs.
class RunManifest {
 public:
  explicit RunManifest(std::string subcommand);

  void set(const std::string& key, const std::string& value);
  void set(const std::string& key, double value);
  void set(const std::string& key, std::int64_t value);
  void set(const std::string& key, int value) {
    set(key, static_cast<std::int64_t>(value));
  }
  void set(const std::string& key, std::uint64_t value);
  void set(const std::string& key, bool value);

  /// Stamps duration_sec from the construction time and writes the file.
  void write(const std::filesystem::path& path) const;

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace warpfuse
