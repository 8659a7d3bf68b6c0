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

#include "warpfuse/manifest.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>

#include "warpfuse/error.hpp"

namespace warpfuse {

RunManifest::RunManifest(std::string subcommand)
    : start_(std::chrono::steady_clock::now()) {
  entries_.emplace_back("subcommand", std::move(subcommand));
  entries_.emplace_back("version", kToolVersion);
}

void RunManifest::set(const std::string& key, const std::string& value) {
  entries_.emplace_back(key, value);
}

void RunManifest::set(const std::string& key, double value) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  entries_.emplace_back(key, buf);
}

void RunManifest::set(const std::string& key, std::int64_t value) {
  entries_.emplace_back(key, std::to_string(value));
}

void RunManifest::set(const std::string& key, std::uint64_t value) {
  entries_.emplace_back(key, std::to_string(value));
}

void RunManifest::set(const std::string& key, bool value) {
  entries_.emplace_back(key, value ? "true" : "false");
}

void RunManifest::write(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write manifest: " + path.string());
  for (const auto& [key, value] : entries_) out << key << "=" << value << "\n";
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start_)
          .count();
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.3f", seconds);
  out << "duration_sec=" << buf << "\n";
}

}  // namespace warpfuse
