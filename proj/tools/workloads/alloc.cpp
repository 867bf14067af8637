// Copyright 2026 The edgebench Authors
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

// Touches a fixed amount of memory, then holds it across marked items.

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <thread>
#include <vector>

#include <CLI11.hpp>

namespace {

std::vector<char*> touch(std::size_t mib) {
  std::vector<char*> blocks;
  for (std::size_t i = 0; i < mib; ++i) {
    auto* p = static_cast<char*>(std::malloc(1 << 20));
    if (!p) {
      std::fprintf(stderr, "alloc: out of memory after %zu MiB\n", i);
      std::exit(1);
    }
    std::memset(p, static_cast<int>(i & 0xFF) | 1, 1 << 20);
    blocks.push_back(p);
  }
  return blocks;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"alloc: hold resident memory"};
  std::size_t mib = 256, child_mib = 0;
  double hold = 3.0;
  long items = 0;
  app.add_option("--mib", mib, "MiB to allocate and touch");
  app.add_option("--hold", hold, "Seconds to keep the memory")->check(CLI::NonNegativeNumber);
  app.add_option("--items", items, "Marked items (default: EDGEBENCH_BATCH_SIZE or 1)");
  app.add_option("--child-mib", child_mib, "Also fork a child holding this many MiB");
  CLI11_PARSE(app, argc, argv);
  if (items <= 0) {
    const char* env = std::getenv("EDGEBENCH_BATCH_SIZE");
    items = env ? std::atol(env) : 1;
    if (items <= 0) items = 1;
  }

  pid_t child = -1;
  if (child_mib > 0) {
    child = ::fork();
    if (child == 0) {
      auto blocks = touch(child_mib);
      std::this_thread::sleep_for(std::chrono::duration<double>(hold + 1.0));
      _exit(0);
    }
  }

  auto blocks = touch(mib);
  const auto per_item = std::chrono::duration<double>(hold / static_cast<double>(items));
  for (long j = 0; j < items; ++j) {
    std::printf("EDGEOPS:ITEM:%ld:START\n", j);
    std::fflush(stdout);
    std::this_thread::sleep_for(per_item);
    std::printf("EDGEOPS:ITEM:%ld:END\n", j);
    std::fflush(stdout);
  }
  if (child > 0) {
    ::kill(child, SIGTERM);
    ::waitpid(child, nullptr, 0);
  }
  for (auto* p : blocks) std::free(p);
  return 0;
}
