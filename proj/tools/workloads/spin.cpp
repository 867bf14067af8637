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

// Single-threaded busy loop for a fixed wall time, split evenly into marked
// items.

#include <chrono>
#include <cstdio>
#include <cstdlib>

#include <CLI11.hpp>

int main(int argc, char** argv) {
  CLI::App app{"spin: burn one core"};
  double seconds = 20.0;
  long items = 0;
  app.add_option("--seconds", seconds, "Total busy time")->check(CLI::NonNegativeNumber);
  app.add_option("--items", items, "Marked items (default: EDGEBENCH_BATCH_SIZE or 1)");
  CLI11_PARSE(app, argc, argv);
  if (items <= 0) {
    const char* env = std::getenv("EDGEBENCH_BATCH_SIZE");
    items = env ? std::atol(env) : 1;
    if (items <= 0) items = 1;
  }

  using Clock = std::chrono::steady_clock;
  const auto begin = Clock::now();
  const auto per_item = std::chrono::duration<double>(seconds / static_cast<double>(items));
  volatile unsigned long long sink = 0;
  for (long j = 0; j < items; ++j) {
    std::printf("EDGEOPS:ITEM:%ld:START\n", j);
    std::fflush(stdout);
    const auto until = begin + std::chrono::duration_cast<Clock::duration>(per_item * static_cast<double>(j + 1));
    while (Clock::now() < until) {
      for (int k = 0; k < 10000; ++k) sink = sink * 6364136223846793005ULL + 1442695040888963407ULL;
    }
    std::printf("EDGEOPS:ITEM:%ld:END\n", j);
    std::fflush(stdout);
  }
  return 0;
}
