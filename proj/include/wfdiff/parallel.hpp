#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <thread>
#include <vector>

namespace wfdiff {

// Replicates are processed in fixed-size blocks addressed by block index.
// Workers pull blocks dynamically, but every block's output lands in its own
// slot and per-block RNG streams are derived from global replicate indices,
// so results are bit-identical for any worker count.
inline constexpr std::int64_t kReplicateBlock = 8192;

inline int resolve_workers(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

inline void run_blocks(
    std::int64_t total, std::int64_t block_size, int workers,
    const std::function<void(std::int64_t block, std::int64_t begin,
                             std::int64_t end)>& fn) {
  if (total <= 0) return;
  const std::int64_t blocks = (total + block_size - 1) / block_size;
  workers = resolve_workers(workers);
  if (workers == 1 || blocks == 1) {
    for (std::int64_t b = 0; b < blocks; ++b)
      fn(b, b * block_size, std::min(total, (b + 1) * block_size));
    return;
  }
  std::atomic<std::int64_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::int64_t b = next.fetch_add(1);
      if (b >= blocks) return;
      fn(b, b * block_size, std::min(total, (b + 1) * block_size));
    }
  };
  std::vector<std::thread> pool;
  const int spawn = static_cast<int>(std::min<std::int64_t>(workers, blocks));
  pool.reserve(spawn);
  for (int i = 0; i < spawn; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
}

}  // namespace wfdiff
