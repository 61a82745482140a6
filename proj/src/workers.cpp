#include "nibm/workers.hpp"

#include <algorithm>
#include <atomic>
#include <thread>

namespace nibm {

namespace {
std::atomic<std::size_t> g_workers{0};
}

void set_workers(std::size_t count) { g_workers = count; }

std::size_t workers() {
    const std::size_t w = g_workers;
    return w ? w : std::max(1u, std::thread::hardware_concurrency());
}

} // namespace nibm
