#pragma once

#include <cstddef>

namespace nibm {

// Worker threads used by the library's parallel loops. 0 (the default) means
// one per hardware thread. Results do not depend on this setting.
void set_workers(std::size_t count);
std::size_t workers();

} // namespace nibm
