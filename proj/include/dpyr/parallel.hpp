#pragma once

#include <functional>

namespace dpyr {

/// Runs fn(0..n-1) on up to `threads` workers. Tasks must be independent and
/// write only to their own slots, so any schedule produces identical output.
/// threads <= 1 runs inline. The first task exception is rethrown after join.
void parallel_for(int n, int threads, const std::function<void(int)>& fn);

}  // namespace dpyr
