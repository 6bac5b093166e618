// Copyright (c) 2026 the rowcol authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>

namespace rowcol {

/// Worker count: ROWCOL_THREADS when set and positive, otherwise the hardware
/// concurrency (ROWCOL_THREADS=0 also means auto).
unsigned worker_count();

/// Run fn over [0, n) split into contiguous ranges, one per worker. Callers
/// must write results into per-index slots so output is independent of the
/// split. Exceptions from workers are rethrown on the calling thread.
void parallel_for(uint64_t n, const std::function<void(uint64_t begin, uint64_t end)>& fn);

}  // namespace rowcol
