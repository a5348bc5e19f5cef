#pragma once

namespace tinet {

/// Worker threads used by the grid sweeps. No effect without OpenMP.
void set_thread_count(int threads);
int thread_count();

}  // namespace tinet
