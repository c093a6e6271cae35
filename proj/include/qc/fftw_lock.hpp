#pragma once
#include <mutex>

namespace qc {
// FFTW planning is not thread-safe; every plan creation and destruction goes through this
std::mutex& fftw_planner_mutex();
}
