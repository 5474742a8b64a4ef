#ifndef FAIRBOOST_PARALLEL_HPP_
#define FAIRBOOST_PARALLEL_HPP_

#include <cstddef>
#include <functional>

namespace fairboost {

/// Worker count: FAIRBOOST_THREADS when set to a positive integer, otherwise
/// the hardware concurrency (at least 1).
std::size_t thread_count();

/// Runs body(i) for i in [0, n) on up to thread_count() threads. Each index
/// runs exactly once; the first exception thrown is rethrown after all
/// workers have stopped.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace fairboost

#endif  // FAIRBOOST_PARALLEL_HPP_
