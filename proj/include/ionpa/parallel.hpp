#pragma once

#include <cstddef>
#include <exception>
#include <optional>
#include <type_traits>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ionpa {

template <class F>
using map_result_t = std::invoke_result_t<F&, std::size_t>;

// Reference implementation; parallel_map must reproduce it exactly.
template <class F>
std::vector<map_result_t<F>> serial_map(std::size_t n, F&& fn)
{
    std::vector<map_result_t<F>> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; i++)
        out.push_back(fn(i));
    return out;
}

// Each index is evaluated independently and stored in its own slot, so the
// result does not depend on the number of workers. workers <= 0 uses the
// OpenMP default.
template <class F>
std::vector<map_result_t<F>> parallel_map(std::size_t n, F&& fn, int workers = 0)
{
    using R = map_result_t<F>;
    std::vector<std::optional<R>> slots(n);
    std::vector<std::exception_ptr> errors(n);
    const long long count = static_cast<long long>(n);
#ifdef _OPENMP
    int nt = workers > 0 ? workers : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 1) num_threads(nt)
#else
    (void)workers;
#endif
    for (long long i = 0; i < count; i++) {
        try {
            slots[i].emplace(fn(static_cast<std::size_t>(i)));
        } catch (...) {
            errors[i] = std::current_exception();
        }
    }
    std::vector<R> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; i++) {
        if (errors[i])
            std::rethrow_exception(errors[i]);
        out.push_back(std::move(*slots[i]));
    }
    return out;
}

} // namespace ionpa
