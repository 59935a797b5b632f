// common.hpp
// Shared error / warning plumbing for the statarb library.
#pragma once

#include <functional>
#include <mutex>
#include <stdexcept>
#include <string>
#include <utility>

#include <fmt/format.h>

namespace statarb {

// Hard errors surface as exceptions; recoverable conditions go through warn().
class Error : public std::runtime_error {
public:
    explicit Error(std::string msg) : std::runtime_error(std::move(msg)) {}
};

template <typename... Args>
[[noreturn]] void fail(fmt::format_string<Args...> f, Args&&... args) {
    throw Error(fmt::format(f, std::forward<Args>(args)...));
}

using WarnHandler = std::function<void(const std::string&)>;

namespace detail {
inline std::mutex& warn_mutex() {
    static std::mutex m;
    return m;
}
inline WarnHandler& warn_handler() {
    static WarnHandler h = [](const std::string& msg) {
        fmt::print(stderr, "[statarb] warning: {}\n", msg);
    };
    return h;
}
}  // namespace detail

inline void set_warn_handler(WarnHandler h) {
    std::lock_guard lock(detail::warn_mutex());
    detail::warn_handler() = std::move(h);
}

template <typename... Args>
void warn(fmt::format_string<Args...> f, Args&&... args) {
    std::lock_guard lock(detail::warn_mutex());
    if (detail::warn_handler()) detail::warn_handler()(fmt::format(f, std::forward<Args>(args)...));
}

}  // namespace statarb
