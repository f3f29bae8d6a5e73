#ifndef WEBMETER_IDS_H_
#define WEBMETER_IDS_H_

#include <cstdint>

namespace webmeter {

// Milliseconds. Trace-relative unless stated otherwise.
using Millis = std::int64_t;

enum class TabId : std::int64_t {};
enum class WindowId : std::int64_t {};
enum class PageId : std::int64_t {};

template <typename Id>
constexpr std::int64_t ToInt(Id id) {
  return static_cast<std::int64_t>(id);
}

}  // namespace webmeter

#endif  // WEBMETER_IDS_H_
