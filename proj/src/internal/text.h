#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace obb::internal {

std::string_view trim(std::string_view s);
bool iequals(std::string_view a, std::string_view b);

// Shortest decimal that parses back to the same double.
std::string format_shortest(double v);
// printf("%.*g") with `digits` significant digits.
std::string format_significant(double v, int digits);
// printf("%.*f").
std::string format_fixed(double v, int decimals);

// Whole-token parses; surrounding whitespace is ignored.
std::optional<double> parse_double(std::string_view s);
std::optional<long long> parse_integer(std::string_view s);

std::vector<std::string_view> split_whitespace(std::string_view line);

// Splits on '\n', dropping a trailing '\r' from each line.
std::vector<std::string_view> split_lines(std::string_view text);

std::string xml_escape(std::string_view s);

// Runs fn(i) for i in [0, n) on up to `jobs` threads. Each index is handled by
// exactly one call; callers write results by index so output order does not
// depend on scheduling. The first exception by index is rethrown.
template <typename Fn>
void parallel_for(std::size_t n, unsigned jobs, Fn&& fn) {
  if (jobs <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const std::size_t workers = std::min<std::size_t>(jobs, n);
  std::vector<std::exception_ptr> errors(n);
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (std::size_t t = 0; t < workers; ++t) {
    threads.emplace_back([&, t] {
      for (std::size_t i = t; i < n; i += workers) {
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& th : threads) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace obb::internal
