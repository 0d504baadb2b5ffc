#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace carbonplace {

// Seconds since the Unix epoch, UTC.
using Timestamp = std::int64_t;

constexpr Timestamp kTick = 300;
constexpr Timestamp kHour = 3600;
constexpr Timestamp kDay = 86400;
constexpr double kJoulesPerKwh = 3.6e6;
constexpr double kHoursPerMonth = 730.0;

class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Accepts "YYYY-MM-DDTHH:MM:SSZ" and "YYYY-MM-DD HH:MM:SS".
Timestamp parse_timestamp(std::string_view text);
std::string format_timestamp(Timestamp t);

std::vector<std::string> split_csv_line(std::string_view line);
std::string trim(std::string_view s);
std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

// splitmix64 finalizer; used to derive independent stream seeds.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

// splitmix64 stream; cheap to seed, so the GA can give every child its own stream.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }
  result_type operator()() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

}  // namespace carbonplace
